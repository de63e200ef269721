#include "bdmm/types.hpp"

#include <algorithm>
#include <cmath>

#include "bdmm/errors.hpp"

namespace bdmm {

Boundary boundary_from_string(const std::string& s) {
  if (s == "reflective") return Boundary::reflective;
  if (s == "periodic") return Boundary::periodic;
  if (s == "free") return Boundary::free;
  throw ConfigError("unknown boundary policy: " + s);
}

const char* to_string(Boundary b) {
  switch (b) {
    case Boundary::reflective: return "reflective";
    case Boundary::periodic: return "periodic";
    case Boundary::free: return "free";
  }
  return "?";
}

double DomainBox::volume() const {
  double v = 1.0;
  for (int i = 0; i < dim(); ++i) v *= upper[i] - lower[i];
  return v;
}

bool DomainBox::contains(const Vec& z, double tol) const {
  if (boundary == Boundary::free) return true;
  for (int i = 0; i < dim(); ++i) {
    if (z[i] < lower[i] - tol || z[i] > upper[i] + tol) return false;
  }
  return true;
}

Vec DomainBox::apply_boundary(const Vec& z) const {
  if (boundary == Boundary::free) return z;
  Vec out = z;
  for (int i = 0; i < dim(); ++i) {
    const double lo = lower[i], hi = upper[i];
    const double len = hi - lo;
    double v = out[i];
    if (v >= lo && v <= hi) continue;
    if (boundary == Boundary::periodic) {
      v = std::fmod(v - lo, len);
      if (v < 0) v += len;
      out[i] = lo + v;
    } else {
      // Reflective: fold with period 2*len.
      v = std::fmod(v - lo, 2.0 * len);
      if (v < 0) v += 2.0 * len;
      out[i] = lo + (v <= len ? v : 2.0 * len - v);
    }
  }
  return out;
}

void DomainBox::validate() const {
  if (lower.size() != upper.size() || lower.size() == 0)
    throw ConfigError("domain box: lower/upper must have equal positive dimension");
  if (boundary != Boundary::free) {
    for (int i = 0; i < dim(); ++i) {
      if (!(lower[i] < upper[i]))
        throw ConfigError("domain box: lower[i] < upper[i] required");
    }
  }
}

Configuration::Configuration(std::vector<Particle> ps) : particles_(std::move(ps)) {
  std::sort(particles_.begin(), particles_.end(),
            [](const Particle& a, const Particle& b) { return a.id < b.id; });
  for (size_t i = 1; i < particles_.size(); ++i) {
    if (particles_[i - 1].id == particles_[i].id)
      throw ValidationError("configuration: duplicate particle id " +
                            std::to_string(particles_[i].id));
  }
}

const Particle* Configuration::find(int id) const {
  auto it = std::lower_bound(particles_.begin(), particles_.end(), id,
                             [](const Particle& p, int v) { return p.id < v; });
  return (it != particles_.end() && it->id == id) ? &*it : nullptr;
}

Configuration Configuration::with_birth(Particle p) const {
  if (contains_id(p.id))
    throw ValidationError("birth: particle id already present: " + std::to_string(p.id));
  auto ps = particles_;
  ps.push_back(std::move(p));
  return Configuration(std::move(ps));
}

Configuration Configuration::with_death(int id) const {
  auto ps = particles_;
  auto it = std::find_if(ps.begin(), ps.end(), [&](const Particle& p) { return p.id == id; });
  if (it == ps.end())
    throw ValidationError("death: unknown particle id " + std::to_string(id));
  ps.erase(it);
  Configuration out;
  out.particles_ = std::move(ps);  // order preserved
  return out;
}

Configuration Configuration::with_mutation(int id, Label to) const {
  auto ps = particles_;
  auto it = std::find_if(ps.begin(), ps.end(), [&](const Particle& p) { return p.id == id; });
  if (it == ps.end())
    throw ValidationError("mutation: unknown particle id " + std::to_string(id));
  it->label = to;
  Configuration out;
  out.particles_ = std::move(ps);
  return out;
}

int Configuration::count_label(Label m) const {
  int c = 0;
  for (const auto& p : particles_) c += (p.label == m) ? 1 : 0;
  return c;
}

const char* to_string(JumpKind k) {
  switch (k) {
    case JumpKind::birth: return "birth";
    case JumpKind::death: return "death";
    case JumpKind::mutation: return "mutation";
  }
  return "?";
}

JumpKind jump_kind_from_string(const std::string& s) {
  if (s == "birth") return JumpKind::birth;
  if (s == "death") return JumpKind::death;
  if (s == "mutation") return JumpKind::mutation;
  throw ValidationError("unknown jump kind: " + s);
}

JumpEvent JumpEvent::birth(double t, int id, Vec loc, Label m) {
  JumpEvent e;
  e.time = t;
  e.kind = JumpKind::birth;
  e.particle_id = id;
  e.birth_location = std::move(loc);
  e.birth_label = m;
  return e;
}

JumpEvent JumpEvent::death(double t, int id, Label m) {
  JumpEvent e;
  e.time = t;
  e.kind = JumpKind::death;
  e.particle_id = id;
  e.death_label = m;
  return e;
}

JumpEvent JumpEvent::mutation(double t, int id, Label from, Label to) {
  JumpEvent e;
  e.time = t;
  e.kind = JumpKind::mutation;
  e.particle_id = id;
  e.mutation_from = from;
  e.mutation_to = to;
  return e;
}

void JumpEvent::validate() const {
  const bool b = birth_location.has_value() || birth_label.has_value();
  const bool d = death_label.has_value();
  const bool m = mutation_from.has_value() || mutation_to.has_value();
  switch (kind) {
    case JumpKind::birth:
      if (!(birth_location && birth_label) || d || m)
        throw ValidationError("birth event must carry exactly location and label");
      break;
    case JumpKind::death:
      if (!death_label || b || m)
        throw ValidationError("death event must carry exactly the dying label");
      break;
    case JumpKind::mutation:
      if (!(mutation_from && mutation_to) || b || d)
        throw ValidationError("mutation event must carry exactly from/to labels");
      if (*mutation_from == *mutation_to)
        throw ValidationError("mutation event: from == to");
      break;
  }
}

}  // namespace bdmm
