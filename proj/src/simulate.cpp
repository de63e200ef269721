#include "bdmm/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "bdmm/errors.hpp"

namespace bdmm {
namespace {

constexpr double kTimeEps = 1e-12;
const double kInf = std::numeric_limits<double>::infinity();

Vec stack_locations(const std::vector<Particle>& ps, int dim) {
  Vec z(static_cast<int>(ps.size()) * dim);
  for (size_t i = 0; i < ps.size(); ++i) z.segment(static_cast<int>(i) * dim, dim) = ps[i].location;
  return z;
}

// Incremental Euler-Maruyama walker along the global time lattice.
class EulerPath {
 public:
  EulerPath(const MoveSpec& move, const ParameterVector& th, const Configuration& start,
            const DomainBox& domain, double t0, double grid_dt, RngStream& rng)
      : move_(move), th_(th), domain_(domain), dt_(grid_dt), rng_(rng), t_(t0) {
    parts_ = start.particles();
    dim_ = domain.dim();
    path_.times.push_back(t0);
    path_.states.push_back(stack_locations(parts_, dim_));
  }

  void advance_to(double t_target) {
    while (t_ < t_target - kTimeEps) {
      double t_next = next_lattice_after(t_);
      if (t_next > t_target - kTimeEps) t_next = t_target;
      step_to(t_next);
    }
  }

  double time() const { return t_; }
  const std::vector<Particle>& particles() const { return parts_; }
  Configuration config() const { return Configuration(parts_); }
  SegmentPath take_path() { return std::move(path_); }

 private:
  double next_lattice_after(double t) const {
    double k = std::floor(t / dt_ + 1e-9) + 1.0;
    double tn = k * dt_;
    while (tn <= t + kTimeEps) tn += dt_;
    return tn;
  }

  void step_to(double t_next) {
    const double h = t_next - t_;
    if (!parts_.empty()) {
      const double sqrt_h = std::sqrt(h);
      const Vec v = move_.zero_drift ? Vec(Vec::Zero(static_cast<int>(parts_.size()) * dim_))
                                     : move_.drift(th_, parts_);
      if (move_.isotropic_sigma) {
        for (size_t i = 0; i < parts_.size(); ++i) {
          const double s = move_.isotropic_sigma(parts_[i]);
          Vec z = parts_[i].location;
          for (int k = 0; k < dim_; ++k)
            z[k] += v[static_cast<int>(i) * dim_ + k] * h + s * sqrt_h * rng_.normal();
          parts_[i].location = domain_.apply_boundary(z);
        }
      } else {
        const auto blocks = move_.diffusion(parts_);
        for (size_t i = 0; i < parts_.size(); ++i) {
          Vec xi(dim_);
          for (int k = 0; k < dim_; ++k) xi[k] = rng_.normal();
          Vec z = parts_[i].location + v.segment(static_cast<int>(i) * dim_, dim_) * h +
                  sqrt_h * (blocks[i] * xi);
          parts_[i].location = domain_.apply_boundary(z);
        }
      }
    }
    t_ = t_next;
    path_.times.push_back(t_);
    path_.states.push_back(stack_locations(parts_, dim_));
  }

  const MoveSpec& move_;
  const ParameterVector& th_;
  const DomainBox& domain_;
  double dt_;
  RngStream& rng_;
  double t_;
  int dim_;
  std::vector<Particle> parts_;
  SegmentPath path_;
};

}  // namespace

SegmentPath euler_maruyama_segment(const MoveSpec& move, const ParameterVector& th,
                                   const Configuration& start, const DomainBox& domain,
                                   double t0, double duration, double grid_dt, RngStream& rng) {
  if (duration < 0.0) throw std::invalid_argument("euler segment: negative duration");
  EulerPath path(move, th, start, domain, t0, grid_dt, rng);
  path.advance_to(t0 + duration);
  return path.take_path();
}

InterjumpResult sample_interjump(const ModelSpec& model, const ParameterVector& th,
                                 const Configuration& x, double t0, double max_duration,
                                 double grid_dt, RngStream& rng) {
  if (x.size() > model.n_max)
    throw std::invalid_argument("sample_interjump: configuration exceeds n_max");
  EulerPath path(model.move, th, x, model.domain, t0, grid_dt, rng);
  InterjumpResult out;

  const double bound = model.total_bound(th, x.size());
  if (bound <= 0.0) {
    path.advance_to(t0 + max_duration);
    out.waiting = kInf;
    out.path = path.take_path();
    return out;
  }

  if (model.intensities_location_independent()) {
    // The total intensity is constant between jumps; no thinning needed.
    const double alpha = model.total_intensity(th, x);
    if (alpha <= 0.0) {
      path.advance_to(t0 + max_duration);
      out.waiting = kInf;
    } else {
      const double w = rng.exponential(alpha);
      path.advance_to(t0 + std::min(w, max_duration));
      out.waiting = w;
    }
    out.path = path.take_path();
    return out;
  }

  double t = t0;
  while (true) {
    const double gap = rng.exponential(bound);
    if (t + gap > t0 + max_duration) {
      path.advance_to(t0 + max_duration);
      out.waiting = kInf;
      break;
    }
    t += gap;
    path.advance_to(t);
    const double alpha = model.total_intensity(th, path.config());
    if (alpha > bound * (1.0 + 1e-9))
      throw NumericError("thinning: intensity exceeds its cardinality bound");
    if (rng.uniform() * bound < alpha) {
      out.waiting = path.time() - t0;
      break;
    }
  }
  out.path = path.take_path();
  return out;
}

JumpEvent sample_jump(const ModelSpec& model, const ParameterVector& th,
                      const Configuration& x_pre, double t, RngStream& rng) {
  const double b = model.beta.eval(th, x_pre);
  const double d = model.delta.eval(th, x_pre);
  const double m = model.tau.eval(th, x_pre);
  const double alpha = b + d + m;
  if (alpha <= 0.0) throw std::logic_error("sample_jump: total intensity is zero");
  const double u = rng.uniform() * alpha;
  const KernelSpec& kernel = (u < b) ? model.birth : (u < b + d ? model.death : model.mutation);
  return kernel.sample(th, x_pre, t, rng);
}

Trajectory simulate(const ModelSpec& model, const ParameterVector& th, const Configuration& x0,
                    const SimOptions& opts) {
  if (!(opts.horizon > 0.0)) throw std::invalid_argument("simulate: horizon must be positive");
  if (!(opts.grid_dt > 0.0) || opts.grid_dt > opts.horizon)
    throw std::invalid_argument("simulate: grid_dt must lie in (0, horizon]");
  if (opts.max_events < 1) throw std::invalid_argument("simulate: max_events must be >= 1");
  if (x0.size() > model.n_max)
    throw ValidationError("simulate: initial configuration exceeds n_max");
  for (const auto& p : x0) {
    if (p.label < 0 || p.label >= model.n_labels())
      throw ValidationError("simulate: initial particle with unknown label");
    if (!model.domain.contains(p.location, 1e-9))
      throw ValidationError("simulate: initial particle outside the domain");
  }

  RngStream rng(opts.seed, opts.stream);

  std::map<int, Track> tracks;
  int next_id = 0;
  for (const auto& p : x0) {
    Track tr;
    tr.id = p.id;
    tr.labels.push_back({0.0, 0.0, p.label});
    tr.samples.push_back({0.0, p.location});
    tracks.emplace(p.id, std::move(tr));
    next_id = std::max(next_id, p.id + 1);
  }

  auto append_path = [&](const std::vector<Particle>& ordered, const SegmentPath& path) {
    const int dim = model.dim();
    for (size_t r = 0; r < path.times.size(); ++r) {
      for (size_t i = 0; i < ordered.size(); ++i) {
        Track& tr = tracks.at(ordered[i].id);
        if (!tr.samples.empty() && path.times[r] <= tr.samples.back().t + kTimeEps) continue;
        tr.samples.push_back(
            {path.times[r], path.states[r].segment(static_cast<int>(i) * dim, dim)});
      }
    }
  };

  auto assemble = [&](std::vector<JumpEvent> evs) {
    Trajectory traj;
    traj.horizon = opts.horizon;
    traj.grid_dt = opts.grid_dt;
    traj.initial = x0;
    traj.events = std::move(evs);
    for (auto& [id, tr] : tracks) {
      if (!tr.death_time) tr.labels.back().t_end = opts.horizon;
      traj.tracks.push_back(tr);
    }
    return traj;
  };

  Configuration x = x0;
  double t = 0.0;
  std::vector<JumpEvent> events;

  while (opts.horizon - t > kTimeEps) {
    InterjumpResult seg =
        sample_interjump(model, th, x, t, opts.horizon - t, opts.grid_dt, rng);
    append_path(x.particles(), seg.path);
    if (!(seg.waiting < opts.horizon - t)) break;  // ran to the horizon

    const double t_jump = seg.path.times.back();
    std::vector<Particle> moved = x.particles();
    const int dim = model.dim();
    for (size_t i = 0; i < moved.size(); ++i)
      moved[i].location = seg.path.states.back().segment(static_cast<int>(i) * dim, dim);
    const Configuration x_pre(moved);

    if (static_cast<int>(events.size()) >= opts.max_events)
      throw TruncatedTrajectory("simulate: max_events reached", assemble(events));

    JumpEvent ev = sample_jump(model, th, x_pre, t_jump, rng);
    switch (ev.kind) {
      case JumpKind::birth: {
        ev.particle_id = next_id++;
        Particle p(ev.particle_id, *ev.birth_location, *ev.birth_label);
        x = x_pre.with_birth(p);
        Track tr;
        tr.id = p.id;
        tr.labels.push_back({t_jump, 0.0, p.label});
        tr.samples.push_back({t_jump, p.location});
        tracks.emplace(p.id, std::move(tr));
        break;
      }
      case JumpKind::death: {
        x = x_pre.with_death(ev.particle_id);
        Track& tr = tracks.at(ev.particle_id);
        tr.death_time = t_jump;
        tr.labels.back().t_end = t_jump;
        break;
      }
      case JumpKind::mutation: {
        x = x_pre.with_mutation(ev.particle_id, *ev.mutation_to);
        Track& tr = tracks.at(ev.particle_id);
        tr.labels.back().t_end = t_jump;
        tr.labels.push_back({t_jump, 0.0, *ev.mutation_to});
        break;
      }
    }
    events.push_back(std::move(ev));
    t = t_jump;
  }

  return assemble(std::move(events));
}

}  // namespace bdmm
