#include "bdmm/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "bdmm/errors.hpp"

namespace bdmm {

namespace {
constexpr double kTimeTol = 1e-9;
bool near(double a, double b) { return std::abs(a - b) <= kTimeTol; }
}  // namespace

bool Track::alive_at(double t) const {
  if (t < birth_time()) return false;
  if (death_time && t >= *death_time) return false;
  return true;
}

Label Track::label_at(double t) const {
  for (const auto& iv : labels) {
    if (t < iv.t_end) return iv.label;
  }
  return labels.back().label;
}

Vec Track::position_at(double t) const {
  const auto& s = samples;
  if (t <= s.front().t) return s.front().location;
  if (t >= s.back().t) return s.back().location;
  auto it = std::lower_bound(s.begin(), s.end(), t,
                             [](const TrackSample& a, double v) { return a.t < v; });
  const auto& hi = *it;
  const auto& lo = *(it - 1);
  const double dt = hi.t - lo.t;
  if (dt <= 1e-15) return hi.location;
  const double w = (t - lo.t) / dt;
  return (1.0 - w) * lo.location + w * hi.location;
}

const Track* Trajectory::find_track(int id) const {
  auto it = std::lower_bound(tracks.begin(), tracks.end(), id,
                             [](const Track& tr, int v) { return tr.id < v; });
  return (it != tracks.end() && it->id == id) ? &*it : nullptr;
}

Configuration configuration_at(const Trajectory& traj, double t) {
  if (t < 0.0 || t > traj.horizon)
    throw std::out_of_range("configuration_at: t outside [0, horizon]");
  std::vector<Particle> ps;
  for (const auto& tr : traj.tracks) {
    if (!tr.alive_at(t)) continue;
    ps.emplace_back(tr.id, tr.position_at(t), tr.label_at(t), tr.anchor());
  }
  return Configuration(std::move(ps));
}

std::vector<TrajectoryIssue> validate_trajectory(const Trajectory& traj) {
  std::vector<TrajectoryIssue> issues;
  auto add = [&](int ev, double t, std::string msg) {
    issues.push_back({ev, t, std::move(msg)});
  };

  if (!(traj.horizon > 0.0)) add(-1, 0.0, "horizon must be positive");
  if (!(traj.grid_dt > 0.0)) add(-1, 0.0, "grid_dt must be positive");
  if (!issues.empty()) return issues;

  // Track structure.
  std::set<int> track_ids;
  for (const auto& tr : traj.tracks) {
    if (!track_ids.insert(tr.id).second)
      add(-1, 0.0, "duplicate track id " + std::to_string(tr.id));
    if (tr.labels.empty() || tr.samples.empty()) {
      add(-1, 0.0, "track " + std::to_string(tr.id) + " has no labels or samples");
      continue;
    }
    for (size_t k = 1; k < tr.labels.size(); ++k) {
      if (!near(tr.labels[k].t_begin, tr.labels[k - 1].t_end))
        add(-1, tr.labels[k].t_begin,
            "track " + std::to_string(tr.id) + ": label intervals not contiguous");
    }
    for (size_t k = 1; k < tr.samples.size(); ++k) {
      if (!(tr.samples[k].t > tr.samples[k - 1].t - kTimeTol))
        add(-1, tr.samples[k].t,
            "track " + std::to_string(tr.id) + ": samples out of time order");
    }
    if (!near(tr.samples.front().t, tr.birth_time()))
      add(-1, tr.birth_time(),
          "track " + std::to_string(tr.id) + ": first sample not at birth time");
    const double end = tr.death_time ? *tr.death_time : traj.horizon;
    if (!near(tr.labels.back().t_end, end))
      add(-1, end, "track " + std::to_string(tr.id) + ": label cover does not reach lifetime end");
    if (tr.samples.back().t > end + kTimeTol)
      add(-1, tr.samples.back().t,
          "track " + std::to_string(tr.id) + ": sample past lifetime end");
  }

  // Event ordering and field consistency.
  double prev_t = 0.0;
  for (size_t i = 0; i < traj.events.size(); ++i) {
    const auto& e = traj.events[i];
    if (e.time <= prev_t || (i > 0 && e.time <= traj.events[i - 1].time))
      add(static_cast<int>(i), e.time, "non-increasing event times");
    if (e.time <= 0.0 || e.time > traj.horizon)
      add(static_cast<int>(i), e.time, "event time outside (0, horizon]");
    try {
      e.validate();
    } catch (const ValidationError& ex) {
      add(static_cast<int>(i), e.time, ex.what());
    }
    prev_t = std::max(prev_t, e.time);
  }

  // Label switches must correspond to mutation events.
  std::set<std::pair<int, long long>> mutation_keys;
  auto time_key = [](double t) { return static_cast<long long>(std::llround(t * 1e9)); };
  for (const auto& e : traj.events) {
    if (e.kind == JumpKind::mutation) mutation_keys.insert({e.particle_id, time_key(e.time)});
  }
  for (const auto& tr : traj.tracks) {
    for (size_t k = 1; k < tr.labels.size(); ++k) {
      if (!mutation_keys.count({tr.id, time_key(tr.labels[k].t_begin)}))
        add(-1, tr.labels[k].t_begin,
            "track " + std::to_string(tr.id) + ": label change without a mutation event");
    }
  }

  // Initial configuration <-> tracks born at t = 0.
  for (const auto& p : traj.initial) {
    const Track* tr = traj.find_track(p.id);
    if (!tr) {
      add(-1, 0.0, "initial particle " + std::to_string(p.id) + " has no track");
      continue;
    }
    if (!near(tr->birth_time(), 0.0))
      add(-1, 0.0, "initial particle " + std::to_string(p.id) + " track does not start at 0");
    else if (tr->label_at(0.0) != p.label)
      add(-1, 0.0, "initial particle " + std::to_string(p.id) + " label mismatch");
  }
  for (const auto& tr : traj.tracks) {
    if (near(tr.birth_time(), 0.0) && !traj.initial.contains_id(tr.id))
      add(-1, 0.0, "track " + std::to_string(tr.id) +
                       " starts at 0 but is not in the initial configuration");
  }

  // Replay events against the tracks.
  Configuration config = traj.initial;
  for (size_t i = 0; i < traj.events.size(); ++i) {
    const auto& e = traj.events[i];
    const int idx = static_cast<int>(i);
    const Track* tr = traj.find_track(e.particle_id);
    if (!tr) {
      add(idx, e.time, "event references unknown track id " + std::to_string(e.particle_id));
      continue;
    }
    try {
      switch (e.kind) {
        case JumpKind::birth: {
          if (!near(tr->birth_time(), e.time))
            add(idx, e.time, "birth event time disagrees with track birth");
          if (e.birth_location &&
              (tr->samples.front().location - *e.birth_location).norm() > 1e-9)
            add(idx, e.time, "birth location disagrees with first track sample");
          if (e.birth_label && tr->label_at(e.time) != *e.birth_label)
            add(idx, e.time, "birth label disagrees with track labels");
          config = config.with_birth(Particle(e.particle_id, *e.birth_location,
                                              e.birth_label.value_or(0)));
          break;
        }
        case JumpKind::death: {
          const Particle* p = config.find(e.particle_id);
          if (!p) {
            add(idx, e.time, "death of a particle that is not alive");
            break;
          }
          if (!tr->death_time || !near(*tr->death_time, e.time))
            add(idx, e.time, "death event time disagrees with track death time");
          if (e.death_label && p->label != *e.death_label)
            add(idx, e.time, "death label disagrees with particle label");
          config = config.with_death(e.particle_id);
          break;
        }
        case JumpKind::mutation: {
          const Particle* p = config.find(e.particle_id);
          if (!p) {
            add(idx, e.time, "mutation of a particle that is not alive");
            break;
          }
          if (e.mutation_from && p->label != *e.mutation_from)
            add(idx, e.time, "mutation 'from' label disagrees with particle label");
          if (e.mutation_to && tr->label_at(e.time) != *e.mutation_to)
            add(idx, e.time, "mutation event disagrees with track label intervals");
          config = config.with_mutation(e.particle_id, e.mutation_to.value_or(p->label));
          break;
        }
      }
    } catch (const ValidationError& ex) {
      add(idx, e.time, ex.what());
    }
  }

  // Survivors after replay must be exactly the tracks without a death time.
  for (const auto& tr : traj.tracks) {
    const bool survives = !tr.death_time.has_value();
    if (survives != config.contains_id(tr.id))
      add(-1, traj.horizon,
          "track " + std::to_string(tr.id) + ": survivor status disagrees with events");
  }

  // Grid coverage: every alive particle sampled at every grid point.
  for (const auto& tr : traj.tracks) {
    const double end = std::min(tr.death_time ? *tr.death_time : traj.horizon, traj.horizon);
    long long k = static_cast<long long>(std::ceil(tr.birth_time() / traj.grid_dt - 1e-9));
    size_t si = 0;
    for (; static_cast<double>(k) * traj.grid_dt <= end + kTimeTol; ++k) {
      const double tk = static_cast<double>(k) * traj.grid_dt;
      if (tk < tr.birth_time() - kTimeTol) continue;
      if (tr.death_time && tk >= *tr.death_time - kTimeTol) break;
      while (si < tr.samples.size() && tr.samples[si].t < tk - kTimeTol) ++si;
      if (si >= tr.samples.size() || !near(tr.samples[si].t, tk)) {
        add(-1, tk, "track " + std::to_string(tr.id) + ": missing sample at grid point");
        break;  // one report per track is enough
      }
    }
  }

  return issues;
}

std::string format_issues(const std::vector<TrajectoryIssue>& issues) {
  std::ostringstream os;
  for (const auto& it : issues) {
    os << "[t=" << it.time;
    if (it.event_index >= 0) os << ", event " << it.event_index;
    os << "] " << it.message << "\n";
  }
  return os.str();
}

}  // namespace bdmm
