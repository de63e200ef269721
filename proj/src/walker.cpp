#include "bdmm/walker.hpp"

#include <cmath>

#include "bdmm/errors.hpp"

namespace bdmm {
namespace {
constexpr double kTimeEps = 1e-9;
}

const Mat& WalkSegment::positions() const {
  if (!pos_ready_) {
    pos_.resize(static_cast<int>(times.size()), n() * dim);
    for (size_t r = 0; r < times.size(); ++r) {
      for (int i = 0; i < n(); ++i)
        pos_.block(static_cast<int>(r), i * dim, 1, dim) =
            tracks_[static_cast<size_t>(i)]->position_at(times[r]).transpose();
    }
    pos_ready_ = true;
  }
  return pos_;
}

Configuration WalkSegment::config_at_time(double t) const {
  std::vector<Particle> ps = parts;
  for (size_t i = 0; i < ps.size(); ++i) ps[i].location = tracks_[i]->position_at(t);
  return Configuration(std::move(ps));
}

TrajectoryWalker::TrajectoryWalker(const Trajectory& traj) : traj_(&traj) {
  dim_ = traj.initial.empty()
             ? (traj.tracks.empty() ? 1
                                    : static_cast<int>(traj.tracks.front().samples.front().location.size()))
             : static_cast<int>(traj.initial[0].location.size());
  bounds_.push_back(0.0);
  for (const auto& e : traj.events) bounds_.push_back(e.time);
  if (bounds_.back() < traj.horizon - kTimeEps) bounds_.push_back(traj.horizon);
}

WalkSegment TrajectoryWalker::segment(int k) const {
  WalkSegment seg;
  seg.t0 = bounds_[static_cast<size_t>(k)];
  seg.t1 = bounds_[static_cast<size_t>(k) + 1];
  seg.event = (static_cast<size_t>(k) < traj_->events.size()) ? &traj_->events[static_cast<size_t>(k)] : nullptr;
  seg.dim = dim_;

  for (const auto& tr : traj_->tracks) {
    if (tr.birth_time() > seg.t0 + kTimeEps) continue;
    if (tr.death_time && *tr.death_time < seg.t1 - kTimeEps) continue;
    if (tr.death_time && std::abs(*tr.death_time - seg.t0) <= kTimeEps) continue;
    seg.parts.emplace_back(tr.id, tr.position_at(seg.t0), tr.label_at(seg.t0), tr.anchor());
    seg.tracks_.push_back(&tr);
  }

  seg.times.push_back(seg.t0);
  const double dt = traj_->grid_dt;
  long long j = static_cast<long long>(std::floor(seg.t0 / dt + 1e-9)) + 1;
  for (; static_cast<double>(j) * dt < seg.t1 - kTimeEps; ++j) {
    const double tj = static_cast<double>(j) * dt;
    if (tj > seg.t0 + kTimeEps) seg.times.push_back(tj);
  }
  seg.times.push_back(seg.t1);
  return seg;
}

}  // namespace bdmm
