#pragma once

#include <vector>

#include "bdmm/trajectory.hpp"

namespace bdmm {

/// One inter-event stretch of a trajectory: constant particle set and labels,
/// diffusive motion sampled on the grid. Positions are interpolated lazily;
/// intensity integrals that only see the cardinality never touch them.
struct WalkSegment {
  double t0 = 0.0;
  double t1 = 0.0;
  std::vector<Particle> parts;     // locations at t0
  const JumpEvent* event = nullptr;  // jump at t1; null on the final segment
  std::vector<double> times;       // t0 < grid points < t1, plus both ends
  int dim = 0;

  int n() const { return static_cast<int>(parts.size()); }

  /// Stacked positions (rows = times, cols = n*d); built on first use.
  const Mat& positions() const;

  Configuration config_at_time(double t) const;
  Configuration config_at_t0() const { return Configuration(parts); }
  Configuration pre_event_config() const { return config_at_time(t1); }

 private:
  friend class TrajectoryWalker;
  std::vector<const Track*> tracks_;
  mutable Mat pos_;
  mutable bool pos_ready_ = false;
};

/// Splits a trajectory at its event times and materialises segments on
/// demand. Construction is cheap; hold one per trajectory and reuse it.
class TrajectoryWalker {
 public:
  explicit TrajectoryWalker(const Trajectory& traj);

  int n_segments() const { return static_cast<int>(bounds_.size()) - 1; }
  WalkSegment segment(int k) const;
  const Trajectory& trajectory() const { return *traj_; }

 private:
  const Trajectory* traj_;
  std::vector<double> bounds_;  // 0, event times, horizon
  int dim_ = 0;
};

}  // namespace bdmm
