#pragma once

#include <cstdint>
#include <vector>

#include "bdmm/model.hpp"
#include "bdmm/rng.hpp"
#include "bdmm/trajectory.hpp"

namespace bdmm {

struct SimOptions {
  double horizon = 1.0;
  double grid_dt = 0.01;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;  // substream id; replicate r runs on (seed, r)
  int max_events = 1000000;
};

/// Piecewise path of the ordered particle list between jumps. Times are
/// absolute and include the global grid points crossed plus the endpoints
/// (candidate jump times enter as extra partial steps).
struct SegmentPath {
  std::vector<double> times;
  std::vector<Vec> states;  // stacked n*d coordinates per time
};

/// Euler-Maruyama integration of the inter-jump SDE from `start` over
/// [t0, t0+duration], stepping on the global grid of spacing grid_dt with a
/// partial final step; boundary policy applied after every step.
SegmentPath euler_maruyama_segment(const MoveSpec& move, const ParameterVector& th,
                                   const Configuration& start, const DomainBox& domain,
                                   double t0, double duration, double grid_dt, RngStream& rng);

struct InterjumpResult {
  /// Time from t0 to the accepted jump; +infinity when no jump occurred
  /// within the window (the path then runs to the window end).
  double waiting = 0.0;
  SegmentPath path;
};

/// Waiting time to the next jump by exact per-segment thinning: proposals at
/// rate equal to the cardinality-indexed intensity bound, accepted with the
/// ratio of the actual total intensity along the moved path. Models whose
/// intensities are location-independent sample the exponential law directly.
InterjumpResult sample_interjump(const ModelSpec& model, const ParameterVector& th,
                                 const Configuration& x, double t0, double max_duration,
                                 double grid_dt, RngStream& rng);

/// Draws the jump type with probabilities (beta, delta, tau) / alpha at the
/// pre-jump configuration, then the jump itself from the matching kernel.
/// Requires alpha(x_pre) > 0.
JumpEvent sample_jump(const ModelSpec& model, const ParameterVector& th,
                      const Configuration& x_pre, double t, RngStream& rng);

/// Full iterative construction from x0 until the horizon. Deterministic for
/// fixed (model, theta, x0, seed/stream) within one build. Throws
/// TruncatedTrajectory when max_events is reached.
Trajectory simulate(const ModelSpec& model, const ParameterVector& th, const Configuration& x0,
                    const SimOptions& opts);

}  // namespace bdmm
