#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bdmm/types.hpp"

namespace bdmm {

struct LabelInterval {
  double t_begin = 0.0;
  double t_end = 0.0;  // exclusive; the label switches (or the track ends) here
  Label label = 0;
};

struct TrackSample {
  double t = 0.0;
  Vec location;
};

/// Per-particle record of a trajectory: label history and grid samples over
/// the particle's lifetime [birth, death) (right-censored tracks have no
/// death and run to the horizon).
struct Track {
  int id = -1;
  std::vector<LabelInterval> labels;  // contiguous, ordered
  std::vector<TrackSample> samples;   // ordered by time
  std::optional<double> death_time;

  double birth_time() const { return labels.front().t_begin; }
  bool alive_at(double t) const;
  Label label_at(double t) const;  // cadlag: at a mutation time, the new label

  /// Linear interpolation between bracketing samples; clamps outside the
  /// sampled range (used for pre-jump positions of ingested tracks whose
  /// last sample precedes the death time).
  Vec position_at(double t) const;

  Vec anchor() const { return samples.front().location; }
};

struct Trajectory {
  double horizon = 0.0;
  double grid_dt = 0.0;
  Configuration initial;           // state at t = 0
  std::vector<Track> tracks;       // sorted by id
  std::vector<JumpEvent> events;   // ordered by time, all in (0, horizon]

  const Track* find_track(int id) const;
};

/// Alive particles at time t with interpolated locations and current labels;
/// at an event time, the post-jump configuration.
/// Throws std::out_of_range for t outside [0, horizon].
Configuration configuration_at(const Trajectory& traj, double t);

struct TrajectoryIssue {
  int event_index = -1;  // -1 for issues not tied to one event
  double time = 0.0;
  std::string message;
};

/// Checks every structural invariant. An empty report means the trajectory
/// is consistent; violations are data, not faults.
std::vector<TrajectoryIssue> validate_trajectory(const Trajectory& traj);

std::string format_issues(const std::vector<TrajectoryIssue>& issues);

/// Thrown by the simulator when the event cap is reached; carries the
/// partial trajectory built so far.
struct TruncatedTrajectory : std::runtime_error {
  Trajectory partial;
  TruncatedTrajectory(std::string msg, Trajectory t)
      : std::runtime_error(std::move(msg)), partial(std::move(t)) {}
};

}  // namespace bdmm
