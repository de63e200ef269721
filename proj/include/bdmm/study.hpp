#pragma once

#include <string>
#include <vector>

#include "bdmm/ellipsoid.hpp"
#include "bdmm/fit.hpp"
#include "bdmm/simulate.hpp"

namespace bdmm {

/// Simulate-and-refit experiment: R independent trajectories at the truth,
/// one fit per replicate, coverage of the level ellipsoid around each fit.
struct StudyConfig {
  ModelSpec model;
  ParameterVector truth;
  std::vector<std::string> free_params;
  ParameterVector theta0;  // fit starting point
  Configuration x0;
  SimOptions sim;          // horizon, grid_dt, master seed
  int replicates = 100;
  double level = 0.95;
  int workers = 0;  // 0: BDMM_WORKERS env or hardware concurrency
  FitOptions fit;
};

struct ReplicateRow {
  int index = 0;
  bool ok = false;
  std::string error;
  Vec estimate;        // free parameters
  double loglik = 0.0;
  bool converged = false;
  Mat covariance;
  bool covered = false;
  int n_events = 0;
};

struct StudyReport {
  std::vector<std::string> free_names;
  std::vector<ReplicateRow> rows;  // in replicate order
  Vec mean_estimate;
  Vec sd_estimate;
  Mat mean_covariance;
  Mat sample_covariance;  // of the estimates across replicates
  double coverage = 0.0;  // fraction of replicates whose ellipsoid covers the truth
  int n_ok = 0;
  int n_failed = 0;
  bool valid = false;  // failure fraction within 10%
};

StudyReport replicate_study(const StudyConfig& config);

/// Tensor-grid likelihood scan over two parameters; returns rows of
/// (value1, value2, loglik).
Mat loglik_surface(const Trajectory& traj, const ModelSpec& model, const ParameterVector& base,
                   const std::string& p1, const Vec& grid1, const std::string& p2,
                   const Vec& grid2);

int default_worker_count();

}  // namespace bdmm
