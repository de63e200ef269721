#include "bdmm/study.hpp"

#include <atomic>
#include <cstdlib>
#include <thread>

#include "bdmm/errors.hpp"

namespace bdmm {

int default_worker_count() {
  if (const char* env = std::getenv("BDMM_WORKERS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

StudyReport replicate_study(const StudyConfig& config) {
  if (config.replicates < 1) throw std::invalid_argument("study: replicates >= 1 required");
  const int R = config.replicates;
  const int p = static_cast<int>(config.free_params.size());

  StudyReport report;
  report.free_names = config.free_params;
  report.rows.assign(static_cast<size_t>(R), ReplicateRow{});

  Vec truth_free(p);
  for (int j = 0; j < p; ++j)
    truth_free[j] = config.truth.get(config.free_params[static_cast<size_t>(j)]);

  auto run_one = [&](int r) {
    ReplicateRow row;
    row.index = r;
    try {
      SimOptions sim = config.sim;
      sim.stream = static_cast<std::uint64_t>(r);
      const Trajectory traj = simulate(config.model, config.truth, config.x0, sim);
      row.n_events = static_cast<int>(traj.events.size());
      const FitResult fit =
          fit_mle(traj, config.model, config.free_params, config.theta0, config.fit);
      row.estimate = fit.free_values();
      row.loglik = fit.loglik;
      row.converged = fit.converged;
      if (!fit.converged) throw NumericError("fit did not converge");
      if (!fit.covariance_ok) throw NumericError("singular information matrix");
      row.covariance = fit.covariance;
      const Ellipsoid ell = confidence_ellipsoid(fit, config.level);
      row.covered = ellipsoid_contains(ell, truth_free);
      row.ok = true;
    } catch (const std::exception& e) {
      row.ok = false;
      row.error = e.what();
    }
    report.rows[static_cast<size_t>(r)] = std::move(row);
  };

  const int workers =
      std::min(config.workers > 0 ? config.workers : default_worker_count(), R);
  if (workers <= 1) {
    for (int r = 0; r < R; ++r) run_one(r);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&]() {
        while (true) {
          const int r = next.fetch_add(1);
          if (r >= R) return;
          run_one(r);
        }
      });
    }
    for (auto& th : pool) th.join();
  }

  // Aggregate over successful replicates.
  report.mean_estimate = Vec::Zero(p);
  report.mean_covariance = Mat::Zero(p, p);
  int covered = 0;
  for (const auto& row : report.rows) {
    if (!row.ok) {
      ++report.n_failed;
      continue;
    }
    ++report.n_ok;
    report.mean_estimate += row.estimate;
    report.mean_covariance += row.covariance;
    covered += row.covered ? 1 : 0;
  }
  if (report.n_ok > 0) {
    report.mean_estimate /= report.n_ok;
    report.mean_covariance /= report.n_ok;
    report.coverage = static_cast<double>(covered) / report.n_ok;
  }
  report.sample_covariance = Mat::Zero(p, p);
  report.sd_estimate = Vec::Zero(p);
  if (report.n_ok > 1) {
    for (const auto& row : report.rows) {
      if (!row.ok) continue;
      const Vec d = row.estimate - report.mean_estimate;
      report.sample_covariance.noalias() += d * d.transpose();
    }
    report.sample_covariance /= (report.n_ok - 1);
    report.sd_estimate = report.sample_covariance.diagonal().cwiseSqrt();
  }
  report.valid = report.n_failed <= R / 10;
  return report;
}

Mat loglik_surface(const Trajectory& traj, const ModelSpec& model, const ParameterVector& base,
                   const std::string& p1, const Vec& grid1, const std::string& p2,
                   const Vec& grid2) {
  ParameterVector th = base;
  const int i1 = th.index_of(p1);
  const int i2 = th.index_of(p2);
  const int mask = components_depending_on(model, {p1, p2});
  if (mask == 0)
    throw std::invalid_argument("loglik_surface: no component depends on the two parameters");
  Mat out(grid1.size() * grid2.size(), 3);
  int row = 0;
  for (int a = 0; a < grid1.size(); ++a) {
    for (int b = 0; b < grid2.size(); ++b) {
      th.set(i1, grid1[a]);
      th.set(i2, grid2[b]);
      out(row, 0) = grid1[a];
      out(row, 1) = grid2[b];
      out(row, 2) = loglik_selected(traj, model, th, mask);
      ++row;
    }
  }
  return out;
}

}  // namespace bdmm
