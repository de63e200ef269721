#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bdmm/likelihood.hpp"
#include "bdmm/model.hpp"

namespace bdmm {

struct FitOptions {
  int max_evals = 4000;
  double simplex_tol = 1e-6;   // simplex diameter in transformed coordinates
  double loglik_tol = 1e-9;    // best-worst objective spread
  double init_step = 0.25;     // initial simplex edge (transformed coordinates)
  bool use_score = false;      // quasi-Newton ascent with the analytic score
  bool keep_trace = false;
  LikOptions lik;
};

struct FitResult {
  ParameterVector theta_hat;            // full vector with fitted values
  std::vector<std::string> free_names;
  double loglik = 0.0;                  // full breakdown total at theta_hat
  Mat info;                             // free x free observed information
  Mat covariance;                       // info^{-1}; empty when singular
  bool covariance_ok = false;
  int n_evals = 0;
  bool converged = false;
  std::vector<std::pair<Vec, double>> trace;  // (free values, objective)

  Vec free_values() const;
};

/// Maximum-likelihood fit of the named parameters. Only the likelihood
/// components that depend on them are evaluated (the factorisation makes the
/// rest an additive constant). Bounded parameters are optimised through
/// logit/log transforms and mapped back. Throws NumericError when the
/// objective is not finite at theta0.
FitResult fit_mle(const Trajectory& traj, const ModelSpec& model,
                  const std::vector<std::string>& free_params, const ParameterVector& theta0,
                  const FitOptions& opts = {});

namespace detail {

/// Bijection between a bounded interval and the real line: logit for two
/// finite bounds, shifted log for one-sided, identity otherwise.
struct BoundTransform {
  double lo, hi;
  double to_unconstrained(double x) const;
  double to_bounded(double u) const;
};

struct NelderMeadResult {
  Vec x;
  double value = 0.0;
  int n_evals = 0;
  bool converged = false;
};

NelderMeadResult nelder_mead_maximize(const std::function<double(const Vec&)>& f, const Vec& x0,
                                      double init_step, double x_tol, double f_tol,
                                      int max_evals,
                                      std::vector<std::pair<Vec, double>>* trace = nullptr);

}  // namespace detail

}  // namespace bdmm
