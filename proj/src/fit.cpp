#include "bdmm/fit.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "bdmm/errors.hpp"

namespace bdmm {
namespace detail {

double BoundTransform::to_unconstrained(double x) const {
  const bool lo_f = std::isfinite(lo), hi_f = std::isfinite(hi);
  if (lo_f && hi_f) {
    const double p = std::clamp((x - lo) / (hi - lo), 1e-12, 1.0 - 1e-12);
    return std::log(p / (1.0 - p));
  }
  if (lo_f) return std::log(std::max(x - lo, 1e-300));
  if (hi_f) return -std::log(std::max(hi - x, 1e-300));
  return x;
}

double BoundTransform::to_bounded(double u) const {
  const bool lo_f = std::isfinite(lo), hi_f = std::isfinite(hi);
  if (lo_f && hi_f) return lo + (hi - lo) / (1.0 + std::exp(-u));
  if (lo_f) return lo + std::exp(u);
  if (hi_f) return hi - std::exp(-u);
  return u;
}

NelderMeadResult nelder_mead_maximize(const std::function<double(const Vec&)>& f, const Vec& x0,
                                      double init_step, double x_tol, double f_tol,
                                      int max_evals,
                                      std::vector<std::pair<Vec, double>>* trace) {
  const int n = static_cast<int>(x0.size());
  NelderMeadResult res;
  int evals = 0;
  auto eval = [&](const Vec& x) {
    ++evals;
    const double v = f(x);
    if (trace) trace->emplace_back(x, v);
    return v;
  };

  std::vector<Vec> xs(static_cast<size_t>(n) + 1, x0);
  std::vector<double> fs(static_cast<size_t>(n) + 1);
  for (int i = 1; i <= n; ++i) xs[static_cast<size_t>(i)][i - 1] += init_step;
  for (int i = 0; i <= n; ++i) fs[static_cast<size_t>(i)] = eval(xs[static_cast<size_t>(i)]);

  auto order = [&]() {
    std::vector<int> idx(static_cast<size_t>(n) + 1);
    for (int i = 0; i <= n; ++i) idx[static_cast<size_t>(i)] = i;
    std::sort(idx.begin(), idx.end(), [&](int a, int b) {
      return fs[static_cast<size_t>(a)] > fs[static_cast<size_t>(b)];
    });
    std::vector<Vec> xs2;
    std::vector<double> fs2;
    for (int i : idx) {
      xs2.push_back(xs[static_cast<size_t>(i)]);
      fs2.push_back(fs[static_cast<size_t>(i)]);
    }
    xs = std::move(xs2);
    fs = std::move(fs2);
  };

  while (evals < max_evals) {
    order();
    double diam = 0.0;
    for (int i = 1; i <= n; ++i)
      diam = std::max(diam, (xs[static_cast<size_t>(i)] - xs[0]).cwiseAbs().maxCoeff());
    if (diam < x_tol || std::abs(fs[0] - fs[static_cast<size_t>(n)]) < f_tol) {
      res.converged = true;
      break;
    }

    Vec centroid = Vec::Zero(n);
    for (int i = 0; i < n; ++i) centroid += xs[static_cast<size_t>(i)];
    centroid /= n;
    const Vec& worst = xs[static_cast<size_t>(n)];

    const Vec xr = centroid + (centroid - worst);  // reflection
    const double fr = eval(xr);
    if (fr > fs[0]) {
      const Vec xe = centroid + 2.0 * (centroid - worst);  // expansion
      const double fe = eval(xe);
      if (fe > fr) {
        xs[static_cast<size_t>(n)] = xe;
        fs[static_cast<size_t>(n)] = fe;
      } else {
        xs[static_cast<size_t>(n)] = xr;
        fs[static_cast<size_t>(n)] = fr;
      }
    } else if (fr > fs[static_cast<size_t>(n) - 1]) {
      xs[static_cast<size_t>(n)] = xr;
      fs[static_cast<size_t>(n)] = fr;
    } else {
      const Vec xc = centroid + 0.5 * (worst - centroid);  // contraction
      const double fc = eval(xc);
      if (fc > fs[static_cast<size_t>(n)]) {
        xs[static_cast<size_t>(n)] = xc;
        fs[static_cast<size_t>(n)] = fc;
      } else {
        for (int i = 1; i <= n; ++i) {  // shrink
          xs[static_cast<size_t>(i)] = xs[0] + 0.5 * (xs[static_cast<size_t>(i)] - xs[0]);
          fs[static_cast<size_t>(i)] = eval(xs[static_cast<size_t>(i)]);
        }
      }
    }
  }
  order();
  res.x = xs[0];
  res.value = fs[0];
  res.n_evals = evals;
  return res;
}

}  // namespace detail

Vec FitResult::free_values() const {
  Vec v(static_cast<int>(free_names.size()));
  for (size_t i = 0; i < free_names.size(); ++i)
    v[static_cast<int>(i)] = theta_hat.get(free_names[i]);
  return v;
}

FitResult fit_mle(const Trajectory& traj, const ModelSpec& model,
                  const std::vector<std::string>& free_params, const ParameterVector& theta0,
                  const FitOptions& opts) {
  if (free_params.empty()) throw std::invalid_argument("fit_mle: no free parameters");
  const int p = static_cast<int>(free_params.size());

  std::vector<int> idx;
  std::vector<detail::BoundTransform> trans;
  for (const auto& name : free_params) {
    const int i = theta0.index_of(name);
    idx.push_back(i);
    trans.push_back({theta0.bounds(i).lo, theta0.bounds(i).hi});
  }

  const int mask = components_depending_on(model, free_params);
  if (mask == 0)
    throw std::invalid_argument("fit_mle: no likelihood component depends on the free parameters");

  ParameterVector th = theta0;
  th.validate();

  auto unpack = [&](const Vec& u, ParameterVector& out) {
    for (int j = 0; j < p; ++j)
      out.set(idx[static_cast<size_t>(j)], trans[static_cast<size_t>(j)].to_bounded(u[j]));
  };
  auto objective = [&](const Vec& u) {
    unpack(u, th);
    const double v = loglik_selected(traj, model, th, mask);
    return std::isfinite(v) ? v : -1e300;  // support violations stay traversable
  };

  Vec u0(p);
  for (int j = 0; j < p; ++j)
    u0[j] = trans[static_cast<size_t>(j)].to_unconstrained(theta0[idx[static_cast<size_t>(j)]]);
  if (!std::isfinite(loglik_selected(traj, model, th, mask)))
    throw NumericError("fit_mle: log-likelihood is not finite at theta0");

  FitResult result;
  std::vector<std::pair<Vec, double>>* trace_ptr = opts.keep_trace ? &result.trace : nullptr;

  detail::NelderMeadResult nm = detail::nelder_mead_maximize(
      objective, u0, opts.init_step, opts.simplex_tol, opts.loglik_tol, opts.max_evals, trace_ptr);
  result.n_evals = nm.n_evals;
  result.converged = nm.converged;

  if (opts.use_score) {
    // Polish with gradient ascent along the analytic score (chain rule maps
    // it to the transformed coordinates); backtracking line search.
    Vec u = nm.x;
    unpack(u, th);
    double fu = objective(u);
    for (int iter = 0; iter < 200 && result.n_evals < opts.max_evals; ++iter) {
      unpack(u, th);
      const Vec full_score = score(traj, model, th);
      Vec g(p);
      for (int j = 0; j < p; ++j) {
        // d theta / d u at the current point.
        const double eps = 1e-7;
        const auto& tr = trans[static_cast<size_t>(j)];
        const double dtheta_du = (tr.to_bounded(u[j] + eps) - tr.to_bounded(u[j] - eps)) / (2 * eps);
        g[j] = full_score[idx[static_cast<size_t>(j)]] * dtheta_du;
      }
      if (g.norm() < 1e-10) break;
      double step = 1.0;
      bool improved = false;
      for (int ls = 0; ls < 30; ++ls) {
        const Vec u_try = u + step * g / std::max(1.0, g.norm());
        const double f_try = objective(u_try);
        ++result.n_evals;
        if (f_try > fu + 1e-12) {
          u = u_try;
          fu = f_try;
          improved = true;
          break;
        }
        step *= 0.5;
      }
      if (!improved) break;
    }
    if (fu > nm.value) nm = {u, fu, result.n_evals, true};
  }

  unpack(nm.x, th);
  result.theta_hat = th;
  result.free_names = free_params;
  result.loglik = loglik_total(traj, model, th).total;

  const InformationMatrix full_info = observed_information(traj, model, th, opts.lik);
  result.info.resize(p, p);
  for (int a = 0; a < p; ++a)
    for (int b = 0; b < p; ++b)
      result.info(a, b) = full_info.matrix(idx[static_cast<size_t>(a)], idx[static_cast<size_t>(b)]);

  Eigen::FullPivLU<Mat> lu(result.info);
  if (lu.isInvertible() && lu.rcond() > 1e-12) {
    result.covariance = lu.inverse();
    result.covariance_ok = true;
  }
  return result;
}

}  // namespace bdmm
