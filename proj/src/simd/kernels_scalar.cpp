#include <cmath>

#include "bdmm/simd/kernels.hpp"

namespace bdmm::simd {
namespace {

double sum_exp_sqdist_2d_scalar(const double* x, const double* y,
                                std::size_t n, double cx, double cy,
                                double inv_two_sigma2) {
  double acc = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double dx = x[j] - cx;
    const double dy = y[j] - cy;
    acc += std::exp(-(dx * dx + dy * dy) * inv_two_sigma2);
  }
  return acc;
}

void sum_exp_sqdist_moments_2d_scalar(const double* x, const double* y,
                                      std::size_t n, double cx, double cy,
                                      double inv_two_sigma2, double* sum_e,
                                      double* sum_eq) {
  double se = 0.0, seq = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double dx = x[j] - cx;
    const double dy = y[j] - cy;
    const double r2 = dx * dx + dy * dy;
    const double e = std::exp(-r2 * inv_two_sigma2);
    se += e;
    seq += e * (2.0 * r2 * inv_two_sigma2);  // e * r^2 / sigma^2
  }
  *sum_e = se;
  *sum_eq = seq;
}

void axpy_exp_sqdist_2d_scalar(const double* x, const double* y, std::size_t n,
                               double cx, double cy, double inv_two_sigma2,
                               double w, double* acc) {
  for (std::size_t j = 0; j < n; ++j) {
    const double dx = x[j] - cx;
    const double dy = y[j] - cy;
    acc[j] += w * std::exp(-(dx * dx + dy * dy) * inv_two_sigma2);
  }
}

double weighted_dot_scalar(const double* a, const double* b, const double* w,
                           std::size_t n) {
  double acc = 0.0;
  for (std::size_t j = 0; j < n; ++j) acc += a[j] * b[j] * w[j];
  return acc;
}

}  // namespace

const Ops& scalar_ops() {
  static const Ops ops{sum_exp_sqdist_2d_scalar, sum_exp_sqdist_moments_2d_scalar,
                       axpy_exp_sqdist_2d_scalar, weighted_dot_scalar, "scalar"};
  return ops;
}

}  // namespace bdmm::simd
