#pragma once

#include <cstddef>

// Data-parallel inner loops behind the numeric core: squared-exponential
// accumulations (quadrature normalisers, mixture densities on point batches)
// and weighted dot products (Girsanov sums, information-matrix blocks).
// A scalar reference implementation always exists; wider variants are
// selected once at runtime and must agree with the reference to rounding.

namespace bdmm::simd {

struct Ops {
  // sum_j exp(-((x[j]-cx)^2 + (y[j]-cy)^2) * inv_two_sigma2)
  double (*sum_exp_sqdist_2d)(const double* x, const double* y, std::size_t n,
                              double cx, double cy, double inv_two_sigma2);

  // Same pass also accumulating sum_j e_j * q_j with q_j = r_j^2 / sigma^2
  // (i.e. 2 * sqdist * inv_two_sigma2); used for log-sigma derivatives.
  void (*sum_exp_sqdist_moments_2d)(const double* x, const double* y,
                                    std::size_t n, double cx, double cy,
                                    double inv_two_sigma2, double* sum_e,
                                    double* sum_eq);

  // acc[j] += w * exp(-((x[j]-cx)^2 + (y[j]-cy)^2) * inv_two_sigma2)
  void (*axpy_exp_sqdist_2d)(const double* x, const double* y, std::size_t n,
                             double cx, double cy, double inv_two_sigma2,
                             double w, double* acc);

  // sum_j a[j] * b[j] * w[j]
  double (*weighted_dot)(const double* a, const double* b, const double* w,
                         std::size_t n);

  const char* name;
};

/// Active implementation. Picked once: AVX2 when the CPU supports it,
/// scalar otherwise; the BDMM_SIMD environment variable ("scalar" / "avx2")
/// overrides the choice.
const Ops& ops();

/// Scalar reference, always available.
const Ops& scalar_ops();

#if defined(__x86_64__) || defined(_M_X64)
const Ops& avx2_ops();
bool avx2_supported();
#endif

}  // namespace bdmm::simd
