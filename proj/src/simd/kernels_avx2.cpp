// AVX2 variants. This translation unit is compiled with -mavx2 -mfma; it must
// only be entered through the dispatcher after a CPU feature check.

#if defined(__x86_64__) || defined(_M_X64)

#include <experimental/simd>

#include "bdmm/simd/kernels.hpp"

namespace stdx = std::experimental;

namespace bdmm::simd {
namespace {

using V = stdx::native_simd<double>;
constexpr std::size_t W = V::size();

double sum_exp_sqdist_2d_avx2(const double* x, const double* y, std::size_t n,
                              double cx, double cy, double inv_two_sigma2) {
  const V vcx = cx, vcy = cy, vk = inv_two_sigma2;
  V vacc = 0.0;
  std::size_t j = 0;
  for (; j + W <= n; j += W) {
    V vx(&x[j], stdx::element_aligned);
    V vy(&y[j], stdx::element_aligned);
    const V dx = vx - vcx;
    const V dy = vy - vcy;
    vacc += stdx::exp(-(dx * dx + dy * dy) * vk);
  }
  double acc = stdx::reduce(vacc);
  for (; j < n; ++j) {
    const double dx = x[j] - cx;
    const double dy = y[j] - cy;
    acc += std::exp(-(dx * dx + dy * dy) * inv_two_sigma2);
  }
  return acc;
}

void sum_exp_sqdist_moments_2d_avx2(const double* x, const double* y,
                                    std::size_t n, double cx, double cy,
                                    double inv_two_sigma2, double* sum_e,
                                    double* sum_eq) {
  const V vcx = cx, vcy = cy, vk = inv_two_sigma2;
  V ve = 0.0, veq = 0.0;
  std::size_t j = 0;
  for (; j + W <= n; j += W) {
    V vx(&x[j], stdx::element_aligned);
    V vy(&y[j], stdx::element_aligned);
    const V dx = vx - vcx;
    const V dy = vy - vcy;
    const V r2 = dx * dx + dy * dy;
    const V e = stdx::exp(-r2 * vk);
    ve += e;
    veq += e * (2.0 * r2 * vk);
  }
  double se = stdx::reduce(ve);
  double seq = stdx::reduce(veq);
  for (; j < n; ++j) {
    const double dx = x[j] - cx;
    const double dy = y[j] - cy;
    const double r2 = dx * dx + dy * dy;
    const double e = std::exp(-r2 * inv_two_sigma2);
    se += e;
    seq += e * (2.0 * r2 * inv_two_sigma2);
  }
  *sum_e = se;
  *sum_eq = seq;
}

void axpy_exp_sqdist_2d_avx2(const double* x, const double* y, std::size_t n,
                             double cx, double cy, double inv_two_sigma2,
                             double w, double* acc) {
  const V vcx = cx, vcy = cy, vk = inv_two_sigma2, vw = w;
  std::size_t j = 0;
  for (; j + W <= n; j += W) {
    V vx(&x[j], stdx::element_aligned);
    V vy(&y[j], stdx::element_aligned);
    const V dx = vx - vcx;
    const V dy = vy - vcy;
    V va(&acc[j], stdx::element_aligned);
    va += vw * stdx::exp(-(dx * dx + dy * dy) * vk);
    va.copy_to(&acc[j], stdx::element_aligned);
  }
  for (; j < n; ++j) {
    const double dx = x[j] - cx;
    const double dy = y[j] - cy;
    acc[j] += w * std::exp(-(dx * dx + dy * dy) * inv_two_sigma2);
  }
}

double weighted_dot_avx2(const double* a, const double* b, const double* w,
                         std::size_t n) {
  V vacc = 0.0;
  std::size_t j = 0;
  for (; j + W <= n; j += W) {
    V va(&a[j], stdx::element_aligned);
    V vb(&b[j], stdx::element_aligned);
    V vw(&w[j], stdx::element_aligned);
    vacc += va * vb * vw;
  }
  double acc = stdx::reduce(vacc);
  for (; j < n; ++j) acc += a[j] * b[j] * w[j];
  return acc;
}

}  // namespace

const Ops& avx2_ops() {
  static const Ops ops{sum_exp_sqdist_2d_avx2, sum_exp_sqdist_moments_2d_avx2,
                       axpy_exp_sqdist_2d_avx2, weighted_dot_avx2, "avx2"};
  return ops;
}

}  // namespace bdmm::simd

#endif  // x86_64
