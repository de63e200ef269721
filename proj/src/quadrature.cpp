#include "bdmm/quadrature.hpp"

#include <cmath>

#include "bdmm/errors.hpp"
#include "bdmm/simd/kernels.hpp"

namespace bdmm {

BoxQuadrature::BoxQuadrature(const DomainBox& box, int points_per_axis) {
  if (points_per_axis < 2) throw ConfigError("quadrature: need at least 2 points per axis");
  d_ = box.dim();
  double npts = 1.0;
  for (int k = 0; k < d_; ++k) npts *= points_per_axis;
  if (npts > 4'194'304.0) throw ConfigError("quadrature: tensor grid too large");
  n_ = static_cast<int>(npts);

  weight_ = 1.0;
  std::vector<std::vector<double>> axes(static_cast<size_t>(d_));
  for (int k = 0; k < d_; ++k) {
    const double h = (box.upper[k] - box.lower[k]) / points_per_axis;
    weight_ *= h;
    auto& a = axes[static_cast<size_t>(k)];
    a.resize(static_cast<size_t>(points_per_axis));
    for (int i = 0; i < points_per_axis; ++i) a[static_cast<size_t>(i)] = box.lower[k] + (i + 0.5) * h;
  }

  coords_.assign(static_cast<size_t>(d_), std::vector<double>(static_cast<size_t>(n_)));
  for (int j = 0; j < n_; ++j) {
    int rem = j;
    for (int k = d_ - 1; k >= 0; --k) {
      const int m = static_cast<int>(axes[static_cast<size_t>(k)].size());
      coords_[static_cast<size_t>(k)][static_cast<size_t>(j)] =
          axes[static_cast<size_t>(k)][static_cast<size_t>(rem % m)];
      rem /= m;
    }
  }
}

Vec BoxQuadrature::node(int j) const {
  Vec z(d_);
  for (int k = 0; k < d_; ++k) z[k] = coords_[static_cast<size_t>(k)][static_cast<size_t>(j)];
  return z;
}

GaussMass truncated_gauss_mass(const BoxQuadrature& quad, const Vec& center, double sigma) {
  const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
  GaussMass out;
  if (quad.dim() == 2) {
    double se = 0.0, seq = 0.0;
    simd::ops().sum_exp_sqdist_moments_2d(quad.axis(0).data(), quad.axis(1).data(),
                                          static_cast<std::size_t>(quad.size()), center[0],
                                          center[1], inv2s2, &se, &seq);
    out.value = se * quad.cell_weight();
    out.d_dlogsigma = seq * quad.cell_weight();
    return out;
  }
  double se = 0.0, seq = 0.0;
  for (int j = 0; j < quad.size(); ++j) {
    const double r2 = (quad.node(j) - center).squaredNorm();
    const double e = std::exp(-r2 * inv2s2);
    se += e;
    seq += e * (2.0 * r2 * inv2s2);
  }
  out.value = se * quad.cell_weight();
  out.d_dlogsigma = seq * quad.cell_weight();
  return out;
}

}  // namespace bdmm
