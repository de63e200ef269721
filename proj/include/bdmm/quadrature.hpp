#pragma once

#include <vector>

#include "bdmm/types.hpp"

namespace bdmm {

/// Tensor-product midpoint rule over an axis-aligned box. Node coordinates
/// are stored as flat per-axis arrays (contiguous for the vector kernels).
class BoxQuadrature {
 public:
  BoxQuadrature(const DomainBox& box, int points_per_axis);

  int size() const { return n_; }
  int dim() const { return d_; }
  double cell_weight() const { return weight_; }

  /// Flat array of the k-th coordinate of every node, length size().
  const std::vector<double>& axis(int k) const { return coords_[static_cast<size_t>(k)]; }

  Vec node(int j) const;

  template <class F>
  double integrate(F&& f) const {
    double acc = 0.0;
    for (int j = 0; j < n_; ++j) acc += f(node(j));
    return acc * weight_;
  }

 private:
  int d_ = 0;
  int n_ = 0;
  double weight_ = 0.0;
  std::vector<std::vector<double>> coords_;
};

/// Mass of exp(-|z - center|^2 / (2 sigma^2)) over the quadrature box,
/// together with its derivative in log sigma.
struct GaussMass {
  double value = 0.0;
  double d_dlogsigma = 0.0;
};

GaussMass truncated_gauss_mass(const BoxQuadrature& quad, const Vec& center, double sigma);

}  // namespace bdmm
