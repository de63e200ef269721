#pragma once

#include "bdmm/fit.hpp"
#include "bdmm/types.hpp"

namespace bdmm {

/// Confidence region {x : (x - center)^T shape^{-1} (x - center) <= radius2}.
struct Ellipsoid {
  Vec center;
  Mat shape;       // positive definite
  double radius2;  // chi-square quantile at the confidence level
};

/// Gaussian confidence ellipsoid for the free parameters of a fit.
/// Requires the fit's covariance; level must lie in (0, 1).
Ellipsoid confidence_ellipsoid(const FitResult& fit, double level);

bool ellipsoid_contains(const Ellipsoid& e, const Vec& point);

/// Closed boundary polyline of a 2-d ellipsoid (points x 2 matrix; first row
/// equals the last).
Mat ellipse_polyline(const Ellipsoid& e, int points = 361);

/// Regularized lower incomplete gamma P(a, x) (series / continued fraction).
double regularized_gamma_p(double a, double x);

/// Quantile of the chi-square distribution with dof degrees of freedom,
/// solved from P(dof/2, x/2) = level.
double chi_square_quantile(int dof, double level);

}  // namespace bdmm
