#include "bdmm/ellipsoid.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "bdmm/errors.hpp"

namespace bdmm {
namespace {

// Lower incomplete gamma by power series, for x < a + 1.
double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int n = 0; n < 500; ++n) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * 1e-15) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Upper incomplete gamma by Lentz continued fraction, for x >= a + 1.
double gamma_q_contfrac(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-15) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double regularized_gamma_p(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw std::domain_error("regularized_gamma_p: bad arguments");
  if (x == 0.0) return 0.0;
  return (x < a + 1.0) ? gamma_p_series(a, x) : 1.0 - gamma_q_contfrac(a, x);
}

double chi_square_quantile(int dof, double level) {
  if (dof < 1) throw std::domain_error("chi_square_quantile: dof >= 1 required");
  if (!(level > 0.0 && level < 1.0))
    throw std::domain_error("chi_square_quantile: level must lie in (0,1)");
  const double a = 0.5 * dof;
  // Bracket then bisect; the CDF is monotone.
  double lo = 0.0;
  double hi = std::max(4.0 * dof, 10.0);
  while (regularized_gamma_p(a, 0.5 * hi) < level) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (regularized_gamma_p(a, 0.5 * mid) < level)
      lo = mid;
    else
      hi = mid;
    if (hi - lo < 1e-12 * std::max(1.0, hi)) break;
  }
  return 0.5 * (lo + hi);
}

Ellipsoid confidence_ellipsoid(const FitResult& fit, double level) {
  if (!fit.covariance_ok)
    throw NumericError("confidence_ellipsoid: fit has no covariance (singular information)");
  Ellipsoid e;
  e.center = fit.free_values();
  e.shape = fit.covariance;
  e.radius2 = chi_square_quantile(static_cast<int>(fit.free_names.size()), level);
  return e;
}

bool ellipsoid_contains(const Ellipsoid& e, const Vec& point) {
  const Vec d = point - e.center;
  const double q = d.dot(e.shape.llt().solve(d));
  return q <= e.radius2;
}

Mat ellipse_polyline(const Ellipsoid& e, int points) {
  if (e.center.size() != 2) throw std::invalid_argument("ellipse_polyline: 2-d only");
  Eigen::LLT<Mat> llt(e.shape);
  if (llt.info() != Eigen::Success)
    throw NumericError("ellipse_polyline: shape matrix not positive definite");
  const Mat L = llt.matrixL();
  Mat out(points, 2);
  const double r = std::sqrt(e.radius2);
  for (int i = 0; i < points; ++i) {
    const double phi = 2.0 * M_PI * i / (points - 1);
    Vec unit(2);
    unit << std::cos(phi), std::sin(phi);
    out.row(i) = (e.center + r * (L * unit)).transpose();
  }
  out.row(points - 1) = out.row(0);  // closed
  return out;
}

}  // namespace bdmm
