#include "bdmm/intensity.hpp"

#include <memory>

#include "bdmm/errors.hpp"

namespace bdmm {

IntensityFamily intensity_family_from_string(const std::string& s) {
  if (s == "constant") return IntensityFamily::constant;
  if (s == "per_capita") return IntensityFamily::per_capita;
  if (s == "capped_constant") return IntensityFamily::capped_constant;
  throw ConfigError("unknown intensity family: " + s);
}

IntensitySpec make_intensity(IntensityFamily family, const std::string& rate_param,
                             const ParameterVector& params, int n_max) {
  const int idx = params.index_of(rate_param);
  if (params[idx] < 0.0)
    throw std::domain_error("intensity rate " + rate_param + " must be nonnegative");
  const int ell = params.size();

  IntensitySpec spec;
  spec.param_names = {rate_param};
  spec.location_independent = true;

  switch (family) {
    case IntensityFamily::constant:
      spec.eval = [idx](const ParameterVector& th, const Configuration&) { return th[idx]; };
      spec.grad = [idx, ell](const ParameterVector&, const Configuration&) {
        Vec g = Vec::Zero(ell);
        g[idx] = 1.0;
        return g;
      };
      spec.bound_given_n = [idx](const ParameterVector& th, int) { return th[idx]; };
      break;
    case IntensityFamily::per_capita:
      spec.eval = [idx](const ParameterVector& th, const Configuration& x) {
        return th[idx] * x.size();
      };
      spec.grad = [idx, ell](const ParameterVector&, const Configuration& x) {
        Vec g = Vec::Zero(ell);
        g[idx] = static_cast<double>(x.size());
        return g;
      };
      spec.bound_given_n = [idx](const ParameterVector& th, int n) { return th[idx] * n; };
      break;
    case IntensityFamily::capped_constant: {
      if (n_max < 1) throw std::domain_error("capped_constant intensity requires n_max >= 1");
      spec.eval = [idx, n_max](const ParameterVector& th, const Configuration& x) {
        return x.size() < n_max ? th[idx] : 0.0;
      };
      spec.grad = [idx, ell, n_max](const ParameterVector&, const Configuration& x) {
        Vec g = Vec::Zero(ell);
        g[idx] = x.size() < n_max ? 1.0 : 0.0;
        return g;
      };
      spec.bound_given_n = [idx, n_max](const ParameterVector& th, int n) {
        return n < n_max ? th[idx] : 0.0;
      };
      break;
    }
  }
  return spec;
}

IntensitySpec capped(IntensitySpec inner, int n_max) {
  if (n_max < 1) throw std::domain_error("capped: n_max >= 1 required");
  IntensitySpec spec;
  spec.param_names = inner.param_names;
  spec.location_independent = inner.location_independent;
  auto in = std::make_shared<IntensitySpec>(std::move(inner));
  spec.eval = [in, n_max](const ParameterVector& th, const Configuration& x) {
    return x.size() < n_max ? in->eval(th, x) : 0.0;
  };
  spec.grad = [in, n_max](const ParameterVector& th, const Configuration& x) {
    if (x.size() < n_max) return in->grad(th, x);
    return Vec(Vec::Zero(th.size()));
  };
  spec.bound_given_n = [in, n_max](const ParameterVector& th, int n) {
    return n < n_max ? in->bound_given_n(th, n) : 0.0;
  };
  return spec;
}

IntensitySpec zero_on_empty(IntensitySpec inner) {
  IntensitySpec spec;
  spec.param_names = inner.param_names;
  spec.location_independent = inner.location_independent;
  auto in = std::make_shared<IntensitySpec>(std::move(inner));
  spec.eval = [in](const ParameterVector& th, const Configuration& x) {
    return x.empty() ? 0.0 : in->eval(th, x);
  };
  spec.grad = [in](const ParameterVector& th, const Configuration& x) {
    if (!x.empty()) return in->grad(th, x);
    return Vec(Vec::Zero(th.size()));
  };
  spec.bound_given_n = [in](const ParameterVector& th, int n) {
    return n == 0 ? 0.0 : in->bound_given_n(th, n);
  };
  return spec;
}

}  // namespace bdmm
