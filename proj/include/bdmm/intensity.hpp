#pragma once

#include <functional>
#include <string>
#include <vector>

#include "bdmm/params.hpp"
#include "bdmm/types.hpp"

namespace bdmm {

/// Jump intensity with its parameter gradient and a per-cardinality upper
/// bound (the supremum over configurations of that size, used for thinning).
struct IntensitySpec {
  std::function<double(const ParameterVector&, const Configuration&)> eval;
  std::function<Vec(const ParameterVector&, const Configuration&)> grad;  // length = #params
  std::function<double(const ParameterVector&, int)> bound_given_n;
  std::vector<std::string> param_names;
  /// True when the value depends on the configuration only through its
  /// cardinality; lets the simulator sample waiting times without thinning.
  bool location_independent = false;
};

enum class IntensityFamily { constant, per_capita, capped_constant };

IntensityFamily intensity_family_from_string(const std::string& s);

/// constant:        gamma(x) = r
/// per_capita:      gamma(x) = r * n(x)
/// capped_constant: gamma(x) = r * 1{n(x) < n_max}
/// The rate r is read from `params[rate_param]`; its initial value must be
/// nonnegative.
IntensitySpec make_intensity(IntensityFamily family, const std::string& rate_param,
                             const ParameterVector& params, int n_max = 0);

/// Multiplies an intensity by 1{n(x) < n_max}. Bounds and gradients follow.
IntensitySpec capped(IntensitySpec inner, int n_max);

/// Multiplies an intensity by 1{n(x) >= 1}; deaths and mutations cannot fire
/// from the empty configuration.
IntensitySpec zero_on_empty(IntensitySpec inner);

}  // namespace bdmm
