#include "bdmm/params.hpp"

#include "bdmm/errors.hpp"

namespace bdmm {

int ParameterVector::add(const std::string& name, double value, double lo, double hi) {
  if (lookup_.count(name))
    throw ConfigError("duplicate parameter name: " + name);
  if (!(lo <= value && value <= hi))
    throw ConfigError("parameter " + name + " initial value outside bounds");
  const int idx = static_cast<int>(names_.size());
  names_.push_back(name);
  values_.push_back(value);
  bounds_.push_back({lo, hi});
  lookup_.emplace(name, idx);
  return idx;
}

int ParameterVector::index_of(const std::string& name) const {
  auto it = lookup_.find(name);
  if (it == lookup_.end()) throw ConfigError("unknown parameter name: " + name);
  return it->second;
}

Vec ParameterVector::values() const {
  Vec v(size());
  for (int i = 0; i < size(); ++i) v[i] = values_[static_cast<size_t>(i)];
  return v;
}

void ParameterVector::set_values(const Vec& v) {
  if (v.size() != size()) throw ConfigError("parameter vector size mismatch");
  for (int i = 0; i < size(); ++i) values_[static_cast<size_t>(i)] = v[i];
}

void ParameterVector::validate() const {
  for (int i = 0; i < size(); ++i) {
    const auto& b = bounds_[static_cast<size_t>(i)];
    const double v = values_[static_cast<size_t>(i)];
    if (!(b.lo <= v && v <= b.hi))
      throw ConfigError("parameter " + names_[static_cast<size_t>(i)] + " outside bounds");
  }
}

}  // namespace bdmm
