#pragma once

#include <limits>
#include <string>
#include <unordered_map>
#include <vector>

#include "bdmm/types.hpp"

namespace bdmm {

struct ParamBounds {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
};

/// Named parameter vector with box bounds. The index layout is fixed at
/// construction; model components resolve names to indices once and read
/// values by index afterwards.
class ParameterVector {
 public:
  ParameterVector() = default;

  /// Adds a parameter and returns its index. Throws ConfigError on duplicates
  /// or when `value` violates the bounds.
  int add(const std::string& name, double value,
          double lo = -std::numeric_limits<double>::infinity(),
          double hi = std::numeric_limits<double>::infinity());

  int size() const { return static_cast<int>(names_.size()); }

  int index_of(const std::string& name) const;  // throws ConfigError if unknown
  bool has(const std::string& name) const { return lookup_.count(name) > 0; }

  double operator[](int i) const { return values_[i]; }
  double get(const std::string& name) const { return values_[index_of(name)]; }
  void set(int i, double v) { values_[i] = v; }
  void set(const std::string& name, double v) { values_[index_of(name)] = v; }

  const std::string& name(int i) const { return names_[static_cast<size_t>(i)]; }
  const std::vector<std::string>& names() const { return names_; }
  const ParamBounds& bounds(int i) const { return bounds_[static_cast<size_t>(i)]; }

  Vec values() const;
  void set_values(const Vec& v);

  /// Checks name uniqueness and that every value is within bounds.
  void validate() const;

 private:
  std::vector<std::string> names_;
  std::vector<double> values_;
  std::vector<ParamBounds> bounds_;
  std::unordered_map<std::string, int> lookup_;
};

}  // namespace bdmm
