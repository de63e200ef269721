#pragma once

#include "bdmm/types.hpp"

namespace bdmm {

/// Distance between configurations, in [0, 1]. With n(x) <= n(y):
///   d1(x, y) = (min over injections of sum_i (c_i ^ 1) + (n(y) - n(x))) / n(y)
/// where the per-pair cost is the Euclidean location distance capped at 1
/// when labels agree, and 1 otherwise. d1(x, {}) = 1 for nonempty x.
/// The minimisation is exact: permutation enumeration for n(y) <= 8,
/// otherwise a Hungarian assignment with unit-cost padding rows.
double d1_distance(const Configuration& x, const Configuration& y);

namespace detail {

/// Square cost matrix: rows of the smaller configuration padded with
/// constant-1 rows up to n(y).
Mat d1_cost_matrix(const Configuration& small, const Configuration& big);

/// Exact minimum-cost assignment (O(n^3) shortest augmenting paths).
/// Returns the column matched to each row.
std::vector<int> min_cost_assignment(const Mat& cost);

/// Exhaustive minimum over all permutations; exponential, for small n.
std::vector<int> min_cost_assignment_bruteforce(const Mat& cost);

double assignment_cost(const Mat& cost, const std::vector<int>& cols);

}  // namespace detail

}  // namespace bdmm
