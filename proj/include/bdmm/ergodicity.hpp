#pragma once

#include <functional>
#include <string>

#include "bdmm/intensity.hpp"
#include "bdmm/params.hpp"

namespace bdmm {

/// Cardinality envelopes of the birth and death intensities:
/// beta_n = sup over configurations of size n, delta_n = inf over them.
struct RateSequences {
  std::function<double(int)> beta_n;
  std::function<double(int)> delta_n;
  int n_trunc = 10000;
};

enum class SeriesVerdict { converges, diverges, inconclusive };

const char* to_string(SeriesVerdict v);

/// Numeric check of the geometric-ergodicity sufficient conditions:
/// delta_n > 0 for n >= 1, plus either
///   (i)  beta_n = 0 beyond some n0, or
///   (ii) sum beta_1..beta_{n-1}/(delta_1..delta_n) converges and
///        sum delta_1..delta_n/(beta_1..beta_n) diverges,
/// together with convergence of the square-root variant of the first series
/// and eventual domination beta_n <= delta_{n+1}. Series are decided by the
/// ratio test on the term recursion (partial sums cannot separate slow
/// divergence); products are accumulated in log space.
struct ErgodicityReport {
  bool delta_positive = false;
  bool condition_i = false;
  int n0 = -1;  // first index with beta vanishing through n_trunc
  bool condition_ii_applicable = false;  // beta_n > 0 for all checked n
  SeriesVerdict series_ratio = SeriesVerdict::inconclusive;        // must converge
  SeriesVerdict series_inverse = SeriesVerdict::inconclusive;      // must diverge
  SeriesVerdict series_sqrt = SeriesVerdict::inconclusive;         // must converge
  double log_partial_sum_ratio = 0.0;    // log of the truncated first series
  double log_partial_sum_inverse = 0.0;  // log of the truncated second series
  bool tail_dominance = false;
  int tail_from = -1;

  enum class Overall { satisfied, not_satisfied, inconclusive };
  Overall overall = Overall::inconclusive;

  std::string render() const;
};

ErgodicityReport check_ergodicity(const RateSequences& seq);

/// Envelopes for a model's intensities. Exact for the built-in families,
/// whose value depends on the configuration only through its cardinality.
RateSequences rate_sequences_from(const IntensitySpec& beta, const IntensitySpec& delta,
                                  const ParameterVector& th, int n_trunc = 10000);

}  // namespace bdmm
