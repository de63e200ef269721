#include "bdmm/ergodicity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "bdmm/errors.hpp"

namespace bdmm {
namespace {

constexpr double kRatioTol = 1e-3;
const double kInf = std::numeric_limits<double>::infinity();

enum class Tri { ok, failed, unknown };

Tri must_converge(SeriesVerdict v) {
  if (v == SeriesVerdict::converges) return Tri::ok;
  if (v == SeriesVerdict::diverges) return Tri::failed;
  return Tri::unknown;
}

Tri must_diverge(SeriesVerdict v) {
  if (v == SeriesVerdict::diverges) return Tri::ok;
  if (v == SeriesVerdict::converges) return Tri::failed;
  return Tri::unknown;
}

Tri tri_all(std::initializer_list<Tri> ts) {
  bool unknown = false;
  for (Tri t : ts) {
    if (t == Tri::failed) return Tri::failed;
    if (t == Tri::unknown) unknown = true;
  }
  return unknown ? Tri::unknown : Tri::ok;
}

// Ratio-test verdict from the tail of the term-ratio sequence.
SeriesVerdict ratio_verdict(const std::vector<double>& ratios) {
  const size_t n = ratios.size();
  if (n < 4) return SeriesVerdict::inconclusive;
  double rmax = 0.0, rmin = kInf;
  for (size_t i = n / 2; i < n; ++i) {
    rmax = std::max(rmax, ratios[i]);
    rmin = std::min(rmin, ratios[i]);
  }
  if (rmax <= 1.0 - kRatioTol) return SeriesVerdict::converges;
  if (rmin >= 1.0 + kRatioTol) return SeriesVerdict::diverges;
  return SeriesVerdict::inconclusive;
}

// log(sum of exp(log_terms)), skipping -inf terms.
double log_sum_exp(const std::vector<double>& logs) {
  double mx = -kInf;
  for (double v : logs) mx = std::max(mx, v);
  if (!std::isfinite(mx)) return -kInf;
  double s = 0.0;
  for (double v : logs)
    if (std::isfinite(v)) s += std::exp(v - mx);
  return mx + std::log(s);
}

}  // namespace

const char* to_string(SeriesVerdict v) {
  switch (v) {
    case SeriesVerdict::converges: return "converges";
    case SeriesVerdict::diverges: return "diverges";
    case SeriesVerdict::inconclusive: return "inconclusive";
  }
  return "?";
}

ErgodicityReport check_ergodicity(const RateSequences& seq) {
  if (seq.n_trunc < 10) throw std::invalid_argument("check_ergodicity: n_trunc >= 10 required");
  const int N = seq.n_trunc;
  ErgodicityReport rep;

  std::vector<double> beta(static_cast<size_t>(N) + 1, 0.0), delta(static_cast<size_t>(N) + 1, 0.0);
  rep.delta_positive = true;
  for (int n = 1; n <= N; ++n) {
    beta[static_cast<size_t>(n)] = seq.beta_n(n);
    delta[static_cast<size_t>(n)] = seq.delta_n(n);
    if (beta[static_cast<size_t>(n)] < 0.0 || delta[static_cast<size_t>(n)] < 0.0)
      throw std::invalid_argument("check_ergodicity: negative rate");
    if (!(delta[static_cast<size_t>(n)] > 0.0)) rep.delta_positive = false;
  }

  // Condition (i): beta vanishes from some index through the truncation.
  int last_positive = 0;
  for (int n = 1; n <= N; ++n)
    if (beta[static_cast<size_t>(n)] > 0.0) last_positive = n;
  if (last_positive < N) {
    rep.condition_i = true;
    rep.n0 = last_positive + 1;
  }
  rep.condition_ii_applicable = (last_positive == N);

  // Term ratios: first series beta_n / delta_{n+1}; second series
  // delta_{n+1} / beta_{n+1}; square-root variant of the first.
  std::vector<double> r1, r2, rs;
  for (int n = 1; n < N; ++n) {
    const double b = beta[static_cast<size_t>(n)];
    const double d1 = delta[static_cast<size_t>(n) + 1];
    const double b1 = beta[static_cast<size_t>(n) + 1];
    r1.push_back(d1 > 0.0 ? b / d1 : kInf);
    r2.push_back(b1 > 0.0 ? d1 / b1 : kInf);
    rs.push_back(d1 > 0.0 ? std::sqrt(b / d1) : kInf);
  }
  rep.series_ratio = ratio_verdict(r1);
  rep.series_inverse = ratio_verdict(r2);
  rep.series_sqrt = ratio_verdict(rs);

  // Truncated partial sums in log space (diagnostics only; the verdicts come
  // from the ratio test).
  {
    std::vector<double> log_t, log_u;
    double log_bp = 0.0, log_dp = 0.0;  // log products of beta_1..n-1, delta_1..n
    bool beta_zero = false;
    for (int n = 2; n <= N; ++n) {
      const double bprev = beta[static_cast<size_t>(n) - 1];
      if (bprev > 0.0)
        log_bp += std::log(bprev);
      else
        beta_zero = true;
      log_dp += rep.delta_positive ? std::log(delta[static_cast<size_t>(n) - 1]) : 0.0;
      const double log_dn = rep.delta_positive
                                ? log_dp + std::log(delta[static_cast<size_t>(n)])
                                : 0.0;
      if (rep.delta_positive)
        log_t.push_back(beta_zero ? -kInf : log_bp - log_dn);
      if (!beta_zero && bprev > 0.0 && beta[static_cast<size_t>(n)] > 0.0 && rep.delta_positive)
        log_u.push_back(log_dn - (log_bp + std::log(beta[static_cast<size_t>(n)])));
    }
    rep.log_partial_sum_ratio = log_sum_exp(log_t);
    rep.log_partial_sum_inverse = log_sum_exp(log_u);
  }

  // Eventual domination beta_n <= delta_{n+1}.
  int first_ok = N;  // smallest index from which domination holds to the end
  for (int n = N - 1; n >= 1; --n) {
    if (beta[static_cast<size_t>(n)] <= delta[static_cast<size_t>(n) + 1])
      first_ok = n;
    else
      break;
  }
  rep.tail_dominance = (first_ok < N);
  rep.tail_from = rep.tail_dominance ? first_ok : -1;

  // Overall verdict.
  if (!rep.delta_positive) {
    rep.overall = ErgodicityReport::Overall::not_satisfied;
    return rep;
  }
  Tri main;
  if (rep.condition_i) {
    main = Tri::ok;
  } else if (rep.condition_ii_applicable) {
    main = tri_all({must_converge(rep.series_ratio), must_diverge(rep.series_inverse)});
  } else {
    main = Tri::failed;  // neither condition can hold within the truncation
  }
  const Tri extras =
      tri_all({must_converge(rep.series_sqrt), rep.tail_dominance ? Tri::ok : Tri::failed});
  switch (tri_all({main, extras})) {
    case Tri::ok: rep.overall = ErgodicityReport::Overall::satisfied; break;
    case Tri::failed: rep.overall = ErgodicityReport::Overall::not_satisfied; break;
    case Tri::unknown: rep.overall = ErgodicityReport::Overall::inconclusive; break;
  }
  return rep;
}

std::string ErgodicityReport::render() const {
  std::ostringstream os;
  os << "geometric-ergodicity check (numeric, truncated)\n";
  os << "  delta_n > 0 for n >= 1:       " << (delta_positive ? "yes" : "NO") << "\n";
  os << "  condition (i), beta cut-off:  "
     << (condition_i ? "satisfied (n0 = " + std::to_string(n0) + ")" : "not observed") << "\n";
  os << "  condition (ii) applicable:    " << (condition_ii_applicable ? "yes" : "no") << "\n";
  os << "    sum b1..b_{n-1}/d1..d_n:    " << to_string(series_ratio)
     << " (log partial sum " << log_partial_sum_ratio << ", must converge)\n";
  os << "    sum d1..d_n/b1..b_n:        " << to_string(series_inverse)
     << " (log partial sum " << log_partial_sum_inverse << ", must diverge)\n";
  os << "  sqrt series:                  " << to_string(series_sqrt) << " (must converge)\n";
  os << "  beta_n <= delta_{n+1} tail:   "
     << (tail_dominance ? "from n = " + std::to_string(tail_from) : "NO") << "\n";
  os << "  Feller property: assumed (holds for the built-in kernels on a compact domain)\n";
  os << "overall: ";
  switch (overall) {
    case Overall::satisfied: os << "satisfied"; break;
    case Overall::not_satisfied: os << "not satisfied"; break;
    case Overall::inconclusive: os << "inconclusive"; break;
  }
  os << "\n";
  return os.str();
}

RateSequences rate_sequences_from(const IntensitySpec& beta, const IntensitySpec& delta,
                                  const ParameterVector& th, int n_trunc) {
  RateSequences seq;
  seq.n_trunc = n_trunc;
  seq.beta_n = [&beta, th](int n) { return beta.bound_given_n(th, n); };
  seq.delta_n = [&delta, th](int n) { return delta.bound_given_n(th, n); };
  return seq;
}

}  // namespace bdmm
