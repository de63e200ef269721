#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bdmm/ergodicity.hpp"
#include "support.hpp"

using namespace bdmm;
using namespace testsup;

TEST_CASE("cut-off births satisfy condition (i)") {
  RateSequences seq;
  seq.beta_n = [](int n) { return n < 100 ? 2.0 : 0.0; };
  seq.delta_n = [](int n) { return static_cast<double>(n); };
  const ErgodicityReport rep = check_ergodicity(seq);
  CHECK(rep.delta_positive);
  CHECK(rep.condition_i);
  CHECK(rep.n0 == 100);
  CHECK(rep.tail_dominance);
  CHECK(rep.series_sqrt == SeriesVerdict::converges);
  CHECK(rep.overall == ErgodicityReport::Overall::satisfied);
}

TEST_CASE("constant births against linear deaths satisfy condition (ii)") {
  RateSequences seq;
  seq.beta_n = [](int) { return 1.0; };
  seq.delta_n = [](int n) { return static_cast<double>(n); };
  const ErgodicityReport rep = check_ergodicity(seq);
  CHECK(rep.condition_ii_applicable);
  CHECK(!rep.condition_i);
  CHECK(rep.series_ratio == SeriesVerdict::converges);    // sum 1/n! behaviour
  CHECK(rep.series_inverse == SeriesVerdict::diverges);   // sum n! behaviour
  CHECK(rep.series_sqrt == SeriesVerdict::converges);
  CHECK(rep.tail_dominance);
  CHECK(rep.tail_from == 1);
  CHECK(rep.overall == ErgodicityReport::Overall::satisfied);
  // the truncated first series approaches e - 1 - 1 ~ sum_{n>=2} 1/n!
  CHECK(std::exp(rep.log_partial_sum_ratio) ==
        doctest::Approx(std::exp(1.0) - 2.0).epsilon(1e-9));
}

TEST_CASE("births twice the deaths fail the divergence requirement") {
  RateSequences seq;
  seq.beta_n = [](int n) { return 2.0 * n; };
  seq.delta_n = [](int n) { return static_cast<double>(n); };
  const ErgodicityReport rep = check_ergodicity(seq);
  // second series is geometric with ratio 1/2: converges though it must diverge
  CHECK(rep.series_inverse == SeriesVerdict::converges);
  CHECK(rep.overall == ErgodicityReport::Overall::not_satisfied);
  CHECK(!rep.tail_dominance);
}

TEST_CASE("verdicts are scale invariant") {
  for (double scale : {1.0, 1e6}) {
    RateSequences ok;
    ok.beta_n = [scale](int) { return scale * 1.0; };
    ok.delta_n = [scale](int n) { return scale * n; };
    CHECK(check_ergodicity(ok).overall == ErgodicityReport::Overall::satisfied);

    RateSequences bad;
    bad.beta_n = [scale](int n) { return scale * 2.0 * n; };
    bad.delta_n = [scale](int n) { return scale * static_cast<double>(n); };
    CHECK(check_ergodicity(bad).overall == ErgodicityReport::Overall::not_satisfied);
  }
}

TEST_CASE("ratio oscillating at one is inconclusive, never a guess") {
  RateSequences seq;
  seq.beta_n = [](int n) { return static_cast<double>(n + 1); };  // beta_n = delta_{n+1}
  seq.delta_n = [](int n) { return static_cast<double>(n); };
  const ErgodicityReport rep = check_ergodicity(seq);
  CHECK(rep.series_ratio == SeriesVerdict::inconclusive);
  CHECK(rep.overall == ErgodicityReport::Overall::inconclusive);
}

TEST_CASE("vanishing deaths violate the precondition") {
  RateSequences seq;
  seq.beta_n = [](int) { return 1.0; };
  seq.delta_n = [](int n) { return n > 5 ? 1.0 : 0.0; };
  const ErgodicityReport rep = check_ergodicity(seq);
  CHECK(!rep.delta_positive);
  CHECK(rep.overall == ErgodicityReport::Overall::not_satisfied);
}

TEST_CASE("sequences derived from the built-in intensity families") {
  const ModelSpec model = basic_model(2.0, 0.3);  // capped beta, per-capita delta
  const RateSequences seq = rate_sequences_from(model.beta, model.delta, model.params, 1000);
  CHECK(seq.beta_n(1) == 2.0);
  CHECK(seq.beta_n(model.n_max) == 0.0);  // the model cap enters the envelope
  CHECK(seq.delta_n(4) == doctest::Approx(1.2));
  const ErgodicityReport rep = check_ergodicity(seq);
  CHECK(rep.condition_i);
  CHECK(rep.overall == ErgodicityReport::Overall::satisfied);
  CHECK(rep.render().find("satisfied") != std::string::npos);
}

TEST_CASE("truncation floor is enforced") {
  RateSequences seq;
  seq.beta_n = [](int) { return 1.0; };
  seq.delta_n = [](int n) { return static_cast<double>(n); };
  seq.n_trunc = 5;
  CHECK_THROWS_AS(check_ergodicity(seq), std::invalid_argument);
}
