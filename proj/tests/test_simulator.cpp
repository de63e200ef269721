#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "bdmm/simulate.hpp"
#include "bdmm/trajectory.hpp"
#include "support.hpp"

using namespace bdmm;
using namespace testsup;

namespace {

double two_sample_ks(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double d = 0.0;
  size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] <= b[j])
      ++i;
    else
      ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / a.size() -
                             static_cast<double>(j) / b.size()));
  }
  return d;
}

int count_kind(const Trajectory& traj, JumpKind k) {
  int c = 0;
  for (const auto& e : traj.events) c += (e.kind == k) ? 1 : 0;
  return c;
}

}  // namespace

TEST_CASE("euler segment: zero duration returns the single start point") {
  const ModelSpec model = basic_model(0.0, 0.0);
  RngStream rng(1);
  const Configuration x0 = uniform_configuration(model.domain, 3, 0, rng);
  const SegmentPath path =
      euler_maruyama_segment(model.move, model.params, x0, model.domain, 0.7, 0.0, 0.1, rng);
  REQUIRE(path.times.size() == 1);
  CHECK(path.times[0] == 0.7);
}

TEST_CASE("euler segment: near-deterministic drift limit") {
  const ModelSpec model = drift1d_model(1.0, 1e-9);
  RngStream rng(2);
  Vec z0(1);
  z0 << 0.0;
  const Configuration x0 = config({Particle(0, z0, 0)});
  const SegmentPath path =
      euler_maruyama_segment(model.move, model.params, x0, model.domain, 0.0, 1.0, 0.01, rng);
  CHECK(path.times.back() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(path.states.back()[0] == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("euler segment: brownian endpoint variance") {
  const ModelSpec model = basic_model(0.0, 0.0, 0.0, 1.0);
  ModelSpec free_model = model;
  free_model.domain.boundary = Boundary::free;  // avoid folding for the variance check
  RngStream rng(3);
  Vec z0(2);
  z0 << 5.0, 5.0;
  const Configuration x0 = config({Particle(0, z0, 0)});
  const int reps = 10000;
  double sx = 0, sx2 = 0, sy = 0, sy2 = 0;
  for (int r = 0; r < reps; ++r) {
    RngStream sub = rng.substream(static_cast<std::uint64_t>(r));
    const SegmentPath path = euler_maruyama_segment(free_model.move, free_model.params, x0,
                                                    free_model.domain, 0.0, 1.0, 0.05, sub);
    const double dx = path.states.back()[0] - 5.0;
    const double dy = path.states.back()[1] - 5.0;
    sx += dx;
    sx2 += dx * dx;
    sy += dy;
    sy2 += dy * dy;
  }
  const double vx = sx2 / reps - (sx / reps) * (sx / reps);
  const double vy = sy2 / reps - (sy / reps) * (sy / reps);
  CHECK(vx == doctest::Approx(1.0).epsilon(0.05));
  CHECK(vy == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("euler segment: grid times include lattice points and the partial end") {
  const ModelSpec model = basic_model(0.0, 0.0);
  RngStream rng(4);
  const Configuration x0 = uniform_configuration(model.domain, 1, 0, rng);
  const SegmentPath path =
      euler_maruyama_segment(model.move, model.params, x0, model.domain, 0.13, 0.3, 0.1, rng);
  REQUIRE(path.times.size() == 5);  // 0.13, 0.2, 0.3, 0.4, 0.43
  CHECK(path.times[1] == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(path.times[4] == doctest::Approx(0.43).epsilon(1e-12));
}

TEST_CASE("waiting times: constant-rate law (median and exactness)") {
  const ModelSpec model = basic_model(2.0, 0.0);  // alpha = 2 everywhere
  RngStream rng(5);
  const Configuration x0 = uniform_configuration(model.domain, 2, 0, rng);
  const int n = 10000;
  std::vector<double> waits;
  double mean = 0.0;
  for (int r = 0; r < n; ++r) {
    RngStream sub = rng.substream(static_cast<std::uint64_t>(r));
    const InterjumpResult res =
        sample_interjump(model, model.params, x0, 0.0, 100.0, 0.05, sub);
    waits.push_back(res.waiting);
    mean += res.waiting;
  }
  std::sort(waits.begin(), waits.end());
  const double median = waits[n / 2];
  // median of Exp(2) is ln 2 / 2; asymptotic SE of the sample median
  const double target = std::log(2.0) / 2.0;
  const double se = 1.0 / (2.0 * std::sqrt(static_cast<double>(n)) * 2.0 * std::exp(-2.0 * target));
  CHECK(std::abs(median - target) <= 3.0 * se);
  CHECK(mean / n == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("waiting times: zero total intensity never jumps") {
  const ModelSpec model = basic_model(0.0, 0.0);
  RngStream rng(6);
  const Configuration x0 = uniform_configuration(model.domain, 2, 0, rng);
  const InterjumpResult res = sample_interjump(model, model.params, x0, 0.0, 5.0, 0.1, rng);
  CHECK(std::isinf(res.waiting));
  CHECK(res.path.times.back() == doctest::Approx(5.0));

  SimOptions opts;
  opts.horizon = 3.0;
  opts.grid_dt = 0.1;
  const Trajectory traj = simulate(model, model.params, x0, opts);
  CHECK(traj.events.empty());
  CHECK(validate_trajectory(traj).empty());
}

TEST_CASE("thinning matches numerical inversion of the waiting-time law") {
  // Location-dependent birth intensity b (1 + sin^2 z1) on a single moving
  // particle; bound 2b.
  ModelSpec model = basic_model(0.0, 0.0, 0.0, 1.0);
  model.domain.boundary = Boundary::free;
  const double b = 1.0;
  IntensitySpec beta;
  beta.eval = [b](const ParameterVector&, const Configuration& x) {
    if (x.empty()) return 0.0;
    const double s = std::sin(x[0].location[0]);
    return b * (1.0 + s * s);
  };
  beta.grad = [](const ParameterVector& th, const Configuration&) {
    return Vec(Vec::Zero(th.size()));
  };
  beta.bound_given_n = [b](const ParameterVector&, int n) { return n > 0 ? 2.0 * b : 2.0 * b; };
  beta.location_independent = false;
  model.beta = beta;

  Vec z0(2);
  z0 << 0.3, 0.0;
  const Configuration x0 = config({Particle(0, z0, 0)});
  const int n = 10000;
  const double dt = 0.01;

  RngStream rng(7);
  std::vector<double> thinned;
  for (int r = 0; r < n; ++r) {
    RngStream sub = rng.substream(static_cast<std::uint64_t>(r));
    thinned.push_back(sample_interjump(model, model.params, x0, 0.0, 50.0, dt, sub).waiting);
  }

  // Independent route: cumulate the intensity along a fresh path and invert
  // an exponential clock by linear interpolation.
  std::vector<double> inverted;
  RngStream rng2(8);
  for (int r = 0; r < n; ++r) {
    RngStream sub = rng2.substream(static_cast<std::uint64_t>(r));
    const SegmentPath path =
        euler_maruyama_segment(model.move, model.params, x0, model.domain, 0.0, 50.0, dt, sub);
    const double target = sub.exponential(1.0);
    double cum = 0.0;
    double wait = 50.0;
    for (size_t k = 0; k + 1 < path.times.size(); ++k) {
      const double s = std::sin(path.states[k][0]);
      const double rate = b * (1.0 + s * s);
      const double inc = rate * (path.times[k + 1] - path.times[k]);
      if (cum + inc >= target) {
        wait = path.times[k] + (target - cum) / rate;
        break;
      }
      cum += inc;
    }
    inverted.push_back(wait);
  }

  const double ks = two_sample_ks(thinned, inverted);
  INFO("two-sample KS distance ", ks);
  CHECK(ks < 0.02);
}

TEST_CASE("jump kinds: equal intensities split in thirds") {
  const ModelSpec model = two_label_model(1.0, 1.0, 1.0);
  RngStream rng(9);
  const Configuration x0 = uniform_configuration(model.domain, 4, 1, rng);
  const int n = 10000;
  int births = 0;
  for (int r = 0; r < n; ++r) {
    RngStream sub = rng.substream(static_cast<std::uint64_t>(r));
    const JumpEvent ev = sample_jump(model, model.params, x0, 1.0, sub);
    births += (ev.kind == JumpKind::birth) ? 1 : 0;
  }
  const double frac = static_cast<double>(births) / n;
  const double se = std::sqrt((1.0 / 3.0) * (2.0 / 3.0) / n);
  CHECK(std::abs(frac - 1.0 / 3.0) <= 3.0 * se);
}

TEST_CASE("jump kinds: births only when death and mutation rates vanish") {
  const ModelSpec model = basic_model(2.0, 0.0, 0.0);
  RngStream rng(10);
  const Configuration x0 = uniform_configuration(model.domain, 3, 0, rng);
  for (int r = 0; r < 200; ++r) {
    RngStream sub = rng.substream(static_cast<std::uint64_t>(r));
    CHECK(sample_jump(model, model.params, x0, 0.5, sub).kind == JumpKind::birth);
  }
}

TEST_CASE("jump kinds: uniform death removes each particle equally often") {
  ModelSpec model = basic_model(0.0, 1.0, 0.0);
  RngStream rng(11);
  const Configuration x0 = uniform_configuration(model.domain, 4, 0, rng);
  const int n = 10000;
  std::vector<int> counts(4, 0);
  for (int r = 0; r < n; ++r) {
    RngStream sub = rng.substream(static_cast<std::uint64_t>(r));
    const JumpEvent ev = sample_jump(model, model.params, x0, 0.5, sub);
    REQUIRE(ev.kind == JumpKind::death);
    ++counts[static_cast<size_t>(ev.particle_id)];
  }
  const double se = std::sqrt(0.25 * 0.75 / n);
  for (int i = 0; i < 4; ++i)
    CHECK(std::abs(counts[static_cast<size_t>(i)] / static_cast<double>(n) - 0.25) <= 3.0 * se);
}

TEST_CASE("simulate: pure-death model empties and stays empty") {
  const ModelSpec model = basic_model(0.0, 0.8);
  RngStream rng(12);
  const Configuration x0 = uniform_configuration(model.domain, 5, 0, rng);
  SimOptions opts;
  opts.horizon = 60.0;
  opts.grid_dt = 0.05;
  opts.seed = 13;
  const Trajectory traj = simulate(model, model.params, x0, opts);
  REQUIRE(traj.events.size() == 5);
  for (const auto& ev : traj.events) CHECK(ev.kind == JumpKind::death);
  CHECK(configuration_at(traj, traj.horizon).empty());
  CHECK(validate_trajectory(traj).empty());
}

TEST_CASE("simulate: deterministic for a fixed seed") {
  const ModelSpec model = basic_model(2.0, 0.4, 0.0);
  RngStream rng(14);
  const Configuration x0 = uniform_configuration(model.domain, 3, 0, rng);
  SimOptions opts;
  opts.horizon = 4.0;
  opts.grid_dt = 0.02;
  opts.seed = 999;
  const Trajectory a = simulate(model, model.params, x0, opts);
  const Trajectory b = simulate(model, model.params, x0, opts);
  REQUIRE(a.events.size() == b.events.size());
  for (size_t i = 0; i < a.events.size(); ++i) {
    CHECK(a.events[i].time == b.events[i].time);
    CHECK(a.events[i].kind == b.events[i].kind);
    CHECK(a.events[i].particle_id == b.events[i].particle_id);
  }
  REQUIRE(a.tracks.size() == b.tracks.size());
  for (size_t i = 0; i < a.tracks.size(); ++i) {
    REQUIRE(a.tracks[i].samples.size() == b.tracks[i].samples.size());
    for (size_t k = 0; k < a.tracks[i].samples.size(); ++k) {
      CHECK(a.tracks[i].samples[k].t == b.tracks[i].samples[k].t);
      CHECK(a.tracks[i].samples[k].location == b.tracks[i].samples[k].location);
    }
  }
  SimOptions other = opts;
  other.seed = 1000;
  const Trajectory c = simulate(model, model.params, x0, other);
  CHECK(c.events.size() + a.events.size() > 0);  // different seeds may differ
}

TEST_CASE("simulate: cardinality never exceeds n_max, nothing fires from empty") {
  ModelSpec model = basic_model(20.0, 0.05, 0.0, 1.0, 12);  // strong births, cap at 12
  SimOptions opts;
  opts.horizon = 8.0;
  opts.grid_dt = 0.05;
  opts.seed = 77;
  const Trajectory traj = simulate(model, model.params, Configuration{}, opts);
  CHECK(validate_trajectory(traj).empty());
  int n = 0, n_max_seen = 0;
  for (const auto& ev : traj.events) {
    n += (ev.kind == JumpKind::birth) ? 1 : (ev.kind == JumpKind::death ? -1 : 0);
    n_max_seen = std::max(n_max_seen, n);
    CHECK(n >= 0);
  }
  CHECK(n_max_seen <= 12);
  CHECK(count_kind(traj, JumpKind::birth) > 0);
}

TEST_CASE("simulate: event cap raises a truncation error carrying the partial path") {
  const ModelSpec model = basic_model(50.0, 0.0);
  SimOptions opts;
  opts.horizon = 10.0;
  opts.grid_dt = 0.05;
  opts.max_events = 5;
  bool caught = false;
  try {
    simulate(model, model.params, Configuration{}, opts);
  } catch (const TruncatedTrajectory& e) {
    caught = true;
    CHECK(e.partial.events.size() == 5);
  }
  CHECK(caught);
}

TEST_CASE("simulate: counting-process compensator identity") {
  // Means of N^delta_T and of the integral of delta n(X_s) ds agree.
  const ModelSpec model = basic_model(3.0, 0.4, 0.0);
  RngStream rng(15);
  const Configuration x0 = uniform_configuration(model.domain, 4, 0, rng);
  SimOptions opts;
  opts.horizon = 5.0;
  opts.grid_dt = 0.05;
  opts.seed = 31;

  const int reps = 100;
  double sum_d = 0, sum_d2 = 0, sum_c = 0, sum_c2 = 0;
  for (int r = 0; r < reps; ++r) {
    SimOptions o = opts;
    o.stream = static_cast<std::uint64_t>(r);
    const Trajectory traj = simulate(model, model.params, x0, o);
    const double deaths = count_kind(traj, JumpKind::death);
    // exact piecewise-constant integral of delta * n(X_s)
    double integral = 0.0;
    double prev_t = 0.0;
    int n = x0.size();
    for (const auto& ev : traj.events) {
      integral += 0.4 * n * (ev.time - prev_t);
      prev_t = ev.time;
      n += (ev.kind == JumpKind::birth) ? 1 : (ev.kind == JumpKind::death ? -1 : 0);
    }
    integral += 0.4 * n * (traj.horizon - prev_t);
    sum_d += deaths;
    sum_d2 += deaths * deaths;
    sum_c += integral;
    sum_c2 += integral * integral;
  }
  const double mean_d = sum_d / reps, mean_c = sum_c / reps;
  const double var_d = sum_d2 / reps - mean_d * mean_d;
  const double var_c = sum_c2 / reps - mean_c * mean_c;
  const double se = std::sqrt((var_d + var_c) / reps);
  INFO("mean deaths ", mean_d, " mean compensator ", mean_c, " se ", se);
  CHECK(std::abs(mean_d - mean_c) <= 3.0 * se);
}

TEST_CASE("simulate: mutation events flip labels per the transition matrix") {
  ModelSpec model;
  model.label_names = {"a", "b"};
  model.domain = box2d(0.0, 10.0);
  model.params.add("beta", 0.0, 0.0);
  model.params.add("tau", 2.0, 0.0);
  model.n_max = 10;
  model.beta = make_intensity(IntensityFamily::constant, "beta", model.params);
  model.delta = make_intensity(IntensityFamily::constant, "beta", model.params);
  model.tau = make_intensity(IntensityFamily::constant, "tau", model.params);
  BirthKernelOptions bopts;
  bopts.n_labels = 2;
  bopts.label_probs = {0.5, 0.5};
  model.birth = make_birth_kernel(BirthFamily::uniform, bopts, model.domain, model.params);
  model.death = make_death_kernel(model.params);
  Mat P(2, 2);
  P << 0, 1, 1, 0;
  model.mutation = make_mutation_kernel({P, false, "q"}, model.params);
  std::vector<RegimeSpec> regimes(2);
  regimes[0] = {RegimeKind::brownian, 0.5, {}, ""};
  regimes[1] = {RegimeKind::brownian, 0.5, {}, ""};
  model.move = make_independent_move(regimes, 2, model.params);
  finalize_model(model);

  RngStream rng(16);
  const Configuration x0 = uniform_configuration(model.domain, 3, 1, rng);
  SimOptions opts;
  opts.horizon = 3.0;
  opts.grid_dt = 0.05;
  opts.seed = 8;
  const Trajectory traj = simulate(model, model.params, x0, opts);
  CHECK(validate_trajectory(traj).empty());
  CHECK(count_kind(traj, JumpKind::mutation) == static_cast<int>(traj.events.size()));
  CHECK(!traj.events.empty());
}
