#pragma once

// Shared fixtures and small models for the test suites.

#include <cmath>
#include <vector>

#include "bdmm/model.hpp"
#include "bdmm/rng.hpp"
#include "bdmm/simulate.hpp"

namespace testsup {

using namespace bdmm;

inline DomainBox box2d(double lo, double hi, Boundary b = Boundary::reflective) {
  DomainBox box;
  box.lower = Vec::Constant(2, lo);
  box.upper = Vec::Constant(2, hi);
  box.boundary = b;
  return box;
}

inline DomainBox box1d(double lo, double hi, Boundary b = Boundary::free) {
  DomainBox box;
  box.lower = Vec::Constant(1, lo);
  box.upper = Vec::Constant(1, hi);
  box.boundary = b;
  return box;
}

inline Particle particle(int id, std::initializer_list<double> loc, Label m = 0) {
  Vec z(static_cast<int>(loc.size()));
  int k = 0;
  for (double v : loc) z[k++] = v;
  return Particle(id, z, m);
}

inline Configuration config(std::initializer_list<Particle> ps) {
  return Configuration(std::vector<Particle>(ps));
}

// Single-label model on [0,10]^2: constant birth, per-capita death, no
// mutation, uniform birth kernel, Brownian motion.
inline ModelSpec basic_model(double beta_rate, double delta_rate, double tau_rate = 0.0,
                             double sigma = 1.0, int n_max = 60) {
  ModelSpec model;
  model.label_names = {"a"};
  model.domain = box2d(0.0, 10.0);
  model.params.add("beta", beta_rate, 0.0);
  model.params.add("delta", delta_rate, 0.0);
  model.params.add("tau", tau_rate, 0.0);
  model.n_max = n_max;

  model.beta = make_intensity(IntensityFamily::constant, "beta", model.params);
  model.delta = make_intensity(IntensityFamily::per_capita, "delta", model.params);
  model.tau = make_intensity(IntensityFamily::constant, "tau", model.params);

  BirthKernelOptions bopts;
  bopts.n_labels = 1;
  bopts.label_probs = {1.0};
  model.birth = make_birth_kernel(BirthFamily::uniform, bopts, model.domain, model.params);
  model.death = make_death_kernel(model.params);
  MutationMatrixSpec mspec;
  mspec.initial = Mat::Zero(1, 1);
  model.mutation = make_mutation_kernel(mspec, model.params);

  std::vector<RegimeSpec> regimes(1);
  regimes[0].kind = RegimeKind::brownian;
  regimes[0].sigma = sigma;
  model.move = make_independent_move(regimes, 2, model.params);

  finalize_model(model);
  return model;
}

// One immortal particle in one dimension with a constant drift parameter "v".
inline ModelSpec drift1d_model(double v, double sigma, double kappa_unused = 0.0) {
  (void)kappa_unused;
  ModelSpec model;
  model.label_names = {"a"};
  model.domain = box1d(-1e6, 1e6);
  model.params.add("v", v);
  model.params.add("zero", 0.0, 0.0);
  model.n_max = 4;

  model.beta = make_intensity(IntensityFamily::constant, "zero", model.params);
  model.delta = make_intensity(IntensityFamily::constant, "zero", model.params);
  model.tau = make_intensity(IntensityFamily::constant, "zero", model.params);

  BirthKernelOptions bopts;
  bopts.n_labels = 1;
  bopts.label_probs = {1.0};
  model.birth = make_birth_kernel(BirthFamily::uniform, bopts, model.domain, model.params);
  model.death = make_death_kernel(model.params);
  MutationMatrixSpec mspec;
  mspec.initial = Mat::Zero(1, 1);
  model.mutation = make_mutation_kernel(mspec, model.params);

  std::vector<RegimeSpec> regimes(1);
  regimes[0].kind = RegimeKind::drifted;
  regimes[0].sigma = sigma;
  regimes[0].velocity_params = {"v"};
  model.move = make_independent_move(regimes, 1, model.params);

  finalize_model(model);
  return model;
}

// Two labels: label 1 particles ("anchors") born uniformly, label 0 born by
// the anchored colocalization kernel with parameters (p, logsigma).
inline ModelSpec coloc_model_2label(double p, double log_sigma, double beta_rate,
                                    double delta_rate, double side = 20.0,
                                    int quad_points = 48) {
  ModelSpec model;
  model.label_names = {"L", "R"};
  model.domain = box2d(0.0, side);
  model.params.add("p", p, 0.0, 1.0);
  model.params.add("logsigma", log_sigma, -3.0, 3.0);
  model.params.add("beta", beta_rate, 0.0);
  model.params.add("delta", delta_rate, 0.0);
  model.params.add("tau", 0.0, 0.0);
  model.n_max = 80;

  model.beta = make_intensity(IntensityFamily::constant, "beta", model.params);
  model.delta = make_intensity(IntensityFamily::per_capita, "delta", model.params);
  model.tau = make_intensity(IntensityFamily::constant, "tau", model.params);

  BirthKernelOptions bopts;
  bopts.n_labels = 2;
  bopts.label_probs = {0.5, 0.5};
  bopts.log_sigma_param = "logsigma";
  bopts.mix_param = "p";
  bopts.anchor_labels = {1};
  bopts.colocalized_labels = {0};
  bopts.quadrature_points = quad_points;
  model.birth = make_birth_kernel(BirthFamily::colocalization, bopts, model.domain, model.params);
  model.death = make_death_kernel(model.params);
  MutationMatrixSpec mspec;
  mspec.initial = Mat::Zero(2, 2);
  mspec.initial << 0, 1, 1, 0;
  model.mutation = make_mutation_kernel(mspec, model.params);

  std::vector<RegimeSpec> regimes(2);
  regimes[0] = {RegimeKind::brownian, 0.5, {}, ""};
  regimes[1] = {RegimeKind::brownian, 0.5, {}, ""};
  model.move = make_independent_move(regimes, 2, model.params);

  finalize_model(model);
  return model;
}

// Two labels with constant intensities for all three jump types, uniform
// birth, swap-matrix mutation, Brownian motion.
inline ModelSpec two_label_model(double beta_rate, double delta_rate, double tau_rate,
                                 double sigma = 1.0, int n_max = 60) {
  ModelSpec model;
  model.label_names = {"a", "b"};
  model.domain = box2d(0.0, 10.0);
  model.params.add("beta", beta_rate, 0.0);
  model.params.add("delta", delta_rate, 0.0);
  model.params.add("tau", tau_rate, 0.0);
  model.n_max = n_max;

  model.beta = make_intensity(IntensityFamily::constant, "beta", model.params);
  model.delta = make_intensity(IntensityFamily::constant, "delta", model.params);
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
  regimes[0] = {RegimeKind::brownian, sigma, {}, ""};
  regimes[1] = {RegimeKind::brownian, sigma, {}, ""};
  model.move = make_independent_move(regimes, 2, model.params);

  finalize_model(model);
  return model;
}

inline Configuration uniform_configuration(const DomainBox& box, int n, Label max_label,
                                           RngStream& rng, int first_id = 0) {
  std::vector<Particle> ps;
  for (int i = 0; i < n; ++i) {
    Vec z(box.dim());
    for (int k = 0; k < box.dim(); ++k) z[k] = rng.uniform(box.lower[k], box.upper[k]);
    ps.emplace_back(first_id + i, z, max_label > 0 ? rng.uniform_int(max_label + 1) : 0);
  }
  return Configuration(std::move(ps));
}

// Central finite difference of f along parameter index i.
template <class F>
double fd_central(F&& f, ParameterVector th, int i, double h = 1e-5) {
  const double v0 = th[i];
  th.set(i, v0 + h);
  const double up = f(th);
  th.set(i, v0 - h);
  const double dn = f(th);
  return (up - dn) / (2.0 * h);
}

}  // namespace testsup
