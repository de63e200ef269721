#include "bdmm/jump_kernels.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "bdmm/errors.hpp"
#include "bdmm/quadrature.hpp"
#include "bdmm/simd/kernels.hpp"

namespace bdmm {
namespace {

constexpr int kRejectionCap = 200000;

Label sample_label(const std::vector<double>& probs, RngStream& rng) {
  double u = rng.uniform();
  for (size_t m = 0; m + 1 < probs.size(); ++m) {
    u -= probs[m];
    if (u < 0.0) return static_cast<Label>(m);
  }
  return static_cast<Label>(probs.size() - 1);
}

Vec sample_uniform_in_box(const DomainBox& box, RngStream& rng) {
  Vec z(box.dim());
  for (int k = 0; k < box.dim(); ++k) z[k] = rng.uniform(box.lower[k], box.upper[k]);
  return z;
}

void check_label_probs(const std::vector<double>& probs, int n_labels) {
  if (static_cast<int>(probs.size()) != n_labels)
    throw std::domain_error("birth kernel: label_probs size must equal the label count");
  double s = 0.0;
  for (double p : probs) {
    if (p < 0.0 || p > 1.0) throw std::domain_error("birth kernel: label probability outside [0,1]");
    s += p;
  }
  if (std::abs(s - 1.0) > 1e-9) throw std::domain_error("birth kernel: label_probs must sum to 1");
}

// Monte-Carlo bracket with draws from the kernel itself:
//   integral of (grad k)(grad k)^T / k dnu  =  E_{y ~ k}[ grad log k (grad log k)^T ].
struct BracketSource {
  std::function<JumpEvent(const ParameterVector&, const Configuration&, double, RngStream&)>
      sample;
  std::function<double(const ParameterVector&, const Configuration&, const JumpEvent&)> density;
  std::function<Vec(const ParameterVector&, const Configuration&, const JumpEvent&)> grad;
};

Mat mc_bracket(const BracketSource& src, const ParameterVector& th, const Configuration& x,
               RngStream& rng, int draws) {
  const int ell = th.size();
  Mat acc = Mat::Zero(ell, ell);
  for (int it = 0; it < draws; ++it) {
    const JumpEvent ev = src.sample(th, x, 0.0, rng);
    const double k = src.density(th, x, ev);
    if (k <= 0.0) continue;
    const Vec s = src.grad(th, x, ev) / k;
    acc.noalias() += s * s.transpose();
  }
  return acc / static_cast<double>(draws);
}

// ---------------------------------------------------------------------------
// Truncated-Gaussian mixture over a set of centers: each component is
// exp(-|z-c|^2/(2 sigma^2)) normalised by its mass over the domain box.

struct TruncGaussMixture {
  std::vector<Vec> centers;
  std::vector<GaussMass> mass;  // filled by prepare_masses
  double sigma = 1.0;

  void prepare_masses(const BoxQuadrature& quad) {
    mass.resize(centers.size());
    for (size_t i = 0; i < centers.size(); ++i)
      mass[i] = truncated_gauss_mass(quad, centers[i], sigma);
  }

  double density(const Vec& z) const {
    const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
    double acc = 0.0;
    for (size_t i = 0; i < centers.size(); ++i) {
      const double r2 = (z - centers[i]).squaredNorm();
      acc += std::exp(-r2 * inv2s2) / mass[i].value;
    }
    return acc / static_cast<double>(centers.size());
  }

  // (density, d density / d log sigma)
  std::pair<double, double> density_dlogsigma(const Vec& z) const {
    const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
    double acc = 0.0, dacc = 0.0;
    for (size_t i = 0; i < centers.size(); ++i) {
      const double r2 = (z - centers[i]).squaredNorm();
      const double e = std::exp(-r2 * inv2s2) / mass[i].value;
      acc += e;
      dacc += e * (2.0 * r2 * inv2s2 - mass[i].d_dlogsigma / mass[i].value);
    }
    const double n = static_cast<double>(centers.size());
    return {acc / n, dacc / n};
  }

  Vec sample(const DomainBox& box, RngStream& rng) const {
    const int i = rng.uniform_int(static_cast<int>(centers.size()));
    for (int it = 0; it < kRejectionCap; ++it) {
      Vec z(box.dim());
      for (int k = 0; k < box.dim(); ++k) z[k] = centers[static_cast<size_t>(i)][k] + sigma * rng.normal();
      if (box.contains(z)) return z;
    }
    throw NumericError("truncated-Gaussian sampling: rejection cap reached (sigma too large?)");
  }
};

// ---------------------------------------------------------------------------
// Birth families

struct UniformBirth {
  DomainBox box;
  std::vector<double> probs;
  double inv_volume;

  JumpEvent sample(const ParameterVector&, const Configuration&, double t, RngStream& rng) const {
    return JumpEvent::birth(t, -1, sample_uniform_in_box(box, rng), sample_label(probs, rng));
  }
  double density(const ParameterVector&, const Configuration&, const JumpEvent& ev) const {
    if (!box.contains(*ev.birth_location, 1e-12)) return 0.0;
    return probs[static_cast<size_t>(*ev.birth_label)] * inv_volume;
  }
};

struct GaussMixtureBirth {
  DomainBox box;
  std::vector<double> probs;
  double inv_volume;
  int log_sigma_idx;
  std::shared_ptr<BoxQuadrature> quad;

  TruncGaussMixture prep(const ParameterVector& th, const Configuration& x, bool masses) const {
    TruncGaussMixture mix;
    mix.sigma = std::exp(th[log_sigma_idx]);
    mix.centers.reserve(static_cast<size_t>(x.size()));
    for (const auto& p : x) mix.centers.push_back(p.location);
    if (masses && !mix.centers.empty()) mix.prepare_masses(*quad);
    return mix;
  }

  JumpEvent sample(const ParameterVector& th, const Configuration& x, double t,
                   RngStream& rng) const {
    const Label m = sample_label(probs, rng);
    if (x.empty()) return JumpEvent::birth(t, -1, sample_uniform_in_box(box, rng), m);
    const TruncGaussMixture mix = prep(th, x, false);
    return JumpEvent::birth(t, -1, mix.sample(box, rng), m);
  }
  double density(const ParameterVector& th, const Configuration& x, const JumpEvent& ev) const {
    if (!box.contains(*ev.birth_location, 1e-12)) return 0.0;
    const double pm = probs[static_cast<size_t>(*ev.birth_label)];
    if (x.empty()) return pm * inv_volume;
    return pm * prep(th, x, true).density(*ev.birth_location);
  }
  Vec grad(const ParameterVector& th, const Configuration& x, const JumpEvent& ev) const {
    Vec g = Vec::Zero(th.size());
    if (x.empty() || !box.contains(*ev.birth_location, 1e-12)) return g;
    const double pm = probs[static_cast<size_t>(*ev.birth_label)];
    const auto [d, dd] = prep(th, x, true).density_dlogsigma(*ev.birth_location);
    (void)d;
    g[log_sigma_idx] = pm * dd;
    return g;
  }

  // Score outer-product expectation with the normaliser quadratures done
  // once per configuration, not per draw.
  Mat bracket(const ParameterVector& th, const Configuration& x, RngStream& rng,
              int draws) const {
    const int ell = th.size();
    Mat acc = Mat::Zero(ell, ell);
    if (x.empty()) return acc;
    TruncGaussMixture mix = prep(th, x, true);
    for (int it = 0; it < draws; ++it) {
      const Vec z = mix.sample(box, rng);
      const auto [d, dd] = mix.density_dlogsigma(z);
      if (d <= 0.0) continue;
      const double s = dd / d;  // d log k / d log sigma; label weight cancels
      acc(log_sigma_idx, log_sigma_idx) += s * s;
    }
    return acc / static_cast<double>(draws);
  }
};

struct ColocalizationBirth {
  DomainBox box;
  std::vector<double> probs;
  double inv_volume;
  int mix_idx;
  int log_sigma_idx;
  std::vector<char> is_anchor;       // by label
  std::vector<char> is_colocalized;  // by label
  std::shared_ptr<BoxQuadrature> quad;

  std::vector<Vec> anchors(const Configuration& x) const {
    std::vector<Vec> c;
    for (const auto& p : x)
      if (is_anchor[static_cast<size_t>(p.label)]) c.push_back(p.location);
    return c;
  }

  JumpEvent sample(const ParameterVector& th, const Configuration& x, double t,
                   RngStream& rng) const {
    const Label m = sample_label(probs, rng);
    if (is_colocalized[static_cast<size_t>(m)]) {
      auto c = anchors(x);
      if (!c.empty() && rng.uniform() < th[mix_idx]) {
        TruncGaussMixture mix;
        mix.sigma = std::exp(th[log_sigma_idx]);
        mix.centers = std::move(c);
        return JumpEvent::birth(t, -1, mix.sample(box, rng), m);
      }
    }
    return JumpEvent::birth(t, -1, sample_uniform_in_box(box, rng), m);
  }

  double density(const ParameterVector& th, const Configuration& x, const JumpEvent& ev) const {
    if (!box.contains(*ev.birth_location, 1e-12)) return 0.0;
    const Label m = *ev.birth_label;
    const double pm = probs[static_cast<size_t>(m)];
    if (!is_colocalized[static_cast<size_t>(m)]) return pm * inv_volume;
    TruncGaussMixture mix;
    mix.centers = anchors(x);
    if (mix.centers.empty()) return pm * inv_volume;  // no anchors: uniform
    mix.sigma = std::exp(th[log_sigma_idx]);
    mix.prepare_masses(*quad);
    const double p = th[mix_idx];
    return pm * (p * mix.density(*ev.birth_location) + (1.0 - p) * inv_volume);
  }

  Vec grad(const ParameterVector& th, const Configuration& x, const JumpEvent& ev) const {
    Vec g = Vec::Zero(th.size());
    const Label m = *ev.birth_label;
    if (!is_colocalized[static_cast<size_t>(m)]) return g;
    if (!box.contains(*ev.birth_location, 1e-12)) return g;
    TruncGaussMixture mix;
    mix.centers = anchors(x);
    if (mix.centers.empty()) return g;
    mix.sigma = std::exp(th[log_sigma_idx]);
    mix.prepare_masses(*quad);
    const double pm = probs[static_cast<size_t>(m)];
    const auto [d, dd] = mix.density_dlogsigma(*ev.birth_location);
    g[mix_idx] = pm * (d - inv_volume);
    g[log_sigma_idx] = pm * th[mix_idx] * dd;
    return g;
  }

  // As for the density, but with the anchors' truncation masses computed a
  // single time; the draws only cost mixture evaluations.
  Mat bracket(const ParameterVector& th, const Configuration& x, RngStream& rng,
              int draws) const {
    const int ell = th.size();
    Mat acc = Mat::Zero(ell, ell);
    TruncGaussMixture mix;
    mix.centers = anchors(x);
    if (mix.centers.empty()) return acc;  // pure uniform: no parameter enters
    mix.sigma = std::exp(th[log_sigma_idx]);
    mix.prepare_masses(*quad);
    const double p = th[mix_idx];

    double coloc_mass = 0.0;  // total label probability of colocalized births
    for (size_t m = 0; m < probs.size(); ++m)
      if (is_colocalized[m]) coloc_mass += probs[m];
    if (coloc_mass <= 0.0) return acc;

    // Non-colocalized draws have zero score; sample the colocalized location
    // law directly and weight by the total colocalized label mass.
    Vec s = Vec::Zero(ell);
    for (int it = 0; it < draws; ++it) {
      const Vec z = (rng.uniform() < p) ? mix.sample(box, rng) : sample_uniform_in_box(box, rng);
      const auto [d, dd] = mix.density_dlogsigma(z);
      const double k = p * d + (1.0 - p) * inv_volume;  // location density
      if (k <= 0.0) continue;
      s[mix_idx] = (d - inv_volume) / k;
      s[log_sigma_idx] = p * dd / k;
      acc.noalias() += coloc_mass * (s * s.transpose());
    }
    return acc / static_cast<double>(draws);
  }
};

struct PotentialBirth {
  DomainBox box;
  std::vector<double> probs;
  int n_labels;
  std::vector<std::vector<int>> weight_idx;  // -1 where fixed
  Mat fixed_weights;
  double bump_height, bump_scale;
  std::shared_ptr<BoxQuadrature> quad;

  double weight(const ParameterVector& th, Label m, Label mj) const {
    const int idx = weight_idx[static_cast<size_t>(m)][static_cast<size_t>(mj)];
    return idx >= 0 ? th[idx] : fixed_weights(m, mj);
  }

  // Exponent at z for a birth of label m: -sum_i w(m, m_i) Phi(z - z_i).
  double exponent_at(const ParameterVector& th, const Configuration& x, Label m,
                     const Vec& z) const {
    const double inv2s2 = 1.0 / (2.0 * bump_scale * bump_scale);
    double e = 0.0;
    for (const auto& p : x) {
      const double r2 = (z - p.location).squaredNorm();
      e -= weight(th, m, p.label) * bump_height * std::exp(-r2 * inv2s2);
    }
    return e;
  }

  struct Prep {
    double norm = 0.0;                 // a^m(x)
    std::vector<double> mean_s;        // <S_{m'}> per neighbour label
  };

  // Quadrature pass: per-neighbour-label bump sums on the grid, the
  // normaliser, and the exponent-weighted means used by the gradient.
  Prep prepare(const ParameterVector& th, const Configuration& x, Label m,
               bool with_means) const {
    const int n = quad->size();
    const double inv2s2 = 1.0 / (2.0 * bump_scale * bump_scale);
    std::vector<std::vector<double>> s_by_label(static_cast<size_t>(n_labels));
    std::vector<double> expo(static_cast<size_t>(n), 0.0);
    for (const auto& p : x) {
      auto& s = s_by_label[static_cast<size_t>(p.label)];
      if (s.empty()) s.assign(static_cast<size_t>(n), 0.0);
      if (quad->dim() == 2) {
        simd::ops().axpy_exp_sqdist_2d(quad->axis(0).data(), quad->axis(1).data(),
                                       static_cast<std::size_t>(n), p.location[0], p.location[1],
                                       inv2s2, bump_height, s.data());
      } else {
        for (int j = 0; j < n; ++j) {
          const double r2 = (quad->node(j) - p.location).squaredNorm();
          s[static_cast<size_t>(j)] += bump_height * std::exp(-r2 * inv2s2);
        }
      }
    }
    for (int mj = 0; mj < n_labels; ++mj) {
      const auto& s = s_by_label[static_cast<size_t>(mj)];
      if (s.empty()) continue;
      const double w = weight(th, m, mj);
      for (int j = 0; j < n; ++j) expo[static_cast<size_t>(j)] -= w * s[static_cast<size_t>(j)];
    }
    Prep out;
    std::vector<double> ez(static_cast<size_t>(n));
    double total = 0.0;
    for (int j = 0; j < n; ++j) {
      ez[static_cast<size_t>(j)] = std::exp(expo[static_cast<size_t>(j)]);
      total += ez[static_cast<size_t>(j)];
    }
    out.norm = total * quad->cell_weight();
    if (with_means) {
      out.mean_s.assign(static_cast<size_t>(n_labels), 0.0);
      for (int mj = 0; mj < n_labels; ++mj) {
        const auto& s = s_by_label[static_cast<size_t>(mj)];
        if (s.empty()) continue;
        double acc = 0.0;
        for (int j = 0; j < n; ++j) acc += ez[static_cast<size_t>(j)] * s[static_cast<size_t>(j)];
        out.mean_s[static_cast<size_t>(mj)] = acc / total;
      }
    }
    return out;
  }

  JumpEvent sample(const ParameterVector& th, const Configuration& x, double t,
                   RngStream& rng) const {
    const Label m = sample_label(probs, rng);
    // Rejection with a uniform envelope; the exponent is bounded above by
    // the attractive part of the weights since each bump lies in (0, w].
    double log_bound = 0.0;
    for (const auto& p : x) log_bound += std::max(0.0, -weight(th, m, p.label)) * bump_height;
    for (int it = 0; it < kRejectionCap; ++it) {
      const Vec z = sample_uniform_in_box(box, rng);
      if (std::log(rng.uniform() + 1e-300) < exponent_at(th, x, m, z) - log_bound)
        return JumpEvent::birth(t, -1, z, m);
    }
    throw NumericError("potential birth kernel: rejection cap reached");
  }

  double density(const ParameterVector& th, const Configuration& x, const JumpEvent& ev) const {
    if (!box.contains(*ev.birth_location, 1e-12)) return 0.0;
    const Label m = *ev.birth_label;
    const Prep prep = prepare(th, x, m, false);
    return probs[static_cast<size_t>(m)] *
           std::exp(exponent_at(th, x, m, *ev.birth_location)) / prep.norm;
  }

  std::vector<double> bump_sums_at(const Configuration& x, const Vec& z) const {
    const double inv2s2 = 1.0 / (2.0 * bump_scale * bump_scale);
    std::vector<double> s(static_cast<size_t>(n_labels), 0.0);
    for (const auto& p : x) {
      const double r2 = (z - p.location).squaredNorm();
      s[static_cast<size_t>(p.label)] += bump_height * std::exp(-r2 * inv2s2);
    }
    return s;
  }

  Vec grad(const ParameterVector& th, const Configuration& x, const JumpEvent& ev) const {
    Vec g = Vec::Zero(th.size());
    if (!box.contains(*ev.birth_location, 1e-12)) return g;
    const Label m = *ev.birth_label;
    const Prep prep = prepare(th, x, m, true);
    const double k = probs[static_cast<size_t>(m)] *
                     std::exp(exponent_at(th, x, m, *ev.birth_location)) / prep.norm;
    // d log k / d w(m, m') = <S_{m'}> - S_{m'}(z)
    const std::vector<double> s_at_z = bump_sums_at(x, *ev.birth_location);
    for (int mj = 0; mj < n_labels; ++mj) {
      const int idx = weight_idx[static_cast<size_t>(m)][static_cast<size_t>(mj)];
      if (idx < 0) continue;
      g[idx] += k * (prep.mean_s[static_cast<size_t>(mj)] - s_at_z[static_cast<size_t>(mj)]);
    }
    return g;
  }

  Mat bracket(const ParameterVector& th, const Configuration& x, RngStream& rng,
              int draws) const {
    const int ell = th.size();
    Mat acc = Mat::Zero(ell, ell);
    std::vector<std::unique_ptr<Prep>> preps(static_cast<size_t>(n_labels));
    Vec s = Vec::Zero(ell);
    for (int it = 0; it < draws; ++it) {
      const Label m = sample_label(probs, rng);
      auto& prep = preps[static_cast<size_t>(m)];
      if (!prep) prep = std::make_unique<Prep>(prepare(th, x, m, true));
      // rejection draw for this label's location law
      double log_bound = 0.0;
      for (const auto& p : x) log_bound += std::max(0.0, -weight(th, m, p.label)) * bump_height;
      Vec z;
      bool ok = false;
      for (int rej = 0; rej < kRejectionCap; ++rej) {
        z = sample_uniform_in_box(box, rng);
        if (std::log(rng.uniform() + 1e-300) < exponent_at(th, x, m, z) - log_bound) {
          ok = true;
          break;
        }
      }
      if (!ok) throw NumericError("potential birth kernel: rejection cap reached");
      const std::vector<double> s_at_z = bump_sums_at(x, z);
      s.setZero();
      for (int mj = 0; mj < n_labels; ++mj) {
        const int idx = weight_idx[static_cast<size_t>(m)][static_cast<size_t>(mj)];
        if (idx < 0) continue;
        s[idx] += prep->mean_s[static_cast<size_t>(mj)] - s_at_z[static_cast<size_t>(mj)];
      }
      acc.noalias() += s * s.transpose();
    }
    return acc / static_cast<double>(draws);
  }
};

}  // namespace

BirthFamily birth_family_from_string(const std::string& s) {
  if (s == "uniform") return BirthFamily::uniform;
  if (s == "gaussian_mixture") return BirthFamily::gaussian_mixture;
  if (s == "colocalization") return BirthFamily::colocalization;
  if (s == "potential") return BirthFamily::potential;
  throw ConfigError("unknown birth kernel family: " + s);
}

KernelSpec make_birth_kernel(BirthFamily family, const BirthKernelOptions& opts,
                             const DomainBox& domain, const ParameterVector& params) {
  if (opts.n_labels < 1) throw std::domain_error("birth kernel: empty label alphabet");
  check_label_probs(opts.label_probs, opts.n_labels);
  domain.validate();
  if (!(domain.volume() > 0.0) || !std::isfinite(domain.volume()))
    throw std::domain_error("birth kernel: domain box must have finite positive volume");

  KernelSpec spec;
  spec.kind = JumpKind::birth;
  const int draws = opts.bracket_draws;

  switch (family) {
    case BirthFamily::uniform: {
      auto impl = std::make_shared<UniformBirth>(
          UniformBirth{domain, opts.label_probs, 1.0 / domain.volume()});
      spec.sample = [impl](const ParameterVector& th, const Configuration& x, double t,
                           RngStream& rng) { return impl->sample(th, x, t, rng); };
      spec.density = [impl](const ParameterVector& th, const Configuration& x,
                            const JumpEvent& ev) { return impl->density(th, x, ev); };
      spec.grad_density = [](const ParameterVector& th, const Configuration&,
                             const JumpEvent&) { return Vec(Vec::Zero(th.size())); };
      spec.bracket_integral = [](const ParameterVector& th, const Configuration&,
                                 RngStream&) { return Mat(Mat::Zero(th.size(), th.size())); };
      break;
    }
    case BirthFamily::gaussian_mixture: {
      auto impl = std::make_shared<GaussMixtureBirth>(GaussMixtureBirth{
          domain, opts.label_probs, 1.0 / domain.volume(),
          params.index_of(opts.log_sigma_param),
          std::make_shared<BoxQuadrature>(domain, opts.quadrature_points)});
      spec.param_names = {opts.log_sigma_param};
      spec.sample = [impl](const ParameterVector& th, const Configuration& x, double t,
                           RngStream& rng) { return impl->sample(th, x, t, rng); };
      spec.density = [impl](const ParameterVector& th, const Configuration& x,
                            const JumpEvent& ev) { return impl->density(th, x, ev); };
      spec.grad_density = [impl](const ParameterVector& th, const Configuration& x,
                                 const JumpEvent& ev) { return impl->grad(th, x, ev); };
      spec.bracket_integral = [impl, draws](const ParameterVector& th, const Configuration& x,
                                            RngStream& rng) {
        return impl->bracket(th, x, rng, draws);
      };
      break;
    }
    case BirthFamily::colocalization: {
      std::vector<char> is_anchor(static_cast<size_t>(opts.n_labels), 0);
      for (Label m : opts.anchor_labels) is_anchor.at(static_cast<size_t>(m)) = 1;
      std::vector<char> is_coloc(static_cast<size_t>(opts.n_labels),
                                 opts.colocalized_labels.empty() ? 1 : 0);
      for (Label m : opts.colocalized_labels) is_coloc.at(static_cast<size_t>(m)) = 1;
      if (opts.anchor_labels.empty())
        throw std::domain_error("colocalization birth kernel: anchor label set is empty");
      const int mix_idx = params.index_of(opts.mix_param);
      if (params[mix_idx] < 0.0 || params[mix_idx] > 1.0)
        throw std::domain_error("colocalization birth kernel: mixture weight outside [0,1]");
      auto impl = std::make_shared<ColocalizationBirth>(ColocalizationBirth{
          domain, opts.label_probs, 1.0 / domain.volume(), mix_idx,
          params.index_of(opts.log_sigma_param), std::move(is_anchor), std::move(is_coloc),
          std::make_shared<BoxQuadrature>(domain, opts.quadrature_points)});
      spec.param_names = {opts.mix_param, opts.log_sigma_param};
      spec.sample = [impl](const ParameterVector& th, const Configuration& x, double t,
                           RngStream& rng) { return impl->sample(th, x, t, rng); };
      spec.density = [impl](const ParameterVector& th, const Configuration& x,
                            const JumpEvent& ev) { return impl->density(th, x, ev); };
      spec.grad_density = [impl](const ParameterVector& th, const Configuration& x,
                                 const JumpEvent& ev) { return impl->grad(th, x, ev); };
      spec.bracket_integral = [impl, draws](const ParameterVector& th, const Configuration& x,
                                            RngStream& rng) {
        return impl->bracket(th, x, rng, draws);
      };
      break;
    }
    case BirthFamily::potential: {
      if (static_cast<int>(opts.weight_params.size()) != opts.n_labels)
        throw std::domain_error("potential birth kernel: weight matrix must be |M| x |M|");
      std::vector<std::vector<int>> idx(static_cast<size_t>(opts.n_labels));
      for (int m = 0; m < opts.n_labels; ++m) {
        const auto& row = opts.weight_params[static_cast<size_t>(m)];
        if (static_cast<int>(row.size()) != opts.n_labels)
          throw std::domain_error("potential birth kernel: weight matrix must be |M| x |M|");
        for (const auto& name : row)
          idx[static_cast<size_t>(m)].push_back(name.empty() ? -1 : params.index_of(name));
        for (const auto& name : row)
          if (!name.empty() &&
              std::find(spec.param_names.begin(), spec.param_names.end(), name) ==
                  spec.param_names.end())
            spec.param_names.push_back(name);
      }
      if (!(opts.bump_scale > 0.0) || !(opts.bump_height > 0.0))
        throw std::domain_error("potential birth kernel: bump height and scale must be positive");
      Mat fixed = opts.fixed_weights;
      if (fixed.rows() != opts.n_labels || fixed.cols() != opts.n_labels)
        fixed = Mat::Zero(opts.n_labels, opts.n_labels);
      auto impl = std::make_shared<PotentialBirth>(PotentialBirth{
          domain, opts.label_probs, opts.n_labels, std::move(idx), std::move(fixed),
          opts.bump_height, opts.bump_scale,
          std::make_shared<BoxQuadrature>(domain, opts.quadrature_points)});
      spec.sample = [impl](const ParameterVector& th, const Configuration& x, double t,
                           RngStream& rng) { return impl->sample(th, x, t, rng); };
      spec.density = [impl](const ParameterVector& th, const Configuration& x,
                            const JumpEvent& ev) { return impl->density(th, x, ev); };
      spec.grad_density = [impl](const ParameterVector& th, const Configuration& x,
                                 const JumpEvent& ev) { return impl->grad(th, x, ev); };
      spec.bracket_integral = [impl, draws](const ParameterVector& th, const Configuration& x,
                                            RngStream& rng) {
        return impl->bracket(th, x, rng, draws);
      };
      break;
    }
  }

  if (!spec.bracket_integral) {
    if (spec.param_names.empty()) {
      spec.bracket_integral = [](const ParameterVector& th, const Configuration&, RngStream&) {
        return Mat(Mat::Zero(th.size(), th.size()));
      };
    } else {
      auto src = std::make_shared<BracketSource>(
          BracketSource{spec.sample, spec.density, spec.grad_density});
      spec.bracket_integral = [src, draws](const ParameterVector& th, const Configuration& x,
                                           RngStream& rng) {
        return mc_bracket(*src, th, x, rng, draws);
      };
    }
  }
  return spec;
}

KernelSpec make_death_kernel(const ParameterVector&) {
  KernelSpec spec;
  spec.kind = JumpKind::death;
  spec.sample = [](const ParameterVector&, const Configuration& x, double t, RngStream& rng) {
    if (x.empty()) throw std::logic_error("death kernel: sampling from the empty configuration");
    const Particle& p = x[rng.uniform_int(x.size())];
    return JumpEvent::death(t, p.id, p.label);
  };
  spec.density = [](const ParameterVector&, const Configuration& x, const JumpEvent& ev) {
    if (x.empty()) throw std::domain_error("death kernel: density on the empty configuration");
    if (!x.contains_id(ev.particle_id)) return 0.0;
    return 1.0 / static_cast<double>(x.size());
  };
  spec.grad_density = [](const ParameterVector& th, const Configuration&, const JumpEvent&) {
    return Vec(Vec::Zero(th.size()));
  };
  spec.bracket_integral = [](const ParameterVector& th, const Configuration&, RngStream&) {
    return Mat(Mat::Zero(th.size(), th.size()));
  };
  return spec;
}

namespace {

// Row layout of a parameterized transition matrix: for row m the off-diagonal
// destinations in increasing label order are d_0 < ... < d_{K-1}; entries
// d_0..d_{K-2} are free parameters and d_{K-1} closes the row to sum 1.
struct MutationImpl {
  int n_labels;
  Mat fixed;                                // used when not parameterized
  bool parameterized;
  std::vector<std::vector<int>> free_idx;   // per row, theta indices of free entries
  std::vector<std::vector<Label>> dests;    // per row, off-diagonal labels in order

  double entry(const ParameterVector& th, Label from, Label to) const {
    if (from == to) return 0.0;
    if (!parameterized) return fixed(from, to);
    const auto& ds = dests[static_cast<size_t>(from)];
    const auto& fi = free_idx[static_cast<size_t>(from)];
    double rest = 1.0;
    for (size_t j = 0; j + 1 < ds.size(); ++j) {
      const double v = th[fi[j]];
      if (ds[j] == to) return v;
      rest -= v;
    }
    return ds.back() == to ? rest : 0.0;
  }

  // d entry(from, to) / d theta, as a sparse update into g.
  void add_entry_grad(const ParameterVector&, Label from, Label to, double scale, Vec& g) const {
    if (!parameterized || from == to) return;
    const auto& ds = dests[static_cast<size_t>(from)];
    const auto& fi = free_idx[static_cast<size_t>(from)];
    for (size_t j = 0; j + 1 < ds.size(); ++j) {
      if (ds[j] == to) g[fi[j]] += scale;
      if (ds.back() == to) g[fi[j]] -= scale;
    }
  }
};

}  // namespace

void register_mutation_params(const Mat& P, ParameterVector& params, const std::string& prefix) {
  const int n = static_cast<int>(P.rows());
  for (int m = 0; m < n; ++m) {
    std::vector<Label> ds;
    for (int j = 0; j < n; ++j)
      if (j != m) ds.push_back(j);
    for (size_t j = 0; j + 1 < ds.size(); ++j)
      params.add(prefix + "_" + std::to_string(m) + "_" + std::to_string(ds[j]), P(m, ds[j]),
                 0.0, 1.0);
  }
}

KernelSpec make_mutation_kernel(const MutationMatrixSpec& mspec, const ParameterVector& params) {
  const int n = static_cast<int>(mspec.initial.rows());
  if (n < 1 || mspec.initial.cols() != n)
    throw std::domain_error("mutation kernel: transition matrix must be square");
  for (int m = 0; m < n; ++m) {
    if (mspec.initial(m, m) != 0.0)
      throw std::domain_error("mutation kernel: transition matrix diagonal must be zero");
    double s = 0.0;
    for (int j = 0; j < n; ++j) {
      if (mspec.initial(m, j) < 0.0 || mspec.initial(m, j) > 1.0)
        throw std::domain_error("mutation kernel: transition probabilities must lie in [0,1]");
      s += mspec.initial(m, j);
    }
    if (n >= 2 && std::abs(s - 1.0) > 1e-9)
      throw std::domain_error("mutation kernel: transition matrix rows must sum to 1");
  }

  auto impl = std::make_shared<MutationImpl>();
  impl->n_labels = n;
  impl->fixed = mspec.initial;
  impl->parameterized = mspec.parameterized;
  impl->dests.resize(static_cast<size_t>(n));
  impl->free_idx.resize(static_cast<size_t>(n));

  KernelSpec spec;
  spec.kind = JumpKind::mutation;
  if (mspec.parameterized) {
    for (int m = 0; m < n; ++m) {
      auto& ds = impl->dests[static_cast<size_t>(m)];
      for (int j = 0; j < n; ++j)
        if (j != m) ds.push_back(j);
      for (size_t j = 0; j + 1 < ds.size(); ++j) {
        const std::string name =
            mspec.param_prefix + "_" + std::to_string(m) + "_" + std::to_string(ds[j]);
        impl->free_idx[static_cast<size_t>(m)].push_back(params.index_of(name));
        spec.param_names.push_back(name);
      }
    }
  } else {
    for (int m = 0; m < n; ++m)
      for (int j = 0; j < n; ++j)
        if (j != m) impl->dests[static_cast<size_t>(m)].push_back(j);
  }

  spec.sample = [impl](const ParameterVector& th, const Configuration& x, double t,
                       RngStream& rng) {
    if (x.empty()) throw std::logic_error("mutation kernel: sampling from the empty configuration");
    if (impl->n_labels < 2)
      throw std::logic_error("mutation kernel: no destination labels");
    const Particle& p = x[rng.uniform_int(x.size())];
    double u = rng.uniform();
    const auto& ds = impl->dests[static_cast<size_t>(p.label)];
    Label to = ds.back();
    for (Label d : ds) {
      u -= impl->entry(th, p.label, d);
      if (u < 0.0) {
        to = d;
        break;
      }
    }
    return JumpEvent::mutation(t, p.id, p.label, to);
  };
  spec.density = [impl](const ParameterVector& th, const Configuration& x, const JumpEvent& ev) {
    if (x.empty()) throw std::domain_error("mutation kernel: density on the empty configuration");
    const Particle* p = x.find(ev.particle_id);
    if (!p || p->label != *ev.mutation_from) return 0.0;
    const double q = impl->entry(th, *ev.mutation_from, *ev.mutation_to);
    return q > 0.0 ? q / static_cast<double>(x.size()) : 0.0;
  };
  spec.grad_density = [impl](const ParameterVector& th, const Configuration& x,
                             const JumpEvent& ev) {
    Vec g = Vec::Zero(th.size());
    const Particle* p = x.find(ev.particle_id);
    if (!p || p->label != *ev.mutation_from) return g;
    impl->add_entry_grad(th, *ev.mutation_from, *ev.mutation_to,
                         1.0 / static_cast<double>(x.size()), g);
    return g;
  };
  spec.bracket_integral = [impl](const ParameterVector& th, const Configuration& x, RngStream&) {
    // Exact finite sum over (particle, destination label) pairs.
    const int ell = th.size();
    Mat acc = Mat::Zero(ell, ell);
    if (!impl->parameterized) return acc;
    const double inv_n = 1.0 / std::max(1, x.size());
    for (const auto& p : x) {
      for (Label to = 0; to < impl->n_labels; ++to) {
        if (to == p.label) continue;
        const double k = impl->entry(th, p.label, to) * inv_n;
        if (k <= 0.0) continue;
        Vec g = Vec::Zero(ell);
        impl->add_entry_grad(th, p.label, to, inv_n, g);
        acc.noalias() += (g * g.transpose()) / k;
      }
    }
    return acc;
  };
  return spec;
}

}  // namespace bdmm
