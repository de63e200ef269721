#include "bdmm/move.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "bdmm/errors.hpp"

namespace bdmm {

RegimeKind regime_kind_from_string(const std::string& s) {
  if (s == "brownian") return RegimeKind::brownian;
  if (s == "drifted") return RegimeKind::drifted;
  if (s == "ou") return RegimeKind::ou;
  throw ConfigError("unknown motion regime: " + s);
}

MoveSpec make_independent_move(const std::vector<RegimeSpec>& per_label, int dim,
                               const ParameterVector& params) {
  struct Regime {
    RegimeKind kind;
    double sigma;
    std::vector<int> v_idx;
    int kappa_idx = -1;
  };
  auto regimes = std::make_shared<std::vector<Regime>>();
  MoveSpec spec;
  bool all_brownian = true;
  for (const auto& r : per_label) {
    if (!(r.sigma > 0.0)) throw std::domain_error("move: sigma must be positive");
    Regime reg{r.kind, r.sigma, {}, -1};
    if (r.kind == RegimeKind::drifted) {
      if (static_cast<int>(r.velocity_params.size()) != dim)
        throw ConfigError("drifted regime needs one velocity parameter per axis");
      for (const auto& name : r.velocity_params) {
        reg.v_idx.push_back(params.index_of(name));
        spec.param_names.push_back(name);
      }
      all_brownian = false;
    } else if (r.kind == RegimeKind::ou) {
      reg.kappa_idx = params.index_of(r.kappa_param);
      if (params[reg.kappa_idx] <= 0.0)
        throw std::domain_error("move: mean-reversion rate must be positive");
      spec.param_names.push_back(r.kappa_param);
      all_brownian = false;
    }
    regimes->push_back(std::move(reg));
  }
  spec.zero_drift = all_brownian;

  spec.drift = [regimes, dim](const ParameterVector& th, const std::vector<Particle>& ps) {
    Vec v = Vec::Zero(static_cast<int>(ps.size()) * dim);
    for (size_t i = 0; i < ps.size(); ++i) {
      const auto& reg = regimes->at(static_cast<size_t>(ps[i].label));
      auto block = v.segment(static_cast<int>(i) * dim, dim);
      switch (reg.kind) {
        case RegimeKind::brownian:
          break;
        case RegimeKind::drifted:
          for (int k = 0; k < dim; ++k) block[k] = th[reg.v_idx[static_cast<size_t>(k)]];
          break;
        case RegimeKind::ou:
          block = -th[reg.kappa_idx] * (ps[i].location - ps[i].anchor);
          break;
      }
    }
    return v;
  };
  spec.drift_grad = [regimes, dim](const ParameterVector& th, const std::vector<Particle>& ps) {
    Mat g = Mat::Zero(static_cast<int>(ps.size()) * dim, th.size());
    for (size_t i = 0; i < ps.size(); ++i) {
      const auto& reg = regimes->at(static_cast<size_t>(ps[i].label));
      const int row = static_cast<int>(i) * dim;
      switch (reg.kind) {
        case RegimeKind::brownian:
          break;
        case RegimeKind::drifted:
          for (int k = 0; k < dim; ++k) g(row + k, reg.v_idx[static_cast<size_t>(k)]) = 1.0;
          break;
        case RegimeKind::ou:
          g.block(row, reg.kappa_idx, dim, 1) = -(ps[i].location - ps[i].anchor);
          break;
      }
    }
    return g;
  };
  spec.diffusion = [regimes, dim](const std::vector<Particle>& ps) {
    std::vector<Mat> blocks;
    blocks.reserve(ps.size());
    for (const auto& p : ps)
      blocks.push_back(regimes->at(static_cast<size_t>(p.label)).sigma *
                       Mat::Identity(dim, dim));
    return blocks;
  };
  spec.isotropic_sigma = [regimes](const Particle& p) {
    return regimes->at(static_cast<size_t>(p.label)).sigma;
  };
  return spec;
}

MoveSpec make_langevin_move(const LangevinOptions& opts, int dim, const ParameterVector& params) {
  const int n_labels = static_cast<int>(opts.sigma_per_label.size());
  for (double s : opts.sigma_per_label)
    if (!(s > 0.0)) throw std::domain_error("move: sigma must be positive");
  if (static_cast<int>(opts.weight_params.size()) != n_labels)
    throw ConfigError("langevin move: weight matrix must be |M| x |M|");
  if (!(opts.bump_scale > 0.0)) throw std::domain_error("langevin move: bump scale must be positive");

  struct Impl {
    std::vector<double> sigma;
    std::vector<std::vector<int>> w_idx;
    double height, scale;

    // grad Phi(r) = -(height / scale^2) exp(-|r|^2/(2 scale^2)) r
    Vec grad_phi(const Vec& r) const {
      const double inv_s2 = 1.0 / (scale * scale);
      return -(height * inv_s2) * std::exp(-0.5 * r.squaredNorm() * inv_s2) * r;
    }
  };
  auto impl = std::make_shared<Impl>();
  impl->sigma = opts.sigma_per_label;
  impl->height = opts.bump_height;
  impl->scale = opts.bump_scale;

  MoveSpec spec;
  for (int m = 0; m < n_labels; ++m) {
    const auto& row = opts.weight_params[static_cast<size_t>(m)];
    if (static_cast<int>(row.size()) != n_labels)
      throw ConfigError("langevin move: weight matrix must be |M| x |M|");
    std::vector<int> idx;
    for (const auto& name : row) {
      idx.push_back(params.index_of(name));
      if (std::find(spec.param_names.begin(), spec.param_names.end(), name) ==
          spec.param_names.end())
        spec.param_names.push_back(name);
    }
    impl->w_idx.push_back(std::move(idx));
  }

  // Pair sums run over neighbours in id order, so a permuted particle list
  // accumulates the identical floating-point sums (exact equivariance).
  auto id_order = [](const std::vector<Particle>& ps) {
    std::vector<size_t> order(ps.size());
    for (size_t i = 0; i < ps.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&ps](size_t a, size_t b) { return ps[a].id < ps[b].id; });
    return order;
  };

  spec.drift = [impl, dim, id_order](const ParameterVector& th, const std::vector<Particle>& ps) {
    Vec v = Vec::Zero(static_cast<int>(ps.size()) * dim);
    const auto order = id_order(ps);
    for (size_t i = 0; i < ps.size(); ++i) {
      auto block = v.segment(static_cast<int>(i) * dim, dim);
      for (size_t j : order) {
        if (j == i) continue;
        const int widx = impl->w_idx[static_cast<size_t>(ps[i].label)]
                                    [static_cast<size_t>(ps[j].label)];
        block -= th[widx] * impl->grad_phi(ps[i].location - ps[j].location);
      }
    }
    return v;
  };
  spec.drift_grad = [impl, dim, id_order](const ParameterVector& th,
                                          const std::vector<Particle>& ps) {
    Mat g = Mat::Zero(static_cast<int>(ps.size()) * dim, th.size());
    const auto order = id_order(ps);
    for (size_t i = 0; i < ps.size(); ++i) {
      const int row = static_cast<int>(i) * dim;
      for (size_t j : order) {
        if (j == i) continue;
        const int widx = impl->w_idx[static_cast<size_t>(ps[i].label)]
                                    [static_cast<size_t>(ps[j].label)];
        g.block(row, widx, dim, 1) -= impl->grad_phi(ps[i].location - ps[j].location);
      }
    }
    return g;
  };
  spec.diffusion = [impl, dim](const std::vector<Particle>& ps) {
    std::vector<Mat> blocks;
    blocks.reserve(ps.size());
    for (const auto& p : ps)
      blocks.push_back(impl->sigma[static_cast<size_t>(p.label)] * Mat::Identity(dim, dim));
    return blocks;
  };
  spec.isotropic_sigma = [impl](const Particle& p) {
    return impl->sigma[static_cast<size_t>(p.label)];
  };
  return spec;
}

}  // namespace bdmm
