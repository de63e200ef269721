#pragma once

#include <functional>
#include <string>
#include <vector>

#include "bdmm/params.hpp"
#include "bdmm/types.hpp"

namespace bdmm {

/// Inter-jump diffusion of the ordered particle list: stacked drift vector
/// (length n*d), its parameter Jacobian, and per-particle diffusion blocks.
/// The diffusion is parameter-free (known), and both maps are permutation
/// equivariant: permuting the particle list permutes the blocks identically.
struct MoveSpec {
  std::function<Vec(const ParameterVector&, const std::vector<Particle>&)> drift;
  std::function<Mat(const ParameterVector&, const std::vector<Particle>&)> drift_grad;
  std::function<std::vector<Mat>(const std::vector<Particle>&)> diffusion;  // d x d blocks
  std::vector<std::string> param_names;
  /// Set when every diffusion block is sigma * I with sigma a function of the
  /// particle alone; enables flat-array code paths.
  std::function<double(const Particle&)> isotropic_sigma;
  bool zero_drift = false;
};

enum class RegimeKind { brownian, drifted, ou };

RegimeKind regime_kind_from_string(const std::string& s);

/// Per-label motion regime. `sigma` is the known diffusion scale. Drifted
/// regimes read their velocity components from the named parameters; the
/// mean-reverting regime reads its rate from `kappa_param` and pulls toward
/// the particle's birth location.
struct RegimeSpec {
  RegimeKind kind = RegimeKind::brownian;
  double sigma = 1.0;
  std::vector<std::string> velocity_params;  // size d (drifted)
  std::string kappa_param;                   // ou
};

MoveSpec make_independent_move(const std::vector<RegimeSpec>& per_label, int dim,
                               const ParameterVector& params);

/// Pairwise-interaction drift: block i is
///   - sum_{j != i} w(m_i, m_j) * grad Phi(z_i - z_j),
/// with Phi(r) = bump_height * exp(-|r|^2 / (2 bump_scale^2)).
struct LangevinOptions {
  std::vector<double> sigma_per_label;
  std::vector<std::vector<std::string>> weight_params;  // |M| x |M| parameter names
  double bump_height = 1.0;
  double bump_scale = 1.0;
};

MoveSpec make_langevin_move(const LangevinOptions& opts, int dim, const ParameterVector& params);

}  // namespace bdmm
