#pragma once

#include <functional>
#include <string>
#include <vector>

#include "bdmm/params.hpp"
#include "bdmm/rng.hpp"
#include "bdmm/types.hpp"

namespace bdmm {

/// Transition kernel of one jump type: how to draw the post-jump state, the
/// density of an observed jump against the kernel's reference measure, its
/// parameter gradient, and the integrated score outer product
///   integral of (grad k)(grad k)^T / k over the reference measure,
/// which feeds the information matrix.
struct KernelSpec {
  JumpKind kind = JumpKind::birth;
  /// Draws a jump from configuration x at time t. Birth events are returned
  /// with particle_id = -1; the caller assigns ids.
  std::function<JumpEvent(const ParameterVector&, const Configuration&, double, RngStream&)>
      sample;
  std::function<double(const ParameterVector&, const Configuration&, const JumpEvent&)> density;
  std::function<Vec(const ParameterVector&, const Configuration&, const JumpEvent&)>
      grad_density;
  std::function<Mat(const ParameterVector&, const Configuration&, RngStream&)> bracket_integral;
  std::vector<std::string> param_names;
};

enum class BirthFamily { uniform, gaussian_mixture, colocalization, potential };

BirthFamily birth_family_from_string(const std::string& s);

struct BirthKernelOptions {
  int n_labels = 1;
  /// Probability that a newborn carries each label; must sum to 1.
  std::vector<double> label_probs;
  int quadrature_points = 64;  // per axis, for kernel normalisers
  int bracket_draws = 4096;    // Monte-Carlo draws for bracket_integral

  // gaussian_mixture / colocalization
  std::string log_sigma_param;

  // colocalization
  std::string mix_param;                  // weight of the anchored mixture
  std::vector<Label> anchor_labels;       // labels acting as attachment points
  std::vector<Label> colocalized_labels;  // labels born near anchors (empty: all)

  // potential
  /// Per (born label, neighbour label) interaction weight: a parameter name,
  /// or "" to use the fixed value below.
  std::vector<std::vector<std::string>> weight_params;
  Mat fixed_weights;
  double bump_height = 1.0;  // pair potential w * exp(-|r|^2 / (2 s^2))
  double bump_scale = 1.0;
};

KernelSpec make_birth_kernel(BirthFamily family, const BirthKernelOptions& opts,
                             const DomainBox& domain, const ParameterVector& params);

/// Uniform death: each particle dies with probability 1/n(x).
KernelSpec make_death_kernel(const ParameterVector& params);

struct MutationMatrixSpec {
  Mat initial;                 // row-stochastic with zero diagonal
  bool parameterized = false;  // read free entries from the parameter vector
  std::string param_prefix = "q";
};

/// Uniform particle choice, then a label drawn from the particle's row of
/// the transition matrix. When parameterized, row m reads its off-diagonal
/// entries except the last from parameters "<prefix>_<m>_<m'>"; the last is
/// one minus the rest.
KernelSpec make_mutation_kernel(const MutationMatrixSpec& spec, const ParameterVector& params);

/// Adds the free entries of a parameterized mutation matrix to `params`
/// (initial values taken from P).
void register_mutation_params(const Mat& P, ParameterVector& params,
                              const std::string& prefix = "q");

}  // namespace bdmm
