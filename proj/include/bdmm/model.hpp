#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bdmm/intensity.hpp"
#include "bdmm/jump_kernels.hpp"
#include "bdmm/move.hpp"
#include "bdmm/params.hpp"
#include "bdmm/trajectory.hpp"

namespace bdmm {

/// Full parametric model: the three jump intensities, their transition
/// kernels, the inter-jump diffusion, and the shared parameter layout.
/// Construction enforces the structural guards: the birth intensity is
/// multiplied by 1{n < n_max}, and death/mutation vanish on the empty
/// configuration.
struct ModelSpec {
  std::vector<std::string> label_names;
  DomainBox domain;
  ParameterVector params;  // initial values

  IntensitySpec beta, delta, tau;
  KernelSpec birth, death, mutation;
  MoveSpec move;
  int n_max = 0;

  std::optional<Configuration> x0;  // optional built-in initial configuration
  std::string config_text;          // canonical document, when loaded from one

  int n_labels() const { return static_cast<int>(label_names.size()); }
  int dim() const { return domain.dim(); }

  double total_intensity(const ParameterVector& th, const Configuration& x) const;
  double total_bound(const ParameterVector& th, int n) const;
  bool intensities_location_independent() const;

  const IntensitySpec& intensity(JumpKind k) const;
  const KernelSpec& kernel(JumpKind k) const;

  /// Stable hash of the defining configuration document (0 when the model
  /// was built programmatically).
  std::uint64_t fingerprint() const;
};

/// Wires guards and sanity checks after the fields above are filled.
void finalize_model(ModelSpec& model);

ModelSpec load_model(const std::string& json_text);
ModelSpec load_model_file(const std::string& path);

std::uint64_t fnv1a64(const std::string& text);

}  // namespace bdmm
