#pragma once

#include <cstdint>
#include <string>

#include "bdmm/model.hpp"
#include "bdmm/trajectory.hpp"

namespace bdmm {

/// Log-likelihood of an observed trajectory, factorised into the four
/// independent pieces. `total` is their exact sum. Support violations
/// (an observed jump with zero density or intensity) yield -infinity in the
/// offending component, with the event named in `diagnostic`.
struct LogLikBreakdown {
  double birth = 0.0;
  double death = 0.0;
  double mutation = 0.0;
  double move = 0.0;
  double total = 0.0;
  std::string diagnostic;
};

struct InformationMatrix {
  Mat matrix;  // ell x ell, symmetric PSD; un-normalised integral over [0, T]
  double horizon = 0.0;
};

struct LikOptions {
  /// Grid stride for the time integral of the birth-kernel bracket (its
  /// inner Monte Carlo is the cost hotspot; the integrand varies on the
  /// inter-jump timescale).
  int birth_bracket_stride = 10;
  /// Seed for the bracket Monte Carlo (common random numbers across calls).
  std::uint64_t bracket_seed = 0x5851F42D4C957F2Dull;
};

/// One jump factor of the likelihood:
///   -int_0^T gamma ds  +  sum over gamma-events [log k_gamma + log gamma]
/// evaluated at the pre-jump state. Exact piecewise-constant time integral
/// for location-independent intensities, trapezoidal on the grid otherwise.
double loglik_jump_component(const Trajectory& traj, const IntensitySpec& intensity,
                             const KernelSpec& kernel, const ParameterVector& th,
                             std::string* diagnostic = nullptr);

/// Discretised Girsanov exponent of the inter-jump motion (Ito sums on the
/// stored grid, left-endpoint evaluation). The domain is needed only to wrap
/// displacements on periodic boxes; pass null otherwise.
double loglik_move(const Trajectory& traj, const MoveSpec& move, const ParameterVector& th,
                   const DomainBox* domain = nullptr, std::string* diagnostic = nullptr);

LogLikBreakdown loglik_total(const Trajectory& traj, const ModelSpec& model,
                             const ParameterVector& th);

/// Component selection mask for partial evaluation (the factorisation lets a
/// fit drop components whose parameters are fixed).
enum ComponentMask : int {
  kCompBirth = 1,
  kCompDeath = 2,
  kCompMutation = 4,
  kCompMove = 8,
  kCompAll = 15,
};

int components_depending_on(const ModelSpec& model, const std::vector<std::string>& names);

double loglik_selected(const Trajectory& traj, const ModelSpec& model, const ParameterVector& th,
                       int mask, std::string* diagnostic = nullptr);

/// Analytic gradient of loglik_total in theta.
Vec score(const Trajectory& traj, const ModelSpec& model, const ParameterVector& th);

/// Empirical information: the summed angle brackets of the score martingale
/// over [0, T] (intensity terms, kernel-bracket terms, move term).
InformationMatrix observed_information(const Trajectory& traj, const ModelSpec& model,
                                       const ParameterVector& th, const LikOptions& opts = {});

}  // namespace bdmm
