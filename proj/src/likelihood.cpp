#include "bdmm/likelihood.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "bdmm/errors.hpp"
#include "bdmm/rng.hpp"
#include "bdmm/simd/kernels.hpp"
#include "bdmm/walker.hpp"

namespace bdmm {
namespace {

const double kNegInf = -std::numeric_limits<double>::infinity();

std::string describe_event(int index, const JumpEvent& ev) {
  std::ostringstream os;
  os << to_string(ev.kind) << " event " << index << " at t=" << ev.time << " (particle "
     << ev.particle_id << ")";
  return os.str();
}

// Displacement over one step, minimal-image wrapped for periodic domains.
void step_displacement(const Mat& pos, int row, const DomainBox& box, int n, int dim, Vec& dz) {
  dz = (pos.row(row + 1) - pos.row(row)).transpose();
  if (box.boundary == Boundary::periodic) {
    for (int i = 0; i < n * dim; ++i) {
      const int k = i % dim;
      const double len = box.upper[k] - box.lower[k];
      dz[i] -= len * std::round(dz[i] / len);
    }
  }
}

// Per-coordinate inverse variance weights (isotropic diffusion fast path).
std::vector<double> inv_a_flat(const MoveSpec& move, const std::vector<Particle>& parts, int dim) {
  std::vector<double> inv(static_cast<size_t>(parts.size()) * static_cast<size_t>(dim));
  for (size_t i = 0; i < parts.size(); ++i) {
    const double s = move.isotropic_sigma(parts[i]);
    const double w = 1.0 / (s * s);
    for (int k = 0; k < dim; ++k) inv[i * static_cast<size_t>(dim) + static_cast<size_t>(k)] = w;
  }
  return inv;
}

// Event loop shared by the jump log-likelihood and the score: calls
// on_event(index, pre_config, event) for the matching kind and accumulates
// the compensator integral via on_compensator(segment).
template <class FEvent, class FComp>
void walk_jump_terms(const TrajectoryWalker& walker, JumpKind kind, FComp&& on_segment,
                     FEvent&& on_event) {
  int event_index = 0;
  for (int k = 0; k < walker.n_segments(); ++k) {
    const WalkSegment seg = walker.segment(k);
    on_segment(seg);
    if (seg.event) {
      if (seg.event->kind == kind) {
        if (!on_event(event_index, seg.pre_event_config(), *seg.event)) return;
      }
      ++event_index;
    }
  }
}

}  // namespace

double loglik_jump_component(const Trajectory& traj, const IntensitySpec& intensity,
                             const KernelSpec& kernel, const ParameterVector& th,
                             std::string* diagnostic) {
  TrajectoryWalker walker(traj);
  double compensator = 0.0;
  double jumps = 0.0;
  bool support_violation = false;

  walk_jump_terms(
      walker, kernel.kind,
      [&](const WalkSegment& seg) {
        if (intensity.location_independent) {
          compensator += intensity.eval(th, seg.config_at_t0()) * (seg.t1 - seg.t0);
        } else {
          double prev = intensity.eval(th, seg.config_at_time(seg.times.front()));
          for (size_t r = 0; r + 1 < seg.times.size(); ++r) {
            const double next = intensity.eval(th, seg.config_at_time(seg.times[r + 1]));
            compensator += 0.5 * (prev + next) * (seg.times[r + 1] - seg.times[r]);
            prev = next;
          }
        }
      },
      [&](int index, const Configuration& pre, const JumpEvent& ev) {
        const double g = intensity.eval(th, pre);
        const double k = kernel.density(th, pre, ev);
        if (g <= 0.0 || k <= 0.0) {
          if (diagnostic)
            *diagnostic = std::string(g <= 0.0 ? "zero intensity at " : "zero kernel density at ") +
                          describe_event(index, ev);
          support_violation = true;
          return false;
        }
        jumps += std::log(k) + std::log(g);
        return true;
      });

  if (support_violation) return kNegInf;
  return -compensator + jumps;
}

double loglik_move(const Trajectory& traj, const MoveSpec& move, const ParameterVector& th,
                   const DomainBox* domain, std::string* diagnostic) {
  if (move.zero_drift) return 0.0;
  TrajectoryWalker walker(traj);
  const DomainBox free_box;
  const DomainBox& box = domain ? *domain : free_box;
  double total = 0.0;

  for (int k = 0; k < walker.n_segments(); ++k) {
    const WalkSegment seg = walker.segment(k);
    const int n = seg.n();
    if (n == 0) continue;
    const int dim = seg.dim;
    const Mat& pos = seg.positions();
    std::vector<Particle> parts = seg.parts;
    Vec dz(n * dim);

    if (move.isotropic_sigma) {
      const std::vector<double> inv_a = inv_a_flat(move, parts, dim);
      for (size_t r = 0; r + 1 < seg.times.size(); ++r) {
        for (int i = 0; i < n; ++i)
          parts[static_cast<size_t>(i)].location = pos.row(static_cast<int>(r)).segment(i * dim, dim).transpose();
        const Vec v = move.drift(th, parts);
        const double h = seg.times[r + 1] - seg.times[r];
        step_displacement(pos, static_cast<int>(r), box, n, dim, dz);
        total += simd::ops().weighted_dot(v.data(), dz.data(), inv_a.data(),
                                          static_cast<std::size_t>(n * dim));
        total -= 0.5 * h *
                 simd::ops().weighted_dot(v.data(), v.data(), inv_a.data(),
                                          static_cast<std::size_t>(n * dim));
      }
    } else {
      for (size_t r = 0; r + 1 < seg.times.size(); ++r) {
        for (int i = 0; i < n; ++i)
          parts[static_cast<size_t>(i)].location = pos.row(static_cast<int>(r)).segment(i * dim, dim).transpose();
        const Vec v = move.drift(th, parts);
        const double h = seg.times[r + 1] - seg.times[r];
        step_displacement(pos, static_cast<int>(r), box, n, dim, dz);
        const auto blocks = move.diffusion(parts);
        for (int i = 0; i < n; ++i) {
          const Mat a = blocks[static_cast<size_t>(i)] * blocks[static_cast<size_t>(i)].transpose();
          Eigen::LLT<Mat> llt(a);
          if (llt.info() != Eigen::Success) {
            if (diagnostic) {
              std::ostringstream os;
              os << "singular diffusion block at t=" << seg.times[r];
              *diagnostic = os.str();
            }
            throw NumericError("move likelihood: singular diffusion block");
          }
          const Vec vi = v.segment(i * dim, dim);
          const Vec ai_dz = llt.solve(dz.segment(i * dim, dim));
          const Vec ai_v = llt.solve(vi);
          total += vi.dot(ai_dz) - 0.5 * h * vi.dot(ai_v);
        }
      }
    }
  }
  (void)diagnostic;
  return total;
}

int components_depending_on(const ModelSpec& model, const std::vector<std::string>& names) {
  auto hits = [&](const std::vector<std::string>& owned) {
    for (const auto& n : names)
      if (std::find(owned.begin(), owned.end(), n) != owned.end()) return true;
    return false;
  };
  int mask = 0;
  if (hits(model.beta.param_names) || hits(model.birth.param_names)) mask |= kCompBirth;
  if (hits(model.delta.param_names) || hits(model.death.param_names)) mask |= kCompDeath;
  if (hits(model.tau.param_names) || hits(model.mutation.param_names)) mask |= kCompMutation;
  if (hits(model.move.param_names)) mask |= kCompMove;
  return mask;
}

double loglik_selected(const Trajectory& traj, const ModelSpec& model, const ParameterVector& th,
                       int mask, std::string* diagnostic) {
  double total = 0.0;
  if (mask & kCompBirth)
    total += loglik_jump_component(traj, model.beta, model.birth, th, diagnostic);
  if ((mask & kCompDeath) && std::isfinite(total))
    total += loglik_jump_component(traj, model.delta, model.death, th, diagnostic);
  if ((mask & kCompMutation) && std::isfinite(total))
    total += loglik_jump_component(traj, model.tau, model.mutation, th, diagnostic);
  if ((mask & kCompMove) && std::isfinite(total))
    total += loglik_move(traj, model.move, th, &model.domain, diagnostic);
  return total;
}

LogLikBreakdown loglik_total(const Trajectory& traj, const ModelSpec& model,
                             const ParameterVector& th) {
  LogLikBreakdown out;
  std::string diag;
  out.birth = loglik_jump_component(traj, model.beta, model.birth, th, &diag);
  if (!diag.empty()) out.diagnostic = diag;
  diag.clear();
  out.death = loglik_jump_component(traj, model.delta, model.death, th, &diag);
  if (!diag.empty() && out.diagnostic.empty()) out.diagnostic = diag;
  diag.clear();
  out.mutation = loglik_jump_component(traj, model.tau, model.mutation, th, &diag);
  if (!diag.empty() && out.diagnostic.empty()) out.diagnostic = diag;
  diag.clear();
  out.move = loglik_move(traj, model.move, th, &model.domain, &diag);
  if (!diag.empty() && out.diagnostic.empty()) out.diagnostic = diag;
  out.total = out.birth + out.death + out.mutation + out.move;
  return out;
}

Vec score(const Trajectory& traj, const ModelSpec& model, const ParameterVector& th) {
  const int ell = th.size();
  Vec s = Vec::Zero(ell);
  TrajectoryWalker walker(traj);

  // Intensity and kernel terms per jump type.
  for (JumpKind kind : {JumpKind::birth, JumpKind::death, JumpKind::mutation}) {
    const IntensitySpec& intensity = model.intensity(kind);
    const KernelSpec& kernel = model.kernel(kind);
    walk_jump_terms(
        walker, kind,
        [&](const WalkSegment& seg) {
          if (intensity.location_independent) {
            s -= intensity.grad(th, seg.config_at_t0()) * (seg.t1 - seg.t0);
          } else {
            Vec prev = intensity.grad(th, seg.config_at_time(seg.times.front()));
            for (size_t r = 0; r + 1 < seg.times.size(); ++r) {
              const Vec next = intensity.grad(th, seg.config_at_time(seg.times[r + 1]));
              s -= 0.5 * (prev + next) * (seg.times[r + 1] - seg.times[r]);
              prev = next;
            }
          }
        },
        [&](int index, const Configuration& pre, const JumpEvent& ev) {
          const double g = intensity.eval(th, pre);
          const double k = kernel.density(th, pre, ev);
          if (g <= 0.0 || k <= 0.0)
            throw NumericError("score: support violation at " + describe_event(index, ev));
          s += intensity.grad(th, pre) / g;
          s += kernel.grad_density(th, pre, ev) / k;
          return true;
        });
  }

  // Move term: sum over steps of (grad v)^T a^{-1} (dZ - v dt).
  if (!model.move.param_names.empty()) {
    for (int k = 0; k < walker.n_segments(); ++k) {
      const WalkSegment seg = walker.segment(k);
      const int n = seg.n();
      if (n == 0) continue;
      const int dim = seg.dim;
      const Mat& pos = seg.positions();
      std::vector<Particle> parts = seg.parts;
      Vec dz(n * dim);
      for (size_t r = 0; r + 1 < seg.times.size(); ++r) {
        for (int i = 0; i < n; ++i)
          parts[static_cast<size_t>(i)].location = pos.row(static_cast<int>(r)).segment(i * dim, dim).transpose();
        const double h = seg.times[r + 1] - seg.times[r];
        const Vec v = model.move.drift(th, parts);
        const Mat g = model.move.drift_grad(th, parts);
        step_displacement(pos, static_cast<int>(r), model.domain, n, dim, dz);
        Vec resid = dz - v * h;
        if (model.move.isotropic_sigma) {
          const std::vector<double> inv_a = inv_a_flat(model.move, parts, dim);
          for (int i = 0; i < n * dim; ++i) resid[i] *= inv_a[static_cast<size_t>(i)];
        } else {
          const auto blocks = model.move.diffusion(parts);
          for (int i = 0; i < n; ++i) {
            const Mat a = blocks[static_cast<size_t>(i)] * blocks[static_cast<size_t>(i)].transpose();
            resid.segment(i * dim, dim) = a.llt().solve(resid.segment(i * dim, dim)).eval();
          }
        }
        s.noalias() += g.transpose() * resid;
      }
    }
  }
  return s;
}

InformationMatrix observed_information(const Trajectory& traj, const ModelSpec& model,
                                       const ParameterVector& th, const LikOptions& opts) {
  const int ell = th.size();
  Mat info = Mat::Zero(ell, ell);
  TrajectoryWalker walker(traj);
  RngStream bracket_rng(opts.bracket_seed, model.fingerprint());
  std::uint64_t bracket_counter = 0;

  for (int k = 0; k < walker.n_segments(); ++k) {
    const WalkSegment seg = walker.segment(k);
    const double len = seg.t1 - seg.t0;

    // Intensity brackets: grad grad^T / gamma. Exact for cardinality-only
    // intensities (constant on the segment), trapezoid otherwise.
    for (JumpKind kind : {JumpKind::birth, JumpKind::death, JumpKind::mutation}) {
      const IntensitySpec& intensity = model.intensity(kind);
      if (intensity.param_names.empty()) continue;
      if (intensity.location_independent) {
        const Configuration x = seg.config_at_t0();
        const double g = intensity.eval(th, x);
        if (g > 0.0) {
          const Vec gr = intensity.grad(th, x);
          info.noalias() += (gr * gr.transpose()) * (len / g);
        }
      } else {
        auto term = [&](double t) -> Mat {
          const Configuration x = seg.config_at_time(t);
          const double g = intensity.eval(th, x);
          if (g <= 0.0) return Mat::Zero(ell, ell);
          const Vec gr = intensity.grad(th, x);
          return (gr * gr.transpose()) / g;
        };
        Mat prev = term(seg.times.front());
        for (size_t r = 0; r + 1 < seg.times.size(); ++r) {
          Mat next = term(seg.times[r + 1]);
          info.noalias() += 0.5 * (prev + next) * (seg.times[r + 1] - seg.times[r]);
          prev = std::move(next);
        }
      }
    }

    // Mutation kernel bracket: exact finite sum, constant over the segment.
    if (!model.mutation.param_names.empty() && seg.n() > 0) {
      const Configuration x = seg.config_at_t0();
      const double g = model.tau.eval(th, x);
      if (g > 0.0) {
        RngStream sub = bracket_rng.substream(bracket_counter++);
        info.noalias() += model.mutation.bracket_integral(th, x, sub) * (g * len);
      }
    }

    // Birth kernel bracket: Monte-Carlo integrand, strided time grid.
    if (!model.birth.param_names.empty()) {
      const int stride = std::max(1, opts.birth_bracket_stride);
      std::vector<size_t> rows;
      for (size_t r = 0; r < seg.times.size(); r += static_cast<size_t>(stride)) rows.push_back(r);
      if (rows.back() != seg.times.size() - 1) rows.push_back(seg.times.size() - 1);
      auto term = [&](double t) -> Mat {
        const Configuration x = seg.config_at_time(t);
        const double g = model.beta.eval(th, x);
        if (g <= 0.0) return Mat::Zero(ell, ell);
        RngStream sub = bracket_rng.substream(bracket_counter++);
        return model.birth.bracket_integral(th, x, sub) * g;
      };
      if (rows.size() == 1) {
        info.noalias() += term(seg.times[rows[0]]) * len;
      } else {
        Mat prev = term(seg.times[rows[0]]);
        for (size_t j = 0; j + 1 < rows.size(); ++j) {
          Mat next = term(seg.times[rows[j + 1]]);
          info.noalias() += 0.5 * (prev + next) * (seg.times[rows[j + 1]] - seg.times[rows[j]]);
          prev = std::move(next);
        }
      }
    }

    // Move bracket: (grad v)^T a^{-1} (grad v) dt at left endpoints.
    if (!model.move.param_names.empty() && seg.n() > 0) {
      const int n = seg.n();
      const int dim = seg.dim;
      const Mat& pos = seg.positions();
      std::vector<Particle> parts = seg.parts;
      for (size_t r = 0; r + 1 < seg.times.size(); ++r) {
        for (int i = 0; i < n; ++i)
          parts[static_cast<size_t>(i)].location = pos.row(static_cast<int>(r)).segment(i * dim, dim).transpose();
        const double h = seg.times[r + 1] - seg.times[r];
        Mat g = model.move.drift_grad(th, parts);
        if (model.move.isotropic_sigma) {
          const std::vector<double> inv_a = inv_a_flat(model.move, parts, dim);
          Mat weighted = g;
          for (int i = 0; i < n * dim; ++i) weighted.row(i) *= inv_a[static_cast<size_t>(i)];
          info.noalias() += g.transpose() * weighted * h;
        } else {
          const auto blocks = model.move.diffusion(parts);
          Mat weighted = g;
          for (int i = 0; i < n; ++i) {
            const Mat a = blocks[static_cast<size_t>(i)] * blocks[static_cast<size_t>(i)].transpose();
            weighted.middleRows(i * dim, dim) = a.llt().solve(g.middleRows(i * dim, dim)).eval();
          }
          info.noalias() += g.transpose() * weighted * h;
        }
      }
    }
  }

  InformationMatrix out;
  out.matrix = 0.5 * (info + info.transpose());
  out.horizon = traj.horizon;
  return out;
}

}  // namespace bdmm
