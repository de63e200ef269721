#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

namespace bdmm {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Discrete mark of a particle; an index into the model's label alphabet.
using Label = int;

enum class Boundary { reflective, periodic, free };

Boundary boundary_from_string(const std::string& s);
const char* to_string(Boundary b);

/// Axis-aligned spatial domain. With a `free` boundary the bounds are
/// advisory only (used for quadrature ranges and uniform sampling).
struct DomainBox {
  Vec lower;
  Vec upper;
  Boundary boundary = Boundary::reflective;

  int dim() const { return static_cast<int>(lower.size()); }
  double volume() const;
  bool contains(const Vec& z, double tol = 0.0) const;

  /// Folds/wraps a point back into the box according to the boundary policy.
  Vec apply_boundary(const Vec& z) const;

  void validate() const;
};

struct Particle {
  int id = -1;
  Vec location;
  Label label = 0;
  /// Birth location (initial location for time-0 particles). Drives
  /// mean-reverting drifts; equals `location` at birth.
  Vec anchor;

  Particle() = default;
  Particle(int id_, Vec loc, Label m) : id(id_), location(loc), label(m), anchor(std::move(loc)) {}
  Particle(int id_, Vec loc, Label m, Vec anc)
      : id(id_), location(std::move(loc)), label(m), anchor(std::move(anc)) {}
};

/// Finite unordered set of particles. Canonical storage is sorted by id,
/// which fixes the ordering used for stacked-vector representations.
class Configuration {
 public:
  Configuration() = default;
  explicit Configuration(std::vector<Particle> ps);

  int size() const { return static_cast<int>(particles_.size()); }
  bool empty() const { return particles_.empty(); }
  const std::vector<Particle>& particles() const { return particles_; }
  const Particle& operator[](int i) const { return particles_[static_cast<size_t>(i)]; }

  const Particle* find(int id) const;
  bool contains_id(int id) const { return find(id) != nullptr; }

  Configuration with_birth(Particle p) const;
  Configuration with_death(int id) const;
  Configuration with_mutation(int id, Label to) const;

  int count_label(Label m) const;

  auto begin() const { return particles_.begin(); }
  auto end() const { return particles_.end(); }

 private:
  std::vector<Particle> particles_;
};

enum class JumpKind { birth, death, mutation };

const char* to_string(JumpKind k);
JumpKind jump_kind_from_string(const std::string& s);

struct JumpEvent {
  double time = 0.0;
  JumpKind kind = JumpKind::birth;
  int particle_id = -1;
  std::optional<Vec> birth_location;
  std::optional<Label> birth_label;
  std::optional<Label> death_label;
  std::optional<Label> mutation_from;
  std::optional<Label> mutation_to;

  static JumpEvent birth(double t, int id, Vec loc, Label m);
  static JumpEvent death(double t, int id, Label m);
  static JumpEvent mutation(double t, int id, Label from, Label to);

  /// Throws ValidationError unless exactly the fields matching `kind` are set.
  void validate() const;
};

}  // namespace bdmm
