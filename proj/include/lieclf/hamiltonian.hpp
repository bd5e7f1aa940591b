#pragma once

// Control systems y' = f0(y) + sum_i a_i f_i(y) and their degree-h
// Hamiltonians: minima over the admissible direction family of the
// (worst-case) pairing with a covector.

#include <optional>
#include <span>
#include <vector>

#include "lieclf/field.hpp"
#include "lieclf/lie.hpp"

namespace lieclf {

enum class Smoothness { Smooth, Lipschitz };

struct SystemDef {
  int dim = 0;
  /// Generators f_1..f_m as written (Lipschitz generators may use abs/min/max).
  std::vector<VectorFieldDef> generators;
  /// Lipschitz only: explicit piece decompositions, one per generator. When
  /// empty they are derived with PiecewiseVectorFieldDef::decompose_kinks.
  std::vector<PiecewiseVectorFieldDef> pieces;
  std::optional<VectorFieldDef> drift;
  int k = 1;
  Smoothness smoothness = Smoothness::Smooth;
  /// f0(x) counts as zero when |f0(x)| <= eps_drift.
  double eps_drift = 1e-9;
};

enum class DirectionKind {
  Generator,     // +-f_i, driftless
  DriftCombo,    // f0, f0 + f_i, f0 - f_i
  Bracket,       // smooth iterated bracket, both orientations
  SetBracket,    // set-valued pair bracket, both orientations
  DriftBracket,  // [f0,f_i] or [f_j,f_l], only where f0 vanishes
};

struct Direction {
  DirectionKind kind;
  /// Leaf (generator, sign) for Generator/DriftCombo (generator 0 means f0
  /// alone), otherwise the bracket in its enumerated orientation.
  FormalBracket bracket;
  int degree;
  /// Segment count of the realizing control word.
  long r;
  bool symmetric;
  bool needs_still_drift;
};

class System {
 public:
  explicit System(SystemDef def);

  const SystemDef& def() const noexcept { return def_; }
  int dim() const noexcept { return def_.dim; }
  int m() const noexcept { return static_cast<int>(def_.generators.size()); }
  int k() const noexcept { return def_.k; }
  bool has_drift() const noexcept { return def_.drift.has_value(); }
  bool lipschitz() const noexcept { return def_.smoothness == Smoothness::Lipschitz; }

  std::span<const Direction> directions() const noexcept { return directions_; }
  /// True when the drift vanishes at x (within eps_drift); always true
  /// without drift.
  bool drift_still(const Vec& x) const;
  /// Whether direction `d` belongs to the admissible family at x.
  bool available(std::size_t d, const Vec& x, bool still) const;
  BracketValueSet values(std::size_t d, const Vec& x) const;

  /// f_g(x) for g >= 1 (owning piece for Lipschitz generators), f0(x) for g == 0.
  Vec generator_value(int g, const Vec& x) const;
  /// Velocity under constant control sign * e_g (g == 0: control 0), drift included.
  Vec velocity(int g, int sign, const Vec& x) const;

  /// Smooth direction fields stacked in one tape: for a drift system the
  /// first dim outputs are f0, then dim outputs per direction in table order.
  const Tape& batch_tape() const;
  bool supports_batch() const noexcept { return !lipschitz(); }

 private:
  SystemDef def_;
  std::vector<Direction> directions_;
  std::vector<VectorFieldDef> fields_;  // smooth directions, parallel to directions_
  std::vector<SetValuedBracket> set_brackets_;
  std::vector<int> set_index_;          // direction -> set_brackets_ slot or -1
  std::shared_ptr<const Tape> tape_;
};

/// Degree-h Hamiltonian. Throws DegreeOutOfRange unless 1 <= h <= k.
double hamiltonian(const System& sys, int h, const Vec& x, const Vec& p);

/// H^(1..k) at (x,p).
std::vector<double> hamiltonian_chain(const System& sys, const Vec& x, const Vec& p);

/// hamiltonian_chain plus a check that it is nonincreasing in h; a violation
/// throws InvalidArgument.
std::vector<double> hamiltonian_chain_check(const System& sys, const Vec& x, const Vec& p);

/// Contribution of direction d to the Hamiltonian for covector p at x:
/// max over vertices of <p,v>, and for two-sided directions the smaller of
/// that and the same for the negated set.
double pairing(const System& sys, std::size_t d, const Vec& x, const Vec& p);

/// Structure-of-arrays batch: coordinate v of point i is x[v*n + i]. Uses the
/// SIMD tape kernels for smooth systems; bit-identical to `hamiltonian`.
void hamiltonian_batch(const System& sys, int h, const double* x, const double* p, std::size_t n,
                       double* out);

}  // namespace lieclf
