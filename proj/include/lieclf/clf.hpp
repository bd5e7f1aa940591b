#pragma once

// Candidate Lyapunov functions, targets, sampled verification of the
// degree-k decrease condition and the monotone margin function.

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "lieclf/hamiltonian.hpp"

namespace lieclf {

struct Ball {
  Vec center;
  double radius = 0.0;
};

struct SignedDistance {
  Expr expr;  // negative inside the target
};

class TargetDef {
 public:
  TargetDef() = default;
  explicit TargetDef(Ball ball);
  explicit TargetDef(SignedDistance sd);

  /// Euclidean distance to the target (0 inside).
  double distance(const Vec& x) const;
  const std::variant<Ball, SignedDistance>& spec() const noexcept { return spec_; }
  const Ball* ball() const noexcept { return std::get_if<Ball>(&spec_); }

 private:
  std::variant<Ball, SignedDistance> spec_;
};

class CLFCandidate {
 public:
  struct Smooth {
    Expr u;
  };
  struct DistanceToBall {
    Vec center;
    double radius;
  };
  struct MaxOfSmooth {
    std::vector<Expr> pieces;
    double activity_tol;
  };
  using Spec = std::variant<Smooth, DistanceToBall, MaxOfSmooth>;

  CLFCandidate() = default;
  static CLFCandidate smooth(int dim, Expr u);
  static CLFCandidate distance_to_ball(Vec center, double radius);
  static CLFCandidate max_of(int dim, std::vector<Expr> pieces, double activity_tol = 1e-9);

  int dim() const noexcept { return dim_; }
  const Spec& spec() const noexcept { return spec_; }
  double value(const Vec& x) const;
  /// D*U(x). Throws InvalidArgument where the gradient is undefined (the
  /// center of a distance-to-ball candidate).
  std::vector<Vec> limiting_gradients(const Vec& x) const;

  struct Compiled;  // opaque per-candidate tapes

 private:
  int dim_ = 0;
  Spec spec_;
  std::shared_ptr<const Compiled> compiled_;
};

inline std::vector<Vec> limiting_gradients(const CLFCandidate& u, const Vec& x) {
  return u.limiting_gradients(x);
}

// ---------------------------------------------------------------------------
// Sampling

/// Halton sequence with base b_v = v-th prime, starting at index 1 + seed.
class Halton {
 public:
  Halton(int dim, std::uint64_t seed);
  /// Next point in [0,1)^dim.
  Vec next();

 private:
  std::vector<int> bases_;
  std::uint64_t index_;
};

double radical_inverse(std::uint64_t i, int base);

enum class SamplerKind { Halton, Grid, Points };

struct SamplerSpec {
  SamplerKind kind = SamplerKind::Halton;
  Vec lower;  // box corners
  Vec upper;
  std::uint64_t seed = 0;
  int grid_per_axis = 21;
  std::vector<Vec> points;  // SamplerKind::Points
};

/// Region 0 < U(x) <= level_max, and outside the target when given.
struct Region {
  double level_max;
  const TargetDef* target = nullptr;
};

/// Up to `n` points of the region (Halton: accepted points of the box
/// sequence, giving up after 1000 n draws; grid/points: all accepted).
/// Throws EmptySample when nothing is accepted.
std::vector<Vec> sample_region(const SamplerSpec& sampler, const CLFCandidate& u, const Region& region,
                               std::size_t n);

// ---------------------------------------------------------------------------

class GammaFn {
 public:
  GammaFn() = default;
  /// Breakpoints with strictly increasing u and gamma; throws NonMonotoneInput otherwise.
  explicit GammaFn(std::vector<std::pair<double, double>> breakpoints);
  double operator()(double u) const;
  const std::vector<std::pair<double, double>>& breakpoints() const noexcept { return bp_; }

 private:
  std::vector<std::pair<double, double>> bp_;
};

struct SampleFailure {
  Vec x;
  double hamiltonian;  // max over p of H^(k)
};

struct VerificationReport {
  std::size_t samples = 0;
  int k = 0;
  double min_margin = 0.0;
  Vec argmin;
  std::vector<SampleFailure> failures;  // capped at kMaxFailures entries
  std::size_t failure_count = 0;
  std::uint64_t seed = 0;
  bool passed() const noexcept { return failure_count == 0; }
  static constexpr std::size_t kMaxFailures = 100;
};

/// max over p in D*U(x) of H^(h)(x,p) at every point (batched for smooth
/// systems with single-gradient candidates).
std::vector<double> worst_hamiltonian(const System& sys, const CLFCandidate& u, int h,
                                      const std::vector<Vec>& points);

VerificationReport verify_points(const System& sys, const CLFCandidate& u, const std::vector<Vec>& points,
                                 std::uint64_t seed = 0);

VerificationReport verify(const System& sys, const CLFCandidate& u, const Region& region,
                          const SamplerSpec& sampler, std::size_t n);

struct GammaEstimate {
  GammaFn gamma;
  std::vector<double> level_edges;    // L + 1 edges
  std::vector<double> level_minima;   // raw m per level
};

/// Levels split (0, level_max] into L equal bins with up to M samples each.
GammaEstimate estimate_gamma(const System& sys, const CLFCandidate& u, const Region& region,
                             const SamplerSpec& sampler, int levels, int per_level);

/// From raw per-level minima over bins with the given edges.
GammaFn gamma_from_minima(const std::vector<double>& edges, const std::vector<double>& minima);

}  // namespace lieclf
