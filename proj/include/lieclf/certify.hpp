#pragma once

// Class-KL envelope built from a margin function, logged step durations and
// level-set distance bounds, and its check against a synthesized trajectory.

#include <functional>
#include <string>
#include <vector>

#include "lieclf/clf.hpp"
#include "lieclf/steering.hpp"

namespace lieclf {

/// Strictly increasing piecewise-linear function through (0,0) and the
/// given breakpoints, or the identity. Constant beyond the last breakpoint.
class MonotoneTable {
 public:
  MonotoneTable() = default;
  static MonotoneTable identity();
  /// Throws NonMonotoneInput unless both coordinates strictly increase.
  static MonotoneTable from_points(std::vector<std::pair<double, double>> points);

  bool is_identity() const noexcept { return identity_; }
  const std::vector<std::pair<double, double>>& points() const noexcept { return pts_; }
  double domain_max() const noexcept;
  /// `extrapolated` (when given) is set if u lies beyond the last breakpoint.
  double operator()(double u, bool* extrapolated = nullptr) const;
  double inverse(double v, bool* extrapolated = nullptr) const;

 private:
  bool identity_ = false;
  std::vector<std::pair<double, double>> pts_;
};

/// Inverse of a continuous strictly increasing f on [0, hi] by bisection;
/// values at or above f(hi) map to hi (flagged), values <= f(0) to 0.
double invert_increasing(const std::function<double(double)>& f, double v, double hi, bool* extrapolated);

/// Per-level lower bound of accepted step durations: level i of `levels`
/// equal bins over (0, u_max] gets the least duration of any step starting
/// at that level or above (so the table is nondecreasing), through (0,0).
MonotoneTable tau_lower_table(const Trajectory& traj, double u_max, int levels);

struct LevelDistanceTables {
  MonotoneTable lower;  // delta_-(u) = min{ d(x) : U(x) >= u }
  MonotoneTable upper;  // delta_+(u) = max{ d(x) : U(x) <= u }
};

/// Identity tables when U is the distance to the target ball, otherwise
/// sampled envelopes over points of (0, u_max].
LevelDistanceTables level_distance_tables(const CLFCandidate& u, const TargetDef& target,
                                          const std::vector<Vec>& samples, double u_max, int levels);
bool candidate_is_distance(const CLFCandidate& u, const TargetDef& target);

struct KLInputs {
  GammaFn gamma;
  MonotoneTable tau;  // lower bound of step durations per level
  long r_k = 1;       // largest segment count of any direction
  int k = 1;
  LevelDistanceTables distance;
  double field_bound = 1.0;
  double u_max = 1.0;  // top of the level range covered by the tables
};

class KLFunction {
 public:
  explicit KLFunction(KLInputs in);

  double gamma_tilde(double u) const;
  double gamma_hat(double u) const;
  double gamma_hat_inverse(double v, bool* extrapolated = nullptr) const;
  double delta_hat_minus(double u) const;
  double delta_hat_minus_inverse(double d, bool* extrapolated = nullptr) const;
  double delta_plus(double u, bool* extrapolated = nullptr) const;
  /// Upper bound of any step duration taken from distance d.
  double tau_max(double d) const;
  double beta_hat(double delta, double s, bool* extrapolated = nullptr) const;
  double beta(double delta, double s, bool* extrapolated = nullptr) const;
  const KLInputs& inputs() const noexcept { return in_; }

 private:
  KLInputs in_;
};

KLFunction build_kl(KLInputs inputs);

struct BetaRow {
  double delta;
  double s;
  double beta;
};

std::vector<BetaRow> beta_table(const KLFunction& kl, double delta_max, double s_max, int n_delta, int n_s);

struct EnvelopeReport {
  std::size_t samples = 0;
  double max_violation = 0.0;  // max d(y(s)) - beta(d(x0), s); <= 0 certifies
  double worst_s = 0.0;
  double max_speed = 0.0;      // observed |dy/ds| between dense samples
  bool speed_within_bound = true;
  bool extrapolated = false;
};

EnvelopeReport check_envelope(const Trajectory& traj, const KLFunction& kl, const TargetDef& target);

}  // namespace lieclf
