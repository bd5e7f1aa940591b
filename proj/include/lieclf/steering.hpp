#pragma once

// Piecewise-constant control words that realize bracket directions, their
// integration, feedback selection, the backtracking descent step and the
// synthesis loop.

#include <optional>
#include <string>
#include <vector>

#include "lieclf/clf.hpp"
#include "lieclf/errors.hpp"
#include "lieclf/hamiltonian.hpp"

namespace lieclf {

/// Constant control on one segment: sign * e_generator, or control 0 (drift
/// only) when generator == 0.
struct Segment {
  int generator = 0;
  int sign = 1;
  /// Signed generator index, 0 for drift only.
  int control() const noexcept { return generator == 0 ? 0 : sign * generator; }
  friend bool operator==(const Segment&, const Segment&) = default;
};

class ControlWord {
 public:
  ControlWord() = default;
  explicit ControlWord(std::vector<Segment> segments);

  const std::vector<Segment>& segments() const noexcept { return segments_; }
  long r() const noexcept { return static_cast<long>(segments_.size()); }
  /// Every segment lasts 1/r of the total duration.
  double fraction() const noexcept { return 1.0 / static_cast<double>(r()); }
  /// Reversed order, every control negated.
  ControlWord inverse() const;
  ControlWord concat(const ControlWord& other) const;
  std::string str() const;
  friend bool operator==(const ControlWord&, const ControlWord&) = default;

 private:
  std::vector<Segment> segments_;
};

/// Leaf: one segment; [B1,B2]: W1 W2 inv(W1) inv(W2).
ControlWord word_for_bracket(const FormalBracket& b);

/// Words with the drift always active: [f0,fi] -> (-e_i, +e_i),
/// [fi,f0] -> (+e_i, -e_i), [fj,fl] -> (e_j, e_l, -e_j, -e_l).
ControlWord word_for_drift_bracket(const FormalBracket& b);

/// Word realizing direction d of the system with the given orientation (+1
/// as enumerated, -1 for the negated bracket; ignored for one-sided ones).
ControlWord word_for_direction(const System& sys, std::size_t d, int orientation);

struct PathSample {
  double s;
  Vec x;
  int control;
  int segment;
};

struct WordRun {
  Vec endpoint;
  std::vector<PathSample> path;  // substep endpoints, filled when requested
};

/// Classical RK4 with `substeps` equal steps per segment; segment
/// boundaries are hit exactly. Throws NonFinite on blow-up.
WordRun execute_word(const System& sys, const Vec& x, const ControlWord& w, double t, int substeps = 32,
                     bool record_path = false);

struct AsymptoticResult {
  std::vector<double> t;
  std::vector<double> errors;
  double slope = 0.0;
  /// Every error is at round-off level: the word realizes the direction
  /// with no remainder at this point, so the slope is undefined.
  bool exact = false;
  Vec symbolic;       // oriented direction value (nearest hull point for set-valued)
  Vec estimate;       // (y - x) / (t/r)^h at the smallest t
  Vec extrapolated;   // Richardson combination of the two smallest t
  double relative_error = 0.0;  // |estimate - symbolic| / |symbolic|
  int degree = 0;
  long r = 0;
};

AsymptoticResult asymptotic_order(const System& sys, std::size_t d, int orientation, const Vec& x,
                                  std::vector<double> t_list, int substeps = 32);

/// Index of the direction whose bracket is `b` or its negation.
std::optional<std::pair<std::size_t, int>> find_direction(const System& sys, const FormalBracket& b);

struct Feedback {
  std::size_t direction;
  int orientation;
  int degree;
  double pairing;  // worst case over vertices and covectors
};

/// Smallest degree with a direction whose worst-case pairing is <= -gamma;
/// at that degree the most negative one, ties to the lowest index.
Feedback select_feedback(const System& sys, const Vec& x, const std::vector<Vec>& pset, double gamma);

struct StepOptions {
  double field_bound = 1.0;  // bound on field norms used for the time cap
  int substeps = 32;
  int max_halvings = 40;
};

struct StepResult {
  Vec next;
  double t = 0.0;
  int degree = 0;
  long r = 0;
  std::size_t direction = 0;
  int orientation = 1;
  double gamma = 0.0;       // gamma(U(x)) used by the test
  double decrease = 0.0;    // U(next) - U(x)
  int halvings = 0;
  std::vector<PathSample> path;
};

/// One feedback step with backtracking on the descent test
/// U(y) - U(x) <= -gamma(U(x))/2 (t/r)^h, starting from
/// t = min(1, d(x)/(2 field_bound)). Throws StepFailure.
StepResult step(const System& sys, const Vec& x, const CLFCandidate& u, const TargetDef& target,
                const GammaFn& gamma, const StepOptions& opt, bool record_path = false);

struct SynthesisOptions {
  StepOptions step;
  double eps_d = 0.05;
  std::size_t max_steps = 100000;
};

struct DenseSample {
  double s;
  Vec x;
  int control;
  int segment;
  std::size_t step;
};

struct Checkpoint {
  double s;
  Vec x;
  double u;
  double d;
  int degree;   // 0 for the initial point
  double t;     // duration of the step that produced this checkpoint
  long r;
  double gamma;
  std::string bracket;
};

struct Trajectory {
  std::vector<DenseSample> dense;
  std::vector<Checkpoint> checkpoints;
  std::string termination;
  bool reached = false;
  std::size_t steps() const noexcept { return checkpoints.empty() ? 0 : checkpoints.size() - 1; }
};

class SynthesisFailure : public Error {
 public:
  SynthesisFailure(ErrorKind kind, const std::string& message, Trajectory partial)
      : Error(kind, message), partial_(std::move(partial)) {}
  const Trajectory& partial() const noexcept { return partial_; }

 private:
  Trajectory partial_;
};

/// Iterates `step` until d(x_j) <= eps_d. Throws SynthesisFailure (kind
/// StepFailure or MaxStepsExceeded) carrying the partial trajectory.
Trajectory synthesize(const System& sys, const CLFCandidate& u, const TargetDef& target, const Vec& x0,
                      const GammaFn& gamma, const SynthesisOptions& opt);

}  // namespace lieclf
