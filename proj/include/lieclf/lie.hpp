#pragma once

// Formal iterated brackets over generator indices, their symbolic vector
// fields, and set-valued pair brackets for piecewise-smooth fields.

#include <compare>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lieclf/field.hpp"

namespace lieclf {

/// Generator index 0 denotes the drift; controlled generators are 1..m.
class FormalBracket {
 public:
  static FormalBracket leaf(int generator, int sign = +1);
  static FormalBracket node(const FormalBracket& left, const FormalBracket& right);
  /// Reads "f2", "-f1", "[f1,[f1,f2]]".
  static FormalBracket parse(std::string_view text);

  bool is_leaf() const noexcept;
  int generator() const;  // leaves only
  int sign() const;       // leaves only
  const FormalBracket& left() const;
  const FormalBracket& right() const;
  int degree() const noexcept;
  /// Segment count of the commutator word: 1 for a leaf, 2(r1+r2) otherwise.
  long r() const noexcept;
  /// [right,left] for nodes, opposite sign for leaves.
  FormalBracket negated() const;
  bool involves(int generator) const;
  std::string str() const;

  /// Degree first, then leaves before nodes, generator, sign (+ first),
  /// then left subtree, then right subtree.
  friend std::strong_ordering operator<=>(const FormalBracket& a, const FormalBracket& b);
  friend bool operator==(const FormalBracket& a, const FormalBracket& b) {
    return (a <=> b) == std::strong_ordering::equal;
  }

 private:
  struct Node;
  explicit FormalBracket(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

/// Signed leaves at degree 1; for degree >= 2 one representative per
/// antisymmetry class, children ordered left < right, so [B,B] never appears.
std::vector<FormalBracket> enumerate_brackets(int m, int k);

/// Symbolic vector field of `b`. `generators[i-1]` is f_i; `drift` is f_0 and
/// may be null when `b` does not involve generator 0.
VectorFieldDef bracket_field(const FormalBracket& b, std::span<const VectorFieldDef> generators,
                             const VectorFieldDef* drift = nullptr);

Vec eval_bracket(const FormalBracket& b, std::span<const VectorFieldDef> generators, const Vec& x);

struct BracketValueSet {
  std::vector<Vec> vertices;  // extreme points of the convex hull
};

/// Euclidean distance from q to the convex hull of `points` (min-norm point).
double distance_to_hull(const Vec& q, std::span<const Vec> points);

/// Removes duplicates and every point lying in the hull of the others.
std::vector<Vec> extreme_points(std::vector<Vec> points);

/// Set-valued bracket of a pair of piecewise fields: the hull of classical
/// brackets of every pair of pieces whose closed regions contain x.
class SetValuedBracket {
 public:
  SetValuedBracket(int i, int j, PiecewiseVectorFieldDef fi, PiecewiseVectorFieldDef fj);
  int first() const noexcept { return i_; }
  int second() const noexcept { return j_; }
  BracketValueSet eval(const Vec& x) const;

 private:
  int i_;
  int j_;
  PiecewiseVectorFieldDef fi_;
  PiecewiseVectorFieldDef fj_;
  std::vector<VectorFieldDef> pair_fields_;  // row-major over (piece of fi, piece of fj)
};

BracketValueSet eval_bracket_setvalued(int i, int j, const PiecewiseVectorFieldDef& fi,
                                       const PiecewiseVectorFieldDef& fj, const Vec& x);

}  // namespace lieclf
