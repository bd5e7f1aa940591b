#pragma once

// Vector fields with closed-form components and their piecewise-smooth
// generalization. Both are immutable once built; the compiled tapes are
// shared between copies.

#include <Eigen/Dense>

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "lieclf/expr.hpp"
#include "lieclf/kernels/tape.hpp"

namespace lieclf {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline std::span<const double> as_span(const Vec& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

class VectorFieldDef {
 public:
  VectorFieldDef() = default;
  VectorFieldDef(int dim, std::vector<Expr> components);
  static VectorFieldDef parse(int dim, const std::vector<std::string>& components);
  static VectorFieldDef zero(int dim);

  int dim() const noexcept { return dim_; }
  const std::vector<Expr>& components() const noexcept { return components_; }
  const Expr& component(int i) const { return components_.at(static_cast<std::size_t>(i)); }
  /// Symbolic partial d(component i)/d(x_j).
  const Expr& partial_expr(int i, int j) const;
  bool has_kinks() const noexcept { return has_kinks_; }
  bool is_zero() const noexcept;

  /// Component-wise evaluation through the compiled tape. Throws
  /// KinkEvaluation or NonFinite.
  Vec eval(std::span<const double> x) const;
  Vec eval(const Vec& x) const { return eval(as_span(x)); }
  Mat jacobian(std::span<const double> x) const;
  Mat jacobian(const Vec& x) const { return jacobian(as_span(x)); }

  std::string str() const;

 private:
  struct Compiled;
  int dim_ = 0;
  std::vector<Expr> components_;
  bool has_kinks_ = false;
  std::shared_ptr<const Compiled> compiled_;
};

inline Vec eval_field(const VectorFieldDef& f, const Vec& x) { return f.eval(x); }
inline Mat jacobian(const VectorFieldDef& f, const Vec& x) { return f.jacobian(x); }

/// Max over Jacobian entries of |symbolic - central difference with step h|.
double fd_check(const VectorFieldDef& f, const Vec& x, double h);

/// Classical bracket [X,Y] = DY.X - DX.Y, built symbolically.
VectorFieldDef lie_bracket(const VectorFieldDef& x_field, const VectorFieldDef& y_field);

/// Closed-region boundary tolerance for guards.
inline constexpr double kGuardTolerance = 1e-12;

struct Piece {
  std::vector<Expr> guards;  // strict conditions g(x) > 0
  VectorFieldDef field;
};

class PiecewiseVectorFieldDef {
 public:
  PiecewiseVectorFieldDef() = default;
  PiecewiseVectorFieldDef(int dim, std::vector<Piece> pieces);
  /// One unguarded piece.
  static PiecewiseVectorFieldDef smooth(const VectorFieldDef& f);
  /// Splits every abs/min/max subterm of `f` into its two smooth branches,
  /// producing one piece per sign pattern of the kink arguments.
  static PiecewiseVectorFieldDef decompose_kinks(const VectorFieldDef& f);

  int dim() const noexcept { return dim_; }
  const std::vector<Piece>& pieces() const noexcept { return pieces_; }

  /// Indices of pieces whose closed region (all g > -tol) contains x.
  std::vector<int> pieces_containing(std::span<const double> x) const;
  /// The piece with the largest minimal guard value among those containing x.
  int owning_piece(std::span<const double> x) const;
  Vec eval(std::span<const double> x) const;
  Vec eval(const Vec& x) const { return eval(as_span(x)); }

 private:
  int dim_ = 0;
  std::vector<Piece> pieces_;
};

}  // namespace lieclf
