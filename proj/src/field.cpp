#include "lieclf/field.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "lieclf/errors.hpp"

namespace lieclf {

struct VectorFieldDef::Compiled {
  std::vector<Expr> partials;  // row-major n x n
  Tape values;
  Tape jac;
  explicit Compiled(int dim) : values(dim), jac(dim) {}
};

namespace {

void check_finite(const Vec& v, std::string_view what) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) {
      throw Error(ErrorKind::NonFinite, fmt::format("{} component {} is not finite", what, i + 1));
    }
  }
}

void check_dim(std::span<const double> x, int dim) {
  if (x.size() != static_cast<std::size_t>(dim)) {
    throw Error(ErrorKind::DimensionMismatch,
                fmt::format("point has dimension {}, field expects {}", x.size(), dim));
  }
}

}  // namespace

VectorFieldDef::VectorFieldDef(int dim, std::vector<Expr> components)
    : dim_(dim), components_(std::move(components)) {
  if (dim <= 0) throw Error(ErrorKind::InvalidArgument, "field dimension must be positive");
  if (components_.size() != static_cast<std::size_t>(dim)) {
    throw Error(ErrorKind::DimensionMismatch,
                fmt::format("field has {} components for dimension {}", components_.size(), dim));
  }
  auto compiled = std::make_shared<Compiled>(dim);
  compiled->partials.reserve(static_cast<std::size_t>(dim) * dim);
  for (const Expr& c : components_) {
    if (c.max_variable() >= dim) {
      throw Error(ErrorKind::DimensionMismatch,
                  fmt::format("component {} references x{} beyond dimension {}", to_string(c),
                              c.max_variable() + 1, dim));
    }
    has_kinks_ = has_kinks_ || c.has_kinks();
    compiled->values.add_output(c);
    for (int j = 0; j < dim; ++j) {
      compiled->partials.push_back(partial(c, j));
      compiled->jac.add_output(compiled->partials.back());
    }
  }
  compiled_ = std::move(compiled);
}

VectorFieldDef VectorFieldDef::parse(int dim, const std::vector<std::string>& components) {
  std::vector<Expr> exprs;
  exprs.reserve(components.size());
  for (const std::string& text : components) exprs.push_back(parse_expr(text, dim));
  return VectorFieldDef(dim, std::move(exprs));
}

VectorFieldDef VectorFieldDef::zero(int dim) {
  return VectorFieldDef(dim, std::vector<Expr>(static_cast<std::size_t>(dim), Expr::constant(0.0)));
}

const Expr& VectorFieldDef::partial_expr(int i, int j) const {
  return compiled_->partials.at(static_cast<std::size_t>(i) * dim_ + j);
}

bool VectorFieldDef::is_zero() const noexcept {
  return std::all_of(components_.begin(), components_.end(),
                     [](const Expr& c) { return c.is_constant(0.0); });
}

Vec VectorFieldDef::eval(std::span<const double> x) const {
  check_dim(x, dim_);
  thread_local std::vector<double> slots;
  Vec out(dim_);
  const bool kink = eval_tape(compiled_->values, x, {out.data(), static_cast<std::size_t>(dim_)}, slots);
  if (kink) throw Error(ErrorKind::KinkEvaluation, "field evaluated exactly at a kink");
  check_finite(out, "field");
  return out;
}

Mat VectorFieldDef::jacobian(std::span<const double> x) const {
  check_dim(x, dim_);
  thread_local std::vector<double> slots;
  std::vector<double> flat(static_cast<std::size_t>(dim_) * dim_);
  if (eval_tape(compiled_->jac, x, flat, slots)) {
    throw Error(ErrorKind::KinkEvaluation, "Jacobian evaluated exactly at a kink");
  }
  Mat J(dim_, dim_);
  for (int i = 0; i < dim_; ++i) {
    for (int j = 0; j < dim_; ++j) {
      const double v = flat[static_cast<std::size_t>(i) * dim_ + j];
      if (!std::isfinite(v)) throw Error(ErrorKind::NonFinite, "Jacobian entry is not finite");
      J(i, j) = v;
    }
  }
  return J;
}

std::string VectorFieldDef::str() const {
  std::string out = "[";
  for (std::size_t i = 0; i < components_.size(); ++i) {
    if (i > 0) out += ", ";
    out += to_string(components_[i]);
  }
  return out + "]";
}

double fd_check(const VectorFieldDef& f, const Vec& x, double h) {
  if (!(h > 0.0)) throw Error(ErrorKind::InvalidArgument, "finite-difference step must be positive");
  const Mat J = f.jacobian(x);
  double worst = 0.0;
  for (int j = 0; j < f.dim(); ++j) {
    Vec xp = x;
    Vec xm = x;
    xp[j] += h;
    xm[j] -= h;
    const Vec column = (f.eval(xp) - f.eval(xm)) / (2.0 * h);
    worst = std::max(worst, (column - J.col(j)).cwiseAbs().maxCoeff());
  }
  return worst;
}

VectorFieldDef lie_bracket(const VectorFieldDef& x_field, const VectorFieldDef& y_field) {
  const int n = x_field.dim();
  if (y_field.dim() != n) throw Error(ErrorKind::DimensionMismatch, "bracket of fields of different dimension");
  std::vector<Expr> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    Expr acc = Expr::constant(0.0);
    for (int j = 0; j < n; ++j) {
      acc = acc + y_field.partial_expr(i, j) * x_field.component(j);
      acc = acc - x_field.partial_expr(i, j) * y_field.component(j);
    }
    out.push_back(acc);
  }
  return VectorFieldDef(n, std::move(out));
}

// ---------------------------------------------------------------------------

PiecewiseVectorFieldDef::PiecewiseVectorFieldDef(int dim, std::vector<Piece> pieces)
    : dim_(dim), pieces_(std::move(pieces)) {
  if (pieces_.empty()) throw Error(ErrorKind::InvalidArgument, "piecewise field needs at least one piece");
  for (const Piece& p : pieces_) {
    if (p.field.dim() != dim) throw Error(ErrorKind::DimensionMismatch, "piece dimension differs from field");
    for (const Expr& g : p.guards) {
      if (g.max_variable() >= dim) throw Error(ErrorKind::DimensionMismatch, "guard references x beyond dimension");
    }
  }
}

PiecewiseVectorFieldDef PiecewiseVectorFieldDef::smooth(const VectorFieldDef& f) {
  return PiecewiseVectorFieldDef(f.dim(), {Piece{{}, f}});
}

namespace {

// Innermost abs/min/max node: its own arguments are kink-free.
const Expr* innermost_kink(const Expr& e) {
  if (!e.has_kinks()) return nullptr;
  for (int c = 0; c < e.arity(); ++c) {
    if (const Expr* inner = innermost_kink(c == 0 ? e.lhs() : e.rhs())) return inner;
  }
  return (e.op() == Op::Abs || e.op() == Op::Min || e.op() == Op::Max) ? &e : nullptr;
}

void expand(int dim, std::vector<Expr> comps, std::vector<Expr> guards, std::vector<Piece>& out) {
  const Expr* kink = nullptr;
  for (const Expr& c : comps) {
    if ((kink = innermost_kink(c)) != nullptr) break;
  }
  if (kink == nullptr) {
    out.push_back(Piece{std::move(guards), VectorFieldDef(dim, std::move(comps))});
    return;
  }
  const Expr node = *kink;
  struct Branch {
    Expr guard;
    Expr value;
  };
  std::vector<Branch> branches;
  if (node.op() == Op::Abs) {
    branches = {{node.lhs(), node.lhs()}, {-node.lhs(), -node.lhs()}};
  } else {
    const Expr& a = node.lhs();
    const Expr& b = node.rhs();
    const bool is_min = node.op() == Op::Min;
    branches = {{is_min ? b - a : a - b, a}, {is_min ? a - b : b - a, b}};
  }
  for (const Branch& br : branches) {
    std::vector<Expr> next;
    next.reserve(comps.size());
    for (const Expr& c : comps) next.push_back(substitute(c, node, br.value));
    std::vector<Expr> g = guards;
    g.push_back(br.guard);
    expand(dim, std::move(next), std::move(g), out);
  }
}

}  // namespace

PiecewiseVectorFieldDef PiecewiseVectorFieldDef::decompose_kinks(const VectorFieldDef& f) {
  std::vector<Piece> pieces;
  expand(f.dim(), f.components(), {}, pieces);
  return PiecewiseVectorFieldDef(f.dim(), std::move(pieces));
}

namespace {

double min_guard(const Piece& piece, std::span<const double> x) {
  double worst = std::numeric_limits<double>::infinity();
  for (const Expr& g : piece.guards) worst = std::min(worst, evaluate(g, x));
  return worst;
}

}  // namespace

std::vector<int> PiecewiseVectorFieldDef::pieces_containing(std::span<const double> x) const {
  check_dim(x, dim_);
  std::vector<int> found;
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    if (min_guard(pieces_[i], x) > -kGuardTolerance) found.push_back(static_cast<int>(i));
  }
  return found;
}

int PiecewiseVectorFieldDef::owning_piece(std::span<const double> x) const {
  check_dim(x, dim_);
  int best = -1;
  double best_margin = -kGuardTolerance;
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    const double m = min_guard(pieces_[i], x);
    if (m > best_margin) {
      best = static_cast<int>(i);
      best_margin = m;
    }
  }
  if (best < 0) throw Error(ErrorKind::EmptyPieceSet, "no piece's closed region contains the point");
  return best;
}

Vec PiecewiseVectorFieldDef::eval(std::span<const double> x) const {
  return pieces_[static_cast<std::size_t>(owning_piece(x))].field.eval(x);
}

}  // namespace lieclf
