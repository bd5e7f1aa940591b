#pragma once

// Closed-form scalar expressions over the state variables x1..xn.
//
// An Expr is an immutable handle to a shared DAG node. Builders simplify on
// construction (constant folding and the usual 0/1 identities) so symbolic
// derivatives of bracket fields stay small. Nodes are never mutated, so any
// Expr may be shared freely across threads.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>

namespace lieclf {

enum class Op : std::uint8_t {
  Const,
  Var,
  Add,
  Sub,
  Mul,
  Div,
  Pow,  // integer exponent stored in index()
  Neg,
  Sin,
  Cos,
  Exp,
  Sqrt,
  Abs,
  Min,
  Max,
  // The three below only arise from differentiating abs/min/max.
  Sign,   // sign(u); kink when u == 0
  Step,   // 1 if u > 0, 0 if u < 0; kink when u == 0
  Guard,  // guard(u, e) == e; kink when u == 0
};

std::string_view op_name(Op op);
int op_arity(Op op);

class Expr {
 public:
  /// The constant zero.
  Expr();

  static Expr constant(double value);
  /// Zero-based variable index (x1 is index 0).
  static Expr variable(int index);

  Op op() const noexcept;
  double value() const noexcept;
  /// Variable index for Var, exponent for Pow, unused otherwise.
  int index() const noexcept;
  const Expr& lhs() const;
  const Expr& rhs() const;
  int arity() const noexcept { return op_arity(op()); }

  bool is_constant() const noexcept { return op() == Op::Const; }
  bool is_constant(double v) const noexcept {
    return is_constant() && value() == v;
  }
  /// Largest variable index referenced, or -1 for a closed constant.
  int max_variable() const noexcept;
  /// True if any abs/min/max/sign/step/guard node occurs.
  bool has_kinks() const noexcept;
  std::size_t hash() const noexcept;
  std::size_t node_count() const;

  /// Node identity, stable for the lifetime of any handle.
  const void* id() const noexcept { return node_.get(); }

  struct Node;

 private:
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  friend Expr make_node(Op, double, int, const Expr*, const Expr*);
  std::shared_ptr<const Node> node_;
};

Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
Expr pow(const Expr& a, int exponent);
Expr sin(const Expr& a);
Expr cos(const Expr& a);
Expr exp(const Expr& a);
Expr sqrt(const Expr& a);
Expr abs(const Expr& a);
Expr min(const Expr& a, const Expr& b);
Expr max(const Expr& a, const Expr& b);
Expr sign(const Expr& a);
Expr step(const Expr& a);
Expr guard(const Expr& kink_argument, const Expr& value);

bool structurally_equal(const Expr& a, const Expr& b);

/// Rebuilds `e`'s node with new children through the simplifying builders.
Expr with_children(const Expr& e, const Expr& a, const Expr& b = Expr());

/// Replaces every subtree structurally equal to `target`.
Expr substitute(const Expr& e, const Expr& target, const Expr& replacement);

/// Exact symbolic partial derivative with respect to zero-based variable
/// `var`. abs/min/max differentiate into sign/step factors that raise
/// KinkEvaluation when evaluated exactly at the kink.
Expr partial(const Expr& e, int var);

/// Reference tree-walking evaluator. Throws Error(KinkEvaluation) at a
/// sign/step/guard kink and Error(DimensionMismatch) when x is too short.
double evaluate(const Expr& e, std::span<const double> x);

/// Infix rendering that parse_expr reads back to a structurally equal tree.
std::string to_string(const Expr& e);

/// Parses the infix grammar documented in the README. `dim` (when >= 0)
/// bounds the admissible variable indices x1..x<dim>.
Expr parse_expr(std::string_view text, int dim = -1);

}  // namespace lieclf
