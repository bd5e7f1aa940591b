#include "lieclf/expr.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <functional>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "lieclf/errors.hpp"
#include "lieclf/kernels/scalar_ops.hpp"

namespace lieclf {

struct Expr::Node {
  Op op;
  double value;
  int index;
  Expr a;
  Expr b;
  std::size_t hash;
  int max_var;
  bool kinks;
};

std::string_view op_name(Op op) {
  switch (op) {
    case Op::Const: return "const";
    case Op::Var: return "var";
    case Op::Add: return "+";
    case Op::Sub: return "-";
    case Op::Mul: return "*";
    case Op::Div: return "/";
    case Op::Pow: return "^";
    case Op::Neg: return "neg";
    case Op::Sin: return "sin";
    case Op::Cos: return "cos";
    case Op::Exp: return "exp";
    case Op::Sqrt: return "sqrt";
    case Op::Abs: return "abs";
    case Op::Min: return "min";
    case Op::Max: return "max";
    case Op::Sign: return "sign";
    case Op::Step: return "step";
    case Op::Guard: return "guard";
  }
  return "?";
}

int op_arity(Op op) {
  switch (op) {
    case Op::Const:
    case Op::Var:
      return 0;
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div:
    case Op::Min:
    case Op::Max:
    case Op::Guard:
      return 2;
    default:
      return 1;
  }
}

namespace {

std::size_t mix(std::size_t seed, std::size_t v) {
  return seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

bool is_kink_op(Op op) {
  return op == Op::Abs || op == Op::Min || op == Op::Max || op == Op::Sign ||
         op == Op::Step || op == Op::Guard;
}

const Expr& zero_expr() {
  static const Expr zero = Expr::constant(0.0);
  return zero;
}

}  // namespace

Expr make_node(Op op, double value, int index, const Expr* a, const Expr* b) {
  std::size_t h = mix(static_cast<std::size_t>(op), std::bit_cast<std::uint64_t>(value));
  h = mix(h, static_cast<std::size_t>(index));
  int max_var = op == Op::Var ? index : -1;
  bool kinks = is_kink_op(op);
  if (a != nullptr) {
    h = mix(h, a->hash());
    max_var = std::max(max_var, a->max_variable());
    kinks = kinks || a->has_kinks();
  }
  if (b != nullptr) {
    h = mix(h, b->hash());
    max_var = std::max(max_var, b->max_variable());
    kinks = kinks || b->has_kinks();
  }
  auto node = std::make_shared<Expr::Node>(Expr::Node{
      op, value, index, a != nullptr ? *a : Expr(nullptr), b != nullptr ? *b : Expr(nullptr), h,
      max_var, kinks});
  return Expr(std::move(node));
}

Expr::Expr() : Expr(zero_expr()) {}

Expr Expr::constant(double value) {
  return make_node(Op::Const, value, 0, nullptr, nullptr);
}

Expr Expr::variable(int index) {
  if (index < 0) throw Error(ErrorKind::InvalidArgument, "negative variable index");
  return make_node(Op::Var, 0.0, index, nullptr, nullptr);
}

Op Expr::op() const noexcept { return node_->op; }
double Expr::value() const noexcept { return node_->value; }
int Expr::index() const noexcept { return node_->index; }
const Expr& Expr::lhs() const { return node_->a; }
const Expr& Expr::rhs() const { return node_->b; }
int Expr::max_variable() const noexcept { return node_ ? node_->max_var : -1; }
bool Expr::has_kinks() const noexcept { return node_ && node_->kinks; }
std::size_t Expr::hash() const noexcept { return node_ ? node_->hash : 0; }

std::size_t Expr::node_count() const {
  std::unordered_set<const void*> seen;
  std::vector<const Expr*> stack{this};
  while (!stack.empty()) {
    const Expr* e = stack.back();
    stack.pop_back();
    if (!seen.insert(e->id()).second) continue;
    if (e->arity() >= 1) stack.push_back(&e->lhs());
    if (e->arity() == 2) stack.push_back(&e->rhs());
  }
  return seen.size();
}

bool structurally_equal(const Expr& a, const Expr& b) {
  if (a.id() == b.id()) return true;
  if (a.hash() != b.hash() || a.op() != b.op()) return false;
  switch (a.op()) {
    case Op::Const:
      return std::bit_cast<std::uint64_t>(a.value()) == std::bit_cast<std::uint64_t>(b.value());
    case Op::Var:
      return a.index() == b.index();
    case Op::Pow:
      return a.index() == b.index() && structurally_equal(a.lhs(), b.lhs());
    default:
      break;
  }
  if (!structurally_equal(a.lhs(), b.lhs())) return false;
  return a.arity() == 1 || structurally_equal(a.rhs(), b.rhs());
}

// ---------------------------------------------------------------------------
// Simplifying builders

Expr operator+(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) return Expr::constant(a.value() + b.value());
  if (a.is_constant(0.0)) return b;
  if (b.is_constant(0.0)) return a;
  if (b.op() == Op::Neg) return a - b.lhs();
  return make_node(Op::Add, 0.0, 0, &a, &b);
}

Expr operator-(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) return Expr::constant(a.value() - b.value());
  if (b.is_constant(0.0)) return a;
  if (a.is_constant(0.0)) return -b;
  if (structurally_equal(a, b)) return Expr::constant(0.0);
  return make_node(Op::Sub, 0.0, 0, &a, &b);
}

Expr operator*(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) return Expr::constant(a.value() * b.value());
  if (a.is_constant(0.0) || b.is_constant(0.0)) return Expr::constant(0.0);
  if (a.is_constant(1.0)) return b;
  if (b.is_constant(1.0)) return a;
  if (a.is_constant(-1.0)) return -b;
  if (b.is_constant(-1.0)) return -a;
  if (a.op() == Op::Neg && b.op() == Op::Neg) return a.lhs() * b.lhs();
  return make_node(Op::Mul, 0.0, 0, &a, &b);
}

Expr operator/(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant() && b.value() != 0.0) {
    return Expr::constant(a.value() / b.value());
  }
  if (b.is_constant(1.0)) return a;
  if (a.is_constant(0.0) && !b.is_constant(0.0)) return Expr::constant(0.0);
  return make_node(Op::Div, 0.0, 0, &a, &b);
}

Expr operator-(const Expr& a) {
  if (a.is_constant()) return Expr::constant(-a.value());
  if (a.op() == Op::Neg) return a.lhs();
  return make_node(Op::Neg, 0.0, 0, &a, nullptr);
}

Expr pow(const Expr& a, int exponent) {
  if (exponent == 0) return Expr::constant(1.0);
  if (exponent == 1) return a;
  if (a.is_constant() && (exponent > 0 || a.value() != 0.0)) {
    return Expr::constant(ops::ipow(a.value(), exponent));
  }
  return make_node(Op::Pow, 0.0, exponent, &a, nullptr);
}

namespace {
Expr unary(Op op, const Expr& a, double (*fold)(double)) {
  if (a.is_constant() && fold != nullptr) return Expr::constant(fold(a.value()));
  return make_node(op, 0.0, 0, &a, nullptr);
}
}  // namespace

Expr sin(const Expr& a) { return unary(Op::Sin, a, [](double v) { return std::sin(v); }); }
Expr cos(const Expr& a) { return unary(Op::Cos, a, [](double v) { return std::cos(v); }); }
Expr exp(const Expr& a) { return unary(Op::Exp, a, [](double v) { return std::exp(v); }); }
Expr sqrt(const Expr& a) { return unary(Op::Sqrt, a, [](double v) { return std::sqrt(v); }); }
Expr abs(const Expr& a) { return unary(Op::Abs, a, [](double v) { return std::fabs(v); }); }

Expr sign(const Expr& a) {
  if (a.is_constant() && a.value() != 0.0) return Expr::constant(ops::sign(a.value()));
  return make_node(Op::Sign, 0.0, 0, &a, nullptr);
}

Expr step(const Expr& a) {
  if (a.is_constant() && a.value() != 0.0) return Expr::constant(ops::step(a.value()));
  return make_node(Op::Step, 0.0, 0, &a, nullptr);
}

Expr min(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) return Expr::constant(ops::fmin2(a.value(), b.value()));
  return make_node(Op::Min, 0.0, 0, &a, &b);
}

Expr max(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) return Expr::constant(ops::fmax2(a.value(), b.value()));
  return make_node(Op::Max, 0.0, 0, &a, &b);
}

Expr guard(const Expr& kink_argument, const Expr& value) {
  if (kink_argument.is_constant() && kink_argument.value() != 0.0) return value;
  return make_node(Op::Guard, 0.0, 0, &kink_argument, &value);
}

Expr with_children(const Expr& e, const Expr& a, const Expr& b) {
  switch (e.op()) {
    case Op::Const:
    case Op::Var: return e;
    case Op::Add: return a + b;
    case Op::Sub: return a - b;
    case Op::Mul: return a * b;
    case Op::Div: return a / b;
    case Op::Pow: return pow(a, e.index());
    case Op::Neg: return -a;
    case Op::Sin: return sin(a);
    case Op::Cos: return cos(a);
    case Op::Exp: return exp(a);
    case Op::Sqrt: return sqrt(a);
    case Op::Abs: return abs(a);
    case Op::Min: return min(a, b);
    case Op::Max: return max(a, b);
    case Op::Sign: return sign(a);
    case Op::Step: return step(a);
    case Op::Guard: return guard(a, b);
  }
  return e;
}

Expr substitute(const Expr& e, const Expr& target, const Expr& replacement) {
  std::unordered_map<const void*, Expr> memo;
  std::function<Expr(const Expr&)> go = [&](const Expr& node) -> Expr {
    if (structurally_equal(node, target)) return replacement;
    if (node.arity() == 0) return node;
    if (auto it = memo.find(node.id()); it != memo.end()) return it->second;
    Expr a = go(node.lhs());
    Expr b = node.arity() == 2 ? go(node.rhs()) : Expr();
    Expr out = (a.id() == node.lhs().id() && (node.arity() == 1 || b.id() == node.rhs().id()))
                   ? node
                   : with_children(node, a, b);
    memo.emplace(node.id(), out);
    return out;
  };
  return go(e);
}

// ---------------------------------------------------------------------------
// Differentiation

namespace {

class Differentiator {
 public:
  explicit Differentiator(int var) : var_(var) {}

  Expr operator()(const Expr& e) {
    if (e.max_variable() < var_) return Expr::constant(0.0);
    if (auto it = memo_.find(e.id()); it != memo_.end()) return it->second;
    Expr d = derive(e);
    memo_.emplace(e.id(), d);
    return d;
  }

 private:
  Expr derive(const Expr& e) {
    const Expr zero = Expr::constant(0.0);
    switch (e.op()) {
      case Op::Const:
        return zero;
      case Op::Var:
        return Expr::constant(e.index() == var_ ? 1.0 : 0.0);
      case Op::Add:
        return (*this)(e.lhs()) + (*this)(e.rhs());
      case Op::Sub:
        return (*this)(e.lhs()) - (*this)(e.rhs());
      case Op::Mul:
        return (*this)(e.lhs()) * e.rhs() + e.lhs() * (*this)(e.rhs());
      case Op::Div: {
        const Expr& a = e.lhs();
        const Expr& b = e.rhs();
        const Expr da = (*this)(a);
        const Expr db = (*this)(b);
        if (db.is_constant(0.0)) return da / b;
        return (da * b - a * db) / pow(b, 2);
      }
      case Op::Pow: {
        const int n = e.index();
        return Expr::constant(n) * pow(e.lhs(), n - 1) * (*this)(e.lhs());
      }
      case Op::Neg:
        return -(*this)(e.lhs());
      case Op::Sin:
        return cos(e.lhs()) * (*this)(e.lhs());
      case Op::Cos:
        return -(sin(e.lhs()) * (*this)(e.lhs()));
      case Op::Exp:
        return e * (*this)(e.lhs());
      case Op::Sqrt:
        return (*this)(e.lhs()) / (Expr::constant(2.0) * e);
      case Op::Abs:
        return sign(e.lhs()) * (*this)(e.lhs());
      case Op::Min: {
        const Expr& a = e.lhs();
        const Expr& b = e.rhs();
        return step(b - a) * (*this)(a) + step(a - b) * (*this)(b);
      }
      case Op::Max: {
        const Expr& a = e.lhs();
        const Expr& b = e.rhs();
        return step(a - b) * (*this)(a) + step(b - a) * (*this)(b);
      }
      case Op::Sign:
      case Op::Step:
        return guard(e.lhs(), zero);
      case Op::Guard:
        return guard(e.lhs(), (*this)(e.rhs()));
    }
    return zero;
  }

  int var_;
  std::unordered_map<const void*, Expr> memo_;
};

}  // namespace

Expr partial(const Expr& e, int var) {
  if (var < 0) throw Error(ErrorKind::InvalidArgument, "negative variable index");
  return Differentiator(var)(e);
}

// ---------------------------------------------------------------------------
// Reference evaluation

namespace {

class TreeEvaluator {
 public:
  explicit TreeEvaluator(std::span<const double> x) : x_(x) {}

  double operator()(const Expr& e) {
    if (e.arity() == 0) return leaf(e);
    if (auto it = memo_.find(e.id()); it != memo_.end()) return it->second;
    const double v = node(e);
    memo_.emplace(e.id(), v);
    return v;
  }

 private:
  double leaf(const Expr& e) const {
    if (e.op() == Op::Const) return e.value();
    if (static_cast<std::size_t>(e.index()) >= x_.size()) {
      throw Error(ErrorKind::DimensionMismatch,
                  fmt::format("variable x{} outside point of dimension {}", e.index() + 1, x_.size()));
    }
    return x_[static_cast<std::size_t>(e.index())];
  }

  double node(const Expr& e) {
    const double a = (*this)(e.lhs());
    switch (e.op()) {
      case Op::Add: return a + (*this)(e.rhs());
      case Op::Sub: return a - (*this)(e.rhs());
      case Op::Mul: return a * (*this)(e.rhs());
      case Op::Div: return a / (*this)(e.rhs());
      case Op::Pow: return ops::ipow(a, e.index());
      case Op::Neg: return -a;
      case Op::Sin: return std::sin(a);
      case Op::Cos: return std::cos(a);
      case Op::Exp: return std::exp(a);
      case Op::Sqrt: return std::sqrt(a);
      case Op::Abs: return std::fabs(a);
      case Op::Min: return ops::fmin2(a, (*this)(e.rhs()));
      case Op::Max: return ops::fmax2(a, (*this)(e.rhs()));
      case Op::Sign:
        if (ops::is_kink(a)) kink(e);
        return ops::sign(a);
      case Op::Step:
        if (ops::is_kink(a)) kink(e);
        return ops::step(a);
      case Op::Guard:
        if (ops::is_kink(a)) kink(e);
        return (*this)(e.rhs());
      default:
        return a;
    }
  }

  [[noreturn]] static void kink(const Expr& e) {
    throw Error(ErrorKind::KinkEvaluation,
                fmt::format("derivative evaluated at a kink of {}", to_string(e.lhs())));
  }

  std::span<const double> x_;
  std::unordered_map<const void*, double> memo_;
};

}  // namespace

double evaluate(const Expr& e, std::span<const double> x) { return TreeEvaluator(x)(e); }

// ---------------------------------------------------------------------------
// Printing

namespace {

int precedence(Op op) {
  switch (op) {
    case Op::Add:
    case Op::Sub:
      return 1;
    case Op::Mul:
    case Op::Div:
      return 2;
    case Op::Neg:
      return 3;
    case Op::Pow:
      return 4;
    case Op::Const:
      return 5;
    default:
      return 6;
  }
}

void print(const Expr& e, std::string& out);

void print_child(const Expr& child, bool needs_parens, std::string& out) {
  if (needs_parens) out += '(';
  print(child, out);
  if (needs_parens) out += ')';
}

void print(const Expr& e, std::string& out) {
  const int p = precedence(e.op());
  switch (e.op()) {
    case Op::Const: {
      const double v = e.value();
      if (std::signbit(v)) {
        out += fmt::format("({})", v);
      } else {
        out += fmt::format("{}", v);
      }
      return;
    }
    case Op::Var:
      out += fmt::format("x{}", e.index() + 1);
      return;
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div: {
      print_child(e.lhs(), precedence(e.lhs().op()) < p, out);
      out += fmt::format(" {} ", op_name(e.op()));
      print_child(e.rhs(), precedence(e.rhs().op()) <= p, out);
      return;
    }
    case Op::Neg:
      out += '-';
      print_child(e.lhs(), precedence(e.lhs().op()) <= p, out);
      return;
    case Op::Pow:
      print_child(e.lhs(), precedence(e.lhs().op()) <= p, out);
      if (e.index() < 0) {
        out += fmt::format("^({})", e.index());
      } else {
        out += fmt::format("^{}", e.index());
      }
      return;
    default:
      out += op_name(e.op());
      out += '(';
      print(e.lhs(), out);
      if (e.arity() == 2) {
        out += ", ";
        print(e.rhs(), out);
      }
      out += ')';
      return;
  }
}

}  // namespace

std::string to_string(const Expr& e) {
  std::string out;
  print(e, out);
  return out;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

class Parser {
 public:
  Parser(std::string_view text, int dim) : text_(text), dim_(dim) {}

  Expr parse() {
    Expr e = expression();
    skip_space();
    if (pos_ != text_.size()) fail(fmt::format("unexpected '{}'", text_[pos_]));
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& message) const {
    throw Error(ErrorKind::Parse, fmt::format("{} at column {} in \"{}\"", message, pos_ + 1, text_));
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(fmt::format("expected '{}'", c));
  }

  Expr expression() {
    Expr lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = lhs + term();
      } else if (accept('-')) {
        lhs = lhs - term();
      } else {
        return lhs;
      }
    }
  }

  Expr term() {
    Expr lhs = unary();
    for (;;) {
      if (accept('*')) {
        lhs = lhs * unary();
      } else if (accept('/')) {
        lhs = lhs / unary();
      } else {
        return lhs;
      }
    }
  }

  Expr unary() {
    if (accept('-')) return -unary();
    if (accept('+')) return unary();
    return power();
  }

  Expr power() {
    Expr base = primary();
    if (!accept('^')) return base;
    const bool parenthesized = accept('(');
    const bool negative = accept('-');
    skip_space();
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (start == pos_) fail("integer exponent required");
    if (pos_ < text_.size() && (text_[pos_] == '.' || text_[pos_] == 'e' || text_[pos_] == 'E')) {
      fail("integer exponent required");
    }
    int n = 0;
    std::from_chars(text_.data() + start, text_.data() + pos_, n);
    if (parenthesized) expect(')');
    return pow(base, negative ? -n : n);
  }

  Expr primary() {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end of expression");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Expr inner = expression();
      expect(')');
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
    fail(fmt::format("unexpected '{}'", c));
  }

  Expr number() {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text_.data() + pos_, text_.data() + text_.size(), v);
    if (ec != std::errc()) fail("malformed number");
    pos_ = static_cast<std::size_t>(ptr - text_.data());
    return Expr::constant(v);
  }

  Expr identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isalpha(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    const std::string_view name = text_.substr(start, pos_ - start);
    if (name == "x") {
      const std::size_t digits = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      if (digits == pos_) fail("variable needs an index, e.g. x1");
      int i = 0;
      std::from_chars(text_.data() + digits, text_.data() + pos_, i);
      if (i < 1 || (dim_ >= 0 && i > dim_)) {
        pos_ = start;
        fail(fmt::format("variable x{} outside x1..x{}", i, dim_));
      }
      return Expr::variable(i - 1);
    }
    static const std::unordered_map<std::string_view, Op> kFunctions = {
        {"sin", Op::Sin},   {"cos", Op::Cos},   {"exp", Op::Exp},   {"sqrt", Op::Sqrt},
        {"abs", Op::Abs},   {"min", Op::Min},   {"max", Op::Max},   {"sign", Op::Sign},
        {"step", Op::Step}, {"guard", Op::Guard}};
    const auto it = kFunctions.find(name);
    if (it == kFunctions.end()) {
      pos_ = start;
      fail(fmt::format("unknown function '{}'", name));
    }
    expect('(');
    Expr a = expression();
    Expr b;
    if (op_arity(it->second) == 2) {
      expect(',');
      b = expression();
    }
    expect(')');
    switch (it->second) {
      case Op::Sin: return sin(a);
      case Op::Cos: return cos(a);
      case Op::Exp: return exp(a);
      case Op::Sqrt: return sqrt(a);
      case Op::Abs: return abs(a);
      case Op::Min: return min(a, b);
      case Op::Max: return max(a, b);
      case Op::Sign: return sign(a);
      case Op::Step: return step(a);
      default: return guard(a, b);
    }
  }

  std::string_view text_;
  int dim_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr parse_expr(std::string_view text, int dim) { return Parser(text, dim).parse(); }

}  // namespace lieclf
