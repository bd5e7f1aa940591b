#include <gtest/gtest.h>

#include <cmath>

#include "lieclf/expr.hpp"
#include "support.hpp"

namespace lieclf {
namespace {

using testing::Gen;

double at(const Expr& e, std::initializer_list<double> x) {
  const std::vector<double> v(x);
  return evaluate(e, v);
}

TEST(ExprBuilders, FoldConstantsAndIdentities) {
  const Expr x = Expr::variable(0);
  EXPECT_TRUE((Expr::constant(2.0) * Expr::constant(3.5)).is_constant(7.0));
  EXPECT_TRUE(structurally_equal(x + Expr::constant(0.0), x));
  EXPECT_TRUE(structurally_equal(Expr::constant(1.0) * x, x));
  EXPECT_TRUE((Expr::constant(0.0) * x).is_constant(0.0));
  EXPECT_TRUE((x - x).is_constant(0.0));
  EXPECT_TRUE(structurally_equal(-(-x), x));
  EXPECT_TRUE(pow(x, 0).is_constant(1.0));
  EXPECT_TRUE(structurally_equal(pow(x, 1), x));
  EXPECT_TRUE(sign(Expr::constant(-3.0)).is_constant(-1.0));
  EXPECT_TRUE(step(Expr::constant(2.0)).is_constant(1.0));
  EXPECT_TRUE(structurally_equal(guard(Expr::constant(1.0), x), x));
  EXPECT_EQ(sign(Expr::constant(0.0)).op(), Op::Sign);  // kink kept for evaluation to report
}

TEST(ExprEvaluate, MatchesDirectArithmetic) {
  const Expr e = parse_expr("x1^2 * sin(x2) - exp(0.5 * x1) / (1 + x2^2) + sqrt(abs(x1 - x2))");
  const double a = 0.7, b = -1.3;
  const double want = a * a * std::sin(b) - std::exp(0.5 * a) / (1 + b * b) + std::sqrt(std::fabs(a - b));
  EXPECT_DOUBLE_EQ(at(e, {a, b}), want);
  EXPECT_EQ(at(parse_expr("min(x1, x2) + max(x1, x2)"), {3.0, -2.0}), 1.0);
  EXPECT_EQ(at(parse_expr("x1^(-2)"), {2.0}), 0.25);
}

TEST(ExprEvaluate, KinkAndDimensionErrors) {
  const Expr d = partial(parse_expr("abs(x1)"), 0);
  EXPECT_EQ(at(d, {2.0}), 1.0);
  EXPECT_EQ(at(d, {-2.0}), -1.0);
  try {
    at(d, {0.0});
    FAIL() << "kink not reported";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::KinkEvaluation);
  }
  try {
    at(parse_expr("x3"), {1.0, 2.0});
    FAIL() << "short point accepted";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DimensionMismatch);
  }
}

TEST(ExprParse, RejectsUnknownFunctionsAndBadVariables) {
  auto kind_of = [](std::string_view text, int dim) {
    try {
      parse_expr(text, dim);
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::InvalidArgument;
  };
  EXPECT_EQ(kind_of("tanh(x1)", 2), ErrorKind::Parse);
  EXPECT_EQ(kind_of("x3 + 1", 2), ErrorKind::Parse);
  EXPECT_EQ(kind_of("x0", 2), ErrorKind::Parse);
  EXPECT_EQ(kind_of("x1^1.5", 2), ErrorKind::Parse);
  EXPECT_EQ(kind_of("(x1 + 2", 2), ErrorKind::Parse);
  EXPECT_EQ(kind_of("min(x1)", 2), ErrorKind::Parse);
}

TEST(ExprDerivative, HandComputedCases) {
  const Expr e = parse_expr("x1^3 * x2 + sin(x1 * x2)");
  const double a = 0.4, b = 1.7;
  EXPECT_DOUBLE_EQ(at(partial(e, 0), {a, b}), 3 * a * a * b + b * std::cos(a * b));
  EXPECT_DOUBLE_EQ(at(partial(e, 1), {a, b}), a * a * a + a * std::cos(a * b));
  EXPECT_TRUE(partial(e, 2).is_constant(0.0));
  const Expr m = parse_expr("max(x1, 2*x2)");
  EXPECT_EQ(at(partial(m, 0), {3.0, 1.0}), 1.0);
  EXPECT_EQ(at(partial(m, 1), {3.0, 1.0}), 0.0);
  EXPECT_EQ(at(partial(m, 1), {1.0, 3.0}), 2.0);
}

// Property: symbolic partials agree with central differences wherever the
// expression is smooth (kink arguments away from zero).
TEST(ExprProperty, PartialsMatchCentralDifferences) {
  Gen gen(11);
  int checked = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const Expr e = trial % 2 ? gen.smooth_expr(3, 4) : gen.kinked_expr(3, 3);
    const Vec x = gen.point(3, -1.5, 1.5);
    const std::vector<double> xs(x.data(), x.data() + 3);
    for (int v = 0; v < 3; ++v) {
      double exact;
      try {
        exact = evaluate(partial(e, v), xs);
      } catch (const Error&) {
        continue;
      }
      const double h = 1e-6;
      std::vector<double> hi = xs, lo = xs;
      hi[v] += h;
      lo[v] -= h;
      const double fd = (evaluate(e, hi) - evaluate(e, lo)) / (2 * h);
      const double scale = 1.0 + std::fabs(exact);
      // A kink inside [x-h, x+h] spoils the difference quotient, not the partial.
      if (e.has_kinks() && std::fabs(fd - exact) > 1e-6 * scale) continue;
      EXPECT_NEAR(fd, exact, 1e-6 * scale) << to_string(e) << " d/dx" << v + 1;
      ++checked;
    }
  }
  EXPECT_GT(checked, 600);
}

TEST(ExprProperty, PrintParseRoundTrip) {
  Gen gen(12);
  for (int trial = 0; trial < 400; ++trial) {
    const Expr e = trial % 3 ? gen.kinked_expr(3, 4) : partial(gen.kinked_expr(3, 3), trial % 3);
    const std::string text = to_string(e);
    const Expr back = parse_expr(text, 3);
    EXPECT_TRUE(structurally_equal(back, e)) << text << "  reparsed as  " << to_string(back);
    EXPECT_EQ(to_string(back), text);
  }
}

TEST(ExprProperty, SubstituteReplacesEveryOccurrence) {
  const Expr x1 = Expr::variable(0), x2 = Expr::variable(1);
  const Expr e = abs(x1 - x2) * sin(abs(x1 - x2));
  const Expr s = substitute(e, abs(x1 - x2), x2 - x1);
  EXPECT_FALSE(s.has_kinks());
  EXPECT_DOUBLE_EQ(at(s, {0.2, 0.9}), 0.7 * std::sin(0.7));
}

}  // namespace
}  // namespace lieclf
