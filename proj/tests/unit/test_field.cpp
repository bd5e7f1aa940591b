#include <gtest/gtest.h>

#include <cmath>

#include "lieclf/field.hpp"
#include "support.hpp"

namespace lieclf {
namespace {

using testing::Gen;
using testing::field;
using testing::vec;

TEST(VectorField, EvaluatesComponentsAndJacobian) {
  const VectorFieldDef f = field(3, {"1", "0", "-x2"});
  EXPECT_EQ(f.eval(vec({0.3, 0.7, 9.0})), vec({1.0, 0.0, -0.7}));
  const Mat j = f.jacobian(vec({0.3, 0.7, 9.0}));
  Mat want = Mat::Zero(3, 3);
  want(2, 1) = -1.0;
  EXPECT_EQ(j, want);
  EXPECT_TRUE(VectorFieldDef::zero(3).is_zero());
  EXPECT_FALSE(f.is_zero());
}

TEST(VectorField, RejectsWrongLengthAndBadVariables) {
  try {
    field(3, {"1", "0"});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DimensionMismatch);
  }
  EXPECT_THROW(field(2, {"x3", "0"}), Error);
}

TEST(VectorField, EvaluationAtKinkThrows) {
  const VectorFieldDef f = field(2, {"abs(x1)", "1"});
  EXPECT_EQ(f.eval(vec({-2.0, 0.0})), vec({2.0, 1.0}));
  try {
    f.jacobian(vec({0.0, 1.0}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::KinkEvaluation);
  }
}

// Property: symbolic Jacobians agree with central differences.
TEST(VectorFieldProperty, JacobianMatchesFiniteDifferences) {
  Gen gen(31);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Expr> comps;
    for (int c = 0; c < 3; ++c) comps.push_back(gen.smooth_expr(3, 3));
    const VectorFieldDef f(3, comps);
    const Vec x = gen.point(3, -1.0, 1.0);
    const double scale = 1.0 + f.jacobian(x).cwiseAbs().maxCoeff();
    EXPECT_LE(fd_check(f, x, 1e-5), 1e-6 * scale) << f.str();
  }
}

TEST(LieBracket, NonholonomicIsConstant) {
  const VectorFieldDef f1 = field(3, {"1", "0", "-x2"});
  const VectorFieldDef f2 = field(3, {"0", "1", "x1"});
  const VectorFieldDef b = lie_bracket(f1, f2);
  Gen gen(32);
  for (int i = 0; i < 20; ++i) EXPECT_EQ(b.eval(gen.point(3, -5, 5)), vec({0, 0, 2}));
}

TEST(PiecewiseField, DecomposeKinksSplitsEverySign) {
  const VectorFieldDef f = field(3, {"1", "0", "abs(x2) - 2*x2"});
  const PiecewiseVectorFieldDef pw = PiecewiseVectorFieldDef::decompose_kinks(f);
  ASSERT_EQ(pw.pieces().size(), 2u);
  for (const Piece& piece : pw.pieces()) EXPECT_FALSE(piece.field.has_kinks());
  Gen gen(33);
  for (int i = 0; i < 50; ++i) {
    const Vec x = gen.point(3, -2, 2);
    EXPECT_EQ(pw.eval(x), f.eval(x));
  }
  // Two kinks give up to four sign patterns.
  const VectorFieldDef g = field(2, {"abs(x1)", "max(x1, x2)"});
  EXPECT_EQ(PiecewiseVectorFieldDef::decompose_kinks(g).pieces().size(), 4u);
}

TEST(PiecewiseField, BoundaryPointsBelongToBothPieces) {
  const PiecewiseVectorFieldDef pw = PiecewiseVectorFieldDef::decompose_kinks(field(2, {"abs(x1)", "0"}));
  const Vec on = vec({0.0, 1.0});
  EXPECT_EQ(pw.pieces_containing(as_span(on)).size(), 2u);
  const Vec near = vec({1e-13, 1.0});
  EXPECT_EQ(pw.pieces_containing(as_span(near)).size(), 2u);
  const Vec right = vec({0.5, 1.0});
  ASSERT_EQ(pw.pieces_containing(as_span(right)).size(), 1u);
  const int owner = pw.owning_piece(as_span(right));
  EXPECT_EQ(pw.pieces()[static_cast<std::size_t>(owner)].field.eval(right), vec({0.5, 0.0}));
  const Vec left = vec({-0.5, 1.0});
  EXPECT_EQ(pw.eval(left), vec({0.5, 0.0}));
}

TEST(PiecewiseField, SmoothIsOneUnguardedPiece) {
  const PiecewiseVectorFieldDef pw = PiecewiseVectorFieldDef::smooth(field(2, {"x2", "-x1"}));
  ASSERT_EQ(pw.pieces().size(), 1u);
  EXPECT_TRUE(pw.pieces()[0].guards.empty());
  EXPECT_EQ(pw.eval(vec({1.0, 2.0})), vec({2.0, -1.0}));
}

}  // namespace
}  // namespace lieclf
