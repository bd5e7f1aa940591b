#include <gtest/gtest.h>

#include <cmath>

#include "lieclf/certify.hpp"
#include "support.hpp"

namespace lieclf {
namespace {

using testing::Gen;
using testing::vec;

TEST(MonotoneTable, InterpolatesAndClampsBeyondRange) {
  const MonotoneTable t = MonotoneTable::from_points({{1, 2}, {3, 3}});
  EXPECT_EQ(t(0.5), 1.0);
  EXPECT_EQ(t(2.0), 2.5);
  bool extra = false;
  EXPECT_EQ(t(3.0, &extra), 3.0);
  EXPECT_FALSE(extra);
  EXPECT_EQ(t(7.0, &extra), 3.0);
  EXPECT_TRUE(extra);
  EXPECT_EQ(t(-1.0), 0.0);
  EXPECT_EQ(MonotoneTable::identity()(2.5), 2.5);
}

TEST(MonotoneTable, RejectsNonMonotoneInput) {
  for (const auto& pts : std::vector<std::vector<std::pair<double, double>>>{
           {{1, 1}, {1, 2}}, {{1, 1}, {2, 1}}, {{1, 2}, {2, 1}}, {}}) {
    try {
      MonotoneTable::from_points(pts);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::NonMonotoneInput);
    }
  }
}

// Property: bisection inverses agree with the forward tables to 1e-10.
TEST(MonotoneTableProperty, InverseRoundTrip) {
  Gen gen(81);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::pair<double, double>> pts;
    double u = 0, v = 0;
    for (int i = 0; i < gen.integer(1, 12); ++i) {
      u += gen.uniform(0.01, 1.0);
      v += gen.uniform(0.01, 1.0);
      pts.emplace_back(u, v);
    }
    const MonotoneTable t = MonotoneTable::from_points(pts);
    for (int i = 0; i < 20; ++i) {
      const double x = gen.uniform(0, u);
      EXPECT_NEAR(t.inverse(t(x)), x, 1e-10);
      const double y = gen.uniform(0, v);
      EXPECT_NEAR(t(t.inverse(y)), y, 1e-10);
    }
  }
  const auto cubic = [](double x) { return x * x * x + x; };
  for (double x : {0.0, 0.1, 0.77, 1.9}) EXPECT_NEAR(invert_increasing(cubic, cubic(x), 2.0, nullptr), x, 1e-10);
  bool extra = false;
  EXPECT_EQ(invert_increasing(cubic, 100.0, 2.0, &extra), 2.0);
  EXPECT_TRUE(extra);
}

KLInputs flat_inputs(double c, double tau) {
  KLInputs in;
  in.gamma = GammaFn({{0, 0}, {0.01, c}});  // constant c from u = 0.01 on
  in.tau = MonotoneTable::from_points({{0.01, tau}});
  in.r_k = 4;
  in.k = 2;
  in.distance = {MonotoneTable::identity(), MonotoneTable::identity()};
  in.field_bound = 2.0;
  in.u_max = 5.0;
  return in;
}

TEST(KLFunction, ScaledMarginForConstantInputs) {
  const KLFunction kl(flat_inputs(0.8, 0.5));
  EXPECT_DOUBLE_EQ(kl.gamma_tilde(2.0), 0.8 * 0.5 / 32);
  EXPECT_DOUBLE_EQ(kl.gamma_hat(2.0), 0.8 * 0.5 / 32);
  EXPECT_DOUBLE_EQ(kl.gamma_hat(0.001), (0.1 * 0.8) * (0.1 * 0.5) / 32);  // both ramps at 1/10
  EXPECT_EQ(kl.delta_hat_minus(0.3), 0.3);
  EXPECT_EQ(kl.delta_hat_minus_inverse(0.3), 0.3);
  EXPECT_EQ(kl.tau_max(1.0), 0.25);
  EXPECT_EQ(kl.tau_max(10.0), 1.0);
}

TEST(KLFunction, ValidatesInputs) {
  KLInputs in = flat_inputs(0.8, 0.5);
  in.field_bound = 0;
  EXPECT_THROW(KLFunction{in}, Error);
  in = flat_inputs(0.8, 0.5);
  in.k = 0;
  EXPECT_THROW(KLFunction{in}, Error);
}

TEST(KLFunction, ClassKLShape) {
  const KLFunction kl(flat_inputs(0.8, 0.5));
  for (double s : {0.0, 1.0, 10.0}) EXPECT_EQ(kl.beta(0.0, s), 0.0);
  const std::vector<double> deltas{0.05, 0.1, 0.5, 1.0, 2.0};
  const std::vector<double> ss{0.0, 0.5, 1.0, 4.0, 20.0, 200.0, 2000.0};
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    EXPECT_GE(kl.beta(deltas[i], 0.0), deltas[i]);
    for (std::size_t j = 0; j < ss.size(); ++j) {
      if (i > 0) {
        EXPECT_GT(kl.beta(deltas[i], ss[j]), kl.beta(deltas[i - 1], ss[j]));
      }
      if (j > 0) {
        EXPECT_LE(kl.beta(deltas[i], ss[j]), kl.beta(deltas[i], ss[j - 1]));
      }
    }
    EXPECT_LT(kl.beta(deltas[i], 1e6), 1e-3 * kl.beta(deltas[i], 0.0));
  }
}

TEST(KLFunction, BetaTableGrid) {
  const KLFunction kl(flat_inputs(0.8, 0.5));
  const auto rows = beta_table(kl, 2.0, 10.0, 5, 3);
  ASSERT_EQ(rows.size(), 24u);  // 5 x 3 intervals, endpoints included
  EXPECT_EQ(rows.front().delta, 0.0);
  EXPECT_EQ(rows.back().delta, 2.0);
  EXPECT_EQ(rows.back().s, 10.0);
  for (const BetaRow& row : rows) EXPECT_EQ(row.beta, kl.beta(row.delta, row.s));
}

TEST(Envelope, EmptyTrajectoryIsVacuous) {
  const KLFunction kl(flat_inputs(0.8, 0.5));
  const TargetDef target(Ball{vec({0, 0, 0}), 0.25});
  const EnvelopeReport rep = check_envelope(Trajectory{}, kl, target);
  EXPECT_EQ(rep.samples, 0u);
  EXPECT_EQ(rep.max_violation, 0.0);
}

TEST(TauTable, EmptyTrajectoryHasNoSample) {
  try {
    tau_lower_table(Trajectory{}, 1.0, 8);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptySample);
  }
}

TEST(DistanceTables, IdentityOnlyForMatchingBall) {
  const TargetDef target(Ball{vec({0, 0}), 0.5});
  EXPECT_TRUE(candidate_is_distance(CLFCandidate::distance_to_ball(vec({0, 0}), 0.5), target));
  EXPECT_FALSE(candidate_is_distance(CLFCandidate::distance_to_ball(vec({0, 0}), 0.25), target));
  // U = |x|^2 on the unit-radius ball: d = sqrt(U) - 0.5 on every level set.
  const CLFCandidate u = CLFCandidate::smooth(2, parse_expr("x1^2 + x2^2", 2));
  std::vector<Vec> samples;
  Gen gen(82);
  for (int i = 0; i < 4000; ++i) {
    const Vec x = gen.point(2, -2, 2);
    if (target.distance(x) > 0 && u.value(x) <= 4.0) samples.push_back(x);
  }
  const LevelDistanceTables t = level_distance_tables(u, target, samples, 4.0, 16);
  EXPECT_FALSE(t.lower.is_identity());
  for (double level : {0.5, 1.0, 2.0, 3.5}) {
    EXPECT_LE(t.lower(level), std::sqrt(level) - 0.5 + 1e-12);
    EXPECT_GE(t.upper(level), std::sqrt(level) - 0.5 - 0.1);
  }
}

// One end-to-end certificate; the run takes about a second.
TEST(Certificate, NonholonomicRunStaysUnderEnvelope) {
  const Problem pb(testing::fixture_config("nonholonomic"));
  const SynthesisOptions opt = build_synthesis_options(pb.config);
  const CertifiedRun run = certified_run(pb, vec({0, 0, 2}), opt);
  EXPECT_LE(run.envelope.max_violation, 1e-9);
  EXPECT_GT(run.envelope.samples, 0u);
  EXPECT_TRUE(run.envelope.speed_within_bound);
  EXPECT_FALSE(run.envelope.extrapolated);
  const KLFunction& kl = run.kl;
  const double d0 = run.trajectory.checkpoints.front().d;
  EXPECT_GE(kl.beta(d0, 0.0), d0);
  // Recorded durations bound the tau table from above at each starting level.
  const auto& cps = run.trajectory.checkpoints;
  for (std::size_t j = 1; j < cps.size(); ++j) EXPECT_GE(cps[j].t, kl.inputs().tau(cps[j - 1].u)) << j;
  double prev = kl.beta(d0, 0.0);
  for (double s = 1.0; s <= 64.0; s *= 2) {
    const double b = kl.beta(d0, s);
    EXPECT_LE(b, prev);
    prev = b;
  }
}

}  // namespace
}  // namespace lieclf
