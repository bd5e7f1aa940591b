#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <cstdint>

#include "lieclf/hamiltonian.hpp"
#include "lieclf/kernels/tape.hpp"
#include "support.hpp"

namespace lieclf {
namespace {

using testing::Gen;

std::uint64_t bits(double v) { return std::bit_cast<std::uint64_t>(v); }

// With two NaN operands the surviving payload depends on operand order,
// which the compiler may swap for commutative ops. NaNs compare as a class.
std::uint64_t canonical(double v) { return std::isnan(v) ? 0x7ff8000000000000ull : bits(v); }

struct Batch {
  std::vector<double> x, out;
  std::vector<std::uint8_t> kink;
  std::size_t n;
  BatchView view(int dim, std::size_t outputs) {
    out.assign(outputs * n, 0.0);
    kink.assign(n, 7);
    (void)dim;
    return {x.data(), n, out.data(), n, kink.data(), n};
  }
};

Batch random_batch(Gen& gen, int dim, std::size_t n) {
  Batch b;
  b.n = n;
  b.x.resize(static_cast<std::size_t>(dim) * n);
  for (double& v : b.x) v = gen.uniform(-2.0, 2.0);
  // A few points sit exactly on kinks of abs(x1) / min(x1, x2).
  for (std::size_t i = 0; i < n; i += 17) b.x[i] = 0.0;
  for (std::size_t i = 5; i < n; i += 23) b.x[n + i] = b.x[i];
  return b;
}

Tape random_tape(Gen& gen, int dim, int outputs) {
  Tape tape(dim);
  for (int o = 0; o < outputs; ++o) {
    Expr e = gen.kinked_expr(dim, 4);
    if (o % 2) e = partial(e, o % dim);  // sign/step/guard nodes
    tape.add_output(e);
  }
  tape.add_output(abs(Expr::variable(0)));
  tape.add_output(partial(min(Expr::variable(0), Expr::variable(1)), 0));
  return tape;
}

// The scalar tape kernel is the reference for every other evaluator.
TEST(TapeKernel, ScalarTapeMatchesTreeWalkBitForBit) {
  Gen gen(21);
  for (int trial = 0; trial < 60; ++trial) {
    std::vector<Expr> exprs;
    Tape tape(3);
    for (int o = 0; o < 4; ++o) {
      exprs.push_back(o % 2 ? partial(gen.kinked_expr(3, 4), o % 3) : gen.kinked_expr(3, 4));
      tape.add_output(exprs.back());
    }
    std::vector<double> slots, out(exprs.size());
    for (int p = 0; p < 20; ++p) {
      const Vec x = gen.point(3, -2.0, 2.0);
      const std::vector<double> xs(x.data(), x.data() + 3);
      const bool kink = eval_tape(tape, xs, out, slots);
      bool tree_kink = false;
      for (std::size_t o = 0; o < exprs.size(); ++o) {
        try {
          const double want = evaluate(exprs[o], xs);
          if (!kink) {
            EXPECT_EQ(canonical(out[o]), canonical(want)) << to_string(exprs[o]);
          }
        } catch (const Error& e) {
          EXPECT_EQ(e.kind(), ErrorKind::KinkEvaluation);
          tree_kink = true;
        }
      }
      EXPECT_EQ(kink, tree_kink);
    }
  }
}

TEST(TapeKernel, CommonSubexpressionsShareSlots) {
  const Expr a = parse_expr("sin(x1 * x2) + x1");
  const Expr b = parse_expr("sin(x1 * x2) * 2");
  Tape tape(2);
  tape.add_output(a);
  const std::size_t before = tape.slot_count();
  tape.add_output(b);
  EXPECT_EQ(tape.slot_count(), before + 2);  // only the constant and the product are new
}

// Outputs built from temporaries: freed nodes must not alias later ones.
TEST(TapeKernel, TemporaryOutputsKeepDistinctSlots) {
  const Expr e = parse_expr("sqrt(x1^2 + x2^2)", 3);
  Tape tape(3);
  tape.add_output(e);
  for (int j = 0; j < 3; ++j) tape.add_output(partial(e, j));
  const std::vector<double> x{0.3, 0.4, 0.0};
  std::vector<double> slots, out(4);
  eval_tape(tape, x, out, slots);
  EXPECT_EQ(out[0], 0.5);
  EXPECT_DOUBLE_EQ(out[1], 0.6);
  EXPECT_DOUBLE_EQ(out[2], 0.8);
  EXPECT_EQ(out[3], 0.0);
}

TEST(TapeKernel, BatchScalarMatchesPointwise) {
  Gen gen(22);
  const Tape tape = random_tape(gen, 3, 6);
  const std::size_t outs = tape.outputs().size();
  for (std::size_t n : {1u, 3u, 4u, 63u, 64u, 65u, 200u}) {
    Batch b = random_batch(gen, 3, n);
    detail::eval_tape_batch_scalar(tape, b.view(3, outs));
    std::vector<double> slots, out(outs), xs(3);
    for (std::size_t i = 0; i < n; ++i) {
      for (int v = 0; v < 3; ++v) xs[static_cast<std::size_t>(v)] = b.x[static_cast<std::size_t>(v) * n + i];
      const bool kink = eval_tape(tape, xs, out, slots);
      EXPECT_EQ(b.kink[i], kink ? 1 : 0);
      for (std::size_t o = 0; o < outs; ++o) EXPECT_EQ(canonical(b.out[o * n + i]), canonical(out[o]));
    }
  }
}

#ifdef LIECLF_HAVE_AVX2
class Avx2Kernels : public ::testing::Test {
 protected:
  void SetUp() override {
    if (!isa_available(Isa::Avx2)) GTEST_SKIP() << "CPU without AVX2";
  }
};

TEST_F(Avx2Kernels, TapeBatchBitIdenticalToScalar) {
  Gen gen(23);
  for (int trial = 0; trial < 40; ++trial) {
    const Tape tape = random_tape(gen, 3, 5);
    const std::size_t outs = tape.outputs().size();
    for (std::size_t n : {1u, 2u, 4u, 5u, 7u, 8u, 33u, 64u, 129u}) {
      Batch s = random_batch(gen, 3, n);
      Batch v = s;
      detail::eval_tape_batch_scalar(tape, s.view(3, outs));
      detail::eval_tape_batch_avx2(tape, v.view(3, outs));
      ASSERT_EQ(s.kink, v.kink);
      for (std::size_t i = 0; i < s.out.size(); ++i) ASSERT_EQ(canonical(s.out[i]), canonical(v.out[i])) << "slot " << i;
    }
  }
}

TEST_F(Avx2Kernels, ReductionsBitIdenticalToScalar) {
  Gen gen(24);
  for (std::size_t n : {1u, 3u, 4u, 9u, 100u, 257u}) {
    const int dim = 3;
    std::vector<double> a(dim * n), b(dim * n), out_s(n), out_v(n);
    for (double& x : a) x = gen.uniform(-3, 3);
    for (double& x : b) x = gen.uniform(-3, 3);
    detail::dot_batch_scalar(a.data(), n, b.data(), n, dim, out_s.data(), n);
    detail::dot_batch_avx2(a.data(), n, b.data(), n, dim, out_v.data(), n);
    for (std::size_t i = 0; i < n; ++i) ASSERT_EQ(bits(out_s[i]), bits(out_v[i]));
    for (bool symmetric : {false, true}) {
      std::vector<double> acc_s(n), acc_v, d(n);
      for (std::size_t i = 0; i < n; ++i) {
        acc_s[i] = i % 5 == 0 ? std::numeric_limits<double>::infinity() : gen.uniform(-2, 2);
        d[i] = i % 7 == 0 ? 0.0 : gen.uniform(-2, 2);
      }
      acc_v = acc_s;
      detail::min_accumulate_scalar(acc_s.data(), d.data(), symmetric, n);
      detail::min_accumulate_avx2(acc_v.data(), d.data(), symmetric, n);
      for (std::size_t i = 0; i < n; ++i) ASSERT_EQ(bits(acc_s[i]), bits(acc_v[i]));
    }
  }
}

// End to end: batched Hamiltonians on either ISA equal the pointwise path.
TEST_F(Avx2Kernels, BatchedHamiltonianIdenticalAcrossIsas) {
  Gen gen(25);
  for (const char* name : {"nonholonomic", "es2", "bump_shells", "softlanding"}) {
    const Problem pb(testing::fixture_config(name));
    const int n = pb.system.dim();
    const std::size_t count = 101;
    std::vector<double> x(n * count), p(n * count);
    for (double& v : x) v = gen.uniform(-2, 2);
    for (double& v : p) v = gen.uniform(-1, 1);
    for (std::size_t i = 0; i < count; i += 10) x[n == 2 ? count + i : i] = 0.0;  // still drift on some points
    for (int h = 1; h <= pb.system.k(); ++h) {
      std::vector<double> hs(count), hv(count);
      force_isa(Isa::Scalar);
      hamiltonian_batch(pb.system, h, x.data(), p.data(), count, hs.data());
      force_isa(Isa::Avx2);
      hamiltonian_batch(pb.system, h, x.data(), p.data(), count, hv.data());
      clear_forced_isa();
      for (std::size_t i = 0; i < count; ++i) {
        ASSERT_EQ(bits(hs[i]), bits(hv[i])) << name << " h=" << h << " i=" << i;
        Vec xi(n), pi(n);
        for (int v = 0; v < n; ++v) {
          xi[v] = x[static_cast<std::size_t>(v) * count + i];
          pi[v] = p[static_cast<std::size_t>(v) * count + i];
        }
        ASSERT_EQ(bits(hs[i]), bits(hamiltonian(pb.system, h, xi, pi))) << name << " h=" << h << " i=" << i;
      }
    }
  }
}
#endif

TEST(IsaDispatch, ForcedScalarIsHonoured) {
  force_isa(Isa::Scalar);
  EXPECT_EQ(active_isa(), Isa::Scalar);
  clear_forced_isa();
  EXPECT_TRUE(isa_available(Isa::Scalar));
  EXPECT_EQ(isa_name(Isa::Avx2), "avx2");
}

}  // namespace
}  // namespace lieclf
