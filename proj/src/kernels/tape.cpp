#include "lieclf/kernels/tape.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <string>

#include "lieclf/errors.hpp"
#include "lieclf/kernels/scalar_ops.hpp"

namespace lieclf {

std::size_t Tape::KeyHash::operator()(const Key& k) const noexcept {
  std::size_t h = static_cast<std::size_t>(k.op);
  auto mix = [&h](std::uint64_t v) { h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2); };
  mix(static_cast<std::uint32_t>(k.a));
  mix(static_cast<std::uint32_t>(k.b));
  mix(static_cast<std::uint32_t>(k.index));
  mix(k.bits);
  return h;
}

Tape::Tape(int dim) : dim_(dim) {
  if (dim <= 0) throw Error(ErrorKind::InvalidArgument, "tape dimension must be positive");
}

std::size_t Tape::add_output(const Expr& e) {
  if (e.max_variable() >= dim_) {
    throw Error(ErrorKind::DimensionMismatch, "expression references a variable beyond the tape dimension");
  }
  outputs_.push_back(emit(e));
  pinned_.push_back(e);
  return outputs_.size() - 1;
}

std::int32_t Tape::emit(const Expr& e) {
  if (auto it = by_node_.find(e.id()); it != by_node_.end()) return it->second;
  Instr ins{e.op()};
  if (e.op() == Op::Const) ins.value = e.value();
  if (e.op() == Op::Var || e.op() == Op::Pow) ins.index = e.index();
  if (e.arity() >= 1) ins.a = emit(e.lhs());
  if (e.arity() == 2) ins.b = emit(e.rhs());
  const Key key{ins.op, ins.a, ins.b, ins.index, std::bit_cast<std::uint64_t>(ins.value)};
  std::int32_t slot;
  if (auto it = by_value_.find(key); it != by_value_.end()) {
    slot = it->second;
  } else {
    slot = static_cast<std::int32_t>(code_.size());
    code_.push_back(ins);
    by_value_.emplace(key, slot);
  }
  by_node_.emplace(e.id(), slot);
  return slot;
}

bool eval_tape(const Tape& tape, std::span<const double> x, std::span<double> out,
               std::vector<double>& slots) {
  if (x.size() < static_cast<std::size_t>(tape.dim())) {
    throw Error(ErrorKind::DimensionMismatch, "point shorter than tape dimension");
  }
  const auto code = tape.code();
  slots.resize(code.size());
  bool kink = false;
  for (std::size_t s = 0; s < code.size(); ++s) {
    const Instr& in = code[s];
    const double a = in.a >= 0 ? slots[in.a] : 0.0;
    const double b = in.b >= 0 ? slots[in.b] : 0.0;
    double v = 0.0;
    switch (in.op) {
      case Op::Const: v = in.value; break;
      case Op::Var: v = x[in.index]; break;
      case Op::Add: v = a + b; break;
      case Op::Sub: v = a - b; break;
      case Op::Mul: v = a * b; break;
      case Op::Div: v = a / b; break;
      case Op::Pow: v = ops::ipow(a, in.index); break;
      case Op::Neg: v = -a; break;
      case Op::Sin: v = std::sin(a); break;
      case Op::Cos: v = std::cos(a); break;
      case Op::Exp: v = std::exp(a); break;
      case Op::Sqrt: v = std::sqrt(a); break;
      case Op::Abs: v = std::fabs(a); break;
      case Op::Min: v = ops::fmin2(a, b); break;
      case Op::Max: v = ops::fmax2(a, b); break;
      case Op::Sign: kink |= ops::is_kink(a); v = ops::sign(a); break;
      case Op::Step: kink |= ops::is_kink(a); v = ops::step(a); break;
      case Op::Guard: kink |= ops::is_kink(a); v = b; break;
    }
    slots[s] = v;
  }
  const auto outputs = tape.outputs();
  for (std::size_t o = 0; o < outputs.size(); ++o) out[o] = slots[outputs[o]];
  return kink;
}

namespace detail {

namespace {
constexpr std::size_t kBlock = 64;
}

void eval_tape_batch_scalar(const Tape& tape, const BatchView& view) {
  const auto code = tape.code();
  const auto outputs = tape.outputs();
  thread_local std::vector<double> work;
  work.resize(code.size() * kBlock);
  for (std::size_t base = 0; base < view.n; base += kBlock) {
    const std::size_t len = std::min(kBlock, view.n - base);
    std::uint8_t kink[kBlock] = {};
    for (std::size_t s = 0; s < code.size(); ++s) {
      const Instr& in = code[s];
      double* dst = &work[s * kBlock];
      const double* a = in.a >= 0 ? &work[static_cast<std::size_t>(in.a) * kBlock] : nullptr;
      const double* b = in.b >= 0 ? &work[static_cast<std::size_t>(in.b) * kBlock] : nullptr;
      for (std::size_t i = 0; i < len; ++i) {
        double v = 0.0;
        switch (in.op) {
          case Op::Const: v = in.value; break;
          case Op::Var: v = view.x[static_cast<std::size_t>(in.index) * view.x_stride + base + i]; break;
          case Op::Add: v = a[i] + b[i]; break;
          case Op::Sub: v = a[i] - b[i]; break;
          case Op::Mul: v = a[i] * b[i]; break;
          case Op::Div: v = a[i] / b[i]; break;
          case Op::Pow: v = ops::ipow(a[i], in.index); break;
          case Op::Neg: v = -a[i]; break;
          case Op::Sin: v = std::sin(a[i]); break;
          case Op::Cos: v = std::cos(a[i]); break;
          case Op::Exp: v = std::exp(a[i]); break;
          case Op::Sqrt: v = std::sqrt(a[i]); break;
          case Op::Abs: v = std::fabs(a[i]); break;
          case Op::Min: v = ops::fmin2(a[i], b[i]); break;
          case Op::Max: v = ops::fmax2(a[i], b[i]); break;
          case Op::Sign: kink[i] |= ops::is_kink(a[i]); v = ops::sign(a[i]); break;
          case Op::Step: kink[i] |= ops::is_kink(a[i]); v = ops::step(a[i]); break;
          case Op::Guard: kink[i] |= ops::is_kink(a[i]); v = b[i]; break;
        }
        dst[i] = v;
      }
    }
    for (std::size_t o = 0; o < outputs.size(); ++o) {
      std::memcpy(view.out + o * view.out_stride + base, &work[static_cast<std::size_t>(outputs[o]) * kBlock],
                  len * sizeof(double));
    }
    if (view.kink != nullptr) std::memcpy(view.kink + base, kink, len);
  }
}

void dot_batch_scalar(const double* a, std::size_t a_stride, const double* b, std::size_t b_stride,
                      int dim, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    double acc = a[i] * b[i];
    for (int v = 1; v < dim; ++v) {
      acc = acc + a[static_cast<std::size_t>(v) * a_stride + i] * b[static_cast<std::size_t>(v) * b_stride + i];
    }
    out[i] = acc;
  }
}

void min_accumulate_scalar(double* acc, const double* d, bool symmetric, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double c = symmetric ? -std::fabs(d[i]) : d[i];
    acc[i] = ops::fmin2(acc[i], c);
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------

namespace {

std::atomic<int> g_forced{-1};

Isa detect() {
#ifdef LIECLF_HAVE_AVX2
  __builtin_cpu_init();
  if (__builtin_cpu_supports("avx2")) return Isa::Avx2;
#endif
  return Isa::Scalar;
}

}  // namespace

std::string_view isa_name(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

bool isa_available(Isa isa) {
  if (isa == Isa::Scalar) return true;
  static const Isa best = detect();
  return best == Isa::Avx2;
}

void force_isa(Isa isa) {
  if (!isa_available(isa)) {
    throw Error(ErrorKind::InvalidArgument, std::string("ISA not available: ") + std::string(isa_name(isa)));
  }
  g_forced.store(static_cast<int>(isa));
}

void clear_forced_isa() { g_forced.store(-1); }

Isa active_isa() {
  const int forced = g_forced.load();
  if (forced >= 0) return static_cast<Isa>(forced);
  static const Isa chosen = [] {
    const Isa best = detect();
    if (const char* env = std::getenv("LIECLF_ISA"); env != nullptr) {
      if (std::string_view(env) == "scalar") return Isa::Scalar;
    }
    return best;
  }();
  return chosen;
}

void eval_tape_batch(const Tape& tape, const BatchView& view) {
#ifdef LIECLF_HAVE_AVX2
  if (active_isa() == Isa::Avx2) return detail::eval_tape_batch_avx2(tape, view);
#endif
  detail::eval_tape_batch_scalar(tape, view);
}

void dot_batch(const double* a, std::size_t a_stride, const double* b, std::size_t b_stride, int dim,
               double* out, std::size_t n) {
#ifdef LIECLF_HAVE_AVX2
  if (active_isa() == Isa::Avx2) return detail::dot_batch_avx2(a, a_stride, b, b_stride, dim, out, n);
#endif
  detail::dot_batch_scalar(a, a_stride, b, b_stride, dim, out, n);
}

void min_accumulate(double* acc, const double* d, bool symmetric, std::size_t n) {
#ifdef LIECLF_HAVE_AVX2
  if (active_isa() == Isa::Avx2) return detail::min_accumulate_avx2(acc, d, symmetric, n);
#endif
  detail::min_accumulate_scalar(acc, d, symmetric, n);
}

}  // namespace lieclf
