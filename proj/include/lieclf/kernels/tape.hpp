#pragma once

// Straight-line compilation of expression DAGs. Every instruction writes the
// slot equal to its own position; operands always refer to earlier slots.
// Identical subexpressions across all outputs share one slot.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "lieclf/expr.hpp"

namespace lieclf {

struct Instr {
  Op op;
  std::int32_t a = -1;
  std::int32_t b = -1;
  double value = 0.0;      // Const
  std::int32_t index = 0;  // variable index (Var) or exponent (Pow)
};

class Tape {
 public:
  explicit Tape(int dim);

  /// Appends `e` as a new output and returns its output position.
  std::size_t add_output(const Expr& e);

  int dim() const noexcept { return dim_; }
  std::span<const Instr> code() const noexcept { return code_; }
  std::span<const std::int32_t> outputs() const noexcept { return outputs_; }
  std::size_t slot_count() const noexcept { return code_.size(); }

 private:
  std::int32_t emit(const Expr& e);

  struct Key {
    Op op;
    std::int32_t a, b, index;
    std::uint64_t bits;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept;
  };

  int dim_;
  std::vector<Instr> code_;
  std::vector<std::int32_t> outputs_;
  // Keyed by node address, so the roots are pinned to keep addresses unique.
  std::vector<Expr> pinned_;
  std::unordered_map<const void*, std::int32_t> by_node_;
  std::unordered_map<Key, std::int32_t, KeyHash> by_value_;
};

/// Reference tape kernel for one point. Returns true if any sign/step/guard
/// argument was exactly zero; outputs are still written in that case.
bool eval_tape(const Tape& tape, std::span<const double> x, std::span<double> out,
               std::vector<double>& slots);

/// Structure-of-arrays batch evaluation: variable v of point i is
/// x[v * x_stride + i], output o of point i goes to out[o * out_stride + i].
/// kink[i] is set to 1 when point i hit a kink, 0 otherwise.
struct BatchView {
  const double* x;
  std::size_t x_stride;
  double* out;
  std::size_t out_stride;
  std::uint8_t* kink;
  std::size_t n;
};

void eval_tape_batch(const Tape& tape, const BatchView& view);

/// Per-point dot products over `dim` SoA rows: out[i] = sum_v a[v][i]*b[v][i],
/// accumulated in increasing v without contraction.
void dot_batch(const double* a, std::size_t a_stride, const double* b, std::size_t b_stride,
               int dim, double* out, std::size_t n);

/// acc[i] = min(acc[i], symmetric ? -|d[i]| : d[i]).
void min_accumulate(double* acc, const double* d, bool symmetric, std::size_t n);

// ---------------------------------------------------------------------------
// Runtime kernel selection

enum class Isa { Scalar, Avx2 };

std::string_view isa_name(Isa isa);
/// Best ISA supported by both the build and the running CPU, unless
/// overridden with force_isa or the LIECLF_ISA environment variable.
Isa active_isa();
void force_isa(Isa isa);
void clear_forced_isa();
bool isa_available(Isa isa);

namespace detail {
void eval_tape_batch_scalar(const Tape& tape, const BatchView& view);
void dot_batch_scalar(const double* a, std::size_t a_stride, const double* b,
                      std::size_t b_stride, int dim, double* out, std::size_t n);
void min_accumulate_scalar(double* acc, const double* d, bool symmetric, std::size_t n);
#ifdef LIECLF_HAVE_AVX2
void eval_tape_batch_avx2(const Tape& tape, const BatchView& view);
void dot_batch_avx2(const double* a, std::size_t a_stride, const double* b, std::size_t b_stride,
                    int dim, double* out, std::size_t n);
void min_accumulate_avx2(double* acc, const double* d, bool symmetric, std::size_t n);
#endif
}  // namespace detail

}  // namespace lieclf
