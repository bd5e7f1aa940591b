// Compiled with -mavx2 only (no FMA): each lane performs exactly the scalar
// kernel's operation sequence, so results match it bit for bit.

#include <immintrin.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <vector>

#include "lieclf/kernels/scalar_ops.hpp"
#include "lieclf/kernels/tape.hpp"

namespace lieclf::detail {

namespace {

constexpr std::size_t kBlock = 64;
constexpr std::size_t kLanes = 4;

inline __m256d abs_pd(__m256d v) { return _mm256_andnot_pd(_mm256_set1_pd(-0.0), v); }
inline __m256d neg_pd(__m256d v) { return _mm256_xor_pd(_mm256_set1_pd(-0.0), v); }

inline __m256d ipow_pd(__m256d x, int n) {
  unsigned m = n < 0 ? static_cast<unsigned>(-static_cast<long>(n)) : static_cast<unsigned>(n);
  __m256d result = _mm256_set1_pd(1.0);
  __m256d base = x;
  while (m != 0) {
    if (m & 1u) result = _mm256_mul_pd(result, base);
    m >>= 1u;
    if (m != 0) base = _mm256_mul_pd(base, base);
  }
  return n < 0 ? _mm256_div_pd(_mm256_set1_pd(1.0), result) : result;
}

inline __m256d kink_mask(__m256d u) { return _mm256_cmp_pd(u, _mm256_setzero_pd(), _CMP_EQ_OQ); }

template <class F>
inline __m256d per_lane(__m256d v, F f) {
  alignas(32) double t[kLanes];
  _mm256_store_pd(t, v);
  for (double& e : t) e = f(e);
  return _mm256_load_pd(t);
}

// Partial tail lanes are padded by repeating lane 0 of the block so that
// per-lane math stays well-defined; their results are discarded.
inline __m256d load_var(const double* src, std::size_t len, std::size_t i) {
  if (i + kLanes <= len) return _mm256_loadu_pd(src + i);
  alignas(32) double t[kLanes];
  for (std::size_t l = 0; l < kLanes; ++l) t[l] = i + l < len ? src[i + l] : src[0];
  return _mm256_load_pd(t);
}

}  // namespace

void eval_tape_batch_avx2(const Tape& tape, const BatchView& view) {
  const auto code = tape.code();
  const auto outputs = tape.outputs();
  thread_local std::vector<double, std::allocator<double>> work;
  work.resize(code.size() * kBlock + kLanes);
  for (std::size_t base = 0; base < view.n; base += kBlock) {
    const std::size_t len = std::min(kBlock, view.n - base);
    const std::size_t padded = (len + kLanes - 1) / kLanes * kLanes;
    alignas(32) double kink[kBlock] = {};
    for (std::size_t s = 0; s < code.size(); ++s) {
      const Instr& in = code[s];
      double* dst = &work[s * kBlock];
      const double* a = in.a >= 0 ? &work[static_cast<std::size_t>(in.a) * kBlock] : nullptr;
      const double* b = in.b >= 0 ? &work[static_cast<std::size_t>(in.b) * kBlock] : nullptr;
      for (std::size_t i = 0; i < padded; i += kLanes) {
        const __m256d va = a != nullptr ? _mm256_loadu_pd(a + i) : _mm256_setzero_pd();
        const __m256d vb = b != nullptr ? _mm256_loadu_pd(b + i) : _mm256_setzero_pd();
        __m256d v;
        switch (in.op) {
          case Op::Const: v = _mm256_set1_pd(in.value); break;
          case Op::Var:
            v = load_var(view.x + static_cast<std::size_t>(in.index) * view.x_stride + base, len, i);
            break;
          case Op::Add: v = _mm256_add_pd(va, vb); break;
          case Op::Sub: v = _mm256_sub_pd(va, vb); break;
          case Op::Mul: v = _mm256_mul_pd(va, vb); break;
          case Op::Div: v = _mm256_div_pd(va, vb); break;
          case Op::Pow: v = ipow_pd(va, in.index); break;
          case Op::Neg: v = neg_pd(va); break;
          case Op::Sin: v = per_lane(va, [](double e) { return std::sin(e); }); break;
          case Op::Cos: v = per_lane(va, [](double e) { return std::cos(e); }); break;
          case Op::Exp: v = per_lane(va, [](double e) { return std::exp(e); }); break;
          case Op::Sqrt: v = _mm256_sqrt_pd(va); break;
          case Op::Abs: v = abs_pd(va); break;
          case Op::Min: v = _mm256_min_pd(va, vb); break;
          case Op::Max: v = _mm256_max_pd(va, vb); break;
          case Op::Sign: {
            const __m256d zero = _mm256_setzero_pd();
            v = _mm256_blendv_pd(va, _mm256_set1_pd(1.0), _mm256_cmp_pd(va, zero, _CMP_GT_OQ));
            v = _mm256_blendv_pd(v, _mm256_set1_pd(-1.0), _mm256_cmp_pd(va, zero, _CMP_LT_OQ));
            _mm256_store_pd(kink + i, _mm256_or_pd(_mm256_load_pd(kink + i), kink_mask(va)));
            break;
          }
          case Op::Step: {
            const __m256d zero = _mm256_setzero_pd();
            v = _mm256_blendv_pd(va, _mm256_set1_pd(1.0), _mm256_cmp_pd(va, zero, _CMP_GT_OQ));
            v = _mm256_blendv_pd(v, zero, _mm256_cmp_pd(va, zero, _CMP_LE_OQ));
            _mm256_store_pd(kink + i, _mm256_or_pd(_mm256_load_pd(kink + i), kink_mask(va)));
            break;
          }
          case Op::Guard:
            v = vb;
            _mm256_store_pd(kink + i, _mm256_or_pd(_mm256_load_pd(kink + i), kink_mask(va)));
            break;
          default:
            v = _mm256_setzero_pd();
            break;
        }
        _mm256_storeu_pd(dst + i, v);
      }
    }
    for (std::size_t o = 0; o < outputs.size(); ++o) {
      std::memcpy(view.out + o * view.out_stride + base, &work[static_cast<std::size_t>(outputs[o]) * kBlock],
                  len * sizeof(double));
    }
    if (view.kink != nullptr) {
      for (std::size_t i = 0; i < len; ++i) {
        std::uint64_t bits;
        std::memcpy(&bits, &kink[i], sizeof bits);
        view.kink[base + i] = bits != 0 ? 1 : 0;
      }
    }
  }
}

void dot_batch_avx2(const double* a, std::size_t a_stride, const double* b, std::size_t b_stride, int dim,
                    double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    __m256d acc = _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    for (int v = 1; v < dim; ++v) {
      const __m256d prod = _mm256_mul_pd(_mm256_loadu_pd(a + static_cast<std::size_t>(v) * a_stride + i),
                                         _mm256_loadu_pd(b + static_cast<std::size_t>(v) * b_stride + i));
      acc = _mm256_add_pd(acc, prod);
    }
    _mm256_storeu_pd(out + i, acc);
  }
  if (i < n) {
    dot_batch_scalar(a + i, a_stride, b + i, b_stride, dim, out + i, n - i);
  }
}

void min_accumulate_avx2(double* acc, const double* d, bool symmetric, std::size_t n) {
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    __m256d c = _mm256_loadu_pd(d + i);
    if (symmetric) c = neg_pd(abs_pd(c));
    _mm256_storeu_pd(acc + i, _mm256_min_pd(_mm256_loadu_pd(acc + i), c));
  }
  if (i < n) min_accumulate_scalar(acc + i, d + i, symmetric, n - i);
}

}  // namespace lieclf::detail
