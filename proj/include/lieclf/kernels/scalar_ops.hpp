#pragma once

// Elementwise semantics shared by the tree evaluator, the scalar tape kernel
// and every SIMD variant. The vector kernels replicate these exact operation
// sequences, which is what makes them bit-identical to the reference.

#include <cmath>

namespace lieclf::ops {

/// Binary exponentiation; negative exponents take one reciprocal at the end.
inline double ipow(double x, int n) {
  unsigned m = n < 0 ? static_cast<unsigned>(-static_cast<long>(n))
                     : static_cast<unsigned>(n);
  double result = 1.0;
  double base = x;
  while (m != 0) {
    if (m & 1u) result = result * base;
    m >>= 1u;
    if (m != 0) base = base * base;
  }
  return n < 0 ? 1.0 / result : result;
}

// Operand order matches _mm256_min_pd / _mm256_max_pd.
inline double fmin2(double a, double b) { return a < b ? a : b; }
inline double fmax2(double a, double b) { return a > b ? a : b; }

inline double sign(double u) {
  if (u > 0.0) return 1.0;
  if (u < 0.0) return -1.0;
  return u;  // kink (flagged by caller) or NaN passthrough
}

inline double step(double u) {
  if (u > 0.0) return 1.0;
  if (u < 0.0) return 0.0;
  return u == 0.0 ? 0.0 : u;
}

inline bool is_kink(double u) { return u == 0.0; }

}  // namespace lieclf::ops
