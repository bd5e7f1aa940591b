#pragma once

// Shared test helpers: fixture loading, deterministic generators for
// property tests.

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "lieclf/runs.hpp"

namespace lieclf::testing {

inline std::string fixture_path(const std::string& name) {
  return std::string(LIECLF_FIXTURES_DIR) + "/" + name + ".json";
}

inline SystemConfig fixture_config(const std::string& name) { return load_config(fixture_path(name)); }

inline Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double c : v) out[i++] = c;
  return out;
}

inline VectorFieldDef field(int dim, const std::vector<std::string>& comps) {
  return VectorFieldDef::parse(dim, comps);
}

/// Deterministic source for property tests; every suite seeds its own.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

  Vec point(int dim, double lo, double hi) {
    Vec x(dim);
    for (int i = 0; i < dim; ++i) x[i] = uniform(lo, hi);
    return x;
  }

  Vec unit(int dim) {
    Vec p;
    do {
      p = point(dim, -1.0, 1.0);
    } while (p.norm() < 1e-3);
    return p / p.norm();
  }

  /// Random smooth expression in x1..x<dim>: sums and products of
  /// variables, small constants, sin/cos/exp of subterms.
  Expr smooth_expr(int dim, int depth) {
    if (depth == 0 || integer(0, 3) == 0) {
      if (integer(0, 2) == 0) return Expr::constant(static_cast<double>(integer(-3, 3)) * 0.5);
      return Expr::variable(integer(0, dim - 1));
    }
    switch (integer(0, 6)) {
      case 0: return smooth_expr(dim, depth - 1) + smooth_expr(dim, depth - 1);
      case 1: return smooth_expr(dim, depth - 1) - smooth_expr(dim, depth - 1);
      case 2: return smooth_expr(dim, depth - 1) * smooth_expr(dim, depth - 1);
      case 3: return pow(smooth_expr(dim, depth - 1), integer(2, 3));
      case 4: return sin(smooth_expr(dim, depth - 1));
      case 5: return cos(smooth_expr(dim, depth - 1));
      default: return exp(Expr::constant(0.25) * smooth_expr(dim, depth - 1));
    }
  }

  /// Expression that may also use abs/min/max, division and sqrt.
  Expr kinked_expr(int dim, int depth) {
    if (depth == 0 || integer(0, 3) == 0) return smooth_expr(dim, 1);
    switch (integer(0, 5)) {
      case 0: return abs(kinked_expr(dim, depth - 1));
      case 1: return min(kinked_expr(dim, depth - 1), kinked_expr(dim, depth - 1));
      case 2: return max(kinked_expr(dim, depth - 1), kinked_expr(dim, depth - 1));
      case 3: return kinked_expr(dim, depth - 1) / (Expr::constant(2.0) + pow(kinked_expr(dim, depth - 1), 2));
      case 4: return sqrt(Expr::constant(1.0) + pow(kinked_expr(dim, depth - 1), 2));
      default: return smooth_expr(dim, depth);
    }
  }

  /// Random polynomial vector field with coefficients in {-2,..,2}/2.
  VectorFieldDef polynomial_field(int dim, int degree) {
    std::vector<Expr> comps;
    for (int c = 0; c < dim; ++c) {
      Expr e = Expr::constant(static_cast<double>(integer(-2, 2)) * 0.5);
      for (int term = 0; term < 3; ++term) {
        Expr mono = Expr::constant(static_cast<double>(integer(-2, 2)) * 0.5);
        const int deg = integer(1, degree);
        for (int d = 0; d < deg; ++d) mono = mono * Expr::variable(integer(0, dim - 1));
        e = e + mono;
      }
      comps.push_back(e);
    }
    return VectorFieldDef(dim, comps);
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

}  // namespace lieclf::testing
