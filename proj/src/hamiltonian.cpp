#include "lieclf/hamiltonian.hpp"

#include <fmt/format.h>

#include <cmath>
#include <limits>

#include "lieclf/errors.hpp"
#include "lieclf/kernels/scalar_ops.hpp"

namespace lieclf {

namespace {

// Same accumulation order as dot_batch.
double dot_seq(const Vec& a, const Vec& b) {
  double acc = a[0] * b[0];
  for (Eigen::Index i = 1; i < a.size(); ++i) acc = acc + a[i] * b[i];
  return acc;
}

VectorFieldDef scaled_sum(const VectorFieldDef& base, const VectorFieldDef* add, int sign) {
  std::vector<Expr> comps;
  for (int i = 0; i < base.dim(); ++i) {
    const Expr& a = base.component(i);
    if (add == nullptr) {
      comps.push_back(sign > 0 ? a : -a);
    } else {
      comps.push_back(sign > 0 ? a + add->component(i) : a - add->component(i));
    }
  }
  return VectorFieldDef(base.dim(), std::move(comps));
}

void validate(SystemDef& def) {
  if (def.dim <= 0) throw Error(ErrorKind::InvalidArgument, "system dimension must be positive");
  if (def.generators.empty()) throw Error(ErrorKind::InvalidArgument, "at least one generator required");
  for (const VectorFieldDef& g : def.generators) {
    if (g.dim() != def.dim) throw Error(ErrorKind::DimensionMismatch, "generator dimension differs from system");
  }
  if (def.drift && def.drift->dim() != def.dim) {
    throw Error(ErrorKind::DimensionMismatch, "drift dimension differs from system");
  }
  if (def.k < 1) throw Error(ErrorKind::DegreeOutOfRange, "maximal degree must be at least 1");
  if (def.smoothness == Smoothness::Lipschitz) {
    if (def.k > 2) throw Error(ErrorKind::DegreeOutOfRange, "Lipschitz systems support degree at most 2");
    if (def.drift) throw Error(ErrorKind::InvalidArgument, "Lipschitz systems with drift are not supported");
    if (def.pieces.empty()) {
      for (const VectorFieldDef& g : def.generators) {
        def.pieces.push_back(PiecewiseVectorFieldDef::decompose_kinks(g));
      }
    }
    if (def.pieces.size() != def.generators.size()) {
      throw Error(ErrorKind::InvalidArgument, "one piece decomposition per generator required");
    }
  } else if (!def.pieces.empty()) {
    throw Error(ErrorKind::InvalidArgument, "piecewise generators require the Lipschitz smoothness class");
  }
  if (def.drift && def.k > 2) throw Error(ErrorKind::DegreeOutOfRange, "drift systems support degree at most 2");
  if (!(def.eps_drift >= 0.0)) throw Error(ErrorKind::InvalidArgument, "eps_drift must be nonnegative");
}

}  // namespace

System::System(SystemDef def) : def_(std::move(def)) {
  validate(def_);
  const int m = this->m();
  auto add = [this](Direction d, VectorFieldDef field, int set_slot) {
    directions_.push_back(std::move(d));
    fields_.push_back(std::move(field));
    set_index_.push_back(set_slot);
  };

  if (has_drift()) {
    const VectorFieldDef& f0 = *def_.drift;
    add({DirectionKind::DriftCombo, FormalBracket::leaf(0), 1, 1, false, false}, f0, -1);
    for (int i = 1; i <= m; ++i) {
      const VectorFieldDef& fi = def_.generators[static_cast<std::size_t>(i) - 1];
      add({DirectionKind::DriftCombo, FormalBracket::leaf(i, +1), 1, 1, false, false},
          scaled_sum(f0, &fi, +1), -1);
      add({DirectionKind::DriftCombo, FormalBracket::leaf(i, -1), 1, 1, false, false},
          scaled_sum(f0, &fi, -1), -1);
    }
    if (def_.k >= 2) {
      for (int i = 1; i <= m; ++i) {
        const FormalBracket b = FormalBracket::node(FormalBracket::leaf(0), FormalBracket::leaf(i));
        add({DirectionKind::DriftBracket, b, 2, 2, true, true}, bracket_field(b, def_.generators, &f0), -1);
      }
      for (int j = 1; j <= m; ++j) {
        for (int l = j + 1; l <= m; ++l) {
          const FormalBracket b = FormalBracket::node(FormalBracket::leaf(j), FormalBracket::leaf(l));
          add({DirectionKind::DriftBracket, b, 2, 4, true, true}, bracket_field(b, def_.generators), -1);
        }
      }
    }
  } else {
    for (const FormalBracket& b : enumerate_brackets(m, def_.k)) {
      if (b.is_leaf()) {
        const VectorFieldDef& fi = def_.generators[static_cast<std::size_t>(b.generator()) - 1];
        add({DirectionKind::Generator, b, 1, 1, false, false}, scaled_sum(fi, nullptr, b.sign()), -1);
      } else if (lipschitz()) {
        const int i = b.left().generator();
        const int j = b.right().generator();
        set_brackets_.emplace_back(i, j, def_.pieces[static_cast<std::size_t>(i) - 1],
                                   def_.pieces[static_cast<std::size_t>(j) - 1]);
        add({DirectionKind::SetBracket, b, 2, b.r(), true, false}, VectorFieldDef(),
            static_cast<int>(set_brackets_.size()) - 1);
      } else {
        add({DirectionKind::Bracket, b, b.degree(), b.r(), true, false}, bracket_field(b, def_.generators), -1);
      }
    }
  }

  if (supports_batch()) {
    auto tape = std::make_shared<Tape>(def_.dim);
    if (has_drift()) {
      for (const Expr& c : def_.drift->components()) tape->add_output(c);
    }
    for (const VectorFieldDef& f : fields_) {
      for (const Expr& c : f.components()) tape->add_output(c);
    }
    tape_ = std::move(tape);
  }
}

bool System::drift_still(const Vec& x) const {
  if (!has_drift()) return true;
  const Vec f0 = def_.drift->eval(x);
  return dot_seq(f0, f0) <= def_.eps_drift * def_.eps_drift;
}

bool System::available(std::size_t d, const Vec&, bool still) const {
  return !directions_.at(d).needs_still_drift || still;
}

BracketValueSet System::values(std::size_t d, const Vec& x) const {
  const Direction& dir = directions_.at(d);
  if (dir.kind == DirectionKind::SetBracket) {
    return set_brackets_[static_cast<std::size_t>(set_index_[d])].eval(x);
  }
  if (dir.kind == DirectionKind::Generator && lipschitz()) {
    const int g = dir.bracket.generator();
    Vec v = def_.pieces[static_cast<std::size_t>(g) - 1].eval(x);
    if (dir.bracket.sign() < 0) v = -v;
    return {{v}};
  }
  return {{fields_[d].eval(x)}};
}

Vec System::generator_value(int g, const Vec& x) const {
  if (g == 0) {
    if (!has_drift()) return Vec::Zero(dim());
    return def_.drift->eval(x);
  }
  if (g < 0 || g > m()) throw Error(ErrorKind::InvalidArgument, fmt::format("no generator f{}", g));
  if (lipschitz()) return def_.pieces[static_cast<std::size_t>(g) - 1].eval(x);
  return def_.generators[static_cast<std::size_t>(g) - 1].eval(x);
}

Vec System::velocity(int g, int sign, const Vec& x) const {
  Vec v = g == 0 ? Vec::Zero(dim()) : Vec(static_cast<double>(sign) * generator_value(g, x));
  if (has_drift()) v += def_.drift->eval(x);
  return v;
}

const Tape& System::batch_tape() const {
  if (!tape_) throw Error(ErrorKind::InvalidArgument, "batch evaluation needs a smooth system");
  return *tape_;
}

double pairing(const System& sys, std::size_t d, const Vec& x, const Vec& p) {
  const Direction& dir = sys.directions()[d];
  const BracketValueSet set = sys.values(d, x);
  if (set.vertices.size() == 1) {
    const double v = dot_seq(set.vertices[0], p);
    return dir.symmetric ? -std::fabs(v) : v;
  }
  double hi = -std::numeric_limits<double>::infinity();
  double lo = std::numeric_limits<double>::infinity();
  for (const Vec& w : set.vertices) {
    const double v = dot_seq(w, p);
    hi = ops::fmax2(hi, v);
    lo = ops::fmin2(lo, v);
  }
  return dir.symmetric ? ops::fmin2(hi, -lo) : hi;
}

namespace {

void check_inputs(const System& sys, int h, const Vec& x, const Vec& p) {
  if (h < 1 || h > sys.k()) {
    throw Error(ErrorKind::DegreeOutOfRange, fmt::format("degree {} outside 1..{}", h, sys.k()));
  }
  if (x.size() != sys.dim() || p.size() != sys.dim()) {
    throw Error(ErrorKind::DimensionMismatch, "point or covector dimension differs from system");
  }
}

}  // namespace

double hamiltonian(const System& sys, int h, const Vec& x, const Vec& p) {
  check_inputs(sys, h, x, p);
  const bool still = sys.drift_still(x);
  double acc = std::numeric_limits<double>::infinity();
  const auto dirs = sys.directions();
  for (std::size_t d = 0; d < dirs.size(); ++d) {
    if (dirs[d].degree > h) continue;
    if (!sys.available(d, x, still)) continue;
    acc = ops::fmin2(acc, pairing(sys, d, x, p));
  }
  if (sys.has_drift() && h >= 2 && !still) acc = ops::fmin2(acc, 0.0);
  return acc;
}

std::vector<double> hamiltonian_chain(const System& sys, const Vec& x, const Vec& p) {
  std::vector<double> out;
  for (int h = 1; h <= sys.k(); ++h) out.push_back(hamiltonian(sys, h, x, p));
  return out;
}

std::vector<double> hamiltonian_chain_check(const System& sys, const Vec& x, const Vec& p) {
  std::vector<double> chain = hamiltonian_chain(sys, x, p);
  for (std::size_t h = 1; h < chain.size(); ++h) {
    if (chain[h] > chain[h - 1]) {
      throw Error(ErrorKind::InvalidArgument,
                  fmt::format("Hamiltonian chain increases from degree {} to {}", h, h + 1));
    }
  }
  return chain;
}

void hamiltonian_batch(const System& sys, int h, const double* x, const double* p, std::size_t n,
                       double* out) {
  if (h < 1 || h > sys.k()) {
    throw Error(ErrorKind::DegreeOutOfRange, fmt::format("degree {} outside 1..{}", h, sys.k()));
  }
  const int dim = sys.dim();
  if (!sys.supports_batch()) {
    Vec xi(dim);
    Vec pi(dim);
    for (std::size_t i = 0; i < n; ++i) {
      for (int v = 0; v < dim; ++v) {
        xi[v] = x[static_cast<std::size_t>(v) * n + i];
        pi[v] = p[static_cast<std::size_t>(v) * n + i];
      }
      out[i] = hamiltonian(sys, h, xi, pi);
    }
    return;
  }

  constexpr std::size_t kChunk = 256;
  const Tape& tape = sys.batch_tape();
  const std::size_t outputs = tape.outputs().size();
  const auto dirs = sys.directions();
  const double eps2 = sys.def().eps_drift * sys.def().eps_drift;
  std::vector<double> vals(outputs * kChunk);
  std::vector<std::uint8_t> kink(kChunk);
  std::vector<double> xs(static_cast<std::size_t>(dim) * kChunk);
  std::vector<double> ps(static_cast<std::size_t>(dim) * kChunk);
  std::vector<double> d(kChunk);
  std::vector<double> still_norm(kChunk);

  for (std::size_t base = 0; base < n; base += kChunk) {
    const std::size_t len = std::min(kChunk, n - base);
    for (int v = 0; v < dim; ++v) {
      std::copy_n(x + static_cast<std::size_t>(v) * n + base, len, &xs[static_cast<std::size_t>(v) * kChunk]);
      std::copy_n(p + static_cast<std::size_t>(v) * n + base, len, &ps[static_cast<std::size_t>(v) * kChunk]);
    }
    eval_tape_batch(tape, BatchView{xs.data(), kChunk, vals.data(), kChunk, kink.data(), len});
    for (std::size_t i = 0; i < len; ++i) {
      if (kink[i]) throw Error(ErrorKind::KinkEvaluation, "direction field evaluated exactly at a kink");
    }
    for (std::size_t o = 0; o < outputs; ++o) {
      for (std::size_t i = 0; i < len; ++i) {
        if (!std::isfinite(vals[o * kChunk + i])) throw Error(ErrorKind::NonFinite, "direction field is not finite");
      }
    }
    std::size_t offset = 0;
    if (sys.has_drift()) {
      dot_batch(vals.data(), kChunk, vals.data(), kChunk, dim, still_norm.data(), len);
      offset = static_cast<std::size_t>(dim);
    }
    double* acc = out + base;
    std::fill_n(acc, len, std::numeric_limits<double>::infinity());
    for (std::size_t k = 0; k < dirs.size(); ++k) {
      const double* field = &vals[(offset + k * static_cast<std::size_t>(dim)) * kChunk];
      if (dirs[k].degree > h) continue;
      dot_batch(field, kChunk, ps.data(), kChunk, dim, d.data(), len);
      if (dirs[k].needs_still_drift) {
        // Absent where the drift moves: contribute +inf, which min ignores.
        for (std::size_t i = 0; i < len; ++i) {
          if (dirs[k].symmetric) d[i] = -std::fabs(d[i]);
          if (!(still_norm[i] <= eps2)) d[i] = std::numeric_limits<double>::infinity();
        }
        min_accumulate(acc, d.data(), false, len);
      } else {
        min_accumulate(acc, d.data(), dirs[k].symmetric, len);
      }
    }
    if (sys.has_drift() && h >= 2) {
      for (std::size_t i = 0; i < len; ++i) {
        if (!(still_norm[i] <= eps2)) acc[i] = ops::fmin2(acc[i], 0.0);
      }
    }
  }
}

}  // namespace lieclf
