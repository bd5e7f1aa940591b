#include "lieclf/clf.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "lieclf/errors.hpp"

namespace lieclf {

TargetDef::TargetDef(Ball ball) : spec_(std::move(ball)) {
  if (!(std::get<Ball>(spec_).radius >= 0.0)) throw Error(ErrorKind::InvalidArgument, "ball radius must be >= 0");
}

TargetDef::TargetDef(SignedDistance sd) : spec_(std::move(sd)) {}

double TargetDef::distance(const Vec& x) const {
  if (const Ball* b = ball()) {
    if (b->center.size() != x.size()) throw Error(ErrorKind::DimensionMismatch, "target and point dimension differ");
    return std::max(0.0, (x - b->center).norm() - b->radius);
  }
  return std::max(0.0, evaluate(std::get<SignedDistance>(spec_).expr, as_span(x)));
}

// ---------------------------------------------------------------------------

struct CLFCandidate::Compiled {
  std::vector<Tape> value_and_grad;  // per smooth piece: value then dim partials
};

namespace {

std::shared_ptr<const CLFCandidate::Compiled> compile_pieces(int dim, const std::vector<Expr>& pieces);

}  // namespace

CLFCandidate CLFCandidate::smooth(int dim, Expr u) {
  CLFCandidate c;
  c.dim_ = dim;
  c.compiled_ = compile_pieces(dim, {u});
  c.spec_ = Smooth{std::move(u)};
  return c;
}

CLFCandidate CLFCandidate::distance_to_ball(Vec center, double radius) {
  if (!(radius >= 0.0)) throw Error(ErrorKind::InvalidArgument, "ball radius must be >= 0");
  CLFCandidate c;
  c.dim_ = static_cast<int>(center.size());
  c.spec_ = DistanceToBall{std::move(center), radius};
  return c;
}

CLFCandidate CLFCandidate::max_of(int dim, std::vector<Expr> pieces, double activity_tol) {
  if (pieces.empty()) throw Error(ErrorKind::InvalidArgument, "max-type candidate needs at least one piece");
  if (!(activity_tol >= 0.0)) throw Error(ErrorKind::InvalidArgument, "activity tolerance must be >= 0");
  CLFCandidate c;
  c.dim_ = dim;
  c.compiled_ = compile_pieces(dim, pieces);
  c.spec_ = MaxOfSmooth{std::move(pieces), activity_tol};
  return c;
}

namespace {

std::shared_ptr<const CLFCandidate::Compiled> compile_pieces(int dim, const std::vector<Expr>& pieces) {
  auto out = std::make_shared<CLFCandidate::Compiled>();
  for (const Expr& e : pieces) {
    if (e.max_variable() >= dim) throw Error(ErrorKind::DimensionMismatch, "candidate references x beyond dimension");
    Tape t(dim);
    t.add_output(e);
    for (int j = 0; j < dim; ++j) t.add_output(partial(e, j));
    out->value_and_grad.push_back(std::move(t));
  }
  return out;
}

struct PieceEval {
  double value;
  Vec grad;
};

PieceEval eval_piece(const Tape& t, const Vec& x) {
  thread_local std::vector<double> slots;
  std::vector<double> out(t.outputs().size());
  const bool kink = eval_tape(t, as_span(x), out, slots);
  PieceEval r{out[0], Vec(x.size())};
  for (Eigen::Index j = 0; j < x.size(); ++j) r.grad[j] = out[static_cast<std::size_t>(j) + 1];
  if (kink) throw Error(ErrorKind::KinkEvaluation, "candidate gradient evaluated exactly at a kink");
  return r;
}

}  // namespace

double CLFCandidate::value(const Vec& x) const {
  if (x.size() != dim_) throw Error(ErrorKind::DimensionMismatch, "point dimension differs from candidate");
  if (const auto* d = std::get_if<DistanceToBall>(&spec_)) return (x - d->center).norm() - d->radius;
  if (const auto* s = std::get_if<Smooth>(&spec_)) return evaluate(s->u, as_span(x));
  const auto& mx = std::get<MaxOfSmooth>(spec_);
  double best = -std::numeric_limits<double>::infinity();
  for (const Expr& e : mx.pieces) best = std::max(best, evaluate(e, as_span(x)));
  return best;
}

std::vector<Vec> CLFCandidate::limiting_gradients(const Vec& x) const {
  if (x.size() != dim_) throw Error(ErrorKind::DimensionMismatch, "point dimension differs from candidate");
  if (const auto* d = std::get_if<DistanceToBall>(&spec_)) {
    const Vec diff = x - d->center;
    const double r = diff.norm();
    if (!(r > 0.0)) throw Error(ErrorKind::InvalidArgument, "distance gradient undefined at the ball center");
    return {diff / r};
  }
  if (std::holds_alternative<Smooth>(spec_)) return {eval_piece(compiled_->value_and_grad[0], x).grad};
  const auto& mx = std::get<MaxOfSmooth>(spec_);
  std::vector<double> values;
  for (const Expr& e : mx.pieces) values.push_back(evaluate(e, as_span(x)));
  const double top = *std::max_element(values.begin(), values.end());
  std::vector<Vec> out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] >= top - mx.activity_tol) out.push_back(eval_piece(compiled_->value_and_grad[i], x).grad);
  }
  return out;
}

// ---------------------------------------------------------------------------

double radical_inverse(std::uint64_t i, int base) {
  double result = 0.0;
  double f = 1.0 / base;
  while (i > 0) {
    result += f * static_cast<double>(i % static_cast<std::uint64_t>(base));
    i /= static_cast<std::uint64_t>(base);
    f /= base;
  }
  return result;
}

Halton::Halton(int dim, std::uint64_t seed) : index_(1 + seed) {
  for (int candidate = 2; static_cast<int>(bases_.size()) < dim; ++candidate) {
    bool prime = true;
    for (int b : bases_) {
      if (candidate % b == 0) {
        prime = false;
        break;
      }
    }
    if (prime) bases_.push_back(candidate);
  }
}

Vec Halton::next() {
  Vec v(static_cast<Eigen::Index>(bases_.size()));
  for (std::size_t d = 0; d < bases_.size(); ++d) v[static_cast<Eigen::Index>(d)] = radical_inverse(index_, bases_[d]);
  ++index_;
  return v;
}

namespace {

bool in_region(const CLFCandidate& u, const Region& region, const Vec& x) {
  const double v = u.value(x);
  if (!(v > 0.0 && v <= region.level_max)) return false;
  if (region.target != nullptr && !(region.target->distance(x) > 0.0)) return false;
  if (const auto* d = std::get_if<CLFCandidate::DistanceToBall>(&u.spec())) {
    if (!((x - d->center).norm() > 0.0)) return false;
  }
  return true;
}

void check_box(const SamplerSpec& s, int dim) {
  if (s.lower.size() != dim || s.upper.size() != dim) {
    throw Error(ErrorKind::DimensionMismatch, "sampling box dimension differs from system");
  }
  if (!((s.upper - s.lower).array() > 0.0).all()) {
    throw Error(ErrorKind::InvalidArgument, "sampling box must have positive extent");
  }
}

template <class Visit>
void for_each_candidate(const SamplerSpec& s, int dim, std::size_t max_draws, Visit&& visit) {
  switch (s.kind) {
    case SamplerKind::Halton: {
      check_box(s, dim);
      Halton h(dim, s.seed);
      for (std::size_t i = 0; i < max_draws; ++i) {
        const Vec unit = h.next();
        const Vec x = s.lower.array() + (s.upper - s.lower).array() * unit.array();
        if (!visit(x)) return;
      }
      return;
    }
    case SamplerKind::Grid: {
      check_box(s, dim);
      if (s.grid_per_axis < 2) throw Error(ErrorKind::InvalidArgument, "grid needs at least 2 points per axis");
      std::vector<int> idx(static_cast<std::size_t>(dim), 0);
      for (;;) {
        Vec x(dim);
        for (int v = 0; v < dim; ++v) {
          const double t = static_cast<double>(idx[static_cast<std::size_t>(v)]) / (s.grid_per_axis - 1);
          x[v] = s.lower[v] + (s.upper[v] - s.lower[v]) * t;
        }
        if (!visit(x)) return;
        int v = 0;
        while (v < dim && ++idx[static_cast<std::size_t>(v)] == s.grid_per_axis) idx[static_cast<std::size_t>(v++)] = 0;
        if (v == dim) return;
      }
    }
    case SamplerKind::Points:
      for (const Vec& x : s.points) {
        if (x.size() != dim) throw Error(ErrorKind::DimensionMismatch, "sample point dimension differs from system");
        if (!visit(x)) return;
      }
      return;
  }
}

}  // namespace

std::vector<Vec> sample_region(const SamplerSpec& sampler, const CLFCandidate& u, const Region& region,
                               std::size_t n) {
  if (n == 0) throw Error(ErrorKind::InvalidArgument, "sample count must be positive");
  std::vector<Vec> out;
  const bool limited = sampler.kind == SamplerKind::Halton;
  for_each_candidate(sampler, u.dim(), 1000 * n, [&](const Vec& x) {
    if (in_region(u, region, x)) out.push_back(x);
    return !limited || out.size() < n;
  });
  if (out.empty()) throw Error(ErrorKind::EmptySample, "sampler produced no points in the region");
  return out;
}

// ---------------------------------------------------------------------------

GammaFn::GammaFn(std::vector<std::pair<double, double>> breakpoints) : bp_(std::move(breakpoints)) {
  if (bp_.empty()) throw Error(ErrorKind::NonMonotoneInput, "margin function needs breakpoints");
  for (std::size_t i = 1; i < bp_.size(); ++i) {
    if (!(bp_[i].first > bp_[i - 1].first) || !(bp_[i].second > bp_[i - 1].second)) {
      throw Error(ErrorKind::NonMonotoneInput, "margin function breakpoints must be strictly increasing");
    }
  }
}

double GammaFn::operator()(double u) const {
  if (u <= bp_.front().first) return bp_.front().second;
  if (u >= bp_.back().first) return bp_.back().second;
  const auto it = std::upper_bound(bp_.begin(), bp_.end(), u,
                                   [](double v, const std::pair<double, double>& b) { return v < b.first; });
  const auto& hi = *it;
  const auto& lo = *(it - 1);
  const double t = (u - lo.first) / (hi.first - lo.first);
  return lo.second + t * (hi.second - lo.second);
}

std::vector<double> worst_hamiltonian(const System& sys, const CLFCandidate& u, int h,
                                      const std::vector<Vec>& points) {
  const std::size_t n = points.size();
  std::vector<double> out(n);
  const int dim = sys.dim();
  const bool single_gradient = !std::holds_alternative<CLFCandidate::MaxOfSmooth>(u.spec());
  if (sys.supports_batch() && single_gradient) {
    std::vector<double> xs(static_cast<std::size_t>(dim) * n);
    std::vector<double> ps(static_cast<std::size_t>(dim) * n);
    for (std::size_t i = 0; i < n; ++i) {
      const Vec p = u.limiting_gradients(points[i]).front();
      for (int v = 0; v < dim; ++v) {
        xs[static_cast<std::size_t>(v) * n + i] = points[i][v];
        ps[static_cast<std::size_t>(v) * n + i] = p[v];
      }
    }
    hamiltonian_batch(sys, h, xs.data(), ps.data(), n, out.data());
    return out;
  }
  for (std::size_t i = 0; i < n; ++i) {
    double worst = -std::numeric_limits<double>::infinity();
    for (const Vec& p : u.limiting_gradients(points[i])) worst = std::max(worst, hamiltonian(sys, h, points[i], p));
    out[i] = worst;
  }
  return out;
}

VerificationReport verify_points(const System& sys, const CLFCandidate& u, const std::vector<Vec>& points,
                                 std::uint64_t seed) {
  if (points.empty()) throw Error(ErrorKind::EmptySample, "no sample points");
  VerificationReport rep;
  rep.samples = points.size();
  rep.k = sys.k();
  rep.seed = seed;
  rep.min_margin = std::numeric_limits<double>::infinity();
  const std::vector<double> H = worst_hamiltonian(sys, u, sys.k(), points);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double margin = -H[i];
    if (margin < rep.min_margin) {
      rep.min_margin = margin;
      rep.argmin = points[i];
    }
    if (!(margin > 0.0)) {
      ++rep.failure_count;
      if (rep.failures.size() < VerificationReport::kMaxFailures) rep.failures.push_back({points[i], H[i]});
    }
  }
  return rep;
}

VerificationReport verify(const System& sys, const CLFCandidate& u, const Region& region,
                          const SamplerSpec& sampler, std::size_t n) {
  return verify_points(sys, u, sample_region(sampler, u, region, n), sampler.seed);
}

GammaFn gamma_from_minima(const std::vector<double>& edges, const std::vector<double>& minima) {
  const std::size_t L = minima.size();
  if (L == 0 || edges.size() != L + 1) throw Error(ErrorKind::InvalidArgument, "level edges and minima mismatch");
  double smallest = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < L; ++i) {
    if (!(minima[i] > 0.0)) {
      throw Error(ErrorKind::NonpositiveMargin,
                  fmt::format("margin {} <= 0 on level ({}, {}]", minima[i], edges[i], edges[i + 1]));
    }
    smallest = std::min(smallest, minima[i]);
  }
  std::vector<double> g(L);
  double running = std::numeric_limits<double>::infinity();
  for (std::size_t i = L; i-- > 0;) {
    running = std::min(running, minima[i]);
    g[i] = running;
  }
  const double eps = 1e-6 * smallest;
  std::vector<std::pair<double, double>> bp{{0.0, 0.0}};
  for (std::size_t i = 0; i < L; ++i) bp.emplace_back(edges[i + 1], g[i] - eps * (edges[L] - edges[i + 1]));
  return GammaFn(std::move(bp));
}

GammaEstimate estimate_gamma(const System& sys, const CLFCandidate& u, const Region& region,
                             const SamplerSpec& sampler, int levels, int per_level) {
  if (levels < 1 || per_level < 1) throw Error(ErrorKind::InvalidArgument, "level and sample counts must be positive");
  if (!(region.level_max > 0.0)) throw Error(ErrorKind::InvalidArgument, "level range must be positive");
  const std::size_t L = static_cast<std::size_t>(levels);
  const std::size_t M = static_cast<std::size_t>(per_level);
  std::vector<double> edges(L + 1);
  for (std::size_t i = 0; i <= L; ++i) edges[i] = region.level_max * static_cast<double>(i) / static_cast<double>(L);

  std::vector<std::vector<Vec>> bins(L);
  std::size_t full = 0;
  const bool limited = sampler.kind == SamplerKind::Halton;
  for_each_candidate(sampler, u.dim(), 1000 * L * M, [&](const Vec& x) {
    if (!in_region(u, region, x)) return true;
    const double v = u.value(x);
    std::size_t b = static_cast<std::size_t>(std::ceil(v / region.level_max * static_cast<double>(L)));
    b = std::clamp<std::size_t>(b, 1, L) - 1;
    if (bins[b].size() < M || !limited) {
      bins[b].push_back(x);
      if (bins[b].size() == M) ++full;
    }
    return !limited || full < L;
  });

  std::vector<Vec> all;
  std::vector<std::size_t> owner;
  for (std::size_t b = 0; b < L; ++b) {
    if (bins[b].empty()) {
      throw Error(ErrorKind::EmptySample, fmt::format("no samples on level ({}, {}]", edges[b], edges[b + 1]));
    }
    for (Vec& x : bins[b]) {
      all.push_back(std::move(x));
      owner.push_back(b);
    }
  }
  const std::vector<double> H = worst_hamiltonian(sys, u, sys.k(), all);
  std::vector<double> minima(L, std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < all.size(); ++i) minima[owner[i]] = std::min(minima[owner[i]], -H[i]);
  return {gamma_from_minima(edges, minima), edges, minima};
}

}  // namespace lieclf
