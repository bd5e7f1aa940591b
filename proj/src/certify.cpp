#include "lieclf/certify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/core.h>

namespace lieclf {

MonotoneTable MonotoneTable::identity() {
  MonotoneTable t;
  t.identity_ = true;
  return t;
}

MonotoneTable MonotoneTable::from_points(std::vector<std::pair<double, double>> points) {
  if (points.empty() || points.front() != std::pair<double, double>{0.0, 0.0})
    points.insert(points.begin(), {0.0, 0.0});
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (!(points[i].first > points[i - 1].first) || !(points[i].second > points[i - 1].second))
      throw Error(ErrorKind::NonMonotoneInput,
                  fmt::format("table not strictly increasing at breakpoint {} (u = {}, value = {})", i,
                              points[i].first, points[i].second));
  }
  if (points.size() < 2) throw Error(ErrorKind::NonMonotoneInput, "table needs at least one positive breakpoint");
  MonotoneTable t;
  t.pts_ = std::move(points);
  return t;
}

double MonotoneTable::domain_max() const noexcept {
  return identity_ ? std::numeric_limits<double>::infinity() : pts_.back().first;
}

double MonotoneTable::operator()(double u, bool* extrapolated) const {
  if (identity_) return std::max(u, 0.0);
  if (u <= 0.0) return 0.0;
  if (u >= pts_.back().first) {
    if (extrapolated && u > pts_.back().first) *extrapolated = true;
    return pts_.back().second;
  }
  const auto it = std::upper_bound(pts_.begin(), pts_.end(), u,
                                   [](double v, const std::pair<double, double>& p) { return v < p.first; });
  const auto& [u1, y1] = *it;
  const auto& [u0, y0] = *(it - 1);
  return y0 + (y1 - y0) * (u - u0) / (u1 - u0);
}

double MonotoneTable::inverse(double v, bool* extrapolated) const {
  if (identity_) return std::max(v, 0.0);
  return invert_increasing([this](double u) { return (*this)(u); }, v, pts_.back().first, extrapolated);
}

double invert_increasing(const std::function<double(double)>& f, double v, double hi, bool* extrapolated) {
  if (v <= f(0.0)) return 0.0;
  if (v >= f(hi)) {
    if (extrapolated && v > f(hi)) *extrapolated = true;
    return hi;
  }
  double lo = 0.0;
  // Invariant: f(lo) < v <= f(hi).
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (f(mid) < v)
      lo = mid;
    else
      hi = mid;
  }
  return hi;
}

MonotoneTable tau_lower_table(const Trajectory& traj, double u_max, int levels) {
  if (!(u_max > 0.0) || levels < 1) throw Error(ErrorKind::InvalidArgument, "tau table needs u_max > 0 and levels >= 1");
  const double width = u_max / levels;
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> bin(static_cast<std::size_t>(levels), inf);
  double largest = 0.0;
  for (std::size_t j = 1; j < traj.checkpoints.size(); ++j) {
    const double u = traj.checkpoints[j - 1].u;
    const double t = traj.checkpoints[j].t;
    const int i = std::clamp(static_cast<int>(std::ceil(u / width)) - 1, 0, levels - 1);
    bin[static_cast<std::size_t>(i)] = std::min(bin[static_cast<std::size_t>(i)], t);
    largest = std::max(largest, t);
  }
  if (!(largest > 0.0)) throw Error(ErrorKind::EmptySample, "no accepted steps to build a duration table from");
  // Levels above every logged step take the largest duration; suffix minimum
  // makes the table nondecreasing while staying below every step at or above.
  double run = largest;
  for (int i = levels - 1; i >= 0; --i) {
    run = std::min(run, bin[static_cast<std::size_t>(i)]);
    bin[static_cast<std::size_t>(i)] = run;
  }
  const double eps = 1e-9 * bin.front();
  std::vector<std::pair<double, double>> pts;
  for (int i = 0; i < levels; ++i)
    pts.emplace_back(width * (i + 1), bin[static_cast<std::size_t>(i)] - eps * (levels - 1 - i));
  return MonotoneTable::from_points(std::move(pts));
}

bool candidate_is_distance(const CLFCandidate& u, const TargetDef& target) {
  const auto* dist = std::get_if<CLFCandidate::DistanceToBall>(&u.spec());
  const Ball* ball = target.ball();
  return dist && ball && dist->radius == ball->radius && dist->center.size() == ball->center.size() &&
         dist->center == ball->center;
}

LevelDistanceTables level_distance_tables(const CLFCandidate& u, const TargetDef& target,
                                          const std::vector<Vec>& samples, double u_max, int levels) {
  if (candidate_is_distance(u, target)) return {MonotoneTable::identity(), MonotoneTable::identity()};
  if (!(u_max > 0.0) || levels < 1) throw Error(ErrorKind::InvalidArgument, "distance tables need u_max > 0 and levels >= 1");
  const double width = u_max / levels;
  const double inf = std::numeric_limits<double>::infinity();
  const auto n = static_cast<std::size_t>(levels);
  std::vector<double> bin_min(n, inf), bin_max(n, -inf);
  for (const Vec& x : samples) {
    const double v = u.value(x);
    if (!(v > 0.0) || v > u_max) continue;
    const double d = target.distance(x);
    const auto i = static_cast<std::size_t>(std::clamp(static_cast<int>(std::ceil(v / width)) - 1, 0, levels - 1));
    bin_min[i] = std::min(bin_min[i], d);
    bin_max[i] = std::max(bin_max[i], d);
  }
  // lower(u_i) = min d over bins >= i: at u in (u_{i-1}, u_i] every point with
  // U >= u sits in those bins. upper(u_i) = max d over bins <= i.
  std::vector<double> lower(n), upper(n);
  double run = inf;
  for (std::size_t i = n; i-- > 0;) {
    run = std::min(run, bin_min[i]);
    lower[i] = run;
  }
  run = -inf;
  for (std::size_t i = 0; i < n; ++i) {
    run = std::max(run, bin_max[i]);
    upper[i] = run;
  }
  if (!std::isfinite(lower.front()) || !std::isfinite(upper.back()))
    throw Error(ErrorKind::EmptySample, "no samples inside the level range of the distance tables");
  // Empty bins: carry the neighbour that keeps each bound conservative.
  for (std::size_t i = 1; i < n; ++i)
    if (!std::isfinite(lower[i])) lower[i] = lower[i - 1];
  for (std::size_t i = n - 1; i-- > 0;)
    if (!std::isfinite(upper[i])) upper[i] = upper[i + 1];
  if (!(lower.front() > 0.0))
    throw Error(ErrorKind::NonMonotoneInput, "sampled distance vanishes at a positive level");
  const double eps_lo = 1e-9 * lower.front();
  const double eps_hi = 1e-9 * upper.back();
  std::vector<std::pair<double, double>> lo_pts, hi_pts;
  for (std::size_t i = 0; i < n; ++i) {
    const double ui = width * static_cast<double>(i + 1);
    lo_pts.emplace_back(ui, lower[i] - eps_lo * static_cast<double>(n - 1 - i));
    hi_pts.emplace_back(ui, upper[i] + eps_hi * static_cast<double>(i + 1));
  }
  return {MonotoneTable::from_points(std::move(lo_pts)), MonotoneTable::from_points(std::move(hi_pts))};
}

// ---------------------------------------------------------------------------

KLFunction::KLFunction(KLInputs in) : in_(std::move(in)) {
  const auto& bp = in_.gamma.breakpoints();
  if (bp.empty()) throw Error(ErrorKind::NonMonotoneInput, "margin function has no breakpoints");
  for (std::size_t i = 1; i < bp.size(); ++i)
    if (!(bp[i].first > bp[i - 1].first) || !(bp[i].second > bp[i - 1].second))
      throw Error(ErrorKind::NonMonotoneInput, "margin function is not strictly increasing");
  if (in_.k < 1 || in_.r_k < 1) throw Error(ErrorKind::InvalidArgument, "degree and segment count must be positive");
  if (!(in_.field_bound > 0.0) || !(in_.u_max > 0.0))
    throw Error(ErrorKind::InvalidArgument, "field bound and level range must be positive");
}

double KLFunction::gamma_tilde(double u) const {
  if (u <= 0.0) return 0.0;
  const double tau = std::min(in_.tau(u), 1.0);
  return in_.gamma(u) * std::pow(tau, in_.k - 1) / (2.0 * std::pow(static_cast<double>(in_.r_k), in_.k));
}

double KLFunction::gamma_hat(double u) const { return std::min(u, gamma_tilde(u)); }

double KLFunction::gamma_hat_inverse(double v, bool* extrapolated) const {
  return invert_increasing([this](double u) { return gamma_hat(u); }, v, in_.u_max, extrapolated);
}

double KLFunction::delta_hat_minus(double u) const { return std::min(in_.distance.lower(u), u); }

double KLFunction::delta_hat_minus_inverse(double d, bool* extrapolated) const {
  if (in_.distance.lower.is_identity()) return std::max(d, 0.0);
  return invert_increasing([this](double u) { return delta_hat_minus(u); }, d, in_.distance.lower.domain_max(),
                           extrapolated);
}

double KLFunction::delta_plus(double u, bool* extrapolated) const { return in_.distance.upper(u, extrapolated); }

double KLFunction::tau_max(double d) const { return std::min(1.0, std::max(d, 0.0) / (2.0 * in_.field_bound)); }

double KLFunction::beta_hat(double delta, double s, bool* extrapolated) const {
  if (delta <= 0.0) return 0.0;
  const double u_start = delta_hat_minus_inverse(delta, extrapolated);
  // U is nonincreasing along the run, so the level never exceeds u_start even
  // where u_start / (1 + s) is beyond the range of gamma_hat.
  const double level = std::min(u_start, gamma_hat_inverse(u_start / (1.0 + s)));
  return delta_plus(level, extrapolated);
}

double KLFunction::beta(double delta, double s, bool* extrapolated) const {
  if (delta <= 0.0) return 0.0;
  // Every step is at most tau_max of the distance it starts from, and those
  // distances stay below beta_hat(delta, 0).
  const double shift = tau_max(beta_hat(delta, 0.0, extrapolated));
  const double b = beta_hat(delta, s <= shift ? 0.0 : s - shift, extrapolated);
  return in_.field_bound * tau_max(b) + b;
}

KLFunction build_kl(KLInputs inputs) { return KLFunction(std::move(inputs)); }

std::vector<BetaRow> beta_table(const KLFunction& kl, double delta_max, double s_max, int n_delta, int n_s) {
  if (n_delta < 1 || n_s < 1 || !(delta_max > 0.0) || !(s_max >= 0.0))
    throw Error(ErrorKind::InvalidArgument, "beta table needs positive ranges and counts");
  std::vector<BetaRow> rows;
  rows.reserve(static_cast<std::size_t>((n_delta + 1) * (n_s + 1)));
  for (int i = 0; i <= n_delta; ++i) {
    const double delta = delta_max * i / n_delta;
    for (int j = 0; j <= n_s; ++j) {
      const double s = s_max * j / n_s;
      rows.push_back({delta, s, kl.beta(delta, s)});
    }
  }
  return rows;
}

EnvelopeReport check_envelope(const Trajectory& traj, const KLFunction& kl, const TargetDef& target) {
  EnvelopeReport rep;
  if (traj.dense.empty()) return rep;
  const double delta = target.distance(traj.dense.front().x);
  rep.max_violation = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < traj.dense.size(); ++i) {
    const DenseSample& p = traj.dense[i];
    const double v = target.distance(p.x) - kl.beta(delta, p.s, &rep.extrapolated);
    if (v > rep.max_violation) {
      rep.max_violation = v;
      rep.worst_s = p.s;
    }
    if (i > 0) {
      const double ds = p.s - traj.dense[i - 1].s;
      if (ds > 0.0) rep.max_speed = std::max(rep.max_speed, (p.x - traj.dense[i - 1].x).norm() / ds);
    }
  }
  rep.samples = traj.dense.size();
  rep.speed_within_bound = rep.max_speed <= kl.inputs().field_bound;
  return rep;
}

}  // namespace lieclf
