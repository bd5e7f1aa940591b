#include "lieclf/steering.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace lieclf {

ControlWord::ControlWord(std::vector<Segment> segments) : segments_(std::move(segments)) {
  for (Segment& s : segments_) {
    if (s.generator < 0 || (s.sign != 1 && s.sign != -1)) {
      throw Error(ErrorKind::InvalidArgument, "segment needs generator >= 0 and sign +-1");
    }
    if (s.generator == 0) s.sign = 1;
  }
}

ControlWord ControlWord::inverse() const {
  std::vector<Segment> out(segments_.rbegin(), segments_.rend());
  for (Segment& s : out) {
    if (s.generator != 0) s.sign = -s.sign;
  }
  return ControlWord(std::move(out));
}

ControlWord ControlWord::concat(const ControlWord& other) const {
  std::vector<Segment> out = segments_;
  out.insert(out.end(), other.segments_.begin(), other.segments_.end());
  return ControlWord(std::move(out));
}

std::string ControlWord::str() const {
  std::string out;
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    if (i > 0) out += ',';
    const Segment& s = segments_[i];
    out += s.generator == 0 ? std::string("0") : fmt::format("{}e{}", s.sign > 0 ? '+' : '-', s.generator);
  }
  return out;
}

ControlWord word_for_bracket(const FormalBracket& b) {
  if (b.is_leaf()) return ControlWord({Segment{b.generator(), b.sign()}});
  const ControlWord w1 = word_for_bracket(b.left());
  const ControlWord w2 = word_for_bracket(b.right());
  return w1.concat(w2).concat(w1.inverse()).concat(w2.inverse());
}

ControlWord word_for_drift_bracket(const FormalBracket& b) {
  if (b.is_leaf() || b.degree() != 2) {
    throw Error(ErrorKind::InvalidArgument, "drift words exist only for degree-2 brackets");
  }
  const FormalBracket& l = b.left();
  const FormalBracket& r = b.right();
  if (l.generator() == 0 && r.generator() != 0) {
    return ControlWord({Segment{r.generator(), -1}, Segment{r.generator(), +1}});
  }
  if (r.generator() == 0 && l.generator() != 0) {
    return ControlWord({Segment{l.generator(), +1}, Segment{l.generator(), -1}});
  }
  if (l.generator() == 0 && r.generator() == 0) {
    throw Error(ErrorKind::InvalidArgument, "[f0,f0] vanishes");
  }
  return word_for_bracket(b);
}

ControlWord word_for_direction(const System& sys, std::size_t d, int orientation) {
  const Direction& dir = sys.directions()[d];
  switch (dir.kind) {
    case DirectionKind::Generator:
    case DirectionKind::DriftCombo:
      return word_for_bracket(dir.bracket);
    case DirectionKind::Bracket:
    case DirectionKind::SetBracket:
      return word_for_bracket(orientation > 0 ? dir.bracket : dir.bracket.negated());
    case DirectionKind::DriftBracket:
      return word_for_drift_bracket(orientation > 0 ? dir.bracket : dir.bracket.negated());
  }
  return {};
}

WordRun execute_word(const System& sys, const Vec& x, const ControlWord& w, double t, int substeps,
                     bool record_path) {
  if (!(t >= 0.0)) throw Error(ErrorKind::InvalidArgument, "word duration must be nonnegative");
  if (substeps < 1) throw Error(ErrorKind::InvalidArgument, "substeps must be positive");
  if (x.size() != sys.dim()) throw Error(ErrorKind::DimensionMismatch, "point dimension differs from system");
  WordRun run{x, {}};
  if (t == 0.0 || w.r() == 0) return run;
  const double seg_len = t / static_cast<double>(w.r());
  const double h = seg_len / substeps;
  Vec y = x;
  for (long s = 0; s < w.r(); ++s) {
    const Segment& seg = w.segments()[static_cast<std::size_t>(s)];
    auto f = [&](const Vec& z) { return sys.velocity(seg.generator, seg.sign, z); };
    for (int k = 0; k < substeps; ++k) {
      const Vec k1 = f(y);
      const Vec k2 = f(y + (0.5 * h) * k1);
      const Vec k3 = f(y + (0.5 * h) * k2);
      const Vec k4 = f(y + h * k3);
      y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      if (!y.allFinite()) throw Error(ErrorKind::NonFinite, "trajectory left the finite range");
      if (record_path) {
        const double s_now = static_cast<double>(s) * seg_len + static_cast<double>(k + 1) * h;
        run.path.push_back({s_now, y, seg.control(), static_cast<int>(s)});
      }
    }
  }
  run.endpoint = y;
  return run;
}

std::optional<std::pair<std::size_t, int>> find_direction(const System& sys, const FormalBracket& b) {
  const auto dirs = sys.directions();
  for (std::size_t d = 0; d < dirs.size(); ++d) {
    if (dirs[d].bracket == b) return std::pair{d, 1};
  }
  for (std::size_t d = 0; d < dirs.size(); ++d) {
    if (dirs[d].symmetric && dirs[d].bracket.negated() == b) return std::pair{d, -1};
  }
  return std::nullopt;
}

AsymptoticResult asymptotic_order(const System& sys, std::size_t d, int orientation, const Vec& x,
                                  std::vector<double> t_list, int substeps) {
  if (t_list.size() < 2) throw Error(ErrorKind::InvalidArgument, "at least two durations required");
  std::sort(t_list.begin(), t_list.end(), std::greater<>());
  for (double t : t_list) {
    if (!(t > 0.0)) throw Error(ErrorKind::InvalidArgument, "durations must be positive");
  }
  const Direction& dir = sys.directions()[d];
  const int o = dir.symmetric ? (orientation < 0 ? -1 : 1) : 1;
  const ControlWord w = word_for_direction(sys, d, o);
  AsymptoticResult res;
  res.degree = dir.degree;
  res.r = w.r();
  res.t = t_list;
  std::vector<Vec> verts = sys.values(d, x).vertices;
  for (Vec& v : verts) v *= static_cast<double>(o);

  auto scale_of = [&](double t) { return std::pow(t / static_cast<double>(res.r), res.degree); };
  std::vector<Vec> estimates;
  for (double t : t_list) {
    const Vec y = execute_word(sys, x, w, t, substeps).endpoint;
    const double c = scale_of(t);
    const Vec disp = y - x;
    double e;
    if (verts.size() == 1) {
      e = (disp - c * verts[0]).norm();
    } else {
      std::vector<Vec> scaled;
      for (const Vec& v : verts) scaled.push_back(c * v);
      e = distance_to_hull(disp, scaled);
    }
    res.errors.push_back(e);
    estimates.push_back(disp / c);
  }

  const double floor = 1e-12 * (1.0 + x.norm());
  res.exact = std::all_of(res.errors.begin(), res.errors.end(), [&](double e) { return e <= floor; });
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t i = 0; i < t_list.size(); ++i) {
    if (!(res.errors[i] > 0.0)) continue;
    const double lx = std::log(t_list[i]);
    const double ly = std::log(res.errors[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  res.slope = n >= 2 ? (n * sxy - sx * sy) / (n * sxx - sx * sx) : std::numeric_limits<double>::quiet_NaN();

  res.estimate = estimates.back();
  res.extrapolated = estimates.size() >= 2 ? Vec(2.0 * estimates.back() - estimates[estimates.size() - 2])
                                           : estimates.back();
  if (verts.size() == 1) {
    res.symbolic = verts[0];
  } else {
    // nearest hull point to the estimate
    Vec best = verts[0];
    double best_d = std::numeric_limits<double>::infinity();
    for (const Vec& v : verts) {
      const double dd = (v - res.estimate).norm();
      if (dd < best_d) {
        best_d = dd;
        best = v;
      }
    }
    res.symbolic = best;
  }
  const double denom = res.symbolic.norm();
  if (verts.size() == 1) {
    res.relative_error = denom > 0.0 ? (res.estimate - res.symbolic).norm() / denom
                                     : (res.estimate - res.symbolic).norm();
  } else {
    const double dist = distance_to_hull(res.estimate, verts);
    res.relative_error = denom > 0.0 ? dist / denom : dist;
  }
  return res;
}

// ---------------------------------------------------------------------------

namespace {

double worst_pairing(const System& sys, std::size_t d, int orientation, const Vec& x, const std::vector<Vec>& pset) {
  const BracketValueSet set = sys.values(d, x);
  double worst = -std::numeric_limits<double>::infinity();
  for (const Vec& p : pset) {
    for (const Vec& v : set.vertices) worst = std::max(worst, orientation * p.dot(v));
  }
  return worst;
}

}  // namespace

Feedback select_feedback(const System& sys, const Vec& x, const std::vector<Vec>& pset, double gamma) {
  if (pset.empty()) throw Error(ErrorKind::InvalidArgument, "empty covector set");
  const bool still = sys.drift_still(x);
  const auto dirs = sys.directions();
  double best_for_message = std::numeric_limits<double>::infinity();
  for (int h = 1; h <= sys.k(); ++h) {
    std::optional<Feedback> best;
    for (std::size_t d = 0; d < dirs.size(); ++d) {
      if (dirs[d].degree != h || !sys.available(d, x, still)) continue;
      for (int o : {1, -1}) {
        if (o < 0 && !dirs[d].symmetric) continue;
        const double w = worst_pairing(sys, d, o, x, pset);
        best_for_message = std::min(best_for_message, w);
        if (w <= -gamma && (!best || w < best->pairing)) best = Feedback{d, o, h, w};
      }
    }
    if (best) return *best;
  }
  throw Error(ErrorKind::NoDescentDirection,
              fmt::format("no direction of degree <= {} pairs below -gamma = {} (best {})", sys.k(), -gamma,
                          best_for_message));
}

StepResult step(const System& sys, const Vec& x, const CLFCandidate& u, const TargetDef& target,
                const GammaFn& gamma, const StepOptions& opt, bool record_path) {
  if (!(opt.field_bound > 0.0)) throw Error(ErrorKind::InvalidArgument, "field bound must be positive");
  const double u0 = u.value(x);
  const double g = gamma(u0);
  Feedback fb;
  try {
    fb = select_feedback(sys, x, u.limiting_gradients(x), g);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NoDescentDirection) throw;
    throw Error(ErrorKind::StepFailure, e.what());
  }
  const ControlWord w = word_for_direction(sys, fb.direction, fb.orientation);
  const double r = static_cast<double>(w.r());
  double t = std::min(1.0, target.distance(x) / (2.0 * opt.field_bound));
  for (int i = 0; i <= opt.max_halvings; ++i, t *= 0.5) {
    const double threshold = -0.5 * g * std::pow(t / r, fb.degree);
    WordRun run = execute_word(sys, x, w, t, opt.substeps, record_path);
    double dec = u.value(run.endpoint) - u0;
    if (!(dec <= threshold)) continue;
    if (std::fabs(dec - threshold) <= 0.1 * std::fabs(threshold)) {
      // near-marginal: the verdict must survive a finer integration
      WordRun fine = execute_word(sys, x, w, t, 2 * opt.substeps, record_path);
      const double dec_fine = u.value(fine.endpoint) - u0;
      if (!(dec_fine <= threshold)) continue;
      run = std::move(fine);
      dec = dec_fine;
    }
    StepResult res;
    res.next = run.endpoint;
    res.t = t;
    res.degree = fb.degree;
    res.r = w.r();
    res.direction = fb.direction;
    res.orientation = fb.orientation;
    res.gamma = g;
    res.decrease = dec;
    res.halvings = i;
    res.path = std::move(run.path);
    return res;
  }
  throw Error(ErrorKind::StepFailure,
              fmt::format("descent test failed after {} halvings at U = {}", opt.max_halvings, u0));
}

Trajectory synthesize(const System& sys, const CLFCandidate& u, const TargetDef& target, const Vec& x0,
                      const GammaFn& gamma, const SynthesisOptions& opt) {
  Trajectory traj;
  Vec x = x0;
  double s = 0.0;
  traj.checkpoints.push_back({0.0, x, u.value(x), target.distance(x), 0, 0.0, 0, 0.0, ""});
  traj.dense.push_back({0.0, x, 0, -1, 0});
  if (target.distance(x) <= opt.eps_d) {
    traj.reached = true;
    traj.termination = "within tolerance";
    return traj;
  }
  for (std::size_t j = 1; j <= opt.max_steps; ++j) {
    StepResult st;
    try {
      st = step(sys, x, u, target, gamma, opt.step, true);
    } catch (const Error& e) {
      traj.termination = e.what();
      throw SynthesisFailure(e.kind(), fmt::format("step {}: {}", j, e.what()), std::move(traj));
    }
    for (PathSample& p : st.path) traj.dense.push_back({s + p.s, std::move(p.x), p.control, p.segment, j});
    s += st.t;
    x = st.next;
    const Direction& dir = sys.directions()[st.direction];
    const std::string label = st.orientation > 0 ? dir.bracket.str() : dir.bracket.negated().str();
    traj.checkpoints.push_back({s, x, u.value(x), target.distance(x), st.degree, st.t, st.r, st.gamma, label});
    if (target.distance(x) <= opt.eps_d) {
      traj.reached = true;
      traj.termination = "within tolerance";
      return traj;
    }
  }
  traj.termination = "max steps exceeded";
  throw SynthesisFailure(ErrorKind::MaxStepsExceeded,
                         fmt::format("no arrival within {} steps (d = {})", opt.max_steps, target.distance(x)),
                         std::move(traj));
}

}  // namespace lieclf
