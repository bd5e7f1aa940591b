// Command-line front end: every subcommand reads a JSON system description
// and writes its results into --out. Exit codes: 0 success, 1 the checked
// property fails (or a run cannot complete), 2 usage or configuration error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <fmt/core.h>
#include <fmt/ranges.h>
#include <CLI11.hpp>
#include <json.hpp>

#include "lieclf/runs.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace lieclf;

namespace {

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kUsage = 2;

struct Options {
  std::string config;
  std::string out = ".";
  std::optional<std::size_t> samples;
  std::optional<int> k;
  std::optional<std::uint64_t> seed;
  std::string x0;
  std::optional<double> eps_d;
  std::string x;
  std::string p;
  std::string bracket;
  std::string t = "0.1,0.05,0.025,0.0125";
  int orientation = 1;
  std::size_t dense_stride = 1;
};

std::vector<double> parse_csv(const std::string& text, const char* what) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorKind::InvalidArgument, fmt::format("{}: \"{}\" is not a number", what, item));
    }
  }
  return v;
}

Vec point_arg(const std::string& text, const char* what, int dim) {
  const std::vector<double> v = parse_csv(text, what);
  if (static_cast<int>(v.size()) != dim)
    throw Error(ErrorKind::DimensionMismatch, fmt::format("{} needs {} coordinates, got {}", what, dim, v.size()));
  return Eigen::Map<const Vec>(v.data(), dim);
}

std::vector<double> to_std(const Vec& v) { return {v.data(), v.data() + v.size()}; }

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::InvalidArgument, fmt::format("cannot write {}", path.string()));
  out << text;
}

void write_json(const Options& o, const char* name, const json& j) {
  write_text(fs::path(o.out) / name, j.dump(2) + "\n");
}

SystemConfig load(const Options& o) {
  SystemConfig cfg = load_config(o.config);
  if (o.k) cfg.k = *o.k;
  if (o.seed) cfg.sampler.seed = *o.seed;
  if (o.samples) cfg.samples = *o.samples;
  if (o.eps_d) cfg.eps_d = *o.eps_d;
  return cfg;
}

json gamma_json(const GammaFn& g) {
  json a = json::array();
  for (const auto& [u, v] : g.breakpoints()) a.push_back({u, v});
  return a;
}

std::string trajectory_csv(const Trajectory& traj, int dim, std::size_t stride) {
  std::string out = "s";
  for (int i = 1; i <= dim; ++i) out += fmt::format(",x{}", i);
  out += ",ctrl,seg,step\n";
  const std::size_t n = traj.dense.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (i % stride != 0 && i + 1 != n) continue;
    const DenseSample& p = traj.dense[i];
    out += fmt::format("{:.17g}", p.s);
    for (int v = 0; v < dim; ++v) out += fmt::format(",{:.17g}", p.x[v]);
    out += fmt::format(",{},{},{}\n", p.control, p.segment, p.step);
  }
  return out;
}

std::string checkpoints_csv(const Trajectory& traj, int dim) {
  std::string out = "j,s";
  for (int i = 1; i <= dim; ++i) out += fmt::format(",x{}", i);
  out += ",u,d,degree,t,r,gamma,bracket\n";
  for (std::size_t j = 0; j < traj.checkpoints.size(); ++j) {
    const Checkpoint& c = traj.checkpoints[j];
    out += fmt::format("{},{:.17g}", j, c.s);
    for (int v = 0; v < dim; ++v) out += fmt::format(",{:.17g}", c.x[v]);
    out += fmt::format(",{:.17g},{:.17g},{},{:.17g},{},{:.17g},{}\n", c.u, c.d, c.degree, c.t, c.r, c.gamma,
                       c.bracket.empty() ? "" : "\"" + c.bracket + "\"");
  }
  return out;
}

json trajectory_summary(const Trajectory& traj) {
  json j;
  j["reached"] = traj.reached;
  j["termination"] = traj.termination;
  j["steps"] = traj.steps();
  if (!traj.checkpoints.empty()) {
    const Checkpoint& last = traj.checkpoints.back();
    j["final_distance"] = last.d;
    j["final_level"] = last.u;
    j["final_s"] = last.s;
    j["final_x"] = to_std(last.x);
  }
  return j;
}

const char* kind_name(DirectionKind k) {
  switch (k) {
    case DirectionKind::Generator: return "generator";
    case DirectionKind::DriftCombo: return "drift_combination";
    case DirectionKind::Bracket: return "bracket";
    case DirectionKind::SetBracket: return "set_valued_bracket";
    case DirectionKind::DriftBracket: return "drift_bracket";
  }
  return "";
}

std::string direction_label(const System& sys, std::size_t d) {
  const Direction& dir = sys.directions()[d];
  if (dir.kind == DirectionKind::DriftCombo) {
    const int g = dir.bracket.generator();
    if (g == 0) return "f0";
    return fmt::format("f0{}f{}", dir.bracket.sign() > 0 ? "+" : "-", g);
  }
  return dir.bracket.str();
}

int cmd_brackets(const Options& o) {
  const Problem pb(load(o));
  const System& sys = pb.system;
  std::optional<Vec> x;
  if (!o.x.empty()) x = point_arg(o.x, "--x", sys.dim());
  const bool still = x ? sys.drift_still(*x) : true;
  json rows = json::array();
  for (std::size_t d = 0; d < sys.directions().size(); ++d) {
    const Direction& dir = sys.directions()[d];
    json row;
    row["direction"] = direction_label(sys, d);
    row["kind"] = kind_name(dir.kind);
    row["degree"] = dir.degree;
    row["r"] = dir.r;
    row["two_sided"] = dir.symmetric;
    row["word"] = word_for_direction(sys, d, 1).str();
    if (x) {
      const bool avail = sys.available(d, *x, still);
      row["available"] = avail;
      if (avail) {
        json verts = json::array();
        for (const Vec& v : sys.values(d, *x).vertices) verts.push_back(to_std(v));
        row["values"] = verts;
      }
    }
    rows.push_back(row);
    fmt::print("{:<24} degree {} r {:>3}  {}\n", row["direction"].get<std::string>(), dir.degree, dir.r,
               row["word"].get<std::string>());
  }
  json rep = {{"system", pb.config.name}, {"k", sys.k()}, {"directions", rows}};
  if (x) rep["x"] = to_std(*x);
  write_json(o, "brackets.json", rep);
  return kOk;
}

int cmd_ham(const Options& o) {
  const Problem pb(load(o));
  const int n = pb.system.dim();
  if (o.x.empty()) throw Error(ErrorKind::InvalidArgument, "ham needs --x");
  const Vec x = point_arg(o.x, "--x", n);
  std::vector<Vec> ps;
  if (o.p.empty())
    ps = pb.clf.limiting_gradients(x);
  else
    ps.push_back(point_arg(o.p, "--p", n));
  json per_p = json::array();
  for (const Vec& p : ps) {
    const std::vector<double> h = hamiltonian_chain_check(pb.system, x, p);
    per_p.push_back({{"p", to_std(p)}, {"hamiltonians", h}});
    for (std::size_t i = 0; i < h.size(); ++i) fmt::print("H^({}) = {:.17g}\n", i + 1, h[i]);
  }
  write_json(o, "ham.json", {{"system", pb.config.name}, {"x", to_std(x)}, {"covectors", per_p}});
  return kOk;
}

int cmd_verify(const Options& o) {
  const Problem pb(load(o));
  const SystemConfig& cfg = pb.config;
  const Region region{cfg.level_max, &pb.target};
  const VerificationReport rep = verify(pb.system, pb.clf, region, pb.sampler, cfg.samples);
  json failures = json::array();
  for (const SampleFailure& f : rep.failures) failures.push_back({{"x", to_std(f.x)}, {"hamiltonian", f.hamiltonian}});
  json j;
  j["note"] = fmt::format(
      "sampling-based check: the condition for every x with 0 < U(x) <= {} is tested on {} sample points only",
      cfg.level_max, rep.samples);
  j["system"] = cfg.name;
  j["k"] = rep.k;
  j["samples"] = rep.samples;
  j["seed"] = rep.seed;
  j["level_max"] = cfg.level_max;
  j["min_margin"] = rep.min_margin;
  j["argmin"] = to_std(rep.argmin);
  j["failure_count"] = rep.failure_count;
  j["failures"] = failures;
  j["passed"] = rep.passed();
  j["gamma"] = nullptr;
  if (rep.passed()) {
    try {
      const GammaEstimate g =
          estimate_gamma(pb.system, pb.clf, region, pb.sampler, cfg.gamma_levels, cfg.gamma_per_level);
      j["gamma"] = {{"breakpoints", gamma_json(g.gamma)}, {"level_edges", g.level_edges},
                    {"level_minima", g.level_minima}};
    } catch (const Error& e) {
      j["gamma_error"] = e.what();
    }
  }
  write_json(o, "verify.json", j);
  fmt::print("{}: {} samples, k = {}, min margin {:.6g} at ({}), {} failures\n", rep.passed() ? "PASS" : "FAIL",
             rep.samples, rep.k, rep.min_margin, fmt::join(to_std(rep.argmin), ", "), rep.failure_count);
  return rep.passed() ? kOk : kFailed;
}

Vec start_point(const Options& o, const Problem& pb) {
  if (!o.x0.empty()) return point_arg(o.x0, "--x0", pb.system.dim());
  if (!pb.config.x0) throw Error(ErrorKind::InvalidArgument, "no start point: pass --x0 or set synthesis.x0");
  return Eigen::Map<const Vec>(pb.config.x0->data(), pb.system.dim());
}

// A start already within tolerance takes no step, so no margin is needed
// (and the level range below U(x0) may hold no samples at all).
bool starts_inside(const Problem& pb, const Vec& x0, const SynthesisOptions& opt) {
  return pb.target.distance(x0) <= opt.eps_d;
}

GammaFn start_margin(const Problem& pb, const Vec& x0, const SynthesisOptions& opt) {
  if (starts_inside(pb, x0, opt)) return GammaFn({{0.0, 0.0}, {1.0, 1.0}});  // never consulted
  return margin_for_start(pb, x0);
}

json margin_json(const Problem& pb, const Vec& x0, const SynthesisOptions& opt, const GammaFn& gamma) {
  return starts_inside(pb, x0, opt) ? json(nullptr) : gamma_json(gamma);
}

void write_run(const Options& o, const Problem& pb, const Trajectory& traj) {
  write_text(fs::path(o.out) / "trajectory.csv", trajectory_csv(traj, pb.system.dim(), o.dense_stride));
  write_text(fs::path(o.out) / "checkpoints.csv", checkpoints_csv(traj, pb.system.dim()));
}

int cmd_synthesize(const Options& o) {
  const Problem pb(load(o));
  const Vec x0 = start_point(o, pb);
  const SynthesisOptions opt = build_synthesis_options(pb.config);
  const GammaFn gamma = start_margin(pb, x0, opt);
  json j = {{"system", pb.config.name}, {"x0", to_std(x0)}, {"eps_d", opt.eps_d},
            {"field_bound", opt.step.field_bound}, {"gamma", margin_json(pb, x0, opt, gamma)}};
  try {
    const Trajectory traj = synthesize(pb.system, pb.clf, pb.target, x0, gamma, opt);
    write_run(o, pb, traj);
    j.update(trajectory_summary(traj));
    write_json(o, "synthesis.json", j);
    fmt::print("reached d = {:.6g} after {} steps (s = {:.6g})\n", traj.checkpoints.back().d, traj.steps(),
               traj.checkpoints.back().s);
    return kOk;
  } catch (const SynthesisFailure& e) {
    write_run(o, pb, e.partial());
    j.update(trajectory_summary(e.partial()));
    j["error"] = e.what();
    write_json(o, "synthesis.json", j);
    fmt::print(stderr, "synthesis failed: {}\n", e.what());
    return kFailed;
  }
}

int cmd_asymptotic(const Options& o) {
  const Problem pb(load(o));
  const System& sys = pb.system;
  if (o.bracket.empty() || o.x.empty()) throw Error(ErrorKind::InvalidArgument, "asymptotic needs --bracket and --x");
  const Vec x = point_arg(o.x, "--x", sys.dim());
  std::optional<std::pair<std::size_t, int>> found;
  for (std::size_t d = 0; d < sys.directions().size() && !found; ++d)
    if (direction_label(sys, d) == o.bracket) found = {{d, o.orientation}};
  if (!found) found = find_direction(sys, FormalBracket::parse(o.bracket));
  if (!found) throw Error(ErrorKind::InvalidArgument, fmt::format("{} is not in the direction family", o.bracket));
  const AsymptoticResult r = asymptotic_order(sys, found->first, found->second, x, parse_csv(o.t, "--t"),
                                              pb.config.substeps);
  json j = {{"system", pb.config.name},
            {"bracket", o.bracket},
            {"x", to_std(x)},
            {"degree", r.degree},
            {"r", r.r},
            {"t", r.t},
            {"errors", r.errors},
            {"slope", r.slope},
            {"expected_slope", r.degree + 1},
            {"exact", r.exact},
            {"symbolic", to_std(r.symbolic)},
            {"estimate", to_std(r.estimate)},
            {"extrapolated", to_std(r.extrapolated)},
            {"relative_error", r.relative_error}};
  write_json(o, "asymptotic.json", j);
  fmt::print("{}: degree {}, slope {:.4f}{}, relative error {:.3g}\n", o.bracket, r.degree, r.slope,
             r.exact ? " (exact realization)" : "", r.relative_error);
  return kOk;
}

int cmd_certify(const Options& o) {
  const Problem pb(load(o));
  const Vec x0 = start_point(o, pb);
  const SynthesisOptions opt = build_synthesis_options(pb.config);
  json j = {{"system", pb.config.name}, {"x0", to_std(x0)}, {"field_bound", opt.step.field_bound}};
  const GammaFn gamma = start_margin(pb, x0, opt);
  Trajectory traj;
  try {
    traj = synthesize(pb.system, pb.clf, pb.target, x0, gamma, opt);
  } catch (const SynthesisFailure& e) {
    write_run(o, pb, e.partial());
    j.update(trajectory_summary(e.partial()));
    j["error"] = e.what();
    write_json(o, "certify.json", j);
    fmt::print(stderr, "synthesis failed: {}\n", e.what());
    return kFailed;
  }
  write_run(o, pb, traj);
  j.update(trajectory_summary(traj));
  if (traj.steps() == 0) {
    j["max_violation"] = 0.0;
    j["certified"] = true;
    write_json(o, "certify.json", j);
    fmt::print("start point already within tolerance; nothing to certify\n");
    return kOk;
  }
  const KLFunction kl = certificate_for(pb, traj, gamma);
  const EnvelopeReport env = check_envelope(traj, kl, pb.target);
  const double delta0 = traj.checkpoints.front().d;
  const double s_end = traj.checkpoints.back().s;
  std::string csv = "delta,s,beta\n";
  for (const BetaRow& row : beta_table(kl, delta0, 2.0 * s_end, 32, 64))
    csv += fmt::format("{:.17g},{:.17g},{:.17g}\n", row.delta, row.s, row.beta);
  write_text(fs::path(o.out) / "beta.csv", csv);
  const bool certified = env.max_violation <= 1e-9;
  j["gamma"] = gamma_json(gamma);
  j["r_k"] = kl.inputs().r_k;
  j["k"] = kl.inputs().k;
  j["max_violation"] = env.max_violation;
  j["worst_s"] = env.worst_s;
  j["dense_samples"] = env.samples;
  j["max_speed"] = env.max_speed;
  j["speed_within_bound"] = env.speed_within_bound;
  j["extrapolated"] = env.extrapolated;
  j["distance_tables"] = candidate_is_distance(pb.clf, pb.target) ? "identity" : "sampled";
  j["certified"] = certified;
  write_json(o, "certify.json", j);
  fmt::print("{}: max violation {:.3g} over {} dense samples{}\n", certified ? "CERTIFIED" : "VIOLATED",
             env.max_violation, env.samples, env.extrapolated ? " (tables extrapolated)" : "");
  return certified ? kOk : kFailed;
}

int exit_code_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::Config:
    case ErrorKind::Parse:
    case ErrorKind::InvalidArgument:
    case ErrorKind::DimensionMismatch:
    case ErrorKind::DegreeOutOfRange:
      return kUsage;
    default:
      return kFailed;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Degree-k control Lyapunov functions: brackets, Hamiltonians, verification, synthesis, certificates"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sc) {
    sc->add_option("config", o.config, "System description (JSON)")->required()->check(CLI::ExistingFile);
    sc->add_option("--out", o.out, "Output directory")->capture_default_str();
    sc->add_option("--k", o.k, "Override the degree k")->check(CLI::PositiveNumber);
    sc->add_option("--seed", o.seed, "Override the sampler seed");
  };
  CLI::App* brackets = app.add_subcommand("brackets", "List the direction family up to degree k");
  common(brackets);
  brackets->add_option("--x", o.x, "Evaluate every direction at this point (comma separated)");

  CLI::App* ham = app.add_subcommand("ham", "Hamiltonians H^(1..k) at a point");
  common(ham);
  ham->add_option("--x", o.x, "Point (comma separated)")->required();
  ham->add_option("--p", o.p, "Covector (default: limiting gradients of U)");

  CLI::App* ver = app.add_subcommand("verify", "Sampled check of the degree-k decrease condition");
  common(ver);
  ver->add_option("--samples", o.samples, "Number of sample points");

  CLI::App* syn = app.add_subcommand("synthesize", "Feedback synthesis from a start point");
  common(syn);
  syn->add_option("--x0", o.x0, "Start point (comma separated)");
  syn->add_option("--eps-d", o.eps_d, "Stop once the distance is at most this");
  syn->add_option("--dense-stride", o.dense_stride, "Write every n-th dense sample")->check(CLI::PositiveNumber);

  CLI::App* asy = app.add_subcommand("asymptotic", "Log-log order of a bracket word's endpoint error");
  common(asy);
  asy->add_option("--bracket", o.bracket, "Direction, e.g. [f1,f2] or f0+f1")->required();
  asy->add_option("--x", o.x, "Base point (comma separated)")->required();
  asy->add_option("--t", o.t, "Durations (comma separated)")->capture_default_str();
  asy->add_option("--orientation", o.orientation, "+1 or -1")->check(CLI::IsMember({-1, 1}));

  CLI::App* cer = app.add_subcommand("certify", "Synthesize and check the KL envelope");
  common(cer);
  cer->add_option("--x0", o.x0, "Start point (comma separated)");
  cer->add_option("--eps-d", o.eps_d, "Stop once the distance is at most this");
  cer->add_option("--samples", o.samples, "Samples for level-set distance tables");
  cer->add_option("--dense-stride", o.dense_stride, "Write every n-th dense sample")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    fs::create_directories(o.out);
    if (*brackets) return cmd_brackets(o);
    if (*ham) return cmd_ham(o);
    if (*ver) return cmd_verify(o);
    if (*syn) return cmd_synthesize(o);
    if (*asy) return cmd_asymptotic(o);
    return cmd_certify(o);
  } catch (const ConfigError& e) {
    for (const Diagnostic& d : e.diagnostics()) fmt::print(stderr, "{}: {}\n", o.config, d.str());
    return kUsage;
  } catch (const Error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return exit_code_for(e.kind());
  } catch (const fs::filesystem_error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kUsage;
  }
}
