#include "lieclf/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

#include <fmt/core.h>
#include <json.hpp>

namespace lieclf {

using json = nlohmann::json;

std::string Diagnostic::str() const {
  std::string where = line > 0 ? fmt::format("line {}, column {}", line, column) : std::string("input");
  if (!path.empty()) where += fmt::format(" ({})", path);
  return fmt::format("{}: {}", where, message);
}

namespace {

std::string join_messages(const std::vector<Diagnostic>& diags) {
  std::string out;
  for (const Diagnostic& d : diags) {
    if (!out.empty()) out += "; ";
    out += d.str();
  }
  return out;
}

}  // namespace

ConfigError::ConfigError(std::vector<Diagnostic> diagnostics)
    : Error(ErrorKind::Config, join_messages(diagnostics)), diagnostics_(std::move(diagnostics)) {}

namespace {

std::pair<int, int> line_column(std::string_view text, std::size_t offset) {
  offset = std::min(offset, text.size());
  int line = 1;
  std::size_t line_start = 0;
  for (std::size_t i = 0; i < offset; ++i) {
    if (text[i] == '\n') {
      ++line;
      line_start = i + 1;
    }
  }
  return {line, static_cast<int>(offset - line_start) + 1};
}

class Reader {
 public:
  explicit Reader(std::string_view text) : text_(text) {}

  // Positions come from locating the path's keys in order in the source
  // text; nlohmann/json keeps no positions for parsed values.
  void error(const std::string& path, const std::string& message) {
    std::size_t pos = 0;
    bool found = false;
    std::size_t start = 0;
    while (start < path.size()) {
      std::size_t end = path.find('/', start + 1);
      if (end == std::string::npos) end = path.size();
      const std::string token = path.substr(start + 1, end - start - 1);
      start = end;
      if (token.empty() || std::all_of(token.begin(), token.end(), [](char c) { return c >= '0' && c <= '9'; }))
        continue;
      const std::size_t at = find_key(token, found ? pos : 0);
      if (at == std::string::npos) break;
      pos = at;
      found = true;
    }
    Diagnostic d;
    if (found) std::tie(d.line, d.column) = line_column(text_, pos);
    d.path = path.empty() ? "/" : path;
    d.message = message;
    diags_.push_back(std::move(d));
  }

  std::vector<Diagnostic>& diagnostics() { return diags_; }

  const json* member(const json& obj, const std::string& path, const char* key, bool required) {
    auto it = obj.find(key);
    if (it == obj.end()) {
      if (required) error(path, fmt::format("missing required key \"{}\"", key));
      return nullptr;
    }
    return &*it;
  }

  void check_keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (auto it = obj.begin(); it != obj.end(); ++it)
      if (!ok.count(it.key())) error(path + "/" + it.key(), fmt::format("unknown key \"{}\"", it.key()));
  }

  template <class T>
  bool number(const json* v, const std::string& path, T& out) {
    if (!v) return false;
    if constexpr (std::is_integral_v<T>) {
      if (!v->is_number_integer()) {
        error(path, "expected an integer");
        return false;
      }
      if constexpr (std::is_unsigned_v<T>) {
        if (v->is_number_unsigned() || v->get<long long>() >= 0) {
          out = v->get<T>();
          return true;
        }
        error(path, "expected a nonnegative integer");
        return false;
      } else {
        out = v->get<T>();
        return true;
      }
    } else {
      if (!v->is_number()) {
        error(path, "expected a number");
        return false;
      }
      out = v->get<T>();
      return true;
    }
  }

  bool expr(const json* v, const std::string& path, int dim, Expr& out) {
    if (!v) return false;
    if (v->is_number()) {
      out = Expr::constant(v->get<double>());
      return true;
    }
    if (!v->is_string()) {
      error(path, "expected an expression string");
      return false;
    }
    try {
      out = parse_expr(v->get<std::string>(), dim);
      return true;
    } catch (const Error& e) {
      std::string msg = e.what();
      if (msg.find("outside x1..x") != std::string::npos) msg = "dimension mismatch: " + msg;
      error(path, msg);
      return false;
    }
  }

  bool field(const json* v, const std::string& path, int dim, std::vector<Expr>& out) {
    if (!v) return false;
    if (!v->is_array()) {
      error(path, "expected an array of component expressions");
      return false;
    }
    if (static_cast<int>(v->size()) != dim) {
      error(path, fmt::format("dimension mismatch: expected {} components, got {}", dim, v->size()));
      return false;
    }
    out.assign(v->size(), Expr());
    bool ok = true;
    for (std::size_t i = 0; i < v->size(); ++i) ok &= expr(&(*v)[i], fmt::format("{}/{}", path, i), dim, out[i]);
    return ok;
  }

  bool vector(const json* v, const std::string& path, int dim, std::vector<double>& out) {
    if (!v) return false;
    if (!v->is_array() || !std::all_of(v->begin(), v->end(), [](const json& e) { return e.is_number(); })) {
      error(path, "expected an array of numbers");
      return false;
    }
    if (dim >= 0 && static_cast<int>(v->size()) != dim) {
      error(path, fmt::format("dimension mismatch: expected {} entries, got {}", dim, v->size()));
      return false;
    }
    out = v->get<std::vector<double>>();
    return true;
  }

 private:
  std::size_t find_key(const std::string& key, std::size_t from) const {
    const std::string quoted = "\"" + key + "\"";
    for (std::size_t at = text_.find(quoted, from); at != std::string::npos; at = text_.find(quoted, at + 1)) {
      std::size_t i = at + quoted.size();
      while (i < text_.size() && (text_[i] == ' ' || text_[i] == '\t' || text_[i] == '\n' || text_[i] == '\r')) ++i;
      if (i < text_.size() && text_[i] == ':') return at;
    }
    return std::string::npos;
  }

  std::string_view text_;
  std::vector<Diagnostic> diags_;
};

void read_target(Reader& rd, const json& t, int dim, TargetConfig& out) {
  if (!t.is_object()) return rd.error("/target", "expected an object");
  rd.check_keys(t, "/target", {"ball", "signed_distance"});
  if (t.contains("ball") == t.contains("signed_distance"))
    return rd.error("/target", "exactly one of \"ball\" or \"signed_distance\" required");
  if (const json* b = rd.member(t, "/target", "ball", false)) {
    out.kind = TargetConfig::Kind::Ball;
    if (!b->is_object()) return rd.error("/target/ball", "expected an object");
    rd.check_keys(*b, "/target/ball", {"center", "radius"});
    rd.vector(rd.member(*b, "/target/ball", "center", true), "/target/ball/center", dim, out.center);
    if (rd.number(rd.member(*b, "/target/ball", "radius", true), "/target/ball/radius", out.radius) &&
        !(out.radius >= 0.0))
      rd.error("/target/ball/radius", "radius must be nonnegative");
  } else {
    out.kind = TargetConfig::Kind::SignedDistance;
    rd.expr(&t["signed_distance"], "/target/signed_distance", dim, out.signed_distance);
  }
}

void read_clf(Reader& rd, const json& c, int dim, CLFConfig& out) {
  if (!c.is_object()) return rd.error("/clf", "expected an object");
  rd.check_keys(c, "/clf", {"distance_to_ball", "smooth", "max_of"});
  const int kinds = int(c.contains("distance_to_ball")) + int(c.contains("smooth")) + int(c.contains("max_of"));
  if (kinds != 1) return rd.error("/clf", "exactly one of \"distance_to_ball\", \"smooth\" or \"max_of\" required");
  if (const json* b = rd.member(c, "/clf", "distance_to_ball", false)) {
    out.kind = CLFConfig::Kind::DistanceToBall;
    if (!b->is_object()) return rd.error("/clf/distance_to_ball", "expected an object");
    rd.check_keys(*b, "/clf/distance_to_ball", {"center", "radius"});
    rd.vector(rd.member(*b, "/clf/distance_to_ball", "center", true), "/clf/distance_to_ball/center", dim,
              out.center);
    rd.number(rd.member(*b, "/clf/distance_to_ball", "radius", true), "/clf/distance_to_ball/radius", out.radius);
  } else if (const json* s = rd.member(c, "/clf", "smooth", false)) {
    out.kind = CLFConfig::Kind::Smooth;
    rd.expr(s, "/clf/smooth", dim, out.u);
  } else {
    out.kind = CLFConfig::Kind::MaxOf;
    const json& m = c["max_of"];
    if (!m.is_object()) return rd.error("/clf/max_of", "expected an object");
    rd.check_keys(m, "/clf/max_of", {"pieces", "activity_tol"});
    const json* p = rd.member(m, "/clf/max_of", "pieces", true);
    if (p && (!p->is_array() || p->empty())) {
      rd.error("/clf/max_of/pieces", "expected a nonempty array of expressions");
    } else if (p) {
      out.pieces.assign(p->size(), Expr());
      for (std::size_t i = 0; i < p->size(); ++i)
        rd.expr(&(*p)[i], fmt::format("/clf/max_of/pieces/{}", i), dim, out.pieces[i]);
    }
    rd.number(rd.member(m, "/clf/max_of", "activity_tol", false), "/clf/max_of/activity_tol", out.activity_tol);
  }
}

void read_sampler(Reader& rd, const json& s, int dim, SamplerConfig& out) {
  if (!s.is_object()) return rd.error("/sampler", "expected an object");
  rd.check_keys(s, "/sampler", {"kind", "lower", "upper", "seed", "grid_per_axis", "points"});
  if (const json* k = rd.member(s, "/sampler", "kind", false)) {
    const std::string kind = k->is_string() ? k->get<std::string>() : "";
    if (kind == "halton")
      out.kind = SamplerKind::Halton;
    else if (kind == "grid")
      out.kind = SamplerKind::Grid;
    else if (kind == "points")
      out.kind = SamplerKind::Points;
    else
      rd.error("/sampler/kind", "expected \"halton\", \"grid\" or \"points\"");
  }
  const bool box = out.kind != SamplerKind::Points;
  rd.vector(rd.member(s, "/sampler", "lower", box), "/sampler/lower", dim, out.lower);
  rd.vector(rd.member(s, "/sampler", "upper", box), "/sampler/upper", dim, out.upper);
  rd.number(rd.member(s, "/sampler", "seed", false), "/sampler/seed", out.seed);
  if (rd.number(rd.member(s, "/sampler", "grid_per_axis", false), "/sampler/grid_per_axis", out.grid_per_axis) &&
      out.grid_per_axis < 1)
    rd.error("/sampler/grid_per_axis", "must be at least 1");
  if (const json* p = rd.member(s, "/sampler", "points", out.kind == SamplerKind::Points)) {
    if (!p->is_array()) {
      rd.error("/sampler/points", "expected an array of points");
    } else {
      out.points.resize(p->size());
      for (std::size_t i = 0; i < p->size(); ++i)
        rd.vector(&(*p)[i], fmt::format("/sampler/points/{}", i), dim, out.points[i]);
    }
  }
}

json field_json(const std::vector<Expr>& f) {
  json a = json::array();
  for (const Expr& e : f) a.push_back(to_string(e));
  return a;
}

Vec to_vec(const std::vector<double>& v) { return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size())); }

}  // namespace

SystemConfig parse_config(std::string_view text) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    Diagnostic d;
    std::tie(d.line, d.column) = line_column(text, e.byte > 0 ? e.byte - 1 : 0);
    std::string msg = e.what();
    if (const auto at = msg.find("syntax error"); at != std::string::npos) msg = msg.substr(at);
    d.message = msg;
    throw ConfigError({d});
  }
  Reader rd(text);
  SystemConfig cfg;
  if (!root.is_object()) {
    rd.error("", "top level must be an object");
    throw ConfigError(std::move(rd.diagnostics()));
  }
  rd.check_keys(root, "", {"name", "description", "dimension", "generators", "drift", "smoothness", "k",
                           "eps_drift", "target", "clf", "sampler", "verify", "gamma", "synthesis", "certify"});
  if (const json* n = rd.member(root, "", "name", false); n && n->is_string()) cfg.name = n->get<std::string>();
  if (const json* n = rd.member(root, "", "description", false); n && n->is_string())
    cfg.description = n->get<std::string>();
  if (!rd.number(rd.member(root, "", "dimension", true), "/dimension", cfg.dim) || cfg.dim < 1) {
    if (root.contains("dimension")) rd.error("/dimension", "dimension must be a positive integer");
    throw ConfigError(std::move(rd.diagnostics()));
  }
  const int n = cfg.dim;

  const json* gens = rd.member(root, "", "generators", true);
  if (gens && (!gens->is_array() || gens->empty())) {
    rd.error("/generators", "at least one generator required");
  } else if (gens) {
    for (std::size_t g = 0; g < gens->size(); ++g) {
      const std::string path = fmt::format("/generators/{}", g);
      const json& gj = (*gens)[g];
      GeneratorConfig gc;
      if (gj.is_object()) {
        rd.check_keys(gj, path, {"field", "pieces"});
        rd.field(rd.member(gj, path, "field", true), path + "/field", n, gc.field);
        if (const json* ps = rd.member(gj, path, "pieces", false)) {
          if (!ps->is_array() || ps->empty()) {
            rd.error(path + "/pieces", "expected a nonempty array of pieces");
          } else {
            for (std::size_t i = 0; i < ps->size(); ++i) {
              const std::string pp = fmt::format("{}/pieces/{}", path, i);
              const json& pj = (*ps)[i];
              PieceConfig pc;
              if (!pj.is_object()) {
                rd.error(pp, "expected an object with \"guards\" and \"field\"");
                continue;
              }
              rd.check_keys(pj, pp, {"guards", "field"});
              if (const json* gs = rd.member(pj, pp, "guards", true)) {
                if (!gs->is_array()) {
                  rd.error(pp + "/guards", "expected an array of expressions");
                } else {
                  pc.guards.assign(gs->size(), Expr());
                  for (std::size_t q = 0; q < gs->size(); ++q)
                    rd.expr(&(*gs)[q], fmt::format("{}/guards/{}", pp, q), n, pc.guards[q]);
                }
              }
              rd.field(rd.member(pj, pp, "field", true), pp + "/field", n, pc.field);
              gc.pieces.push_back(std::move(pc));
            }
          }
        }
      } else {
        rd.field(&gj, path, n, gc.field);
      }
      cfg.generators.push_back(std::move(gc));
    }
  }
  if (const json* d = rd.member(root, "", "drift", false)) {
    std::vector<Expr> f;
    if (rd.field(d, "/drift", n, f)) cfg.drift = std::move(f);
  }
  if (const json* s = rd.member(root, "", "smoothness", false)) {
    const std::string v = s->is_string() ? s->get<std::string>() : "";
    if (v == "smooth")
      cfg.smoothness = Smoothness::Smooth;
    else if (v == "lipschitz")
      cfg.smoothness = Smoothness::Lipschitz;
    else
      rd.error("/smoothness", "expected \"smooth\" or \"lipschitz\"");
  }
  if (rd.number(rd.member(root, "", "k", true), "/k", cfg.k) && cfg.k < 1) rd.error("/k", "k must be at least 1");
  if (rd.number(rd.member(root, "", "eps_drift", false), "/eps_drift", cfg.eps_drift) && !(cfg.eps_drift >= 0.0))
    rd.error("/eps_drift", "must be nonnegative");
  if (const json* t = rd.member(root, "", "target", true)) read_target(rd, *t, n, cfg.target);
  if (const json* c = rd.member(root, "", "clf", true)) read_clf(rd, *c, n, cfg.clf);
  if (const json* s = rd.member(root, "", "sampler", true)) read_sampler(rd, *s, n, cfg.sampler);

  if (const json* v = rd.member(root, "", "verify", false)) {
    if (!v->is_object()) {
      rd.error("/verify", "expected an object");
    } else {
      rd.check_keys(*v, "/verify", {"level_max", "samples"});
      if (rd.number(rd.member(*v, "/verify", "level_max", false), "/verify/level_max", cfg.level_max) &&
          !(cfg.level_max > 0.0))
        rd.error("/verify/level_max", "must be positive");
      rd.number(rd.member(*v, "/verify", "samples", false), "/verify/samples", cfg.samples);
    }
  }
  if (const json* g = rd.member(root, "", "gamma", false)) {
    if (!g->is_object()) {
      rd.error("/gamma", "expected an object");
    } else {
      rd.check_keys(*g, "/gamma", {"levels", "per_level", "breakpoints"});
      if (rd.number(rd.member(*g, "/gamma", "levels", false), "/gamma/levels", cfg.gamma_levels) &&
          cfg.gamma_levels < 1)
        rd.error("/gamma/levels", "must be at least 1");
      if (rd.number(rd.member(*g, "/gamma", "per_level", false), "/gamma/per_level", cfg.gamma_per_level) &&
          cfg.gamma_per_level < 1)
        rd.error("/gamma/per_level", "must be at least 1");
      if (const json* b = rd.member(*g, "/gamma", "breakpoints", false)) {
        bool ok = b->is_array();
        for (std::size_t i = 0; ok && i < b->size(); ++i) {
          std::vector<double> pt;
          ok = rd.vector(&(*b)[i], fmt::format("/gamma/breakpoints/{}", i), 2, pt);
          if (ok) cfg.gamma_breakpoints.emplace_back(pt[0], pt[1]);
        }
        if (!b->is_array()) rd.error("/gamma/breakpoints", "expected an array of [u, gamma] pairs");
      }
    }
  }
  if (const json* s = rd.member(root, "", "synthesis", false)) {
    if (!s->is_object()) {
      rd.error("/synthesis", "expected an object");
    } else {
      rd.check_keys(*s, "/synthesis", {"x0", "eps_d", "field_bound", "substeps", "max_halvings", "max_steps"});
      std::vector<double> x0;
      if (rd.vector(rd.member(*s, "/synthesis", "x0", false), "/synthesis/x0", n, x0)) cfg.x0 = x0;
      rd.number(rd.member(*s, "/synthesis", "eps_d", false), "/synthesis/eps_d", cfg.eps_d);
      if (rd.number(rd.member(*s, "/synthesis", "field_bound", false), "/synthesis/field_bound", cfg.field_bound) &&
          !(cfg.field_bound > 0.0))
        rd.error("/synthesis/field_bound", "must be positive");
      if (rd.number(rd.member(*s, "/synthesis", "substeps", false), "/synthesis/substeps", cfg.substeps) &&
          cfg.substeps < 1)
        rd.error("/synthesis/substeps", "must be at least 1");
      rd.number(rd.member(*s, "/synthesis", "max_halvings", false), "/synthesis/max_halvings", cfg.max_halvings);
      rd.number(rd.member(*s, "/synthesis", "max_steps", false), "/synthesis/max_steps", cfg.max_steps);
    }
  }
  if (const json* c = rd.member(root, "", "certify", false)) {
    if (!c->is_object()) {
      rd.error("/certify", "expected an object");
    } else {
      rd.check_keys(*c, "/certify", {"levels"});
      if (rd.number(rd.member(*c, "/certify", "levels", false), "/certify/levels", cfg.certify_levels) &&
          cfg.certify_levels < 1)
        rd.error("/certify/levels", "must be at least 1");
    }
  }
  if (!rd.diagnostics().empty()) throw ConfigError(std::move(rd.diagnostics()));
  return cfg;
}

SystemConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Config, fmt::format("cannot read {}", path));
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string emit_config(const SystemConfig& cfg) {
  json root;
  if (!cfg.name.empty()) root["name"] = cfg.name;
  if (!cfg.description.empty()) root["description"] = cfg.description;
  root["dimension"] = cfg.dim;
  json gens = json::array();
  for (const GeneratorConfig& g : cfg.generators) {
    if (g.pieces.empty()) {
      gens.push_back(field_json(g.field));
      continue;
    }
    json pieces = json::array();
    for (const PieceConfig& p : g.pieces) pieces.push_back({{"guards", field_json(p.guards)}, {"field", field_json(p.field)}});
    gens.push_back({{"field", field_json(g.field)}, {"pieces", pieces}});
  }
  root["generators"] = gens;
  if (cfg.drift) root["drift"] = field_json(*cfg.drift);
  root["smoothness"] = cfg.smoothness == Smoothness::Smooth ? "smooth" : "lipschitz";
  root["k"] = cfg.k;
  root["eps_drift"] = cfg.eps_drift;
  if (cfg.target.kind == TargetConfig::Kind::Ball)
    root["target"] = {{"ball", {{"center", cfg.target.center}, {"radius", cfg.target.radius}}}};
  else
    root["target"] = {{"signed_distance", to_string(cfg.target.signed_distance)}};
  switch (cfg.clf.kind) {
    case CLFConfig::Kind::DistanceToBall:
      root["clf"] = {{"distance_to_ball", {{"center", cfg.clf.center}, {"radius", cfg.clf.radius}}}};
      break;
    case CLFConfig::Kind::Smooth:
      root["clf"] = {{"smooth", to_string(cfg.clf.u)}};
      break;
    case CLFConfig::Kind::MaxOf:
      root["clf"] = {{"max_of", {{"pieces", field_json(cfg.clf.pieces)}, {"activity_tol", cfg.clf.activity_tol}}}};
      break;
  }
  json s;
  s["kind"] = cfg.sampler.kind == SamplerKind::Halton ? "halton" : cfg.sampler.kind == SamplerKind::Grid ? "grid" : "points";
  if (!cfg.sampler.lower.empty()) s["lower"] = cfg.sampler.lower;
  if (!cfg.sampler.upper.empty()) s["upper"] = cfg.sampler.upper;
  s["seed"] = cfg.sampler.seed;
  s["grid_per_axis"] = cfg.sampler.grid_per_axis;
  if (!cfg.sampler.points.empty()) s["points"] = cfg.sampler.points;
  root["sampler"] = s;
  root["verify"] = {{"level_max", cfg.level_max}, {"samples", cfg.samples}};
  json g = {{"levels", cfg.gamma_levels}, {"per_level", cfg.gamma_per_level}};
  if (!cfg.gamma_breakpoints.empty()) {
    json b = json::array();
    for (const auto& [u, v] : cfg.gamma_breakpoints) b.push_back({u, v});
    g["breakpoints"] = b;
  }
  root["gamma"] = g;
  json syn = {{"eps_d", cfg.eps_d},
              {"field_bound", cfg.field_bound},
              {"substeps", cfg.substeps},
              {"max_halvings", cfg.max_halvings},
              {"max_steps", cfg.max_steps}};
  if (cfg.x0) syn["x0"] = *cfg.x0;
  root["synthesis"] = syn;
  root["certify"] = {{"levels", cfg.certify_levels}};
  return root.dump(2) + "\n";
}

System build_system(const SystemConfig& cfg) {
  SystemDef def;
  def.dim = cfg.dim;
  def.k = cfg.k;
  def.smoothness = cfg.smoothness;
  def.eps_drift = cfg.eps_drift;
  bool explicit_pieces = false;
  for (const GeneratorConfig& g : cfg.generators) {
    def.generators.emplace_back(cfg.dim, g.field);
    explicit_pieces |= !g.pieces.empty();
  }
  if (explicit_pieces) {
    for (std::size_t i = 0; i < cfg.generators.size(); ++i) {
      const GeneratorConfig& g = cfg.generators[i];
      if (g.pieces.empty()) {
        def.pieces.push_back(PiecewiseVectorFieldDef::decompose_kinks(def.generators[i]));
        continue;
      }
      std::vector<Piece> pieces;
      for (const PieceConfig& p : g.pieces) pieces.push_back({p.guards, VectorFieldDef(cfg.dim, p.field)});
      def.pieces.emplace_back(cfg.dim, std::move(pieces));
    }
  }
  if (cfg.drift) def.drift = VectorFieldDef(cfg.dim, *cfg.drift);
  return System(std::move(def));
}

TargetDef build_target(const SystemConfig& cfg) {
  if (cfg.target.kind == TargetConfig::Kind::Ball) return TargetDef(Ball{to_vec(cfg.target.center), cfg.target.radius});
  return TargetDef(SignedDistance{cfg.target.signed_distance});
}

CLFCandidate build_clf(const SystemConfig& cfg) {
  switch (cfg.clf.kind) {
    case CLFConfig::Kind::DistanceToBall:
      return CLFCandidate::distance_to_ball(to_vec(cfg.clf.center), cfg.clf.radius);
    case CLFConfig::Kind::Smooth:
      return CLFCandidate::smooth(cfg.dim, cfg.clf.u);
    case CLFConfig::Kind::MaxOf:
      break;
  }
  return CLFCandidate::max_of(cfg.dim, cfg.clf.pieces, cfg.clf.activity_tol);
}

SamplerSpec build_sampler(const SystemConfig& cfg) {
  SamplerSpec s;
  s.kind = cfg.sampler.kind;
  if (!cfg.sampler.lower.empty()) s.lower = to_vec(cfg.sampler.lower);
  if (!cfg.sampler.upper.empty()) s.upper = to_vec(cfg.sampler.upper);
  s.seed = cfg.sampler.seed;
  s.grid_per_axis = cfg.sampler.grid_per_axis;
  for (const auto& p : cfg.sampler.points) s.points.push_back(to_vec(p));
  return s;
}

SynthesisOptions build_synthesis_options(const SystemConfig& cfg) {
  SynthesisOptions o;
  o.step.field_bound = cfg.field_bound;
  o.step.substeps = cfg.substeps;
  o.step.max_halvings = cfg.max_halvings;
  o.eps_d = cfg.eps_d;
  o.max_steps = cfg.max_steps;
  return o;
}

}  // namespace lieclf
