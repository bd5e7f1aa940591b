#pragma once

// JSON system descriptions: parsing with positioned diagnostics, canonical
// emission, and construction of the library objects they describe.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lieclf/certify.hpp"
#include "lieclf/clf.hpp"
#include "lieclf/hamiltonian.hpp"

namespace lieclf {

struct Diagnostic {
  int line = 0;    // 1-based, 0 when unknown
  int column = 0;
  std::string path;  // JSON pointer of the offending value
  std::string message;
  std::string str() const;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<Diagnostic> diagnostics);
  const std::vector<Diagnostic>& diagnostics() const noexcept { return diagnostics_; }

 private:
  std::vector<Diagnostic> diagnostics_;
};

struct PieceConfig {
  std::vector<Expr> guards;
  std::vector<Expr> field;
};

struct GeneratorConfig {
  std::vector<Expr> field;
  std::vector<PieceConfig> pieces;  // explicit decomposition, Lipschitz only
};

struct TargetConfig {
  enum class Kind { Ball, SignedDistance } kind = Kind::Ball;
  std::vector<double> center;
  double radius = 0.0;
  Expr signed_distance;
};

struct CLFConfig {
  enum class Kind { DistanceToBall, Smooth, MaxOf } kind = Kind::DistanceToBall;
  std::vector<double> center;
  double radius = 0.0;
  Expr u;
  std::vector<Expr> pieces;
  double activity_tol = 1e-9;
};

struct SamplerConfig {
  SamplerKind kind = SamplerKind::Halton;
  std::vector<double> lower;
  std::vector<double> upper;
  std::uint64_t seed = 0;
  int grid_per_axis = 21;
  std::vector<std::vector<double>> points;
};

struct SystemConfig {
  std::string name;
  std::string description;
  int dim = 0;
  std::vector<GeneratorConfig> generators;
  std::optional<std::vector<Expr>> drift;
  Smoothness smoothness = Smoothness::Smooth;
  int k = 1;
  double eps_drift = 1e-9;
  TargetConfig target;
  CLFConfig clf;
  SamplerConfig sampler;
  double level_max = 1.0;          // verification region 0 < U <= level_max
  std::size_t samples = 10000;
  int gamma_levels = 8;
  int gamma_per_level = 256;
  std::vector<std::pair<double, double>> gamma_breakpoints;  // explicit margin function
  std::optional<std::vector<double>> x0;
  double eps_d = 0.05;
  double field_bound = 1.0;
  int substeps = 32;
  int max_halvings = 40;
  std::size_t max_steps = 100000;
  int certify_levels = 64;
};

/// Throws ConfigError with every diagnostic found.
SystemConfig parse_config(std::string_view text);
SystemConfig load_config(const std::string& path);
/// Canonical JSON (sorted keys, two-space indent, trailing newline).
std::string emit_config(const SystemConfig& cfg);

System build_system(const SystemConfig& cfg);
TargetDef build_target(const SystemConfig& cfg);
CLFCandidate build_clf(const SystemConfig& cfg);
SamplerSpec build_sampler(const SystemConfig& cfg);
SynthesisOptions build_synthesis_options(const SystemConfig& cfg);

}  // namespace lieclf
