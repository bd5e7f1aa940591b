#pragma once

// End-to-end runs assembled from a configuration: margin estimation for a
// synthesis start, the synthesis itself, and its KL certificate.

#include "lieclf/certify.hpp"
#include "lieclf/config.hpp"

namespace lieclf {

/// Everything a run needs, built once from the configuration.
struct Problem {
  SystemConfig config;
  System system;
  TargetDef target;
  CLFCandidate clf;
  SamplerSpec sampler;

  explicit Problem(SystemConfig cfg);
};

/// Explicit breakpoints when configured; otherwise estimated on levels
/// (0, min(level_max, U(x0))], extended constantly above.
GammaFn margin_for_start(const Problem& pb, const Vec& x0);

struct CertifiedRun {
  GammaFn gamma;
  Trajectory trajectory;
  KLFunction kl;
  EnvelopeReport envelope;
};

/// Synthesizes from x0 and builds the certificate over levels (0, U(x0)].
/// Propagates SynthesisFailure.
CertifiedRun certified_run(const Problem& pb, const Vec& x0, const SynthesisOptions& opt);

KLFunction certificate_for(const Problem& pb, const Trajectory& traj, const GammaFn& gamma);

/// Largest segment count over the system's direction family.
long max_segment_count(const System& sys);

}  // namespace lieclf
