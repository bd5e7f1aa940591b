#include "lieclf/runs.hpp"

#include <algorithm>

namespace lieclf {

Problem::Problem(SystemConfig cfg)
    : config(std::move(cfg)),
      system(build_system(config)),
      target(build_target(config)),
      clf(build_clf(config)),
      sampler(build_sampler(config)) {}

GammaFn margin_for_start(const Problem& pb, const Vec& x0) {
  const SystemConfig& cfg = pb.config;
  if (!cfg.gamma_breakpoints.empty()) return GammaFn(cfg.gamma_breakpoints);
  const double top = std::min(cfg.level_max, pb.clf.value(x0));
  if (!(top > 0.0)) throw Error(ErrorKind::InvalidArgument, "start point has no positive level");
  const Region region{top, &pb.target};
  return estimate_gamma(pb.system, pb.clf, region, pb.sampler, cfg.gamma_levels, cfg.gamma_per_level).gamma;
}

long max_segment_count(const System& sys) {
  long r = 1;
  for (const Direction& d : sys.directions()) r = std::max(r, d.r);
  return r;
}

KLFunction certificate_for(const Problem& pb, const Trajectory& traj, const GammaFn& gamma) {
  if (traj.checkpoints.empty()) throw Error(ErrorKind::InvalidArgument, "empty trajectory");
  const SystemConfig& cfg = pb.config;
  const double u_max = traj.checkpoints.front().u;
  KLInputs in;
  in.gamma = gamma;
  in.tau = tau_lower_table(traj, u_max, cfg.certify_levels);
  in.r_k = max_segment_count(pb.system);
  in.k = pb.system.k();
  in.field_bound = cfg.field_bound;
  in.u_max = u_max;
  std::vector<Vec> samples;
  if (!candidate_is_distance(pb.clf, pb.target))
    samples = sample_region(pb.sampler, pb.clf, Region{u_max, &pb.target}, cfg.samples);
  in.distance = level_distance_tables(pb.clf, pb.target, samples, u_max, cfg.certify_levels);
  return build_kl(std::move(in));
}

CertifiedRun certified_run(const Problem& pb, const Vec& x0, const SynthesisOptions& opt) {
  GammaFn gamma = margin_for_start(pb, x0);
  Trajectory traj = synthesize(pb.system, pb.clf, pb.target, x0, gamma, opt);
  KLFunction kl = certificate_for(pb, traj, gamma);
  EnvelopeReport env = check_envelope(traj, kl, pb.target);
  return {std::move(gamma), std::move(traj), std::move(kl), env};
}

}  // namespace lieclf
