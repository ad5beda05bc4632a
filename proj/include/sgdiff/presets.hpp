#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "sgdiff/diffusion.hpp"
#include "sgdiff/solver.hpp"
#include "sgdiff/wavelet.hpp"

// Flat JSON run configuration with per-dataset presets. Precedence:
// preset defaults < config file < command-line flags. The effective config
// is echoed into every output directory.

namespace sgdiff {

struct RunConfig {
  std::string preset = "kolmogorov";

  // dataset generation
  int n = 64;           // stored (high-fidelity) resolution
  int gen_factor = 4;   // generate at gen_factor * n, then downsample
  int trajectories = 5;
  std::uint64_t seed = 0;

  // solver
  double Re = 1000.0;
  double T = 2.0;
  double dt_record = 1.0 / 32.0;
  double dt_max = 1.0 / 32.0;
  double cfl_c = 0.5;
  bool adaptive = true;
  double Lx = kTwoPi;
  double Ly = kTwoPi;

  // forcing (kolmogorov preset)
  double forcing_amplitude = 4.0;
  int forcing_wavenumber = 4;
  double forcing_drag = 0.1;
  double burn_in = 5.0;

  // initial conditions
  double tgv_U0 = 1.0;
  int tgv_k = 4;
  double tgv_perturb_rel = 0.1;  // perturbation std relative to max |w0|
  int vortex_count_min = 5;
  int vortex_count_max = 20;
  double vortex_core_rel_min = 0.05;  // core radius relative to Lx
  double vortex_core_rel_max = 0.15;
  double vortex_speed_min = 0.5;
  double vortex_speed_max = 1.5;
  double grf_amplitude = 1.0;
  double grf_power = 2.5;
  double grf_cutoff = 7.0;

  // degradation / reconstruction geometry
  int factor = 4;

  // diffusion
  double beta_min = 0.1;
  double beta_max = 20.0;
  int steps = 128;       // K reverse steps
  double t_guide = 0.4;

  // importance weights
  double iw_alpha = 1.25;
  double iw_beta = 6.0;
  double iw_theta = 0.8;

  // corrector
  int corrector_steps = 10;     // M
  double corrector_eta = 0.05;  // eta
  std::string policy = "start_end";
  int policy_n = 2;
  int policy_i = 2;
  int policy_s = 1;

  // ablations
  bool use_corrector = true;
  bool use_importance_weights = true;

  // training
  int epochs = 200;
  double lr = 0.05;
  int time_bins = 32;
  int radial_bins = 16;
};

inline void apply_preset(RunConfig& c, const std::string& name) {
  c.preset = name;
  // Sampler values from the schedule-sweep on Kolmogorov validation data,
  // applied across datasets (see README, "Desk-scale presets").
  c.t_guide = 0.1;
  c.corrector_steps = 2;
  c.corrector_eta = 0.005;
  if (name == "taylor_green") {
    c.Lx = c.Ly = 1.5 * M_PI;
    c.Re = 1000.0;
    c.T = 2.0;
    c.trajectories = 10;
  } else if (name == "decaying") {
    c.Lx = c.Ly = 1.0;
    c.Re = 450.0;
    c.T = 1.0;
    c.trajectories = 40;
  } else if (name == "kolmogorov") {
    c.Lx = c.Ly = kTwoPi;
    c.Re = 1000.0;
    c.T = 2.0;
    c.trajectories = 5;
  } else if (name == "mcwilliams") {
    c.Lx = c.Ly = kTwoPi;
    c.Re = 2000.0;
    c.T = 2.0;
    c.trajectories = 5;
  } else {
    throw std::invalid_argument("unknown preset: " + name);
  }
}

#define SGDIFF_CONFIG_FIELDS(X)                                                               \
  X(preset) X(n) X(gen_factor) X(trajectories) X(seed) X(Re) X(T) X(dt_record) X(dt_max)      \
  X(cfl_c) X(adaptive) X(Lx) X(Ly) X(forcing_amplitude) X(forcing_wavenumber)                 \
  X(forcing_drag) X(burn_in) X(tgv_U0) X(tgv_k) X(tgv_perturb_rel) X(vortex_count_min)        \
  X(vortex_count_max) X(vortex_core_rel_min) X(vortex_core_rel_max) X(vortex_speed_min)       \
  X(vortex_speed_max) X(grf_amplitude) X(grf_power) X(grf_cutoff) X(factor) X(beta_min)       \
  X(beta_max) X(steps) X(t_guide) X(iw_alpha) X(iw_beta) X(iw_theta) X(corrector_steps)       \
  X(corrector_eta) X(policy) X(policy_n) X(policy_i) X(policy_s) X(use_corrector)             \
  X(use_importance_weights) X(epochs) X(lr) X(time_bins) X(radial_bins)

inline nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json j;
#define SGDIFF_PUT(name) j[#name] = c.name;
  SGDIFF_CONFIG_FIELDS(SGDIFF_PUT)
#undef SGDIFF_PUT
  return j;
}

/// Overrides fields present in j; unknown keys are rejected.
inline void merge_json(RunConfig& c, const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("config: expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
#define SGDIFF_GET(name)                            \
    if (key == #name) {                             \
      value.get_to(c.name);                         \
      known = true;                                 \
    }
    SGDIFF_CONFIG_FIELDS(SGDIFF_GET)
#undef SGDIFF_GET
    if (!known) throw std::invalid_argument("config: unknown key '" + key + "'");
  }
}

inline RunConfig load_config_file(const RunConfig& base, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  nlohmann::json j;
  in >> j;
  RunConfig c = base;
  if (j.contains("preset")) apply_preset(c, j["preset"].get<std::string>());
  merge_json(c, j);
  return c;
}

inline SolverConfig solver_config(const RunConfig& c, int resolution) {
  SolverConfig s;
  s.Re = c.Re;
  s.dt_record = c.dt_record;
  s.dt_max = c.dt_max;
  s.cfl_c = c.cfl_c;
  s.adaptive = c.adaptive;
  s.T = c.T;
  s.Lx = c.Lx;
  s.Ly = c.Ly;
  s.n = resolution;
  if (c.preset == "kolmogorov")
    s.forcing = kolmogorov_forcing(c.forcing_amplitude, c.forcing_wavenumber, c.forcing_drag);
  return s;
}

inline VpSchedule vp_schedule(const RunConfig& c) { return VpSchedule(c.beta_min, c.beta_max); }

inline ImportanceParams importance_params(const RunConfig& c) {
  return ImportanceParams{c.iw_alpha, c.iw_beta, c.iw_theta};
}

inline CorrectionSchedule correction_schedule(const std::string& policy, int n, int i, int s,
                                              int steps) {
  if (policy == "uniform") return schedule_uniform(n, steps);
  if (policy == "start_end") return schedule_start_end(i, n, steps);
  if (policy == "start_space") return schedule_start_space(n, s, steps);
  if (policy == "end_space") return schedule_end_space(n, s, steps);
  throw std::invalid_argument("unknown correction policy: " + policy);
}

inline SamplerConfig sampler_config(const RunConfig& c) {
  SamplerConfig s;
  s.steps = c.steps;
  s.t_guide = c.t_guide;
  s.corrector_steps = c.corrector_steps;
  s.corrector_eta = c.corrector_eta;
  s.schedule = correction_schedule(c.policy, c.policy_n, c.policy_i, c.policy_s, c.steps);
  s.seed = c.seed;
  s.use_corrector = c.use_corrector;
  s.use_importance_weights = c.use_importance_weights;
  return s;
}

/// FNV-1a over the canonical JSON dump; hex string for report rows.
inline std::string config_hash(const RunConfig& c) {
  const std::string dump = to_json(c).dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : dump) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

}  // namespace sgdiff
