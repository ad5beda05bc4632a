#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sgdiff/errors.hpp"
#include "sgdiff/field.hpp"
#include "sgdiff/spectral.hpp"

// Pseudo-spectral integration of the 2D incompressible vorticity equation
//
//   dw/dt + u . grad(w) = (1/Re) Laplacian(w) + f,   div(u) = 0,
//
// on a periodic rectangle. Diffusion is treated implicitly by Crank-Nicolson
// in Fourier space; advection and forcing advance explicitly with Heun's
// two-stage average. Time steps adapt to the CFL condition and are clamped
// so every record time is hit exactly.

namespace sgdiff {

enum class ForcingType { None, Kolmogorov };

/// Kolmogorov forcing f = -amplitude * cos(wavenumber * y) - drag * w.
struct Forcing {
  ForcingType type = ForcingType::None;
  double amplitude = 0.0;
  int wavenumber = 0;
  double drag = 0.0;
};

inline Forcing kolmogorov_forcing(double amplitude = 4.0, int wavenumber = 4,
                                  double drag = 0.1) {
  return Forcing{ForcingType::Kolmogorov, amplitude, wavenumber, drag};
}

struct SolverConfig {
  double Re = 1000.0;
  Forcing forcing{};
  double dt_record = 1.0 / 32.0;  // record interval
  double dt_max = 1.0 / 32.0;     // cap on the internal step
  double cfl_c = 0.5;             // CFL safety constant
  bool adaptive = true;
  double T = 1.0;  // total simulated time
  double Lx = kTwoPi;
  double Ly = kTwoPi;
  int n = 64;
};

inline void validate_solver_config(const SolverConfig& c) {
  if (!(c.Re > 0.0)) throw std::invalid_argument("SolverConfig: Re must be positive");
  if (!(c.dt_record > 0.0)) throw std::invalid_argument("SolverConfig: dt_record must be positive");
  if (!(c.dt_max > 0.0)) throw std::invalid_argument("SolverConfig: dt_max must be positive");
  if (!(c.cfl_c > 0.0 && c.cfl_c <= 1.0))
    throw std::invalid_argument("SolverConfig: cfl_c must lie in (0, 1]");
  if (c.T < 0.0) throw std::invalid_argument("SolverConfig: T must be non-negative");
}

/// Ordered frames recorded every dt_record, plus the producing config/seed.
struct Trajectory {
  std::vector<VorticityField> frames;
  SolverConfig config;
  std::uint64_t seed = 0;
};

namespace solver_detail {

/// Spectral-space nonlinear term N(w) = -u.grad(w) + f, dealiased.
/// u, v, and the physical vorticity are recomputed from w_hat.
inline std::vector<fft::Complex> nonlinear_hat(const std::vector<fft::Complex>& w_hat,
                                               const FourierGrid& g, const SolverConfig& cfg) {
  const int n = g.n;
  std::vector<fft::Complex> u_hat, v_hat;
  spectral_detail::velocity_hat(w_hat, g, u_hat, v_hat);
  const Field u = fft::inverse(u_hat, n);
  const Field v = fft::inverse(v_hat, n);

  auto wx_hat = w_hat;
  spectral_detail::apply_ik(wx_hat, g, Axis::X);
  auto wy_hat = w_hat;
  spectral_detail::apply_ik(wy_hat, g, Axis::Y);
  const Field wx = fft::inverse(wx_hat, n);
  const Field wy = fft::inverse(wy_hat, n);

  Field n_phys(n, n);
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix) n_phys(iy, ix) = -(u(iy, ix) * wx(iy, ix) + v(iy, ix) * wy(iy, ix));

  if (cfg.forcing.type == ForcingType::Kolmogorov) {
    for (int iy = 0; iy < n; ++iy) {
      const double y = g.Ly * iy / n;
      const double fy = -cfg.forcing.amplitude * std::cos(cfg.forcing.wavenumber * y);
      for (int ix = 0; ix < n; ++ix) n_phys(iy, ix) += fy;
    }
  }

  auto n_hat = fft::forward(n_phys);
  for (std::size_t i = 0; i < n_hat.size(); ++i) {
    if (!g.dealias_mask[i]) {
      n_hat[i] = 0.0;
      continue;
    }
    if (cfg.forcing.type == ForcingType::Kolmogorov) n_hat[i] -= cfg.forcing.drag * w_hat[i];
  }
  return n_hat;
}

/// One Crank-Nicolson + Heun substep in spectral space; output dealiased.
inline std::vector<fft::Complex> step_hat(const std::vector<fft::Complex>& w_hat, double dt,
                                          const FourierGrid& g, const SolverConfig& cfg) {
  const double nu = 1.0 / cfg.Re;
  const auto n1 = nonlinear_hat(w_hat, g, cfg);

  std::vector<fft::Complex> stage(w_hat.size());
  for (std::size_t i = 0; i < w_hat.size(); ++i) {
    const double half_visc = 0.5 * dt * nu * g.ksq[i];
    stage[i] = (w_hat[i] + dt * n1[i] - half_visc * w_hat[i]) / (1.0 + half_visc);
  }

  const auto n2 = nonlinear_hat(stage, g, cfg);
  std::vector<fft::Complex> out(w_hat.size());
  for (std::size_t i = 0; i < w_hat.size(); ++i) {
    const double half_visc = 0.5 * dt * nu * g.ksq[i];
    out[i] = (w_hat[i] + dt * 0.5 * (n1[i] + n2[i]) - half_visc * w_hat[i]) / (1.0 + half_visc);
    if (!g.dealias_mask[i]) out[i] = 0.0;
  }
  return out;
}

inline bool hat_finite(const std::vector<fft::Complex>& hat) {
  for (const auto& c : hat)
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) return false;
  return true;
}

inline double max_speed(const std::vector<fft::Complex>& w_hat, const FourierGrid& g) {
  std::vector<fft::Complex> u_hat, v_hat;
  spectral_detail::velocity_hat(w_hat, g, u_hat, v_hat);
  const Field u = fft::inverse(u_hat, g.n);
  const Field v = fft::inverse(v_hat, g.n);
  return std::max(field_max_abs(u), field_max_abs(v));
}

}  // namespace solver_detail

/// N(w) = -u.grad(w) + f with the product formed in physical space and the
/// result dealiased.
inline Field nonlinear_term(const VorticityField& w, const FourierGrid& g,
                            const SolverConfig& cfg) {
  spectral_detail::check_grid(w.data, g, "nonlinear_term");
  return fft::inverse(solver_detail::nonlinear_hat(fft::forward(w.data), g, cfg), g.n);
}

/// One time step of the vorticity equation.
inline VorticityField step_cn_heun(const VorticityField& w, double dt, const FourierGrid& g,
                                   const SolverConfig& cfg) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_cn_heun: dt must be positive");
  spectral_detail::check_grid(w.data, g, "step_cn_heun");
  auto out_hat = solver_detail::step_hat(fft::forward(w.data), dt, g, cfg);
  if (!solver_detail::hat_finite(out_hat))
    throw NumericalError("step_cn_heun: numerical blowup", w.time + dt);
  return VorticityField{fft::inverse(out_hat, g.n), w.Lx, w.Ly, w.time + dt};
}

/// CFL-limited time step: min(dt_max, cfl_c * dx / max speed), with a small
/// velocity floor so quiescent fields fall back to dt_max.
inline double cfl_dt(const VorticityField& w, const FourierGrid& g, const SolverConfig& cfg) {
  auto [u, v] = velocity_from_vorticity(w.data, g);
  const double speed = std::max({field_max_abs(u), field_max_abs(v), 1e-8});
  const double dx = cfg.Lx / cfg.n;
  return std::min(cfg.dt_max, cfg.cfl_c * dx / speed);
}

/// Integrates w0 for time T, recording a frame every dt_record. Substeps
/// adapt to the CFL bound (when enabled) and the last substep before each
/// record time is clamped to land on it exactly.
inline Trajectory simulate_trajectory(const VorticityField& w0, const SolverConfig& cfg,
                                      std::uint64_t seed = 0) {
  validate_solver_config(cfg);
  if (w0.data.rows() != cfg.n || w0.data.cols() != cfg.n)
    throw std::invalid_argument("simulate_trajectory: initial field does not match config n");
  if (!field_finite(w0.data))
    throw std::invalid_argument("simulate_trajectory: initial field is not finite");

  const FourierGrid g = wavenumber_grid(cfg.n, cfg.Lx, cfg.Ly);
  const int records = static_cast<int>(std::floor(cfg.T / cfg.dt_record + 1e-9));

  Trajectory traj;
  traj.config = cfg;
  traj.seed = seed;
  traj.frames.reserve(records + 1);
  traj.frames.push_back(VorticityField{w0.data, cfg.Lx, cfg.Ly, 0.0});

  auto w_hat = fft::forward(w0.data);
  double t = 0.0;
  const double dx = cfg.Lx / cfg.n;
  for (int rec = 1; rec <= records; ++rec) {
    const double t_target = rec * cfg.dt_record;
    while (t < t_target - 1e-12) {
      double dt = cfg.dt_max;
      if (cfg.adaptive) {
        const double speed = std::max(solver_detail::max_speed(w_hat, g), 1e-8);
        dt = std::min(dt, cfg.cfl_c * dx / speed);
      }
      dt = std::min(dt, t_target - t);
      w_hat = solver_detail::step_hat(w_hat, dt, g, cfg);
      if (!solver_detail::hat_finite(w_hat))
        throw NumericalError("simulate_trajectory: numerical blowup", t + dt);
      t += dt;
    }
    t = t_target;
    traj.frames.push_back(VorticityField{fft::inverse(w_hat, g.n), cfg.Lx, cfg.Ly, t_target});
  }
  return traj;
}

/// Taylor-Green vorticity w = -2*U0*k*sin(k x)*sin(k y), optionally
/// perturbed by a Gaussian random field of the given pointwise std.
inline VorticityField init_taylor_green(double U0, int k, double perturb_amplitude,
                                        const FourierGrid& g, std::uint64_t seed) {
  if (k <= 0) throw std::invalid_argument("init_taylor_green: k must be a positive integer");
  Field w(g.n, g.n);
  for (int iy = 0; iy < g.n; ++iy) {
    const double y = g.Ly * iy / g.n;
    for (int ix = 0; ix < g.n; ++ix) {
      const double x = g.Lx * ix / g.n;
      w(iy, ix) = -2.0 * U0 * k * std::sin(k * x) * std::sin(k * y);
    }
  }
  if (perturb_amplitude > 0.0) {
    GrfSpectrum spec;
    spec.amplitude = perturb_amplitude;
    w += gaussian_random_field(g, spec, seed);
  }
  return VorticityField{std::move(w), g.Lx, g.Ly, 0.0};
}

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

namespace solver_detail {

/// rho maximizing (1 - exp(-rho^2)) / rho: the radius (in core units) of the
/// peak azimuthal speed of a Gaussian vortex. Solved once by bisection.
inline double gaussian_vortex_peak_rho() {
  auto slope = [](double rho) {
    const double e = std::exp(-rho * rho);
    return 2.0 * rho * rho * e - (1.0 - e);
  };
  double lo = 0.5, hi = 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (slope(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace solver_detail

/// Adds one Gaussian vortex w(r) = Gamma / (pi rc^2) exp(-r^2 / rc^2) at
/// (x0, y0) together with its 8 periodic images. Gamma is chosen so the peak
/// azimuthal speed equals |peak_velocity|; its sign sets the rotation sense.
inline void add_gaussian_vortex(Field& w, double x0, double y0, double core_radius,
                                double peak_velocity, const FourierGrid& g) {
  if (!(core_radius > 0.0))
    throw std::invalid_argument("add_gaussian_vortex: core radius must be positive");
  static const double peak_rho = solver_detail::gaussian_vortex_peak_rho();
  static const double peak_shape = (1.0 - std::exp(-peak_rho * peak_rho)) / peak_rho;
  const double gamma = kTwoPi * core_radius * peak_velocity / peak_shape;
  const double peak = gamma / (M_PI * core_radius * core_radius);
  const double inv_rc2 = 1.0 / (core_radius * core_radius);
  for (int iy = 0; iy < g.n; ++iy) {
    const double y = g.Ly * iy / g.n;
    for (int ix = 0; ix < g.n; ++ix) {
      const double x = g.Lx * ix / g.n;
      double value = 0.0;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const double rx = x - (x0 + dx * g.Lx);
          const double ry = y - (y0 + dy * g.Ly);
          value += peak * std::exp(-(rx * rx + ry * ry) * inv_rc2);
        }
      }
      w(iy, ix) += value;
    }
  }
}

/// Superposition of randomly placed Gaussian vortices of varying core size
/// and peak speed; rotation sense is drawn at random. The assembled field is
/// shifted to zero mean.
inline VorticityField init_decaying(std::pair<int, int> count_range, Range core_radius_range,
                                    Range max_velocity_range, const FourierGrid& g,
                                    std::uint64_t seed) {
  if (count_range.first < 0 || count_range.second < count_range.first)
    throw std::invalid_argument("init_decaying: bad vortex count range");
  if (core_radius_range.lo <= 0.0 && count_range.second > 0)
    throw std::invalid_argument("init_decaying: core radius must be positive");

  Rng rng(seed);
  const int count = rng.uniform_int(count_range.first, count_range.second);
  Field w(g.n, g.n, 0.0);
  for (int iv = 0; iv < count; ++iv) {
    const double x0 = rng.uniform(0.0, g.Lx);
    const double y0 = rng.uniform(0.0, g.Ly);
    const double rc = rng.uniform(core_radius_range.lo, core_radius_range.hi);
    const double umax = rng.uniform(max_velocity_range.lo, max_velocity_range.hi);
    const double sign = rng.uniform() < 0.5 ? 1.0 : -1.0;
    add_gaussian_vortex(w, x0, y0, rc, sign * umax, g);
  }
  if (count > 0) {
    const double mean = field_mean(w);
    for (std::size_t i = 0; i < w.size(); ++i) w[i] -= mean;
  }
  return VorticityField{std::move(w), g.Lx, g.Ly, 0.0};
}

/// Gaussian-random-field seed evolved under the forced equation for the
/// burn-in interval; the final state becomes the initial condition.
inline VorticityField init_kolmogorov(const FourierGrid& g, const SolverConfig& cfg,
                                      std::uint64_t seed, double burn_in = 5.0,
                                      const GrfSpectrum& spectrum = GrfSpectrum{}) {
  if (cfg.forcing.type != ForcingType::Kolmogorov)
    throw std::invalid_argument("init_kolmogorov: config must enable kolmogorov forcing");
  VorticityField w0{gaussian_random_field(g, spectrum, seed), g.Lx, g.Ly, 0.0};
  if (burn_in <= 0.0) return w0;
  SolverConfig burn = cfg;
  burn.T = burn_in;
  burn.dt_record = burn_in;
  Trajectory traj = simulate_trajectory(w0, burn, seed);
  VorticityField out = std::move(traj.frames.back());
  out.time = 0.0;
  return out;
}

/// Random stream-function realization with spectrum
/// |psi_hat|^2 ~ |k|^-1 (1 + (|k|/6)^4)^-1, zero-mean psi, normalized so the
/// kinetic energy 0.5*mean(u^2+v^2) equals 0.5; returns w = -Laplacian(psi).
inline VorticityField init_mcwilliams(const FourierGrid& g, std::uint64_t seed) {
  if (g.n < 16) throw std::invalid_argument("init_mcwilliams: n must be at least 16");
  Rng rng(seed);
  Field white = rng.normal_field(g.n, g.n);
  auto psi_hat = fft::forward(white);
  for (int iy = 0; iy < g.n; ++iy) {
    for (int ix = 0; ix < g.n; ++ix) {
      const std::size_t i = g.index(iy, ix);
      if (g.ksq[i] == 0.0) {
        psi_hat[i] = 0.0;  // zero-mean stream function
        continue;
      }
      const double kmag = std::sqrt(g.ksq[i]);
      const double spectrum = 1.0 / (kmag * (1.0 + std::pow(kmag / 6.0, 4.0)));
      psi_hat[i] *= std::sqrt(spectrum);
    }
  }
  // w = -Laplacian(psi): multiply by |k|^2 in spectral space.
  auto w_hat = psi_hat;
  for (std::size_t i = 0; i < w_hat.size(); ++i) w_hat[i] *= g.ksq[i];
  Field w = fft::inverse(w_hat, g.n);
  const double ke = kinetic_energy(w, g);
  w *= std::sqrt(0.5 / ke);
  return VorticityField{std::move(w), g.Lx, g.Ly, 0.0};
}

enum class DegradePipeline {
  Solver,      // downsample the initial state, then integrate on the coarse grid
  Downsample,  // integrate at full resolution, then downsample every frame
};

/// High-fidelity trajectory plus its degraded counterpart (Fig-style pair).
inline std::pair<Trajectory, Trajectory> make_pair(const VorticityField& w0_high, int factor,
                                                   const SolverConfig& cfg, std::uint64_t seed,
                                                   DegradePipeline pipeline =
                                                       DegradePipeline::Solver) {
  if (factor <= 0 || cfg.n % factor != 0)
    throw std::invalid_argument("make_pair: factor must divide n");
  Trajectory high = simulate_trajectory(w0_high, cfg, seed);

  SolverConfig low_cfg = cfg;
  low_cfg.n = cfg.n / factor;
  Trajectory low;
  if (pipeline == DegradePipeline::Solver) {
    low = simulate_trajectory(downsample_uniform(w0_high, factor), low_cfg, seed);
  } else {
    low.config = low_cfg;
    low.seed = seed;
    low.frames.reserve(high.frames.size());
    for (const auto& f : high.frames) low.frames.push_back(downsample_uniform(f, factor));
  }
  return {std::move(low), std::move(high)};
}

}  // namespace sgdiff
