#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <vector>

#include "sgdiff/errors.hpp"
#include "sgdiff/field.hpp"
#include "sgdiff/rng.hpp"

// Variance-preserving diffusion: the linear beta schedule with closed-form
// marginals, guided-start noising, the reverse-SDE advancer, correction
// scheduling, the Adam residual corrector, and the predictor-corrector-
// advancer reverse sampler.

namespace sgdiff {

/// Linear variance schedule beta(t) = beta_min + (beta_max - beta_min) t / T
/// on t in [0, T], with B(t) = int_0^t beta(s) ds in closed form. The VP
/// marginals follow as mean_scale(t) = exp(-B/2), var(t) = 1 - exp(-B).
class VpSchedule {
 public:
  VpSchedule(double beta_min = 0.1, double beta_max = 20.0, double horizon = 1.0)
      : beta_min_(beta_min), beta_max_(beta_max), horizon_(horizon) {
    if (!(beta_min > 0.0) || !(beta_max >= beta_min) || !(horizon > 0.0))
      throw std::invalid_argument("VpSchedule: need 0 < beta_min <= beta_max and horizon > 0");
  }

  double beta_min() const { return beta_min_; }
  double beta_max() const { return beta_max_; }
  double horizon() const { return horizon_; }

  double beta(double t) const {
    check_time(t);
    return beta_min_ + (beta_max_ - beta_min_) * t / horizon_;
  }

  /// B(t) = beta_min*t + (beta_max - beta_min) t^2 / (2 T).
  double beta_integral(double t) const {
    check_time(t);
    return beta_min_ * t + 0.5 * (beta_max_ - beta_min_) * t * t / horizon_;
  }

  double mean_scale(double t) const { return std::exp(-0.5 * beta_integral(t)); }
  double variance(double t) const { return 1.0 - std::exp(-beta_integral(t)); }
  double stddev(double t) const { return std::sqrt(variance(t)); }

 private:
  void check_time(double t) const {
    if (t < 0.0 || t > horizon_) throw std::invalid_argument("VpSchedule: t out of [0, T]");
  }

  double beta_min_;
  double beta_max_;
  double horizon_;
};

struct Marginal {
  double mean_scale = 1.0;
  double stddev = 0.0;
};

inline Marginal marginal(const VpSchedule& s, double t) {
  return Marginal{s.mean_scale(t), s.stddev(t)};
}

/// Closed-form forward sample x_t = mean_scale(t) x0 + std(t) * noise.
inline Field forward_noise(const Field& x0, double t, const VpSchedule& s, const Field& noise) {
  if (!x0.same_shape(noise)) throw std::invalid_argument("forward_noise: shape mismatch");
  const Marginal m = marginal(s, t);
  Field out = x0;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = m.mean_scale * x0[i] + m.stddev * noise[i];
  return out;
}

inline Sample forward_noise(const Sample& x0, double t, const VpSchedule& s, const Sample& noise) {
  if (x0.size() != noise.size()) throw std::invalid_argument("forward_noise: channel mismatch");
  Sample out;
  out.reserve(x0.size());
  for (std::size_t c = 0; c < x0.size(); ++c) out.push_back(forward_noise(x0[c], t, s, noise[c]));
  return out;
}

/// Exact VP score given a clean estimate: -(x_t - mean_scale x0_hat) / var(t).
inline Field score_from_x0(const Field& x_t, const Field& x0_hat, double t, const VpSchedule& s) {
  if (!x_t.same_shape(x0_hat)) throw std::invalid_argument("score_from_x0: shape mismatch");
  const double var = s.variance(t);
  if (var == 0.0) throw std::domain_error("score_from_x0: division by zero at t = 0");
  const double ms = s.mean_scale(t);
  Field out = x_t;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = -(x_t[i] - ms * x0_hat[i]) / var;
  return out;
}

/// One Euler-Maruyama step of the reverse SDE:
///   x_{t-dt} = x_t - [f(x_t,t) - g(t)^2 score] dt + g(t) sqrt(dt) noise,
/// with f(x,t) = -0.5 beta(t) x and g(t)^2 = beta(t).
inline Field advancer_step(const Field& x_t, const Field& x0_hat, double t, double dt,
                           const VpSchedule& s, const Field& noise) {
  if (!(dt > 0.0) || t - dt < -1e-12) throw std::invalid_argument("advancer_step: invalid dt");
  if (!x_t.same_shape(noise)) throw std::invalid_argument("advancer_step: shape mismatch");
  const double b = s.beta(t);
  const double var = s.variance(t);
  if (var == 0.0) throw std::domain_error("advancer_step: zero variance at t = 0");
  const double ms = s.mean_scale(t);
  const double diffusion = std::sqrt(b * dt);
  Field out = x_t;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double score = -(x_t[i] - ms * x0_hat[i]) / var;
    const double drift = -0.5 * b * x_t[i] - b * score;
    out[i] = x_t[i] - drift * dt + diffusion * noise[i];
  }
  return out;
}

inline Sample advancer_step(const Sample& x_t, const Sample& x0_hat, double t, double dt,
                            const VpSchedule& s, const Sample& noise) {
  Sample out;
  out.reserve(x_t.size());
  for (std::size_t c = 0; c < x_t.size(); ++c)
    out.push_back(advancer_step(x_t[c], x0_hat[c], t, dt, s, noise[c]));
  return out;
}

enum class SchedulePolicy { UniformN, StartIEndN, StartNSpaceS, EndNSpaceS };

/// Reverse-step indices at which the corrector runs. Step K-1 is the first
/// reverse step (at t_guide, "Start"); step 0 is the last (t near 0, "End").
struct CorrectionSchedule {
  SchedulePolicy policy = SchedulePolicy::StartIEndN;
  std::vector<int> indices;  // sorted ascending

  bool contains(int i) const {
    return std::binary_search(indices.begin(), indices.end(), i);
  }
};

struct ScheduleParams {
  int count = 0;    // N
  int start = 0;    // I (StartIEndN only)
  int spacing = 1;  // S (spaced policies only)
};

inline CorrectionSchedule build_correction_schedule(SchedulePolicy policy, ScheduleParams p,
                                                    int steps) {
  if (steps < 1) throw std::invalid_argument("build_correction_schedule: steps must be >= 1");
  std::vector<int> idx;
  switch (policy) {
    case SchedulePolicy::UniformN:
      // N indices evenly spaced over {0..K-1}, midpoint convention.
      for (int j = 0; j < p.count; ++j)
        idx.push_back(static_cast<int>(std::floor((j + 0.5) * steps / p.count)));
      break;
    case SchedulePolicy::StartIEndN:
      for (int j = 0; j < p.start; ++j) idx.push_back(steps - 1 - j);
      for (int j = 0; j < p.count; ++j) idx.push_back(j);
      break;
    case SchedulePolicy::StartNSpaceS:
      if (p.spacing < 1) throw std::invalid_argument("build_correction_schedule: spacing >= 1");
      for (int j = 0; j < p.count; ++j) idx.push_back(steps - 1 - j * p.spacing);
      break;
    case SchedulePolicy::EndNSpaceS:
      if (p.spacing < 1) throw std::invalid_argument("build_correction_schedule: spacing >= 1");
      for (int j = 0; j < p.count; ++j) idx.push_back(j * p.spacing);
      break;
  }
  std::sort(idx.begin(), idx.end());
  if (!idx.empty() && (idx.front() < 0 || idx.back() >= steps))
    throw std::invalid_argument("build_correction_schedule: indices out of range");
  if (std::adjacent_find(idx.begin(), idx.end()) != idx.end())
    throw std::invalid_argument("build_correction_schedule: overlapping indices");
  return CorrectionSchedule{policy, std::move(idx)};
}

inline CorrectionSchedule schedule_uniform(int n, int steps) {
  return build_correction_schedule(SchedulePolicy::UniformN, {n, 0, 1}, steps);
}
inline CorrectionSchedule schedule_start_end(int start, int end, int steps) {
  return build_correction_schedule(SchedulePolicy::StartIEndN, {end, start, 1}, steps);
}
inline CorrectionSchedule schedule_start_space(int n, int spacing, int steps) {
  return build_correction_schedule(SchedulePolicy::StartNSpaceS, {n, 0, spacing}, steps);
}
inline CorrectionSchedule schedule_end_space(int n, int spacing, int steps) {
  return build_correction_schedule(SchedulePolicy::EndNSpaceS, {n, 0, spacing}, steps);
}

/// Scalar objective with gradient, evaluated on a multi-channel sample.
class ResidualOperator {
 public:
  virtual ~ResidualOperator() = default;
  virtual double value(const Sample& x) const = 0;
  virtual Sample gradient(const Sample& x) const = 0;
};

struct SamplerConfig {
  int steps = 128;      // K reverse steps
  double t_guide = 0.4; // guide time in (0, T)
  int corrector_steps = 10;    // M Adam updates per scheduled correction
  double corrector_eta = 0.05; // Adam step size
  double corrector_grad_tol = 1e-8;  // stop when sup-norm of gradient is below
  CorrectionSchedule schedule;
  std::uint64_t seed = 0;
  bool use_corrector = true;
  bool use_importance_weights = true;  // training-side ablation flag, carried for provenance
};

inline void validate_sampler_config(const SamplerConfig& c, const VpSchedule& s) {
  if (c.steps < 2) throw std::invalid_argument("SamplerConfig: steps must be >= 2");
  if (!(c.t_guide > 0.0 && c.t_guide < s.horizon()))
    throw std::invalid_argument("SamplerConfig: t_guide must lie in (0, T)");
  if (c.corrector_steps < 0) throw std::invalid_argument("SamplerConfig: M must be >= 0");
  if (!(c.corrector_eta > 0.0)) throw std::invalid_argument("SamplerConfig: eta must be > 0");
}

/// M bias-corrected Adam updates (beta1 = 0.9, beta2 = 0.999, eps = 1e-8) on
/// the residual objective, with fresh moment state. Stops early once the
/// gradient sup-norm falls below grad_tol, so near-exact inputs pass through
/// untouched.
inline Sample corrector_adam(Sample x, const ResidualOperator& residual, int m_steps, double eta,
                             double grad_tol = 1e-8) {
  if (m_steps < 0) throw std::invalid_argument("corrector_adam: M must be >= 0");
  if (!(eta > 0.0)) throw std::invalid_argument("corrector_adam: eta must be positive");
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;

  Sample m, v;
  for (const Field& c : x) {
    m.emplace_back(c.rows(), c.cols(), 0.0);
    v.emplace_back(c.rows(), c.cols(), 0.0);
  }
  for (int step = 1; step <= m_steps; ++step) {
    const Sample grad = residual.gradient(x);
    double sup = 0.0;
    for (const Field& gc : grad) {
      if (!field_finite(gc))
        throw NumericalError("corrector_adam: non-finite gradient", static_cast<double>(step));
      sup = std::max(sup, field_max_abs(gc));
    }
    if (sup < grad_tol) break;
    const double c1 = 1.0 - std::pow(kBeta1, step);
    const double c2 = 1.0 - std::pow(kBeta2, step);
    for (std::size_t c = 0; c < x.size(); ++c) {
      for (std::size_t i = 0; i < x[c].size(); ++i) {
        const double g = grad[c][i];
        m[c][i] = kBeta1 * m[c][i] + (1.0 - kBeta1) * g;
        v[c][i] = kBeta2 * v[c][i] + (1.0 - kBeta2) * g * g;
        const double m_hat = m[c][i] / c1;
        const double v_hat = v[c][i] / c2;
        x[c][i] -= eta * m_hat / (std::sqrt(v_hat) + kEps);
      }
    }
  }
  return x;
}

/// Clean-sample predictor abstraction used by the reverse sampler.
class Denoiser {
 public:
  virtual ~Denoiser() = default;
  /// Predicts the clean sample from a noised sample at diffusion time t.
  virtual Sample predict(const Sample& x_t, double t) const = 0;
};

/// Test double: always returns the stored truth.
class OracleDenoiser final : public Denoiser {
 public:
  explicit OracleDenoiser(Sample truth) : truth_(std::move(truth)) {}
  explicit OracleDenoiser(Field truth) : truth_{std::move(truth)} {}
  Sample predict(const Sample&, double) const override { return truth_; }

 private:
  Sample truth_;
};

/// Predictor-corrector-advancer reverse sampler.
///
/// The guide (the low-fidelity sample, already upsampled to the target grid)
/// is noised to t_guide; then for reverse steps i = K-1 .. 0 the predictor
/// estimates the clean sample, the corrector runs Adam on the PDE residual at
/// scheduled step indices, and the advancer takes one Euler-Maruyama step
/// (skipped at i = 0, where only noise of vanishing scale would be added).
/// The output is the final, possibly corrected, clean estimate.
inline Sample reconstruct(const Sample& guide, const Denoiser& denoiser,
                          const ResidualOperator* residual, const SamplerConfig& cfg,
                          const VpSchedule& schedule) {
  validate_sampler_config(cfg, schedule);
  if (guide.empty()) throw std::invalid_argument("reconstruct: empty guide sample");
  if (cfg.use_corrector && !cfg.schedule.indices.empty() && residual == nullptr)
    throw std::invalid_argument("reconstruct: corrector enabled but no residual operator");

  Rng rng(cfg.seed);
  auto draw_noise = [&rng, &guide]() {
    Sample z;
    z.reserve(guide.size());
    for (const Field& c : guide) z.push_back(rng.normal_field(c.rows(), c.cols()));
    return z;
  };

  Sample x = forward_noise(guide, cfg.t_guide, schedule, draw_noise());
  const double dt = cfg.t_guide / cfg.steps;

  Sample x0_hat;
  for (int i = cfg.steps - 1; i >= 0; --i) {
    const double t = cfg.t_guide * (i + 1) / cfg.steps;
    x0_hat = denoiser.predict(x, t);
    if (cfg.use_corrector && cfg.schedule.contains(i))
      x0_hat = corrector_adam(std::move(x0_hat), *residual, cfg.corrector_steps,
                              cfg.corrector_eta, cfg.corrector_grad_tol);
    if (i > 0) x = advancer_step(x, x0_hat, t, dt, schedule, draw_noise());
  }
  return x0_hat;
}

}  // namespace sgdiff
