#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "sgdiff/diffusion.hpp"
#include "sgdiff/errors.hpp"
#include "sgdiff/fft.hpp"
#include "sgdiff/field.hpp"
#include "sgdiff/rng.hpp"
#include "sgdiff/spectral.hpp"
#include "sgdiff/wavelet.hpp"

// Trainable clean-sample predictor: a per-time-bin, radially binned diagonal
// Fourier gain. Deliberately small so the full pipeline runs in minutes,
// while exercising the same training objective a richer network would use.
// Training minimizes the importance-weighted reconstruction loss by plain
// gradient descent on the gains; the gradient of the physical-space loss
// with respect to each diagonal gain is analytic (chain rule through the two
// transforms).

namespace sgdiff {

class SpectralGainDenoiser final : public Denoiser {
 public:
  SpectralGainDenoiser(FourierGrid grid, int time_bins, int radial_bins, double horizon = 1.0)
      : grid_(std::move(grid)),
        time_bins_(time_bins),
        radial_bins_(radial_bins),
        horizon_(horizon),
        gains_(static_cast<std::size_t>(time_bins) * radial_bins, 1.0) {
    if (time_bins < 1 || radial_bins < 1)
      throw std::invalid_argument("SpectralGainDenoiser: bins must be positive");
    double kmax_sq = 0.0;
    for (double v : grid_.ksq) kmax_sq = std::max(kmax_sq, v);
    k_max_ = std::sqrt(kmax_sq);
    radial_bin_.resize(grid_.ksq.size());
    for (std::size_t i = 0; i < grid_.ksq.size(); ++i) {
      const double kmag = std::sqrt(grid_.ksq[i]);
      const int b = static_cast<int>(std::floor(kmag * radial_bins_ / k_max_));
      radial_bin_[i] = std::min(b, radial_bins_ - 1);
    }
  }

  int time_bins() const { return time_bins_; }
  int radial_bins() const { return radial_bins_; }
  double horizon() const { return horizon_; }
  const FourierGrid& grid() const { return grid_; }
  const std::vector<double>& gains() const { return gains_; }
  std::vector<double>& gains() { return gains_; }
  const std::vector<int>& radial_bins_per_mode() const { return radial_bin_; }

  /// Pooled rms of the training set. The gain filter itself is linear, so
  /// this does not enter predict_field; the diffusion pipeline divides by it
  /// to run in the unit-scale units the gains were trained at.
  double data_scale() const { return data_scale_; }
  void set_data_scale(double s) {
    if (!(s > 0.0)) throw std::invalid_argument("SpectralGainDenoiser: data scale must be > 0");
    data_scale_ = s;
  }

  /// Nearest time bin for t in [0, horizon].
  int time_bin(double t) const {
    if (t < 0.0 || t > horizon_)
      throw std::invalid_argument("SpectralGainDenoiser: t outside schedule horizon");
    return std::min(static_cast<int>(std::floor(t / horizon_ * time_bins_)), time_bins_ - 1);
  }

  double gain(int tb, int rb) const { return gains_[static_cast<std::size_t>(tb) * radial_bins_ + rb]; }

  /// x0_hat = inverse-transform(gain .* forward-transform(x_t)). The gains
  /// are real and radially symmetric, so the output stays real.
  Field predict_field(const Field& x_t, double t) const {
    if (x_t.rows() != grid_.n || x_t.cols() != grid_.n)
      throw std::invalid_argument("SpectralGainDenoiser: field does not match grid");
    const int tb = time_bin(t);
    auto hat = fft::forward(x_t);
    const double* row = &gains_[static_cast<std::size_t>(tb) * radial_bins_];
    for (std::size_t i = 0; i < hat.size(); ++i) hat[i] *= row[radial_bin_[i]];
    return fft::inverse(hat, grid_.n);
  }

  Sample predict(const Sample& x_t, double t) const override {
    Sample out;
    out.reserve(x_t.size());
    for (const Field& c : x_t) out.push_back(predict_field(c, t));
    return out;
  }

 private:
  FourierGrid grid_;
  int time_bins_;
  int radial_bins_;
  double horizon_;
  double k_max_ = 0.0;
  double data_scale_ = 1.0;
  std::vector<double> gains_;     // time_bins x radial_bins, row-major
  std::vector<int> radial_bin_;   // per-mode radial bin index
};

/// Importance-weighted reconstruction loss: mean over pixels of
/// a_{i,j} * (x0 - x0_hat)^2.
inline double iw_loss(const Field& x0, const Field& x0_hat, const Field& weights) {
  if (!x0.same_shape(x0_hat) || !x0.same_shape(weights))
    throw std::invalid_argument("iw_loss: shape mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < x0.size(); ++i) {
    const double e = x0[i] - x0_hat[i];
    s += weights[i] * e * e;
  }
  return s / static_cast<double>(x0.size());
}

inline double iw_loss(const Field& x0, const Field& x0_hat, const ImportanceMap& map) {
  return iw_loss(x0, x0_hat, map.weights);
}

/// Loss and gains-gradient of one training draw (x0, t, noise). Only the
/// row of the sampled time bin receives gradient; grad must hold
/// time_bins * radial_bins entries and is overwritten. weights may be null
/// for the unweighted loss.
inline double gain_loss_and_gradient(const SpectralGainDenoiser& d, const Field& x0, double t,
                                     const Field& noise, const VpSchedule& s,
                                     const Field* weights, std::vector<double>& grad) {
  const int n = d.grid().n;
  if (x0.rows() != n || x0.cols() != n)
    throw std::invalid_argument("gain_loss_and_gradient: field does not match grid");
  const std::size_t count = x0.size();
  const double inv_count = 1.0 / static_cast<double>(count);

  const Field x_t = forward_noise(x0, t, s, noise);
  const auto x_t_hat = fft::forward(x_t);

  const int tb = d.time_bin(t);
  const double* row = &d.gains()[static_cast<std::size_t>(tb) * d.radial_bins()];
  auto filtered = x_t_hat;
  const auto& rb = d.radial_bins_per_mode();
  for (std::size_t i = 0; i < filtered.size(); ++i) filtered[i] *= row[rb[i]];
  const Field x0_hat = fft::inverse(filtered, n);

  // q = dL/d x0_hat = -(2/n^2) a .* (x0 - x0_hat)
  Field q(n, n);
  double loss = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    const double a = weights ? (*weights)[i] : 1.0;
    const double e = x0[i] - x0_hat[i];
    loss += a * e * e;
    q[i] = -2.0 * inv_count * a * e;
  }
  loss *= inv_count;

  const auto q_hat = fft::forward(q);
  grad.assign(d.gains().size(), 0.0);
  double* grad_row = &grad[static_cast<std::size_t>(tb) * d.radial_bins()];
  for (std::size_t i = 0; i < q_hat.size(); ++i) {
    grad_row[rb[i]] += inv_count * (x_t_hat[i] * std::conj(q_hat[i])).real();
  }
  return loss;
}

struct TrainOptions {
  int epochs = 200;
  double lr = 0.05;
  std::uint64_t seed = 0;
  bool use_importance_weights = true;
  ImportanceParams iw{};
  int time_bins = 32;
  int radial_bins = 16;
  double noise_scale = 1.0;        // diagnostic: 0 trains on noiseless pairs
  bool sample_bin_centers = false; // diagnostic: draw t at time-bin centers
};

struct TrainResult {
  SpectralGainDenoiser denoiser;
  std::vector<double> epoch_loss;  // running average per epoch
};

/// Stochastic gradient descent on the gains over (frame, t, noise) draws,
/// t ~ Uniform(0, T) and fresh noise per sample. Importance maps come from
/// each frame's own wavelet energy, or are all-ones when the flag is off.
/// Frames are rescaled to pooled unit rms before training so the objective
/// is conditioned independently of the dataset's amplitude; the scale is
/// stored on the returned denoiser for the sampling pipeline.
inline TrainResult fit_spectral_gains(const std::vector<Field>& frames_in,
                                      const FourierGrid& grid, const VpSchedule& s,
                                      const TrainOptions& opt) {
  if (frames_in.empty()) throw std::invalid_argument("fit_spectral_gains: empty dataset");
  for (const Field& f : frames_in)
    if (f.rows() != grid.n || f.cols() != grid.n)
      throw std::invalid_argument("fit_spectral_gains: frame does not match grid");

  double pooled_sq = 0.0;
  std::size_t count = 0;
  for (const Field& f : frames_in) {
    pooled_sq += field_sum_sq(f);
    count += f.size();
  }
  const double scale = pooled_sq > 0.0 ? std::sqrt(pooled_sq / count) : 1.0;
  std::vector<Field> frames = frames_in;
  for (Field& f : frames) f *= 1.0 / scale;

  TrainResult result{SpectralGainDenoiser(grid, opt.time_bins, opt.radial_bins, s.horizon()), {}};
  auto& den = result.denoiser;
  den.set_data_scale(scale);

  std::vector<Field> weights;
  if (opt.use_importance_weights) {
    weights.reserve(frames.size());
    for (const Field& f : frames) weights.push_back(importance_map_of(f, opt.iw).weights);
  }

  Rng rng(opt.seed);
  std::vector<double> grad;
  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    double epoch_loss = 0.0;
    for (std::size_t fi = 0; fi < frames.size(); ++fi) {
      double t;
      if (opt.sample_bin_centers) {
        const int tb = rng.uniform_int(0, opt.time_bins - 1);
        t = (tb + 0.5) / opt.time_bins * s.horizon();
      } else {
        t = rng.uniform(0.0, s.horizon());
      }
      Field noise = rng.normal_field(grid.n, grid.n, opt.noise_scale);
      const Field* w = opt.use_importance_weights ? &weights[fi] : nullptr;
      const double loss = gain_loss_and_gradient(den, frames[fi], t, noise, s, w, grad);
      if (!std::isfinite(loss))
        throw NumericalError("fit_spectral_gains: non-finite loss", static_cast<double>(epoch));
      const int tb = den.time_bin(t);
      double* row = &den.gains()[static_cast<std::size_t>(tb) * opt.radial_bins];
      const double* grad_row = &grad[static_cast<std::size_t>(tb) * opt.radial_bins];
      for (int rb = 0; rb < opt.radial_bins; ++rb) row[rb] -= opt.lr * grad_row[rb];
      epoch_loss += loss;
    }
    result.epoch_loss.push_back(epoch_loss / static_cast<double>(frames.size()));
  }
  return result;
}

}  // namespace sgdiff
