#pragma once

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>

#include "sgdiff/field.hpp"
#include "sgdiff/wavelet.hpp"

// Scalar evaluation metrics: RMSE ("L2"), PSNR, SSIM, and the per-sample
// report row combining them with the physics and subband metrics.

namespace sgdiff {

/// Root-mean-square error.
inline double l2_error(const Field& pred, const Field& truth) {
  if (!pred.same_shape(truth)) throw std::invalid_argument("l2_error: shape mismatch");
  return field_rms_distance(pred, truth);
}

struct ImageMetrics {
  double psnr = 0.0;  // dB; +infinity for exact matches
  double ssim = 0.0;
};

namespace metrics_detail {

/// SSIM with an 11x11 Gaussian window (sigma 1.5), K1 = 0.01, K2 = 0.03.
/// Windows wrap periodically, matching the data's boundary conditions. The
/// dynamic range is the joint min/max of both fields so that the measure is
/// symmetric in its arguments.
inline double ssim_gaussian(const Field& a, const Field& b, double range) {
  constexpr int kRadius = 5;
  constexpr double kSigma = 1.5;
  double window[2 * kRadius + 1];
  double wsum = 0.0;
  for (int i = -kRadius; i <= kRadius; ++i) {
    window[i + kRadius] = std::exp(-0.5 * i * i / (kSigma * kSigma));
    wsum += window[i + kRadius];
  }
  for (double& w : window) w /= wsum;

  const double c1 = (0.01 * range) * (0.01 * range);
  const double c2 = (0.03 * range) * (0.03 * range);
  const int rows = a.rows(), cols = a.cols();

  auto wrap = [](int i, int n) { return ((i % n) + n) % n; };
  double total = 0.0;
  for (int iy = 0; iy < rows; ++iy) {
    for (int ix = 0; ix < cols; ++ix) {
      double mu_a = 0.0, mu_b = 0.0, aa = 0.0, bb = 0.0, ab = 0.0;
      for (int dy = -kRadius; dy <= kRadius; ++dy) {
        const int y = wrap(iy + dy, rows);
        const double wy = window[dy + kRadius];
        for (int dx = -kRadius; dx <= kRadius; ++dx) {
          const int x = wrap(ix + dx, cols);
          const double w = wy * window[dx + kRadius];
          const double va = a(y, x), vb = b(y, x);
          mu_a += w * va;
          mu_b += w * vb;
          aa += w * va * va;
          bb += w * vb * vb;
          ab += w * va * vb;
        }
      }
      const double var_a = aa - mu_a * mu_a;
      const double var_b = bb - mu_b * mu_b;
      const double cov = ab - mu_a * mu_b;
      total += ((2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)) /
               ((mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2));
    }
  }
  return total / static_cast<double>(a.size());
}

}  // namespace metrics_detail

/// PSNR (per-truth-frame dynamic range) and SSIM. Throws if the truth field
/// is constant, which leaves the PSNR range undefined.
inline ImageMetrics image_metrics(const Field& pred, const Field& truth) {
  if (!pred.same_shape(truth)) throw std::invalid_argument("image_metrics: shape mismatch");
  const double truth_range = field_max(truth) - field_min(truth);
  if (truth_range == 0.0)
    throw std::domain_error("image_metrics: constant truth field has undefined range");

  const double rmse = field_rms_distance(pred, truth);
  ImageMetrics m;
  m.psnr = rmse == 0.0 ? std::numeric_limits<double>::infinity()
                       : 20.0 * std::log10(truth_range / rmse);
  const double joint_range = std::max(field_max(pred), field_max(truth)) -
                             std::min(field_min(pred), field_min(truth));
  m.ssim = metrics_detail::ssim_gaussian(pred, truth, joint_range);
  return m;
}

/// One evaluated sample. psnr may be +infinity (serialized as "inf").
struct EvalReport {
  std::string sample_id;
  double l2 = 0.0;
  double residual_metric = 0.0;
  double psnr = 0.0;
  double ssim = 0.0;
  SubbandError subbands{};
  std::string config_hash;
};

inline std::string eval_csv_header() {
  return "sample_id,l2,residual_metric,psnr,ssim,sub_hh,sub_hl,sub_ll,sub_lh,config_hash";
}

inline std::string format_metric(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

inline std::string eval_csv_row(const EvalReport& r) {
  std::ostringstream os;
  os << r.sample_id << ',' << format_metric(r.l2) << ',' << format_metric(r.residual_metric)
     << ',' << format_metric(r.psnr) << ',' << format_metric(r.ssim) << ','
     << format_metric(r.subbands.hh) << ',' << format_metric(r.subbands.hl) << ','
     << format_metric(r.subbands.ll) << ',' << format_metric(r.subbands.lh) << ','
     << r.config_hash;
  return os.str();
}

}  // namespace sgdiff
