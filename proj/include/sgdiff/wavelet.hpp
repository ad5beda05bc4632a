#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "sgdiff/field.hpp"

// Single-level orthonormal 2D Haar transform, subband energy, the
// quantile-thresholded importance-weight map, and per-subband errors.

namespace sgdiff {

/// Haar analysis of each non-overlapping 2x2 block [[a,b],[c,d]] (rows = y):
///   LL = (a+b+c+d)/2,  HL = (a-b+c-d)/2  (high-pass along x),
///   LH = (a+b-c-d)/2  (high-pass along y),  HH = (a-b-c+d)/2.
/// Orthonormal: the four subbands preserve the input sum of squares.
struct DwtSubbands {
  Field ll, lh, hl, hh;
};

inline DwtSubbands dwt2_haar(const Field& f) {
  if (f.rows() % 2 != 0 || f.cols() % 2 != 0)
    throw std::invalid_argument("dwt2_haar: field dimensions must be even");
  const int hr = f.rows() / 2, hc = f.cols() / 2;
  DwtSubbands s{Field(hr, hc), Field(hr, hc), Field(hr, hc), Field(hr, hc)};
  for (int iy = 0; iy < hr; ++iy) {
    for (int ix = 0; ix < hc; ++ix) {
      const double a = f(2 * iy, 2 * ix);
      const double b = f(2 * iy, 2 * ix + 1);
      const double c = f(2 * iy + 1, 2 * ix);
      const double d = f(2 * iy + 1, 2 * ix + 1);
      s.ll(iy, ix) = 0.5 * (a + b + c + d);
      s.hl(iy, ix) = 0.5 * (a - b + c - d);
      s.lh(iy, ix) = 0.5 * (a + b - c - d);
      s.hh(iy, ix) = 0.5 * (a - b - c + d);
    }
  }
  return s;
}

inline Field idwt2_haar(const DwtSubbands& s) {
  if (!s.ll.same_shape(s.lh) || !s.ll.same_shape(s.hl) || !s.ll.same_shape(s.hh))
    throw std::invalid_argument("idwt2_haar: subband shape mismatch");
  Field f(2 * s.ll.rows(), 2 * s.ll.cols());
  for (int iy = 0; iy < s.ll.rows(); ++iy) {
    for (int ix = 0; ix < s.ll.cols(); ++ix) {
      const double ll = s.ll(iy, ix), hl = s.hl(iy, ix);
      const double lh = s.lh(iy, ix), hh = s.hh(iy, ix);
      f(2 * iy, 2 * ix) = 0.5 * (ll + hl + lh + hh);
      f(2 * iy, 2 * ix + 1) = 0.5 * (ll - hl + lh - hh);
      f(2 * iy + 1, 2 * ix) = 0.5 * (ll + hl - lh - hh);
      f(2 * iy + 1, 2 * ix + 1) = 0.5 * (ll - hl - lh + hh);
    }
  }
  return f;
}

/// Pointwise high-frequency energy F = HL^2 + LH^2 + HH^2.
inline Field subband_energy(const DwtSubbands& s) {
  Field f(s.hl.rows(), s.hl.cols());
  for (std::size_t i = 0; i < f.size(); ++i)
    f[i] = s.hl[i] * s.hl[i] + s.lh[i] * s.lh[i] + s.hh[i] * s.hh[i];
  return f;
}

struct ImportanceParams {
  double alpha = 1.25;  // minimum boosted weight
  double beta = 6.0;    // maximum weight
  double theta = 0.8;   // quantile threshold
};

/// Per-pixel loss multipliers: 1 for pixels at or below the theta quantile
/// of the upsampled energy, linearly mapped into (alpha, beta] above it.
struct ImportanceMap {
  Field weights;
  ImportanceParams params;
};

/// Linear-interpolated empirical quantile of all values.
inline double quantile_linear(std::vector<double> values, double theta) {
  if (values.empty()) throw std::invalid_argument("quantile_linear: empty input");
  std::sort(values.begin(), values.end());
  const double pos = theta * static_cast<double>(values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  if (lo + 1 >= values.size()) return values.back();
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

inline ImportanceMap importance_map(const Field& energy, const ImportanceParams& p) {
  if (!(p.alpha >= 1.0) || !(p.beta >= p.alpha))
    throw std::invalid_argument("importance_map: need 1 <= alpha <= beta");
  if (!(p.theta > 0.0 && p.theta < 1.0))
    throw std::invalid_argument("importance_map: theta must lie in (0, 1)");

  const Field up = upsample_nearest(energy, 2);
  std::vector<double> flat(up.data(), up.data() + up.size());
  const double q = quantile_linear(flat, p.theta);
  const double peak = field_max(up);

  ImportanceMap map{Field(up.rows(), up.cols(), 1.0), p};
  if (peak <= q) return map;  // degenerate: no pixel exceeds the quantile
  for (std::size_t i = 0; i < up.size(); ++i) {
    if (up[i] > q) map.weights[i] = p.alpha + (p.beta - p.alpha) * (up[i] - q) / (peak - q);
  }
  return map;
}

inline ImportanceMap importance_map_of(const Field& frame, const ImportanceParams& p) {
  return importance_map(subband_energy(dwt2_haar(frame)), p);
}

struct SubbandError {
  double hh = 0.0;
  double hl = 0.0;
  double ll = 0.0;
  double lh = 0.0;
};

/// Per-subband mean squared error between the Haar transforms of two fields.
inline SubbandError subband_l2(const Field& pred, const Field& truth) {
  if (!pred.same_shape(truth)) throw std::invalid_argument("subband_l2: shape mismatch");
  const DwtSubbands a = dwt2_haar(pred);
  const DwtSubbands b = dwt2_haar(truth);
  auto mse = [](const Field& x, const Field& y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double d = x[i] - y[i];
      s += d * d;
    }
    return s / static_cast<double>(x.size());
  };
  return SubbandError{mse(a.hh, b.hh), mse(a.hl, b.hl), mse(a.ll, b.ll), mse(a.lh, b.lh)};
}

}  // namespace sgdiff
