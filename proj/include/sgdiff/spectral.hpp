#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "sgdiff/fft.hpp"
#include "sgdiff/field.hpp"
#include "sgdiff/rng.hpp"

// Fourier-space primitives on periodic square grids: wavenumbers, the 2/3
// dealiasing mask, spectral differentiation, streamfunction/velocity
// recovery, and Gaussian random fields.

namespace sgdiff {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

/// Wavenumber bookkeeping for an n x n periodic grid.
///   kx[j] = (2*pi/Lx)*j for j < n/2 and (2*pi/Lx)*(j-n) for j >= n/2,
/// the standard FFT ordering; ky likewise. dealias_mask is 0 exactly where
/// the integer mode index exceeds floor(n/3) in either direction.
struct FourierGrid {
  int n = 0;
  double Lx = 0.0;
  double Ly = 0.0;
  std::vector<double> kx;                  // size n
  std::vector<double> ky;                  // size n
  std::vector<double> ksq;                 // n*n, row-major (iy, ix)
  std::vector<std::uint8_t> dealias_mask;  // n*n, 1 = keep

  std::size_t index(int iy, int ix) const { return static_cast<std::size_t>(iy) * n + ix; }
};

inline FourierGrid wavenumber_grid(int n, double Lx, double Ly) {
  if (n < 4 || n % 2 != 0)
    throw std::invalid_argument("wavenumber_grid: n must be even and at least 4");
  if (!(Lx > 0.0) || !(Ly > 0.0))
    throw std::invalid_argument("wavenumber_grid: domain lengths must be positive");

  FourierGrid g;
  g.n = n;
  g.Lx = Lx;
  g.Ly = Ly;
  g.kx.resize(n);
  g.ky.resize(n);
  for (int j = 0; j < n; ++j) {
    const int mode = j < n / 2 ? j : j - n;
    g.kx[j] = kTwoPi / Lx * mode;
    g.ky[j] = kTwoPi / Ly * mode;
  }

  g.ksq.resize(static_cast<std::size_t>(n) * n);
  g.dealias_mask.resize(g.ksq.size());
  const int keep = n / 3;  // 2/3 rule: zero |j| > floor(n/3)
  for (int iy = 0; iy < n; ++iy) {
    const int my = iy < n / 2 ? iy : iy - n;
    for (int ix = 0; ix < n; ++ix) {
      const int mx = ix < n / 2 ? ix : ix - n;
      const std::size_t i = g.index(iy, ix);
      g.ksq[i] = g.kx[ix] * g.kx[ix] + g.ky[iy] * g.ky[iy];
      g.dealias_mask[i] = (std::abs(mx) > keep || std::abs(my) > keep) ? 0 : 1;
    }
  }
  return g;
}

enum class Axis { X, Y };

namespace spectral_detail {

/// Multiplies a spectrum by i*k along one axis in place. The Nyquist line is
/// zeroed: it has no conjugate partner, so an odd multiplier there would
/// break the Hermitian symmetry that keeps the inverse transform real.
inline void apply_ik(std::vector<fft::Complex>& hat, const FourierGrid& g, Axis axis) {
  const int n = g.n;
  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix < n; ++ix) {
      const std::size_t i = g.index(iy, ix);
      const int j = axis == Axis::X ? ix : iy;
      if (j == n / 2) {
        hat[i] = 0.0;
        continue;
      }
      const double k = axis == Axis::X ? g.kx[ix] : g.ky[iy];
      hat[i] *= fft::Complex(0.0, k);
    }
  }
}

inline void check_grid(const Field& f, const FourierGrid& g, const char* who) {
  if (f.rows() != g.n || f.cols() != g.n)
    throw std::invalid_argument(std::string(who) + ": field dimensions do not match grid");
}

}  // namespace spectral_detail

/// Exact derivative of the band-limited interpolant along the given axis.
inline Field spectral_derivative(const Field& f, const FourierGrid& g, Axis axis) {
  spectral_detail::check_grid(f, g, "spectral_derivative");
  auto hat = fft::forward(f);
  spectral_detail::apply_ik(hat, g, axis);
  return fft::inverse(hat, g.n);
}

inline VorticityField spectral_derivative(const VorticityField& f, Axis axis) {
  const FourierGrid g = wavenumber_grid(f.data.rows(), f.Lx, f.Ly);
  return VorticityField{spectral_derivative(f.data, g, axis), f.Lx, f.Ly, f.time};
}

inline Field laplacian(const Field& f, const FourierGrid& g) {
  spectral_detail::check_grid(f, g, "laplacian");
  auto hat = fft::forward(f);
  for (std::size_t i = 0; i < hat.size(); ++i) hat[i] *= -g.ksq[i];
  return fft::inverse(hat, g.n);
}

/// Zeroes all modes outside the 2/3 band.
inline Field dealias(const Field& f, const FourierGrid& g) {
  spectral_detail::check_grid(f, g, "dealias");
  auto hat = fft::forward(f);
  for (std::size_t i = 0; i < hat.size(); ++i)
    if (!g.dealias_mask[i]) hat[i] = 0.0;
  return fft::inverse(hat, g.n);
}

namespace spectral_detail {

/// Spectral-space velocity recovery: psi_hat = w_hat / |k|^2 with the
/// psi_hat(0,0) = 0 gauge, then u = d(psi)/dy, v = -d(psi)/dx.
inline void velocity_hat(const std::vector<fft::Complex>& w_hat, const FourierGrid& g,
                         std::vector<fft::Complex>& u_hat, std::vector<fft::Complex>& v_hat) {
  u_hat.assign(w_hat.size(), fft::Complex(0.0, 0.0));
  v_hat.assign(w_hat.size(), fft::Complex(0.0, 0.0));
  const int n = g.n;
  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix < n; ++ix) {
      const std::size_t i = g.index(iy, ix);
      if (g.ksq[i] == 0.0) continue;
      const fft::Complex psi = w_hat[i] / g.ksq[i];
      if (iy != n / 2) u_hat[i] = fft::Complex(0.0, g.ky[iy]) * psi;
      if (ix != n / 2) v_hat[i] = fft::Complex(0.0, -g.kx[ix]) * psi;
    }
  }
}

}  // namespace spectral_detail

/// Velocity (u, v) from vorticity via the streamfunction, with the
/// convention w = -Laplacian(psi), u = d(psi)/dy, v = -d(psi)/dx.
inline std::pair<Field, Field> velocity_from_vorticity(const Field& w, const FourierGrid& g) {
  spectral_detail::check_grid(w, g, "velocity_from_vorticity");
  auto w_hat = fft::forward(w);
  std::vector<fft::Complex> u_hat, v_hat;
  spectral_detail::velocity_hat(w_hat, g, u_hat, v_hat);
  return {fft::inverse(u_hat, g.n), fft::inverse(v_hat, g.n)};
}

inline std::pair<Field, Field> velocity_from_vorticity(const VorticityField& w,
                                                       const FourierGrid& g) {
  return velocity_from_vorticity(w.data, g);
}

/// Isotropic Gaussian random field spectrum: density ~ (|k|^2 + cutoff^2)^(-power).
/// amplitude is the expected pointwise standard deviation of the field.
struct GrfSpectrum {
  double amplitude = 1.0;
  double power = 2.5;   // must exceed 1 for an integrable spectrum
  double cutoff = 7.0;  // spectral rolloff scale tau
};

/// Filter white noise by (|k|^2 + tau^2)^(-power/2): the result is real,
/// zero-mean, with the requested expected spectral density, then rescaled so
/// the expected pointwise std equals spectrum.amplitude. Deterministic per seed.
inline Field gaussian_random_field(const FourierGrid& g, const GrfSpectrum& spectrum,
                                   std::uint64_t seed) {
  if (!(spectrum.power > 1.0))
    throw std::invalid_argument("gaussian_random_field: power must exceed 1");
  if (spectrum.amplitude < 0.0)
    throw std::invalid_argument("gaussian_random_field: amplitude must be non-negative");
  if (spectrum.amplitude == 0.0) return Field(g.n, g.n, 0.0);

  Rng rng(seed);
  Field white = rng.normal_field(g.n, g.n);
  auto hat = fft::forward(white);

  double variance = 0.0;  // expected Var of the filtered field, for normalization
  for (std::size_t i = 0; i < hat.size(); ++i) {
    if (g.ksq[i] == 0.0) {
      hat[i] = 0.0;  // zero mean
      continue;
    }
    const double filter =
        std::pow(g.ksq[i] + spectrum.cutoff * spectrum.cutoff, -0.5 * spectrum.power);
    hat[i] *= filter;
    variance += filter * filter;
  }
  variance /= static_cast<double>(g.n) * g.n;
  Field out = fft::inverse(hat, g.n);
  out *= spectrum.amplitude / std::sqrt(variance);
  return out;
}

/// 0.5 * mean(u^2 + v^2) of the velocity field induced by vorticity w.
inline double kinetic_energy(const Field& w, const FourierGrid& g) {
  auto [u, v] = velocity_from_vorticity(w, g);
  return 0.5 * (field_sum_sq(u) + field_sum_sq(v)) / static_cast<double>(w.size());
}

/// mean(w^2).
inline double enstrophy(const Field& w) {
  return field_sum_sq(w) / static_cast<double>(w.size());
}

}  // namespace sgdiff
