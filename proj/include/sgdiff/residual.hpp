#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "sgdiff/diffusion.hpp"
#include "sgdiff/field.hpp"
#include "sgdiff/solver.hpp"
#include "sgdiff/spectral.hpp"

// PDE residual of the vorticity equation on snapshot triplets. The time
// derivative is a central difference across the triplet; all spatial terms
// are evaluated spectrally at the middle frame:
//
//   r = (next - prev) / (2 dt) + u.grad(w) - (1/Re) Laplacian(w) - f(w).
//
// The gradient of mean(r^2) with respect to all three frames is assembled by
// the adjoint chain rule: the adjoint of a Fourier multiplier is the
// multiplier with conjugated symbol, so odd operators (derivatives, the
// velocity recovery) flip sign and the Laplacian is self-adjoint.

namespace sgdiff {

struct SnapshotTriplet {
  VorticityField prev, mid, next;
  double dt_record = 0.0;
};

inline void validate_triplet(const SnapshotTriplet& t) {
  if (!t.prev.data.same_shape(t.mid.data) || !t.mid.data.same_shape(t.next.data))
    throw std::invalid_argument("SnapshotTriplet: frame shape mismatch");
  if (!(t.dt_record > 0.0)) throw std::invalid_argument("SnapshotTriplet: dt_record must be > 0");
  const double d1 = t.mid.time - t.prev.time;
  const double d2 = t.next.time - t.mid.time;
  if (std::abs(d1 - t.dt_record) > 1e-9 || std::abs(d2 - t.dt_record) > 1e-9)
    throw std::invalid_argument("SnapshotTriplet: frames are not dt_record apart");
}

inline SnapshotTriplet make_triplet(const VorticityField& prev, const VorticityField& mid,
                                    const VorticityField& next, double dt_record) {
  SnapshotTriplet t{prev, mid, next, dt_record};
  validate_triplet(t);
  return t;
}

/// Builds a triplet from a 3-channel sample; frame times are implied.
inline SnapshotTriplet triplet_from_sample(const Sample& s, double Lx, double Ly,
                                           double dt_record) {
  if (s.size() != 3) throw std::invalid_argument("triplet_from_sample: need 3 channels");
  return SnapshotTriplet{VorticityField{s[0], Lx, Ly, 0.0},
                         VorticityField{s[1], Lx, Ly, dt_record},
                         VorticityField{s[2], Lx, Ly, 2.0 * dt_record}, dt_record};
}

struct ResidualResult {
  Field pointwise;
  double scalar = 0.0;  // mean of squares
};

namespace residual_detail {

inline Field forcing_field(const Field& w_mid, const FourierGrid& g, const SolverConfig& cfg) {
  Field f(g.n, g.n, 0.0);
  if (cfg.forcing.type == ForcingType::Kolmogorov) {
    for (int iy = 0; iy < g.n; ++iy) {
      const double y = g.Ly * iy / g.n;
      const double fy = -cfg.forcing.amplitude * std::cos(cfg.forcing.wavenumber * y);
      for (int ix = 0; ix < g.n; ++ix) f(iy, ix) = fy - cfg.forcing.drag * w_mid(iy, ix);
    }
  }
  return f;
}

/// The two components of the vorticity-to-velocity map applied to an
/// arbitrary field (same gauge and Nyquist handling as the forward map).
inline std::pair<Field, Field> velocity_map(const Field& f, const FourierGrid& g) {
  auto hat = fft::forward(f);
  std::vector<fft::Complex> u_hat, v_hat;
  spectral_detail::velocity_hat(hat, g, u_hat, v_hat);
  return {fft::inverse(u_hat, g.n), fft::inverse(v_hat, g.n)};
}

}  // namespace residual_detail

inline ResidualResult pde_residual(const SnapshotTriplet& trip, const FourierGrid& g,
                                   const SolverConfig& cfg) {
  validate_triplet(trip);
  spectral_detail::check_grid(trip.mid.data, g, "pde_residual");
  const double nu = 1.0 / cfg.Re;
  const double inv2dt = 1.0 / (2.0 * trip.dt_record);

  auto [u, v] = velocity_from_vorticity(trip.mid.data, g);
  const Field wx = spectral_derivative(trip.mid.data, g, Axis::X);
  const Field wy = spectral_derivative(trip.mid.data, g, Axis::Y);
  const Field lap = laplacian(trip.mid.data, g);
  const Field f = residual_detail::forcing_field(trip.mid.data, g, cfg);

  Field r(g.n, g.n);
  for (std::size_t i = 0; i < r.size(); ++i) {
    r[i] = (trip.next.data[i] - trip.prev.data[i]) * inv2dt + u[i] * wx[i] + v[i] * wy[i] -
           nu * lap[i] - f[i];
  }
  const double scalar = field_sum_sq(r) / static_cast<double>(r.size());
  return ResidualResult{std::move(r), scalar};
}

struct TripletGradient {
  Field prev, mid, next;
};

/// Exact gradient of the scalar residual with respect to all three frames.
inline TripletGradient residual_gradient(const SnapshotTriplet& trip, const FourierGrid& g,
                                         const SolverConfig& cfg) {
  const ResidualResult res = pde_residual(trip, g, cfg);
  const double nu = 1.0 / cfg.Re;
  const double inv2dt = 1.0 / (2.0 * trip.dt_record);
  const double inv_count = 1.0 / static_cast<double>(res.pointwise.size());

  // w = d(mean r^2)/dr
  Field w = res.pointwise;
  w *= 2.0 * inv_count;

  TripletGradient grad{Field(g.n, g.n), Field(g.n, g.n), Field(g.n, g.n)};
  for (std::size_t i = 0; i < w.size(); ++i) {
    grad.prev[i] = -w[i] * inv2dt;
    grad.next[i] = w[i] * inv2dt;
  }

  auto [u, v] = velocity_from_vorticity(trip.mid.data, g);
  const Field wx = spectral_derivative(trip.mid.data, g, Axis::X);
  const Field wy = spectral_derivative(trip.mid.data, g, Axis::Y);

  // Advection adjoint: u-path and v-path through the velocity map, plus the
  // grad(w) path through the derivatives (odd operators change sign).
  auto [ku_wx, kv_unused1] = residual_detail::velocity_map(elementwise_mul(w, wx), g);
  auto [ku_unused2, kv_wy] = residual_detail::velocity_map(elementwise_mul(w, wy), g);
  const Field dx_wu = spectral_derivative(elementwise_mul(w, u), g, Axis::X);
  const Field dy_wv = spectral_derivative(elementwise_mul(w, v), g, Axis::Y);
  const Field lap_w = laplacian(w, g);

  const double drag = cfg.forcing.type == ForcingType::Kolmogorov ? cfg.forcing.drag : 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    grad.mid[i] =
        -ku_wx[i] - kv_wy[i] - dx_wu[i] - dy_wv[i] - nu * lap_w[i] + drag * w[i];
  }
  return grad;
}

/// Physics metric ((R_pred - R_truth)^2) / R_truth^2 on the scalar residuals.
inline double normalized_residual_metric(const SnapshotTriplet& pred,
                                         const SnapshotTriplet& truth, const FourierGrid& g,
                                         const SolverConfig& cfg) {
  const double r_pred = pde_residual(pred, g, cfg).scalar;
  const double r_truth = pde_residual(truth, g, cfg).scalar;
  if (r_truth == 0.0)
    throw std::domain_error("normalized_residual_metric: undefined for zero truth residual");
  const double d = r_pred - r_truth;
  return d * d / (r_truth * r_truth);
}

/// Residual objective over 3-channel samples, for the corrector.
class VorticityResidual final : public ResidualOperator {
 public:
  VorticityResidual(FourierGrid grid, SolverConfig config, double dt_record)
      : grid_(std::move(grid)), config_(std::move(config)), dt_record_(dt_record) {}

  double value(const Sample& x) const override {
    return pde_residual(triplet_from_sample(x, grid_.Lx, grid_.Ly, dt_record_), grid_, config_)
        .scalar;
  }

  Sample gradient(const Sample& x) const override {
    TripletGradient g = residual_gradient(
        triplet_from_sample(x, grid_.Lx, grid_.Ly, dt_record_), grid_, config_);
    return Sample{std::move(g.prev), std::move(g.mid), std::move(g.next)};
  }

 private:
  FourierGrid grid_;
  SolverConfig config_;
  double dt_record_;
};

/// Chain-rule adapter evaluating a base objective on rescaled samples:
/// value(x) = base(scale * x). Used when the sampler works in normalized
/// units while the PDE residual is defined on physical fields.
class ScaledResidual final : public ResidualOperator {
 public:
  ScaledResidual(const ResidualOperator& base, double scale) : base_(base), scale_(scale) {
    if (!(scale > 0.0)) throw std::invalid_argument("ScaledResidual: scale must be positive");
  }

  double value(const Sample& x) const override { return base_.value(scaled(x)); }

  Sample gradient(const Sample& x) const override {
    Sample g = base_.gradient(scaled(x));
    for (Field& c : g) c *= scale_;
    return g;
  }

 private:
  Sample scaled(const Sample& x) const {
    Sample s = x;
    for (Field& c : s) c *= scale_;
    return s;
  }

  const ResidualOperator& base_;
  double scale_;
};

}  // namespace sgdiff
