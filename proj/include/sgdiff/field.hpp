#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace sgdiff {

/// Dense row-major 2D array of doubles. Row index iy is the y coordinate,
/// column index ix is the x coordinate, matching data[iy*cols + ix].
class Field {
 public:
  Field() = default;
  Field(int rows, int cols, double value = 0.0)
      : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, value) {
    if (rows <= 0 || cols <= 0) throw std::invalid_argument("Field: non-positive dimensions");
  }

  int rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }

  double& operator()(int iy, int ix) { return data_[static_cast<std::size_t>(iy) * cols_ + ix]; }
  double operator()(int iy, int ix) const {
    return data_[static_cast<std::size_t>(iy) * cols_ + ix];
  }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }

  bool same_shape(const Field& o) const noexcept { return rows_ == o.rows_ && cols_ == o.cols_; }

  Field& operator+=(const Field& o) {
    check_shape(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }
  Field& operator-=(const Field& o) {
    check_shape(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
  }
  Field& operator*=(double c) {
    for (double& v : data_) v *= c;
    return *this;
  }

  friend Field operator+(Field a, const Field& b) { return a += b; }
  friend Field operator-(Field a, const Field& b) { return a -= b; }
  friend Field operator*(Field a, double c) { return a *= c; }
  friend Field operator*(double c, Field a) { return a *= c; }

  friend bool operator==(const Field& a, const Field& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

 private:
  void check_shape(const Field& o) const {
    if (!same_shape(o)) throw std::invalid_argument("Field: shape mismatch");
  }

  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

/// A multi-channel sample as seen by the diffusion pipeline (one channel for
/// plain fields, three channels for snapshot triplets).
using Sample = std::vector<Field>;

inline double field_sum(const Field& f) {
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += f[i];
  return s;
}

inline double field_mean(const Field& f) { return field_sum(f) / static_cast<double>(f.size()); }

inline double field_sum_sq(const Field& f) {
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += f[i] * f[i];
  return s;
}

inline double field_rms(const Field& f) {
  return std::sqrt(field_sum_sq(f) / static_cast<double>(f.size()));
}

inline double field_max_abs(const Field& f) {
  double m = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) m = std::max(m, std::abs(f[i]));
  return m;
}

inline double field_min(const Field& f) {
  double m = f[0];
  for (std::size_t i = 0; i < f.size(); ++i) m = std::min(m, f[i]);
  return m;
}

inline double field_max(const Field& f) {
  double m = f[0];
  for (std::size_t i = 0; i < f.size(); ++i) m = std::max(m, f[i]);
  return m;
}

inline bool field_finite(const Field& f) {
  for (std::size_t i = 0; i < f.size(); ++i)
    if (!std::isfinite(f[i])) return false;
  return true;
}

inline Field elementwise_mul(const Field& a, const Field& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("elementwise_mul: shape mismatch");
  Field out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b[i];
  return out;
}

/// RMS distance between two equally shaped fields.
inline double field_rms_distance(const Field& a, const Field& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("field_rms_distance: shape mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s / static_cast<double>(a.size()));
}

/// Strided subsampling, keeping entries at indices 0, factor, 2*factor, ...
inline Field downsample_uniform(const Field& f, int factor) {
  if (factor <= 0) throw std::invalid_argument("downsample_uniform: factor must be positive");
  if (f.rows() % factor != 0 || f.cols() % factor != 0)
    throw std::invalid_argument("downsample_uniform: factor does not divide grid size");
  Field out(f.rows() / factor, f.cols() / factor);
  for (int iy = 0; iy < out.rows(); ++iy)
    for (int ix = 0; ix < out.cols(); ++ix) out(iy, ix) = f(iy * factor, ix * factor);
  return out;
}

/// Nearest-neighbor upsampling: each coarse value fills its factor x factor block.
inline Field upsample_nearest(const Field& f, int factor) {
  if (factor <= 0) throw std::invalid_argument("upsample_nearest: factor must be positive");
  Field out(f.rows() * factor, f.cols() * factor);
  for (int iy = 0; iy < out.rows(); ++iy)
    for (int ix = 0; ix < out.cols(); ++ix) out(iy, ix) = f(iy / factor, ix / factor);
  return out;
}

/// Real-valued vorticity snapshot on a periodic rectangle.
struct VorticityField {
  Field data;
  double Lx = 0.0;
  double Ly = 0.0;
  double time = 0.0;
};

inline VorticityField downsample_uniform(const VorticityField& f, int factor) {
  return VorticityField{downsample_uniform(f.data, factor), f.Lx, f.Ly, f.time};
}

inline VorticityField upsample_nearest(const VorticityField& f, int factor) {
  return VorticityField{upsample_nearest(f.data, factor), f.Lx, f.Ly, f.time};
}

}  // namespace sgdiff
