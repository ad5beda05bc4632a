#pragma once

#include <fftw3.h>

#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <vector>

#include "sgdiff/field.hpp"

// 2D complex transforms on square n x n grids, backed by FFTW.
// Convention: unnormalized forward (e^{-ik.x}), 1/n^2 on the inverse, so
// Parseval reads sum f^2 = (1/n^2) sum |fhat|^2 exactly.
//
// Plans are cached per thread (the FFTW planner is not thread-safe, so plan
// creation is serialized); execution runs on per-thread buffers. Plans use
// FFTW_ESTIMATE, which keeps results reproducible run to run.

namespace sgdiff::fft {

using Complex = std::complex<double>;

namespace detail {

class PlanSet {
 public:
  explicit PlanSet(int n) : n_(n), buf_(static_cast<std::size_t>(n) * n) {
    static std::mutex planner_mutex;
    std::lock_guard<std::mutex> lock(planner_mutex);
    auto* raw = reinterpret_cast<fftw_complex*>(buf_.data());
    fwd_ = fftw_plan_dft_2d(n, n, raw, raw, FFTW_FORWARD, FFTW_ESTIMATE);
    bwd_ = fftw_plan_dft_2d(n, n, raw, raw, FFTW_BACKWARD, FFTW_ESTIMATE);
    if (!fwd_ || !bwd_) throw std::runtime_error("fft: plan creation failed");
  }
  ~PlanSet() {
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
  }
  PlanSet(const PlanSet&) = delete;
  PlanSet& operator=(const PlanSet&) = delete;

  std::vector<Complex>& buffer() { return buf_; }
  void execute_forward() { fftw_execute(fwd_); }
  void execute_backward() { fftw_execute(bwd_); }
  int n() const { return n_; }

 private:
  int n_;
  std::vector<Complex> buf_;
  fftw_plan fwd_ = nullptr;
  fftw_plan bwd_ = nullptr;
};

inline PlanSet& plans_for(int n) {
  thread_local std::map<int, std::unique_ptr<PlanSet>> cache;
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<PlanSet>(n);
  return *slot;
}

}  // namespace detail

/// Forward DFT of a real n x n field; out is row-major n x n complex.
inline void forward(const Field& in, std::vector<Complex>& out) {
  if (in.rows() != in.cols()) throw std::invalid_argument("fft::forward: field must be square");
  const int n = in.rows();
  auto& plans = detail::plans_for(n);
  auto& buf = plans.buffer();
  for (std::size_t i = 0; i < in.size(); ++i) buf[i] = Complex(in[i], 0.0);
  plans.execute_forward();
  out.assign(buf.begin(), buf.end());
}

/// Inverse DFT with 1/n^2 normalization, returning the real part.
inline void inverse(const std::vector<Complex>& in, Field& out, int n) {
  if (in.size() != static_cast<std::size_t>(n) * n)
    throw std::invalid_argument("fft::inverse: size mismatch");
  auto& plans = detail::plans_for(n);
  auto& buf = plans.buffer();
  std::copy(in.begin(), in.end(), buf.begin());
  plans.execute_backward();
  const double scale = 1.0 / (static_cast<double>(n) * n);
  if (out.rows() != n || out.cols() != n) out = Field(n, n);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = buf[i].real() * scale;
}

inline std::vector<Complex> forward(const Field& in) {
  std::vector<Complex> out;
  forward(in, out);
  return out;
}

inline Field inverse(const std::vector<Complex>& in, int n) {
  Field out(n, n);
  inverse(in, out, n);
  return out;
}

}  // namespace sgdiff::fft
