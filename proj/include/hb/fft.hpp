#pragma once

// Thin FFTW wrapper for spectral derivatives and the kinetic half of split-step propagation.
// The grid is treated as periodic with period n*h along each axis.

#include <fftw3.h>

#include <functional>
#include <memory>
#include <mutex>

#include "hb/grid.hpp"

namespace hb {

namespace detail {
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace detail

class FftPlan {
 public:
  explicit FftPlan(const Grid& g) : grid_(g), n_(g.size()) {
    buf_ = reinterpret_cast<Complex*>(fftw_malloc(sizeof(fftw_complex) * n_));
    require(buf_ != nullptr, ErrorKind::InvalidArgument, "FFT buffer allocation failed");
    int dims[3];
    for (int a = 0; a < g.dim; ++a) dims[a] = static_cast<int>(g.count[a]);
    auto* b = reinterpret_cast<fftw_complex*>(buf_);
    std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
    forward_ = fftw_plan_dft(g.dim, dims, b, b, FFTW_FORWARD, FFTW_ESTIMATE);
    backward_ = fftw_plan_dft(g.dim, dims, b, b, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;
  ~FftPlan() {
    std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(backward_);
    fftw_free(buf_);
  }

  const Grid& grid() const { return grid_; }

  /// Angular wavenumber along an axis for index i (zero at the Nyquist index when zero_nyquist).
  double wavenumber(int axis, std::size_t i, bool zero_nyquist) const {
    const std::size_t n = grid_.count[axis];
    const double l = static_cast<double>(n) * grid_.spacing;
    if (zero_nyquist && n % 2 == 0 && i == n / 2) return 0.0;
    const double j = (i <= n / 2) ? static_cast<double>(i) : static_cast<double>(i) - static_cast<double>(n);
    return 2.0 * kPi * j / l;
  }

  /// Replace f by F^{-1}[ m(k) F[f] ] with m evaluated on the wavevector of each mode.
  void apply_multiplier(GridWaveFunction& f, const std::function<Complex(const Vec3&)>& m,
                        bool zero_nyquist = false) {
    require(f.grid.compatible(grid_), ErrorKind::DimensionMismatch, "FFT plan built for another grid");
    std::copy(f.values.begin(), f.values.end(), buf_);
    fftw_execute(forward_);
    const double inv = 1.0 / static_cast<double>(n_);
    for (std::size_t idx = 0; idx < n_; ++idx) {
      const auto ijk = grid_.unflatten(idx);
      Vec3 k = Vec3::Zero();
      for (int a = 0; a < grid_.dim; ++a) k[a] = wavenumber(a, ijk[a], zero_nyquist);
      buf_[idx] *= m(k) * inv;
    }
    fftw_execute(backward_);
    std::copy(buf_, buf_ + n_, f.values.begin());
  }

 private:
  Grid grid_;
  std::size_t n_;
  Complex* buf_ = nullptr;
  fftw_plan forward_{};
  fftw_plan backward_{};
};

/// Spectral partial derivative along an axis.
inline GridWaveFunction spectral_derivative(const GridWaveFunction& f, int axis) {
  require(axis >= 0 && axis < f.grid.dim, ErrorKind::InvalidArgument, "derivative axis out of range");
  FftPlan plan(f.grid);
  GridWaveFunction out = f;
  plan.apply_multiplier(out, [axis](const Vec3& k) { return kI * k[axis]; }, true);
  return out;
}

/// Spectral Laplacian.
inline GridWaveFunction spectral_laplacian(const GridWaveFunction& f) {
  FftPlan plan(f.grid);
  GridWaveFunction out = f;
  plan.apply_multiplier(out, [](const Vec3& k) { return Complex{-k.squaredNorm(), 0.0}; });
  return out;
}

}  // namespace hb
