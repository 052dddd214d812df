#pragma once

// Gaussian-kernel Hilbert space H: the kernel k, the H inner product, the smoothing map
// rho_sigma onto L2, and the embedding a -> delta_a of classical space.

#include <functional>
#include <vector>

#include "hb/core.hpp"
#include "hb/grid.hpp"

namespace hb {

struct KernelParams {
  double sigma = 0.5;
  int dim = 1;

  void validate() const {
    require(sigma > 0.0 && std::isfinite(sigma), ErrorKind::InvalidArgument, "kernel width must be positive");
    require(dim >= 1 && dim <= 3, ErrorKind::InvalidArgument, "kernel dimension must be 1, 2 or 3");
  }
  /// Width of the narrow Gaussian standing in for a delta function.
  double delta_width() const { return sigma / 20.0; }
};

/// Sampled path a(t) in classical space.
struct ClassicalPath {
  std::vector<double> times;
  std::vector<Vec3> positions;

  static ClassicalPath sample(double t0, double t1, std::size_t n, const std::function<Vec3(double)>& a) {
    ClassicalPath p;
    for (std::size_t k = 0; k < n; ++k) {
      const double t = t0 + (t1 - t0) * static_cast<double>(k) / static_cast<double>(n - 1);
      p.times.push_back(t);
      p.positions.push_back(a(t));
    }
    return p;
  }

  std::size_t size() const { return times.size(); }

  void validate(std::size_t min_samples) const {
    require(times.size() == positions.size(), ErrorKind::InvalidArgument, "path times and positions differ in length");
    require(times.size() >= min_samples, ErrorKind::InvalidArgument,
            "path needs at least " + std::to_string(min_samples) + " samples");
    for (std::size_t k = 1; k < times.size(); ++k)
      require(times[k] > times[k - 1], ErrorKind::Degenerate, "path times must be strictly increasing");
  }
};

/// k(x, y) = exp(-|x - y|^2 / (8 sigma^2)).
inline double kernel_k(const Vec3& x, const Vec3& y, const KernelParams& kernel) {
  return std::exp(-(x - y).squaredNorm() / (8.0 * kernel.sigma * kernel.sigma));
}

/// d^2 k / dx^i dy^j at x = y, which is delta_ij / (4 sigma^2).
inline double kernel_metric_coefficient(const KernelParams& kernel) { return 1.0 / (4.0 * kernel.sigma * kernel.sigma); }

namespace detail {
inline void require_kernel_grid(const Grid& g, const KernelParams& kernel) {
  kernel.validate();
  require(g.dim == kernel.dim, ErrorKind::DimensionMismatch, "grid dimension differs from kernel dimension");
}
}  // namespace detail

/// Double quadrature of  k(x, y) f(x) conj(g(y)) dx dy.
inline Complex inner_h(const GridWaveFunction& f, const GridWaveFunction& g, const KernelParams& kernel) {
  require_compatible(f, g);
  detail::require_kernel_grid(f.grid, kernel);
  GridWaveFunction gc(g.grid);
  for (std::size_t i = 0; i < g.size(); ++i) gc[i] = std::conj(g[i]);
  const double s2 = kernel.sigma * kernel.sigma;
  const auto smoothed = separable_convolve(gc, [s2](double d) { return std::exp(-d * d / (8.0 * s2)); });
  Complex sum{0.0, 0.0};
  for (std::size_t i = 0; i < f.size(); ++i) sum += f[i] * smoothed[i] * f.grid.weight(i);
  return sum;
}

inline double norm_h(const GridWaveFunction& f, const KernelParams& kernel) {
  return std::sqrt(std::max(0.0, inner_h(f, f, kernel).real()));
}

/// (rho_sigma f)(x) = integral (2 pi sigma^2)^(-d/4) exp(-|x-y|^2 / 4 sigma^2) f(y) dy.
inline GridWaveFunction rho_sigma_apply(const GridWaveFunction& f, const KernelParams& kernel) {
  detail::require_kernel_grid(f.grid, kernel);
  require(f.grid.spacing <= kernel.sigma / 2.0, ErrorKind::Resolution, "grid spacing exceeds sigma/2");
  const double s2 = kernel.sigma * kernel.sigma;
  const double amp = std::pow(2.0 * kPi * s2, -0.25);  // per axis; product gives the d/4 power
  return separable_convolve(f, [s2, amp](double d) { return amp * std::exp(-d * d / (4.0 * s2)); });
}

/// Narrow unit-mass Gaussian of width sigma/20 centred at a: the grid stand-in for delta_a.
inline GridWaveFunction delta_approximant(const Grid& g, const Vec3& a, const KernelParams& kernel) {
  detail::require_kernel_grid(g, kernel);
  const double sd = kernel.delta_width();
  require(g.spacing <= sd / 4.0, ErrorKind::Resolution, "grid spacing must resolve the delta width (h <= sigma/80)");
  require(g.covers(a, 8.0 * sd), ErrorKind::Resolution, "grid does not cover the delta support");
  const double norm = std::pow(2.0 * kPi * sd * sd, -0.5 * g.dim);
  return GridWaveFunction::sample(g, [&](const Vec3& x) {
    return Complex{norm * std::exp(-(x - a).squaredNorm() / (2.0 * sd * sd)), 0.0};
  });
}

/// Closed form of rho_sigma(delta_a): the unit L2 Gaussian whose density is normal with std sigma.
inline GridWaveFunction smoothed_delta(const Grid& g, const Vec3& a, const KernelParams& kernel) {
  detail::require_kernel_grid(g, kernel);
  const double s2 = kernel.sigma * kernel.sigma;
  const double amp = std::pow(2.0 * kPi * s2, -0.25 * g.dim);
  return GridWaveFunction::sample(g, [&](const Vec3& x) {
    return Complex{amp * std::exp(-(x - a).squaredNorm() / (4.0 * s2)), 0.0};
  });
}

namespace detail {

/// Three-point Lagrange weights for the first and second derivative at t[e] (e in {0,1,2}).
struct Stencil3 {
  std::array<double, 3> d1{};
  std::array<double, 3> d2{};
};

inline Stencil3 stencil3(const std::array<double, 3>& t, int e) {
  Stencil3 s;
  for (int j = 0; j < 3; ++j) {
    const int k = (j + 1) % 3, l = (j + 2) % 3;
    const double denom = (t[j] - t[k]) * (t[j] - t[l]);
    // L_j(t) = (t - t_k)(t - t_l) / denom
    s.d1[j] = ((t[e] - t[k]) + (t[e] - t[l])) / denom;
    s.d2[j] = 2.0 / denom;
  }
  return s;
}

/// Indices of the three samples used around sample k (centred when possible).
inline std::array<std::size_t, 3> window3(std::size_t k, std::size_t n) {
  const std::size_t lo = (k == 0) ? 0 : (k + 1 == n ? n - 3 : k - 1);
  return {lo, lo + 1, lo + 2};
}

inline Vec3 path_derivative(const ClassicalPath& p, std::size_t k, int order) {
  const auto w = window3(k, p.size());
  const std::array<double, 3> t{p.times[w[0]], p.times[w[1]], p.times[w[2]]};
  const auto st = stencil3(t, static_cast<int>(k - w[0]));
  Vec3 d = Vec3::Zero();
  for (int j = 0; j < 3; ++j) d += (order == 1 ? st.d1[j] : st.d2[j]) * p.positions[w[j]];
  return d;
}

/// Trapezoid quadrature of f on [lo, hi] with n intervals.
inline double quad1d(const std::function<double(double)>& f, double lo, double hi, std::size_t n) {
  const double h = (hi - lo) / static_cast<double>(n);
  double s = 0.5 * (f(lo) + f(hi));
  for (std::size_t i = 1; i < n; ++i) s += f(lo + h * static_cast<double>(i));
  return s * h;
}

/// L2 overlap of smoothed deltas with one differentiated factor:
/// < delta~_b , d delta~_c / dc^axis >, evaluated axis by axis with 1D quadrature.
inline double smoothed_tangent_overlap(const Vec3& b, const Vec3& c, int axis, const KernelParams& kernel) {
  const double s = kernel.sigma, s2 = s * s;
  const double amp = std::pow(2.0 * kPi * s2, -0.25);
  double prod = 1.0;
  for (int a = 0; a < kernel.dim; ++a) {
    const double lo = std::min(b[a], c[a]) - 10.0 * s, hi = std::max(b[a], c[a]) + 10.0 * s;
    const auto n = static_cast<std::size_t>(std::ceil((hi - lo) / (s / 20.0)));
    const bool diff = (a == axis);
    prod *= quad1d(
        [&](double x) {
          const double gb = amp * std::exp(-(x - b[a]) * (x - b[a]) / (4.0 * s2));
          const double gc = amp * std::exp(-(x - c[a]) * (x - c[a]) / (4.0 * s2));
          return gb * gc * (diff ? (x - c[a]) / (2.0 * s2) : 1.0);
        },
        lo, hi, n);
  }
  return prod;
}

}  // namespace detail

/// ||d phi/dt||_H along the embedded path phi_t = delta_{a(t)}: sqrt(d2k/dxdy) |da/dt| = |da/dt| / (2 sigma).
/// In units where 2 sigma = 1 this is the Euclidean speed.
inline std::vector<double> path_speed_h(const ClassicalPath& path, const KernelParams& kernel) {
  kernel.validate();
  path.validate(3);
  std::vector<double> speed(path.size());
  const double g = kernel_metric_coefficient(kernel);
  for (std::size_t k = 0; k < path.size(); ++k) {
    const Vec3 v = detail::path_derivative(path, k, 1);
    speed[k] = std::sqrt(g * v.head(kernel.dim).squaredNorm());
  }
  return speed;
}

struct NewtonianProjection {
  std::vector<Vec3> velocity;
  std::vector<Vec3> acceleration;
};

/// Components of d/dt delta_{a(t)} and d^2/dt^2 delta_{a(t)} along the coordinate fields -d/dx^i delta_a,
/// computed through smoothed representatives (the H product equals the L2 product after rho_sigma)
/// and divided by the coordinate-field norm 1/(4 sigma^2).
inline NewtonianProjection newtonian_projection(const ClassicalPath& path, const KernelParams& kernel) {
  kernel.validate();
  path.validate(5);
  NewtonianProjection out;
  const double g = kernel_metric_coefficient(kernel);
  for (std::size_t k = 0; k < path.size(); ++k) {
    const auto w = detail::window3(k, path.size());
    const std::array<double, 3> t{path.times[w[0]], path.times[w[1]], path.times[w[2]]};
    const auto st = detail::stencil3(t, static_cast<int>(k - w[0]));
    Vec3 v = Vec3::Zero(), acc = Vec3::Zero();
    for (int axis = 0; axis < kernel.dim; ++axis) {
      for (int j = 0; j < 3; ++j) {
        const double ov = detail::smoothed_tangent_overlap(path.positions[w[j]], path.positions[k], axis, kernel);
        v[axis] += st.d1[j] * ov;
        acc[axis] += st.d2[j] * ov;
      }
    }
    out.velocity.push_back(v / g);
    out.acceleration.push_back(acc / g);
  }
  return out;
}

/// Action on the delta-constrained path: integral of (m/2)(2 sigma)^2 ||d phi/dt||_H^2 - V(a) k(a, a) dt,
/// trapezoid rule in time.
inline double action_functional(const ClassicalPath& path, const std::function<double(const Vec3&)>& potential,
                                double mass, const KernelParams& kernel) {
  kernel.validate();
  path.validate(3);
  require(mass > 0.0, ErrorKind::InvalidArgument, "mass must be positive");
  const auto speed = path_speed_h(path, kernel);
  const double units = 4.0 * kernel.sigma * kernel.sigma;
  std::vector<double> lagrangian(path.size());
  for (std::size_t k = 0; k < path.size(); ++k) {
    const Vec3& a = path.positions[k];
    lagrangian[k] = 0.5 * mass * units * speed[k] * speed[k] - potential(a) * kernel_k(a, a, kernel);
  }
  double s = 0.0;
  for (std::size_t k = 1; k < path.size(); ++k)
    s += 0.5 * (lagrangian[k] + lagrangian[k - 1]) * (path.times[k] - path.times[k - 1]);
  return s;
}

}  // namespace hb
