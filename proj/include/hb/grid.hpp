#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <functional>
#include <vector>

#include "hb/core.hpp"

namespace hb {

/// Uniform tensor-product grid in 1, 2 or 3 dimensions with equal spacing on every axis.
struct Grid {
  int dim = 1;
  std::array<std::size_t, 3> count{1, 1, 1};
  std::array<double, 3> origin{0.0, 0.0, 0.0};
  double spacing = 1.0;

  static Grid line(double lo, double hi, double h) {
    return cube(1, lo, hi, h);
  }

  /// Grid covering [lo, hi]^dim with spacing h (hi is rounded up to a whole number of cells).
  static Grid cube(int dim, double lo, double hi, double h) {
    require(dim >= 1 && dim <= 3, ErrorKind::InvalidArgument, "grid dimension must be 1, 2 or 3");
    require(h > 0.0 && hi > lo, ErrorKind::InvalidArgument, "grid needs positive spacing and extent");
    Grid g;
    g.dim = dim;
    g.spacing = h;
    const auto n = static_cast<std::size_t>(std::ceil((hi - lo) / h)) + 1;
    for (int a = 0; a < dim; ++a) {
      g.count[a] = n;
      g.origin[a] = lo;
    }
    return g;
  }

  std::size_t size() const {
    std::size_t s = 1;
    for (int a = 0; a < dim; ++a) s *= count[a];
    return s;
  }

  double coord(int axis, std::size_t i) const { return origin[axis] + spacing * static_cast<double>(i); }
  double lower(int axis) const { return origin[axis]; }
  double upper(int axis) const { return coord(axis, count[axis] - 1); }
  double cell_volume() const { return std::pow(spacing, dim); }

  std::array<std::size_t, 3> unflatten(std::size_t idx) const {
    std::array<std::size_t, 3> ijk{0, 0, 0};
    for (int a = dim - 1; a >= 0; --a) {
      ijk[a] = idx % count[a];
      idx /= count[a];
    }
    return ijk;
  }

  Vec3 point(std::size_t idx) const {
    const auto ijk = unflatten(idx);
    Vec3 x = Vec3::Zero();
    for (int a = 0; a < dim; ++a) x[a] = coord(a, ijk[a]);
    return x;
  }

  /// Stride between consecutive samples along an axis in the flat layout (last axis fastest).
  std::size_t stride(int axis) const {
    std::size_t s = 1;
    for (int a = dim - 1; a > axis; --a) s *= count[a];
    return s;
  }

  /// Trapezoid weight of a flat index (product of per-axis 1 or 1/2 times h^dim).
  double weight(std::size_t idx) const {
    const auto ijk = unflatten(idx);
    double w = cell_volume();
    for (int a = 0; a < dim; ++a)
      if (ijk[a] == 0 || ijk[a] + 1 == count[a]) w *= 0.5;
    return w;
  }

  bool compatible(const Grid& other, double tol = 1e-12) const {
    if (dim != other.dim || std::abs(spacing - other.spacing) > tol * spacing) return false;
    for (int a = 0; a < dim; ++a)
      if (count[a] != other.count[a] || std::abs(origin[a] - other.origin[a]) > tol * std::max(1.0, spacing))
        return false;
    return true;
  }

  /// True when the ball of radius r around c lies inside the grid box.
  bool covers(const Vec3& c, double r) const {
    for (int a = 0; a < dim; ++a)
      if (c[a] - r < lower(a) - 1e-12 || c[a] + r > upper(a) + 1e-12) return false;
    return true;
  }
};

/// Complex samples of a function on a Grid.
struct GridWaveFunction {
  Grid grid;
  std::vector<Complex> values;

  GridWaveFunction() = default;
  explicit GridWaveFunction(Grid g) : grid(g), values(g.size(), Complex{0.0, 0.0}) {}

  static GridWaveFunction sample(const Grid& g, const std::function<Complex(const Vec3&)>& f) {
    GridWaveFunction w(g);
    for (std::size_t i = 0; i < w.values.size(); ++i) w.values[i] = f(g.point(i));
    return w;
  }

  std::size_t size() const { return values.size(); }
  Complex& operator[](std::size_t i) { return values[i]; }
  const Complex& operator[](std::size_t i) const { return values[i]; }

  bool finite() const {
    return std::all_of(values.begin(), values.end(),
                       [](const Complex& z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); });
  }
};

inline void require_compatible(const GridWaveFunction& f, const GridWaveFunction& g) {
  require(f.grid.compatible(g.grid) && f.size() == g.size(), ErrorKind::DimensionMismatch,
          "wave functions live on incompatible grids");
}

/// Trapezoid-rule L2 inner product <f, g> = sum conj(f) g w (conjugate-linear in the first slot).
inline Complex l2_inner(const GridWaveFunction& f, const GridWaveFunction& g) {
  require_compatible(f, g);
  Complex s{0.0, 0.0};
  for (std::size_t i = 0; i < f.size(); ++i) s += std::conj(f[i]) * g[i] * f.grid.weight(i);
  return s;
}

inline double l2_norm(const GridWaveFunction& f) { return std::sqrt(std::abs(l2_inner(f, f).real())); }

inline double integrate(const Grid& g, const std::vector<double>& values) {
  double s = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) s += values[i] * g.weight(i);
  return s;
}

inline GridWaveFunction axpy(Complex a, const GridWaveFunction& x, Complex b, const GridWaveFunction& y) {
  require_compatible(x, y);
  GridWaveFunction out(x.grid);
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = a * x[i] + b * y[i];
  return out;
}

/// Convolve along every axis with a separable 1D kernel k(offset) evaluated at offsets i*h.
/// Result(x) = sum_y prod_a k(x_a - y_a) f(y) h^dim (trapezoid weights included).
inline GridWaveFunction separable_convolve(const GridWaveFunction& f, const std::function<double(double)>& kernel1d) {
  const Grid& g = f.grid;
  GridWaveFunction cur = f;
  for (int axis = 0; axis < g.dim; ++axis) {
    const std::size_t n = g.count[axis];
    const std::size_t stride = g.stride(axis);
    std::vector<double> taps(2 * n - 1);
    for (std::size_t k = 0; k < taps.size(); ++k)
      taps[k] = kernel1d((static_cast<double>(k) - static_cast<double>(n - 1)) * g.spacing) * g.spacing;
    std::vector<double> w(n, 1.0);
    w.front() = w.back() = 0.5;
    GridWaveFunction next(g);
    std::vector<Complex> line(n), out(n);
    const std::size_t lines = g.size() / n;
    for (std::size_t l = 0; l < lines; ++l) {
      // base index of the l-th line along `axis`
      const std::size_t outer = l / stride, inner = l % stride;
      const std::size_t base = outer * stride * n + inner;
      for (std::size_t i = 0; i < n; ++i) line[i] = cur[base + i * stride] * w[i];
      for (std::size_t i = 0; i < n; ++i) {
        Complex s{0.0, 0.0};
        for (std::size_t j = 0; j < n; ++j) s += taps[i + (n - 1) - j] * line[j];
        out[i] = s;
      }
      for (std::size_t i = 0; i < n; ++i) next[base + i * stride] = out[i];
    }
    cur = std::move(next);
  }
  return cur;
}

}  // namespace hb
