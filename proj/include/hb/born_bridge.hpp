#pragma once

// Transition probabilities, the relation between Euclidean distance of packet centres and
// Fubini-Study distance, and the identity between the Born overlap and the normal density.

#include <variant>
#include <vector>

#include "hb/grid.hpp"
#include "hb/hilbert_core.hpp"
#include "hb/packet_dynamics.hpp"
#include "hb/state_geometry.hpp"

namespace hb {

inline double transition_probability(const StateVector& a, const StateVector& b) {
  detail::require_same(a.size(), b.size());
  return std::min(1.0, std::norm(a.vec().dot(b.vec())));
}

/// Grid states; both must be unit norm to 1e-8.
inline double transition_probability(const GridWaveFunction& a, const GridWaveFunction& b) {
  const double na = l2_norm(a), nb = l2_norm(b);
  require(std::abs(na - 1.0) <= 1e-8 && std::abs(nb - 1.0) <= 1e-8, ErrorKind::Normalization,
          "transition probability needs unit states");
  return std::min(1.0, std::norm(l2_inner(a, b)));
}

inline double transition_probability(const GaussianPacket& a, const GaussianPacket& b) {
  const double o = packet_overlap_abs(a, b);
  return o * o;
}

/// Fubini-Study distance between grid states (normalised internally).
inline double fs_distance(const GridWaveFunction& a, const GridWaveFunction& b) {
  const double na = l2_norm(a), nb = l2_norm(b);
  require(na > 0.0 && nb > 0.0, ErrorKind::Normalization, "zero state");
  const Complex c = l2_inner(a, b) / (na * nb);
  GridWaveFunction perp = axpy(1.0 / nb, b, -c / na, a);
  return std::atan2(l2_norm(perp), std::min(1.0, std::abs(c)));
}

using TransitionPair = std::variant<std::pair<StateVector, StateVector>, std::pair<GridWaveFunction, GridWaveFunction>>;

struct RelationResult {
  double lhs = 0.0;  // exp(-|a-b|^2 / 4 sigma^2)
  double rhs = 0.0;  // cos^2 of the quadrature Fubini-Study distance
  double theta = 0.0;
};

/// Grid for a pair of smoothed deltas: covers 10 sigma around both centres with spacing sigma/4.
inline Grid bridge_grid(const Vec3& a, const Vec3& b, double sigma, int dim, double spacing = 0.0) {
  if (spacing <= 0.0) spacing = sigma / 4.0;
  double lo = std::min(a[0], b[0]), hi = std::max(a[0], b[0]);
  for (int k = 1; k < dim; ++k) {
    lo = std::min(lo, std::min(a[k], b[k]));
    hi = std::max(hi, std::max(a[k], b[k]));
  }
  return Grid::cube(dim, lo - 10.0 * sigma, hi + 10.0 * sigma, spacing);
}

inline RelationResult fs_euclid_relation(const Vec3& a, const Vec3& b, double sigma, int dim, double spacing = 0.0) {
  KernelParams kernel{sigma, dim};
  kernel.validate();
  const Grid g = bridge_grid(a, b, sigma, dim, spacing);
  const auto da = smoothed_delta(g, a, kernel);
  const auto db = smoothed_delta(g, b, kernel);
  RelationResult r;
  r.lhs = std::exp(-(a - b).head(dim).squaredNorm() / (4.0 * sigma * sigma));
  r.theta = fs_distance(da, db);
  const double c = std::cos(r.theta);
  r.rhs = c * c;
  return r;
}

struct BornNormalResult {
  double prob = 0.0;          // |<delta~_a, delta~_b>|^2 by per-axis quadrature
  double density_form = 0.0;  // normal density with std sqrt(2) sigma at b, times (4 pi sigma^2)^(d/2)
};

inline BornNormalResult born_normal_equivalence(const Vec3& a, const Vec3& b, double sigma, int dim) {
  KernelParams kernel{sigma, dim};
  kernel.validate();
  const double s2 = sigma * sigma;
  const double amp = std::pow(2.0 * kPi * s2, -0.25);
  double overlap = 1.0;
  for (int k = 0; k < dim; ++k) {
    const double lo = std::min(a[k], b[k]) - 12.0 * sigma, hi = std::max(a[k], b[k]) + 12.0 * sigma;
    const auto n = static_cast<std::size_t>(std::ceil((hi - lo) / (sigma / 8.0)));
    overlap *= detail::quad1d(
        [&](double x) {
          return amp * amp * std::exp(-((x - a[k]) * (x - a[k]) + (x - b[k]) * (x - b[k])) / (4.0 * s2));
        },
        lo, hi, n);
  }
  BornNormalResult r;
  r.prob = overlap * overlap;
  const double var = 2.0 * s2;
  const double density = std::pow(2.0 * kPi * var, -0.5 * dim) * std::exp(-(b - a).head(dim).squaredNorm() / (2.0 * var));
  r.density_form = density * std::pow(4.0 * kPi * s2, 0.5 * dim);
  return r;
}

struct ExtensionReport {
  std::size_t pairs = 0;
  double max_deviation = 0.0;  // max |P - cos^2 theta|
};

/// Checks P = cos^2(theta_FS) for every pair, mixing finite-dimensional and grid states.
inline ExtensionReport isotropic_extension_check(const std::vector<TransitionPair>& pairs) {
  ExtensionReport rep;
  for (const auto& pair : pairs) {
    double p = 0.0, theta = 0.0;
    if (const auto* s = std::get_if<std::pair<StateVector, StateVector>>(&pair)) {
      p = transition_probability(s->first, s->second);
      theta = fs_distance(s->first, s->second);
    } else {
      const auto& g = std::get<std::pair<GridWaveFunction, GridWaveFunction>>(pair);
      p = transition_probability(g.first, g.second);
      theta = fs_distance(g.first, g.second);
    }
    const double c = std::cos(theta);
    rep.max_deviation = std::max(rep.max_deviation, std::abs(p - c * c));
    ++rep.pairs;
  }
  return rep;
}

}  // namespace hb
