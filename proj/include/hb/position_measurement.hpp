#pragma once

// Position measurement on a cell lattice: discretisation into cell amplitudes, random diagonal
// potentials, isotropic random unitary steps on CP^{N-1}, absorption at a single cell, Gabor
// frame states, and the order-of-magnitude estimate chain for photon scattering.

#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "hb/core.hpp"
#include "hb/grid.hpp"
#include "hb/packet_dynamics.hpp"
#include "hb/parallel.hpp"
#include "hb/rng.hpp"
#include "hb/state_geometry.hpp"
#include "hb/stats.hpp"

namespace hb {

using CellState = StateVector;

/// Axis-aligned box [lo, lo + count * gamma) split into cubic cells of edge gamma.
struct CellLattice {
  int dim = 1;
  Vec3 lo = Vec3::Zero();
  double gamma = 1.0;
  std::array<std::size_t, 3> count{1, 1, 1};

  void validate() const {
    require(dim >= 1 && dim <= 3, ErrorKind::InvalidArgument, "lattice dimension must be 1, 2 or 3");
    require(gamma > 0.0, ErrorKind::InvalidArgument, "cell size must be positive");
    for (int a = 0; a < dim; ++a) require(count[a] >= 1, ErrorKind::InvalidArgument, "empty lattice axis");
  }

  std::size_t size() const {
    std::size_t n = 1;
    for (int a = 0; a < dim; ++a) n *= count[a];
    return n;
  }

  /// Midpoint-rule grid with `per_cell` samples along each cell edge.
  Grid sample_grid(std::size_t per_cell) const {
    validate();
    Grid g;
    g.dim = dim;
    g.spacing = gamma / static_cast<double>(per_cell);
    for (int a = 0; a < dim; ++a) {
      g.count[a] = count[a] * per_cell;
      g.origin[a] = lo[a] + 0.5 * g.spacing;
    }
    return g;
  }

  /// Flat cell index of a point (last axis fastest), or size() when outside.
  std::size_t cell_of(const Vec3& x) const {
    std::size_t idx = 0;
    for (int a = 0; a < dim; ++a) {
      const double f = std::floor((x[a] - lo[a]) / gamma);
      if (f < 0.0 || f >= static_cast<double>(count[a])) return size();
      idx = idx * count[a] + static_cast<std::size_t>(f);
    }
    return idx;
  }
};

struct Discretization {
  CellState state = StateVector::basis(2, 0);
  CVector projection;           // raw coefficients before renormalisation
  double reconstruction_error;  // ||psi - sum c_n chi_n|| / ||psi|| over the lattice
};

/// C_n = integral of psi against the unit-normalised indicator of cell n (midpoint rule on grids
/// built by CellLattice::sample_grid), then renormalised.
inline Discretization discretize(const GridWaveFunction& psi, const CellLattice& lattice) {
  lattice.validate();
  const Grid& g = psi.grid;
  require(g.dim == lattice.dim, ErrorKind::DimensionMismatch, "grid and lattice dimensions differ");
  const double per = lattice.gamma / g.spacing;
  require(std::abs(per - std::round(per)) < 1e-9 * per && std::round(per) >= 4.0, ErrorKind::Resolution,
          "grid must place an integer number (>= 4) of samples along each cell edge");
  for (int a = 0; a < g.dim; ++a) {
    const double off = (g.origin[a] - lattice.lo[a]) / g.spacing - 0.5;
    require(std::abs(off - std::round(off)) < 1e-9, ErrorKind::Resolution, "grid is not cell-centred on the lattice");
  }
  const std::size_t n = lattice.size();
  require(n >= 2, ErrorKind::InvalidArgument, "lattice needs at least two cells");
  const double w = g.cell_volume();
  const double ind = std::pow(lattice.gamma, -0.5 * lattice.dim);
  CVector c = CVector::Zero(static_cast<Eigen::Index>(n));
  std::vector<std::size_t> owner(psi.size());
  std::size_t inside = 0;
  double total = 0.0;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    owner[i] = lattice.cell_of(g.point(i));
    total += std::norm(psi[i]) * w;
    if (owner[i] < n) {
      c[static_cast<Eigen::Index>(owner[i])] += psi[i] * ind * w;
      ++inside;
    }
  }
  require(inside == static_cast<std::size_t>(std::pow(std::round(per), lattice.dim)) * n, ErrorKind::Resolution,
          "grid does not sample every lattice cell");
  double err = 0.0;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    const Complex rec = owner[i] < n ? c[static_cast<Eigen::Index>(owner[i])] * ind : Complex{0.0, 0.0};
    err += std::norm(psi[i] - rec) * w;
  }
  require(c.norm() > 0.0, ErrorKind::Normalization, "state has no weight on the lattice");
  return {StateVector::normalized(c), c, std::sqrt(err / total)};
}

enum class GeneratorMode { Diagonal, Isotropic };

struct PositionWalkParams {
  double tau = 1.0;
  double v_std = 0.05;
  double hbar = 1.0;
  double absorb_eps = 0.02;
  std::uint64_t max_steps = 100000;
  std::uint64_t seed = 0;
  GeneratorMode mode = GeneratorMode::Isotropic;

  void validate() const {
    require(tau >= 0.0 && v_std >= 0.0 && hbar > 0.0, ErrorKind::InvalidArgument,
            "tau and v_std must be non-negative, hbar positive");
    require(absorb_eps > 0.0 && absorb_eps <= 0.1, ErrorKind::InvalidArgument, "absorb_eps must lie in (0, 0.1]");
    require(max_steps >= 1, ErrorKind::InvalidArgument, "max_steps must be at least 1");
    require(v_std * tau / hbar <= 0.05, ErrorKind::InvalidArgument, "v_std tau / hbar exceeds 0.05");
  }
};

/// Cell state held as moduli and phases; diagonal steps only touch the phases.
struct PolarCellState {
  RVector modulus;
  RVector phase;

  static PolarCellState from(const CellState& s) {
    PolarCellState p;
    p.modulus = s.vec().cwiseAbs();
    p.phase.resize(s.size());
    for (Eigen::Index i = 0; i < s.size(); ++i) p.phase[i] = std::arg(s[i]);
    return p;
  }
  CellState state() const {
    CVector v(modulus.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = std::polar(modulus[i], phase[i]);
    return CellState(v);
  }
};

inline RVector sample_potential(Eigen::Index n, RngStream& rng, double v_std) {
  RVector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = rng.normal(0.0, v_std);
  return v;
}

/// Samples i.i.d. normal V_n and returns exp(-i tau (V_n - Vbar) / hbar) psi, Vbar = sum V_n |C_n|^2.
inline CellState diag_potential_step(const CellState& psi, RngStream& rng, const PositionWalkParams& params,
                                     RVector* potential = nullptr) {
  params.validate();
  const RVector v = sample_potential(psi.size(), rng, params.v_std);
  const double vbar = (v.array() * psi.vec().cwiseAbs2().array()).sum();
  CVector out(psi.size());
  for (Eigen::Index i = 0; i < psi.size(); ++i)
    out[i] = std::polar(1.0, -params.tau * (v[i] - vbar) / params.hbar) * psi[i];
  if (potential) *potential = v;
  return CellState(out);
}

/// Same step on the polar representation: moduli are never recomputed, so they are preserved exactly.
inline void diag_potential_step(PolarCellState& psi, RngStream& rng, const PositionWalkParams& params) {
  params.validate();
  const RVector v = sample_potential(psi.modulus.size(), rng, params.v_std);
  const double vbar = (v.array() * psi.modulus.array().square()).sum();
  for (Eigen::Index i = 0; i < v.size(); ++i)
    psi.phase[i] = std::remainder(psi.phase[i] - params.tau * (v[i] - vbar) / params.hbar, 2.0 * kPi);
}

/// Hermitian matrix from the unitarily invariant Gaussian ensemble: diagonal N(0, s^2),
/// off-diagonal real and imaginary parts N(0, s^2 / 2).
inline CMatrix sample_gue(Eigen::Index n, RngStream& rng, double s) {
  CMatrix h(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    h(i, i) = rng.normal(0.0, s);
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double re = rng.normal(0.0, s / std::sqrt(2.0));
      const double im = rng.normal(0.0, s / std::sqrt(2.0));
      h(i, j) = Complex(re, im);
      h(j, i) = Complex(re, -im);
    }
  }
  return h;
}

/// psi' = exp(-i tau H / hbar) psi with H drawn from the Gaussian unitary ensemble scaled by v_std.
inline CellState isotropic_step(const CellState& psi, RngStream& rng, const PositionWalkParams& params) {
  params.validate();
  const CMatrix h = sample_gue(psi.size(), rng, params.v_std);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
  CVector c = es.eigenvectors().adjoint() * psi.vec();
  for (Eigen::Index k = 0; k < c.size(); ++k) c[k] *= std::polar(1.0, -params.tau * es.eigenvalues()[k] / params.hbar);
  CVector out = es.eigenvectors() * c;
  // The eigenvector basis is unitary to rounding; restore the unit norm lost to it.
  return CellState(out / out.norm());
}

struct MeasurementOutcome {
  long cell = -1;  // -1 when unresolved
  std::uint64_t steps = 0;
};

inline long absorbed_cell(const CellState& psi, double eps) {
  Eigen::Index k = 0;
  const double m = psi.vec().cwiseAbs2().maxCoeff(&k);
  return m >= 1.0 - eps ? static_cast<long>(k) : -1;
}

/// Steps until some |C_n|^2 >= 1 - absorb_eps. In diagonal mode the moduli never move, so only
/// initially absorbed states resolve.
inline MeasurementOutcome run_measurement(const CellState& psi0, const PositionWalkParams& params, RngStream& rng) {
  params.validate();
  MeasurementOutcome out;
  CellState psi = psi0;
  out.cell = absorbed_cell(psi, params.absorb_eps);
  while (out.cell < 0 && out.steps < params.max_steps) {
    psi = params.mode == GeneratorMode::Isotropic ? isotropic_step(psi, rng, params)
                                                  : diag_potential_step(psi, rng, params);
    ++out.steps;
    out.cell = absorbed_cell(psi, params.absorb_eps);
  }
  return out;
}

inline std::vector<MeasurementOutcome> run_position_trials(const CellState& psi0, std::size_t trials,
                                                           const PositionWalkParams& params, unsigned threads) {
  params.validate();
  std::vector<MeasurementOutcome> out(trials);
  parallel_for(trials, threads, [&](std::size_t i) {
    RngStream rng(params.seed, i);
    out[i] = run_measurement(psi0, params, rng);
  });
  return out;
}

/// Orthonormal basis of the complement of psi (columns), i.e. the horizontal tangent space at [psi].
inline CMatrix horizontal_basis(const CellState& psi) {
  Eigen::HouseholderQR<CMatrix> qr(psi.vec());
  const CMatrix q = qr.householderQ() * CMatrix::Identity(psi.size(), psi.size());
  return q.rightCols(psi.size() - 1);
}

struct VelocityIsotropyReport {
  TestReport mean_zero;  // Hotelling-type chi-square on the sample mean over the occupied subspace
  RVector eigenvalues;   // covariance spectrum in the 2(N-1) real tangent coordinates, descending
  Eigen::Index rank = 0;
  Eigen::Index tangent_dim = 0;
  double anisotropy = 0.0;  // largest / smallest non-zero eigenvalue
  double max_abs = 0.0;     // largest tangent-vector norm seen
};

/// Samples the state velocity -i (G - <G>) psi / hbar for the generator of the chosen mode and
/// reports its mean and covariance in real coordinates of the tangent space of CP^{N-1}.
inline VelocityIsotropyReport velocity_isotropy_diagnostic(const CellState& psi, std::size_t samples, RngStream& rng,
                                                           const PositionWalkParams& params, double alpha = 0.01) {
  params.validate();
  const Eigen::Index n = psi.size();
  require(n >= 3 && samples >= 1000, ErrorKind::InvalidArgument, "diagnostic needs N >= 3 and enough samples");
  const CMatrix basis = horizontal_basis(psi);
  const Eigen::Index d = 2 * (n - 1);
  Eigen::MatrixXd x(static_cast<Eigen::Index>(samples), d);
  VelocityIsotropyReport rep;
  for (std::size_t s = 0; s < samples; ++s) {
    CVector gen;
    if (params.mode == GeneratorMode::Diagonal) {
      const RVector v = sample_potential(n, rng, params.v_std);
      gen = (v.cast<Complex>().array() * psi.vec().array()).matrix();
    } else {
      gen = sample_gue(n, rng, params.v_std) * psi.vec();
    }
    const Complex mean = psi.vec().dot(gen);
    const CVector t = -kI * (gen - mean * psi.vec()) / params.hbar;
    rep.max_abs = std::max(rep.max_abs, t.norm());
    const CVector coord = basis.adjoint() * t;
    for (Eigen::Index k = 0; k < n - 1; ++k) {
      x(static_cast<Eigen::Index>(s), 2 * k) = coord[k].real();
      x(static_cast<Eigen::Index>(s), 2 * k + 1) = coord[k].imag();
    }
  }
  const RVector mean = x.colwise().mean();
  const Eigen::MatrixXd centered = x.rowwise() - mean.transpose();
  const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(samples - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  rep.tangent_dim = d;
  rep.eigenvalues = es.eigenvalues().reverse();
  const double top = std::max(rep.eigenvalues[0], 0.0);
  double stat = 0.0, smallest = top;
  for (Eigen::Index k = 0; k < d; ++k) {
    const double lam = es.eigenvalues()[k];
    if (lam > 1e-10 * top && top > 0.0) {
      ++rep.rank;
      smallest = std::min(smallest, lam);
      const double proj = es.eigenvectors().col(k).dot(mean);
      stat += static_cast<double>(samples) * proj * proj / lam;
    }
  }
  rep.anisotropy = rep.rank > 0 ? top / smallest : 0.0;
  rep.mean_zero = rep.rank > 0 ? make_report(stat, chi_square_sf(stat, static_cast<double>(rep.rank)), alpha,
                                             static_cast<double>(rep.rank))
                               : make_report(0.0, 1.0, alpha, 0.0);
  return rep;
}

/// Gabor frame state: packet centred at alpha n with momentum beta m, alpha = sqrt(2 pi) sigma,
/// beta = 2 pi hbar / alpha.
inline GridWaveFunction gabor_state(const Eigen::Vector3i& m, const Eigen::Vector3i& n, double sigma, const Grid& grid,
                                    double hbar = 1.0) {
  require(sigma > 0.0, ErrorKind::InvalidArgument, "sigma must be positive");
  const double alpha = std::sqrt(2.0 * kPi) * sigma;
  const double beta = 2.0 * kPi * hbar / alpha;
  GaussianPacket pkt;
  pkt.dim = grid.dim;
  pkt.sigma = sigma;
  pkt.hbar = hbar;
  for (int a = 0; a < grid.dim; ++a) {
    pkt.center[a] = alpha * n[a];
    pkt.momentum[a] = beta * m[a];
  }
  return packet_wavefunction(pkt, grid);
}

struct EstimateReport {
  double lambda = 0.0;
  double compton_shift = 0.0;  // (h / m c)(1 - cos theta), theta = pi / 2
  double energy_transfer = 0.0;
  double speed = 0.0;
  double sigma = 0.0;
  double tau = 0.0;
  double acceleration = 0.0;
  double velocity_term = 0.0;      // v / 2 sigma
  double acceleration_term = 0.0;  // m w sigma / hbar
  double spreading_term = 0.0;     // hbar / (4 sqrt 2 sigma^2 m)
  double photon_density = 0.0;     // 2.02e7 T^3 per cubic metre
  double thermal_wavelength = 0.0; // Wien peak b / T
};

/// Compton scattering estimate chain in SI units.
inline EstimateReport magnitude_estimates(double lambda, double mass = si::electron_mass, double temperature = 500.0) {
  require(lambda > 0.0 && mass > 0.0 && temperature > 0.0, ErrorKind::InvalidArgument,
          "estimate inputs must be positive");
  constexpr double wien_b = 2.897771955e-3;
  EstimateReport r;
  r.lambda = lambda;
  r.compton_shift = si::planck / (mass * si::light_speed) * (1.0 - std::cos(kPi / 2.0));
  r.energy_transfer = si::planck * si::light_speed * r.compton_shift / (lambda * (lambda + r.compton_shift));
  r.speed = std::sqrt(2.0 * r.energy_transfer / mass);
  r.sigma = lambda;
  r.tau = lambda / si::light_speed;
  r.acceleration = r.speed / r.tau;
  r.velocity_term = r.speed / (2.0 * r.sigma);
  r.acceleration_term = mass * r.acceleration * r.sigma / si::hbar;
  r.spreading_term = si::hbar / (4.0 * std::sqrt(2.0) * r.sigma * r.sigma * mass);
  r.photon_density = 2.02e7 * temperature * temperature * temperature;
  r.thermal_wavelength = wien_b / temperature;
  return r;
}

struct ScalingExponents {
  double velocity = 0.0;
  double acceleration = 0.0;
  double spreading = 0.0;
};

/// Log-log slopes of the three rate terms against sigma = lambda over [lo, hi].
inline ScalingExponents estimate_scaling(double lo, double hi, double mass = si::electron_mass) {
  require(lo > 0.0 && hi > lo, ErrorKind::InvalidArgument, "scaling range must be increasing and positive");
  std::vector<double> x, v, a, s;
  for (int i = 0; i <= 20; ++i) {
    const double lam = lo * std::pow(hi / lo, i / 20.0);
    const auto e = magnitude_estimates(lam, mass);
    x.push_back(std::log(lam));
    v.push_back(std::log(e.velocity_term));
    a.push_back(std::log(e.acceleration_term));
    s.push_back(std::log(e.spreading_term));
  }
  return {linear_fit(x, v).slope, linear_fit(x, a).slope, linear_fit(x, s).slope};
}

}  // namespace hb
