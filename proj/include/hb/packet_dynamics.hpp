#pragma once

// Coherent Gaussian packets, the decomposition of state velocity into phase, space,
// momentum and spreading components, Ehrenfest checks, projective speed, and
// finite-dimensional Hamiltonian reconstruction from the commutator equations.

#include <functional>
#include <optional>
#include <vector>

#include <Eigen/SVD>

#include "hb/core.hpp"
#include "hb/fft.hpp"
#include "hb/grid.hpp"
#include "hb/hilbert_core.hpp"
#include "hb/state_geometry.hpp"

namespace hb {

struct GaussianPacket {
  Vec3 center = Vec3::Zero();
  Vec3 momentum = Vec3::Zero();
  double sigma = 1.0;
  double mass = 1.0;
  double hbar = 1.0;
  int dim = 1;

  void validate() const {
    require(sigma > 0.0 && mass > 0.0 && hbar > 0.0, ErrorKind::InvalidArgument,
            "packet sigma, mass and hbar must be positive");
    require(dim >= 1 && dim <= 3, ErrorKind::InvalidArgument, "packet dimension must be 1, 2 or 3");
  }
  Vec3 velocity() const { return momentum / mass; }
};

/// Scalar potential with its gradient. hessian_norm is an optional bound on |d2V| used by the
/// linearity check; when absent it is estimated by differencing the gradient.
struct PotentialField {
  std::function<double(const Vec3&)> value;
  std::function<Vec3(const Vec3&)> gradient;
  std::optional<double> hessian_norm;

  static PotentialField zero() { return constant(0.0); }

  static PotentialField constant(double c) {
    return {[c](const Vec3&) { return c; }, [](const Vec3&) { return Vec3::Zero().eval(); }, 0.0};
  }

  /// V(x) = c - F.x, a uniform force F.
  static PotentialField linear(const Vec3& force, double c = 0.0) {
    return {[force, c](const Vec3& x) { return c - force.dot(x); }, [force](const Vec3&) { return (-force).eval(); },
            0.0};
  }

  /// V(x) = k |x - x0|^2 / 2.
  static PotentialField harmonic(double k, const Vec3& x0 = Vec3::Zero()) {
    return {[k, x0](const Vec3& x) { return 0.5 * k * (x - x0).squaredNorm(); },
            [k, x0](const Vec3& x) { return (k * (x - x0)).eval(); }, std::abs(k)};
  }

  double curvature_at(const Vec3& x, int dim, double step) const {
    if (hessian_norm) return *hessian_norm;
    double worst = 0.0;
    for (int a = 0; a < dim; ++a) {
      Vec3 e = Vec3::Zero();
      e[a] = step;
      const Vec3 col = (gradient(x + e) - gradient(x - e)) / (2.0 * step);
      worst = std::max(worst, col.head(dim).cwiseAbs().maxCoeff());
    }
    return worst;
  }

  /// Gradient agrees with central differences of the value on the probe points.
  bool consistent(const std::vector<Vec3>& probes, int dim, double step = 1e-4, double tol = 1e-6) const {
    for (const auto& x : probes) {
      const Vec3 g = gradient(x);
      for (int a = 0; a < dim; ++a) {
        Vec3 e = Vec3::Zero();
        e[a] = step;
        const double fd = (value(x + e) - value(x - e)) / (2.0 * step);
        if (std::abs(fd - g[a]) > tol * std::max(1.0, std::abs(g[a]))) return false;
      }
    }
    return true;
  }
};

/// psi(x) = (2 pi sigma^2)^(-d/4) exp(-|x-a|^2 / 4 sigma^2 + i p.x / hbar).
inline GridWaveFunction packet_wavefunction(const GaussianPacket& pkt, const Grid& grid) {
  pkt.validate();
  require(grid.dim == pkt.dim, ErrorKind::DimensionMismatch, "grid dimension differs from packet dimension");
  require(grid.spacing <= pkt.sigma / 2.0, ErrorKind::Resolution, "grid spacing exceeds sigma/2");
  require(grid.covers(pkt.center, 8.0 * pkt.sigma), ErrorKind::Resolution, "grid does not cover 8 sigma around the packet");
  const double s2 = pkt.sigma * pkt.sigma;
  const double amp = std::pow(2.0 * kPi * s2, -0.25 * pkt.dim);
  return GridWaveFunction::sample(grid, [&](const Vec3& x) {
    const double env = amp * std::exp(-(x - pkt.center).squaredNorm() / (4.0 * s2));
    return env * std::exp(kI * (pkt.momentum.dot(x) / pkt.hbar));
  });
}

/// |<psi_1, psi_2>| for two packets of equal width.
inline double packet_overlap_abs(const GaussianPacket& p1, const GaussianPacket& p2) {
  p1.validate();
  p2.validate();
  require(std::abs(p1.sigma - p2.sigma) <= 1e-14 * p1.sigma, ErrorKind::InvalidArgument, "packet widths differ");
  const double s2 = p1.sigma * p1.sigma;
  const double da2 = (p1.center - p2.center).squaredNorm();
  const double dp2 = (p1.momentum - p2.momentum).squaredNorm();
  return std::exp(-da2 / (8.0 * s2) - s2 * dp2 / (2.0 * p1.hbar * p1.hbar));
}

struct PhaseSpacePath {
  std::vector<double> times;
  std::vector<Vec3> centers;
  std::vector<Vec3> momenta;
};

/// Fubini-Study speed along a path of packets: sqrt(|a'|^2 / 4 sigma^2 + sigma^2 |p'|^2 / hbar^2).
inline std::vector<double> phase_space_speed(const PhaseSpacePath& path, double sigma, double hbar = 1.0) {
  require(sigma > 0.0 && hbar > 0.0, ErrorKind::InvalidArgument, "sigma and hbar must be positive");
  ClassicalPath a{path.times, path.centers};
  ClassicalPath p{path.times, path.momenta};
  a.validate(3);
  p.validate(3);
  std::vector<double> speed(path.times.size());
  for (std::size_t k = 0; k < speed.size(); ++k) {
    const Vec3 da = detail::path_derivative(a, k, 1);
    const Vec3 dp = detail::path_derivative(p, k, 1);
    speed[k] = std::sqrt(da.squaredNorm() / (4.0 * sigma * sigma) + sigma * sigma * dp.squaredNorm() / (hbar * hbar));
  }
  return speed;
}

struct VelocityComponents {
  double phase = 0.0;        // mean energy / hbar
  double space = 0.0;        // |v| / 2 sigma
  double momentum = 0.0;     // m |w| sigma / hbar, m w = -grad V(a)
  double spread = 0.0;       // sqrt(d) sqrt(2) hbar / (8 sigma^2 m)
  double mean_energy = 0.0;  // V(a) + p^2/2m + d hbar^2 / (8 m sigma^2)
  bool linear_regime = true;

  double uncertainty_squared() const { return space * space + momentum * momentum + spread * spread; }
  double total_squared() const { return phase * phase + uncertainty_squared(); }
};

/// Linearity premise: sigma^2 |d2V| <= 0.01 |grad V| at the centre (flat potentials pass trivially).
inline bool linear_regime(const GaussianPacket& pkt, const PotentialField& v) {
  const double curv = v.curvature_at(pkt.center, pkt.dim, 1e-4 * pkt.sigma);
  const double grad = v.gradient(pkt.center).head(pkt.dim).norm();
  return pkt.sigma * pkt.sigma * curv <= 0.01 * grad || curv == 0.0;
}

inline VelocityComponents velocity_components(const GaussianPacket& pkt, const PotentialField& v) {
  pkt.validate();
  const double d = pkt.dim, s = pkt.sigma, m = pkt.mass, hb = pkt.hbar;
  VelocityComponents c;
  const Vec3 p = pkt.momentum;
  c.space = p.head(pkt.dim).norm() / m / (2.0 * s);
  c.momentum = v.gradient(pkt.center).head(pkt.dim).norm() * s / hb;
  c.spread = std::sqrt(d) * std::sqrt(2.0) * hb / (8.0 * s * s * m);
  c.mean_energy = v.value(pkt.center) + p.head(pkt.dim).squaredNorm() / (2.0 * m) + d * hb * hb / (8.0 * m * s * s);
  c.phase = c.mean_energy / hb;
  c.linear_regime = linear_regime(pkt, v);
  return c;
}

/// h psi = -hbar^2/2m Laplacian psi + V psi with a spectral Laplacian.
inline GridWaveFunction hamiltonian_apply(const GridWaveFunction& psi, const PotentialField& v, double mass, double hbar) {
  GridWaveFunction out = spectral_laplacian(psi);
  for (std::size_t i = 0; i < psi.size(); ++i)
    out[i] = -hbar * hbar / (2.0 * mass) * out[i] + v.value(psi.grid.point(i)) * psi[i];
  return out;
}

struct DecompositionResult {
  double lhs = 0.0;       // ||h psi||^2 / hbar^2 by grid quadrature
  double rhs = 0.0;       // phase^2 + space^2 + momentum^2 + spread^2
  double residual = 0.0;  // |lhs - rhs| / rhs
  VelocityComponents components;
};

inline DecompositionResult decomposition_check(const GaussianPacket& pkt, const PotentialField& v, const Grid& grid) {
  const auto psi = packet_wavefunction(pkt, grid);
  const auto hpsi = hamiltonian_apply(psi, v, pkt.mass, pkt.hbar);
  DecompositionResult r;
  r.components = velocity_components(pkt, v);
  r.lhs = l2_inner(hpsi, hpsi).real() / (pkt.hbar * pkt.hbar);
  r.rhs = r.components.total_squared();
  r.residual = rel_diff(r.lhs, r.rhs);
  return r;
}

struct EhrenfestResult {
  Vec3 lhs_position = Vec3::Zero();  // 2 Re <dpsi/dt, x psi>
  Vec3 rhs_position = Vec3::Zero();  // <psi, (p/m) psi>
  Vec3 lhs_momentum = Vec3::Zero();  // 2 Re <dpsi/dt, p psi>
  Vec3 rhs_momentum = Vec3::Zero();  // <psi, -grad V psi>
};

inline EhrenfestResult ehrenfest_check(const GridWaveFunction& psi, const PotentialField& v, double mass = 1.0,
                                       double hbar = 1.0) {
  require(std::abs(l2_norm(psi) - 1.0) <= 1e-8, ErrorKind::Normalization, "Ehrenfest check needs a unit state");
  const auto hpsi = hamiltonian_apply(psi, v, mass, hbar);
  GridWaveFunction dpsi(psi.grid);
  for (std::size_t i = 0; i < psi.size(); ++i) dpsi[i] = -kI / hbar * hpsi[i];
  EhrenfestResult r;
  for (int a = 0; a < psi.grid.dim; ++a) {
    GridWaveFunction xpsi(psi.grid), force(psi.grid);
    for (std::size_t i = 0; i < psi.size(); ++i) {
      const Vec3 x = psi.grid.point(i);
      xpsi[i] = x[a] * psi[i];
      force[i] = -v.gradient(x)[a] * psi[i];
    }
    GridWaveFunction ppsi = spectral_derivative(psi, a);
    for (auto& z : ppsi.values) z *= -kI * hbar;
    r.lhs_position[a] = 2.0 * l2_inner(dpsi, xpsi).real();
    r.rhs_position[a] = l2_inner(psi, ppsi).real() / mass;
    r.lhs_momentum[a] = 2.0 * l2_inner(dpsi, ppsi).real();
    r.rhs_momentum[a] = l2_inner(psi, force).real();
  }
  return r;
}

/// exp(-i H t / hbar) phi through the Hermitian eigendecomposition.
inline StateVector unitary_evolve(const Observable& h, const StateVector& phi, double t, double hbar = 1.0) {
  require(h.size() == phi.size(), ErrorKind::DimensionMismatch, "Hamiltonian and state dimensions differ");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h.matrix());
  const CVector c = es.eigenvectors().adjoint() * phi.vec();
  CVector rot(c.size());
  for (Eigen::Index k = 0; k < c.size(); ++k) rot[k] = std::exp(-kI * es.eigenvalues()[k] * t / hbar) * c[k];
  return StateVector::normalized(es.eigenvectors() * rot);
}

struct ProjectiveSpeed {
  double fs_speed = 0.0;            // d theta / dt by central difference of fs_distance
  double energy_uncertainty = 0.0;  // Delta E / hbar
};

inline ProjectiveSpeed projective_speed(const Observable& h, const StateVector& phi, double dt, double hbar = 1.0) {
  require(dt > 0.0, ErrorKind::InvalidArgument, "time step must be positive");
  const auto back = unitary_evolve(h, phi, -dt, hbar);
  const auto fwd = unitary_evolve(h, phi, dt, hbar);
  ProjectiveSpeed s;
  s.fs_speed = fs_distance(back, fwd) / (2.0 * dt);
  const CVector hv = h.matrix() * phi.vec();
  const double mean = phi.vec().dot(hv).real();
  s.energy_uncertainty = std::sqrt(std::max(0.0, hv.squaredNorm() - mean * mean)) / hbar;
  return s;
}

struct HamiltonianReconstruction {
  CMatrix h;                  // (band + 1) x (band + 1) Hermitian solution
  Eigen::Index band = 0;      // compared interior block size N - 4
  Eigen::Index nullity = 0;   // dimension of the least-squares null space
  double equation_residual = 0.0;
  RVector singular_values;
};

/// Least-squares Hermitian H with i[H, x] = (hbar/m) p and i[H, p] = -hbar grad V on the interior
/// (N-4) x (N-4) block, trace-fixed on that block against p^2/2m + V.
inline HamiltonianReconstruction reconstruct_hamiltonian(const Observable& x, const Observable& p,
                                                         const Observable& grad_v, const Observable& v,
                                                         double mass = 1.0, double hbar = 1.0) {
  const Eigen::Index n = x.size();
  require(n >= 8, ErrorKind::InvalidArgument, "reconstruction needs truncation N >= 8");
  require(p.size() == n && grad_v.size() == n && v.size() == n, ErrorKind::DimensionMismatch,
          "operator dimensions differ");
  const Eigen::Index m = n - 4, k = m + 1;
  const CMatrix xk = x.matrix().topLeftCorner(k, k), pk = p.matrix().topLeftCorner(k, k);

  // Real parametrisation: diagonal entries, then (Re, Im) of each upper entry.
  std::vector<CMatrix> basis;
  for (Eigen::Index i = 0; i < k; ++i) {
    CMatrix e = CMatrix::Zero(k, k);
    e(i, i) = 1.0;
    basis.push_back(e);
  }
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = i + 1; j < k; ++j) {
      CMatrix re = CMatrix::Zero(k, k), im = CMatrix::Zero(k, k);
      re(i, j) = re(j, i) = 1.0;
      im(i, j) = kI;
      im(j, i) = -kI;
      basis.push_back(re);
      basis.push_back(im);
    }

  const Eigen::Index rows = 4 * m * m;
  auto flatten = [m](const CMatrix& a, const CMatrix& b) {
    RVector out(4 * m * m);
    Eigen::Index r = 0;
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = 0; j < m; ++j) {
        out[r++] = a(i, j).real();
        out[r++] = a(i, j).imag();
        out[r++] = b(i, j).real();
        out[r++] = b(i, j).imag();
      }
    return out;
  };

  Eigen::MatrixXd design(rows, static_cast<Eigen::Index>(basis.size()));
  for (std::size_t c = 0; c < basis.size(); ++c) {
    const CMatrix& e = basis[c];
    design.col(static_cast<Eigen::Index>(c)) = flatten(kI * (e * xk - xk * e), kI * (e * pk - pk * e));
  }
  const RVector target =
      flatten((hbar / mass) * p.matrix().topLeftCorner(k, k), -hbar * grad_v.matrix().topLeftCorner(k, k));

  Eigen::BDCSVD<Eigen::MatrixXd> svd(design, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(1e-10);
  const RVector coef = svd.solve(target);

  HamiltonianReconstruction out;
  out.band = m;
  out.singular_values = svd.singularValues();
  out.nullity = static_cast<Eigen::Index>(basis.size()) - svd.rank();
  out.equation_residual = (design * coef - target).norm() / std::max(target.norm(), 1e-300);
  out.h = CMatrix::Zero(k, k);
  for (std::size_t c = 0; c < basis.size(); ++c) out.h += coef[static_cast<Eigen::Index>(c)] * basis[c];

  const CMatrix reference = p.matrix() * p.matrix() / (2.0 * mass) + v.matrix();
  const double shift = (reference.topLeftCorner(m, m).trace().real() - out.h.topLeftCorner(m, m).trace().real()) /
                       static_cast<double>(m);
  out.h += shift * CMatrix::Identity(k, k);
  return out;
}

/// Relative Frobenius error of the reconstruction on its interior band.
inline double reconstruction_error(const HamiltonianReconstruction& r, const CMatrix& reference) {
  const auto m = r.band;
  return (r.h.topLeftCorner(m, m) - reference.topLeftCorner(m, m)).norm() / reference.topLeftCorner(m, m).norm();
}

}  // namespace hb
