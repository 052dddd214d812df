#pragma once

// Finite-dimensional geometry of the sphere of states and its projective quotient:
// observables as tangent fields, fibre decomposition, the uncertainty identity,
// Killing metric and sectional curvature on SU(2), truncated oscillator matrices, Hopf map.

#include <algorithm>
#include <functional>

#include "hb/core.hpp"

namespace hb {

/// Unit-norm complex vector of dimension N >= 2.
class StateVector {
 public:
  static constexpr double kNormTolerance = 1e-12;

  explicit StateVector(CVector amplitudes) : amp_(std::move(amplitudes)) {
    require(amp_.size() >= 2, ErrorKind::InvalidArgument, "state dimension must be at least 2");
    require(std::abs(amp_.norm() - 1.0) <= kNormTolerance, ErrorKind::Normalization,
            "state vector is not unit norm");
  }

  static StateVector normalized(const CVector& v) {
    const double n = v.norm();
    require(n > 0.0 && std::isfinite(n), ErrorKind::Normalization, "cannot normalize a zero vector");
    return StateVector(v / n);
  }

  static StateVector basis(Eigen::Index n, Eigen::Index k) {
    CVector v = CVector::Zero(n);
    v[k] = 1.0;
    return StateVector(v);
  }

  const CVector& vec() const { return amp_; }
  Eigen::Index size() const { return amp_.size(); }
  Complex operator[](Eigen::Index i) const { return amp_[i]; }

 private:
  CVector amp_;
};

/// Hermitian matrix.
class Observable {
 public:
  explicit Observable(CMatrix m) : m_(std::move(m)) {
    require(m_.rows() == m_.cols(), ErrorKind::DimensionMismatch, "observable must be square");
    const double scale = std::max(m_.norm(), 1e-300);
    require((m_ - m_.adjoint()).norm() <= 1e-12 * scale, ErrorKind::InvalidArgument, "observable is not Hermitian");
  }
  const CMatrix& matrix() const { return m_; }
  Eigen::Index size() const { return m_.rows(); }

 private:
  CMatrix m_;
};

/// Anti-Hermitian matrix (an element of u(N)).
class LieGenerator {
 public:
  explicit LieGenerator(CMatrix m) : m_(std::move(m)) {
    require(m_.rows() == m_.cols(), ErrorKind::DimensionMismatch, "generator must be square");
    const double scale = std::max(m_.norm(), 1e-300);
    require((m_ + m_.adjoint()).norm() <= 1e-12 * scale, ErrorKind::InvalidArgument,
            "generator is not anti-Hermitian");
  }
  const CMatrix& matrix() const { return m_; }
  Eigen::Index size() const { return m_.rows(); }
  LieGenerator scaled(double c) const { return LieGenerator(c * m_); }

 private:
  CMatrix m_;
};

struct BlochPoint {
  double x = 0.0, y = 0.0, z = 0.0;
  Vec3 vec() const { return {x, y, z}; }
};

namespace detail {
inline void require_same(Eigen::Index a, Eigen::Index b) {
  require(a == b, ErrorKind::DimensionMismatch,
          "dimension " + std::to_string(a) + " does not match " + std::to_string(b));
}
}  // namespace detail

inline CMatrix pauli(int k) {
  CMatrix s(2, 2);
  switch (k) {
    case 1: s << 0, 1, 1, 0; break;
    case 2: s << 0, -kI, kI, 0; break;
    case 3: s << 1, 0, 0, -1; break;
    default: throw Error(ErrorKind::InvalidArgument, "Pauli index must be 1, 2 or 3");
  }
  return s;
}

/// Spin generator s_k = (i/2) sigma_k.
inline LieGenerator spin_generator(int k) { return LieGenerator(0.5 * kI * pauli(k)); }

/// Tangent field of an observable: -i A phi.
inline CVector observable_field(const Observable& a, const StateVector& phi) {
  detail::require_same(a.size(), phi.size());
  return -kI * (a.matrix() * phi.vec());
}

/// Lie bracket [F, G](phi) = DG(phi) F(phi) - DF(phi) G(phi) of vector fields on C^N,
/// with directional derivatives taken by central differences.
inline CVector field_bracket(const std::function<CVector(const CVector&)>& f,
                             const std::function<CVector(const CVector&)>& g, const CVector& phi,
                             double eps = 1e-4) {
  const CVector fv = f(phi), gv = g(phi);
  const CVector dg_f = (g(phi + eps * fv) - g(phi - eps * fv)) / (2.0 * eps);
  const CVector df_g = (f(phi + eps * gv) - f(phi - eps * gv)) / (2.0 * eps);
  return dg_f - df_g;
}

struct FibreDecomposition {
  double mean = 0.0;
  CVector orthogonal;  // -i (A - mean) phi
};

inline FibreDecomposition fibre_decompose(const Observable& a, const StateVector& phi) {
  detail::require_same(a.size(), phi.size());
  const CVector aphi = a.matrix() * phi.vec();
  FibreDecomposition d;
  d.mean = phi.vec().dot(aphi).real();
  d.orthogonal = -kI * (aphi - d.mean * phi.vec());
  return d;
}

struct UncertaintyIdentity {
  double lhs = 0.0;     // Var(A) Var(B) from expectation values
  double area2 = 0.0;   // squared area of the parallelogram spanned by X, Y (real coordinates)
  double inner2 = 0.0;  // G(X, Y)^2 = (Re <X, Y>)^2
  double commutator_bound = 0.0;  // (|<[A, B]>| / 2)^2
};

/// Pieces of Var(A) Var(B) = area^2 + G(X, Y)^2 with X, Y the fibre-orthogonal fields of A and B.
inline UncertaintyIdentity uncertainty_identity(const Observable& a, const Observable& b, const StateVector& phi) {
  detail::require_same(a.size(), phi.size());
  detail::require_same(b.size(), phi.size());
  const CVector& v = phi.vec();
  const Eigen::Index n = v.size();
  const CMatrix id = CMatrix::Identity(n, n);
  const double ma = v.dot(a.matrix() * v).real();
  const double mb = v.dot(b.matrix() * v).real();
  const CMatrix da = a.matrix() - ma * id, db = b.matrix() - mb * id;

  UncertaintyIdentity r;
  r.lhs = v.dot(da * da * v).real() * v.dot(db * db * v).real();

  const CVector x = fibre_decompose(a, phi).orthogonal;
  const CVector y = fibre_decompose(b, phi).orthogonal;
  // Real coordinates (Re, Im) and the Lagrange identity: area^2 = sum_{i<j} (x_i y_j - x_j y_i)^2.
  RVector xr(2 * n), yr(2 * n);
  xr << x.real(), x.imag();
  yr << y.real(), y.imag();
  double area2 = 0.0;
  for (Eigen::Index i = 0; i < 2 * n; ++i)
    for (Eigen::Index j = i + 1; j < 2 * n; ++j) {
      const double w = xr[i] * yr[j] - xr[j] * yr[i];
      area2 += w * w;
    }
  r.area2 = area2;
  const double g = x.dot(y).real();
  r.inner2 = g * g;
  const Complex c = v.dot((a.matrix() * b.matrix() - b.matrix() * a.matrix()) * v);
  r.commutator_bound = 0.25 * std::norm(c);
  return r;
}

/// Killing inner product (X, Y)_K = metric_scale * (1/2) Re Tr(X Y^+).
inline double killing_inner(const LieGenerator& x, const LieGenerator& y, double metric_scale = 1.0) {
  detail::require_same(x.size(), y.size());
  return metric_scale * 0.5 * (x.matrix() * y.matrix().adjoint()).trace().real();
}

/// Sectional curvature (1/4) |[X, Y]|^2 / (|X|^2 |Y|^2 - (X, Y)^2) of the plane spanned by X, Y.
/// Scaling the metric by lambda scales the curvature by 1/lambda (so lambda = hbar^2 gives 1/hbar^2).
inline double sectional_curvature(const LieGenerator& x, const LieGenerator& y, double metric_scale = 1.0) {
  detail::require_same(x.size(), y.size());
  const LieGenerator br(x.matrix() * y.matrix() - y.matrix() * x.matrix());
  const double xx = killing_inner(x, x, metric_scale), yy = killing_inner(y, y, metric_scale);
  const double xy = killing_inner(x, y, metric_scale);
  const double denom = xx * yy - xy * xy;
  require(denom > 1e-14 * xx * yy && xx > 0.0 && yy > 0.0, ErrorKind::Degenerate,
          "generators are linearly dependent");
  return 0.25 * killing_inner(br, br, metric_scale) / denom;
}

/// Same formula with the generators evaluated on a state: vector norms of X phi, Y phi, [X, Y] phi
/// replace Killing norms. Valid at points where the truncated operators act exactly.
inline double sectional_curvature_at(const CMatrix& x, const CMatrix& y, const StateVector& phi) {
  detail::require_same(x.rows(), phi.size());
  detail::require_same(y.rows(), phi.size());
  const CVector xp = x * phi.vec(), yp = y * phi.vec();
  const CVector bp = x * yp - y * xp;
  const double xx = xp.squaredNorm(), yy = yp.squaredNorm(), xy = xp.dot(yp).real();
  const double denom = xx * yy - xy * xy;
  require(denom > 1e-14 * xx * yy && xx > 0.0 && yy > 0.0, ErrorKind::Degenerate,
          "tangent vectors are linearly dependent");
  return 0.25 * bp.squaredNorm() / denom;
}

struct OscillatorMatrices {
  Observable x;
  Observable p;
};

/// Truncated matrices of x and p in the harmonic-oscillator basis (hbar = m = omega = 1).
inline OscillatorMatrices oscillator_matrices(Eigen::Index n) {
  require(n >= 2, ErrorKind::InvalidArgument, "oscillator truncation must be at least 2");
  CMatrix x = CMatrix::Zero(n, n), p = CMatrix::Zero(n, n);
  for (Eigen::Index k = 1; k < n; ++k) {
    const double e = std::sqrt(static_cast<double>(k) / 2.0);
    x(k - 1, k) = x(k, k - 1) = e;
    p(k - 1, k) = -kI * e;
    p(k, k - 1) = kI * e;
  }
  return {Observable(x), Observable(p)};
}

/// Bundle projection S^3 -> S^2:
/// x = 2 Re(phi1 conj phi2), y = i(phi1 conj phi2 - conj phi1 phi2), z = |phi2|^2 - |phi1|^2.
inline BlochPoint hopf_map(const StateVector& phi) {
  require(phi.size() == 2, ErrorKind::DimensionMismatch, "Hopf map needs a two-component state");
  const Complex c = phi[0] * std::conj(phi[1]);
  return {2.0 * c.real(), -2.0 * c.imag(), std::norm(phi[1]) - std::norm(phi[0])};
}

/// A unit spinor with the given Bloch z-coordinate (phases zero): |phi1|^2 = (1 - z)/2.
inline StateVector spinor_from_z(double z) {
  require(z >= -1.0 && z <= 1.0, ErrorKind::InvalidArgument, "z must lie in [-1, 1]");
  CVector v(2);
  v << std::sqrt(0.5 * (1.0 - z)), std::sqrt(0.5 * (1.0 + z));
  return StateVector::normalized(v);
}

/// Fubini-Study distance arccos |<phi, psi>| in [0, pi/2], computed as atan2(|psi_perp|, |<phi, psi>|).
inline double fs_distance(const StateVector& phi, const StateVector& psi) {
  detail::require_same(phi.size(), psi.size());
  const Complex c = phi.vec().dot(psi.vec());
  const double ortho = (psi.vec() - c * phi.vec()).norm();
  return std::atan2(ortho, std::min(1.0, std::abs(c)));
}

/// Representative with the first nonzero amplitude real and positive.
inline StateVector canonical_gauge(const StateVector& phi) {
  for (Eigen::Index i = 0; i < phi.size(); ++i) {
    if (std::abs(phi[i]) > 0.0) {
      const Complex rot = std::conj(phi[i]) / std::abs(phi[i]);
      CVector v = phi.vec() * rot;
      v[i] = std::abs(phi[i]);
      return StateVector(v);
    }
  }
  return phi;
}

}  // namespace hb
