#pragma once

// Spin in an i.i.d. normal random magnetic field: exact Pauli steps, the induced walk of the
// Bloch vector, absorption in polar caps, and the ruin statistics of the resulting outcomes.

#include <vector>

#include <Eigen/LU>

#include "hb/core.hpp"
#include "hb/hilbert_core.hpp"
#include "hb/parallel.hpp"
#include "hb/rng.hpp"
#include "hb/state_geometry.hpp"
#include "hb/stats.hpp"

namespace hb {

struct SpinWalkParams {
  double dt = 1.0;
  double field_std = 0.02;
  double mu = 1.0;
  double hbar = 1.0;
  double absorb_eps = 0.005;
  std::uint64_t max_steps = 1000000;
  std::uint64_t seed = 0;

  /// Rotation angle of the spinor per unit field standard deviation: mu field_std dt / hbar.
  double step_angle() const { return mu * field_std * dt / hbar; }

  void validate() const {
    require(dt > 0.0 && field_std > 0.0 && hbar > 0.0 && mu >= 0.0, ErrorKind::InvalidArgument,
            "dt, field_std and hbar must be positive, mu non-negative");
    require(absorb_eps > 0.0 && absorb_eps <= 0.1, ErrorKind::InvalidArgument, "absorb_eps must lie in (0, 0.1]");
    require(max_steps >= 1, ErrorKind::InvalidArgument, "max_steps must be at least 1");
    require(step_angle() <= 0.05, ErrorKind::InvalidArgument, "step angle mu field_std dt / hbar exceeds 0.05");
  }
};

enum class Outcome { Up, Down, Unresolved };

inline const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::Up: return "UP";
    case Outcome::Down: return "DOWN";
    case Outcome::Unresolved: return "UNRESOLVED";
  }
  return "?";
}

struct WalkOutcome {
  Outcome result = Outcome::Unresolved;
  std::uint64_t steps = 0;
  StateVector final_state = StateVector::basis(2, 0);
};

namespace detail {

struct Spinor {
  Complex a, b;
};

/// cos(l) phi + i sin(l) (sigma . n) phi with l = mu |B| dt / hbar.
inline Spinor pauli_rotate(const Spinor& s, const Vec3& field, double mu_dt_over_hbar) {
  const double bn = field.norm();
  if (bn == 0.0) return s;
  const double lam = mu_dt_over_hbar * bn;
  const double c = std::cos(lam), sn = std::sin(lam) / bn;
  const Complex sa = field.z() * s.a + Complex(field.x(), -field.y()) * s.b;
  const Complex sb = Complex(field.x(), field.y()) * s.a - field.z() * s.b;
  return {c * s.a + kI * sn * sa, c * s.b + kI * sn * sb};
}

inline double bloch_z(const Spinor& s) { return std::norm(s.b) - std::norm(s.a); }

}  // namespace detail

/// Three i.i.d. normal components with standard deviation field_std.
inline Vec3 sample_field(RngStream& rng, double field_std) {
  const double x = rng.normal(0.0, field_std);
  const double y = rng.normal(0.0, field_std);
  const double z = rng.normal(0.0, field_std);
  return {x, y, z};
}

/// One step of phi' = exp(i mu dt (sigma . B) / hbar) phi, in closed form.
inline StateVector pauli_step(const StateVector& phi, const Vec3& field, const SpinWalkParams& params) {
  require(phi.size() == 2, ErrorKind::DimensionMismatch, "Pauli step needs a two-component state");
  const auto out = detail::pauli_rotate({phi[0], phi[1]}, field, params.mu * params.dt / params.hbar);
  CVector v(2);
  v << out.a, out.b;
  return StateVector(v);
}

inline Outcome spin_absorption(double z, double eps) {
  if (z >= 1.0 - 2.0 * eps) return Outcome::Up;
  if (z <= -1.0 + 2.0 * eps) return Outcome::Down;
  return Outcome::Unresolved;
}

/// Walk until the Bloch z-coordinate enters a polar cap or the step budget is exhausted.
inline WalkOutcome run_walk(const StateVector& phi0, const SpinWalkParams& params, RngStream& rng) {
  params.validate();
  require(phi0.size() == 2, ErrorKind::DimensionMismatch, "spin walk needs a two-component state");
  detail::Spinor s{phi0[0], phi0[1]};
  const double k = params.mu * params.dt / params.hbar;
  WalkOutcome out;
  Outcome o = spin_absorption(detail::bloch_z(s), params.absorb_eps);
  std::uint64_t step = 0;
  while (o == Outcome::Unresolved && step < params.max_steps) {
    s = detail::pauli_rotate(s, sample_field(rng, params.field_std), k);
    ++step;
    o = spin_absorption(detail::bloch_z(s), params.absorb_eps);
  }
  out.result = o;
  out.steps = step;
  CVector v(2);
  v << s.a, s.b;
  out.final_state = StateVector(v);
  return out;
}

/// Trial i draws from the substream (seed, i).
inline std::vector<WalkOutcome> run_spin_trials(const StateVector& phi0, std::size_t trials,
                                                const SpinWalkParams& params, unsigned threads) {
  params.validate();
  std::vector<WalkOutcome> out(trials);
  parallel_for(trials, threads, [&](std::size_t i) {
    RngStream rng(params.seed, i);
    out[i] = run_walk(phi0, params, rng);
  });
  return out;
}

struct Histogram {
  std::size_t up = 0;
  std::size_t down = 0;
  std::size_t unresolved = 0;
  std::size_t trials = 0;
  double reference_down = 0.0;  // (1 - z0) / 2

  double p_down() const { return trials ? static_cast<double>(down) / static_cast<double>(trials) : 0.0; }
  double p_up() const { return trials ? static_cast<double>(up) / static_cast<double>(trials) : 0.0; }
  double p_unresolved() const {
    return trials ? static_cast<double>(unresolved) / static_cast<double>(trials) : 0.0;
  }
};

inline Histogram tally(const std::vector<WalkOutcome>& outcomes, double z0) {
  Histogram h;
  h.trials = outcomes.size();
  h.reference_down = 0.5 * (1.0 - z0);
  for (const auto& o : outcomes) {
    if (o.result == Outcome::Up) ++h.up;
    else if (o.result == Outcome::Down) ++h.down;
    else ++h.unresolved;
  }
  return h;
}

inline Histogram born_statistics(const StateVector& phi0, std::size_t trials, const SpinWalkParams& params,
                                 unsigned threads = 1) {
  require(trials >= 100, ErrorKind::InvalidArgument, "born_statistics needs at least 100 trials");
  return tally(run_spin_trials(phi0, trials, params, threads), hopf_map(phi0).z);
}

/// Exact absorption probabilities at the lower end of the symmetric nearest-neighbour walk on
/// {-1, -1 + delta, ..., 1}, from a dense linear solve of the first-step equations.
inline std::vector<std::pair<double, double>> gamblers_ruin_down(double delta) {
  require(delta > 0.0 && delta <= 1.0, ErrorKind::InvalidArgument, "lattice spacing must lie in (0, 1]");
  const auto n = static_cast<Eigen::Index>(std::llround(2.0 / delta)) + 1;
  require(n >= 3 && std::abs((n - 1) * delta - 2.0) < 1e-9, ErrorKind::InvalidArgument,
          "lattice spacing must divide the interval [-1, 1]");
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  RVector rhs = RVector::Zero(n);
  a(0, 0) = 1.0;
  rhs[0] = 1.0;
  a(n - 1, n - 1) = 1.0;
  for (Eigen::Index i = 1; i + 1 < n; ++i) {
    a(i, i) = 1.0;
    a(i, i - 1) = -0.5;
    a(i, i + 1) = -0.5;
  }
  const RVector p = a.partialPivLu().solve(rhs);
  std::vector<std::pair<double, double>> out;
  for (Eigen::Index i = 0; i < n; ++i) out.emplace_back(-1.0 + static_cast<double>(i) * delta, p[i]);
  return out;
}

/// Exit law of Brownian motion on S^2 from the caps |z| >= a = 1 - 2 eps, by its scale function atanh z:
/// P(DOWN) = (atanh a - atanh z0) / (2 atanh a).
inline double sphere_walk_down_probability(double z0, double eps) {
  const double a = 1.0 - 2.0 * eps;
  if (z0 >= a) return 0.0;
  if (z0 <= -a) return 1.0;
  return (std::atanh(a) - std::atanh(z0)) / (2.0 * std::atanh(a));
}

/// E[z'] = c z for one step: a rotation of the Bloch vector by 2 lambda about an isotropic axis
/// gives c = E[(1 + 2 cos 2 lambda) / 3], lambda = step_angle * |B| / field_std (|B| / std is chi with 3 dof).
inline double expected_z_contraction(const SpinWalkParams& params) {
  const double s = params.step_angle();
  const double norm = std::sqrt(2.0 / kPi);
  return detail::quad1d(
      [&](double r) { return norm * r * r * std::exp(-0.5 * r * r) * (1.0 + 2.0 * std::cos(2.0 * s * r)) / 3.0; },
      0.0, 14.0, 4000);
}

enum class FieldMode { Isotropic, ZOnly };

struct SpinIsotropyReport {
  TestReport direction;  // Rayleigh test on the displacement angle
  TestReport axial;      // Rayleigh test on the doubled angle
  TestReport normality;  // KS of tangent components against N(0, (2 step_angle)^2)
  std::vector<double> magnitudes;
  bool pass() const { return direction.pass && axial.pass && normality.pass; }
};

/// One-step Bloch displacements from phi0, projected to the tangent plane of S^2.
inline SpinIsotropyReport isotropy_test(const StateVector& phi0, std::size_t samples, const SpinWalkParams& params,
                                        RngStream& rng, FieldMode mode = FieldMode::Isotropic, double alpha = 0.01) {
  params.validate();
  const Vec3 r = hopf_map(phi0).vec();
  const Vec3 zhat(0.0, 0.0, 1.0);
  require(zhat.cross(r).norm() > 1e-6, ErrorKind::Degenerate, "isotropy test needs a state away from the poles");
  const Vec3 e1 = zhat.cross(r).normalized();
  const Vec3 e2 = r.cross(e1);
  std::vector<Vec3> dirs, doubled;
  std::vector<double> comps;
  SpinIsotropyReport rep;
  for (std::size_t i = 0; i < samples; ++i) {
    Vec3 b = sample_field(rng, params.field_std);
    if (mode == FieldMode::ZOnly) b = Vec3(0.0, 0.0, b.z());
    const Vec3 d = hopf_map(pauli_step(phi0, b, params)).vec() - r;
    const double u = d.dot(e1), v = d.dot(e2);
    const double ang = std::atan2(v, u);
    dirs.emplace_back(std::cos(ang), std::sin(ang), 0.0);
    doubled.emplace_back(std::cos(2.0 * ang), std::sin(2.0 * ang), 0.0);
    comps.push_back(u);
    comps.push_back(v);
    rep.magnitudes.push_back(std::hypot(u, v));
  }
  rep.direction = direction_uniformity(dirs, 2, alpha);
  rep.axial = direction_uniformity(doubled, 2, alpha);
  const double sd = 2.0 * params.step_angle();
  rep.normality = ks_test(comps, [sd](double x) { return 0.5 * std::erfc(-x / (sd * std::sqrt(2.0))); }, alpha);
  return rep;
}

}  // namespace hb
