#pragma once

// Deterministic and instance-sampling experiments on state geometry, packets and estimates.

#include "hb/born_bridge.hpp"
#include "hb/density_diffusion.hpp"
#include "hb/experiment/walks.hpp"
#include "hb/hilbert_core.hpp"
#include "hb/packet_dynamics.hpp"
#include "hb/position_measurement.hpp"
#include "hb/state_geometry.hpp"

namespace hb::exp {

// ---- curvature ----------------------------------------------------------------------------

inline std::vector<ParamDef> curvature_params() {
  return {
      {"oscillator_n", ParamType::Int, "16", "truncation of the oscillator matrices"},
      {"scale_c", ParamType::Real, "3.7", "rescaling of the first generator"},
      {"scale_d", ParamType::Real, "-0.45", "rescaling of the second generator"},
      {"hbar", ParamType::Real, "1.3", "metric scale hbar^2 for the unit-system check"},
  };
}

inline RunSummary run_curvature(const ExperimentConfig& c, unsigned) {
  RunSummary s = start(c);
  const auto s1 = spin_generator(1), s2 = spin_generator(2);
  const double r = sectional_curvature(s1, s2);
  s.check_abs("sectional curvature, spin generators", r, 1.0, 1e-12, Source::Published);
  s.check_abs("Killing norm |s_1|", std::sqrt(killing_inner(s1, s1)), 0.5, 1e-15, Source::Published);
  s.check_abs("Killing product (s_1, s_2)", killing_inner(s1, s2), 0.0, 1e-15, Source::Published);
  const double rs = sectional_curvature(s1.scaled(c.real("scale_c")), s2.scaled(c.real("scale_d")));
  s.check_abs("curvature after rescaling generators", rs, r, 1e-12, Source::Exact);
  const double hb = c.real("hbar");
  if (hb <= 0.0) throw UsageError("hbar must be positive");
  s.check_rel("curvature with metric scaled by hbar^2", sectional_curvature(s1, s2, hb * hb), 1.0 / (hb * hb), 1e-12,
              Source::Published);

  const auto n = static_cast<Eigen::Index>(c.integer("oscillator_n"));
  const auto osc = oscillator_matrices(n);
  const auto vac = StateVector::basis(n, 0);
  const double rv = sectional_curvature_at(-kI * osc.x.matrix(), -kI * osc.p.matrix(), vac);
  s.check_abs("sectional curvature at the oscillator vacuum", rv, 1.0, 1e-10, Source::Published);
  const CMatrix comm = osc.p.matrix() * osc.x.matrix() - osc.x.matrix() * osc.p.matrix();
  s.check_abs("|[p, x] phi_0|", (comm * vac.vec()).norm(), 1.0, 1e-14, Source::Published);
  s.check_abs("[p, x] phi_0 + i phi_0", (comm * vac.vec() + kI * vac.vec()).norm(), 0.0, 1e-14, Source::Published);
  const auto two = oscillator_matrices(2);
  const double block = (two.x.matrix() - pauli(1) / std::sqrt(2.0)).norm() + (two.p.matrix() - pauli(2) / std::sqrt(2.0)).norm();
  s.check_abs("N = 2 blocks vs Pauli / sqrt(2)", block, 0.0, 1e-15, Source::Published);

  s.trials.columns = {"quantity", "value"};
  s.trials.rows = {{std::string("spin_curvature"), r},
                   {std::string("rescaled_curvature"), rs},
                   {std::string("vacuum_curvature"), rv}};
  return s;
}

// ---- uncertainty-identity ----------------------------------------------------------------

inline std::vector<ParamDef> uncertainty_params() {
  return {
      {"max_n", ParamType::Int, "16", "largest dimension; instances cycle through 2..max_n"},
      {"speed_n", ParamType::Int, "16", "dimension of the projective-speed model"},
      {"speed_states", ParamType::Int, "10", "random states for the projective-speed check"},
      {"speed_dt", ParamType::Real, "1e-3", "time step of the central difference"},
  };
}

inline RunSummary run_uncertainty(const ExperimentConfig& c, unsigned) {
  RunSummary s = start(c);
  const std::uint64_t seed = seed_of(c);
  const std::size_t instances = c.count("trials");
  const auto max_n = static_cast<Eigen::Index>(c.integer("max_n"));
  if (max_n < 2) throw UsageError("max_n must be at least 2");
  double worst = 0.0;
  long long violations = 0;
  s.trials.columns = {"instance", "n", "lhs", "area2", "inner2", "residual", "commutator_bound"};
  for (std::size_t i = 0; i < instances; ++i) {
    RngStream rng(seed, i);
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(i % static_cast<std::size_t>(max_n - 1));
    const Observable a(sample_gue(n, rng, 1.0)), b(sample_gue(n, rng, 1.0));
    const auto phi = random_state(n, rng);
    const auto u = uncertainty_identity(a, b, phi);
    const double res = std::abs(u.lhs - u.area2 - u.inner2) / u.lhs;
    worst = std::max(worst, res);
    if (u.lhs < u.commutator_bound * (1.0 - 1e-12)) ++violations;
    s.trials.rows.push_back({static_cast<long long>(i), static_cast<long long>(n), u.lhs, u.area2, u.inner2, res,
                             u.commutator_bound});
  }
  s.check_max("max relative residual of Var A Var B = area^2 + inner^2", worst, 1e-10, Source::Exact);
  s.check_max("uncertainty inequality violations", static_cast<double>(violations), 0.0, Source::Exact);

  const auto sn = static_cast<Eigen::Index>(c.integer("speed_n"));
  double speed_worst = 0.0;
  for (std::size_t k = 0; k < c.count("speed_states"); ++k) {
    RngStream rng(seed ^ 0xa5a5a5a5a5a5a5a5ULL, k);
    const Observable h(sample_gue(sn, rng, 1.0));
    const auto sp = projective_speed(h, random_state(sn, rng), c.real("speed_dt"));
    speed_worst = std::max(speed_worst, rel_diff(sp.fs_speed, sp.energy_uncertainty));
  }
  s.check_max("projective speed vs Delta E / hbar (max relative deviation)", speed_worst, 1e-4, Source::Oracle);
  return s;
}

// ---- decomposition ------------------------------------------------------------------------

inline std::vector<ParamDef> decomposition_params() {
  return {
      {"sigma", ParamType::Real, "0.7", "packet width"},
      {"mass", ParamType::Real, "1.3", "particle mass"},
      {"hbar", ParamType::Real, "1.0", "reduced Planck constant"},
      {"center", ParamType::Real, "0.3", "packet centre"},
      {"momentum", ParamType::Real, "0.8", "packet momentum"},
      {"force", ParamType::Real, "0.6", "uniform force F (V = -F x)"},
      {"spacing", ParamType::Real, "0.05", "grid spacing"},
      {"light_speed", ParamType::Real, "2.0", "c for the rest-energy identity"},
  };
}

inline RunSummary run_decomposition(const ExperimentConfig& c, unsigned) {
  RunSummary s = start(c);
  GaussianPacket pkt;
  pkt.sigma = c.real("sigma");
  pkt.mass = c.real("mass");
  pkt.hbar = c.real("hbar");
  pkt.center.x() = c.real("center");
  pkt.momentum.x() = c.real("momentum");
  const double f = c.real("force"), h = c.real("spacing");
  const Grid g = Grid::line(pkt.center.x() - 14.0 * pkt.sigma, pkt.center.x() + 14.0 * pkt.sigma, h);
  const auto v = PotentialField::linear(Vec3(f, 0.0, 0.0));
  const auto d = decomposition_check(pkt, v, g);
  s.check_max("|h psi|^2 / hbar^2 vs sum of squared components (relative)", d.residual, 1e-6, Source::Oracle);
  const double sg = pkt.sigma, m = pkt.mass, hb = pkt.hbar;
  s.check_rel("space component vs v / 2 sigma", d.components.space, std::abs(pkt.momentum.x() / m) / (2.0 * sg), 1e-8,
              Source::Published);
  s.check_rel("momentum component vs m w sigma / hbar", d.components.momentum, m * (std::abs(f) / m) * sg / hb, 1e-8,
              Source::Published);
  s.check_rel("spread component vs sqrt 2 hbar / 8 sigma^2 m", d.components.spread,
              std::sqrt(2.0) * hb / (8.0 * sg * sg * m), 1e-8, Source::Published);

  const double cl = c.real("light_speed");
  const double sc = hb / (2.0 * m * cl);
  s.check_rel("hbar^2 / 8 m sigma^2 at sigma = hbar / 2 m c vs m c^2 / 2", hb * hb / (8.0 * m * sc * sc),
              0.5 * m * cl * cl, 1e-14, Source::Published);

  GaussianPacket rest = pkt;
  rest.momentum = Vec3::Zero();
  const auto free = decomposition_check(rest, PotentialField::zero(), g);
  s.check_rel("free packet at rest: |h psi|^2 / hbar^2 vs phase^2 + spread^2", free.lhs,
              free.components.phase * free.components.phase + free.components.spread * free.components.spread, 1e-8,
              Source::Exact);

  GaussianPacket off = pkt;
  off.center.x() = 2.0;
  const auto harm1 = decomposition_check(off, PotentialField::harmonic(1.0), Grid::line(2.0 - 14.0 * sg, 2.0 + 14.0 * sg, h));
  GaussianPacket narrow = off;
  narrow.sigma = sg / 2.0;
  const auto harm2 = decomposition_check(narrow, PotentialField::harmonic(1.0),
                                         Grid::line(2.0 - 14.0 * sg, 2.0 + 14.0 * sg, h / 2.0));
  s.check_min("harmonic residual drop when sigma halves", harm1.residual / harm2.residual, 2.0, Source::Oracle,
              Role::Diagnostic);

  s.trials.columns = {"case", "lhs", "rhs", "residual", "phase", "space", "momentum", "spread"};
  for (const auto& [name, r] : std::vector<std::pair<std::string, DecompositionResult>>{
           {"linear", d}, {"free_rest", free}, {"harmonic", harm1}, {"harmonic_half_sigma", harm2}})
    s.trials.rows.push_back({name, r.lhs, r.rhs, r.residual, r.components.phase, r.components.space,
                             r.components.momentum, r.components.spread});
  return s;
}

// ---- ehrenfest ----------------------------------------------------------------------------

inline std::vector<ParamDef> ehrenfest_params() {
  return {
      {"sigma", ParamType::Real, "0.6", "packet width"},
      {"momentum", ParamType::Real, "1.1", "packet momentum"},
      {"force", ParamType::Real, "0.4", "uniform force F"},
      {"mass", ParamType::Real, "1.0", "particle mass"},
      {"spacing", ParamType::Real, "0.05", "grid spacing"},
      {"evolve_dt", ParamType::Real, "1e-3", "time step of the acceleration check"},
  };
}

inline RunSummary run_ehrenfest(const ExperimentConfig& c, unsigned) {
  RunSummary s = start(c);
  GaussianPacket pkt;
  pkt.sigma = c.real("sigma");
  pkt.mass = c.real("mass");
  pkt.momentum.x() = c.real("momentum");
  const double f = c.real("force");
  const Grid g = Grid::line(-16.0 * pkt.sigma, 16.0 * pkt.sigma, c.real("spacing"));
  const auto psi = packet_wavefunction(pkt, g);
  const auto lin = PotentialField::linear(Vec3(f, 0.0, 0.0));

  const auto free = ehrenfest_check(psi, PotentialField::zero(), pkt.mass);
  s.check_rel("free packet <p/m>", free.rhs_position.x(), pkt.momentum.x() / pkt.mass, 1e-6, Source::Exact);
  s.check_abs("free packet <-grad V>", free.rhs_momentum.x(), 0.0, 1e-12, Source::Exact);
  s.check_rel("free packet d<x>/dt vs <p/m>", free.lhs_position.x(), free.rhs_position.x(), 1e-6, Source::Oracle);

  const auto e = ehrenfest_check(psi, lin, pkt.mass);
  s.check_rel("linear potential <-grad V> vs F", e.rhs_momentum.x(), f, 1e-10, Source::Published);
  s.check_rel("linear potential d<p>/dt vs <-grad V>", e.lhs_momentum.x(), e.rhs_momentum.x(), 1e-6, Source::Oracle);

  GaussianPacket other = pkt;
  other.center.x() = 1.5;
  other.momentum.x() = -0.7;
  const auto p2 = packet_wavefunction(other, g);
  GridWaveFunction sup = axpy(Complex(0.6, 0.2), psi, Complex(-0.3, 0.5), p2);
  const double nrm = l2_norm(sup);
  for (auto& z : sup.values) z /= nrm;
  for (const auto& [name, pot] : std::vector<std::pair<std::string, PotentialField>>{
           {"linear", lin}, {"harmonic", PotentialField::harmonic(0.8)}}) {
    const auto r = ehrenfest_check(sup, pot, pkt.mass);
    s.check_rel("superposition, " + name + ": d<x>/dt vs <p/m>", r.lhs_position.x(), r.rhs_position.x(), 1e-6,
                Source::Oracle);
    s.check_rel("superposition, " + name + ": d<p>/dt vs <-grad V>", r.lhs_momentum.x(), r.rhs_momentum.x(), 1e-6,
                Source::Oracle);
  }

  // Second difference of <x> under short-time evolution in the linear potential.
  EvolutionParams ep;
  ep.dt = c.real("evolve_dt");
  ep.steps = 2;
  ep.mass = pkt.mass;
  const auto snaps = evolve_grid(psi, lin, ep);
  std::vector<double> mean_x;
  for (const auto& w : snaps) {
    double m = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) m += g.coord(0, i) * std::norm(w[i]) * g.weight(i);
    mean_x.push_back(m);
  }
  const double acc = (mean_x[2] - 2.0 * mean_x[1] + mean_x[0]) / (ep.dt * ep.dt);
  s.check_rel("short-time d^2<x>/dt^2 vs F / m", acc, f / pkt.mass, 1e-3, Source::Exact, Role::Diagnostic);

  s.trials.columns = {"case", "lhs_position", "rhs_position", "lhs_momentum", "rhs_momentum"};
  s.trials.rows.push_back({std::string("free"), free.lhs_position.x(), free.rhs_position.x(), free.lhs_momentum.x(),
                           free.rhs_momentum.x()});
  s.trials.rows.push_back({std::string("linear"), e.lhs_position.x(), e.rhs_position.x(), e.lhs_momentum.x(),
                           e.rhs_momentum.x()});
  return s;
}

// ---- hamiltonian-reconstruct --------------------------------------------------------------

inline std::vector<ParamDef> hamiltonian_params() {
  return {
      {"n", ParamType::Int, "24", "oscillator truncation N"},
      {"mass", ParamType::Real, "1.0", "particle mass"},
  };
}

inline RunSummary run_hamiltonian(const ExperimentConfig& c, unsigned) {
  RunSummary s = start(c);
  const auto n = static_cast<Eigen::Index>(c.integer("n"));
  const double m = c.real("mass");
  const auto osc = oscillator_matrices(n);
  const CMatrix zero = CMatrix::Zero(n, n);
  const CMatrix x2 = osc.x.matrix() * osc.x.matrix();
  const CMatrix kinetic = osc.p.matrix() * osc.p.matrix() / (2.0 * m);

  s.trials.columns = {"potential", "band", "nullity", "equation_residual", "band_error"};
  for (const auto& [name, gv, vm] : std::vector<std::tuple<std::string, CMatrix, CMatrix>>{
           {"zero", zero, zero}, {"half_x2", osc.x.matrix(), 0.5 * x2}}) {
    const auto r = reconstruct_hamiltonian(osc.x, osc.p, Observable(gv), Observable(vm), m);
    const double err = reconstruction_error(r, kinetic + vm);
    s.check_max("interior-band error, V = " + name, err, 1e-6, Source::Oracle);
    s.check_max("Hermiticity defect, V = " + name, (r.h - r.h.adjoint()).norm(), 1e-10, Source::Exact);
    s.check_max("commutator-equation residual, V = " + name, r.equation_residual, 1e-10, Source::Oracle,
                Role::Diagnostic);
    s.trials.rows.push_back({name, static_cast<long long>(r.band), static_cast<long long>(r.nullity),
                             r.equation_residual, err});
  }
  // A constant shift leaves both commutators unchanged.
  const auto k = n - 3;
  const CMatrix h = kinetic.topLeftCorner(k, k);
  const CMatrix xs = osc.x.matrix().topLeftCorner(k, k);
  const CMatrix shifted = h + 2.5 * CMatrix::Identity(k, k);
  s.check_abs("[H + cI, x] - [H, x]", ((shifted * xs - xs * shifted) - (h * xs - xs * h)).norm(), 0.0, 1e-12,
              Source::Exact);
  return s;
}

// ---- born-bridge --------------------------------------------------------------------------

inline std::vector<ParamDef> born_bridge_params() {
  return {
      {"sigma", ParamType::Real, "1.0", "packet width"},
      {"spread", ParamType::Real, "1.5", "std of random centres, in units of sigma"},
  };
}

inline RunSummary run_born_bridge(const ExperimentConfig& c, unsigned) {
  RunSummary s = start(c);
  const double sg = c.real("sigma");
  const double spread = c.real("spread") * sg;
  const std::uint64_t seed = seed_of(c);
  const std::size_t pairs = c.count("trials");
  double rel_worst = 0.0, bn_worst = 0.0;
  s.trials.columns = {"pair", "dim", "distance", "lhs", "rhs", "prob", "density_form"};
  for (std::size_t i = 0; i < pairs; ++i) {
    RngStream rng(seed, i);
    const int dim = (i % 2 == 0) ? 1 : 3;
    Vec3 a = Vec3::Zero(), b = Vec3::Zero();
    for (int k = 0; k < dim; ++k) {
      a[k] = rng.normal(0.0, spread);
      b[k] = rng.normal(0.0, spread);
    }
    const auto r = fs_euclid_relation(a, b, sg, dim, dim == 3 ? sg / 2.0 : sg / 4.0);
    const auto bn = born_normal_equivalence(a, b, sg, dim);
    rel_worst = std::max(rel_worst, std::abs(r.lhs - r.rhs));
    bn_worst = std::max(bn_worst, rel_diff(bn.prob, bn.density_form));
    s.trials.rows.push_back({static_cast<long long>(i), static_cast<long long>(dim), (a - b).norm(), r.lhs, r.rhs,
                             bn.prob, bn.density_form});
  }
  s.check_max("max |exp(-|a-b|^2 / 4 sigma^2) - cos^2 theta|", rel_worst, 1e-8, Source::Published);
  s.check_max("max relative |prob - density x (4 pi sigma^2)^(d/2)|", bn_worst, 1e-10, Source::Published);

  GaussianPacket p1, p2;
  p1.sigma = p2.sigma = sg;
  p2.center.x() = 2.0 * sg;
  s.check_abs("packets 2 sigma apart: transition probability", transition_probability(p1, p2), std::exp(-1.0), 1e-15,
              Source::Published);
  const auto half = fs_euclid_relation(Vec3::Zero(), Vec3(2.0 * sg * std::sqrt(std::log(2.0)), 0.0, 0.0), sg, 1);
  s.check_abs("(a-b)^2 = 4 sigma^2 ln 2: theta", half.theta, kPi / 4.0, 1e-8, Source::Exact);

  // Mixed finite-dimensional and grid pairs.
  std::vector<TransitionPair> mixed;
  const Grid g = Grid::line(-12.0 * sg, 12.0 * sg, sg / 8.0);
  for (std::size_t i = 0; i < 100; ++i) {
    RngStream rng(seed ^ 0x3c6ef372fe94f82bULL, i);
    if (i % 2 == 0) {
      const auto n = static_cast<Eigen::Index>(2 + i % 7);
      mixed.emplace_back(std::make_pair(random_state(n, rng), random_state(n, rng)));
    } else {
      GaussianPacket q1, q2;
      q1.sigma = q2.sigma = sg;
      q1.center.x() = rng.normal(0.0, sg);
      q2.center.x() = rng.normal(0.0, sg);
      q1.momentum.x() = rng.normal(0.0, 1.0 / sg);
      q2.momentum.x() = rng.normal(0.0, 1.0 / sg);
      mixed.emplace_back(std::make_pair(packet_wavefunction(q1, g), packet_wavefunction(q2, g)));
    }
  }
  s.check_max("max |P - cos^2 theta_FS| over mixed pairs", isotropic_extension_check(mixed).max_deviation, 1e-10,
              Source::Oracle);
  return s;
}

// ---- action-equivalence -------------------------------------------------------------------

inline std::vector<ParamDef> action_params() {
  return {
      {"sigma", ParamType::Real, "0.5", "kernel width"},
      {"mass", ParamType::Real, "1.7", "particle mass"},
      {"velocity", ParamType::Real, "0.9", "speed of the uniform path"},
      {"omega", ParamType::Real, "1.3", "oscillator frequency"},
      {"amplitude", ParamType::Real, "0.8", "oscillator amplitude"},
      {"duration", ParamType::Real, "2.0", "path duration T"},
      {"samples", ParamType::Int, "20001", "time samples along each path"},
      {"shift", ParamType::Real, "0.35", "constant added to the potential"},
  };
}

inline RunSummary run_action(const ExperimentConfig& c, unsigned) {
  RunSummary s = start(c);
  KernelParams kernel{c.real("sigma"), 1};
  const double m = c.real("mass"), v = c.real("velocity"), w = c.real("omega"), amp = c.real("amplitude");
  const double tt = c.real("duration"), shift = c.real("shift");
  const auto samples = static_cast<std::size_t>(c.count("samples"));

  const auto uniform = ClassicalPath::sample(0.0, tt, samples, [v](double t) { return Vec3(v * t, 0.0, 0.0); });
  const auto zero = [](const Vec3&) { return 0.0; };
  s.check_rel("free action vs m v^2 T / 2", action_functional(uniform, zero, m, kernel), 0.5 * m * v * v * tt, 1e-12,
              Source::Exact);
  double iso = 0.0;
  for (double sp : path_speed_h(uniform, kernel)) iso = std::max(iso, std::abs(2.0 * kernel.sigma * sp - v) / v);
  s.check_max("embedded speed x 2 sigma vs |da/dt| (uniform path)", iso, 1e-10, Source::Published);

  const auto osc = ClassicalPath::sample(0.0, tt, samples, [amp, w](double t) { return Vec3(amp * std::cos(w * t), 0.0, 0.0); });
  const auto harm = [m, w](const Vec3& x) { return 0.5 * m * w * w * x.squaredNorm(); };
  const double exact = -0.25 * m * amp * amp * w * std::sin(2.0 * w * tt);
  const double sa = action_functional(osc, harm, m, kernel);
  s.check_rel("harmonic action vs closed form", sa, exact, 1e-6, Source::Oracle);
  const auto shifted = [&](const Vec3& x) { return harm(x) + shift; };
  s.check_abs("constant potential shift changes S by -c T", action_functional(osc, shifted, m, kernel) - sa, -shift * tt,
              1e-10, Source::Exact);

  // Projections of state velocity and acceleration on short paths (quadrature per sample).
  const double acc = 0.7;
  const auto quad = ClassicalPath::sample(0.0, 0.1, 11, [acc](double t) { return Vec3(0.5 * acc * t * t, 0.0, 0.0); });
  const auto qp = newtonian_projection(quad, kernel);
  double qerr = 0.0;
  for (std::size_t k = 1; k + 1 < quad.size(); ++k) qerr = std::max(qerr, std::abs(qp.acceleration[k].x() - acc) / acc);
  s.check_max("projected acceleration on a(t) = w t^2 / 2", qerr, 1e-6, Source::Oracle);
  const auto sine = ClassicalPath::sample(0.0, 0.05, 51, [amp, w](double t) { return Vec3(amp * std::sin(w * t), 0.0, 0.0); });
  const auto sp = newtonian_projection(sine, kernel);
  double verr = 0.0, aerr = 0.0;
  for (std::size_t k = 1; k + 1 < sine.size(); ++k) {
    const double t = sine.times[k];
    verr = std::max(verr, std::abs(sp.velocity[k].x() - amp * w * std::cos(w * t)) / (amp * w));
    aerr = std::max(aerr, std::abs(sp.acceleration[k].x() + amp * w * w * std::sin(w * t)) / (amp * w * w));
  }
  s.check_max("projected velocity on a sinusoid vs chain rule", verr, 1e-6, Source::Oracle);
  s.check_max("projected acceleration on a sinusoid vs chain rule", aerr, 1e-4, Source::Oracle);

  s.trials.columns = {"path", "action", "reference"};
  s.trials.rows.push_back({std::string("uniform"), action_functional(uniform, zero, m, kernel), 0.5 * m * v * v * tt});
  s.trials.rows.push_back({std::string("harmonic"), sa, exact});
  return s;
}

// ---- continuity ---------------------------------------------------------------------------

inline std::vector<ParamDef> continuity_params() {
  return {
      {"sigma", ParamType::Real, "1.0", "packet width"},
      {"momentum", ParamType::Real, "2.0", "packet momentum"},
      {"mass", ParamType::Real, "1.0", "particle mass"},
      {"h0", ParamType::Real, "0.2", "coarsest grid spacing"},
      {"dt0", ParamType::Real, "0.02", "coarsest time step"},
      {"t_final", ParamType::Real, "0.4", "evolution time"},
      {"levels", ParamType::Int, "3", "refinement levels"},
      {"half_width", ParamType::Real, "20.0", "grid half-width"},
      {"drift_steps", ParamType::Int, "200", "steps of the norm-drift check"},
  };
}

inline RunSummary run_continuity(const ExperimentConfig& c, unsigned) {
  RunSummary s = start(c);
  GaussianPacket pkt;
  pkt.sigma = c.real("sigma");
  pkt.mass = c.real("mass");
  pkt.momentum.x() = c.real("momentum");
  const double hw = c.real("half_width");
  const auto cs = continuity_convergence(pkt, PotentialField::zero(), hw, c.real("h0"), c.real("dt0"), c.real("t_final"),
                                         static_cast<int>(c.integer("levels")));
  s.check_min("continuity residual order under (h, dt) halving", *std::min_element(cs.order.begin(), cs.order.end()),
              1.8, Source::Oracle);

  const Grid g = Grid::line(-hw, hw, pkt.sigma / 16.0);
  s.check_max("packet current vs (p/m)|psi|^2 (relative)", packet_current_deviation(pkt, g), 1e-6, Source::Published);

  EvolutionParams ep;
  ep.dt = c.real("dt0");
  ep.steps = c.count("drift_steps");
  ep.mass = pkt.mass;
  ep.snapshot_every = ep.steps;
  const auto psi0 = packet_wavefunction(pkt, g);
  const auto snaps = evolve_grid(psi0, PotentialField::harmonic(0.3), ep);
  const double drift = std::abs(l2_norm(snaps.back()) - l2_norm(psi0)) / static_cast<double>(ep.steps);
  s.check_max("norm drift per step (split step)", drift, 1e-10, Source::Exact);

  // Free spreading against the closed form.
  const auto free = evolve_grid(psi0, PotentialField::zero(), ep);
  const double t = ep.dt * static_cast<double>(ep.steps);
  const double st = pkt.sigma * std::sqrt(1.0 + std::pow(pkt.hbar * t / (2.0 * pkt.mass * pkt.sigma * pkt.sigma), 2));
  const double centre = pkt.momentum.x() / pkt.mass * t;
  double dev = 0.0, peak = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.coord(0, i);
    double xp = x - centre;
    const double period = static_cast<double>(g.count[0]) * g.spacing;
    xp -= period * std::round(xp / period);
    const double rho = std::exp(-xp * xp / (2.0 * st * st)) / std::sqrt(2.0 * kPi * st * st);
    dev = std::max(dev, std::abs(std::norm(free.back()[i]) - rho));
    peak = std::max(peak, rho);
  }
  s.check_max("free spreading vs closed-form density (relative to peak)", dev / peak, 1e-4, Source::Oracle);

  s.trials.columns = {"level", "spacing", "dt", "residual", "order"};
  for (std::size_t l = 0; l < cs.residual.size(); ++l)
    s.trials.rows.push_back({static_cast<long long>(l), cs.spacing[l], cs.dt[l], cs.residual[l],
                             l == 0 ? std::nan("") : cs.order[l - 1]});
  return s;
}

// ---- estimates ----------------------------------------------------------------------------

inline std::vector<ParamDef> estimates_params() {
  return {
      {"lambda", ParamType::Real, "1e-9", "photon wavelength in metres"},
      {"mass", ParamType::Real, "9.1093837015e-31", "particle mass in kilograms"},
      {"temperature", ParamType::Real, "500", "temperature in kelvin"},
  };
}

inline RunSummary run_estimates(const ExperimentConfig& c, unsigned) {
  RunSummary s = start(c);
  const double lambda = c.real("lambda");
  const auto e = magnitude_estimates(lambda, c.real("mass"), c.real("temperature"));
  const double lv = std::log10(e.velocity_term), la = std::log10(e.acceleration_term), ls = std::log10(e.spreading_term);
  struct Ref {
    double lambda, v, a, s;
  };
  for (const Ref& r : {Ref{1e-9, 14.0, 17.0, 13.0}, Ref{1e-5, 8.0, 15.0, 5.0}}) {
    if (std::abs(lambda / r.lambda - 1.0) > 1e-6) continue;
    s.check_abs("log10 velocity term", lv, r.v, 0.7, Source::Published);
    s.check_abs("log10 acceleration term", la, r.a, 0.7, Source::Published);
    s.check_abs("log10 spreading term", ls, r.s, 0.7, Source::Published);
  }
  if (std::abs(lambda / 1e-9 - 1.0) <= 1e-6) {
    s.check_abs("log10 Compton shift", std::log10(e.compton_shift), -12.0, 0.7, Source::Published, Role::Diagnostic);
    s.check_abs("log10 energy transfer", std::log10(e.energy_transfer), -20.0, 0.7, Source::Published, Role::Diagnostic);
    s.check_abs("log10 speed", std::log10(e.speed), 5.0, 0.7, Source::Published, Role::Diagnostic);
  }
  if (std::abs(c.real("temperature") / 500.0 - 1.0) <= 1e-9) {
    s.check_abs("log10 photon density at 500 K", std::log10(e.photon_density), 15.0, 0.5, Source::Published);
    s.check_abs("log10 thermal peak wavelength", std::log10(e.thermal_wavelength), -5.0, 0.7, Source::Published,
                Role::Diagnostic);
  }
  const auto sc = estimate_scaling(1e-9, 1e-5, c.real("mass"));
  s.check_abs("velocity term exponent in sigma", sc.velocity, -1.5, 0.1, Source::Published, Role::Diagnostic);
  s.check_abs("acceleration term exponent in sigma", sc.acceleration, -0.5, 0.1, Source::Published, Role::Diagnostic);
  s.check_abs("spreading term exponent in sigma", sc.spreading, -2.0, 0.1, Source::Published, Role::Diagnostic);

  s.trials.columns = {"quantity", "value", "log10"};
  for (const auto& [name, val] : std::vector<std::pair<std::string, double>>{
           {"compton_shift_m", e.compton_shift},
           {"energy_transfer_J", e.energy_transfer},
           {"speed_m_per_s", e.speed},
           {"tau_s", e.tau},
           {"acceleration_m_per_s2", e.acceleration},
           {"velocity_term_per_s", e.velocity_term},
           {"acceleration_term_per_s", e.acceleration_term},
           {"spreading_term_per_s", e.spreading_term},
           {"photon_density_per_m3", e.photon_density},
           {"thermal_peak_wavelength_m", e.thermal_wavelength}})
    s.trials.rows.push_back({name, val, std::log10(val)});
  return s;
}

}  // namespace hb::exp
