#include <gtest/gtest.h>

#include "hb/born_bridge.hpp"
#include "hb/packet_dynamics.hpp"
#include "hb/position_measurement.hpp"
#include "hb/rng.hpp"

namespace {

using namespace hb;

GaussianPacket packet(double x, double p, double sigma = 0.7) {
  GaussianPacket g;
  g.center.x() = x;
  g.momentum.x() = p;
  g.sigma = sigma;
  return g;
}

double mean_x(const GridWaveFunction& psi) {
  double m = 0.0;
  for (std::size_t i = 0; i < psi.size(); ++i) m += psi.grid.coord(0, i) * std::norm(psi[i]) * psi.grid.weight(i);
  return m;
}

TEST(Packet, NormMomentsAndWidth) {
  const auto pkt = packet(0.4, 1.3);
  const Grid g = Grid::line(-10.0, 10.0, 0.02);
  const auto psi = packet_wavefunction(pkt, g);
  EXPECT_NEAR(l2_norm(psi), 1.0, 1e-12);
  EXPECT_NEAR(mean_x(psi), 0.4, 1e-12);
  double var = 0.0;
  for (std::size_t i = 0; i < psi.size(); ++i)
    var += std::pow(g.coord(0, i) - 0.4, 2) * std::norm(psi[i]) * g.weight(i);
  EXPECT_NEAR(var, 0.49, 1e-12);
  auto dpsi = spectral_derivative(psi, 0);
  EXPECT_NEAR((-kI * l2_inner(psi, dpsi)).real(), 1.3, 1e-10);
}

TEST(Packet, PreconditionsAreEnforced) {
  const auto pkt = packet(0.0, 0.0);
  EXPECT_THROW(packet_wavefunction(pkt, Grid::line(-10.0, 10.0, 0.5)), Error);
  EXPECT_THROW(packet_wavefunction(pkt, Grid::line(-2.0, 2.0, 0.05)), Error);
  EXPECT_THROW(packet_wavefunction(pkt, Grid::cube(2, -10.0, 10.0, 0.1)), Error);
  GaussianPacket bad = pkt;
  bad.mass = 0.0;
  EXPECT_THROW(bad.validate(), Error);
}

TEST(Packet, OverlapClosedFormAgainstQuadrature) {
  const Grid g = Grid::line(-14.0, 14.0, 0.02);
  for (auto [x, p] : std::vector<std::pair<double, double>>{{0.5, 0.0}, {1.4, 0.3}, {-2.0, -1.1}}) {
    const auto a = packet(0.0, 0.2), b = packet(x, 0.2 + p);
    const double q = std::abs(l2_inner(packet_wavefunction(a, g), packet_wavefunction(b, g)));
    EXPECT_NEAR(packet_overlap_abs(a, b), q, 1e-12);
  }
  EXPECT_THROW(packet_overlap_abs(packet(0, 0, 1.0), packet(0, 0, 2.0)), Error);
}

TEST(Packet, PhaseSpaceSpeedMatchesFubiniStudyDifferences) {
  const double sigma = 0.6, dt = 1e-3;
  auto at = [&](double t) { return packet(0.3 + 0.8 * t, 0.5 - 0.4 * t, sigma); };
  PhaseSpacePath path;
  for (int k = -1; k <= 1; ++k) {
    path.times.push_back(k * dt);
    path.centers.push_back(at(k * dt).center);
    path.momenta.push_back(at(k * dt).momentum);
  }
  const double speed = phase_space_speed(path, sigma)[1];
  const Grid g = Grid::line(-10.0, 10.0, 0.01);
  const double fd = fs_distance(packet_wavefunction(at(-dt), g), packet_wavefunction(at(dt), g)) / (2.0 * dt);
  EXPECT_NEAR(speed, fd, 1e-6 * speed);
  EXPECT_NEAR(speed, std::sqrt(0.64 / (4 * 0.36) + 0.36 * 0.16), 1e-12);
}

TEST(Decomposition, ClosedFormComponents) {
  GaussianPacket pkt = packet(0.3, 0.8);
  pkt.mass = 1.3;
  const auto c = velocity_components(pkt, PotentialField::linear(Vec3(0.6, 0, 0)));
  EXPECT_NEAR(c.space, 0.43956043956043955, 1e-15);
  EXPECT_NEAR(c.momentum, 0.42, 1e-15);
  EXPECT_NEAR(c.spread, 0.27751443531654146, 1e-15);
  EXPECT_NEAR(c.mean_energy, -0.18 + 0.64 / 2.6 + 1.0 / (8.0 * 1.3 * 0.49), 1e-15);
  EXPECT_TRUE(c.linear_regime);
}

TEST(Decomposition, LinearPotentialOneAndThreeDimensions) {
  GaussianPacket pkt = packet(0.3, 0.8);
  pkt.mass = 1.3;
  const auto v = PotentialField::linear(Vec3(0.6, -0.2, 0.3), 0.1);
  const auto r1 = decomposition_check(pkt, v, Grid::line(-10.0, 10.0, 0.05));
  EXPECT_LT(r1.residual, 1e-6);
  GaussianPacket p3 = pkt;
  p3.dim = 3;
  p3.momentum = Vec3(0.8, -0.3, 0.1);
  p3.center = Vec3(0.1, 0.0, -0.2);
  const auto r3 = decomposition_check(p3, v, Grid::cube(3, -9.0, 9.0, 0.175));
  EXPECT_LT(r3.residual, 1e-6);
  EXPECT_NEAR(r3.components.spread, std::sqrt(3.0) * r1.components.spread, 1e-15);
}

TEST(Decomposition, FreePacketAtRestMatchesKineticMoments) {
  // p ~ N(0, hbar^2 / 4 sigma^2): <T> = hbar^2 / 8 m sigma^2 and Var T = 2 <T>^2
  GaussianPacket pkt = packet(0.0, 0.0, 0.5);
  pkt.mass = 0.8;
  const auto r = decomposition_check(pkt, PotentialField::zero(), Grid::line(-8.0, 8.0, 0.02));
  const double t = 1.0 / (8.0 * 0.8 * 0.25);
  EXPECT_NEAR(r.lhs, t * t + 2.0 * t * t, 1e-9);
  EXPECT_NEAR(r.residual, 0.0, 1e-10);
}

TEST(Decomposition, CurvatureBreaksTheIdentity) {
  const auto v = PotentialField::harmonic(1.0);
  GaussianPacket pkt = packet(2.0, 0.0, 0.7);
  EXPECT_FALSE(linear_regime(pkt, v));
  EXPECT_GT(decomposition_check(pkt, v, Grid::line(-10.0, 14.0, 0.05)).residual, 1e-3);
}

TEST(Potential, GradientConsistency) {
  const std::vector<Vec3> probes{Vec3(0.1, 0.2, 0.3), Vec3(-1.0, 2.0, 0.5)};
  EXPECT_TRUE(PotentialField::harmonic(2.0, Vec3(0.5, 0, 0)).consistent(probes, 3));
  EXPECT_TRUE(PotentialField::linear(Vec3(1.0, -2.0, 0.5)).consistent(probes, 3));
  PotentialField wrong = PotentialField::harmonic(1.0);
  wrong.gradient = [](const Vec3& x) { return Vec3(2.0 * x); };
  EXPECT_FALSE(wrong.consistent(probes, 3));
}

TEST(Ehrenfest, PacketsAndSuperpositions) {
  const Grid g = Grid::line(-12.0, 12.0, 0.04);
  const auto a = packet_wavefunction(packet(-0.5, 1.1, 0.6), g);
  const auto b = packet_wavefunction(packet(1.5, -0.7, 0.6), g);
  GridWaveFunction s = axpy(Complex(0.6, 0.2), a, Complex(-0.3, 0.5), b);
  const double n = l2_norm(s);
  for (auto& z : s.values) z /= n;
  for (const auto& v : {PotentialField::linear(Vec3(0.4, 0, 0)), PotentialField::harmonic(0.8, Vec3(0.2, 0, 0))}) {
    for (const GridWaveFunction* psi : std::vector<const GridWaveFunction*>{&a, &s}) {
      const auto r = ehrenfest_check(*psi, v);
      EXPECT_NEAR(r.lhs_position.x(), r.rhs_position.x(), 1e-6 * std::max(1.0, std::abs(r.rhs_position.x())));
      EXPECT_NEAR(r.lhs_momentum.x(), r.rhs_momentum.x(), 1e-6 * std::max(1.0, std::abs(r.rhs_momentum.x())));
    }
  }
  EXPECT_NEAR(ehrenfest_check(a, PotentialField::zero()).rhs_position.x(), 1.1, 1e-10);
  GridWaveFunction half = a;
  for (auto& z : half.values) z *= 0.5;
  EXPECT_THROW(ehrenfest_check(half, PotentialField::zero()), Error);
}

TEST(MatrixModel, UnitaryEvolutionRabi) {
  const double w = 1.7;
  const Observable h(0.5 * w * pauli(1));
  for (double t : {0.1, 0.9, 2.5}) {
    const auto psi = unitary_evolve(h, StateVector::basis(2, 0), t);
    EXPECT_NEAR(std::norm(psi[1]), std::pow(std::sin(0.5 * w * t), 2), 1e-14);
  }
}

TEST(MatrixModel, ProjectiveSpeedEqualsEnergyUncertainty) {
  CMatrix d = CMatrix::Zero(2, 2);
  d(1, 1) = 1.0;
  CVector v(2);
  v << 1.0, 1.0;
  const auto s = projective_speed(Observable(d), StateVector::normalized(v), 1e-3);
  EXPECT_DOUBLE_EQ(s.energy_uncertainty, 0.5);
  EXPECT_NEAR(s.fs_speed, 0.5, 1e-6);
  RngStream rng(4, 0);
  for (int i = 0; i < 10; ++i) {
    const Observable h(sample_gue(16, rng, 1.0));
    CVector x(16);
    for (auto& z : x) z = Complex(rng.normal(), rng.normal());
    const auto p = projective_speed(h, StateVector::normalized(x), 1e-3, 1.4);
    EXPECT_NEAR(p.fs_speed, p.energy_uncertainty, 1e-4 * p.energy_uncertainty);
  }
  EXPECT_THROW(projective_speed(Observable(d), StateVector::normalized(v), 0.0), Error);
}

TEST(Reconstruction, RecoversFreeAndHarmonicHamiltonians) {
  const Eigen::Index n = 24;
  const auto o = oscillator_matrices(n);
  const CMatrix zero = CMatrix::Zero(n, n);
  const CMatrix kin = o.p.matrix() * o.p.matrix() / 2.0;
  const auto r0 = reconstruct_hamiltonian(o.x, o.p, Observable(zero), Observable(zero));
  EXPECT_LT(reconstruction_error(r0, kin), 1e-6);
  EXPECT_EQ(r0.band, n - 4);
  const CMatrix v = 0.5 * o.x.matrix() * o.x.matrix();
  const auto r1 = reconstruct_hamiltonian(o.x, o.p, o.x, Observable(v));
  EXPECT_LT(reconstruction_error(r1, kin + v), 1e-6);
  EXPECT_LT(r1.equation_residual, 1e-10);
  EXPECT_GE(r1.nullity, 1);
  EXPECT_LT((r1.h - r1.h.adjoint()).norm(), 1e-12);
}

TEST(Reconstruction, MassAndHbarScaling) {
  const Eigen::Index n = 16;
  const auto o = oscillator_matrices(n);
  const CMatrix zero = CMatrix::Zero(n, n);
  const auto r = reconstruct_hamiltonian(o.x, o.p, Observable(zero), Observable(zero), 2.5, 1.0);
  EXPECT_LT(reconstruction_error(r, o.p.matrix() * o.p.matrix() / 5.0), 1e-6);
  EXPECT_THROW(reconstruct_hamiltonian(oscillator_matrices(6).x, oscillator_matrices(6).p,
                                       Observable(CMatrix::Zero(6, 6)), Observable(CMatrix::Zero(6, 6))),
               Error);
}

}  // namespace
