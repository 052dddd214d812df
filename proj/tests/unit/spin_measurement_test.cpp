#include <gtest/gtest.h>

#include "hb/spin_measurement.hpp"

namespace {

using namespace hb;

StateVector spin_at(double z) {
  CVector v = spinor_from_z(z).vec();
  v[1] *= std::exp(kI * 0.3);
  return StateVector(v);
}

TEST(PauliStep, PreservesNormAndMatchesMatrixExponential) {
  SpinWalkParams p;
  RngStream rng(5, 0);
  const auto phi = spin_at(0.2);
  const Vec3 b = sample_field(rng, p.field_std);
  const auto out = pauli_step(phi, b, p);
  EXPECT_NEAR(out.vec().norm(), 1.0, 1e-15);

  CMatrix sb(2, 2);
  sb << b.z(), Complex(b.x(), -b.y()), Complex(b.x(), b.y()), -b.z();
  const Eigen::SelfAdjointEigenSolver<CMatrix> es(sb);
  CVector d(2);
  for (int k = 0; k < 2; ++k) d[k] = std::exp(kI * p.mu * p.dt * es.eigenvalues()[k] / p.hbar);
  const CVector ref = es.eigenvectors() * d.asDiagonal() * es.eigenvectors().adjoint() * phi.vec();
  EXPECT_LT((out.vec() - ref).norm(), 1e-14);
}

TEST(PauliStep, ZeroFieldIsIdentity) {
  const auto phi = spin_at(-0.4);
  EXPECT_EQ((pauli_step(phi, Vec3::Zero(), SpinWalkParams{}).vec() - phi.vec()).norm(), 0.0);
}

TEST(SpinParams, RejectsLargeSteps) {
  SpinWalkParams p;
  p.field_std = 0.06;
  EXPECT_THROW(p.validate(), Error);
  p.field_std = 0.02;
  p.absorb_eps = 0.2;
  EXPECT_THROW(p.validate(), Error);
}

TEST(Absorption, Caps) {
  EXPECT_EQ(spin_absorption(0.991, 0.005), Outcome::Up);
  EXPECT_EQ(spin_absorption(-0.991, 0.005), Outcome::Down);
  EXPECT_EQ(spin_absorption(0.989, 0.005), Outcome::Unresolved);
  SpinWalkParams p;
  RngStream rng(1, 0);
  const auto w = run_walk(StateVector::basis(2, 0), p, rng);
  EXPECT_EQ(w.result, Outcome::Down);
  EXPECT_EQ(w.steps, 0u);
}

TEST(Ruin, LinearInStartingPoint) {
  for (double delta : {0.5, 0.1, 0.02}) {
    for (const auto& [z, p] : gamblers_ruin_down(delta)) EXPECT_NEAR(p, 0.5 * (1.0 - z), 1e-12);
  }
  EXPECT_THROW(gamblers_ruin_down(0.3), Error);
}

TEST(SphereLaw, FrozenValues) {
  EXPECT_NEAR(sphere_walk_down_probability(0.4, 0.005), 0.419965136295423526749571040763, 1e-14);
  EXPECT_NEAR(sphere_walk_down_probability(-0.8, 0.005), 0.707547519941908996607428642975, 1e-14);
  EXPECT_DOUBLE_EQ(sphere_walk_down_probability(0.0, 0.005), 0.5);
  EXPECT_EQ(sphere_walk_down_probability(0.995, 0.005), 0.0);
  EXPECT_EQ(sphere_walk_down_probability(-0.995, 0.005), 1.0);
}

TEST(Contraction, ClosedForm) {
  SpinWalkParams p;
  const double k = 2.0 * p.step_angle();
  const double closed = (1.0 + 2.0 * (1.0 - k * k) * std::exp(-0.5 * k * k)) / 3.0;
  EXPECT_NEAR(expected_z_contraction(p), 0.998401066268546824, 1e-13);
  EXPECT_NEAR(expected_z_contraction(p), closed, 1e-13);
}

TEST(Contraction, MonteCarloMean) {
  SpinWalkParams p;
  p.field_std = 0.05;
  const auto phi = spin_at(0.6);
  const double z0 = hopf_map(phi).z;
  RngStream rng(9, 0);
  std::vector<double> z;
  for (int i = 0; i < 20000; ++i) z.push_back(hopf_map(pauli_step(phi, sample_field(rng, p.field_std), p)).z);
  const auto m = moments(z);
  EXPECT_NEAR(m.mean, expected_z_contraction(p) * z0, 4.0 * std::sqrt(m.variance / 20000.0));
}

TEST(SpinWalk, FollowsExitLaw) {
  SpinWalkParams p;
  p.field_std = 0.05;
  p.absorb_eps = 0.05;
  p.seed = 3;
  const auto phi = spin_at(-0.3);
  const auto h = born_statistics(phi, 4000, p);
  EXPECT_EQ(h.unresolved, 0u);
  EXPECT_EQ(h.up + h.down, h.trials);
  const double law = sphere_walk_down_probability(hopf_map(phi).z, p.absorb_eps);
  EXPECT_NEAR(h.p_down(), law, 0.04);
  EXPECT_NEAR(h.reference_down, 0.5 * (1.0 - hopf_map(phi).z), 1e-15);
}

TEST(SpinWalk, DeterministicAcrossThreads) {
  SpinWalkParams p;
  p.field_std = 0.05;
  p.absorb_eps = 0.05;
  p.seed = 17;
  const auto a = run_spin_trials(spin_at(0.1), 300, p, 1);
  const auto b = run_spin_trials(spin_at(0.1), 300, p, 4);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].result, b[i].result);
    EXPECT_EQ(a[i].steps, b[i].steps);
  }
}

TEST(SpinWalk, BudgetExhaustion) {
  SpinWalkParams p;
  p.max_steps = 3;
  RngStream rng(2, 0);
  const auto w = run_walk(spin_at(0.0), p, rng);
  EXPECT_EQ(w.result, Outcome::Unresolved);
  EXPECT_EQ(w.steps, 3u);
}

TEST(SpinIsotropy, IsotropicFieldPassesZOnlyFails) {
  SpinWalkParams p;
  const auto phi = spin_at(0.3);
  RngStream rng(4, 0);
  const auto iso = isotropy_test(phi, 5000, p, rng);
  EXPECT_TRUE(iso.pass());
  RngStream rng2(4, 1);
  const auto z = isotropy_test(phi, 5000, p, rng2, FieldMode::ZOnly);
  EXPECT_FALSE(z.pass());
  RngStream rng3(4, 2);
  EXPECT_THROW(isotropy_test(StateVector::basis(2, 0), 100, p, rng3), Error);
}

}  // namespace
