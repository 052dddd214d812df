#pragma once

// Stochastic experiments: spin and cell-lattice measurement walks, isotropy diagnostics,
// Brownian ensembles and early-time state displacement.

#include "hb/density_diffusion.hpp"
#include "hb/experiment/summary.hpp"
#include "hb/position_measurement.hpp"
#include "hb/spin_measurement.hpp"

namespace hb::exp {

inline std::vector<std::pair<std::string, std::string>> echo(const ExperimentConfig& c) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [k, v] : c.values)
    if (k != "output_dir" && k != "format") out.emplace_back(k, v);
  return out;
}

inline RunSummary start(const ExperimentConfig& c) {
  RunSummary s;
  s.experiment = c.experiment;
  s.parameters = echo(c);
  return s;
}

inline std::uint64_t seed_of(const ExperimentConfig& c) { return static_cast<std::uint64_t>(c.integer("seed")); }

/// Complex normal vector of size n, normalised; draws from the given stream.
inline StateVector random_state(Eigen::Index n, RngStream& rng) {
  CVector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = Complex(rng.normal(), rng.normal());
  return StateVector::normalized(v);
}

// ---- spin-born ----------------------------------------------------------------------------

inline std::vector<ParamDef> spin_born_params() {
  return {
      {"z0", ParamType::Real, "0.4", "initial Bloch z-coordinate"},
      {"step_angle", ParamType::Real, "0.02", "spinor rotation per unit field std (mu B dt / hbar)"},
      {"absorb_eps", ParamType::Real, "0.005", "polar cap half-width: absorbed when |z| >= 1 - 2 eps"},
      {"max_steps", ParamType::Int, "1000000", "step budget per walk"},
      {"ruin_delta", ParamType::Real, "0.01", "lattice spacing of the exact ruin solve"},
  };
}

inline SpinWalkParams spin_params(const ExperimentConfig& c) {
  SpinWalkParams p;
  p.field_std = c.real("step_angle");
  p.absorb_eps = c.real("absorb_eps");
  p.max_steps = c.count("max_steps");
  p.seed = seed_of(c);
  return p;
}

inline RunSummary run_spin_born(const ExperimentConfig& c, unsigned threads) {
  RunSummary s = start(c);
  const double z0 = c.real("z0");
  const auto params = spin_params(c);
  const std::size_t trials = c.count("trials");
  const auto phi0 = spinor_from_z(z0);
  const auto outcomes = run_spin_trials(phi0, trials, params, threads);
  const auto h = tally(outcomes, z0);
  const double n = static_cast<double>(trials);

  const double born = h.reference_down;
  s.check_abs("P(DOWN) vs (1 - z0)/2", h.p_down(), born, 3.0 * std::sqrt(born * (1.0 - born) / n) + 0.01,
              Source::Published);
  const double law = sphere_walk_down_probability(z0, params.absorb_eps);
  s.check_abs("P(DOWN) vs sphere exit law", h.p_down(), law, 3.0 * std::sqrt(law * (1.0 - law) / n) + 0.01,
              Source::Oracle, Role::Diagnostic);
  s.check_max("unresolved fraction", h.p_unresolved(), 0.001, Source::Exact, Role::Diagnostic);
  double worst = 0.0;
  for (const auto& [z, p] : gamblers_ruin_down(c.real("ruin_delta"))) worst = std::max(worst, std::abs(p - 0.5 * (1.0 - z)));
  s.check_max("ruin lattice solve vs (1 - z)/2", worst, 1e-10, Source::Exact);

  s.trials.columns = {"trial", "outcome", "steps", "final_z"};
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const auto& o = outcomes[i];
    s.trials.rows.push_back({static_cast<long long>(i), std::string(to_string(o.result)),
                             static_cast<long long>(o.steps), hopf_map(o.final_state).z});
  }
  return s;
}

// ---- position-born ------------------------------------------------------------------------

inline std::vector<ParamDef> position_born_params() {
  return {
      {"cells", ParamType::Int, "8", "number of lattice cells N"},
      {"amp_seed", ParamType::Int, "1", "seed of the fixed initial amplitude profile"},
      {"step", ParamType::Real, "0.05", "v_std tau / hbar"},
      {"absorb_eps", ParamType::Real, "0.02", "absorbed when max |C_n|^2 >= 1 - eps"},
      {"max_steps", ParamType::Int, "1000", "step budget per walk"},
      {"mode", ParamType::Choice, "isotropic", "generator ensemble", {"isotropic", "diagonal"}},
      {"cross_check", ParamType::Flag, "false", "for N = 2, compare against the spin walk"},
  };
}

inline CellState amplitude_profile(Eigen::Index n, std::uint64_t amp_seed) {
  RngStream rng(amp_seed, 0);
  return random_state(n, rng);
}

inline RunSummary run_position_born(const ExperimentConfig& c, unsigned threads) {
  RunSummary s = start(c);
  const auto n = static_cast<Eigen::Index>(c.integer("cells"));
  if (n < 2) throw UsageError("cells must be at least 2");
  PositionWalkParams p;
  p.tau = 1.0;
  p.v_std = c.real("step");
  p.absorb_eps = c.real("absorb_eps");
  p.max_steps = c.count("max_steps");
  p.seed = seed_of(c);
  p.mode = c.text("mode") == "diagonal" ? GeneratorMode::Diagonal : GeneratorMode::Isotropic;
  const std::size_t trials = c.count("trials");
  const CellState psi0 = amplitude_profile(n, c.count("amp_seed"));
  const auto outcomes = run_position_trials(psi0, trials, p, threads);

  std::vector<double> counts(static_cast<std::size_t>(n), 0.0);
  std::size_t unresolved = 0;
  for (const auto& o : outcomes) {
    if (o.cell < 0) ++unresolved;
    else counts[static_cast<std::size_t>(o.cell)] += 1.0;
  }
  const double resolved = static_cast<double>(trials - unresolved);
  std::vector<double> born(static_cast<std::size_t>(n));
  for (Eigen::Index k = 0; k < n; ++k) born[static_cast<std::size_t>(k)] = std::norm(psi0[k]);
  s.check_max("unresolved fraction", static_cast<double>(unresolved) / static_cast<double>(trials), 0.01,
              Source::Exact);
  const double pval = resolved > 0.0 ? chi_square_gof(counts, born, 0.001).p_value : std::nan("");
  s.check_min("chi-square p-value vs |C_n|^2 (resolved trials)", pval, 0.001, Source::Oracle);

  if (n == 2) {
    const double pc0 = resolved > 0.0 ? counts[0] / resolved : std::nan("");
    s.check_abs("P(cell 0) vs |C_0|^2", pc0, born[0], 3.0 * std::sqrt(born[0] * (1.0 - born[0]) / std::max(resolved, 1.0)) + 0.01,
                Source::Published, Role::Diagnostic);
    if (c.flag("cross_check")) {
      // Cell 0 plays the role of the first spinor component, whose pole is DOWN.
      SpinWalkParams sp;
      sp.field_std = p.v_std * p.tau / (std::sqrt(2.0) * p.hbar);
      sp.absorb_eps = p.absorb_eps;
      sp.max_steps = p.max_steps;
      sp.seed = p.seed ^ 0x5bd1e9955bd1e995ULL;
      CVector v(2);
      v << psi0[0], psi0[1];
      const auto h = tally(run_spin_trials(StateVector(v), trials, sp, threads), hopf_map(StateVector(v)).z);
      const double spin_resolved = static_cast<double>(h.up + h.down);
      const double ps = spin_resolved > 0.0 ? static_cast<double>(h.down) / spin_resolved : std::nan("");
      const double pooled = 0.5 * (pc0 + ps);
      const double se = std::sqrt(pooled * (1.0 - pooled) * (1.0 / std::max(resolved, 1.0) + 1.0 / std::max(spin_resolved, 1.0)));
      s.check_abs("N=2 P(cell 0) minus spin P(DOWN)", pc0 - ps, 0.0, 3.0 * se, Source::Oracle);
    }
  }

  s.trials.columns = {"trial", "cell", "steps"};
  for (std::size_t i = 0; i < outcomes.size(); ++i)
    s.trials.rows.push_back({static_cast<long long>(i), static_cast<long long>(outcomes[i].cell),
                             static_cast<long long>(outcomes[i].steps)});
  return s;
}

// ---- isotropy -----------------------------------------------------------------------------

inline std::vector<ParamDef> isotropy_params() {
  return {
      {"step_angle", ParamType::Real, "0.02", "spin rotation per unit field std"},
      {"z0", ParamType::Real, "0.3", "Bloch z of the first spin start"},
      {"z1", ParamType::Real, "-0.5", "Bloch z of the second spin start"},
      {"cells", ParamType::Int, "4", "cell count for the state-velocity diagnostic"},
      {"v_step", ParamType::Real, "0.05", "v_std tau / hbar for the cell walks"},
      {"diag_steps", ParamType::Int, "10000", "length of the diagonal-potential modulus check"},
  };
}

inline RunSummary run_isotropy(const ExperimentConfig& c, unsigned /*threads*/) {
  RunSummary s = start(c);
  const std::uint64_t seed = seed_of(c);
  const std::size_t samples = c.count("trials");
  SpinWalkParams sp;
  sp.field_std = c.real("step_angle");
  sp.seed = seed;

  RngStream r0(seed, 0), r1(seed, 1), r2(seed, 2);
  const auto iso = isotropy_test(spinor_from_z(c.real("z0")), samples, sp, r0);
  const auto iso2 = isotropy_test(spinor_from_z(c.real("z1")), samples, sp, r1);
  const auto ctl = isotropy_test(spinor_from_z(c.real("z0")), samples, sp, r2, FieldMode::ZOnly);
  s.check_min("spin displacement direction uniform (Rayleigh p)", iso.direction.p_value, 0.01, Source::Oracle);
  s.check_min("spin displacement axial uniform (Rayleigh p)", iso.axial.p_value, 0.01, Source::Oracle);
  s.check_min("spin displacement components normal (KS p)", iso.normality.p_value, 0.01, Source::Oracle);
  s.check_max("z-only control rejected (min of axial, normality p)", std::min(ctl.axial.p_value, ctl.normality.p_value),
              0.01, Source::Exact);
  s.check_min("two starts, same magnitude law (KS p)", ks_two_sample(iso.magnitudes, iso2.magnitudes).p_value, 0.01,
              Source::Oracle);

  const auto n = static_cast<Eigen::Index>(c.integer("cells"));
  if (n < 3) throw UsageError("cells must be at least 3");
  PositionWalkParams pp;
  pp.v_std = c.real("v_step");
  pp.seed = seed;
  const CellState uniform = CellState::normalized(CVector::Ones(n));
  RngStream r3(seed, 3), r4(seed, 4), r5(seed, 5);
  pp.mode = GeneratorMode::Diagonal;
  const auto diag = velocity_isotropy_diagnostic(uniform, samples, r3, pp);
  pp.mode = GeneratorMode::Isotropic;
  const auto full = velocity_isotropy_diagnostic(uniform, samples, r4, pp);
  s.check_max("diagonal-mode covariance rank", static_cast<double>(diag.rank), static_cast<double>(n - 1),
              Source::Oracle);
  s.check_min("diagonal-mode mean zero (p)", diag.mean_zero.p_value, 0.01, Source::Oracle, Role::Diagnostic);
  s.check_abs("isotropic-mode covariance rank", static_cast<double>(full.rank), static_cast<double>(2 * (n - 1)), 0.0,
              Source::Exact, Role::Diagnostic);
  s.check_max("isotropic-mode anisotropy (max/min eigenvalue)", full.anisotropy, 1.2, Source::Exact, Role::Diagnostic);

  // Moduli under the literal diagonal model, polar and Cartesian representations.
  pp.mode = GeneratorMode::Diagonal;
  const CellState start_state = amplitude_profile(n, 1);
  PolarCellState polar = PolarCellState::from(start_state);
  CellState cart = start_state;
  RngStream r6(seed, 6);
  const std::size_t steps = c.count("diag_steps");
  for (std::size_t k = 0; k < steps; ++k) {
    diag_potential_step(polar, r5, pp);
    cart = diag_potential_step(cart, r6, pp);
  }
  const RVector m0 = start_state.vec().cwiseAbs();
  s.check_max("diagonal walk max ||C_n| - |C_n(0)|| (polar)", (polar.state().vec().cwiseAbs() - m0).cwiseAbs().maxCoeff(),
              1e-15, Source::Exact);
  s.check_max("diagonal walk max ||C_n| - |C_n(0)|| (Cartesian)", (cart.vec().cwiseAbs() - m0).cwiseAbs().maxCoeff(),
              1e-12, Source::Exact, Role::Diagnostic);

  s.trials.columns = {"sample", "spin_magnitude", "spin_magnitude_second_start", "z_only_magnitude"};
  for (std::size_t i = 0; i < samples; ++i)
    s.trials.rows.push_back({static_cast<long long>(i), iso.magnitudes[i], iso2.magnitudes[i], ctl.magnitudes[i]});
  return s;
}

// ---- diffusion ----------------------------------------------------------------------------

inline std::vector<ParamDef> diffusion_params() {
  return {
      {"K", ParamType::Real, "0.5", "diffusivity"},
      {"dt", ParamType::Real, "0.01", "time step"},
      {"t_final", ParamType::Real, "1.0", "final time"},
      {"dim", ParamType::Int, "3", "spatial dimension"},
  };
}

inline RunSummary run_diffusion(const ExperimentConfig& c, unsigned threads) {
  RunSummary s = start(c);
  DiffusionParams p;
  p.K = c.real("K");
  p.dt = c.real("dt");
  p.t_final = c.real("t_final");
  p.dim = static_cast<int>(c.integer("dim"));
  p.walkers = c.count("trials");
  p.seed = seed_of(c);
  const auto r = brownian_ensemble(p, threads);
  s.check_rel("MSD slope vs 2 d K", r.fit.slope, 2.0 * p.dim * p.K, 0.05, Source::Published);
  s.check_min("MSD linearity R^2", r.fit.r2, 0.999, Source::Oracle);
  s.check_min("radial CDF KS p-value (4 sigma level)", r.ks.p_value, 6.334e-5, Source::Oracle);
  s.check_max("radial CDF max band deviation (sigmas)", r.max_band_z, 4.0, Source::Oracle);
  s.trials.columns = {"step", "time", "msd"};
  for (std::size_t i = 0; i < r.times.size(); ++i)
    s.trials.rows.push_back({static_cast<long long>(i), r.times[i], r.msd[i]});
  return s;
}

// ---- state-msd ----------------------------------------------------------------------------

inline std::vector<ParamDef> state_msd_params() {
  return {
      {"steps", ParamType::Int, "10", "number of steps followed"},
      {"step_angle", ParamType::Real, "0.02", "spin rotation per unit field std"},
      {"z0", ParamType::Real, "0.0", "Bloch z of the spin start"},
      {"cells", ParamType::Int, "4", "cell count of the isotropic walk"},
      {"v_step", ParamType::Real, "0.05", "v_std tau / hbar for the cell walk"},
  };
}

inline RunSummary run_state_msd(const ExperimentConfig& c, unsigned threads) {
  RunSummary s = start(c);
  MsdRequest req;
  req.walkers = c.count("trials");
  req.steps = c.count("steps");
  req.probe = req.steps;
  req.seed = seed_of(c);
  req.spin.field_std = c.real("step_angle");
  req.position.v_std = c.real("v_step");

  req.source = WalkSource::Spin;
  const auto spin = state_density_msd(spinor_from_z(c.real("z0")), req, threads);
  s.check_rel("spin early slope vs 2 s^2", spin.early_fit.slope, spin.predicted_slope, 0.05, Source::Oracle);
  s.check_min("spin early linearity R^2", spin.early_fit.r2, 0.99, Source::Oracle);
  s.check_max("spin slope change across the first decade", spin.slope_change, 0.1, Source::Oracle);

  MsdRequest ctl = req;
  ctl.spin.mu = 0.0;
  ctl.walkers = std::min<std::size_t>(req.walkers, 100);
  const auto zero = state_density_msd(spinor_from_z(c.real("z0")), ctl, threads);
  s.check_max("zero-field control max mean theta^2", *std::max_element(zero.mean_theta2.begin(), zero.mean_theta2.end()),
              1e-24, Source::Exact);

  const auto n = static_cast<Eigen::Index>(c.integer("cells"));
  if (n < 2) throw UsageError("cells must be at least 2");
  req.source = WalkSource::Position;
  const auto a = state_density_msd(CellState::normalized(CVector::Ones(n)), req, threads);
  MsdRequest req2 = req;
  req2.seed = req.seed ^ 0x9e3779b97f4a7c15ULL;
  const auto b = state_density_msd(amplitude_profile(n, 1), req2, threads);
  s.check_rel("cell walk early slope vs (N - 1) tau^2 v^2", a.early_fit.slope, a.predicted_slope, 0.05, Source::Oracle);
  s.check_min("cell walk slope independent of start (KS p)", ks_two_sample(a.theta2_at_probe, b.theta2_at_probe).p_value,
              0.01, Source::Oracle);

  s.trials.columns = {"step", "spin_mean_theta2", "cells_uniform_mean_theta2", "cells_profile_mean_theta2"};
  for (std::size_t i = 0; i < spin.steps.size(); ++i)
    s.trials.rows.push_back({static_cast<long long>(i), spin.mean_theta2[i], a.mean_theta2[i], b.mean_theta2[i]});
  return s;
}

}  // namespace hb::exp
