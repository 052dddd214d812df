#pragma once

// Grid Schrodinger propagation with continuity-equation residuals, the packet current identity,
// Brownian ensembles against the heat kernel, and early-time Fubini-Study displacement statistics
// of the measurement walks.

#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "hb/core.hpp"
#include "hb/fft.hpp"
#include "hb/grid.hpp"
#include "hb/packet_dynamics.hpp"
#include "hb/parallel.hpp"
#include "hb/position_measurement.hpp"
#include "hb/rng.hpp"
#include "hb/spin_measurement.hpp"
#include "hb/stats.hpp"

namespace hb {

enum class Scheme { UnitarySplit, ImplicitMidpoint };

struct EvolutionParams {
  double dt = 1e-2;
  std::size_t steps = 100;
  double hbar = 1.0;
  double mass = 1.0;
  Scheme scheme = Scheme::UnitarySplit;
  std::size_t snapshot_every = 1;

  void validate() const {
    require(dt > 0.0 && hbar > 0.0 && mass > 0.0, ErrorKind::InvalidArgument, "dt, hbar and mass must be positive");
    require(snapshot_every >= 1, ErrorKind::InvalidArgument, "snapshot_every must be at least 1");
  }
};

namespace detail {

/// Spectral weight of psi above 0.8 of the Nyquist wavenumber, relative to the total.
inline double high_frequency_fraction(const GridWaveFunction& psi) {
  FftPlan plan(psi.grid);
  const double kmax = kPi / psi.grid.spacing;
  double hi = 0.0, total = 0.0;
  GridWaveFunction probe = psi;
  plan.apply_multiplier(probe, [&](const Vec3& k) {
    return Complex{k.cwiseAbs().maxCoeff() > 0.8 * kmax ? 1.0 : 0.0, 0.0};
  });
  for (std::size_t i = 0; i < psi.size(); ++i) {
    hi += std::norm(probe[i]);
    total += std::norm(psi[i]);
  }
  return total > 0.0 ? hi / total : 0.0;
}

/// Solves the tridiagonal system a_i x_{i-1} + b_i x_i + c_i x_{i+1} = d_i.
inline std::vector<Complex> thomas(std::vector<Complex> a, std::vector<Complex> b, std::vector<Complex> c,
                                   std::vector<Complex> d) {
  const std::size_t n = b.size();
  for (std::size_t i = 1; i < n; ++i) {
    const Complex m = a[i] / b[i - 1];
    b[i] -= m * c[i - 1];
    d[i] -= m * d[i - 1];
  }
  std::vector<Complex> x(n);
  x[n - 1] = d[n - 1] / b[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) x[i] = (d[i] - c[i] * x[i + 1]) / b[i];
  return x;
}

}  // namespace detail

/// Propagates psi0 under h = -hbar^2 Laplacian / 2m + V. UnitarySplit: Strang splitting with the
/// kinetic factor applied in Fourier space (periodic grid). ImplicitMidpoint: Crank-Nicolson with
/// the three-point Laplacian and zero boundary values (1D only). Returns psi0 and every
/// snapshot_every-th state.
inline std::vector<GridWaveFunction> evolve_grid(const GridWaveFunction& psi0, const PotentialField& v,
                                                 const EvolutionParams& params) {
  params.validate();
  require(psi0.finite(), ErrorKind::InvalidArgument, "initial state has non-finite values");
  require(detail::high_frequency_fraction(psi0) < 1e-10, ErrorKind::Resolution,
          "grid does not resolve the initial state's wavenumbers");
  const Grid& g = psi0.grid;
  const double hb = params.hbar, m = params.mass, dt = params.dt;
  std::vector<GridWaveFunction> out{psi0};
  GridWaveFunction psi = psi0;

  if (params.scheme == Scheme::UnitarySplit) {
    FftPlan plan(g);
    std::vector<Complex> half(psi.size());
    for (std::size_t i = 0; i < psi.size(); ++i) half[i] = std::polar(1.0, -0.5 * dt * v.value(g.point(i)) / hb);
    const auto kinetic = [&](const Vec3& k) { return std::polar(1.0, -dt * hb * k.squaredNorm() / (2.0 * m)); };
    for (std::size_t s = 1; s <= params.steps; ++s) {
      for (std::size_t i = 0; i < psi.size(); ++i) psi[i] *= half[i];
      plan.apply_multiplier(psi, kinetic);
      for (std::size_t i = 0; i < psi.size(); ++i) psi[i] *= half[i];
      if (s % params.snapshot_every == 0) out.push_back(psi);
    }
    return out;
  }

  require(g.dim == 1, ErrorKind::InvalidArgument, "implicit midpoint scheme is implemented in 1D");
  const std::size_t n = psi.size();
  const double h2 = g.spacing * g.spacing;
  const Complex r = kI * dt * hb / (4.0 * m * h2);  // (i dt / 2 hbar) * (hbar^2 / 2 m h^2)
  std::vector<double> pot(n);
  for (std::size_t i = 0; i < n; ++i) pot[i] = v.value(g.point(i));
  std::vector<Complex> a(n, -r), b(n), c(n, -r), d(n);
  for (std::size_t i = 0; i < n; ++i) b[i] = 1.0 + 2.0 * r + kI * dt * pot[i] / (2.0 * hb);
  a[0] = c[n - 1] = 0.0;
  for (std::size_t s = 1; s <= params.steps; ++s) {
    for (std::size_t i = 0; i < n; ++i) {
      const Complex left = i > 0 ? psi[i - 1] : Complex{0.0, 0.0};
      const Complex right = i + 1 < n ? psi[i + 1] : Complex{0.0, 0.0};
      d[i] = (1.0 - 2.0 * r - kI * dt * pot[i] / (2.0 * hb)) * psi[i] + r * (left + right);
    }
    psi.values = detail::thomas(a, b, c, d);
    if (s % params.snapshot_every == 0) out.push_back(psi);
  }
  return out;
}

/// j = (hbar / m) Im(conj(psi) grad psi), with spectral or second-order central-difference gradient.
inline std::vector<Vec3> probability_current(const GridWaveFunction& psi, double hbar, double mass,
                                             bool spectral = true) {
  const Grid& g = psi.grid;
  std::vector<Vec3> j(psi.size(), Vec3::Zero());
  for (int a = 0; a < g.dim; ++a) {
    GridWaveFunction d(g);
    if (spectral) {
      d = spectral_derivative(psi, a);
    } else {
      const std::size_t st = g.stride(a);
      for (std::size_t i = 0; i < psi.size(); ++i) {
        const auto ijk = g.unflatten(i);
        if (ijk[a] == 0 || ijk[a] + 1 == g.count[a]) continue;
        d[i] = (psi[i + st] - psi[i - st]) / (2.0 * g.spacing);
      }
    }
    for (std::size_t i = 0; i < psi.size(); ++i) j[i][a] = hbar / mass * (std::conj(psi[i]) * d[i]).imag();
  }
  return j;
}

/// Pointwise (rho1 - rho0) / dt + (div j0 + div j1) / 2 with central differences; zero on the boundary.
inline std::vector<double> continuity_residual(const GridWaveFunction& psi0, const GridWaveFunction& psi1, double dt,
                                               double hbar = 1.0, double mass = 1.0) {
  require_compatible(psi0, psi1);
  require(dt > 0.0, ErrorKind::InvalidArgument, "dt must be positive");
  const Grid& g = psi0.grid;
  const auto j0 = probability_current(psi0, hbar, mass, false);
  const auto j1 = probability_current(psi1, hbar, mass, false);
  std::vector<double> res(psi0.size(), 0.0);
  for (std::size_t i = 0; i < psi0.size(); ++i) {
    const auto ijk = g.unflatten(i);
    bool edge = false;
    for (int a = 0; a < g.dim; ++a) edge = edge || ijk[a] < 2 || ijk[a] + 2 >= g.count[a];
    if (edge) continue;
    double div = 0.0;
    for (int a = 0; a < g.dim; ++a) {
      const std::size_t st = g.stride(a);
      div += (j0[i + st][a] - j0[i - st][a] + j1[i + st][a] - j1[i - st][a]) / (4.0 * g.spacing);
    }
    res[i] = (std::norm(psi1[i]) - std::norm(psi0[i])) / dt + div;
  }
  return res;
}

inline double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

struct ConvergenceStudy {
  std::vector<double> spacing;
  std::vector<double> dt;
  std::vector<double> residual;  // max-norm of the residual at the final step
  std::vector<double> order;     // log2 of successive residual ratios
};

/// Evolves a 1D packet to t_final at (h, dt), (h/2, dt/2), ... and records the final-step residual.
inline ConvergenceStudy continuity_convergence(const GaussianPacket& pkt, const PotentialField& v, double half_width,
                                              double h0, double dt0, double t_final, int levels) {
  require(levels >= 2, ErrorKind::InvalidArgument, "convergence study needs at least two levels");
  ConvergenceStudy cs;
  for (int l = 0; l < levels; ++l) {
    const double h = h0 / std::pow(2.0, l), dt = dt0 / std::pow(2.0, l);
    const Grid g = Grid::line(pkt.center.x() - half_width, pkt.center.x() + half_width, h);
    EvolutionParams ep;
    ep.dt = dt;
    const auto steps = static_cast<std::size_t>(std::llround(t_final / dt));
    require(steps >= 2, ErrorKind::InvalidArgument, "t_final must span at least two steps");
    ep.steps = steps - 1;
    ep.hbar = pkt.hbar;
    ep.mass = pkt.mass;
    ep.snapshot_every = steps - 1;
    const auto snaps = evolve_grid(packet_wavefunction(pkt, g), v, ep);
    EvolutionParams last = ep;
    last.steps = 1;
    last.snapshot_every = 1;
    const auto tail = evolve_grid(snaps[1], v, last);
    cs.spacing.push_back(h);
    cs.dt.push_back(dt);
    cs.residual.push_back(max_abs(continuity_residual(tail[0], tail[1], dt, pkt.hbar, pkt.mass)));
  }
  for (std::size_t l = 1; l < cs.residual.size(); ++l) cs.order.push_back(std::log2(cs.residual[l - 1] / cs.residual[l]));
  return cs;
}

/// max |j - (p/m) rho| / max |(p/m) rho| for a packet at t = 0, spectral gradient.
inline double packet_current_deviation(const GaussianPacket& pkt, const Grid& g) {
  const auto psi = packet_wavefunction(pkt, g);
  const auto j = probability_current(psi, pkt.hbar, pkt.mass, true);
  double dev = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    const Vec3 ref = pkt.velocity() * std::norm(psi[i]);
    dev = std::max(dev, (j[i] - ref).head(g.dim).cwiseAbs().maxCoeff());
    scale = std::max(scale, ref.head(g.dim).cwiseAbs().maxCoeff());
  }
  return dev / scale;
}

struct DiffusionParams {
  double K = 0.5;
  std::size_t walkers = 100000;
  double dt = 0.01;
  double t_final = 1.0;
  std::uint64_t seed = 0;
  int dim = 3;

  void validate() const {
    require(K > 0.0 && dt > 0.0 && t_final >= dt, ErrorKind::InvalidArgument, "K, dt and t_final must be positive");
    require(walkers >= 2, ErrorKind::InvalidArgument, "need at least two walkers");
    require(dim >= 1 && dim <= 3, ErrorKind::InvalidArgument, "dimension must be 1, 2 or 3");
  }
  std::size_t steps() const { return static_cast<std::size_t>(std::llround(t_final / dt)); }
};

/// CDF of |a| for the heat kernel (4 pi K t)^(-d/2) exp(-a^2 / 4 K t).
inline double heat_kernel_radial_cdf(double r, double K, double t, int dim) {
  if (r <= 0.0) return 0.0;
  return boost::math::gamma_p(0.5 * dim, r * r / (4.0 * K * t));
}

struct DiffusionResult {
  std::vector<double> times;
  std::vector<double> msd;
  LinearFit fit;
  double slope_ratio = 0.0;  // fitted slope / (2 d K)
  std::vector<double> final_radii;
  TestReport ks;
  double max_band_z = 0.0;  // max |F_emp - F| / sqrt(F (1 - F) / n) at the band probes
  bool band_ok = false;
};

/// Walkers released at the origin take i.i.d. N(0, 2 K dt) steps per axis.
inline DiffusionResult brownian_ensemble(const DiffusionParams& p, unsigned threads = 1) {
  p.validate();
  const std::size_t steps = p.steps();
  constexpr std::size_t chunk = 1024;
  const std::size_t chunks = (p.walkers + chunk - 1) / chunk;
  std::vector<std::vector<double>> partial(chunks, std::vector<double>(steps + 1, 0.0));
  DiffusionResult r;
  r.final_radii.assign(p.walkers, 0.0);
  const double sd = std::sqrt(2.0 * p.K * p.dt);
  parallel_for(chunks, threads, [&](std::size_t c) {
    const std::size_t lo = c * chunk, hi = std::min(p.walkers, lo + chunk);
    for (std::size_t w = lo; w < hi; ++w) {
      RngStream rng(p.seed, w);
      Vec3 x = Vec3::Zero();
      for (std::size_t s = 1; s <= steps; ++s) {
        for (int a = 0; a < p.dim; ++a) x[a] += rng.normal(0.0, sd);
        partial[c][s] += x.squaredNorm();
      }
      r.final_radii[w] = x.norm();
    }
  });
  const double n = static_cast<double>(p.walkers);
  for (std::size_t s = 0; s <= steps; ++s) {
    double sum = 0.0;
    for (const auto& part : partial) sum += part[s];
    r.times.push_back(static_cast<double>(s) * p.dt);
    r.msd.push_back(sum / n);
  }
  r.fit = linear_fit(r.times, r.msd);
  r.slope_ratio = r.fit.slope / (2.0 * p.dim * p.K);

  const double t = static_cast<double>(steps) * p.dt;
  const auto cdf = [&](double x) { return heat_kernel_radial_cdf(x, p.K, t, p.dim); };
  r.ks = ks_test(r.final_radii, cdf, 6.334e-5);
  std::vector<double> sorted = r.final_radii;
  std::sort(sorted.begin(), sorted.end());
  // Probe the empirical CDF at the theoretical radii of quantiles 0.05, 0.10, ..., 0.95.
  for (int q = 1; q < 20; ++q) {
    const double target = q / 20.0;
    double lo = 0.0, hi = 20.0 * std::sqrt(p.K * t) + 1.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (cdf(mid) < target ? lo : hi) = mid;
    }
    const double radius = 0.5 * (lo + hi);
    const double f = cdf(radius);
    const double emp = static_cast<double>(std::upper_bound(sorted.begin(), sorted.end(), radius) - sorted.begin()) / n;
    r.max_band_z = std::max(r.max_band_z, std::abs(emp - f) / std::sqrt(f * (1.0 - f) / n));
  }
  r.band_ok = r.max_band_z <= 4.0;
  return r;
}

enum class WalkSource { Spin, Position };

struct MsdSeries {
  std::vector<double> steps;
  std::vector<double> mean_theta2;     // over walkers still unabsorbed at that step
  LinearFit early_fit;                 // over steps 1..10
  double predicted_slope = 0.0;
  double slope_change = 0.0;           // relative change between fits on steps 1..5 and 5..10
  std::vector<double> theta2_at_probe; // per-walker theta^2 at step `probe`
};

struct MsdRequest {
  WalkSource source = WalkSource::Spin;
  std::size_t walkers = 10000;
  std::size_t steps = 10;
  std::size_t probe = 10;
  std::uint64_t seed = 0;
  SpinWalkParams spin;
  PositionWalkParams position;
};

/// Ensemble mean of theta^2 = fs_distance(start, state_k)^2 against the step count k.
/// Predictions: spin 2 s^2 per step (s = step angle); isotropic cells tau^2 v_std^2 (N - 1) / hbar^2;
/// diagonal cells tau^2 v_std^2 (1 - sum |C_n|^4) / hbar^2.
inline MsdSeries state_density_msd(const StateVector& start, const MsdRequest& req, unsigned threads = 1) {
  require(req.walkers >= 2 && req.steps >= 1 && req.probe <= req.steps, ErrorKind::InvalidArgument,
          "msd request needs walkers, steps and a probe step within range");
  const std::size_t n = req.walkers, k = req.steps;
  std::vector<std::vector<double>> th(n, std::vector<double>(k + 1, -1.0));
  parallel_for(n, threads, [&](std::size_t w) {
    RngStream rng(req.seed, w);
    if (req.source == WalkSource::Spin) {
      const auto& sp = req.spin;
      require(start.size() == 2, ErrorKind::DimensionMismatch, "spin source needs a two-component state");
      detail::Spinor s{start[0], start[1]};
      const double fac = sp.mu * sp.dt / sp.hbar;
      th[w][0] = 0.0;
      for (std::size_t i = 1; i <= k; ++i) {
        s = detail::pauli_rotate(s, sample_field(rng, sp.field_std), fac);
        if (spin_absorption(detail::bloch_z(s), sp.absorb_eps) != Outcome::Unresolved) break;
        CVector v(2);
        v << s.a, s.b;
        const double t = fs_distance(start, StateVector(v));
        th[w][i] = t * t;
      }
    } else {
      CellState psi = start;
      th[w][0] = 0.0;
      for (std::size_t i = 1; i <= k; ++i) {
        psi = req.position.mode == GeneratorMode::Isotropic ? isotropic_step(psi, rng, req.position)
                                                            : diag_potential_step(psi, rng, req.position);
        if (absorbed_cell(psi, req.position.absorb_eps) >= 0) break;
        const double t = fs_distance(start, psi);
        th[w][i] = t * t;
      }
    }
  });
  MsdSeries out;
  for (std::size_t i = 0; i <= k; ++i) {
    double sum = 0.0;
    std::size_t cnt = 0;
    for (std::size_t w = 0; w < n; ++w)
      if (th[w][i] >= 0.0) {
        sum += th[w][i];
        ++cnt;
      }
    out.steps.push_back(static_cast<double>(i));
    out.mean_theta2.push_back(cnt ? sum / static_cast<double>(cnt) : 0.0);
  }
  for (std::size_t w = 0; w < n; ++w)
    if (th[w][req.probe] >= 0.0) out.theta2_at_probe.push_back(th[w][req.probe]);
  const std::size_t hi = std::min<std::size_t>(10, k);
  if (hi >= 2) {
    std::vector<double> xs(out.steps.begin() + 1, out.steps.begin() + hi + 1);
    std::vector<double> ys(out.mean_theta2.begin() + 1, out.mean_theta2.begin() + hi + 1);
    out.early_fit = linear_fit(xs, ys);
    if (hi >= 6) {
      const std::size_t mid = hi / 2;
      const auto a = linear_fit(std::vector<double>(xs.begin(), xs.begin() + mid),
                                std::vector<double>(ys.begin(), ys.begin() + mid));
      const auto b = linear_fit(std::vector<double>(xs.begin() + mid - 1, xs.end()),
                                std::vector<double>(ys.begin() + mid - 1, ys.end()));
      out.slope_change = a.slope != 0.0 ? std::abs(b.slope - a.slope) / std::abs(a.slope) : 0.0;
    }
  }
  if (req.source == WalkSource::Spin) {
    const double s = req.spin.step_angle();
    out.predicted_slope = 2.0 * s * s;
  } else {
    const auto& pp = req.position;
    const double nn = static_cast<double>(start.size());
    const double scale = pp.tau * pp.tau * pp.v_std * pp.v_std / (pp.hbar * pp.hbar);
    out.predicted_slope = pp.mode == GeneratorMode::Isotropic ? scale * (nn - 1.0)
                                                              : scale * (1.0 - start.vec().cwiseAbs2().squaredNorm());
  }
  return out;
}

}  // namespace hb
