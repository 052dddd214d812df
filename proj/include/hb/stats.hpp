#pragma once

// Goodness-of-fit, uniformity and interval helpers used by the Monte Carlo experiments.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

#include "hb/core.hpp"

namespace hb {

struct TestReport {
  double statistic = 0.0;
  double p_value = 1.0;
  double alpha = 0.05;
  double df = 0.0;
  bool pass = true;
};

inline TestReport make_report(double statistic, double p_value, double alpha, double df = 0.0) {
  p_value = std::clamp(p_value, 0.0, 1.0);
  return {statistic, p_value, alpha, df, p_value >= alpha};
}

inline double chi_square_sf(double x, double df) {
  if (x <= 0.0) return 1.0;
  return boost::math::cdf(boost::math::complement(boost::math::chi_squared(df), x));
}

inline double normal_quantile(double p) { return boost::math::quantile(boost::math::normal(), p); }

/// Pearson chi-square against expected probabilities. Adjacent bins are merged until each
/// expected count is at least 5; df = merged bins - 1.
inline TestReport chi_square_gof(const std::vector<double>& observed, const std::vector<double>& expected_prob,
                                 double alpha = 0.05) {
  require(!observed.empty() && observed.size() == expected_prob.size(), ErrorKind::InvalidArgument,
          "chi-square needs matching non-empty observed and expected vectors");
  const double n = std::accumulate(observed.begin(), observed.end(), 0.0);
  const double psum = std::accumulate(expected_prob.begin(), expected_prob.end(), 0.0);
  require(n > 0.0 && psum > 0.0, ErrorKind::InvalidArgument, "chi-square needs positive totals");

  std::vector<double> obs, exp;
  double o = 0.0, e = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    o += observed[i];
    e += n * expected_prob[i] / psum;
    if (e >= 5.0) {
      obs.push_back(o);
      exp.push_back(e);
      o = e = 0.0;
    }
  }
  if (e > 0.0 || o > 0.0) {
    if (exp.empty()) {
      obs.push_back(o);
      exp.push_back(e);
    } else {
      obs.back() += o;
      exp.back() += e;
    }
  }
  double stat = 0.0;
  for (std::size_t i = 0; i < obs.size(); ++i) stat += (obs[i] - exp[i]) * (obs[i] - exp[i]) / exp[i];
  const double df = static_cast<double>(obs.size()) - 1.0;
  if (df < 1.0) return make_report(stat, 1.0, alpha, 0.0);
  return make_report(stat, chi_square_sf(stat, df), alpha, df);
}

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
  bool contains(double x) const { return x >= lo && x <= hi; }
};

/// Normal-approximation (Wald) interval for a binomial proportion, clipped to [0, 1].
/// The approximation degrades for p near 0 or 1 and small n; no continuity correction is applied.
inline Interval binomial_interval(double successes, double trials, double confidence) {
  require(trials >= 1.0 && successes >= 0.0 && successes <= trials, ErrorKind::InvalidArgument,
          "binomial interval needs 0 <= successes <= trials, trials >= 1");
  require(confidence > 0.0 && confidence < 1.0, ErrorKind::InvalidArgument, "confidence must lie in (0, 1)");
  const double p = successes / trials;
  const double z = normal_quantile(0.5 + 0.5 * confidence);
  const double half = z * std::sqrt(p * (1.0 - p) / trials);
  return {std::max(0.0, p - half), std::min(1.0, p + half)};
}

/// Rayleigh test of uniformity for unit vectors on S^{d-1} (d = 2 or 3):
/// d n |mean resultant|^2 is asymptotically chi-square with d degrees of freedom.
inline TestReport direction_uniformity(const std::vector<Vec3>& samples, int d, double alpha = 0.01) {
  require(d == 2 || d == 3, ErrorKind::InvalidArgument, "direction test supports S^1 and S^2");
  require(samples.size() >= 100, ErrorKind::InvalidArgument, "direction test needs at least 100 samples");
  Vec3 sum = Vec3::Zero();
  for (const auto& s : samples) {
    const double n = s.head(d).norm();
    require(n > 0.0, ErrorKind::Degenerate, "zero direction sample");
    sum.head(d) += s.head(d) / n;
  }
  const double n = static_cast<double>(samples.size());
  const double stat = d * sum.squaredNorm() / n;
  return make_report(stat, chi_square_sf(stat, d), alpha, d);
}

/// Asymptotic Kolmogorov distribution survival function Q(x) = 2 sum (-1)^{k-1} exp(-2 k^2 x^2).
inline double kolmogorov_sf(double x) {
  if (x <= 0.0) return 1.0;
  if (x < 0.2) return 1.0;
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    s += (k % 2 == 1 ? term : -term);
    if (term < 1e-18) break;
  }
  return std::clamp(2.0 * s, 0.0, 1.0);
}

/// One-sample Kolmogorov-Smirnov test against a continuous CDF.
inline TestReport ks_test(std::vector<double> samples, const std::function<double(double)>& cdf,
                          double alpha = 0.01) {
  require(!samples.empty(), ErrorKind::InvalidArgument, "KS test needs samples");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  const double sn = std::sqrt(n);
  return make_report(d, kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d), alpha);
}

/// Two-sample Kolmogorov-Smirnov test.
inline TestReport ks_two_sample(std::vector<double> a, std::vector<double> b, double alpha = 0.01) {
  require(!a.empty() && !b.empty(), ErrorKind::InvalidArgument, "KS test needs samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double ne = std::sqrt(na * nb / (na + nb));
  return make_report(d, kolmogorov_sf((ne + 0.12 + 0.11 / ne) * d), alpha);
}

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
};

inline Moments moments(const std::vector<double>& x) {
  require(x.size() >= 2, ErrorKind::InvalidArgument, "moments need at least two samples");
  const double n = static_cast<double>(x.size());
  Moments m;
  m.mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : x) {
    const double d = v - m.mean, d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  m.variance = m2 * n / (n - 1.0);
  m.skewness = m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0;
  m.excess_kurtosis = m2 > 0.0 ? m4 / (m2 * m2) - 3.0 : 0.0;
  return m;
}

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

/// Ordinary least squares y = slope x + intercept.
inline LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size() && x.size() >= 2, ErrorKind::InvalidArgument, "fit needs two or more points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  require(sxx > 0.0, ErrorKind::Degenerate, "fit abscissae are all equal");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return f;
}

}  // namespace hb
