#include <gtest/gtest.h>

#include <atomic>
#include <set>

#include "hb/parallel.hpp"
#include "hb/rng.hpp"
#include "hb/stats.hpp"

namespace {

using namespace hb;

TEST(Rng, SplitmixReferenceValue) { EXPECT_EQ(splitmix64(0), 0xe220a8397b1dcdafULL); }

TEST(Rng, StreamSeedingMatchesTheMixedEngine) {
  // engine seed for (1, 0) computed independently: splitmix64(splitmix64(1) ^ splitmix64(~0))
  std::mt19937_64 ref(9329450568244603410ULL);
  RngStream s(1, 0);
  for (int i = 0; i < 5; ++i) EXPECT_EQ(s.next_u64(), ref());
}

TEST(Rng, StreamsAreReproducibleAndDistinct) {
  RngStream a(42, 3), b(42, 3), c(42, 4), d(43, 3);
  std::set<std::uint64_t> firsts;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    EXPECT_EQ(x, b.next_u64());
    if (i == 0) {
      firsts.insert(x);
      firsts.insert(c.next_u64());
      firsts.insert(d.next_u64());
    }
  }
  EXPECT_EQ(firsts.size(), 3u);
}

TEST(Rng, UniformStaysInOpenInterval) {
  RngStream s(9, 9);
  double lo = 1.0, hi = 0.0, sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = s.uniform();
    lo = std::min(lo, u);
    hi = std::max(hi, u);
    sum += u;
  }
  EXPECT_GT(lo, 0.0);
  EXPECT_LT(hi, 1.0);
  EXPECT_NEAR(sum / n, 0.5, 5.0 * std::sqrt(1.0 / 12.0 / n));
}

TEST(Rng, NormalMomentsAndKs) {
  RngStream s(5, 1);
  std::vector<double> x(100000);
  for (auto& v : x) v = s.normal(1.5, 2.0);
  const auto m = moments(x);
  EXPECT_NEAR(m.mean, 1.5, 5.0 * 2.0 / std::sqrt(1e5));
  EXPECT_NEAR(m.variance, 4.0, 5.0 * 4.0 * std::sqrt(2.0 / 1e5));
  EXPECT_NEAR(m.skewness, 0.0, 0.05);
  EXPECT_NEAR(m.excess_kurtosis, 0.0, 0.1);
  const auto ks = ks_test(x, [](double v) { return 0.5 * std::erfc(-(v - 1.5) / (2.0 * std::sqrt(2.0))); }, 0.001);
  EXPECT_TRUE(ks.pass) << ks.p_value;
}

TEST(Rng, ZeroStdReturnsMeanExactly) {
  RngStream s(1, 1);
  EXPECT_EQ(s.normal(0.25, 0.0), 0.25);
  EXPECT_EQ(normal_sample(s, -3.0, 0.0), -3.0);
}

TEST(Stats, ChiSquareSurvivalReferenceValues) {
  EXPECT_NEAR(chi_square_sf(10.0, 7.0), 0.18857346751344997, 1e-13);
  EXPECT_NEAR(chi_square_sf(3.84, 1.0), 0.05004352124870519, 1e-13);
  EXPECT_EQ(chi_square_sf(0.0, 3.0), 1.0);
}

TEST(Stats, KolmogorovReferenceValues) {
  EXPECT_NEAR(kolmogorov_sf(1.0), 0.26999967167735456, 1e-12);
  EXPECT_NEAR(kolmogorov_sf(0.5), 0.9639452436648751, 1e-12);
}

TEST(Stats, ChiSquareGoodnessOfFit) {
  const std::vector<double> p{0.1, 0.2, 0.3, 0.4};
  const auto exact = chi_square_gof({100, 200, 300, 400}, p, 0.001);
  EXPECT_DOUBLE_EQ(exact.statistic, 0.0);
  EXPECT_EQ(exact.df, 3.0);
  EXPECT_TRUE(exact.pass);
  const auto bad = chi_square_gof({400, 300, 200, 100}, p, 0.001);
  EXPECT_FALSE(bad.pass);
  EXPECT_NEAR(bad.statistic, 900.0 + 50.0 + 33.333333333333336 + 225.0, 1e-9);
}

TEST(Stats, ChiSquareMergesSparseBins) {
  // expected counts 1, 1, 98 over 100 draws: the first two merge with the third
  const auto r = chi_square_gof({1, 1, 98}, {0.01, 0.01, 0.98});
  EXPECT_EQ(r.df, 0.0);
  EXPECT_EQ(r.p_value, 1.0);
  EXPECT_THROW(chi_square_gof({1, 2}, {1.0}), Error);
}

TEST(Stats, ChiSquareCalibratedUnderTheNull) {
  // Rejection rate at alpha = 0.05 over repeated multinomial draws.
  const std::vector<double> p{0.05, 0.15, 0.3, 0.5};
  int rejected = 0;
  const int reps = 2000;
  for (int r = 0; r < reps; ++r) {
    RngStream s(77, static_cast<std::uint64_t>(r));
    std::vector<double> counts(4, 0.0);
    for (int i = 0; i < 500; ++i) {
      const double u = s.uniform();
      counts[u < 0.05 ? 0 : u < 0.2 ? 1 : u < 0.5 ? 2 : 3] += 1.0;
    }
    if (!chi_square_gof(counts, p, 0.05).pass) ++rejected;
  }
  EXPECT_NEAR(rejected / static_cast<double>(reps), 0.05, 4.0 * std::sqrt(0.05 * 0.95 / reps));
}

TEST(Stats, BinomialInterval) {
  const auto i = binomial_interval(50, 100, 0.95);
  EXPECT_NEAR(i.lo, 0.5 - 1.959963984540054 * 0.05, 1e-12);
  EXPECT_NEAR(i.hi, 0.5 + 1.959963984540054 * 0.05, 1e-12);
  EXPECT_TRUE(i.contains(0.45));
  EXPECT_EQ(binomial_interval(0, 10, 0.9).lo, 0.0);
  EXPECT_THROW(binomial_interval(11, 10, 0.9), Error);
}

TEST(Stats, RayleighDetectsBias) {
  RngStream s(3, 0);
  std::vector<Vec3> uniform, biased;
  for (int i = 0; i < 5000; ++i) {
    const double a = 2.0 * kPi * s.uniform();
    uniform.emplace_back(std::cos(a), std::sin(a), 0.0);
    const double b = 0.3 * s.normal();
    biased.emplace_back(std::cos(b), std::sin(b), 0.0);
  }
  EXPECT_TRUE(direction_uniformity(uniform, 2, 0.001).pass);
  EXPECT_FALSE(direction_uniformity(biased, 2, 0.001).pass);
  std::vector<Vec3> sphere;
  for (int i = 0; i < 5000; ++i) sphere.emplace_back(s.normal(), s.normal(), s.normal());
  EXPECT_TRUE(direction_uniformity(sphere, 3, 0.001).pass);
}

TEST(Stats, TwoSampleKs) {
  RngStream s(10, 0);
  std::vector<double> a(3000), b(3000), c(3000);
  for (auto& v : a) v = s.normal();
  for (auto& v : b) v = s.normal();
  for (auto& v : c) v = s.normal(0.3, 1.0);
  EXPECT_TRUE(ks_two_sample(a, b, 0.001).pass);
  EXPECT_FALSE(ks_two_sample(a, c, 0.001).pass);
}

TEST(Stats, LinearFitRecoversLine) {
  std::vector<double> x, y;
  for (int i = 0; i < 10; ++i) {
    x.push_back(i);
    y.push_back(3.0 * i - 2.0);
  }
  const auto f = linear_fit(x, y);
  EXPECT_NEAR(f.slope, 3.0, 1e-13);
  EXPECT_NEAR(f.intercept, -2.0, 1e-12);
  EXPECT_NEAR(f.r2, 1.0, 1e-14);
}

TEST(Parallel, EachIndexOnceAndErrorsPropagate) {
  std::vector<std::atomic<int>> hits(1000);
  parallel_for(hits.size(), 8, [&](std::size_t i) { hits[i]++; });
  for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
  EXPECT_THROW(parallel_for(100, 4,
                            [](std::size_t i) {
                              if (i == 37) throw std::runtime_error("boom");
                            }),
               std::runtime_error);
}

TEST(Parallel, WorkerCountFromEnvironment) {
  setenv("HB_THREADS", "3", 1);
  EXPECT_EQ(worker_count(), 3u);
  setenv("HB_THREADS", "zero", 1);
  EXPECT_THROW(worker_count(), Error);
  setenv("HB_THREADS", "0", 1);
  EXPECT_THROW(worker_count(), Error);
  unsetenv("HB_THREADS");
  EXPECT_GE(worker_count(), 1u);
}

}  // namespace
