#include <gtest/gtest.h>

#include <cmath>

#include "mvcontract/errors.hpp"
#include "mvcontract/numerics.hpp"
#include "mvcontract/timegrid.hpp"
#include "oracles.hpp"

using namespace mvcontract;

namespace {

SdeSystem linear_sde(double a, double sigma) {
  return {1, [a](double, std::span<const double> x, std::span<double> o) { o[0] = a * x[0]; },
          [sigma](double, std::span<const double>, std::span<double> o) { o[0] = sigma; }};
}

}  // namespace

TEST(TimeGrid, NodesAndEndpoint) {
  const TimeGrid g(0.03, 7);
  EXPECT_EQ(g.n_points(), 8u);
  EXPECT_DOUBLE_EQ(g.dt(), 0.03 / 7);
  EXPECT_EQ(g.time(0), 0.0);
  EXPECT_EQ(g.time(7), 0.03);
  const auto ts = g.times();
  for (std::size_t k = 1; k < ts.size(); ++k) EXPECT_GT(ts[k], ts[k - 1]);
}

TEST(TimeGrid, RejectsBadArguments) {
  EXPECT_THROW(TimeGrid(0.0, 10), std::invalid_argument);
  EXPECT_THROW(TimeGrid(-1.0, 10), std::invalid_argument);
  EXPECT_THROW(TimeGrid(1.0, 1), std::invalid_argument);
  EXPECT_THROW(TimeGrid(NAN, 10), std::invalid_argument);
}

TEST(TimeGrid, LocateSnapsToNodes) {
  const TimeGrid g(0.03, 64);
  for (std::size_t k = 0; k < g.n_steps(); ++k) {
    const auto [i, f] = g.locate(g.time(k));
    EXPECT_EQ(i, k);
    EXPECT_EQ(f, 0.0);
  }
  const auto [i, f] = g.locate(2.5 * g.dt());
  EXPECT_EQ(i, 2u);
  EXPECT_NEAR(f, 0.5, 1e-12);
  EXPECT_EQ(g.locate(1.0).first, 63u);
  EXPECT_EQ(g.locate(1.0).second, 1.0);
}

TEST(PathRng, UniformOpenIntervalAndNormalMoments) {
  PathRng rng(42, 7);
  constexpr int n = 200000;
  std::vector<double> z(n);
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
  for (auto& v : z) v = rng.standard_normal();
  const auto m = mean_estimate(z);
  EXPECT_LT(std::abs(m.value), 4.0 * m.std_error);
  const auto v = variance_estimate(z);
  EXPECT_LT(std::abs(v.value - 1.0), 4.0 * v.std_error);
}

TEST(PathRng, StreamsDifferAndRepeat) {
  PathRng a(1, 0), b(1, 1), c(1, 0), d(2, 0);
  const auto x = a.next_u64();
  EXPECT_NE(x, b.next_u64());
  EXPECT_EQ(x, c.next_u64());
  EXPECT_NE(x, d.next_u64());
}

TEST(Noise, CoarseningSumsFineIncrements) {
  const auto fine = sample_noise(make_grid(0.5, 16), 5, 99);
  const auto coarse = coarsen(fine, 4);
  EXPECT_EQ(coarse.grid().n_steps(), 4u);
  for (std::size_t p = 0; p < 5; ++p) {
    const auto f = fine.increments(p);
    const auto c = coarse.increments(p);
    for (std::size_t k = 0; k < 4; ++k) {
      EXPECT_NEAR(c[k], f[4 * k] + f[4 * k + 1] + f[4 * k + 2] + f[4 * k + 3], 1e-15);
    }
  }
  EXPECT_THROW(coarsen(fine, 3), std::invalid_argument);
  EXPECT_THROW(sample_noise(make_grid(1.0, 4), 0, 1), std::invalid_argument);
}

TEST(Noise, IncrementVariance) {
  const auto noise = sample_noise(make_grid(2.0, 8), 50000, 3);
  std::vector<double> first(noise.n_paths());
  for (std::size_t p = 0; p < noise.n_paths(); ++p) first[p] = noise.increments(p)[3];
  const auto v = variance_estimate(first);
  EXPECT_LT(std::abs(v.value - 0.25), 4.0 * v.std_error);
}

TEST(EulerMaruyama, DeterministicChainIsExact) {
  const auto noise = sample_noise(make_grid(1.0, 10), 3, 1);
  const std::array<double, 1> init = {2.0};
  const auto paths = euler_maruyama(linear_sde(0.7, 0.0), init, noise);
  EXPECT_NEAR(paths.at(1, 10, 0), 2.0 * std::pow(1.07, 10), 1e-13);
}

TEST(EulerMaruyama, FirstOrderWeakConvergenceOfTheMean) {
  // With σ = 0 the weak error of E[x(T)] is the deterministic Euler error.
  const double a = 1.0, T = 1.0;
  std::vector<double> err;
  for (std::size_t n : {8u, 16u, 32u}) {
    const auto noise = sample_noise(make_grid(T, n), 1, 1);
    const std::array<double, 1> init = {1.0};
    const auto paths = euler_maruyama(linear_sde(a, 0.0), init, noise);
    err.push_back(std::abs(paths.at(0, n, 0) - std::exp(a * T)));
  }
  for (std::size_t i = 0; i + 1 < err.size(); ++i) {
    const double ratio = err[i] / err[i + 1];
    EXPECT_GE(ratio, 1.5);
    EXPECT_LE(ratio, 2.5);
  }
}

TEST(EulerMaruyama, OuVarianceMatchesDiscreteOracle) {
  const double a = -0.8, sigma = 0.6, T = 1.0;
  const std::size_t n = 20;
  const auto noise = sample_noise(make_grid(T, n), 100000, 11);
  const std::array<double, 1> init = {0.0};
  const auto paths = euler_maruyama(linear_sde(a, sigma), init, noise);
  const auto v = variance_estimate(paths.cross_section(n, 0));
  EXPECT_LT(std::abs(v.value - oracle::euler_ou_variance(a, sigma, T, n)), 3.5 * v.std_error);
}

TEST(EulerMaruyama, WorkerCountDoesNotChangeResults) {
  const auto noise = sample_noise(make_grid(1.0, 16), 257, 5);
  const std::array<double, 1> init = {0.3};
  const auto one = euler_maruyama(linear_sde(0.5, 1.0), init, noise, {"x"}, 1);
  const auto many = euler_maruyama(linear_sde(0.5, 1.0), init, noise, {"x"}, 4);
  for (std::size_t p = 0; p < noise.n_paths(); ++p) {
    const auto a = one.path_data(p);
    const auto b = many.path_data(p);
    ASSERT_TRUE(std::equal(a.begin(), a.end(), b.begin()));
  }
}

TEST(EulerMaruyama, DivergenceIsReported) {
  const SdeSystem blow{1, [](double, std::span<const double> x, std::span<double> o) { o[0] = 1e300 * x[0] * x[0]; },
                       [](double, std::span<const double>, std::span<double> o) { o[0] = 0.0; }};
  const auto noise = sample_noise(make_grid(1.0, 8), 4, 1);
  const std::array<double, 1> init = {1.0};
  try {
    euler_maruyama(blow, init, noise);
    FAIL() << "expected SimulationDiverged";
  } catch (const SimulationDiverged& e) {
    EXPECT_EQ(e.path(), 0u);
    EXPECT_GE(e.step(), 1u);
  }
}

TEST(EulerMaruyama, RejectsBadInitialState) {
  const auto noise = sample_noise(make_grid(1.0, 8), 4, 1);
  const std::array<double, 2> two = {0.0, 0.0};
  EXPECT_THROW(euler_maruyama(linear_sde(1.0, 1.0), two, noise), std::invalid_argument);
  const std::array<double, 1> nan = {NAN};
  EXPECT_THROW(euler_maruyama(linear_sde(1.0, 1.0), nan, noise), std::invalid_argument);
}

TEST(Numerics, VarianceMatchesNaiveTwoPass) {
  PathRng rng(8, 8);
  std::vector<double> v(12345);
  for (auto& x : v) x = 3.0 + 0.1 * rng.standard_normal();
  const auto est = variance_estimate(v);
  EXPECT_NEAR(est.value, oracle::naive_variance(v), 1e-12 * est.value);
  EXPECT_GE(est.value, 0.0);
}

TEST(Numerics, ParallelForRethrowsLowestBlock) {
  try {
    parallel_for(100, 4, [](std::size_t begin, std::size_t) {
      throw std::runtime_error(std::to_string(begin));
    });
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_STREQ(e.what(), "0");
  }
}
