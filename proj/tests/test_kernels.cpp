#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "resilia/kernels.hpp"

namespace resilia {
namespace {

TEST(Uniform01, RangeAndMean) {
  std::mt19937_64 rng(3);
  double sum = 0.0;
  for (int k = 0; k < 100000; ++k) {
    const double u = uniform01(rng);
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / 100000.0, 0.5, 5e-3);
}

TEST(DiscSampler, StaysInsideAndIsAreaUniform) {
  const DiscSampler sampler(Vector{{2.0, -1.0}}, 3.0);
  std::mt19937_64 rng(5);
  double r2 = 0.0;
  const int n = 100000;
  for (int k = 0; k < n; ++k) {
    const Vector x = sampler.sample(rng);
    const double d2 = (x - Vector{{2.0, -1.0}}).squaredNorm();
    ASSERT_LE(d2, 9.0 + 1e-12);
    r2 += d2;
  }
  // E‖Ξ − c‖² = R²/2 for the uniform disc.
  EXPECT_NEAR(r2 / n, 4.5, 0.05);
}

TEST(DiscSampler, StacksIndependentCopies) {
  const DiscSampler sampler(Vector::Zero(2), 1.0, 3);
  EXPECT_EQ(sampler.dimension(), 6);
  std::mt19937_64 rng(1);
  const Vector x = sampler.sample(rng);
  ASSERT_EQ(x.size(), 6);
  EXPECT_NE(x.head(2), x.segment(2, 2));
}

TEST(ScenarioSampler, FrequenciesFollowWeights) {
  const ScenarioSet set({Vector::Constant(1, 0.0), Vector::Constant(1, 1.0), Vector::Constant(1, 2.0)},
                        {0.2, 0.5, 0.3}, {1.0, 1.0, 1.0});
  const ScenarioSampler sampler(set);
  const auto values = kernels::monte_carlo_map(
      sampler, [](const Vector& xi) { return xi(0); }, 200000, 8, Execution::parallel);
  std::vector<double> freq(3, 0.0);
  for (double v : values) {
    freq[static_cast<std::size_t>(v)] += 1.0 / 200000.0;
  }
  EXPECT_NEAR(freq[0], 0.2, 5e-3);
  EXPECT_NEAR(freq[1], 0.5, 5e-3);
  EXPECT_NEAR(freq[2], 0.3, 5e-3);
}

TEST(MonteCarlo, SerialAndParallelAreBitwiseEqual) {
  const DiscSampler sampler(Vector::Zero(2), 1.0, 2);
  const std::int64_t n = 3 * kernels::kBlockSize + 17;
  auto fn = [](const Vector& xi) { return std::sin(xi.sum()) + xi.squaredNorm(); };
  const auto a = kernels::monte_carlo_map(sampler, fn, n, 99, Execution::serial);
  const auto b = kernels::monte_carlo_map(sampler, fn, n, 99, Execution::parallel);
  ASSERT_EQ(a.size(), static_cast<std::size_t>(n));
  EXPECT_EQ(a, b);
  auto accept = [](const Vector& xi) { return xi(0) > 0.1; };
  EXPECT_EQ(kernels::monte_carlo_count(sampler, accept, n, 99, Execution::serial),
            kernels::monte_carlo_count(sampler, accept, n, 99, Execution::parallel));
}

TEST(MonteCarlo, PrefixIsStableUnderLongerRuns) {
  const DiscSampler sampler(Vector::Zero(2), 1.0);
  auto fn = [](const Vector& xi) { return xi(0); };
  const auto a = kernels::monte_carlo_map(sampler, fn, 5000, 4, Execution::parallel);
  const auto b = kernels::monte_carlo_map(sampler, fn, 12000, 4, Execution::parallel);
  for (std::size_t k = 0; k < a.size(); ++k) {
    ASSERT_EQ(a[k], b[k]);
  }
}

TEST(MonteCarlo, DifferentSeedsDiffer) {
  const DiscSampler sampler(Vector::Zero(2), 1.0);
  auto fn = [](const Vector& xi) { return xi(0); };
  EXPECT_NE(kernels::monte_carlo_map(sampler, fn, 10, 1, Execution::serial),
            kernels::monte_carlo_map(sampler, fn, 10, 2, Execution::serial));
}

TEST(GridMinimize, FindsLatticeMinimum) {
  auto fn = [](const Vector& x) { return (x(0) - 0.3) * (x(0) - 0.3) + (x(1) + 0.7) * (x(1) + 0.7); };
  const Vector lower{{-1.0, -1.0}};
  const Vector upper{{1.0, 1.0}};
  const Vector step{{0.1, 0.1}};
  const auto a = kernels::grid_minimize(lower, upper, step, fn, Execution::serial);
  const auto b = kernels::grid_minimize(lower, upper, step, fn, Execution::parallel);
  EXPECT_NEAR(a.argmin(0), 0.3, 1e-12);
  EXPECT_NEAR(a.argmin(1), -0.7, 1e-12);
  EXPECT_EQ(a.evaluated, 21 * 21);
  EXPECT_EQ(a.argmin, b.argmin);
  EXPECT_EQ(a.value, b.value);
}

TEST(GridMinimize, TiesGoToSmallestIndex) {
  auto fn = [](const Vector& x) { return std::abs(x(0)) > 0.45 ? 0.0 : 1.0; };
  const auto r =
      kernels::grid_minimize(Vector{{-1.0}}, Vector{{1.0}}, Vector{{0.1}}, fn, Execution::parallel);
  EXPECT_NEAR(r.argmin(0), -1.0, 1e-12);
}

TEST(GridMinimize, InfeasibleEverywhere) {
  auto fn = [](const Vector&) { return std::numeric_limits<double>::infinity(); };
  const auto r = kernels::grid_minimize(Vector{{0.0}}, Vector{{1.0}}, Vector{{0.5}}, fn, Execution::serial);
  EXPECT_TRUE(std::isinf(r.value));
}

TEST(WeightedGradient, MatchesDirectSum) {
  std::mt19937_64 rng(21);
  const auto ps = testing::random_instance(rng, {4, 3, 5, true});
  Matrix lambda = Matrix::Random(3, 5).cwiseAbs();
  const Vector z = Vector::LinSpaced(4, 0.5, -0.5);
  Vector direct = Vector::Zero(4);
  for (std::size_t j = 0; j < 5; ++j) {
    for (std::size_t i = 0; i < 3; ++i) {
      direct += ps.scenarios.weight(j) * lambda(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) *
                constraint_gradient(ps.constraints[i], z, ps.scenarios.xi(j));
    }
  }
  const Vector a = kernels::weighted_constraint_gradient(ps, z, lambda, Execution::serial);
  const Vector b = kernels::weighted_constraint_gradient(ps, z, lambda, Execution::parallel);
  EXPECT_NEAR((a - direct).norm(), 0.0, 1e-12);
  EXPECT_EQ(a, b);
}

TEST(MapIndices, PreservesOrder) {
  const auto out = kernels::map_indices<long>(1000, [](std::int64_t k) { return static_cast<long>(k * k); },
                                              Execution::parallel);
  for (std::size_t k = 0; k < out.size(); ++k) {
    ASSERT_EQ(out[k], static_cast<long>(k * k));
  }
}

}  // namespace
}  // namespace resilia
