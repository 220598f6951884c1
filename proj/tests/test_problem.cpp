#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "resilia/problem.hpp"

namespace resilia {
namespace {

TEST(EvaluateConstraint, AffineRow) {
  const auto c = Constraint::affine_row(Vector::Constant(1, 1.0), 1.0);
  EXPECT_DOUBLE_EQ(evaluate_constraint(c, Vector::Zero(1), Vector::Constant(1, 7.0)), -1.0);
}

TEST(EvaluateConstraint, BallCenteredOnDisturbance) {
  auto c = Constraint::ball(Matrix::Identity(2, 2), Vector::Zero(2), 1.0);
  c.center_xi = Matrix::Identity(2, 2);
  EXPECT_DOUBLE_EQ(evaluate_constraint(c, Vector::Zero(2), Vector::Zero(2)), -1.0);
}

TEST(EvaluateConstraint, BallAwayFromOrigin) {
  const auto c = Constraint::ball(Matrix::Identity(2, 2), Vector{{3.0, 4.0}}, 1.0);
  EXPECT_DOUBLE_EQ(evaluate_constraint(c, Vector::Zero(2), Vector::Zero(1)), 3.0 * 3.0 + 4.0 * 4.0 - 1.0);
}

TEST(EvaluateConstraint, DisturbanceEntersAffinely) {
  auto c = Constraint::affine_row(Vector{{1.0, 2.0}}, 0.5);
  c.a_xi = Matrix{{1.0}, {0.0}};
  c.b_xi = Vector::Constant(1, 2.0);
  const Vector z{{1.0, 1.0}};
  const Vector xi = Vector::Constant(1, 3.0);
  // (1 + 3)·1 + 2·1 − (0.5 + 2·3)
  EXPECT_DOUBLE_EQ(evaluate_constraint(c, z, xi), 4.0 + 2.0 - 6.5);
}

TEST(EvaluateConstraint, RejectsDimensionMismatch) {
  const auto c = Constraint::affine_row(Vector::Constant(2, 1.0), 0.0);
  EXPECT_THROW(evaluate_constraint(c, Vector::Zero(3), Vector::Zero(1)), std::invalid_argument);
  auto ball = Constraint::ball(Matrix::Identity(2, 2), Vector::Zero(2), 1.0);
  EXPECT_THROW(evaluate_constraint(ball, Vector::Zero(1), Vector::Zero(1)), std::invalid_argument);
}

TEST(ConstraintGradient, MatchesCentralDifference) {
  std::mt19937_64 rng(7);
  const auto ps = testing::random_instance(rng, {4, 3, 2, true});
  const Vector z = Vector::LinSpaced(4, -1.0, 1.0);
  for (const auto& c : ps.constraints) {
    for (const auto& xi : ps.scenarios.points()) {
      const Vector grad = constraint_gradient(c, z, xi);
      for (Eigen::Index k = 0; k < z.size(); ++k) {
        const Vector e = 1e-6 * Vector::Unit(z.size(), k);
        const double fd = (evaluate_constraint(c, z + e, xi) - evaluate_constraint(c, z - e, xi)) / 2e-6;
        EXPECT_NEAR(grad(k), fd, 1e-6);
      }
    }
  }
}

TEST(EvaluateObjective, ZeroVector) {
  const Objective o{Matrix::Identity(3, 3), Vector::Zero(3), 0.0};
  EXPECT_DOUBLE_EQ(evaluate_objective(o, Vector::Zero(3)), 0.0);
}

TEST(EvaluateObjective, IdentityForm) {
  const Objective o{Matrix::Identity(2, 2), Vector::Zero(2), 0.0};
  EXPECT_DOUBLE_EQ(evaluate_objective(o, Vector{{1.0, 1.0}}), 2.0);
}

TEST(EvaluateObjective, SquaredDistance) {
  const auto o = Objective::squared_distance(Vector{{1.0, 0.0}});
  EXPECT_DOUBLE_EQ(evaluate_objective(o, Vector::Zero(2)), 1.0);
  EXPECT_DOUBLE_EQ(evaluate_objective(o, Vector{{1.0, 0.0}}), 0.0);
}

TEST(EvaluateObjective, RejectsDimensionMismatch) {
  const Objective o{Matrix::Identity(2, 2), Vector::Zero(2), 0.0};
  EXPECT_THROW(evaluate_objective(o, Vector::Zero(3)), std::invalid_argument);
}

TEST(ScenarioSet, Singleton) {
  const auto set = build_scenario_set({Vector::Zero(1)}, [](const Vector&) { return 1.0; });
  ASSERT_EQ(set.size(), 1u);
  EXPECT_DOUBLE_EQ(set.weight(0), 1.0);
}

TEST(ScenarioSet, CollisionMasses) {
  const std::vector<double> probs{0.5, 0.4, 0.05, 0.05};
  std::vector<Vector> points;
  for (double delta : {0.0, 0.1, 1.0, 10.0}) {
    points.push_back(Vector::Constant(1, delta));
  }
  const auto set = build_scenario_set(points, [](const Vector&) { return 1.0; }, probs);
  for (std::size_t j = 0; j < probs.size(); ++j) {
    EXPECT_NEAR(set.weight(j), probs[j], 1e-15);
  }
}

TEST(ScenarioSet, UniformDiscPoints) {
  std::vector<Vector> points;
  for (int k = 0; k < 100; ++k) {
    const double t = 2.0 * M_PI * k / 100.0;
    points.push_back(Vector{{0.5 * std::cos(t), 0.5 * std::sin(t)}});
  }
  const auto set = build_scenario_set(points, [](const Vector&) { return 1.0 / M_PI; });
  for (double w : set.weights()) {
    EXPECT_NEAR(w, 0.01, 1e-15);
  }
}

TEST(ScenarioSet, RejectsBadInput) {
  EXPECT_THROW(build_scenario_set({}, [](const Vector&) { return 1.0; }), std::invalid_argument);
  EXPECT_THROW(build_scenario_set({Vector::Zero(1)}, [](const Vector&) { return 0.0; }), std::invalid_argument);
  EXPECT_THROW(ScenarioSet({Vector::Zero(1)}, {0.5}, {1.0}), std::invalid_argument);
  EXPECT_THROW(ScenarioSet({Vector::Zero(1), Vector::Zero(2)}, {0.5, 0.5}, {1.0, 1.0}), std::invalid_argument);
  EXPECT_THROW(ScenarioSet({Vector::Zero(1), Vector::Zero(1)}, {1.5, -0.5}, {1.0, 1.0}), std::invalid_argument);
}

TEST(ScenarioSet, RingGridIsEqualArea) {
  const auto set = disc_ring_grid(Vector{{1.0, -2.0}}, 3.0, 5, 3);
  ASSERT_EQ(set.size(), 75u);
  for (std::size_t j = 0; j < set.size(); ++j) {
    EXPECT_NEAR(set.weight(j), 1.0 / 75.0, 1e-15);
    EXPECT_LE((set.xi(j) - Vector{{1.0, -2.0}}).norm(), 3.0);
  }
  EXPECT_NEAR((set.mean() - Vector{{1.0, -2.0}}).norm(), 0.0, 1e-12);
}

TEST(ValidateProblem, WellPosedShepherd) {
  auto ps = testing::shepherd_three(4.0);
  ps.slater_point = Vector::Zero(2);
  const auto report = validate_problem(ps);
  EXPECT_TRUE(report.ok());
  EXPECT_TRUE(report.slater_checked);
  EXPECT_NEAR(report.convexity_margin, 2.0, 1e-12);
}

TEST(ValidateProblem, SingularObjectiveFails) {
  auto ps = testing::one_d_fixture();
  ps.objective.quadratic(0, 0) = 0.0;
  const auto report = validate_problem(ps);
  EXPECT_FALSE(report.strongly_convex);
  EXPECT_FALSE(report.ok());
}

TEST(ValidateProblem, FlagsSlaterViolation) {
  auto ps = testing::shepherd_three(0.85);
  // Squared distances 0.89, 0.81, 0.13: only the first sheep is out of reach.
  ps.slater_point = Vector{{0.5, -0.3}};
  std::vector<std::pair<std::size_t, std::size_t>> expected;
  for (std::size_t j = 0; j < 3; ++j) {
    if (evaluate_constraint(ps.constraints[0], *ps.slater_point, ps.scenarios.xi(j)) >= 0.0) {
      expected.emplace_back(0, j);
    }
  }
  ASSERT_EQ(expected.size(), 1u);
  const auto report = validate_problem(ps);
  EXPECT_EQ(report.slater_violations, expected);
  EXPECT_FALSE(report.ok());
}

TEST(ValidateProblem, ReportsShapeErrors) {
  auto ps = testing::one_d_fixture();
  ps.constraints.push_back(Constraint::affine_row(Vector::Zero(2), 0.0));
  EXPECT_FALSE(validate_problem(ps).dimension_errors.empty());
  EXPECT_THROW(check_shapes(ps), std::invalid_argument);
}

TEST(Equality, LowersToMirroredHardPair) {
  auto ps = testing::one_d_fixture();
  add_equality(ps, Vector::Constant(1, 2.0), 1.0);
  ASSERT_EQ(ps.constraint_count(), 3u);
  EXPECT_FALSE(ps.constraints[1].soft);
  EXPECT_EQ(ps.constraints[1].mirror, 2u);
  EXPECT_EQ(ps.constraints[2].mirror, 1u);
  const Vector z = Vector::Constant(1, 0.5);
  EXPECT_DOUBLE_EQ(evaluate_constraint(ps.constraints[1], z, Vector::Zero(1)), 0.0);
  EXPECT_DOUBLE_EQ(evaluate_constraint(ps.constraints[2], z, Vector::Zero(1)), 0.0);
}

class RandomProblemProperty : public ::testing::TestWithParam<int> {};

TEST_P(RandomProblemProperty, ConstraintsAreConvexInDecision) {
  std::mt19937_64 rng(100 + GetParam());
  const auto ps = testing::random_instance(rng, {5, 4, 3, true});
  std::normal_distribution<double> gauss(0.0, 2.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int probe = 0; probe < 20; ++probe) {
    Vector z1(5), z2(5);
    for (int k = 0; k < 5; ++k) {
      z1(k) = gauss(rng);
      z2(k) = gauss(rng);
    }
    const double t = unit(rng);
    for (const auto& c : ps.constraints) {
      for (const auto& xi : ps.scenarios.points()) {
        const double mid = evaluate_constraint(c, t * z1 + (1.0 - t) * z2, xi);
        const double chord = t * evaluate_constraint(c, z1, xi) + (1.0 - t) * evaluate_constraint(c, z2, xi);
        EXPECT_LE(mid, chord + 1e-9);
      }
    }
  }
}

TEST_P(RandomProblemProperty, ObjectiveIsStronglyConvex) {
  std::mt19937_64 rng(200 + GetParam());
  const auto ps = testing::random_instance(rng, {4, 2, 2, false});
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(2.0 * ps.objective.quadratic);
  const double mu = eig.eigenvalues().minCoeff();
  ASSERT_GT(mu, 0.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int probe = 0; probe < 20; ++probe) {
    Vector z(4), v(4);
    for (int k = 0; k < 4; ++k) {
      z(k) = gauss(rng);
      v(k) = gauss(rng);
    }
    const double lhs = evaluate_objective(ps.objective, z + v);
    const double rhs =
        evaluate_objective(ps.objective, z) + ps.objective.gradient(z).dot(v) + 0.5 * mu * v.squaredNorm();
    EXPECT_GE(lhs, rhs - 1e-9 * (1.0 + std::abs(lhs)));
  }
}

TEST_P(RandomProblemProperty, WeightsFormDistribution) {
  std::mt19937_64 rng(300 + GetParam());
  const auto ps = testing::random_instance(rng, {2, 1, 5, false});
  double total = 0.0;
  for (double w : ps.scenarios.weights()) {
    EXPECT_GE(w, 0.0);
    total += w;
  }
  EXPECT_NEAR(total, 1.0, 1e-12);
  const std::vector<double> masses{3.0, 1.0, 0.0, 4.0};
  std::vector<Vector> points(4, Vector::Zero(1));
  const auto set = build_scenario_set(points, [](const Vector&) { return 2.0; }, masses);
  total = 0.0;
  for (double w : set.weights()) {
    EXPECT_GE(w, 0.0);
    total += w;
  }
  EXPECT_NEAR(total, 1.0, 1e-12);
}

INSTANTIATE_TEST_SUITE_P(Seeds, RandomProblemProperty, ::testing::Range(0, 5));

}  // namespace
}  // namespace resilia
