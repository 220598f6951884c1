#include <cmath>
#include <stdexcept>

#include <gtest/gtest.h>

#include "resilia/experiments.hpp"

namespace resilia {
namespace {

ShepherdConfig quick_shepherd() {
  ShepherdConfig cfg;
  cfg.samples = 20000;
  return cfg;
}

TEST(Shepherd, SurveillanceRadius) {
  ShepherdConfig cfg;
  EXPECT_DOUBLE_EQ(cfg.surveillance_radius(), 10.0 * std::sqrt(0.9));
}

TEST(Shepherd, RejectsBadConfig) {
  ShepherdConfig cfg;
  cfg.delta = 1.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = ShepherdConfig{};
  cfg.home = Vector::Zero(3);
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(Shepherd, RobustInfeasibleWhenDeltaTooSmall) {
  ShepherdConfig cfg = quick_shepherd();
  // The 1 − δ disc then exceeds the surveillance radius.
  cfg.delta = 0.05;
  EXPECT_THROW(run_shepherd(cfg, true, false), InfeasibleError);
  EXPECT_NO_THROW(run_shepherd(cfg, false, true));
}

TEST(Shepherd, RobustIsProjectionOfHome) {
  const ShepherdConfig cfg = quick_shepherd();
  const auto out = run_shepherd(cfg, true, false);
  ASSERT_TRUE(out.robust.has_value());
  const double margin = cfg.surveillance_radius() - cfg.radius * std::sqrt(1.0 - cfg.delta);
  const Vector expected = cfg.home * (margin / cfg.home.norm());
  EXPECT_NEAR((out.robust->decision - expected).norm(), 0.0, 1e-8);
}

TEST(Shepherd, CenteredHomeStaysAtCenter) {
  ShepherdConfig cfg = quick_shepherd();
  cfg.home = Vector::Zero(2);
  const auto out = run_shepherd(cfg);
  ASSERT_TRUE(out.robust && out.resilient);
  EXPECT_NEAR(out.robust->decision.norm(), 0.0, 1e-8);
  EXPECT_NEAR(out.resilient->decision.norm(), 0.0, 1e-6);
}

TEST(Shepherd, ResilientCompromisesTowardCenter) {
  const auto out = run_shepherd(quick_shepherd());
  ASSERT_TRUE(out.robust && out.resilient);
  EXPECT_EQ(out.resilient->report.status, SolveStatus::converged);
  EXPECT_LT(out.resilient->metrics.at("distance_to_center"), out.robust->metrics.at("distance_to_center"));
  EXPECT_LT(out.resilient->metrics.at("expected_squared_violation"),
            out.robust->metrics.at("expected_squared_violation"));
  EXPECT_GE(out.resilient->slack_table.minCoeff(), 0.0);
}

TEST(ShepherdStatistics, CenterOracle) {
  ShepherdConfig cfg;
  cfg.samples = 200000;
  const auto stats = shepherd_statistics(cfg, Vector::Zero(2));
  const double R2 = cfg.radius * cfg.radius;
  const double r2 = std::pow(cfg.surveillance_radius(), 2);
  // ‖Ξ‖² is uniform on [0, R²] for an area-uniform disc.
  EXPECT_NEAR(stats.coverage_probability, r2 / R2, 3e-3);
  const double per_sheep = std::pow(R2 - r2, 3) / (3.0 * R2);
  EXPECT_NEAR(stats.expected_squared_violation, cfg.sheep_count * per_sheep, 0.03 * cfg.sheep_count * per_sheep);
  for (double d : stats.max_distance) {
    ASSERT_LE(d, cfg.radius + 1e-12);
  }
}

TEST(ShepherdStatistics, SerialMatchesParallel) {
  ShepherdConfig cfg = quick_shepherd();
  const Vector x{{1.0, -2.0}};
  const auto a = shepherd_statistics(cfg, x);
  cfg.exec = Execution::serial;
  const auto b = shepherd_statistics(cfg, x);
  EXPECT_EQ(a.max_distance, b.max_distance);
  EXPECT_DOUBLE_EQ(a.expected_squared_violation, b.expected_squared_violation);
}

TEST(Navigation, DefaultsValidate) {
  const auto cfg = NavigationConfig::defaults();
  EXPECT_NO_THROW(cfg.validate());
  EXPECT_DOUBLE_EQ(cfg.params.Ts, 0.6);
  NavigationConfig bad = cfg;
  bad.probabilities = {0.5, 0.5, 0.5, 0.5};
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(Navigation, ZeroMassBranchIsNominal) {
  const auto cfg = NavigationConfig::defaults();
  const auto branch = collision_branch(cfg.params, 0.0);
  const auto nominal = discrete_model(cfg.params);
  EXPECT_NEAR((branch.A - nominal.A).cwiseAbs().maxCoeff(), 0.0, 1e-15);
  EXPECT_NEAR((branch.B - nominal.B).cwiseAbs().maxCoeff(), 0.0, 1e-12);
}

TEST(Navigation, RobustEnforcesLightMasses) {
  const auto cases = run_navigation(NavigationConfig::defaults(), true, false);
  ASSERT_EQ(cases.size(), 4u);
  // Probabilities 0.5 + 0.4 already cover 1 − δ = 0.9.
  EXPECT_EQ(cases[0].robust->metrics.at("planned"), 1.0);
  EXPECT_EQ(cases[1].robust->metrics.at("planned"), 1.0);
  EXPECT_EQ(cases[2].robust->metrics.at("planned"), 0.0);
  EXPECT_EQ(cases[3].robust->metrics.at("planned"), 0.0);
  for (int j = 0; j < 2; ++j) {
    EXPECT_EQ(cases[j].robust->metrics.at("reaches_terminal"), 1.0);
    EXPECT_EQ(cases[j].robust->metrics.at("input_excess_total"), 0.0);
  }
}

TEST(Navigation, ResilientPlansObeyDynamics) {
  const auto cases = run_navigation(NavigationConfig::defaults(), false, true);
  for (const auto& c : cases) {
    ASSERT_TRUE(c.resilient.has_value());
    EXPECT_EQ(c.resilient->report.status, SolveStatus::converged);
    EXPECT_LE(c.resilient->metrics.at("dynamics_residual"), 1e-9);
    EXPECT_EQ(c.resilient->metrics.at("safety_violation"), 0.0);
  }
  EXPECT_LE(cases[0].resilient->metrics.at("terminal_slack"), 1e-6);
  EXPECT_GT(cases[3].resilient->metrics.at("terminal_slack"), 1e-3);
}

TEST(Navigation, Deterministic) {
  const auto a = run_navigation(NavigationConfig::defaults(), false, true);
  const auto b = run_navigation(NavigationConfig::defaults(), false, true);
  for (std::size_t j = 0; j < a.size(); ++j) {
    EXPECT_EQ(a[j].resilient->decision, b[j].resilient->decision);
  }
}

TEST(MpcWind, GustSchedule) {
  const auto cfg = MpcWindConfig::defaults();
  EXPECT_EQ(cfg.wind_at(-1).norm(), 0.0);
  EXPECT_EQ(cfg.wind_at(1).norm(), 0.0);
  EXPECT_DOUBLE_EQ(cfg.wind_at(5)(0), 0.6);
  EXPECT_EQ(cfg.wind_at(5).tail(5).norm(), 0.0);
  EXPECT_DOUBLE_EQ(cfg.wind_at(7)(0), 0.5);
}

TEST(MpcWind, CalmLoopReachesTerminal) {
  MpcWindConfig cfg = MpcWindConfig::defaults();
  cfg.gusts.clear();
  for (Mode mode : {Mode::robust, Mode::resilient}) {
    const auto res = run_mpc_wind(cfg, mode);
    EXPECT_EQ(res.note, "terminal") << to_string(mode);
    EXPECT_EQ(res.metrics.at("max_safety_violation"), 0.0);
    EXPECT_LE(res.metrics.at("max_plan_dynamics_residual"), 1e-9);
  }
}

TEST(MpcWind, GustsNeedSlack) {
  const auto cfg = MpcWindConfig::defaults();
  const auto robust = run_mpc_wind(cfg, Mode::robust);
  EXPECT_NE(robust.note, "terminal");
  const auto resilient = run_mpc_wind(cfg, Mode::resilient);
  EXPECT_EQ(resilient.note, "terminal");
  EXPECT_GT(resilient.metrics.at("max_input_slack_t5_9"), 0.0);
  EXPECT_EQ(resilient.trace.size(), static_cast<std::size_t>(resilient.metrics.at("steps")) + 1);
}

TEST(MpcWind, RejectsBadHorizon) {
  MpcWindConfig cfg = MpcWindConfig::defaults();
  cfg.horizon = 0;
  EXPECT_THROW(run_mpc_wind(cfg, Mode::resilient), std::invalid_argument);
}

}  // namespace
}  // namespace resilia
