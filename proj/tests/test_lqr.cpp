#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "resilia/lqr.hpp"
#include "resilia/quadrotor.hpp"
#include "resilia/robust.hpp"

namespace resilia {
namespace {

const ScenarioSet& nominal() {
  static const ScenarioSet set({Vector::Zero(1)}, {1.0}, {1.0});
  return set;
}

LqrProblem double_integrator(int N, double u_max) {
  LqrProblem p;
  p.A = Matrix{{1.0, 1.0}, {0.0, 1.0}};
  p.B = Matrix{{0.5}, {1.0}};
  p.W = Matrix::Zero(2, 1);
  p.Q = Matrix::Identity(2, 2);
  p.R = Matrix::Identity(1, 1);
  p.P_term = 2.0 * Matrix::Identity(2, 2);
  p.x0 = Vector{{3.0, 0.0}};
  p.N = N;
  p.x_bound = Box::unbounded(2);
  p.u_bound = Box::symmetric(Vector::Constant(1, u_max));
  p.disturbance = Vector::Zero(1);
  return p;
}

struct CondensedOptimum {
  Vector u;
  double value = std::numeric_limits<double>::infinity();
};

/// Condenses the horizon into a QP over the inputs and enumerates every face
/// of the input box; the cheapest feasible face minimizer is the optimum.
CondensedOptimum condensed_box_qp(const LqrProblem& p) {
  const int N = p.N;
  const Eigen::Index n = p.A.rows();
  // x_k = Φ_k x0 + G_k u.
  std::vector<Matrix> G(N + 1, Matrix::Zero(n, N));
  std::vector<Vector> free(N + 1);
  free[0] = p.x0;
  for (int k = 0; k < N; ++k) {
    free[k + 1] = p.A * free[k];
    G[k + 1] = p.A * G[k];
    G[k + 1].col(k) += p.B.col(0);
  }
  Matrix H = p.R(0, 0) * Matrix::Identity(N, N);
  Vector f = Vector::Zero(N);
  double c = 0.0;
  for (int k = 0; k <= N; ++k) {
    const Matrix& Qk = k == N ? p.P_term : p.Q;
    H += G[k].transpose() * Qk * G[k];
    f += G[k].transpose() * Qk * free[k];
    c += free[k].dot(Qk * free[k]);
  }
  CondensedOptimum best;
  const double ub = p.u_bound.upper(0);
  int faces = 1;
  for (int k = 0; k < N; ++k) {
    faces *= 3;
  }
  for (int code = 0; code < faces; ++code) {
    Vector u = Vector::Zero(N);
    std::vector<int> open;
    int rest = code;
    for (int k = 0; k < N; ++k) {
      const int state = rest % 3;
      rest /= 3;
      if (state == 0) {
        open.push_back(k);
      } else {
        u(k) = state == 1 ? -ub : ub;
      }
    }
    if (!open.empty()) {
      const auto m = static_cast<Eigen::Index>(open.size());
      Matrix Hff(m, m);
      Vector rhs(m);
      for (Eigen::Index a = 0; a < m; ++a) {
        rhs(a) = -f(open[a]);
        for (int k = 0; k < N; ++k) {
          if (std::find(open.begin(), open.end(), k) == open.end()) {
            rhs(a) -= H(open[a], k) * u(k);
          }
        }
        for (Eigen::Index b = 0; b < m; ++b) {
          Hff(a, b) = H(open[a], open[b]);
        }
      }
      const Vector uf = Hff.ldlt().solve(rhs);
      for (Eigen::Index a = 0; a < m; ++a) {
        u(open[a]) = uf(a);
      }
    }
    if ((u.array().abs() > ub + 1e-12).any()) {
      continue;
    }
    const double value = u.dot(H * u) + 2.0 * f.dot(u) + c;
    if (value < best.value) {
      best = {u, value};
    }
  }
  return best;
}

TEST(Box, ContainsAndViolation) {
  const Box b{Vector{{-1.0, 0.0}}, Vector{{1.0, 2.0}}};
  EXPECT_TRUE(b.contains(Vector{{0.0, 1.0}}));
  EXPECT_FALSE(b.contains(Vector{{0.0, 2.5}}));
  EXPECT_DOUBLE_EQ(b.violation(Vector{{0.0, 2.5}}), 0.5);
  EXPECT_DOUBLE_EQ(b.violation(Vector{{-3.0, 2.5}}), 2.0);
  EXPECT_EQ(b.violation(Vector{{0.5, 0.5}}), 0.0);
  EXPECT_TRUE(Box::unbounded(3).contains(Vector::Constant(3, 1e200)));
}

TEST(Dare, ZeroDynamicsGiveStateCost) {
  const Matrix Q{{2.0, 0.5}, {0.5, 1.0}};
  const Matrix P = solve_dare(Matrix::Zero(2, 2), Matrix::Identity(2, 1), Q, Matrix::Identity(1, 1));
  EXPECT_NEAR((P - Q).cwiseAbs().maxCoeff(), 0.0, 1e-12);
}

TEST(Dare, ScalarGoldenRatio) {
  const Matrix one = Matrix::Identity(1, 1);
  const Matrix P = solve_dare(one, one, one, one);
  // p = p − p²/(1 + p) + 1 reduces to p² − p − 1 = 0.
  EXPECT_NEAR(P(0, 0), (1.0 + std::sqrt(5.0)) / 2.0, 1e-12);
}

TEST(Dare, StabilizesQuadrotor) {
  QuadrotorParams params;
  params.Ts = 0.5;
  const auto d = discrete_model(params);
  const Matrix Q = Matrix::Identity(12, 12);
  const Matrix R = Matrix::Identity(4, 4);
  const Matrix P = solve_dare(d.A, d.B, Q, R);
  EXPECT_EQ((P - P.transpose()).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_LE(dare_residual(d.A, d.B, Q, R, P), 1e-9);
  const Matrix cl = dare_closed_loop(d.A, d.B, R, P);
  EXPECT_LT(cl.eigenvalues().cwiseAbs().maxCoeff(), 1.0);
  EXPECT_GE(Eigen::SelfAdjointEigenSolver<Matrix>(P).eigenvalues().minCoeff(), 0.0);
}

TEST(Dare, ResidualDetectsWrongSolution) {
  const Matrix one = Matrix::Identity(1, 1);
  EXPECT_GT(dare_residual(one, one, one, one, 2.0 * one), 1e-3);
}

TEST(Lowering, SmallestInstance) {
  LqrProblem p;
  p.A = Matrix::Constant(1, 1, 0.9);
  p.B = Matrix::Constant(1, 1, 1.0);
  p.W = Matrix::Zero(1, 1);
  p.Q = Matrix::Identity(1, 1);
  p.R = Matrix::Identity(1, 1);
  p.P_term = Matrix::Identity(1, 1);
  p.x0 = Vector::Constant(1, 1.0);
  p.N = 1;
  p.x_bound = Box::symmetric(Vector::Constant(1, 5.0));
  p.u_bound = Box::symmetric(Vector::Constant(1, 0.5));
  p.disturbance = Vector::Zero(1);
  const auto lowered = lower_to_problem_spec(p, nominal());
  int dynamics = 0;
  int boxes = 0;
  for (const auto& row : lowered.rows) {
    (row.family == RowFamily::dynamics ? dynamics : boxes) += 1;
  }
  EXPECT_EQ(dynamics, 2);
  EXPECT_EQ(boxes, 2);
  EXPECT_EQ(lowered.spec.dimension(), 2);
  EXPECT_TRUE(lowered.spec.constraints[0].mirror.has_value());
  EXPECT_FALSE(lowered.spec.constraints[0].soft);
}

TEST(Lowering, DoubleIntegratorMatchesCondensedQp) {
  for (double u_max : {10.0, 0.6, 0.3}) {
    const auto p = double_integrator(3, u_max);
    const auto lowered = lower_to_problem_spec(p, nominal());
    const auto sol = solve_worst_case(lowered.spec);
    ASSERT_EQ(sol.report.status, SolveStatus::converged);
    const auto oracle = condensed_box_qp(p);
    const auto plan = extract_plan(lowered, sol.z, p.x0);
    ASSERT_EQ(plan.size(), 1u);
    EXPECT_NEAR(sol.report.primal_value, oracle.value, 1e-8 * std::max(1.0, oracle.value));
    EXPECT_LE((plan[0].inputs.row(0).transpose() - oracle.u).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LE(dynamics_residual(p, {}, plan), 1e-10);
  }
}

TEST(Lowering, ActiveBoundsAreRespected) {
  const auto p = double_integrator(3, 0.3);
  const auto lowered = lower_to_problem_spec(p, nominal());
  const auto sol = solve_worst_case(lowered.spec);
  const auto plan = extract_plan(lowered, sol.z, p.x0);
  EXPECT_LE(plan[0].inputs.cwiseAbs().maxCoeff(), 0.3 + 1e-9);
  EXPECT_NEAR(plan[0].inputs(0, 0), -0.3, 1e-8);
}

TEST(Lowering, WaypointAndTerminalRows) {
  auto p = double_integrator(4, 10.0);
  Box wp = Box::unbounded(2);
  wp.upper(0) = 1.0;
  p.waypoints.push_back({2, wp});
  p.terminal_set = Box::symmetric(Vector{{0.1, 0.1}});
  p.slack.terminal = false;
  const auto lowered = lower_to_problem_spec(p, nominal());
  const auto sol = solve_worst_case(lowered.spec);
  ASSERT_EQ(sol.report.status, SolveStatus::converged);
  const auto plan = extract_plan(lowered, sol.z, p.x0);
  EXPECT_LE(plan[0].states(0, 2), 1.0 + 1e-8);
  EXPECT_LE(plan[0].states.col(4).cwiseAbs().maxCoeff(), 0.1 + 1e-8);
  for (std::size_t i = 0; i < lowered.rows.size(); ++i) {
    if (lowered.rows[i].family == RowFamily::terminal) {
      EXPECT_FALSE(lowered.spec.constraints[i].soft);
      EXPECT_EQ(lowered.rows[i].k, 4);
    }
  }
}

TEST(Lowering, IdenticalBranchesReproduceUnbranchedPlan) {
  const auto p = double_integrator(4, 0.5);
  const std::vector<double> probs{0.3, 0.7};
  Coupling coupling;
  coupling.branch_instant = 2;
  for (int j = 0; j < 2; ++j) {
    coupling.branches.push_back({p.A, p.B, Matrix::Identity(2, 2), Vector::Zero(2)});
  }
  const auto branched = lower_to_problem_spec(p, one_hot_scenarios(probs), coupling);
  const auto flat = lower_to_problem_spec(p, nominal());
  const auto a = solve_worst_case(branched.spec);
  const auto b = solve_worst_case(flat.spec);
  ASSERT_EQ(a.report.status, SolveStatus::converged);
  EXPECT_NEAR(a.report.primal_value, b.report.primal_value, 1e-8);
  const auto pa = extract_plan(branched, a.z, p.x0);
  const auto pb = extract_plan(flat, b.z, p.x0);
  ASSERT_EQ(pa.size(), 2u);
  for (const auto& plan : pa) {
    EXPECT_LE((plan.inputs - pb[0].inputs).cwiseAbs().maxCoeff(), 1e-7);
  }
}

TEST(Lowering, PreBranchVariablesAreShared) {
  const auto p = double_integrator(5, 1.0);
  Coupling coupling;
  coupling.branch_instant = 3;
  coupling.branches.push_back({p.A, p.B, Matrix::Identity(2, 2), Vector::Zero(2)});
  coupling.branches.push_back({p.A, 0.5 * p.B, Vector{{1.0, 0.5}}.asDiagonal(), Vector::Zero(2)});
  const auto lowered = lower_to_problem_spec(p, one_hot_scenarios(std::vector<double>{0.5, 0.5}), coupling);
  const auto& lay = lowered.layout;
  for (int k = 1; k < 3; ++k) {
    EXPECT_EQ(lay.state_index(k, 0), lay.state_index(k, 1));
  }
  for (int k = 0; k < 3; ++k) {
    EXPECT_EQ(lay.input_index(k, 0), lay.input_index(k, 1));
  }
  for (int k = 3; k <= 5; ++k) {
    EXPECT_NE(lay.state_index(k, 0), lay.state_index(k, 1));
  }
  EXPECT_EQ(lay.dimension, 2 * 2 + 3 * 1 + 2 * (3 * 2 + 2 * 1));
  const auto sol = solve_worst_case(lowered.spec);
  ASSERT_EQ(sol.report.status, SolveStatus::converged);
  const auto plan = extract_plan(lowered, sol.z, p.x0);
  EXPECT_LE(dynamics_residual(p, coupling, plan), 1e-7);
  // The reset scales the second branch's velocity at the branch instant.
  const Vector pre = p.A * plan[1].states.col(2) + p.B * plan[1].inputs.col(2);
  EXPECT_NEAR(plan[1].states(1, 3), 0.5 * pre(1), 1e-8);
}

TEST(Lowering, RejectsInconsistentCoupling) {
  const auto p = double_integrator(3, 1.0);
  Coupling coupling;
  coupling.branch_instant = 5;
  coupling.branches.push_back({p.A, p.B, Matrix::Identity(2, 2), Vector::Zero(2)});
  const auto set = one_hot_scenarios(std::vector<double>{1.0});
  EXPECT_THROW(lower_to_problem_spec(p, set, coupling), std::invalid_argument);
  coupling.branch_instant = 2;
  EXPECT_THROW(lower_to_problem_spec(p, one_hot_scenarios(std::vector<double>{0.5, 0.5}), coupling),
               std::invalid_argument);
}

TEST(LqrProblem, RejectsBadCostMatrices) {
  auto p = double_integrator(3, 1.0);
  p.R = Matrix::Zero(1, 1);
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = double_integrator(3, 1.0);
  p.Q(0, 1) = 0.3;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = double_integrator(3, 1.0);
  p.x0 = Vector::Zero(3);
  EXPECT_THROW(p.validate(), std::invalid_argument);
}

TEST(Mpc, RestingAtEquilibrium) {
  auto p = double_integrator(5, 0.1);
  p.terminal_set = Box::symmetric(Vector{{0.1, 0.1}});
  const auto step = mpc_step(p, Vector::Zero(2), Vector::Zero(1), Mode::resilient, ViolationCost::identity(1));
  ASSERT_EQ(step.report.status, SolveStatus::converged);
  EXPECT_LE(step.u_apply.norm(), 1e-8);
  EXPECT_LE(step.plan.states.cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Mpc, ResilientRelaxesThrustUnderPush) {
  auto p = double_integrator(4, 0.05);
  p.W = Matrix{{0.0}, {1.0}};
  p.terminal_set = Box::symmetric(Vector{{0.2, 0.2}});
  p.slack = {false, false, true, false, false};
  const Vector push = Vector::Constant(1, 0.15);
  const auto robust = mpc_step(p, Vector::Zero(2), push, Mode::robust, ViolationCost::identity(1));
  const auto resilient = mpc_step(p, Vector::Zero(2), push, Mode::resilient, ViolationCost::identity(1));
  EXPECT_EQ(robust.report.status, SolveStatus::infeasible);
  EXPECT_TRUE(robust.plan.states.hasNaN());
  ASSERT_EQ(resilient.report.status, SolveStatus::converged);
  EXPECT_GT(family_slack(resilient.lowered, resilient.slack, RowFamily::input, 0), 1e-6);
  EXPECT_LE(resilient.plan.states.col(4).cwiseAbs().maxCoeff(), 0.2 + 1e-8);
}

TEST(Mpc, Deterministic) {
  auto p = double_integrator(6, 0.2);
  p.terminal_set = Box::symmetric(Vector{{0.1, 0.1}});
  const Vector x{{1.0, -0.5}};
  const auto a = mpc_step(p, x, Vector::Zero(1), Mode::resilient, ViolationCost::identity(1));
  const auto b = mpc_step(p, x, Vector::Zero(1), Mode::resilient, ViolationCost::identity(1));
  EXPECT_EQ(a.u_apply, b.u_apply);
  EXPECT_EQ(a.plan.states, b.plan.states);
}

TEST(FamilySlack, MaxAndNorm) {
  auto p = double_integrator(4, 0.05);
  p.W = Matrix{{0.0}, {1.0}};
  p.terminal_set = Box::symmetric(Vector{{0.2, 0.2}});
  p.slack = {false, false, true, false, false};
  const auto r = mpc_step(p, Vector::Zero(2), Vector::Constant(1, 0.15), Mode::resilient,
                          ViolationCost::identity(1));
  double max = 0.0;
  double sq = 0.0;
  for (std::size_t i = 0; i < r.lowered.rows.size(); ++i) {
    if (r.lowered.rows[i].family == RowFamily::input) {
      const double s = r.slack.s(static_cast<Eigen::Index>(i), 0);
      max = std::max(max, s);
      sq += s * s;
    }
  }
  EXPECT_DOUBLE_EQ(family_slack(r.lowered, r.slack, RowFamily::input, 0), max);
  EXPECT_NEAR(family_slack_norm(r.lowered, r.slack, RowFamily::input, 0), std::sqrt(sq), 1e-15);
}

}  // namespace
}  // namespace resilia
