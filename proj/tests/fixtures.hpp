#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "resilia/problem.hpp"

namespace resilia::testing {

/// J = z², one scenario of unit weight and density, g = 1 − z.
inline ProblemSpec one_d_fixture() {
  ProblemSpec ps;
  ps.objective = {Matrix::Identity(1, 1), Vector::Zero(1), 0.0};
  ps.constraints.push_back(Constraint::affine_row(Vector::Constant(1, -1.0), -1.0));
  ps.scenarios = ScenarioSet({Vector::Zero(1)}, {1.0}, {1.0});
  return ps;
}

/// J = z², rows z ≤ −1 and z ≥ 1 on one scenario.
inline ProblemSpec contradictory_fixture() {
  ProblemSpec ps;
  ps.objective = {Matrix::Identity(1, 1), Vector::Zero(1), 0.0};
  ps.constraints.push_back(Constraint::affine_row(Vector::Constant(1, 1.0), -1.0));
  ps.constraints.push_back(Constraint::affine_row(Vector::Constant(1, -1.0), -1.0));
  ps.scenarios = ScenarioSet({Vector::Zero(1)}, {1.0}, {1.0});
  return ps;
}

/// Shepherd-like: min ‖x − home‖² s.t. ‖x − ξ‖² ≤ r² on three sheep positions.
inline ProblemSpec shepherd_three(double radius_sq = 1.0) {
  ProblemSpec ps;
  ps.objective = Objective::squared_distance(Vector{{2.5, 0.0}});
  Constraint ball = Constraint::ball(Matrix::Identity(2, 2), Vector::Zero(2), radius_sq);
  ball.center_xi = Matrix::Identity(2, 2);
  ball.lipschitz = 4.0;
  ps.constraints.push_back(ball);
  ps.scenarios = ScenarioSet({Vector{{0.0, 0.5}}, Vector{{-0.4, -0.3}}, Vector{{0.3, -0.6}}}, {0.5, 0.3, 0.2},
                             {1.0, 1.0, 1.0});
  return ps;
}

/// One sheep uniform on the unit disc, home at (1.2, 0). L bounds the
/// ∞-norm Lipschitz constant of ‖x − ξ‖² in ξ over ‖x‖ ≤ 1, ‖ξ‖ ≤ 1.
inline ProblemSpec unit_disc_shepherd(double radius_sq) {
  ProblemSpec ps;
  ps.objective = Objective::squared_distance(Vector{{1.2, 0.0}});
  Constraint ball = Constraint::ball(Matrix::Identity(2, 2), Vector::Zero(2), radius_sq);
  ball.center_xi = Matrix::Identity(2, 2);
  ball.lipschitz = 4.0 * std::sqrt(2.0);
  ps.constraints.push_back(ball);
  ps.scenarios = disc_ring_grid(Vector::Zero(2), 1.0, 4);
  return ps;
}

struct RandomShape {
  int p = 3;
  int m = 2;
  int scenarios = 3;
  bool with_ball = true;
};

/// Strongly convex instance with a strict Slater point and ξ-dependent rows.
/// The objective's target sits away from the Slater point so rows bind.
inline ProblemSpec random_instance(std::mt19937_64& rng, const RandomShape& shape) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.1, 1.0);
  auto randn = [&](Eigen::Index rows, Eigen::Index cols) {
    Matrix out(rows, cols);
    for (Eigen::Index i = 0; i < out.size(); ++i) {
      out.data()[i] = gauss(rng);
    }
    return out;
  };
  const int p = shape.p;
  const int d = 2;
  ProblemSpec ps;
  const Matrix M = randn(p, p);
  const Matrix Q = 0.5 * M.transpose() * M + 0.5 * Matrix::Identity(p, p);
  const Vector target = 3.0 * randn(p, 1);
  ps.objective = {Q, -2.0 * Q * target, target.dot(Q * target)};

  std::vector<Vector> points;
  std::vector<double> weights;
  std::vector<double> densities;
  for (int j = 0; j < shape.scenarios; ++j) {
    points.push_back(randn(d, 1));
    weights.push_back(unit(rng));
    densities.push_back(unit(rng));
  }
  double total = 0.0;
  for (double w : weights) {
    total += w;
  }
  for (double& w : weights) {
    w /= total;
  }
  const Vector slater = randn(p, 1);
  for (int i = 0; i < shape.m; ++i) {
    const bool ball = shape.with_ball && i == shape.m - 1;
    Constraint c;
    if (ball) {
      c = Constraint::ball(Matrix::Identity(p, p), randn(p, 1), 0.0);
      c.center_xi = 0.3 * randn(p, d);
      double worst = 0.0;
      for (const auto& xi : points) {
        worst = std::max(worst, (slater - c.ball_center(xi)).squaredNorm());
      }
      c.radius_sq = worst + 0.5 + unit(rng);
    } else {
      c = Constraint::affine_row(randn(p, 1), 0.0);
      c.a_xi = 0.3 * randn(p, d);
      c.b_xi = 0.3 * randn(d, 1);
      double worst = -1e300;
      for (const auto& xi : points) {
        worst = std::max(worst, c.normal(xi).dot(slater) - c.b_xi.dot(xi));
      }
      c.b = worst + 0.2 + unit(rng);
    }
    c.lipschitz = 1.0;
    ps.constraints.push_back(std::move(c));
  }
  ps.scenarios = ScenarioSet(std::move(points), std::move(weights), std::move(densities));
  ps.slater_point = slater;
  return ps;
}

}  // namespace resilia::testing
