#include "resilia/duality.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Cholesky>

#include "resilia/resilient.hpp"

namespace resilia {

namespace {

void check_maps(const ProblemSpec& ps, const Matrix& a, const char* what) {
  if (a.rows() != static_cast<Eigen::Index>(ps.constraint_count()) ||
      a.cols() != static_cast<Eigen::Index>(ps.scenario_count())) {
    throw std::invalid_argument(std::string(what) + " must be m x N");
  }
}

}  // namespace

DualMap DualMap::zeros(const ProblemSpec& ps) {
  return {Matrix::Zero(static_cast<Eigen::Index>(ps.constraint_count()),
                       static_cast<Eigen::Index>(ps.scenario_count()))};
}

SlackMap SlackMap::zeros(const ProblemSpec& ps) {
  return {Matrix::Zero(static_cast<Eigen::Index>(ps.constraint_count()),
                       static_cast<Eigen::Index>(ps.scenario_count()))};
}

double KktResidual::max() const { return std::max({stationarity, complementarity, feasibility}); }

double lagrangian(const ProblemSpec& ps, const Vector& z, const DualMap& lam, const SlackMap& s) {
  check_shapes(ps);
  check_maps(ps, lam.lambda, "dual map");
  check_maps(ps, s.s, "slack map");
  double value = evaluate_objective(ps.objective, z);
  for (std::size_t j = 0; j < ps.scenario_count(); ++j) {
    double term = 0.0;
    for (std::size_t i = 0; i < ps.constraint_count(); ++i) {
      const double l = lam.lambda(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (l != 0.0) {
        term += l * (evaluate_constraint(ps.constraints[i], z, ps.scenarios.xi(j)) -
                     s.s(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
      }
    }
    value += ps.scenarios.weight(j) * term;
  }
  return value;
}

KktResidual kkt_residual(const ProblemSpec& ps, const Vector& z, const DualMap& lam, const SlackMap& s,
                         Execution exec) {
  check_shapes(ps);
  check_maps(ps, lam.lambda, "dual map");
  check_maps(ps, s.s, "slack map");
  KktResidual r;
  const Vector grad = ps.objective.gradient(z) + kernels::weighted_constraint_gradient(ps, z, lam.lambda, exec);
  r.stationarity = grad.norm();
  for (std::size_t j = 0; j < ps.scenario_count(); ++j) {
    for (std::size_t i = 0; i < ps.constraint_count(); ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      const auto jj = static_cast<Eigen::Index>(j);
      const double gap = evaluate_constraint(ps.constraints[i], z, ps.scenarios.xi(j)) - s.s(ii, jj);
      r.complementarity = std::max(r.complementarity, std::abs(lam.lambda(ii, jj) * gap));
      r.feasibility = std::max(r.feasibility, gap);
    }
  }
  return r;
}

InnerSolve min_z_lagrangian(const ProblemSpec& ps, const DualMap& lam, const SlackMap& s, int max_iter) {
  check_shapes(ps);
  check_maps(ps, lam.lambda, "dual map");
  check_maps(ps, s.s, "slack map");
  if ((lam.lambda.array() < 0.0).any()) {
    throw std::invalid_argument("multipliers must be nonnegative");
  }
  const int p = ps.dimension();
  // Curvature is independent of z: 2Q + Σ w λ 2SᵀS over ball rows.
  Matrix hess = ps.objective.quadratic + ps.objective.quadratic.transpose();
  for (std::size_t j = 0; j < ps.scenario_count(); ++j) {
    for (std::size_t i = 0; i < ps.constraint_count(); ++i) {
      const Constraint& c = ps.constraints[i];
      const double l = lam.lambda(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (c.kind == ConstraintKind::ball && l != 0.0) {
        hess += 2.0 * ps.scenarios.weight(j) * l * c.selector.transpose() * c.selector;
      }
    }
  }
  const Eigen::LDLT<Matrix> ldlt(hess);
  InnerSolve out;
  out.z = Vector::Zero(p);
  for (out.iterations = 0; out.iterations < max_iter; ++out.iterations) {
    const Vector grad = ps.objective.gradient(out.z) +
                        kernels::weighted_constraint_gradient(ps, out.z, lam.lambda, Execution::serial);
    out.gradient_norm = grad.norm();
    if (out.gradient_norm <= 1e-10 * (1.0 + ps.objective.linear.norm())) {
      out.status = SolveStatus::converged;
      return out;
    }
    out.z -= ldlt.solve(grad);
  }
  const Vector grad = ps.objective.gradient(out.z) +
                      kernels::weighted_constraint_gradient(ps, out.z, lam.lambda, Execution::serial);
  out.gradient_norm = grad.norm();
  out.status = out.gradient_norm <= 1e-10 * (1.0 + ps.objective.linear.norm()) ? SolveStatus::converged
                                                                                 : SolveStatus::max_iterations;
  return out;
}

SensitivityResult sensitivity_check(const ProblemSpec& ps, const SlackMap& s, double h_step) {
  if (!(h_step > 0.0)) {
    throw std::invalid_argument("finite-difference step must be positive");
  }
  const FixedSlackSolution ref = solve_pre_fixed_slack(ps, s);
  if (ref.report.status != SolveStatus::converged) {
    throw std::runtime_error("reference solve did not converge");
  }
  const auto m = static_cast<Eigen::Index>(ps.constraint_count());
  const auto nsc = static_cast<Eigen::Index>(ps.scenario_count());
  SensitivityResult out;
  out.finite_difference = Matrix::Zero(m, nsc);
  out.negative_dual = -ref.lam.lambda;
  out.relative_error = Matrix::Zero(m, nsc);
  out.active.setConstant(m, nsc, false);
  const double scale = std::max(1.0, ref.lam.lambda.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < m; ++i) {
    if (ps.constraints[static_cast<std::size_t>(i)].mirror) {
      continue;
    }
    for (Eigen::Index j = 0; j < nsc; ++j) {
      SlackMap up = s;
      SlackMap down = s;
      up.s(i, j) += h_step;
      down.s(i, j) -= h_step;
      const FixedSlackSolution a = solve_pre_fixed_slack(ps, up);
      const FixedSlackSolution b = solve_pre_fixed_slack(ps, down);
      if (a.report.status != SolveStatus::converged || b.report.status != SolveStatus::converged) {
        out.finite_difference(i, j) = std::numeric_limits<double>::quiet_NaN();
        out.relative_error(i, j) = std::numeric_limits<double>::infinity();
        continue;
      }
      const double wj = ps.scenarios.weight(static_cast<std::size_t>(j));
      out.finite_difference(i, j) = (a.report.primal_value - b.report.primal_value) / (2.0 * h_step * wj);
      const double l = ref.lam.lambda(i, j);
      out.relative_error(i, j) = std::abs(out.finite_difference(i, j) + l) / std::max(std::abs(l), 1e-6);
      out.active(i, j) = l > 1e-4 * scale;
    }
  }
  return out;
}

}  // namespace resilia
