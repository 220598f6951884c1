#include "resilia/resilient.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "resilia/scenario_program.hpp"

namespace resilia {

namespace {

using Kind = RowDirective::Kind;

std::vector<std::size_t> soft_rows(const ProblemSpec& ps) {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < ps.constraint_count(); ++i) {
    if (ps.constraints[i].soft && !ps.constraints[i].mirror) {
      rows.push_back(i);
    }
  }
  return rows;
}

Matrix submatrix(const Matrix& g, const std::vector<std::size_t>& rows) {
  const auto k = static_cast<Eigen::Index>(rows.size());
  Matrix out(k, k);
  for (Eigen::Index a = 0; a < k; ++a) {
    for (Eigen::Index b = 0; b < k; ++b) {
      out(a, b) = g(static_cast<Eigen::Index>(rows[static_cast<std::size_t>(a)]),
                    static_cast<Eigen::Index>(rows[static_cast<std::size_t>(b)]));
    }
  }
  return out;
}

void require_quadratic(const ProblemSpec& ps, const ViolationCost& h) {
  h.validate();
  if (h.kind != CostKind::quadratic) {
    throw std::invalid_argument("this operation needs a strongly convex quadratic violation cost");
  }
  if (h.dimension() != ps.constraint_count()) {
    throw std::invalid_argument("violation cost dimension must equal the constraint count");
  }
}

// min over s (≥ 0 in nonnegative mode) of sᵀ G s − yᵀ s.
double slack_conjugate(const Matrix& g, const Vector& y, SlackSign sign) {
  if (y.size() == 0) {
    return 0.0;
  }
  const Matrix sym = 0.5 * (g + g.transpose());
  if (sign == SlackSign::free) {
    return -0.25 * y.dot(sym.ldlt().solve(y));
  }
  ConvexProgram prog;
  prog.n = y.size();
  prog.hessian = (2.0 * sym).sparseView();
  prog.linear = -y;
  prog.eq_matrix.resize(0, prog.n);
  prog.eq_rhs.resize(0);
  SparseMatrix neg(prog.n, prog.n);
  neg.setIdentity();
  prog.ineq_matrix = -neg;
  prog.ineq_rhs = Vector::Zero(prog.n);
  const ConvexSolution sol = solve_convex_program(prog);
  return sol.objective;
}

// Dual function of the relaxed problem at λ: min_z [J + Σ w λ g] + Σ_j w_j min_s [h(s) − λᵀs].
double joint_dual_value(const ProblemSpec& ps, const ViolationCost& h, const DualMap& lam, SlackSign sign) {
  const SlackMap zero = SlackMap::zeros(ps);
  const InnerSolve inner = min_z_lagrangian(ps, lam, zero);
  double value = lagrangian(ps, inner.z, lam, zero);
  const auto soft = soft_rows(ps);
  const Matrix g = submatrix(h.gamma, soft);
  for (std::size_t j = 0; j < ps.scenario_count(); ++j) {
    Vector y(static_cast<Eigen::Index>(soft.size()));
    for (std::size_t a = 0; a < soft.size(); ++a) {
      y(static_cast<Eigen::Index>(a)) = lam.lambda(static_cast<Eigen::Index>(soft[a]), static_cast<Eigen::Index>(j));
    }
    value += ps.scenarios.weight(j) * slack_conjugate(g, y, sign);
  }
  return value;
}

double fixed_slack_dual_value(const ProblemSpec& ps, const DualMap& lam, const SlackMap& s) {
  const InnerSolve inner = min_z_lagrangian(ps, lam, s);
  return lagrangian(ps, inner.z, lam, s);
}

SolveStatus combine(SolveStatus ipm, double kkt, double tol) {
  if (ipm == SolveStatus::converged && kkt > tol) {
    return SolveStatus::max_iterations;
  }
  return ipm;
}

}  // namespace

ViolationCost ViolationCost::quadratic(Matrix gamma) {
  ViolationCost h;
  h.kind = CostKind::quadratic;
  h.gamma = std::move(gamma);
  h.validate();
  return h;
}

ViolationCost ViolationCost::identity(std::size_t m, double scale) {
  const auto k = static_cast<Eigen::Index>(m);
  return quadratic(scale * Matrix::Identity(k, k));
}

ViolationCost ViolationCost::linear(Vector gamma) {
  ViolationCost h;
  h.kind = CostKind::linear;
  h.gamma_linear = std::move(gamma);
  h.validate();
  return h;
}

ViolationCost ViolationCost::heaviside(double gamma) {
  ViolationCost h;
  h.kind = CostKind::heaviside;
  h.gamma_scalar = gamma;
  h.validate();
  return h;
}

void ViolationCost::validate() const {
  switch (kind) {
    case CostKind::quadratic: {
      if (gamma.rows() != gamma.cols() || gamma.rows() == 0) {
        throw std::invalid_argument("quadratic violation cost needs a square matrix");
      }
      if ((gamma - gamma.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
        throw std::invalid_argument("quadratic violation cost must be symmetric");
      }
      Eigen::SelfAdjointEigenSolver<Matrix> eig(gamma, Eigen::EigenvaluesOnly);
      if (!(eig.eigenvalues().minCoeff() > 0.0)) {
        throw std::invalid_argument("quadratic violation cost must be positive definite");
      }
      break;
    }
    case CostKind::linear:
      if (gamma_linear.size() == 0 || (gamma_linear.array() < 0.0).any()) {
        throw std::invalid_argument("linear violation cost needs nonnegative weights");
      }
      break;
    case CostKind::heaviside:
      if (!(gamma_scalar >= 0.0)) {
        throw std::invalid_argument("Heaviside reward must be nonnegative");
      }
      break;
  }
}

std::size_t ViolationCost::dimension() const {
  switch (kind) {
    case CostKind::quadratic:
      return static_cast<std::size_t>(gamma.rows());
    case CostKind::linear:
      return static_cast<std::size_t>(gamma_linear.size());
    case CostKind::heaviside:
      return 0;
  }
  return 0;
}

double cost_value(const ViolationCost& h, const Vector& s_row) {
  switch (h.kind) {
    case CostKind::quadratic:
      if (static_cast<std::size_t>(s_row.size()) != h.dimension()) {
        throw std::invalid_argument("slack row dimension mismatch");
      }
      return s_row.dot(h.gamma * s_row);
    case CostKind::linear:
      if (static_cast<std::size_t>(s_row.size()) != h.dimension()) {
        throw std::invalid_argument("slack row dimension mismatch");
      }
      return h.gamma_linear.dot(s_row);
    case CostKind::heaviside:
      // The reward is earned only when every slack is strictly negative.
      return (s_row.array() < 0.0).all() ? -h.gamma_scalar : 0.0;
  }
  return 0.0;
}

Vector cost_gradient(const ViolationCost& h, const Vector& s_row) {
  if (static_cast<std::size_t>(s_row.size()) != h.dimension()) {
    throw std::invalid_argument("slack row dimension mismatch");
  }
  if (h.kind == CostKind::quadratic) {
    return (h.gamma + h.gamma.transpose()) * s_row;
  }
  if (h.kind == CostKind::linear) {
    return h.gamma_linear;
  }
  throw std::invalid_argument("Heaviside cost has no gradient");
}

Vector grad_h_inverse(const ViolationCost& h, const Vector& y) {
  h.validate();
  if (h.kind != CostKind::quadratic) {
    throw std::invalid_argument("gradient of this violation cost is not invertible");
  }
  if (static_cast<std::size_t>(y.size()) != h.dimension()) {
    throw std::invalid_argument("dimension mismatch");
  }
  return (h.gamma + h.gamma.transpose()).ldlt().solve(y);
}

double expected_cost(const ProblemSpec& ps, const ViolationCost& h, const SlackMap& s) {
  double total = 0.0;
  for (std::size_t j = 0; j < ps.scenario_count(); ++j) {
    total += ps.scenarios.weight(j) * cost_value(h, s.s.col(static_cast<Eigen::Index>(j)));
  }
  return total;
}

ResilientSolution solve_resilient_joint(const ProblemSpec& ps, const ViolationCost& h,
                                        const ResilientOptions& options) {
  check_shapes(ps);
  require_quadratic(ps, h);
  const std::size_t m = ps.constraint_count();
  const std::size_t nsc = ps.scenario_count();
  DirectiveTable directives(m * nsc);
  for (std::size_t i = 0; i < m; ++i) {
    const bool relax = ps.constraints[i].soft && !ps.constraints[i].mirror;
    for (std::size_t j = 0; j < nsc; ++j) {
      directives[i * nsc + j].kind = relax ? Kind::slack_variable : Kind::enforce;
    }
  }
  const auto compiled =
      compile_scenario_program(ps, directives, {&h.gamma, options.sign == SlackSign::nonnegative});
  const ConvexSolution sol = solve_convex_program(compiled.program, options.interior_point);

  ResilientSolution out;
  out.z = sol.x.head(ps.dimension());
  out.s = {decode_slacks(compiled, sol)};
  out.lam = {decode_duals(compiled, sol).cwiseMax(0.0)};
  out.report.iterations = sol.iterations;
  if (sol.status == SolveStatus::infeasible) {
    out.report.status = SolveStatus::infeasible;
    out.report.primal_value = std::numeric_limits<double>::infinity();
    out.report.dual_value = std::numeric_limits<double>::quiet_NaN();
    out.report.kkt_residual = std::numeric_limits<double>::infinity();
    return out;
  }
  out.report.primal_value = evaluate_objective(ps.objective, out.z) + expected_cost(ps, h, out.s);
  out.report.dual_value = joint_dual_value(ps, h, out.lam, options.sign);
  out.report.kkt_residual = kkt_residual(ps, out.z, out.lam, out.s, options.exec).max();
  out.report.status = combine(sol.status, out.report.kkt_residual, options.kkt_tolerance);
  return out;
}

FixedSlackSolution solve_pre_fixed_slack(const ProblemSpec& ps, const SlackMap& s, const ResilientOptions& options) {
  check_shapes(ps);
  const std::size_t m = ps.constraint_count();
  const std::size_t nsc = ps.scenario_count();
  if (s.s.rows() != static_cast<Eigen::Index>(m) || s.s.cols() != static_cast<Eigen::Index>(nsc)) {
    throw std::invalid_argument("slack map must be m x N");
  }
  DirectiveTable directives(m * nsc);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < nsc; ++j) {
      directives[i * nsc + j] = {Kind::enforce, s.s(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))};
    }
  }
  const auto compiled = compile_scenario_program(ps, directives);
  const ConvexSolution sol = solve_convex_program(compiled.program, options.interior_point);

  FixedSlackSolution out;
  out.z = sol.x.head(ps.dimension());
  out.lam = {decode_duals(compiled, sol).cwiseMax(0.0)};
  out.report.iterations = sol.iterations;
  if (sol.status == SolveStatus::infeasible) {
    out.report.status = SolveStatus::infeasible;
    out.report.primal_value = std::numeric_limits<double>::infinity();
    out.report.dual_value = std::numeric_limits<double>::quiet_NaN();
    out.report.kkt_residual = std::numeric_limits<double>::infinity();
    return out;
  }
  out.report.primal_value = evaluate_objective(ps.objective, out.z);
  out.report.dual_value = fixed_slack_dual_value(ps, out.lam, s);
  out.report.kkt_residual = kkt_residual(ps, out.z, out.lam, s, options.exec).max();
  out.report.status = combine(sol.status, out.report.kkt_residual, options.kkt_tolerance);
  return out;
}

Vector positive_projection(const Vector& x, const Vector& v) {
  if (x.size() != v.size()) {
    throw std::invalid_argument("projection dimension mismatch");
  }
  Vector out(v.size());
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    if (x(k) < 0.0) {
      throw std::invalid_argument("projection base point must be nonnegative");
    }
    out(k) = x(k) > 0.0 ? v(k) : std::max(v(k), 0.0);
  }
  return out;
}

SaddleState initial_saddle_state(const ProblemSpec& ps) {
  check_shapes(ps);
  SaddleState st;
  st.z = Vector::Zero(ps.dimension());
  st.lam = DualMap::zeros(ps);
  st.s = SlackMap::zeros(ps);
  const Matrix sym = 0.5 * (ps.objective.quadratic + ps.objective.quadratic.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym, Eigen::EigenvaluesOnly);
  st.step_primal = st.step_dual = 0.5 / (1.0 + eig.eigenvalues().maxCoeff());
  return st;
}

SlackMap slack_from_duals(const ProblemSpec& ps, const ViolationCost& h, const DualMap& lam) {
  require_quadratic(ps, h);
  const auto soft = soft_rows(ps);
  SlackMap s = SlackMap::zeros(ps);
  if (soft.empty()) {
    return s;
  }
  const Matrix g = submatrix(h.gamma, soft);
  const Eigen::LDLT<Matrix> ldlt(g + g.transpose());
  for (std::size_t j = 0; j < ps.scenario_count(); ++j) {
    Vector y(static_cast<Eigen::Index>(soft.size()));
    for (std::size_t a = 0; a < soft.size(); ++a) {
      y(static_cast<Eigen::Index>(a)) = lam.lambda(static_cast<Eigen::Index>(soft[a]), static_cast<Eigen::Index>(j));
    }
    const Vector sj = ldlt.solve(y);
    for (std::size_t a = 0; a < soft.size(); ++a) {
      s.s(static_cast<Eigen::Index>(soft[a]), static_cast<Eigen::Index>(j)) = sj(static_cast<Eigen::Index>(a));
    }
  }
  return s;
}

SaddleState arrow_hurwicz_step(const ProblemSpec& ps, const ViolationCost& h, const SaddleState& state,
                               Execution exec) {
  if (!(state.step_primal > 0.0) || !(state.step_dual > 0.0)) {
    throw std::invalid_argument("step sizes must be positive");
  }
  const SlackMap implied = slack_from_duals(ps, h, state.lam);
  SaddleState next = state;
  next.z = state.z - state.step_primal * (ps.objective.gradient(state.z) +
                                          kernels::weighted_constraint_gradient(ps, state.z, state.lam.lambda, exec));
  for (std::size_t j = 0; j < ps.scenario_count(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    for (std::size_t i = 0; i < ps.constraint_count(); ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      const double l = state.lam.lambda(ii, jj);
      const double drift = evaluate_constraint(ps.constraints[i], state.z, ps.scenarios.xi(j)) - implied.s(ii, jj);
      const double dir = l > 0.0 ? drift : std::max(drift, 0.0);
      // The Euler step may overshoot zero; clip back onto the cone.
      next.lam.lambda(ii, jj) = std::max(l + state.step_dual * dir, 0.0);
    }
  }
  next.s = slack_from_duals(ps, h, next.lam);
  next.iteration = state.iteration + 1;
  return next;
}

ArrowHurwiczResult run_arrow_hurwicz(const ProblemSpec& ps, const ViolationCost& h, const SaddleState& init,
                                     double tol, int max_iter, Execution exec) {
  require_quadratic(ps, h);
  ArrowHurwiczResult out;
  out.state = init;
  out.state.s = slack_from_duals(ps, h, init.lam);
  if (std::isinf(tol) && tol > 0.0) {
    out.state = init;
    out.report.status = SolveStatus::converged;
    out.report.iterations = 0;
    out.report.kkt_residual = kkt_residual(ps, init.z, init.lam, slack_from_duals(ps, h, init.lam), exec).max();
    out.report.primal_value = evaluate_objective(ps.objective, init.z) + expected_cost(ps, h, init.s);
    out.report.dual_value = joint_dual_value(ps, h, init.lam, SlackSign::free);
    return out;
  }
  constexpr int kWindow = 50;
  double residual = kkt_residual(ps, out.state.z, out.state.lam, out.state.s, exec).max();
  double window_start = residual;
  out.residual_trace.push_back(residual);
  int k = 0;
  while (residual > tol && k < max_iter) {
    out.state = arrow_hurwicz_step(ps, h, out.state, exec);
    ++k;
    residual = kkt_residual(ps, out.state.z, out.state.lam, out.state.s, exec).max();
    out.residual_trace.push_back(residual);
    if (!std::isfinite(residual)) {
      break;
    }
    if (k % kWindow == 0) {
      if (residual > window_start) {
        out.state.step_primal *= 0.5;
        out.state.step_dual *= 0.5;
      }
      window_start = residual;
    }
  }
  out.report.iterations = k;
  out.report.kkt_residual = residual;
  out.report.status = residual <= tol ? SolveStatus::converged : SolveStatus::max_iterations;
  out.report.primal_value = evaluate_objective(ps.objective, out.state.z) + expected_cost(ps, h, out.state.s);
  out.report.dual_value = joint_dual_value(ps, h, out.state.lam, SlackSign::free);
  return out;
}

OracleResult brute_force_oracle(const ProblemSpec& ps, const ViolationCost& h, const OracleGrid& grid,
                                Execution exec) {
  check_shapes(ps);
  require_quadratic(ps, h);
  const int p = ps.dimension();
  const auto soft = soft_rows(ps);
  const std::size_t nsc = ps.scenario_count();
  const int dims = p + static_cast<int>(soft.size() * nsc);
  if (dims > 6) {
    throw std::invalid_argument("brute-force oracle is limited to six lattice dimensions");
  }
  if (grid.z_lower.size() != p || grid.z_upper.size() != p || !(grid.step > 0.0) || !(grid.s_upper >= 0.0)) {
    throw std::invalid_argument("oracle grid does not match the problem");
  }
  Vector lower(dims), upper(dims), step = Vector::Constant(dims, grid.step);
  lower << grid.z_lower, Vector::Zero(dims - p);
  upper << grid.z_upper, Vector::Constant(dims - p, grid.s_upper);

  auto unpack = [&](const Vector& x, Vector& z, SlackMap& s) {
    z = x.head(p);
    s = SlackMap::zeros(ps);
    int k = p;
    for (std::size_t j = 0; j < nsc; ++j) {
      for (std::size_t i : soft) {
        s.s(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = x(k++);
      }
    }
  };
  auto value = [&](const Vector& x) {
    Vector z;
    SlackMap s;
    unpack(x, z, s);
    for (std::size_t j = 0; j < nsc; ++j) {
      for (std::size_t i = 0; i < ps.constraint_count(); ++i) {
        if (evaluate_constraint(ps.constraints[i], z, ps.scenarios.xi(j)) >
            s.s(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))) {
          return std::numeric_limits<double>::infinity();
        }
      }
    }
    return evaluate_objective(ps.objective, z) + expected_cost(ps, h, s);
  };
  const kernels::GridResult best = kernels::grid_minimize(lower, upper, step, value, exec);

  OracleResult out;
  out.value = best.value;
  if (best.argmin.size() > 0) {
    unpack(best.argmin, out.z, out.s);
  }
  // First- and second-order growth of the objective across one lattice cell,
  // with the slack inflation needed to stay feasible after rounding z.
  const double zmax = std::max(grid.z_lower.cwiseAbs().maxCoeff(), grid.z_upper.cwiseAbs().maxCoeff());
  const Matrix q2 = ps.objective.quadratic + ps.objective.quadratic.transpose();
  const double q_norm = q2.operatorNorm();
  const double grad_j = q_norm * zmax * std::sqrt(p) + ps.objective.linear.norm();
  double lip_g = 0.0;
  for (std::size_t j = 0; j < nsc; ++j) {
    for (std::size_t i : soft) {
      const Constraint& c = ps.constraints[i];
      double l = 0.0;
      if (c.kind == ConstraintKind::affine) {
        l = c.normal(ps.scenarios.xi(j)).norm();
      } else {
        const double sn = c.selector.operatorNorm();
        l = 2.0 * sn * (sn * zmax * std::sqrt(p) + c.ball_center(ps.scenarios.xi(j)).norm());
      }
      lip_g = std::max(lip_g, l);
    }
  }
  const double g_norm = (h.gamma + h.gamma.transpose()).operatorNorm();
  const double grad_h = g_norm * grid.s_upper * std::sqrt(static_cast<double>(std::max<std::size_t>(soft.size(), 1)));
  const double dz = 0.5 * grid.step * std::sqrt(p);
  const double ds = grid.step + lip_g * dz;
  const double soft_dims = std::sqrt(static_cast<double>(std::max<std::size_t>(soft.size(), 1)));
  out.resolution_bound = grad_j * dz + 0.5 * q_norm * dz * dz + grad_h * ds * soft_dims +
                         0.5 * g_norm * ds * ds * soft_dims * soft_dims;
  return out;
}

EnumerationResult solve_mixed_enumeration(const ProblemSpec& ps, const std::vector<std::size_t>& soft,
                                          const std::vector<std::size_t>& hard, double gamma,
                                          const ViolationCost& soft_cost, Execution exec) {
  check_shapes(ps);
  const std::size_t m = ps.constraint_count();
  const std::size_t nsc = ps.scenario_count();
  if (nsc > 16) {
    throw std::invalid_argument("subset enumeration is limited to 16 scenarios");
  }
  if (!(gamma >= 0.0)) {
    throw std::invalid_argument("Heaviside reward must be nonnegative");
  }
  std::vector<int> role(m, -1);  // 0 soft, 1 hard, 2 equality
  for (std::size_t i : soft) {
    if (i >= m) throw std::invalid_argument("soft index out of range");
    role[i] = 0;
  }
  for (std::size_t i : hard) {
    if (i >= m || role[i] == 0) throw std::invalid_argument("hard index out of range or also soft");
    role[i] = 1;
  }
  for (std::size_t i = 0; i < m; ++i) {
    if (ps.constraints[i].mirror) {
      role[i] = 2;
    } else if (role[i] < 0) {
      throw std::invalid_argument("every inequality must be soft or hard");
    }
  }
  if (!soft.empty()) {
    require_quadratic(ps, soft_cost);
  }

  struct Candidate {
    bool feasible = false;
    double value = std::numeric_limits<double>::infinity();
    double probability = 0.0;
    Vector z;
    SlackMap s;
    int iterations = 0;
  };
  const std::int64_t subsets = std::int64_t{1} << nsc;
  const auto candidates = kernels::map_indices<Candidate>(
      subsets,
      [&](std::int64_t mask) {
        Candidate c;
        DirectiveTable directives(m * nsc);
        for (std::size_t j = 0; j < nsc; ++j) {
          const bool in_a = (mask >> j) & 1;
          if (in_a) {
            c.probability += ps.scenarios.weight(j);
          }
          for (std::size_t i = 0; i < m; ++i) {
            auto& d = directives[i * nsc + j];
            d.kind = role[i] == 0 ? Kind::slack_variable : (role[i] == 2 || in_a) ? Kind::enforce : Kind::omit;
          }
        }
        try {
          const auto compiled = compile_scenario_program(
              ps, directives, {soft.empty() ? nullptr : &soft_cost.gamma, true});
          const ConvexSolution sol = solve_convex_program(compiled.program);
          c.iterations = sol.iterations;
          if (sol.status == SolveStatus::converged) {
            c.feasible = true;
            c.z = sol.x.head(ps.dimension());
            c.s = {decode_slacks(compiled, sol)};
            c.value = sol.objective - gamma * c.probability;
          }
        } catch (const std::exception&) {
          c.feasible = false;
        }
        return c;
      },
      exec);

  std::int64_t best = -1;
  for (std::int64_t mask = 0; mask < subsets; ++mask) {
    const Candidate& c = candidates[static_cast<std::size_t>(mask)];
    if (!c.feasible) {
      continue;
    }
    if (best < 0) {
      best = mask;
      continue;
    }
    const Candidate& b = candidates[static_cast<std::size_t>(best)];
    if (c.value < b.value - 1e-9 || (std::abs(c.value - b.value) <= 1e-9 && c.probability > b.probability + 1e-15)) {
      best = mask;
    }
  }
  EnumerationResult out;
  if (best < 0) {
    out.report.status = SolveStatus::infeasible;
    out.report.primal_value = std::numeric_limits<double>::infinity();
    return out;
  }
  const Candidate& c = candidates[static_cast<std::size_t>(best)];
  out.z = c.z;
  out.s = c.s;
  for (std::size_t j = 0; j < nsc; ++j) {
    for (std::size_t i = 0; i < m; ++i) {
      if (role[i] != 0) {
        out.s.s(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            evaluate_constraint(ps.constraints[i], c.z, ps.scenarios.xi(j));
      }
    }
    if ((best >> j) & 1) {
      out.satisfied.push_back(j);
    }
  }
  out.achieved_delta = std::max(0.0, 1.0 - c.probability);
  out.value = c.value;
  out.report.status = SolveStatus::converged;
  out.report.primal_value = c.value;
  // The enumeration is not a convex program and carries no dual bound.
  out.report.dual_value = std::numeric_limits<double>::quiet_NaN();
  out.report.iterations = c.iterations;
  return out;
}

}  // namespace resilia
