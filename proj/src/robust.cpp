#include "resilia/robust.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "resilia/resilient.hpp"
#include "resilia/scenario_program.hpp"

namespace resilia {

namespace {

using Kind = RowDirective::Kind;

RobustSolution run(const ProblemSpec& ps, const DirectiveTable& directives) {
  const auto compiled = compile_scenario_program(ps, directives);
  const ConvexSolution sol = solve_convex_program(compiled.program);
  RobustSolution out;
  out.z = sol.x.head(ps.dimension());
  out.lam = {decode_duals(compiled, sol).cwiseMax(0.0)};
  out.report.iterations = sol.iterations;
  out.report.status = sol.status;
  if (sol.status == SolveStatus::infeasible) {
    out.report.primal_value = std::numeric_limits<double>::infinity();
    out.report.dual_value = std::numeric_limits<double>::quiet_NaN();
    out.report.kkt_residual = std::numeric_limits<double>::infinity();
    return out;
  }
  // Residuals are measured against the rows actually enforced; omitted rows
  // get a shift large enough to never bind.
  SlackMap shift = SlackMap::zeros(ps);
  DualMap lam = out.lam;
  const std::size_t nsc = ps.scenario_count();
  for (std::size_t i = 0; i < ps.constraint_count(); ++i) {
    for (std::size_t j = 0; j < nsc; ++j) {
      const RowDirective& d = directives[i * nsc + j];
      const auto ii = static_cast<Eigen::Index>(i);
      const auto jj = static_cast<Eigen::Index>(j);
      if (d.kind == Kind::omit) {
        shift.s(ii, jj) = 1e300;
        lam.lambda(ii, jj) = 0.0;
      } else {
        shift.s(ii, jj) = d.shift;
      }
    }
  }
  const KktResidual r = kkt_residual(ps, out.z, lam, shift);
  out.report.primal_value = evaluate_objective(ps.objective, out.z);
  const InnerSolve inner = min_z_lagrangian(ps, lam, shift);
  out.report.dual_value = lagrangian(ps, inner.z, lam, shift);
  out.report.kkt_residual = r.max();
  return out;
}

}  // namespace

void RobustConfig::validate() const {
  if (!(delta > 0.0 && delta <= 1.0)) {
    throw std::invalid_argument("delta must lie in (0, 1]");
  }
  if (!(sigma > 0.0)) {
    throw std::invalid_argument("sigma must be positive");
  }
  if (!(lipschitz_max >= 0.0)) {
    throw std::invalid_argument("Lipschitz bound must be nonnegative");
  }
}

double compute_epsilon(const RobustConfig& cfg, std::size_t m, std::size_t d) {
  cfg.validate();
  if (m == 0 || d == 0) {
    throw std::invalid_argument("constraint count and disturbance dimension must be positive");
  }
  const double ratio = 2.0 * static_cast<double>(m) * static_cast<double>(d) / cfg.delta;
  return cfg.lipschitz_max * cfg.sigma * std::sqrt(2.0 * std::log(ratio));
}

double box_sigma(double xi_bar) {
  if (!(xi_bar > 0.0)) {
    throw std::invalid_argument("support bound must be positive");
  }
  return 0.5 * xi_bar;
}

std::size_t requirement_count(const ProblemSpec& ps) {
  std::size_t count = 0;
  for (const Constraint& c : ps.constraints) {
    count += c.mirror ? 0 : 1;
  }
  return count;
}

RobustSolution solve_robust_surrogate(const ProblemSpec& ps, double epsilon, const Vector& mean_xi) {
  check_shapes(ps);
  if (mean_xi.size() != ps.scenarios.dimension()) {
    throw std::invalid_argument("mean disturbance has the wrong dimension");
  }
  if (!(epsilon >= 0.0)) {
    throw std::invalid_argument("margin must be nonnegative");
  }
  ProblemSpec single = ps;
  single.scenarios = ScenarioSet({mean_xi}, {1.0}, {1.0});
  single.slater_point.reset();
  DirectiveTable directives(ps.constraint_count());
  for (std::size_t i = 0; i < ps.constraint_count(); ++i) {
    directives[i] = {Kind::enforce, ps.constraints[i].mirror ? 0.0 : -epsilon};
  }
  RobustSolution out = run(single, directives);
  out.epsilon = epsilon;
  return out;
}

RobustSolution solve_robust_surrogate(const ProblemSpec& ps, const RobustConfig& cfg) {
  const double eps = compute_epsilon(cfg, requirement_count(ps), static_cast<std::size_t>(ps.scenarios.dimension()));
  const Vector mean = cfg.mean_xi.size() > 0 ? cfg.mean_xi : ps.scenarios.mean();
  return solve_robust_surrogate(ps, eps, mean);
}

RobustSolution solve_worst_case(const ProblemSpec& ps) {
  check_shapes(ps);
  return run(ps, DirectiveTable(ps.constraint_count() * ps.scenario_count()));
}

ChanceSolution solve_scenario_chance(const ProblemSpec& ps, double delta, Execution exec) {
  check_shapes(ps);
  const std::size_t nsc = ps.scenario_count();
  const std::size_t m = ps.constraint_count();
  if (nsc > 16) {
    throw std::invalid_argument("subset enumeration is limited to 16 scenarios");
  }
  if (!(delta >= 0.0 && delta <= 1.0)) {
    throw std::invalid_argument("delta must lie in [0, 1]");
  }
  const std::int64_t subsets = std::int64_t{1} << nsc;
  auto directives_for = [&](std::int64_t mask) {
    DirectiveTable d(m * nsc);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < nsc; ++j) {
        const bool in_a = (mask >> j) & 1;
        d[i * nsc + j].kind = (in_a || ps.constraints[i].mirror) ? Kind::enforce : Kind::omit;
      }
    }
    return d;
  };
  auto probability = [&](std::int64_t mask) {
    double p = 0.0;
    for (std::size_t j = 0; j < nsc; ++j) {
      if ((mask >> j) & 1) {
        p += ps.scenarios.weight(j);
      }
    }
    return p;
  };
  const auto solutions = kernels::map_indices<RobustSolution>(
      subsets,
      [&](std::int64_t mask) {
        RobustSolution r;
        r.report.status = SolveStatus::infeasible;
        r.report.primal_value = std::numeric_limits<double>::infinity();
        if (probability(mask) < 1.0 - delta - 1e-12) {
          return r;
        }
        try {
          return run(ps, directives_for(mask));
        } catch (const std::exception&) {
          return r;
        }
      },
      exec);
  std::int64_t best = -1;
  for (std::int64_t mask = 0; mask < subsets; ++mask) {
    const RobustSolution& r = solutions[static_cast<std::size_t>(mask)];
    if (r.report.status != SolveStatus::converged) {
      continue;
    }
    if (best < 0) {
      best = mask;
      continue;
    }
    const double vb = solutions[static_cast<std::size_t>(best)].report.primal_value;
    if (r.report.primal_value < vb - 1e-9 ||
        (std::abs(r.report.primal_value - vb) <= 1e-9 && probability(mask) > probability(best) + 1e-15)) {
      best = mask;
    }
  }
  ChanceSolution out;
  if (best < 0) {
    out.solution.report.status = SolveStatus::infeasible;
    out.solution.report.primal_value = std::numeric_limits<double>::infinity();
    return out;
  }
  out.solution = solutions[static_cast<std::size_t>(best)];
  out.probability = probability(best);
  for (std::size_t j = 0; j < nsc; ++j) {
    if ((best >> j) & 1) {
      out.enforced.push_back(j);
    }
  }
  return out;
}

ViolationEstimate estimate_violation_probability(const ProblemSpec& ps, const Vector& z, const Sampler& sampler,
                                                 std::int64_t n, std::uint64_t seed, Execution exec, double tol) {
  check_shapes(ps);
  if (z.size() != ps.dimension() || sampler.dimension() != ps.scenarios.dimension()) {
    throw std::invalid_argument("decision or sampler dimension mismatch");
  }
  const std::int64_t ok = kernels::monte_carlo_count(
      sampler,
      [&](const Vector& xi) {
        for (const Constraint& c : ps.constraints) {
          if (evaluate_constraint(c, z, xi) > tol) {
            return false;
          }
        }
        return true;
      },
      n, seed, exec);
  ViolationEstimate out;
  out.samples = n;
  out.p_hat = static_cast<double>(ok) / static_cast<double>(n);
  out.ci_halfwidth = 1.96 * std::sqrt(out.p_hat * (1.0 - out.p_hat) / static_cast<double>(n));
  return out;
}

}  // namespace resilia
