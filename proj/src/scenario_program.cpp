#include "resilia/scenario_program.hpp"

#include <algorithm>
#include <stdexcept>
#include <vector>

namespace resilia {

namespace {

using Triplet = Eigen::Triplet<double>;
using Kind = RowDirective::Kind;
using Source = CompiledScenarioProgram::DualSource;

void push_row(std::vector<Triplet>& triplets, Eigen::Index row, const Vector& coeffs, double sign = 1.0) {
  for (Eigen::Index k = 0; k < coeffs.size(); ++k) {
    if (coeffs(k) != 0.0) {
      triplets.emplace_back(row, k, sign * coeffs(k));
    }
  }
}

SparseMatrix to_sparse(const Matrix& dense) {
  SparseMatrix sparse = dense.sparseView(1.0, 0.0);
  sparse.makeCompressed();
  return sparse;
}

}  // namespace

CompiledScenarioProgram compile_scenario_program(const ProblemSpec& ps, const DirectiveTable& directives,
                                                 const SlackCostSpec& cost) {
  check_shapes(ps);
  const std::size_t m = ps.constraint_count();
  const std::size_t nsc = ps.scenario_count();
  const int p = ps.dimension();
  if (directives.size() != m * nsc) {
    throw std::invalid_argument("directive table must be m x N");
  }
  for (std::size_t j = 0; j < nsc; ++j) {
    if (!(ps.scenarios.weight(j) > 0.0)) {
      throw std::invalid_argument("scenarios with zero weight carry no multiplier");
    }
  }
  auto dir = [&](std::size_t i, std::size_t j) -> const RowDirective& { return directives[i * nsc + j]; };

  CompiledScenarioProgram out;
  out.primal_dimension = p;
  out.constraints = m;
  out.scenarios = nsc;
  out.slack_index = Eigen::MatrixXi::Constant(static_cast<int>(m), static_cast<int>(nsc), -1);
  out.dual_source.assign(m * nsc, Source{});

  // Slack variables follow z, scenario-major.
  Eigen::Index n = p;
  for (std::size_t j = 0; j < nsc; ++j) {
    for (std::size_t i = 0; i < m; ++i) {
      if (dir(i, j).kind == Kind::slack_variable) {
        if (cost.gamma == nullptr) {
          throw std::invalid_argument("slack variables need a violation cost");
        }
        if (ps.constraints[i].mirror) {
          throw std::invalid_argument("equality rows cannot be relaxed");
        }
        out.slack_index(static_cast<int>(i), static_cast<int>(j)) = static_cast<int>(n++);
      }
    }
  }

  ConvexProgram& prog = out.program;
  prog.n = n;

  // Objective: J(z) + Σ_j w_j s_jᵀ Γ s_j.
  std::vector<Triplet> hess;
  const Matrix q2 = ps.objective.quadratic + ps.objective.quadratic.transpose();
  for (int r = 0; r < p; ++r) {
    for (int c = 0; c < p; ++c) {
      if (q2(r, c) != 0.0) {
        hess.emplace_back(r, c, q2(r, c));
      }
    }
  }
  if (cost.gamma != nullptr) {
    const Matrix& g = *cost.gamma;
    if (g.rows() != static_cast<Eigen::Index>(m) || g.cols() != static_cast<Eigen::Index>(m)) {
      throw std::invalid_argument("violation cost matrix must be m x m");
    }
    for (std::size_t j = 0; j < nsc; ++j) {
      const double wj = ps.scenarios.weight(j);
      for (std::size_t i = 0; i < m; ++i) {
        const int si = out.slack_index(static_cast<int>(i), static_cast<int>(j));
        if (si < 0) {
          continue;
        }
        for (std::size_t k = 0; k < m; ++k) {
          const int sk = out.slack_index(static_cast<int>(k), static_cast<int>(j));
          if (sk >= 0 && (g(i, k) != 0.0 || g(k, i) != 0.0)) {
            hess.emplace_back(si, sk, wj * (g(i, k) + g(k, i)));
          }
        }
      }
    }
  }
  prog.hessian.resize(n, n);
  prog.hessian.setFromTriplets(hess.begin(), hess.end());
  prog.linear = Vector::Zero(n);
  prog.linear.head(p) = ps.objective.linear;
  prog.offset = ps.objective.offset;

  std::vector<Triplet> eq;
  std::vector<double> eq_rhs;
  std::vector<Triplet> ineq;
  std::vector<double> ineq_rhs;

  // Groups of scenarios that can share one row: a hard ξ-independent row
  // whose enforced right-hand sides coincide.
  for (std::size_t i = 0; i < m; ++i) {
    const Constraint& c = ps.constraints[i];
    if (c.mirror && *c.mirror < i) {
      continue;  // handled with its twin
    }
    std::vector<bool> done(nsc, false);
    for (std::size_t j = 0; j < nsc; ++j) {
      if (c.mirror && (dir(i, j).kind == Kind::omit) != (dir(*c.mirror, j).kind == Kind::omit)) {
        throw std::invalid_argument("equality halves must be omitted together");
      }
      if (done[j] || dir(i, j).kind == Kind::omit) {
        continue;
      }
      const RowDirective& d = dir(i, j);
      std::vector<std::size_t> group{j};
      const bool mergeable = d.kind == Kind::enforce && !c.depends_on_xi();
      if (mergeable) {
        for (std::size_t k = j + 1; k < nsc; ++k) {
          const RowDirective& dk = dir(i, k);
          if (!done[k] && dk.kind == Kind::enforce && dk.shift == d.shift) {
            if (c.mirror) {
              const RowDirective& twin_j = dir(*c.mirror, j);
              const RowDirective& twin_k = dir(*c.mirror, k);
              if (twin_k.kind != twin_j.kind || twin_k.shift != twin_j.shift) {
                continue;
              }
            }
            group.push_back(k);
          }
        }
      }
      double weight = 0.0;
      for (std::size_t k : group) {
        done[k] = true;
        weight += ps.scenarios.weight(k);
      }
      const Vector& xi = ps.scenarios.xi(j);

      if (c.mirror) {
        const std::size_t t = *c.mirror;
        const RowDirective& twin = dir(t, j);
        if (d.kind != Kind::enforce || twin.kind != Kind::enforce || d.shift != 0.0 || twin.shift != 0.0) {
          // Relaxed or one-sided use of an equality half: keep it as an inequality.
          for (std::size_t side : {i, t}) {
            const RowDirective& ds = dir(side, j);
            if (ds.kind == Kind::omit) {
              continue;
            }
            const Constraint& cs = ps.constraints[side];
            const auto row = static_cast<Eigen::Index>(ineq_rhs.size());
            push_row(ineq, row, cs.normal(xi));
            ineq_rhs.push_back(cs.rhs(xi) + ds.shift);
            for (std::size_t k : group) {
              out.dual_source[side * nsc + k] = {Source::Kind::inequality, row, weight};
            }
          }
          continue;
        }
        const auto row = static_cast<Eigen::Index>(eq_rhs.size());
        push_row(eq, row, c.normal(xi));
        eq_rhs.push_back(c.rhs(xi));
        for (std::size_t k : group) {
          out.dual_source[i * nsc + k] = {Source::Kind::equality_plus, row, weight};
          out.dual_source[t * nsc + k] = {Source::Kind::equality_minus, row, weight};
        }
        continue;
      }

      const auto row = static_cast<Eigen::Index>(ineq_rhs.size());
      double rhs = 0.0;
      if (c.kind == ConstraintKind::affine) {
        push_row(ineq, row, c.normal(xi));
        rhs = c.rhs(xi);
      } else {
        ConvexProgram::QuadraticTerm term;
        term.row = row;
        Matrix sel = Matrix::Zero(c.selector.rows(), n);
        sel.leftCols(p) = c.selector;
        term.selector = to_sparse(sel);
        term.center = c.ball_center(xi);
        prog.quadratic_rows.push_back(std::move(term));
        rhs = c.radius_sq;
      }
      if (d.kind == Kind::slack_variable) {
        ineq.emplace_back(row, out.slack_index(static_cast<int>(i), static_cast<int>(j)), -1.0);
      } else {
        rhs += d.shift;
      }
      ineq_rhs.push_back(rhs);
      for (std::size_t k : group) {
        out.dual_source[i * nsc + k] = {Source::Kind::inequality, row, weight};
      }
    }
  }

  // Sign rows -s ≤ 0; their multipliers are not part of the dual map.
  if (cost.nonnegative) {
    for (std::size_t j = 0; j < nsc; ++j) {
      for (std::size_t i = 0; i < m; ++i) {
        const int si = out.slack_index(static_cast<int>(i), static_cast<int>(j));
        if (si >= 0) {
          const auto row = static_cast<Eigen::Index>(ineq_rhs.size());
          ineq.emplace_back(row, si, -1.0);
          ineq_rhs.push_back(0.0);
        }
      }
    }
  }

  prog.eq_matrix.resize(static_cast<Eigen::Index>(eq_rhs.size()), n);
  prog.eq_matrix.setFromTriplets(eq.begin(), eq.end());
  prog.eq_rhs = Eigen::Map<const Vector>(eq_rhs.data(), static_cast<Eigen::Index>(eq_rhs.size()));
  prog.ineq_matrix.resize(static_cast<Eigen::Index>(ineq_rhs.size()), n);
  prog.ineq_matrix.setFromTriplets(ineq.begin(), ineq.end());
  prog.ineq_rhs = Eigen::Map<const Vector>(ineq_rhs.data(), static_cast<Eigen::Index>(ineq_rhs.size()));
  return out;
}

Matrix decode_duals(const CompiledScenarioProgram& compiled, const ConvexSolution& solution) {
  const auto m = static_cast<Eigen::Index>(compiled.constraints);
  const auto nsc = static_cast<Eigen::Index>(compiled.scenarios);
  Matrix lambda = Matrix::Zero(m, nsc);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < nsc; ++j) {
      const Source& src = compiled.dual_source[static_cast<std::size_t>(i * nsc + j)];
      double mass = 0.0;
      switch (src.kind) {
        case Source::Kind::none:
          break;
        case Source::Kind::inequality:
          mass = solution.ineq_dual(src.row);
          break;
        case Source::Kind::equality_plus:
          mass = std::max(solution.eq_dual(src.row), 0.0);
          break;
        case Source::Kind::equality_minus:
          mass = std::max(-solution.eq_dual(src.row), 0.0);
          break;
      }
      lambda(i, j) = src.kind == Source::Kind::none ? 0.0 : mass / src.weight;
    }
  }
  return lambda;
}

Matrix decode_slacks(const CompiledScenarioProgram& compiled, const ConvexSolution& solution) {
  const auto m = static_cast<Eigen::Index>(compiled.constraints);
  const auto nsc = static_cast<Eigen::Index>(compiled.scenarios);
  Matrix s = Matrix::Zero(m, nsc);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < nsc; ++j) {
      const int idx = compiled.slack_index(static_cast<int>(i), static_cast<int>(j));
      if (idx >= 0) {
        s(i, j) = solution.x(idx);
      }
    }
  }
  return s;
}

}  // namespace resilia
