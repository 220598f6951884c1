#pragma once

#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace resilia {

using SparseMatrix = Eigen::SparseMatrix<double>;

enum class SolveStatus { converged, max_iterations, infeasible };

const char* to_string(SolveStatus status);

/// min ½ xᵀHx + cᵀx + offset  s.t.  Ex = e,  q_k(x) ≤ 0
///
/// with q_k(x) = G_k x − h_k, plus ‖S x − center‖² for rows that carry a
/// quadratic term.
struct ConvexProgram {
  struct QuadraticTerm {
    Eigen::Index row = 0;
    SparseMatrix selector;
    Eigen::VectorXd center;
  };

  Eigen::Index n = 0;
  SparseMatrix hessian;
  Eigen::VectorXd linear;
  double offset = 0.0;
  SparseMatrix eq_matrix;
  Eigen::VectorXd eq_rhs;
  SparseMatrix ineq_matrix;
  Eigen::VectorXd ineq_rhs;
  std::vector<QuadraticTerm> quadratic_rows;

  double objective(const Eigen::VectorXd& x) const;
  Eigen::VectorXd inequality_values(const Eigen::VectorXd& x) const;
};

struct InteriorPointOptions {
  double tolerance = 1e-11;
  int max_iterations = 200;
  /// Dual magnitude treated as evidence of an empty feasible set.
  double divergence_threshold = 1e10;
};

struct ConvexSolution {
  Eigen::VectorXd x;
  Eigen::VectorXd eq_dual;
  Eigen::VectorXd ineq_dual;
  SolveStatus status = SolveStatus::max_iterations;
  int iterations = 0;
  double objective = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double mu = 0.0;
};

/// Mehrotra predictor-corrector interior-point method.
ConvexSolution solve_convex_program(const ConvexProgram& program, const InteriorPointOptions& options = {});

}  // namespace resilia
