#pragma once

#include "resilia/convex_program.hpp"
#include "resilia/kernels.hpp"
#include "resilia/problem.hpp"

namespace resilia {

/// Multipliers λ_ij per (constraint i, scenario j), without the scenario
/// weight folded in: the Lagrangian reads J + Σ_j w_j Σ_i λ_ij (g_ij − s_ij).
struct DualMap {
  Matrix lambda;

  static DualMap zeros(const ProblemSpec& ps);
};

/// Relaxations s_ij per (constraint i, scenario j).
struct SlackMap {
  Matrix s;

  static SlackMap zeros(const ProblemSpec& ps);
};

struct SolveReport {
  double primal_value = 0.0;
  double dual_value = 0.0;
  double kkt_residual = 0.0;
  int iterations = 0;
  SolveStatus status = SolveStatus::max_iterations;
};

struct KktResidual {
  double stationarity = 0.0;
  double complementarity = 0.0;
  double feasibility = 0.0;

  double max() const;
};

double lagrangian(const ProblemSpec& ps, const Vector& z, const DualMap& lam, const SlackMap& s);

/// ‖∇_z L‖₂, max |λ(g − s)| and max (g − s)₊ over all (i, j).
KktResidual kkt_residual(const ProblemSpec& ps, const Vector& z, const DualMap& lam, const SlackMap& s,
                         Execution exec = Execution::serial);

struct InnerSolve {
  Vector z;
  SolveStatus status = SolveStatus::converged;
  int iterations = 0;
  double gradient_norm = 0.0;
};

/// argmin_z L(z, λ, s) by damped Newton iterations; exact in one step when
/// every multiplier sits on an affine row.
InnerSolve min_z_lagrangian(const ProblemSpec& ps, const DualMap& lam, const SlackMap& s, int max_iter = 50);

struct SensitivityResult {
  /// Central difference (P*(s + h e_ij) − P*(s − h e_ij)) / (2 h w_j).
  Matrix finite_difference;
  /// −λ*_ij from the reference solve.
  Matrix negative_dual;
  /// |fd + λ| / max(|λ|, 1e-6).
  Matrix relative_error;
  /// True where the reference multiplier is positive enough to call the row active.
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> active;
};

/// Compares finite differences of the optimal value of the fixed-slack problem
/// against its multipliers. Equality halves are not perturbed.
///
/// @throws std::runtime_error when the reference solve does not converge.
SensitivityResult sensitivity_check(const ProblemSpec& ps, const SlackMap& s, double h_step);

}  // namespace resilia
