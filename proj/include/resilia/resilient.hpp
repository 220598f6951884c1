#pragma once

#include <cstddef>
#include <vector>

#include "resilia/convex_program.hpp"
#include "resilia/duality.hpp"
#include "resilia/kernels.hpp"
#include "resilia/problem.hpp"

namespace resilia {

enum class CostKind { quadratic, linear, heaviside };

/// Violation cost h over one scenario's slack row.
struct ViolationCost {
  CostKind kind = CostKind::quadratic;
  /// h(s) = sᵀ Γ s.
  Matrix gamma;
  /// h(s) = γᵀ s.
  Vector gamma_linear;
  /// h(s) = −γ Π_i (1 − H(s_i)), H(x) = 1 iff x ≥ 0.
  double gamma_scalar = 0.0;

  static ViolationCost quadratic(Matrix gamma);
  static ViolationCost identity(std::size_t m, double scale = 1.0);
  static ViolationCost linear(Vector gamma);
  static ViolationCost heaviside(double gamma);

  /// @throws std::invalid_argument when the kind's invariants fail.
  void validate() const;
  std::size_t dimension() const;
};

double cost_value(const ViolationCost& h, const Vector& s_row);

/// ∇h for the quadratic and linear kinds.
Vector cost_gradient(const ViolationCost& h, const Vector& s_row);

/// The s with ∇h(s) = y, i.e. Γ⁻¹y / 2.
///
/// @throws std::invalid_argument unless h is quadratic.
Vector grad_h_inverse(const ViolationCost& h, const Vector& y);

/// Σ_j w_j h(s_·j).
double expected_cost(const ProblemSpec& ps, const ViolationCost& h, const SlackMap& s);

enum class SlackSign { nonnegative, free };

struct ResilientOptions {
  SlackSign sign = SlackSign::nonnegative;
  InteriorPointOptions interior_point;
  double kkt_tolerance = 1e-8;
  Execution exec = Execution::serial;
};

struct ResilientSolution {
  Vector z;
  SlackMap s;
  DualMap lam;
  SolveReport report;
};

/// min J(z) + Σ_j w_j h(s_·j)  s.t.  g_ij(z) ≤ s_ij on soft rows, g_ij(z) ≤ 0 on hard rows.
ResilientSolution solve_resilient_joint(const ProblemSpec& ps, const ViolationCost& h,
                                        const ResilientOptions& options = {});

struct FixedSlackSolution {
  Vector z;
  DualMap lam;
  SolveReport report;
};

/// min J(z) s.t. g_ij(z) ≤ s_ij for every row.
FixedSlackSolution solve_pre_fixed_slack(const ProblemSpec& ps, const SlackMap& s,
                                         const ResilientOptions& options = {});

/// Componentwise v_i where x_i > 0 and max(v_i, 0) where x_i = 0.
///
/// @throws std::invalid_argument on a negative x component.
Vector positive_projection(const Vector& x, const Vector& v);

struct SaddleState {
  Vector z;
  DualMap lam;
  SlackMap s;
  double step_primal = 0.0;
  double step_dual = 0.0;
  int iteration = 0;
};

/// z = 0, λ = 0, s = 0 with the default steps 0.5 / (1 + largest eigenvalue of Q).
SaddleState initial_saddle_state(const ProblemSpec& ps);

/// Slack implied by the multipliers: ∇h⁻¹(λ_·j) on soft rows, zero on hard rows.
SlackMap slack_from_duals(const ProblemSpec& ps, const ViolationCost& h, const DualMap& lam);

/// One explicit Euler step of the primal descent / projected dual ascent dynamics.
SaddleState arrow_hurwicz_step(const ProblemSpec& ps, const ViolationCost& h, const SaddleState& state,
                               Execution exec = Execution::serial);

struct ArrowHurwiczResult {
  SaddleState state;
  SolveReport report;
  std::vector<double> residual_trace;
};

ArrowHurwiczResult run_arrow_hurwicz(const ProblemSpec& ps, const ViolationCost& h, const SaddleState& init,
                                     double tol, int max_iter, Execution exec = Execution::serial);

/// Lattice for the brute-force oracle. Slack coordinates live on [0, s_upper].
struct OracleGrid {
  Vector z_lower;
  Vector z_upper;
  double s_upper = 1.0;
  double step = 1e-2;
};

struct OracleResult {
  Vector z;
  SlackMap s;
  double value = 0.0;
  /// Upper bound on value − true optimum implied by the lattice spacing.
  double resolution_bound = 0.0;
};

/// Exhaustive lattice minimization of J + Σ_j w_j h(s_·j) over (z, soft slacks).
///
/// @throws std::invalid_argument beyond six lattice dimensions.
OracleResult brute_force_oracle(const ProblemSpec& ps, const ViolationCost& h, const OracleGrid& grid,
                                Execution exec = Execution::serial);

struct EnumerationResult {
  Vector z;
  SlackMap s;
  double achieved_delta = 0.0;
  std::vector<std::size_t> satisfied;
  double value = 0.0;
  SolveReport report;
};

/// Subset enumeration for mixed soft (quadratic cost) and hard (Heaviside
/// reward) requirements. Slacks of hard rows are the sign-free values g_ij(z).
///
/// @throws std::invalid_argument above 16 scenarios.
EnumerationResult solve_mixed_enumeration(const ProblemSpec& ps, const std::vector<std::size_t>& soft,
                                          const std::vector<std::size_t>& hard, double gamma,
                                          const ViolationCost& soft_cost, Execution exec = Execution::serial);

}  // namespace resilia
