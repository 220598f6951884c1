#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "resilia/duality.hpp"
#include "resilia/problem.hpp"
#include "resilia/resilient.hpp"

namespace resilia {

/// Componentwise bounds; ±inf entries are unconstrained.
struct Box {
  Vector lower;
  Vector upper;

  static Box symmetric(const Vector& bound);
  static Box unbounded(Eigen::Index n);
  Eigen::Index size() const { return lower.size(); }
  bool contains(const Vector& x, double tol = 0.0) const;
  /// Largest amount by which x leaves the box (0 inside).
  double violation(const Vector& x) const;
};

struct Waypoint {
  int k = 0;
  Box box;
};

/// Which constraint families may be relaxed.
struct SlackFlags {
  bool state = false;
  bool safety = false;
  bool input = true;
  bool waypoint = false;
  bool terminal = true;
};

/// x_{k+1} = A x_k + B u_k + W w, cost Σ_{k<N} (x_kᵀQx_k + u_kᵀRu_k) + x_NᵀP x_N.
struct LqrProblem {
  Matrix A;
  Matrix B;
  Matrix W;
  Matrix Q;
  Matrix R;
  Matrix P_term;
  Vector x0;
  int N = 1;
  /// Hard-coded physical limits on x_1..x_{N-1}.
  Box x_bound;
  /// Position-type limits on x_1..x_{N-1}, relaxable separately.
  std::optional<Box> safety_set;
  Box u_bound;
  std::vector<Waypoint> waypoints;
  std::optional<Box> terminal_set;
  /// Disturbance held constant over the horizon.
  Vector disturbance;
  SlackFlags slack;

  Eigen::Index state_dim() const { return A.rows(); }
  Eigen::Index input_dim() const { return B.cols(); }
  /// @throws std::invalid_argument on inconsistent shapes or cost matrices.
  void validate() const;
};

/// Post-branch dynamics of one scenario. At instant ℓ the pre-branch
/// prediction is mapped through `reset`; later steps use (A, B, offset).
struct ScenarioBranch {
  Matrix A;
  Matrix B;
  Matrix reset;
  Vector offset;
};

/// Scenario j follows branches[j] from instant ℓ on; before ℓ all scenarios
/// share their variables. An empty branch list means no branching.
struct Coupling {
  int branch_instant = 0;
  std::vector<ScenarioBranch> branches;

  bool branched() const { return !branches.empty(); }
};

/// Positions of x_k and u_k inside the stacked decision vector.
struct TrajectoryLayout {
  Eigen::Index n = 0;
  Eigen::Index q = 0;
  int N = 0;
  /// First branched instant; N + 1 without branching.
  int ell = 0;
  std::size_t branches = 1;
  Eigen::Index dimension = 0;

  bool shared_state(int k) const { return k < ell; }
  bool shared_input(int k) const { return k < ell; }
  /// Offset of x_k (1 ≤ k ≤ N) for branch j.
  Eigen::Index state_index(int k, std::size_t j) const;
  /// Offset of u_k (0 ≤ k < N) for branch j.
  Eigen::Index input_index(int k, std::size_t j) const;
};

enum class RowFamily { dynamics, state, safety, input, waypoint, terminal };

const char* to_string(RowFamily family);

struct RowInfo {
  RowFamily family = RowFamily::dynamics;
  int k = 0;
  Eigen::Index component = 0;
  bool upper = true;
  bool shared = true;
};

struct LoweredLqr {
  ProblemSpec spec;
  TrajectoryLayout layout;
  std::vector<RowInfo> rows;
};

/// @throws std::invalid_argument on inconsistent coupling or shapes.
LoweredLqr lower_to_problem_spec(const LqrProblem& lqr, const ScenarioSet& scenarios, const Coupling& coupling = {});

struct Trajectory {
  /// n × (N + 1), column k is x_k.
  Matrix states;
  /// q × N, column k is u_k.
  Matrix inputs;
};

/// Per-branch state and input sequences (one entry without branching).
std::vector<Trajectory> extract_plan(const LoweredLqr& lowered, const Vector& z, const Vector& x0);

/// Largest |x_{k+1} − A x_k − B u_k − offset| over the plan.
double dynamics_residual(const LqrProblem& lqr, const Coupling& coupling, const std::vector<Trajectory>& plan);

/// Stabilizing solution of P = AᵀPA − AᵀPB(R + BᵀPB)⁻¹BᵀPA + Q by the
/// structured doubling algorithm.
///
/// @throws std::runtime_error when the iteration does not converge.
Matrix solve_dare(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R);

/// ‖P − Riccati(P)‖_max / (1 + ‖P‖_max).
double dare_residual(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R, const Matrix& P);

/// A − B(R + BᵀPB)⁻¹BᵀPA.
Matrix dare_closed_loop(const Matrix& A, const Matrix& B, const Matrix& R, const Matrix& P);

enum class Mode { robust, resilient };

const char* to_string(Mode mode);

struct MpcStep {
  Vector u_apply;
  Trajectory plan;
  SolveReport report;
  SlackMap slack;
  LoweredLqr lowered;
};

/// Plans from x_now assuming w_prev persists over the horizon and returns the
/// first input. Robust mode enforces every row; resilient mode relaxes the
/// families flagged in lqr.slack with cost h (a 1 × 1 h scales the identity).
MpcStep mpc_step(const LqrProblem& lqr, const Vector& x_now, const Vector& w_prev, Mode mode,
                 const ViolationCost& h);

/// Largest slack over the rows of one family, scenario j.
double family_slack(const LoweredLqr& lowered, const SlackMap& s, RowFamily family, std::size_t j,
                    int k_min = 0, int k_max = 1 << 30);

/// Euclidean norm of the slacks of one family, scenario j, over k ∈ [k_min, k_max].
double family_slack_norm(const LoweredLqr& lowered, const SlackMap& s, RowFamily family, std::size_t j,
                         int k_min = 0, int k_max = 1 << 30);

/// Expands a 1 × 1 violation cost to γ I of size m.
ViolationCost expand_cost(const ViolationCost& h, std::size_t m);

}  // namespace resilia
