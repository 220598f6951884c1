#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "resilia/kernels.hpp"
#include "resilia/lqr.hpp"
#include "resilia/quadrotor.hpp"

namespace resilia {

/// A requested problem admits no feasible point.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Outcome of one experiment path.
struct ExperimentResult {
  std::string experiment;
  Mode mode = Mode::resilient;
  SolveReport report;
  Vector decision;
  double objective = 0.0;
  /// Monte Carlo samples of the experiment's violation statistic.
  std::vector<double> violation_samples;
  /// Slack per (constraint, scenario).
  Matrix slack_table;
  std::map<std::string, double> metrics;
  std::vector<std::string> trace_header;
  std::vector<std::vector<double>> trace;
  std::string note;
  double runtime_seconds = 0.0;
};

struct ShepherdConfig {
  Vector home = Vector{{12.0, 0.0}};
  double radius = 10.0;
  double coverage_fraction = 0.9;
  double delta = 0.2;
  int sheep_count = 5;
  int rings = 8;
  int inner_cells = 3;
  double gamma = 1.0;
  std::int64_t samples = 100000;
  std::uint64_t seed = 2024;
  Execution exec = Execution::parallel;

  /// r = R sqrt(coverage_fraction).
  double surveillance_radius() const;
  void validate() const;
};

struct ShepherdOutcome {
  std::optional<ExperimentResult> robust;
  std::optional<ExperimentResult> resilient;
};

/// Robust mode enforces ‖x − ξ‖ ≤ r for every ξ in the centered disc of
/// probability 1 − δ; resilient mode solves the slack problem on the ring grid.
///
/// @throws InfeasibleError when the robust reduction is infeasible.
ShepherdOutcome run_shepherd(const ShepherdConfig& cfg, bool robust = true, bool resilient = true);

/// Samples of max_i ‖x − Ξ_i‖ and Σ_i ((‖x − Ξ_i‖² − r²)₊)² for one decision.
struct ShepherdStatistics {
  std::vector<double> max_distance;
  double expected_squared_violation = 0.0;
  double coverage_probability = 0.0;
};

ShepherdStatistics shepherd_statistics(const ShepherdConfig& cfg, const Vector& x);

struct NavigationConfig {
  QuadrotorParams params = navigation_params();
  int horizon = 15;
  int collision_instant = 13;
  std::vector<double> masses{0.0, 0.1, 1.0, 10.0};
  std::vector<double> probabilities{0.5, 0.4, 0.05, 0.05};
  double delta = 0.1;
  double input_bound = 0.005;
  double gamma = 1.0;
  /// (x, y, z − 5, φ, θ, ψ, u, v, w, p, q, r).
  Vector x0;
  Box safety;
  std::vector<Waypoint> waypoints;
  Box terminal;

  static QuadrotorParams navigation_params();
  static NavigationConfig defaults();
  void validate() const;
};

struct NavigationCase {
  double mass = 0.0;
  double probability = 0.0;
  std::optional<ExperimentResult> robust;
  std::optional<ExperimentResult> resilient;
};

/// Robust plan over the smallest-mass scenarios with probability ≥ 1 − δ and
/// the joint resilient plan; every mass is then simulated forward.
std::vector<NavigationCase> run_navigation(const NavigationConfig& cfg, bool robust = true, bool resilient = true);

/// The LQR data shared by the navigation plans (no branching applied).
LqrProblem navigation_lqr(const NavigationConfig& cfg);

/// Branch dynamics of one collision mass.
ScenarioBranch collision_branch(const QuadrotorParams& params, double mass);

struct Gust {
  int step = 0;
  double force_x = 0.0;
};

struct MpcWindConfig {
  QuadrotorParams params = mpc_params();
  int horizon = 10;
  int step_cap = 60;
  double input_bound = 0.005;
  double gamma = 1.0;
  Vector x0;
  Box safety;
  Box terminal;
  std::vector<Gust> gusts{{2, 0.1}, {5, 0.6}, {7, 0.5}};

  static QuadrotorParams mpc_params();
  static MpcWindConfig defaults();
  void validate() const;
  /// Wind vector acting during step t.
  Vector wind_at(int t) const;
};

/// Closed loop: plan with w(t − 1), apply the first input, then inject the
/// scripted gust. Stops at terminal-set entry, the step cap, a failed solve, or
/// (robust mode) a state outside the safety set.
ExperimentResult run_mpc_wind(const MpcWindConfig& cfg, Mode mode);

}  // namespace resilia
