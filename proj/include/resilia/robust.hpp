#pragma once

#include <cstdint>
#include <vector>

#include "resilia/duality.hpp"
#include "resilia/kernels.hpp"
#include "resilia/problem.hpp"

namespace resilia {

struct RobustConfig {
  double delta = 0.1;
  double lipschitz_max = 0.0;
  double sigma = 0.5;
  Vector mean_xi;

  /// @throws std::invalid_argument unless delta ∈ (0, 1], sigma > 0, L ≥ 0.
  void validate() const;
};

/// ε = L σ sqrt(2 ln(2 m d / δ)).
double compute_epsilon(const RobustConfig& cfg, std::size_t m, std::size_t d);

/// Admissible sub-Gaussian proxy for disturbances supported on [0, ξ̄]^d.
double box_sigma(double xi_bar);

/// Number of requirement rows, i.e. constraints that are not equality halves.
std::size_t requirement_count(const ProblemSpec& ps);

struct RobustSolution {
  Vector z;
  DualMap lam;
  SolveReport report;
  double epsilon = 0.0;
};

/// min J s.t. g_i(z, mean) ≤ −ε on every requirement row; equality halves are
/// kept exact.
RobustSolution solve_robust_surrogate(const ProblemSpec& ps, double epsilon, const Vector& mean_xi);

/// Surrogate with ε from `cfg`, m = requirement_count(ps) and d = dim ξ.
RobustSolution solve_robust_surrogate(const ProblemSpec& ps, const RobustConfig& cfg);

/// min J s.t. g_ij(z) ≤ 0 for every scenario.
RobustSolution solve_worst_case(const ProblemSpec& ps);

struct ChanceSolution {
  RobustSolution solution;
  std::vector<std::size_t> enforced;
  double probability = 0.0;
};

/// min J s.t. all constraints hold on some scenario subset of probability at
/// least 1 − δ, by enumerating subsets (≤ 16 scenarios). Equality halves are
/// always enforced.
ChanceSolution solve_scenario_chance(const ProblemSpec& ps, double delta, Execution exec = Execution::serial);

struct ViolationEstimate {
  double p_hat = 0.0;
  double ci_halfwidth = 0.0;
  std::int64_t samples = 0;
};

/// Fraction of samples with g_i(z, ξ) ≤ tol for all i.
ViolationEstimate estimate_violation_probability(const ProblemSpec& ps, const Vector& z, const Sampler& sampler,
                                                 std::int64_t n, std::uint64_t seed,
                                                 Execution exec = Execution::parallel, double tol = 1e-9);

}  // namespace resilia
