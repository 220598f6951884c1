#pragma once

#include <cstdint>
#include <vector>

#include "resilia/convex_program.hpp"
#include "resilia/problem.hpp"

namespace resilia {

/// How one (constraint, scenario) row enters a compiled program.
struct RowDirective {
  enum class Kind : std::uint8_t { enforce, slack_variable, omit };
  Kind kind = Kind::enforce;
  /// Right-hand side for enforced rows: g_ij(z) ≤ shift.
  double shift = 0.0;
};

/// Row-major m × N table of directives.
using DirectiveTable = std::vector<RowDirective>;

struct SlackCostSpec {
  /// m × m; only the rows/columns of slack-variable rows are read.
  const Matrix* gamma = nullptr;
  bool nonnegative = true;
};

/// A ProblemSpec lowered to a sparse convex program over (z, s).
///
/// Mirrored hard pairs become equality rows, and ξ-independent hard rows with
/// identical right-hand sides across scenarios are merged into one row whose
/// multiplier is shared by the merged scenarios.
struct CompiledScenarioProgram {
  struct DualSource {
    enum class Kind : std::uint8_t { none, inequality, equality_plus, equality_minus };
    Kind kind = Kind::none;
    Eigen::Index row = -1;
    /// Sum of the weights of the scenarios sharing the row.
    double weight = 0.0;
  };

  ConvexProgram program;
  int primal_dimension = 0;
  std::size_t constraints = 0;
  std::size_t scenarios = 0;
  /// m × N, −1 where the row has no slack variable.
  Eigen::MatrixXi slack_index;
  std::vector<DualSource> dual_source;
};

CompiledScenarioProgram compile_scenario_program(const ProblemSpec& ps, const DirectiveTable& directives,
                                                 const SlackCostSpec& cost = {});

/// Weight-free multipliers λ_ij recovered from a program solution.
Matrix decode_duals(const CompiledScenarioProgram& compiled, const ConvexSolution& solution);

/// Slack values; zero where the row has no slack variable.
Matrix decode_slacks(const CompiledScenarioProgram& compiled, const ConvexSolution& solution);

}  // namespace resilia
