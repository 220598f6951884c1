#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace resilia {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// A weighted finite family of disturbance realizations.
///
/// Weights drive expectations; density values are the disturbance density
/// evaluated at each point and stay separate from the weights.
class ScenarioSet {
 public:
  ScenarioSet() = default;

  /// Validates and stores the scenarios. Weights must sum to one within 1e-12.
  ///
  /// @throws std::invalid_argument on empty input, mismatched lengths, negative
  ///   weights, non-positive densities or mixed dimensions.
  ScenarioSet(std::vector<Vector> points, std::vector<double> weights,
              std::vector<double> density_values);

  std::size_t size() const { return points_.size(); }
  int dimension() const { return points_.empty() ? 0 : static_cast<int>(points_.front().size()); }

  const Vector& xi(std::size_t j) const { return points_[j]; }
  double weight(std::size_t j) const { return weights_[j]; }
  double density(std::size_t j) const { return densities_[j]; }

  const std::vector<Vector>& points() const { return points_; }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<double>& densities() const { return densities_; }

  /// Weighted mean of the scenario points.
  Vector mean() const;

 private:
  std::vector<Vector> points_;
  std::vector<double> weights_;
  std::vector<double> densities_;
};

using DensityFn = std::function<double(const Vector&)>;

/// Builds a scenario set from points and a density.
///
/// When `masses` is empty the weights are proportional to the density values,
/// which is the right quadrature for equal-volume cells. Otherwise the weights
/// are the normalized masses.
ScenarioSet build_scenario_set(std::vector<Vector> points, const DensityFn& density,
                               std::span<const double> masses = {});

/// Equal-area concentric-ring cells of a disc. Ring k (1-based) holds
/// `inner_cells * (2k - 1)` cells, so the total is inner_cells * rings².
ScenarioSet disc_ring_grid(const Vector& center, double radius, int rings, int inner_cells = 3);

/// One-hot scenarios e_j with the given probabilities and unit density.
ScenarioSet one_hot_scenarios(std::span<const double> probabilities);

/// J(z) = zᵀ Q z + linearᵀ z + offset.
struct Objective {
  Matrix quadratic;
  Vector linear;
  double offset = 0.0;

  int dimension() const { return static_cast<int>(linear.size()); }
  Vector gradient(const Vector& z) const;

  /// ‖z − target‖².
  static Objective squared_distance(const Vector& target);
};

double evaluate_objective(const Objective& objective, const Vector& z);

enum class ConstraintKind { affine, ball };

/// One requirement g(z, ξ) ≤ 0, affine in ξ.
///
/// Affine: g = a(ξ)ᵀ z − b(ξ) with a(ξ) = a + a_xi ξ and b(ξ) = b + b_xiᵀ ξ.
/// Ball:   g = ‖S z − c(ξ)‖² − radius_sq with c(ξ) = center + center_xi ξ.
/// Empty a_xi, b_xi or center_xi mean no ξ dependence.
struct Constraint {
  ConstraintKind kind = ConstraintKind::affine;

  Vector a;
  Matrix a_xi;
  double b = 0.0;
  Vector b_xi;

  Matrix selector;
  Vector center;
  Matrix center_xi;
  double radius_sq = 0.0;

  /// Declared Lipschitz bound of g in ξ.
  double lipschitz = 0.0;
  /// Soft constraints may be relaxed by a slack; hard ones never are.
  bool soft = true;
  /// Index of the negated twin when this row is half of an equality.
  std::optional<std::size_t> mirror;
  std::string tag;

  static Constraint affine_row(Vector a, double b);
  static Constraint ball(Matrix selector, Vector center, double radius_sq);

  bool depends_on_xi() const;
  Vector normal(const Vector& xi) const;
  double rhs(const Vector& xi) const;
  Vector ball_center(const Vector& xi) const;
};

/// g(z, ξ).
///
/// @throws std::invalid_argument on dimension mismatch.
double evaluate_constraint(const Constraint& c, const Vector& z, const Vector& xi);

/// ∇_z g(z, ξ).
Vector constraint_gradient(const Constraint& c, const Vector& z, const Vector& xi);

struct ProblemSpec {
  Objective objective;
  std::vector<Constraint> constraints;
  ScenarioSet scenarios;
  std::optional<Vector> slater_point;

  int dimension() const { return objective.dimension(); }
  std::size_t constraint_count() const { return constraints.size(); }
  std::size_t scenario_count() const { return scenarios.size(); }
};

/// Appends `aᵀz = b` as two hard mirrored rows.
void add_equality(ProblemSpec& ps, Vector a, double b, const std::string& tag = {});

/// Throws std::invalid_argument describing the first shape inconsistency.
void check_shapes(const ProblemSpec& ps);

struct ValidationReport {
  std::vector<std::string> dimension_errors;
  double convexity_margin = 0.0;
  bool strongly_convex = false;
  bool symmetric = false;
  bool slater_checked = false;
  std::vector<std::pair<std::size_t, std::size_t>> slater_violations;

  bool ok() const {
    return dimension_errors.empty() && strongly_convex && symmetric && slater_violations.empty();
  }
};

ValidationReport validate_problem(const ProblemSpec& ps);

}  // namespace resilia
