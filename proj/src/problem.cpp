#include "resilia/problem.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

namespace resilia {

namespace {

void require(bool condition, const std::string& message) {
  if (!condition) {
    throw std::invalid_argument(message);
  }
}

}  // namespace

ScenarioSet::ScenarioSet(std::vector<Vector> points, std::vector<double> weights,
                         std::vector<double> density_values)
    : points_(std::move(points)), weights_(std::move(weights)), densities_(std::move(density_values)) {
  require(!points_.empty(), "scenario set is empty");
  require(weights_.size() == points_.size(), "one weight per scenario required");
  require(densities_.size() == points_.size(), "one density value per scenario required");
  const auto d = points_.front().size();
  require(d >= 1, "scenario dimension must be at least 1");
  double total = 0.0;
  for (std::size_t j = 0; j < points_.size(); ++j) {
    require(points_[j].size() == d, "scenario points must share one dimension");
    require(points_[j].allFinite(), "scenario point is not finite");
    require(std::isfinite(weights_[j]) && weights_[j] >= 0.0, "scenario weights must be nonnegative");
    require(std::isfinite(densities_[j]) && densities_[j] > 0.0, "density values must be positive");
    total += weights_[j];
  }
  require(std::abs(total - 1.0) <= 1e-12, "scenario weights must sum to one");
}

Vector ScenarioSet::mean() const {
  Vector m = Vector::Zero(dimension());
  for (std::size_t j = 0; j < size(); ++j) {
    m += weights_[j] * points_[j];
  }
  return m;
}

ScenarioSet build_scenario_set(std::vector<Vector> points, const DensityFn& density,
                               std::span<const double> masses) {
  require(!points.empty(), "scenario set is empty");
  require(masses.empty() || masses.size() == points.size(), "one mass per scenario required");
  std::vector<double> densities(points.size());
  for (std::size_t j = 0; j < points.size(); ++j) {
    densities[j] = density(points[j]);
    require(std::isfinite(densities[j]) && densities[j] > 0.0, "density must be positive on every scenario");
  }
  std::vector<double> weights = masses.empty() ? densities : std::vector<double>(masses.begin(), masses.end());
  for (double w : weights) {
    require(std::isfinite(w) && w >= 0.0, "scenario masses must be nonnegative");
  }
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  require(total > 0.0, "scenario masses sum to zero");
  for (double& w : weights) {
    w /= total;
  }
  // Pin the sum to one against rounding in the division.
  const double drift = std::accumulate(weights.begin(), weights.end(), 0.0) - 1.0;
  weights.back() -= drift;
  return ScenarioSet(std::move(points), std::move(weights), std::move(densities));
}

ScenarioSet disc_ring_grid(const Vector& center, double radius, int rings, int inner_cells) {
  require(center.size() == 2, "disc grid needs a planar center");
  require(radius > 0.0 && rings >= 1 && inner_cells >= 1, "disc grid needs positive radius and cell counts");
  std::vector<Vector> points;
  for (int k = 1; k <= rings; ++k) {
    // Area midpoint of the ring between radius·sqrt((k-1)/K) and radius·sqrt(k/K).
    const double r = radius * std::sqrt((k - 0.5) / rings);
    const int cells = inner_cells * (2 * k - 1);
    for (int i = 0; i < cells; ++i) {
      const double theta = 2.0 * std::numbers::pi * (i + 0.5) / cells;
      Vector p(2);
      p << center(0) + r * std::cos(theta), center(1) + r * std::sin(theta);
      points.push_back(std::move(p));
    }
  }
  const double f = 1.0 / (std::numbers::pi * radius * radius);
  return build_scenario_set(std::move(points), [f](const Vector&) { return f; });
}

ScenarioSet one_hot_scenarios(std::span<const double> probabilities) {
  const auto k = static_cast<Eigen::Index>(probabilities.size());
  std::vector<Vector> points;
  for (Eigen::Index j = 0; j < k; ++j) {
    points.push_back(Vector::Unit(k, j));
  }
  return build_scenario_set(std::move(points), [](const Vector&) { return 1.0; }, probabilities);
}

Vector Objective::gradient(const Vector& z) const {
  require(z.size() == linear.size(), "objective dimension mismatch");
  return (quadratic + quadratic.transpose()) * z + linear;
}

Objective Objective::squared_distance(const Vector& target) {
  return {Matrix::Identity(target.size(), target.size()), -2.0 * target, target.squaredNorm()};
}

double evaluate_objective(const Objective& objective, const Vector& z) {
  require(objective.quadratic.rows() == z.size() && objective.quadratic.cols() == z.size() &&
              objective.linear.size() == z.size(),
          "objective dimension mismatch");
  return z.dot(objective.quadratic * z) + objective.linear.dot(z) + objective.offset;
}

Constraint Constraint::affine_row(Vector a, double b) {
  Constraint c;
  c.kind = ConstraintKind::affine;
  c.a = std::move(a);
  c.b = b;
  return c;
}

Constraint Constraint::ball(Matrix selector, Vector center, double radius_sq) {
  Constraint c;
  c.kind = ConstraintKind::ball;
  c.selector = std::move(selector);
  c.center = std::move(center);
  c.radius_sq = radius_sq;
  return c;
}

bool Constraint::depends_on_xi() const {
  if (kind == ConstraintKind::affine) {
    return (a_xi.size() > 0 && !a_xi.isZero(0.0)) || (b_xi.size() > 0 && !b_xi.isZero(0.0));
  }
  return center_xi.size() > 0 && !center_xi.isZero(0.0);
}

Vector Constraint::normal(const Vector& xi) const {
  if (a_xi.size() == 0) {
    return a;
  }
  require(a_xi.rows() == a.size() && a_xi.cols() == xi.size(), "a_xi shape mismatch");
  return a + a_xi * xi;
}

double Constraint::rhs(const Vector& xi) const {
  if (b_xi.size() == 0) {
    return b;
  }
  require(b_xi.size() == xi.size(), "b_xi shape mismatch");
  return b + b_xi.dot(xi);
}

Vector Constraint::ball_center(const Vector& xi) const {
  if (center_xi.size() == 0) {
    return center;
  }
  require(center_xi.rows() == center.size() && center_xi.cols() == xi.size(), "center_xi shape mismatch");
  return center + center_xi * xi;
}

double evaluate_constraint(const Constraint& c, const Vector& z, const Vector& xi) {
  if (c.kind == ConstraintKind::affine) {
    require(c.a.size() == z.size(), "constraint dimension mismatch");
    return c.normal(xi).dot(z) - c.rhs(xi);
  }
  require(c.selector.cols() == z.size() && c.selector.rows() == c.center.size(),
          "ball constraint dimension mismatch");
  return (c.selector * z - c.ball_center(xi)).squaredNorm() - c.radius_sq;
}

Vector constraint_gradient(const Constraint& c, const Vector& z, const Vector& xi) {
  if (c.kind == ConstraintKind::affine) {
    require(c.a.size() == z.size(), "constraint dimension mismatch");
    return c.normal(xi);
  }
  require(c.selector.cols() == z.size() && c.selector.rows() == c.center.size(),
          "ball constraint dimension mismatch");
  return 2.0 * c.selector.transpose() * (c.selector * z - c.ball_center(xi));
}

void add_equality(ProblemSpec& ps, Vector a, double b, const std::string& tag) {
  const std::size_t first = ps.constraints.size();
  Constraint plus = Constraint::affine_row(a, b);
  plus.soft = false;
  plus.tag = tag;
  plus.mirror = first + 1;
  Constraint minus = Constraint::affine_row(-a, -b);
  minus.soft = false;
  minus.tag = tag;
  minus.mirror = first;
  ps.constraints.push_back(std::move(plus));
  ps.constraints.push_back(std::move(minus));
}

namespace {

std::vector<std::string> shape_errors(const ProblemSpec& ps) {
  std::vector<std::string> errors;
  const auto p = ps.objective.linear.size();
  const auto d = ps.scenarios.dimension();
  if (p == 0) {
    errors.push_back("objective has dimension zero");
  }
  if (ps.objective.quadratic.rows() != p || ps.objective.quadratic.cols() != p) {
    errors.push_back("objective quadratic is not p x p");
  }
  if (ps.scenarios.size() == 0) {
    errors.push_back("scenario set is empty");
  }
  if (ps.slater_point && ps.slater_point->size() != p) {
    errors.push_back("slater point has wrong dimension");
  }
  for (std::size_t i = 0; i < ps.constraints.size(); ++i) {
    const Constraint& c = ps.constraints[i];
    const std::string where = "constraint " + std::to_string(i) + ": ";
    if (c.kind == ConstraintKind::affine) {
      if (c.a.size() != p) {
        errors.push_back(where + "normal has wrong dimension");
      }
      if (c.a_xi.size() > 0 && (c.a_xi.rows() != p || c.a_xi.cols() != d)) {
        errors.push_back(where + "a_xi is not p x d");
      }
      if (c.b_xi.size() > 0 && c.b_xi.size() != d) {
        errors.push_back(where + "b_xi has wrong dimension");
      }
    } else {
      if (c.selector.cols() != p || c.selector.rows() != c.center.size() || c.center.size() == 0) {
        errors.push_back(where + "selector/center shapes inconsistent");
      }
      if (c.center_xi.size() > 0 && (c.center_xi.rows() != c.center.size() || c.center_xi.cols() != d)) {
        errors.push_back(where + "center_xi has wrong shape");
      }
      if (!(c.radius_sq > 0.0)) {
        errors.push_back(where + "radius_sq must be positive");
      }
    }
    if (c.mirror) {
      const std::size_t k = *c.mirror;
      if (k >= ps.constraints.size() || k == i || ps.constraints[k].mirror != i) {
        errors.push_back(where + "mirror link is not symmetric");
      } else if (c.soft || c.kind != ConstraintKind::affine) {
        errors.push_back(where + "mirrored rows must be hard and affine");
      }
    }
    if (!(c.lipschitz >= 0.0)) {
      errors.push_back(where + "negative Lipschitz bound");
    }
  }
  return errors;
}

}  // namespace

void check_shapes(const ProblemSpec& ps) {
  const auto errors = shape_errors(ps);
  if (!errors.empty()) {
    throw std::invalid_argument(errors.front());
  }
}

ValidationReport validate_problem(const ProblemSpec& ps) {
  ValidationReport report;
  report.dimension_errors = shape_errors(ps);
  const Matrix& q = ps.objective.quadratic;
  if (q.rows() == q.cols() && q.rows() > 0) {
    report.symmetric = (q - q.transpose()).cwiseAbs().maxCoeff() <= 1e-12;
    const Matrix sym = 0.5 * (q + q.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> eig(sym, Eigen::EigenvaluesOnly);
    // Hessian of zᵀQz is Q + Qᵀ.
    report.convexity_margin = 2.0 * eig.eigenvalues().minCoeff();
    report.strongly_convex = report.convexity_margin > 0.0;
  }
  if (ps.slater_point && report.dimension_errors.empty()) {
    report.slater_checked = true;
    for (std::size_t i = 0; i < ps.constraints.size(); ++i) {
      // Equality halves cannot hold strictly.
      if (ps.constraints[i].mirror) {
        continue;
      }
      for (std::size_t j = 0; j < ps.scenarios.size(); ++j) {
        if (!(evaluate_constraint(ps.constraints[i], *ps.slater_point, ps.scenarios.xi(j)) < 0.0)) {
          report.slater_violations.emplace_back(i, j);
        }
      }
    }
  }
  return report;
}

}  // namespace resilia
