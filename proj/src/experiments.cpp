#include "resilia/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "resilia/resilient.hpp"
#include "resilia/robust.hpp"

namespace resilia {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void require(bool ok, const char* what) {
  if (!ok) {
    throw std::invalid_argument(what);
  }
}

Box position_box(double xl, double xu, double yl, double yu, double zl, double zu) {
  Box b = Box::unbounded(kStateDim);
  b.lower.head(3) << xl, yl, zl;
  b.upper.head(3) << xu, yu, zu;
  return b;
}

/// Angle limits plus optional symmetric velocity limits.
Box attitude_box(double velocity) {
  constexpr double tilt = std::numbers::pi / 9.0;
  Box b = Box::unbounded(kStateDim);
  b.lower.segment(3, 3) << -tilt, -tilt, -std::numbers::pi;
  b.upper.segment(3, 3) << tilt, tilt, std::numbers::pi;
  if (std::isfinite(velocity)) {
    b.lower.tail(6).setConstant(-velocity);
    b.upper.tail(6).setConstant(velocity);
  }
  return b;
}

Box intersect(const Box& a, const Box& b) {
  return {a.lower.cwiseMax(b.lower), a.upper.cwiseMin(b.upper)};
}

std::vector<std::string> trajectory_header() {
  return {"k", "x", "y", "z", "phi", "theta", "psi", "u", "v", "w", "p", "q", "r",
          "f_t", "tau_x", "tau_y", "tau_z"};
}

}  // namespace

double ShepherdConfig::surveillance_radius() const {
  return radius * std::sqrt(coverage_fraction);
}

void ShepherdConfig::validate() const {
  require(home.size() == 2 && home.allFinite(), "home must be a finite 2-vector");
  require(radius > 0.0, "perimeter radius must be positive");
  require(coverage_fraction > 0.0 && coverage_fraction <= 1.0, "coverage fraction must lie in (0, 1]");
  require(delta > 0.0 && delta < 1.0, "delta must lie in (0, 1)");
  require(sheep_count >= 1, "at least one sheep is required");
  require(rings >= 1 && inner_cells >= 1, "ring grid resolution must be positive");
  require(gamma > 0.0, "violation weight must be positive");
  require(samples >= 1, "sample count must be positive");
}

ShepherdStatistics shepherd_statistics(const ShepherdConfig& cfg, const Vector& x) {
  const DiscSampler sampler(Vector::Zero(2), cfg.radius, cfg.sheep_count);
  const double r2 = std::pow(cfg.surveillance_radius(), 2);
  const int sheep = cfg.sheep_count;
  ShepherdStatistics out;
  out.max_distance = kernels::monte_carlo_map(
      sampler,
      [&](const Vector& xi) {
        double worst = 0.0;
        for (int i = 0; i < sheep; ++i) {
          worst = std::max(worst, (x - xi.segment(2 * i, 2)).norm());
        }
        return worst;
      },
      cfg.samples, cfg.seed, cfg.exec);
  const auto violation = kernels::monte_carlo_map(
      sampler,
      [&](const Vector& xi) {
        double total = 0.0;
        for (int i = 0; i < sheep; ++i) {
          const double s = std::max((x - xi.segment(2 * i, 2)).squaredNorm() - r2, 0.0);
          total += s * s;
        }
        return total;
      },
      cfg.samples, cfg.seed, cfg.exec);
  const auto covered = kernels::monte_carlo_map(
      sampler,
      [&](const Vector& xi) {
        int count = 0;
        for (int i = 0; i < sheep; ++i) {
          count += (x - xi.segment(2 * i, 2)).squaredNorm() <= r2 ? 1 : 0;
        }
        return static_cast<double>(count) / sheep;
      },
      cfg.samples, cfg.seed, cfg.exec);
  const double n = static_cast<double>(cfg.samples);
  out.expected_squared_violation = std::accumulate(violation.begin(), violation.end(), 0.0) / n;
  out.coverage_probability = std::accumulate(covered.begin(), covered.end(), 0.0) / n;
  return out;
}

ShepherdOutcome run_shepherd(const ShepherdConfig& cfg, bool robust, bool resilient) {
  cfg.validate();
  const double r = cfg.surveillance_radius();
  const ScenarioSet grid = disc_ring_grid(Vector::Zero(2), cfg.radius, cfg.rings, cfg.inner_cells);
  const Matrix id2 = Matrix::Identity(2, 2);

  auto finish = [&](ExperimentResult& res, const Vector& x) {
    const ShepherdStatistics stats = shepherd_statistics(cfg, x);
    res.violation_samples = stats.max_distance;
    res.metrics["distance_to_center"] = x.norm();
    res.metrics["distance_to_home"] = (x - cfg.home).norm();
    res.metrics["expected_squared_violation"] = stats.expected_squared_violation;
    res.metrics["coverage_probability"] = stats.coverage_probability;
    res.metrics["surveillance_radius"] = r;
    res.trace_header = {"scenario", "xi_x", "xi_y", "weight", "slack", "g"};
    for (std::size_t j = 0; j < grid.size(); ++j) {
      const double g = (x - grid.xi(j)).squaredNorm() - r * r;
      res.trace.push_back({static_cast<double>(j), grid.xi(j)(0), grid.xi(j)(1), grid.weight(j),
                           res.slack_table(0, static_cast<Eigen::Index>(j)), g});
    }
  };

  ShepherdOutcome out;
  if (robust) {
    const auto start = Clock::now();
    const double rho = cfg.radius * std::sqrt(1.0 - cfg.delta);
    if (!(r > rho)) {
      throw InfeasibleError("robust reduction is infeasible: surveillance radius does not exceed the 1 - delta disc");
    }
    ProblemSpec ps;
    ps.objective = Objective::squared_distance(cfg.home);
    Constraint c = Constraint::ball(id2, Vector::Zero(2), (r - rho) * (r - rho));
    c.soft = false;
    c.tag = "coverage";
    ps.constraints.push_back(c);
    ps.scenarios = ScenarioSet({Vector::Zero(2)}, {1.0}, {1.0});
    const RobustSolution sol = solve_worst_case(ps);
    ExperimentResult res;
    res.experiment = "shepherd";
    res.mode = Mode::robust;
    res.report = sol.report;
    res.decision = sol.z;
    res.objective = sol.report.primal_value;
    res.note = "enforced disc radius " + std::to_string(rho);
    res.metrics["enforced_radius"] = rho;
    // Post-hoc slack the robust point would need on each grid cell.
    res.slack_table = Matrix::Zero(cfg.sheep_count, static_cast<Eigen::Index>(grid.size()));
    for (std::size_t j = 0; j < grid.size(); ++j) {
      const double g = (sol.z - grid.xi(j)).squaredNorm() - r * r;
      res.slack_table.col(static_cast<Eigen::Index>(j)).setConstant(std::max(g, 0.0));
    }
    finish(res, sol.z);
    res.runtime_seconds = seconds_since(start);
    out.robust = std::move(res);
  }
  if (resilient) {
    const auto start = Clock::now();
    ProblemSpec ps;
    ps.objective = Objective::squared_distance(cfg.home);
    for (int i = 0; i < cfg.sheep_count; ++i) {
      Constraint c = Constraint::ball(id2, Vector::Zero(2), r * r);
      c.center_xi = id2;
      c.lipschitz = 2.0 * (cfg.radius + cfg.home.norm());
      c.tag = "sheep" + std::to_string(i);
      ps.constraints.push_back(c);
    }
    ps.scenarios = grid;
    const auto h = ViolationCost::identity(static_cast<std::size_t>(cfg.sheep_count), cfg.gamma);
    const ResilientSolution sol = solve_resilient_joint(ps, h);
    ExperimentResult res;
    res.experiment = "shepherd";
    res.mode = Mode::resilient;
    res.report = sol.report;
    res.decision = sol.z;
    res.objective = sol.report.primal_value;
    res.slack_table = sol.s.s;
    res.metrics["expected_slack_cost"] = expected_cost(ps, h, sol.s);
    res.note = std::to_string(grid.size()) + " ring-grid cells";
    finish(res, sol.z);
    res.runtime_seconds = seconds_since(start);
    out.resilient = std::move(res);
  }
  return out;
}

QuadrotorParams NavigationConfig::navigation_params() {
  QuadrotorParams p = QuadrotorParams::hummingbird();
  p.Ts = 0.6;
  return p;
}

NavigationConfig NavigationConfig::defaults() {
  NavigationConfig cfg;
  cfg.x0 = Vector::Zero(kStateDim);
  cfg.x0(1) = -6.0;
  cfg.x0(5) = std::numbers::pi / 2.0;
  cfg.safety = position_box(-1.0, 1.5, -7.0, 1.5, -1.0, 1.0);
  cfg.waypoints = {
      {5, position_box(0.5, 1.5, -5.0, -3.5, -1.0, 1.0)},
      {10, position_box(-0.5, 0.5, -2.5, -1.5, -1.0, 1.0)},
  };
  cfg.terminal = intersect(position_box(-0.1, 1.0, -0.1, 0.5, -0.1, 0.1), attitude_box(0.1));
  return cfg;
}

void NavigationConfig::validate() const {
  params.validate();
  require(horizon >= 2, "horizon must be at least two");
  require(collision_instant >= 1 && collision_instant <= horizon, "collision instant must lie in 1..N");
  require(!masses.empty() && masses.size() == probabilities.size(), "masses and probabilities must pair up");
  double total = 0.0;
  for (std::size_t j = 0; j < masses.size(); ++j) {
    require(masses[j] >= 0.0, "collision masses must be nonnegative");
    require(probabilities[j] > 0.0, "scenario probabilities must be positive");
    total += probabilities[j];
  }
  require(std::abs(total - 1.0) <= 1e-12, "scenario probabilities must sum to one");
  require(delta >= 0.0 && delta < 1.0, "delta must lie in [0, 1)");
  require(input_bound > 0.0 && gamma > 0.0, "input bound and violation weight must be positive");
  require(x0.size() == kStateDim, "initial state must have twelve entries");
  require(safety.size() == kStateDim && terminal.size() == kStateDim, "boxes must cover the full state");
}

ScenarioBranch collision_branch(const QuadrotorParams& params, double mass) {
  const auto updated = collision_update(Vector::Zero(kStateDim), params, mass).second;
  const StateSpace sys = discrete_model(updated);
  return {sys.A, sys.B, collision_reset(params, mass), Vector::Zero(kStateDim)};
}

LqrProblem navigation_lqr(const NavigationConfig& cfg) {
  const StateSpace sys = discrete_model(cfg.params);
  LqrProblem lqr;
  lqr.A = sys.A;
  lqr.B = sys.B;
  lqr.W = sys.W;
  lqr.Q = Matrix::Identity(kStateDim, kStateDim);
  lqr.R = Matrix::Identity(kInputDim, kInputDim);
  lqr.P_term = solve_dare(lqr.A, lqr.B, lqr.Q, lqr.R);
  lqr.x0 = cfg.x0;
  lqr.N = cfg.horizon;
  lqr.x_bound = attitude_box(std::numeric_limits<double>::infinity());
  lqr.safety_set = cfg.safety;
  lqr.u_bound = Box::symmetric(Vector::Constant(kInputDim, cfg.input_bound));
  lqr.waypoints = cfg.waypoints;
  lqr.terminal_set = cfg.terminal;
  lqr.disturbance = Vector::Zero(kWindDim);
  lqr.slack = {false, false, true, false, true};
  return lqr;
}

namespace {

/// Forward simulation of an input sequence under a realized collision mass.
Matrix simulate_collision(const LqrProblem& lqr, const ScenarioBranch& branch, int ell, const Matrix& inputs) {
  Matrix states(lqr.state_dim(), lqr.N + 1);
  states.col(0) = lqr.x0;
  for (int k = 0; k < lqr.N; ++k) {
    if (k >= ell) {
      states.col(k + 1) = branch.A * states.col(k) + branch.B * inputs.col(k);
    } else {
      Vector next = lqr.A * states.col(k) + lqr.B * inputs.col(k);
      states.col(k + 1) = k + 1 == ell ? Vector(branch.reset * next) : next;
    }
  }
  return states;
}

void fill_navigation_trace(ExperimentResult& res, const Matrix& states, const Matrix& inputs,
                           const std::vector<double>& input_slack) {
  res.trace_header = trajectory_header();
  res.trace_header.push_back("input_slack");
  for (Eigen::Index k = 0; k < states.cols(); ++k) {
    std::vector<double> row{static_cast<double>(k)};
    for (Eigen::Index i = 0; i < states.rows(); ++i) {
      row.push_back(states(i, k));
    }
    for (Eigen::Index i = 0; i < inputs.rows(); ++i) {
      row.push_back(k < inputs.cols() ? inputs(i, k) : std::numeric_limits<double>::quiet_NaN());
    }
    row.push_back(k < static_cast<Eigen::Index>(input_slack.size()) ? input_slack[static_cast<std::size_t>(k)]
                                                                     : std::numeric_limits<double>::quiet_NaN());
    res.trace.push_back(std::move(row));
  }
}

void record_flight(ExperimentResult& res, const NavigationConfig& cfg, const Matrix& states, const Matrix& inputs) {
  const int N = cfg.horizon;
  const int ell = cfg.collision_instant;
  const double terminal_violation = cfg.terminal.violation(states.col(N));
  double excess_post = 0.0;
  double excess_total = 0.0;
  for (int k = 0; k < N; ++k) {
    const double e = std::max(inputs.col(k).cwiseAbs().maxCoeff() - cfg.input_bound, 0.0);
    excess_total = std::max(excess_total, e);
    if (k >= ell) {
      excess_post = std::max(excess_post, e);
    }
  }
  double safety = 0.0;
  for (int k = 1; k < N; ++k) {
    safety = std::max(safety, cfg.safety.violation(states.col(k)));
  }
  res.metrics["terminal_violation"] = terminal_violation;
  res.metrics["reaches_terminal"] = terminal_violation <= 1e-6 ? 1.0 : 0.0;
  res.metrics["terminal_distance"] = states.col(N).head(3).norm();
  res.metrics["input_excess_post_collision"] = excess_post;
  res.metrics["input_excess_total"] = excess_total;
  res.metrics["safety_violation"] = safety;
}

}  // namespace

std::vector<NavigationCase> run_navigation(const NavigationConfig& cfg, bool robust, bool resilient) {
  cfg.validate();
  const LqrProblem lqr = navigation_lqr(cfg);
  const std::size_t nm = cfg.masses.size();
  const int ell = cfg.collision_instant;
  std::vector<ScenarioBranch> branches;
  for (double mass : cfg.masses) {
    branches.push_back(collision_branch(cfg.params, mass));
  }
  std::vector<NavigationCase> cases(nm);
  for (std::size_t j = 0; j < nm; ++j) {
    cases[j].mass = cfg.masses[j];
    cases[j].probability = cfg.probabilities[j];
  }

  if (robust) {
    const auto start = Clock::now();
    // Lightest masses first until the enforced probability reaches 1 − δ.
    std::vector<std::size_t> order(nm);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return cfg.masses[a] < cfg.masses[b]; });
    std::vector<std::size_t> enforced;
    double mass_prob = 0.0;
    for (std::size_t idx : order) {
      if (mass_prob >= 1.0 - cfg.delta - 1e-12) {
        break;
      }
      enforced.push_back(idx);
      mass_prob += cfg.probabilities[idx];
    }
    std::vector<double> probs;
    Coupling coupling;
    coupling.branch_instant = ell;
    std::string note = "enforced masses:";
    for (std::size_t idx : enforced) {
      probs.push_back(cfg.probabilities[idx] / mass_prob);
      coupling.branches.push_back(branches[idx]);
      note += " " + std::to_string(cfg.masses[idx]);
    }
    probs.back() = 1.0 - std::accumulate(probs.begin(), probs.end() - 1, 0.0);
    const LoweredLqr lowered = lower_to_problem_spec(lqr, one_hot_scenarios(probs), coupling);
    const RobustSolution sol = solve_worst_case(lowered.spec);
    const double elapsed = seconds_since(start);
    std::vector<Trajectory> plan;
    if (sol.report.status != SolveStatus::infeasible) {
      plan = extract_plan(lowered, sol.z, lqr.x0);
    }
    for (std::size_t j = 0; j < nm; ++j) {
      ExperimentResult res;
      res.experiment = "navigation";
      res.mode = Mode::robust;
      res.report = sol.report;
      res.decision = sol.z;
      res.objective = sol.report.primal_value;
      res.note = note;
      res.runtime_seconds = elapsed;
      res.metrics["mass"] = cfg.masses[j];
      res.metrics["probability"] = cfg.probabilities[j];
      if (!plan.empty()) {
        // Unplanned masses fly the heaviest enforced branch.
        std::size_t b = enforced.size() - 1;
        for (std::size_t e = 0; e < enforced.size(); ++e) {
          if (enforced[e] == j) {
            b = e;
          }
        }
        const Matrix& inputs = plan[b].inputs;
        const Matrix states = simulate_collision(lqr, branches[j], ell, inputs);
        record_flight(res, cfg, states, inputs);
        res.metrics["dynamics_residual"] = dynamics_residual(lqr, coupling, plan);
        res.metrics["planned"] = std::find(enforced.begin(), enforced.end(), j) != enforced.end() ? 1.0 : 0.0;
        fill_navigation_trace(res, states, inputs, std::vector<double>(static_cast<std::size_t>(cfg.horizon), 0.0));
      }
      cases[j].robust = std::move(res);
    }
  }

  if (resilient) {
    const auto start = Clock::now();
    Coupling coupling;
    coupling.branch_instant = ell;
    coupling.branches = branches;
    const LoweredLqr lowered = lower_to_problem_spec(lqr, one_hot_scenarios(cfg.probabilities), coupling);
    const auto h = ViolationCost::identity(lowered.spec.constraint_count(), cfg.gamma);
    const ResilientSolution sol = solve_resilient_joint(lowered.spec, h);
    const double elapsed = seconds_since(start);
    std::vector<Trajectory> plan;
    if (sol.report.status != SolveStatus::infeasible) {
      plan = extract_plan(lowered, sol.z, lqr.x0);
    }
    for (std::size_t j = 0; j < nm; ++j) {
      ExperimentResult res;
      res.experiment = "navigation";
      res.mode = Mode::resilient;
      res.report = sol.report;
      res.decision = sol.z;
      res.objective = sol.report.primal_value;
      res.slack_table = sol.s.s;
      res.runtime_seconds = elapsed;
      res.metrics["mass"] = cfg.masses[j];
      res.metrics["probability"] = cfg.probabilities[j];
      if (!plan.empty()) {
        const Matrix& inputs = plan[j].inputs;
        const Matrix states = simulate_collision(lqr, branches[j], ell, inputs);
        record_flight(res, cfg, states, inputs);
        res.metrics["dynamics_residual"] = dynamics_residual(lqr, coupling, plan);
        res.metrics["thrust_slack"] = family_slack_norm(lowered, sol.s, RowFamily::input, j, ell, cfg.horizon);
        res.metrics["thrust_slack_total"] = family_slack_norm(lowered, sol.s, RowFamily::input, j);
        res.metrics["terminal_slack"] = family_slack_norm(lowered, sol.s, RowFamily::terminal, j);
        res.metrics["terminal_slack_max"] = family_slack(lowered, sol.s, RowFamily::terminal, j);
        std::vector<double> per_step;
        for (int k = 0; k < cfg.horizon; ++k) {
          per_step.push_back(family_slack(lowered, sol.s, RowFamily::input, j, k, k));
        }
        fill_navigation_trace(res, states, inputs, per_step);
      }
      cases[j].resilient = std::move(res);
    }
  }
  return cases;
}

QuadrotorParams MpcWindConfig::mpc_params() {
  QuadrotorParams p = QuadrotorParams::hummingbird();
  p.Ts = 0.5;
  return p;
}

MpcWindConfig MpcWindConfig::defaults() {
  MpcWindConfig cfg;
  cfg.x0 = Vector::Zero(kStateDim);
  cfg.x0(1) = 10.0;
  cfg.x0(5) = -std::numbers::pi / 2.0;
  cfg.safety = position_box(-10.0, 0.1, -0.5, 10.1, -1.0, 1.0);
  cfg.terminal = intersect(position_box(-0.1, 0.1, -0.1, 0.1, -0.1, 0.1), attitude_box(0.1));
  return cfg;
}

void MpcWindConfig::validate() const {
  params.validate();
  require(horizon >= 1 && step_cap >= 1, "horizon and step cap must be positive");
  require(input_bound > 0.0 && gamma > 0.0, "input bound and violation weight must be positive");
  require(x0.size() == kStateDim, "initial state must have twelve entries");
  require(safety.size() == kStateDim && terminal.size() == kStateDim, "boxes must cover the full state");
}

Vector MpcWindConfig::wind_at(int t) const {
  Vector w = Vector::Zero(kWindDim);
  for (const Gust& g : gusts) {
    if (g.step == t) {
      w(0) = g.force_x;
    }
  }
  return w;
}

ExperimentResult run_mpc_wind(const MpcWindConfig& cfg, Mode mode) {
  cfg.validate();
  const auto start = Clock::now();
  const StateSpace sys = discrete_model(cfg.params);
  LqrProblem lqr;
  lqr.A = sys.A;
  lqr.B = sys.B;
  lqr.W = sys.W;
  lqr.Q = Matrix::Identity(kStateDim, kStateDim);
  lqr.R = Matrix::Identity(kInputDim, kInputDim);
  lqr.P_term = solve_dare(lqr.A, lqr.B, lqr.Q, lqr.R);
  lqr.x0 = cfg.x0;
  lqr.N = cfg.horizon;
  lqr.x_bound = attitude_box(10.0);
  lqr.safety_set = cfg.safety;
  lqr.u_bound = Box::symmetric(Vector::Constant(kInputDim, cfg.input_bound));
  lqr.terminal_set = cfg.terminal;
  lqr.disturbance = Vector::Zero(kWindDim);
  lqr.slack = {false, true, true, false, false};
  const ViolationCost h = ViolationCost::identity(1, cfg.gamma);

  ExperimentResult res;
  res.experiment = "mpc-wind";
  res.mode = mode;
  res.trace_header = trajectory_header();
  res.trace_header.front() = "t";
  for (const char* col : {"f_wx", "input_slack", "plan_safety_slack", "safety_violation"}) {
    res.trace_header.emplace_back(col);
  }
  Vector x = cfg.x0;
  double worst_residual = 0.0;
  double worst_safety = 0.0;
  double gust_slack = 0.0;
  double total_cost = 0.0;
  res.note = "step-cap";
  res.report.status = SolveStatus::converged;
  int t = 0;
  auto log_row = [&](const Vector& u, double wind, double input_slack, double plan_safety) {
    std::vector<double> row{static_cast<double>(t)};
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      row.push_back(x(i));
    }
    for (Eigen::Index i = 0; i < kInputDim; ++i) {
      row.push_back(u.size() > 0 ? u(i) : std::numeric_limits<double>::quiet_NaN());
    }
    row.push_back(wind);
    row.push_back(input_slack);
    row.push_back(plan_safety);
    row.push_back(cfg.safety.violation(x));
    res.trace.push_back(std::move(row));
  };
  for (; t < cfg.step_cap; ++t) {
    worst_safety = std::max(worst_safety, cfg.safety.violation(x));
    if (cfg.terminal.contains(x, 1e-9)) {
      res.note = "terminal";
      break;
    }
    if (mode == Mode::robust && cfg.safety.violation(x) > 1e-9) {
      res.note = "left-safety-set";
      break;
    }
    MpcStep plan_step;
    try {
      plan_step = mpc_step(lqr, x, cfg.wind_at(t - 1), mode, h);
    } catch (const std::exception& e) {
      res.note = std::string("solver-error: ") + e.what();
      res.report.status = SolveStatus::infeasible;
      break;
    }
    res.report.iterations += plan_step.report.iterations;
    if (plan_step.report.status == SolveStatus::infeasible) {
      res.note = "infeasible";
      res.report.status = SolveStatus::infeasible;
      break;
    }
    if (plan_step.report.status != SolveStatus::converged) {
      res.report.status = plan_step.report.status;
    }
    LqrProblem local = lqr;
    local.x0 = x;
    local.disturbance = cfg.wind_at(t - 1);
    worst_residual = std::max(worst_residual, dynamics_residual(local, {}, {plan_step.plan}));
    const double input_slack = family_slack(plan_step.lowered, plan_step.slack, RowFamily::input, 0, 0, 0);
    const double plan_safety = family_slack(plan_step.lowered, plan_step.slack, RowFamily::safety, 0);
    if (t >= 5 && t <= 9) {
      gust_slack = std::max(gust_slack, input_slack);
    }
    const Vector w = cfg.wind_at(t);
    log_row(plan_step.u_apply, w(0), input_slack, plan_safety);
    total_cost += x.dot(x) + plan_step.u_apply.dot(plan_step.u_apply);
    x = step(sys, x, plan_step.u_apply, w);
  }
  log_row(Vector(), std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN(),
          std::numeric_limits<double>::quiet_NaN());
  if (t == cfg.step_cap && cfg.terminal.contains(x, 1e-9)) {
    res.note = "terminal";
  }
  res.decision = x;
  res.objective = total_cost;
  res.metrics["steps"] = t;
  res.metrics["reached_terminal"] = res.note == "terminal" ? 1.0 : 0.0;
  res.metrics["max_plan_dynamics_residual"] = worst_residual;
  res.metrics["max_safety_violation"] = std::max(worst_safety, cfg.safety.violation(x));
  res.metrics["max_input_slack_t5_9"] = gust_slack;
  res.runtime_seconds = seconds_since(start);
  return res;
}

}  // namespace resilia
