#include "resilia/lqr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "resilia/robust.hpp"

namespace resilia {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool ok, const char* what) {
  if (!ok) {
    throw std::invalid_argument(what);
  }
}

bool is_symmetric_psd(const Matrix& M, double floor) {
  if (M.rows() != M.cols() || (M - M.transpose()).cwiseAbs().maxCoeff() > 1e-10 * (1.0 + M.cwiseAbs().maxCoeff())) {
    return false;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(M, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff() >= floor;
}

void check_box(const Box& b, Eigen::Index n, const char* what) {
  require(b.lower.size() == n && b.upper.size() == n, what);
  require(((b.lower.array() <= b.upper.array())).all(), what);
}

/// Row builder: accumulates one requirement whose coefficients live either in
/// the shared block (ξ-independent) or in a per-branch column of a_xi.
struct RowBuilder {
  const TrajectoryLayout& lay;
  std::size_t branches;
  bool shared;
  Vector a;
  Matrix a_xi;
  Vector b_xi;
  double b = 0.0;

  RowBuilder(const TrajectoryLayout& layout, std::size_t nb, bool is_shared)
      : lay(layout), branches(nb), shared(is_shared) {
    if (shared) {
      a = Vector::Zero(lay.dimension);
    } else {
      a = Vector::Zero(lay.dimension);
      a_xi = Matrix::Zero(lay.dimension, static_cast<Eigen::Index>(branches));
      b_xi = Vector::Zero(static_cast<Eigen::Index>(branches));
    }
  }

  void add(std::size_t j, Eigen::Index idx, double v) {
    if (shared) {
      a(idx) += v;
    } else {
      a_xi(idx, static_cast<Eigen::Index>(j)) += v;
    }
  }

  void set_rhs(std::size_t j, double v) {
    if (shared) {
      b = v;
    } else {
      b_xi(static_cast<Eigen::Index>(j)) = v;
    }
  }

  Constraint build(double sign) const {
    Constraint c = Constraint::affine_row(sign * a, sign * b);
    if (!shared) {
      c.a_xi = sign * a_xi;
      c.b_xi = sign * b_xi;
    }
    return c;
  }
};

}  // namespace

Box Box::symmetric(const Vector& bound) {
  require((bound.array() >= 0.0).all(), "symmetric bound must be nonnegative");
  return {-bound, bound};
}

Box Box::unbounded(Eigen::Index n) {
  return {Vector::Constant(n, -kInf), Vector::Constant(n, kInf)};
}

bool Box::contains(const Vector& x, double tol) const {
  return violation(x) <= tol;
}

double Box::violation(const Vector& x) const {
  require(x.size() == lower.size(), "point and box dimensions differ");
  double v = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    v = std::max({v, lower(i) - x(i), x(i) - upper(i)});
  }
  return v;
}

void LqrProblem::validate() const {
  const auto n = state_dim();
  const auto q = input_dim();
  require(n > 0 && A.cols() == n, "A must be square");
  require(q > 0 && B.rows() == n, "B must have one row per state");
  require(W.rows() == n, "W must have one row per state");
  require(disturbance.size() == W.cols(), "disturbance and W disagree");
  require(x0.size() == n, "initial state has the wrong dimension");
  require(N >= 1, "horizon must be positive");
  require(Q.rows() == n && is_symmetric_psd(Q, -1e-12), "Q must be symmetric positive semidefinite");
  require(P_term.rows() == n && is_symmetric_psd(P_term, -1e-12), "P must be symmetric positive semidefinite");
  require(R.rows() == q && is_symmetric_psd(R, 1e-14), "R must be symmetric positive definite");
  check_box(x_bound, n, "state bounds are inconsistent");
  check_box(u_bound, q, "input bounds are inconsistent");
  for (const Waypoint& wp : waypoints) {
    require(wp.k >= 1 && wp.k <= N, "waypoint instant outside the horizon");
    check_box(wp.box, n, "waypoint box is inconsistent");
  }
  if (terminal_set) {
    check_box(*terminal_set, n, "terminal set is inconsistent");
  }
  if (safety_set) {
    check_box(*safety_set, n, "safety set is inconsistent");
  }
}

const char* to_string(RowFamily family) {
  switch (family) {
    case RowFamily::dynamics:
      return "dynamics";
    case RowFamily::state:
      return "state";
    case RowFamily::safety:
      return "safety";
    case RowFamily::input:
      return "input";
    case RowFamily::waypoint:
      return "waypoint";
    case RowFamily::terminal:
      return "terminal";
  }
  return "unknown";
}

Eigen::Index TrajectoryLayout::state_index(int k, std::size_t j) const {
  if (k < 1 || k > N) {
    throw std::out_of_range("state instant outside the horizon");
  }
  const int shared_states = std::min(ell - 1, N);
  const int shared_inputs = std::min(ell, N);
  if (k < ell) {
    return (k - 1) * n;
  }
  const Eigen::Index base = shared_states * n + shared_inputs * q;
  const Eigen::Index per_branch = (N - ell + 1) * n + (N - ell) * q;
  return base + static_cast<Eigen::Index>(j) * per_branch + (k - ell) * n;
}

Eigen::Index TrajectoryLayout::input_index(int k, std::size_t j) const {
  if (k < 0 || k >= N) {
    throw std::out_of_range("input instant outside the horizon");
  }
  const int shared_states = std::min(ell - 1, N);
  const int shared_inputs = std::min(ell, N);
  if (k < ell) {
    return shared_states * n + k * q;
  }
  const Eigen::Index base = shared_states * n + shared_inputs * q;
  const Eigen::Index per_branch = (N - ell + 1) * n + (N - ell) * q;
  return base + static_cast<Eigen::Index>(j) * per_branch + (N - ell + 1) * n + (k - ell) * q;
}

LoweredLqr lower_to_problem_spec(const LqrProblem& lqr, const ScenarioSet& scenarios, const Coupling& coupling) {
  lqr.validate();
  const auto n = lqr.state_dim();
  const auto q = lqr.input_dim();
  const int N = lqr.N;
  const std::size_t nsc = scenarios.size();
  require(nsc > 0, "scenario set is empty");

  LoweredLqr out;
  TrajectoryLayout& lay = out.layout;
  lay.n = n;
  lay.q = q;
  lay.N = N;
  if (coupling.branched()) {
    require(coupling.branch_instant >= 1 && coupling.branch_instant <= N,
            "branch instant must lie in 1..N");
    require(coupling.branches.size() == nsc, "one branch per scenario is required");
    require(static_cast<std::size_t>(scenarios.dimension()) == nsc, "branching needs one-hot scenarios");
    for (std::size_t j = 0; j < nsc; ++j) {
      require(scenarios.xi(j).isApprox(Vector::Unit(static_cast<Eigen::Index>(nsc), static_cast<Eigen::Index>(j))),
              "branching needs one-hot scenarios");
      const ScenarioBranch& br = coupling.branches[j];
      require(br.A.rows() == n && br.A.cols() == n && br.B.rows() == n && br.B.cols() == q,
              "branch dynamics have the wrong shape");
      require(br.reset.rows() == n && br.reset.cols() == n && br.offset.size() == n,
              "branch reset or offset has the wrong shape");
    }
    lay.ell = coupling.branch_instant;
    lay.branches = nsc;
  } else {
    lay.ell = N + 1;
    lay.branches = 1;
  }
  const int ell = lay.ell;
  const int shared_states = std::min(ell - 1, N);
  const int shared_inputs = std::min(ell, N);
  lay.dimension = shared_states * n + shared_inputs * q +
                  static_cast<Eigen::Index>(coupling.branched() ? nsc : 0) * ((N - ell + 1) * n + (N - ell) * q);
  const Eigen::Index p = lay.dimension;
  const std::size_t nb = lay.branches;

  // Objective: shared blocks carry total weight one, branch blocks w_j.
  Objective& obj = out.spec.objective;
  obj.quadratic = Matrix::Zero(p, p);
  obj.linear = Vector::Zero(p);
  obj.offset = lqr.x0.dot(lqr.Q * lqr.x0);
  for (std::size_t j = 0; j < nb; ++j) {
    const double w = coupling.branched() ? scenarios.weight(j) : 1.0;
    for (int k = 1; k <= N; ++k) {
      if (k < ell && j > 0) {
        continue;
      }
      const double wk = k < ell ? 1.0 : w;
      const Matrix& Qk = k == N ? lqr.P_term : lqr.Q;
      const auto i = lay.state_index(k, j);
      obj.quadratic.block(i, i, n, n) += wk * Qk;
    }
    for (int k = 0; k < N; ++k) {
      if (k < ell && j > 0) {
        continue;
      }
      const double wk = k < ell ? 1.0 : w;
      const auto i = lay.input_index(k, j);
      obj.quadratic.block(i, i, q, q) += wk * lqr.R;
    }
  }

  std::vector<Constraint>& rows = out.spec.constraints;
  auto push_pair = [&](const RowBuilder& rb, RowInfo info, const std::string& tag) {
    const std::size_t first = rows.size();
    Constraint up = rb.build(1.0);
    Constraint dn = rb.build(-1.0);
    up.soft = dn.soft = false;
    up.mirror = first + 1;
    dn.mirror = first;
    up.tag = dn.tag = tag;
    rows.push_back(std::move(up));
    rows.push_back(std::move(dn));
    info.upper = true;
    out.rows.push_back(info);
    info.upper = false;
    out.rows.push_back(info);
  };

  const Vector drift = lqr.W * lqr.disturbance;
  // Dynamics.
  for (int k = 0; k < N; ++k) {
    const bool shared = (k + 1) < ell;
    for (Eigen::Index r = 0; r < n; ++r) {
      RowBuilder rb(lay, nb, shared);
      for (std::size_t j = 0; j < (shared ? 1 : nb); ++j) {
        const bool post = k >= ell;
        const Matrix& Ak = post ? coupling.branches[j].A : lqr.A;
        const Matrix& Bk = post ? coupling.branches[j].B : lqr.B;
        // Row r of x_{k+1} = M (A x_k + B u_k + d); M is the reset at k+1 = ℓ.
        Vector mrow = Vector::Unit(n, r);
        Vector offset = post ? coupling.branches[j].offset : drift;
        if (!shared && k + 1 == ell) {
          mrow = coupling.branches[j].reset.row(r).transpose();
        }
        const Vector arow = Ak.transpose() * mrow;
        const Vector brow = Bk.transpose() * mrow;
        double rhs = mrow.dot(offset);
        rb.add(j, lay.state_index(k + 1, j) + r, 1.0);
        if (k == 0) {
          rhs += arow.dot(lqr.x0);
        } else {
          const auto xi = lay.state_index(k, j);
          for (Eigen::Index c = 0; c < n; ++c) {
            if (arow(c) != 0.0) {
              rb.add(j, xi + c, -arow(c));
            }
          }
        }
        const auto ui = lay.input_index(k, j);
        for (Eigen::Index c = 0; c < q; ++c) {
          if (brow(c) != 0.0) {
            rb.add(j, ui + c, -brow(c));
          }
        }
        rb.set_rhs(j, rhs);
      }
      push_pair(rb, {RowFamily::dynamics, k + 1, r, true, shared}, "dyn");
    }
  }

  auto push_bounds = [&](RowFamily family, int k, bool is_state, const Box& box, bool soft, const char* tag) {
    const bool shared = k < ell;
    const Eigen::Index dim = is_state ? n : q;
    for (Eigen::Index r = 0; r < dim; ++r) {
      for (int side = 0; side < 2; ++side) {
        const double bound = side == 0 ? box.upper(r) : box.lower(r);
        if (!std::isfinite(bound)) {
          continue;
        }
        const double sign = side == 0 ? 1.0 : -1.0;
        RowBuilder rb(lay, nb, shared);
        for (std::size_t j = 0; j < (shared ? 1 : nb); ++j) {
          const auto idx = is_state ? lay.state_index(k, j) : lay.input_index(k, j);
          rb.add(j, idx + r, sign);
          rb.set_rhs(j, sign * bound);
        }
        Constraint c = rb.build(1.0);
        c.soft = soft;
        c.tag = tag;
        rows.push_back(std::move(c));
        out.rows.push_back({family, k, r, side == 0, shared});
      }
    }
  };

  for (int k = 1; k < N; ++k) {
    push_bounds(RowFamily::state, k, true, lqr.x_bound, lqr.slack.state, "state");
    if (lqr.safety_set) {
      push_bounds(RowFamily::safety, k, true, *lqr.safety_set, lqr.slack.safety, "safety");
    }
  }
  for (int k = 0; k < N; ++k) {
    push_bounds(RowFamily::input, k, false, lqr.u_bound, lqr.slack.input, "input");
  }
  for (const Waypoint& wp : lqr.waypoints) {
    push_bounds(RowFamily::waypoint, wp.k, true, wp.box, lqr.slack.waypoint, "waypoint");
  }
  if (lqr.terminal_set) {
    push_bounds(RowFamily::terminal, N, true, *lqr.terminal_set, lqr.slack.terminal, "terminal");
  }

  out.spec.scenarios = scenarios;
  return out;
}

std::vector<Trajectory> extract_plan(const LoweredLqr& lowered, const Vector& z, const Vector& x0) {
  const TrajectoryLayout& lay = lowered.layout;
  if (z.size() != lay.dimension || x0.size() != lay.n) {
    throw std::invalid_argument("decision vector or initial state has the wrong dimension");
  }
  std::vector<Trajectory> plans(lay.branches);
  for (std::size_t j = 0; j < lay.branches; ++j) {
    Trajectory& t = plans[j];
    t.states = Matrix::Zero(lay.n, lay.N + 1);
    t.inputs = Matrix::Zero(lay.q, lay.N);
    t.states.col(0) = x0;
    for (int k = 1; k <= lay.N; ++k) {
      t.states.col(k) = z.segment(lay.state_index(k, j), lay.n);
    }
    for (int k = 0; k < lay.N; ++k) {
      t.inputs.col(k) = z.segment(lay.input_index(k, j), lay.q);
    }
  }
  return plans;
}

double dynamics_residual(const LqrProblem& lqr, const Coupling& coupling, const std::vector<Trajectory>& plan) {
  const Vector drift = lqr.W * lqr.disturbance;
  const int ell = coupling.branched() ? coupling.branch_instant : lqr.N + 1;
  double worst = 0.0;
  for (std::size_t j = 0; j < plan.size(); ++j) {
    const Trajectory& t = plan[j];
    for (int k = 0; k < lqr.N; ++k) {
      Vector pred;
      if (k >= ell) {
        const ScenarioBranch& br = coupling.branches[j];
        pred = br.A * t.states.col(k) + br.B * t.inputs.col(k) + br.offset;
      } else {
        pred = lqr.A * t.states.col(k) + lqr.B * t.inputs.col(k) + drift;
        if (k + 1 == ell) {
          pred = coupling.branches[j].reset * pred;
        }
      }
      worst = std::max(worst, (t.states.col(k + 1) - pred).cwiseAbs().maxCoeff());
    }
  }
  return worst;
}

Matrix dare_closed_loop(const Matrix& A, const Matrix& B, const Matrix& R, const Matrix& P) {
  const Matrix S = R + B.transpose() * P * B;
  return A - B * S.ldlt().solve(B.transpose() * P * A);
}

double dare_residual(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R, const Matrix& P) {
  const Matrix S = R + B.transpose() * P * B;
  const Matrix PA = P * A;
  const Matrix rhs = A.transpose() * PA - PA.transpose() * B * S.ldlt().solve(B.transpose() * PA) + Q;
  return (P - rhs).cwiseAbs().maxCoeff() / (1.0 + P.cwiseAbs().maxCoeff());
}

Matrix solve_dare(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R) {
  const auto n = A.rows();
  require(A.cols() == n && B.rows() == n && Q.rows() == n && Q.cols() == n, "Riccati shapes are inconsistent");
  require(R.rows() == B.cols() && R.cols() == B.cols(), "R must match the input dimension");
  const Matrix id = Matrix::Identity(n, n);
  Matrix Ak = A;
  Matrix Gk = B * R.ldlt().solve(B.transpose());
  Matrix Hk = Q;
  for (int it = 0; it < 100; ++it) {
    const Matrix Wk = id + Gk * Hk;
    const auto lu = Wk.partialPivLu();
    const Matrix WA = lu.solve(Ak);
    const Matrix WG = lu.solve(Gk);
    const Matrix H_next = Hk + Ak.transpose() * Hk * WA;
    Gk = Gk + Ak * WG * Ak.transpose();
    Ak = Ak * WA;
    const double change = (H_next - Hk).cwiseAbs().maxCoeff();
    Hk = 0.5 * (H_next + H_next.transpose());
    Gk = 0.5 * (Gk + Gk.transpose());
    if (!Hk.allFinite()) {
      break;
    }
    if (change <= 1e-15 * (1.0 + Hk.cwiseAbs().maxCoeff())) {
      break;
    }
  }
  if (!Hk.allFinite()) {
    throw std::runtime_error("Riccati doubling diverged");
  }
  // A few fixed-point sweeps tidy up rounding left by the doubling.
  for (int it = 0; it < 3; ++it) {
    const Matrix S = R + B.transpose() * Hk * B;
    const Matrix PA = Hk * A;
    Matrix next = A.transpose() * PA - PA.transpose() * B * S.ldlt().solve(B.transpose() * PA) + Q;
    Hk = 0.5 * (next + next.transpose());
  }
  if (dare_residual(A, B, Q, R, Hk) > 1e-9) {
    throw std::runtime_error("Riccati doubling did not converge");
  }
  return Hk;
}

const char* to_string(Mode mode) {
  return mode == Mode::robust ? "robust" : "resilient";
}

ViolationCost expand_cost(const ViolationCost& h, std::size_t m) {
  if (h.kind == CostKind::quadratic && h.dimension() == 1) {
    return ViolationCost::identity(m, h.gamma(0, 0));
  }
  if (h.dimension() != m) {
    throw std::invalid_argument("violation cost dimension does not match the lowered problem");
  }
  return h;
}

MpcStep mpc_step(const LqrProblem& lqr, const Vector& x_now, const Vector& w_prev, Mode mode,
                 const ViolationCost& h) {
  LqrProblem local = lqr;
  local.x0 = x_now;
  local.disturbance = w_prev;
  const std::vector<double> one{1.0};
  MpcStep out;
  out.lowered = lower_to_problem_spec(local, one_hot_scenarios(one));
  const ProblemSpec& ps = out.lowered.spec;
  Vector z;
  if (mode == Mode::robust) {
    RobustSolution r = solve_worst_case(ps);
    z = r.z;
    out.report = r.report;
    out.slack = SlackMap::zeros(ps);
  } else {
    ResilientSolution r = solve_resilient_joint(ps, expand_cost(h, ps.constraint_count()));
    z = r.z;
    out.report = r.report;
    out.slack = r.s;
  }
  if (out.report.status == SolveStatus::infeasible) {
    out.u_apply = Vector::Zero(lqr.input_dim());
    out.plan.states = Matrix::Constant(lqr.state_dim(), lqr.N + 1, std::numeric_limits<double>::quiet_NaN());
    out.plan.inputs = Matrix::Constant(lqr.input_dim(), lqr.N, std::numeric_limits<double>::quiet_NaN());
    return out;
  }
  out.plan = extract_plan(out.lowered, z, x_now).front();
  out.u_apply = out.plan.inputs.col(0);
  return out;
}

namespace {

template <typename Fold>
double fold_family(const LoweredLqr& lowered, const SlackMap& s, RowFamily family, std::size_t j, int k_min,
                   int k_max, Fold fold) {
  if (s.s.rows() != static_cast<Eigen::Index>(lowered.rows.size())) {
    throw std::invalid_argument("slack map does not match the lowered problem");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < lowered.rows.size(); ++i) {
    const RowInfo& info = lowered.rows[i];
    if (info.family != family || info.k < k_min || info.k > k_max) {
      continue;
    }
    acc = fold(acc, s.s(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
  }
  return acc;
}

}  // namespace

double family_slack(const LoweredLqr& lowered, const SlackMap& s, RowFamily family, std::size_t j, int k_min,
                    int k_max) {
  return fold_family(lowered, s, family, j, k_min, k_max, [](double a, double v) { return std::max(a, v); });
}

double family_slack_norm(const LoweredLqr& lowered, const SlackMap& s, RowFamily family, std::size_t j, int k_min,
                         int k_max) {
  return std::sqrt(
      fold_family(lowered, s, family, j, k_min, k_max, [](double a, double v) { return a + v * v; }));
}

}  // namespace resilia
