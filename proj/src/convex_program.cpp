#include "resilia/convex_program.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/SparseCholesky>

namespace resilia {

using Eigen::Index;
using Eigen::VectorXd;

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::converged:
      return "converged";
    case SolveStatus::max_iterations:
      return "max-iterations";
    case SolveStatus::infeasible:
      return "infeasible";
  }
  return "unknown";
}

double ConvexProgram::objective(const VectorXd& x) const {
  return 0.5 * x.dot(hessian * x) + linear.dot(x) + offset;
}

VectorXd ConvexProgram::inequality_values(const VectorXd& x) const {
  VectorXd q = ineq_matrix * x - ineq_rhs;
  for (const auto& term : quadratic_rows) {
    q(term.row) += (term.selector * x - term.center).squaredNorm();
  }
  return q;
}

namespace {

using Triplet = Eigen::Triplet<double>;

double inf_norm(const VectorXd& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

// Largest step in (0, 1] keeping v + alpha * dv >= 0.
double max_step(const VectorXd& v, const VectorXd& dv) {
  double alpha = 1.0;
  for (Index k = 0; k < v.size(); ++k) {
    if (dv(k) < 0.0) {
      alpha = std::min(alpha, -v(k) / dv(k));
    }
  }
  return alpha;
}

class KktSystem {
 public:
  KktSystem(Index n, Index p) : n_(n), p_(p) {}

  bool factor(const SparseMatrix& m, const SparseMatrix& e, double reg) {
    std::vector<Triplet> exact;
    exact.reserve(static_cast<std::size_t>(m.nonZeros() + 2 * e.nonZeros()));
    for (Index col = 0; col < m.outerSize(); ++col) {
      for (SparseMatrix::InnerIterator it(m, col); it; ++it) {
        exact.emplace_back(it.row(), it.col(), it.value());
      }
    }
    for (Index col = 0; col < e.outerSize(); ++col) {
      for (SparseMatrix::InnerIterator it(e, col); it; ++it) {
        exact.emplace_back(n_ + it.row(), it.col(), it.value());
        exact.emplace_back(it.col(), n_ + it.row(), it.value());
      }
    }
    exact_.resize(n_ + p_, n_ + p_);
    exact_.setFromTriplets(exact.begin(), exact.end());
    std::vector<Triplet> shifted = exact;
    for (Index k = 0; k < n_; ++k) {
      shifted.emplace_back(k, k, reg);
    }
    for (Index k = 0; k < p_; ++k) {
      shifted.emplace_back(n_ + k, n_ + k, -reg);
    }
    SparseMatrix regularized(n_ + p_, n_ + p_);
    regularized.setFromTriplets(shifted.begin(), shifted.end());
    solver_.compute(regularized);
    return solver_.info() == Eigen::Success;
  }

  VectorXd solve(const VectorXd& rhs) const {
    VectorXd sol = solver_.solve(rhs);
    for (int pass = 0; pass < 4; ++pass) {
      const VectorXd residual = rhs - exact_ * sol;
      if (inf_norm(residual) <= 1e-15 * (1.0 + inf_norm(rhs))) {
        break;
      }
      sol += solver_.solve(residual);
    }
    return sol;
  }

 private:
  Index n_;
  Index p_;
  SparseMatrix exact_;
  Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> solver_;
};

struct Linearization {
  SparseMatrix jacobian;
  SparseMatrix curvature;
};

// Constraint Jacobian at x and the curvature Σ λ_k ∇²q_k of the quadratic rows.
Linearization linearize(const ConvexProgram& prog, const VectorXd& x, const VectorXd& lam) {
  const Index n = prog.n;
  std::vector<Triplet> jac;
  std::vector<Triplet> curv;
  for (Index col = 0; col < prog.ineq_matrix.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(prog.ineq_matrix, col); it; ++it) {
      jac.emplace_back(it.row(), it.col(), it.value());
    }
  }
  for (const auto& term : prog.quadratic_rows) {
    const VectorXd grad = 2.0 * (term.selector.transpose() * (term.selector * x - term.center));
    for (Index k = 0; k < n; ++k) {
      if (grad(k) != 0.0) {
        jac.emplace_back(term.row, k, grad(k));
      }
    }
    const SparseMatrix sts = SparseMatrix(term.selector.transpose()) * term.selector;
    for (Index col = 0; col < sts.outerSize(); ++col) {
      for (SparseMatrix::InnerIterator it(sts, col); it; ++it) {
        curv.emplace_back(it.row(), it.col(), 2.0 * lam(term.row) * it.value());
      }
    }
  }
  Linearization out{SparseMatrix(prog.ineq_matrix.rows(), n), SparseMatrix(n, n)};
  out.jacobian.setFromTriplets(jac.begin(), jac.end());
  out.curvature.setFromTriplets(curv.begin(), curv.end());
  return out;
}

struct Residuals {
  double primal = 0.0;
  double dual = 0.0;
};

Residuals residuals(const ConvexProgram& prog, const VectorXd& x, const VectorXd& y, const VectorXd& lam) {
  const Linearization lin = linearize(prog, x, lam);
  const VectorXd r_d = prog.hessian * x + prog.linear + prog.eq_matrix.transpose() * y + lin.jacobian.transpose() * lam;
  const VectorXd q = prog.inequality_values(x);
  Residuals r;
  r.primal = std::max(inf_norm(prog.eq_matrix * x - prog.eq_rhs), q.size() > 0 ? std::max(q.maxCoeff(), 0.0) : 0.0);
  r.dual = inf_norm(r_d);
  return r;
}

// Newton steps on the KKT system of the guessed active set. Interior-point
// iterates approach degenerate vertices only at rate sqrt(mu); this snaps
// them onto the face. Returns false when the guess is inconsistent, or when
// `strict` and the result misses the tolerances.
bool polish(const ConvexProgram& prog, VectorXd& x, VectorXd& y, VectorXd& lam, const VectorXd& w,
            double tol_p, double tol_d, bool strict) {
  const Index n = prog.n;
  const Index p = prog.eq_matrix.rows();
  const Index m = prog.ineq_matrix.rows();
  std::vector<Index> active;
  for (Index k = 0; k < m; ++k) {
    if (lam(k) >= w(k)) {
      active.push_back(k);
    }
  }
  const auto na = static_cast<Index>(active.size());
  VectorXd px = x;
  VectorXd py = y;
  VectorXd pl = VectorXd::Zero(m);
  for (Index a = 0; a < na; ++a) {
    pl(active[a]) = lam(active[a]);
  }
  KktSystem kkt(n, p + na);
  for (int pass = 0; pass < 6; ++pass) {
    const Linearization lin = linearize(prog, px, pl);
    std::vector<Triplet> rows;
    for (Index col = 0; col < prog.eq_matrix.outerSize(); ++col) {
      for (SparseMatrix::InnerIterator it(prog.eq_matrix, col); it; ++it) {
        rows.emplace_back(it.row(), it.col(), it.value());
      }
    }
    std::vector<Index> slot(static_cast<std::size_t>(m), -1);
    for (Index a = 0; a < na; ++a) {
      slot[static_cast<std::size_t>(active[a])] = p + a;
    }
    for (Index col = 0; col < lin.jacobian.outerSize(); ++col) {
      for (SparseMatrix::InnerIterator it(lin.jacobian, col); it; ++it) {
        const Index s = slot[static_cast<std::size_t>(it.row())];
        if (s >= 0) {
          rows.emplace_back(s, it.col(), it.value());
        }
      }
    }
    SparseMatrix e(p + na, n);
    e.setFromTriplets(rows.begin(), rows.end());
    VectorXd mult(p + na);
    mult.head(p) = py;
    const VectorXd q = prog.inequality_values(px);
    VectorXd rhs(n + p + na);
    rhs.head(n) = -(prog.hessian * px + prog.linear + prog.eq_matrix.transpose() * py +
                    lin.jacobian.transpose() * pl);
    rhs.segment(n, p) = -(prog.eq_matrix * px - prog.eq_rhs);
    for (Index a = 0; a < na; ++a) {
      mult(p + a) = pl(active[a]);
      rhs(n + p + a) = -q(active[a]);
    }
    if (!kkt.factor(prog.hessian + lin.curvature, e, 1e-13)) {
      return false;
    }
    const VectorXd step = kkt.solve(rhs);
    if (!step.allFinite()) {
      return false;
    }
    px += step.head(n);
    mult += step.tail(p + na);
    py = mult.head(p);
    for (Index a = 0; a < na; ++a) {
      pl(active[a]) = mult(p + a);
    }
    if (prog.quadratic_rows.empty() || inf_norm(step) <= 1e-15 * (1.0 + inf_norm(px))) {
      break;
    }
  }
  const double scale = 1.0 + inf_norm(pl);
  if (pl.size() > 0 && pl.minCoeff() < -1e-10 * scale) {
    return false;
  }
  pl = pl.cwiseMax(0.0);
  const Residuals before = residuals(prog, x, y, lam);
  const Residuals after = residuals(prog, px, py, pl);
  const double cap_p = strict ? tol_p : std::max(before.primal, tol_p);
  const double cap_d = strict ? tol_d : std::max(before.dual, tol_d);
  if (!(after.primal <= cap_p && after.dual <= cap_d)) {
    return false;
  }
  x = px;
  y = py;
  lam = pl;
  return true;
}

}  // namespace

ConvexSolution solve_convex_program(const ConvexProgram& prog, const InteriorPointOptions& options) {
  const Index n = prog.n;
  const Index p = prog.eq_matrix.rows();
  const Index m = prog.ineq_matrix.rows();

  ConvexSolution out;
  VectorXd x = VectorXd::Zero(n);
  VectorXd y = VectorXd::Zero(p);
  VectorXd lam = VectorXd::Ones(m);
  VectorXd w = (-prog.inequality_values(x)).cwiseMax(1.0);

  const double scale_d = 1.0 + inf_norm(prog.linear);
  const double scale_p = 1.0 + std::max(inf_norm(prog.ineq_rhs), inf_norm(prog.eq_rhs));
  KktSystem kkt(n, p);

  for (int iter = 0;; ++iter) {
    const VectorXd q = prog.inequality_values(x);

    const Linearization lin = linearize(prog, x, lam);
    const SparseMatrix& jacobian = lin.jacobian;
    const SparseMatrix& curvature = lin.curvature;

    const VectorXd r_d = prog.hessian * x + prog.linear + prog.eq_matrix.transpose() * y + jacobian.transpose() * lam;
    const VectorXd r_e = prog.eq_matrix * x - prog.eq_rhs;
    const VectorXd r_p = q + w;
    const double mu = m > 0 ? w.dot(lam) / static_cast<double>(m) : 0.0;
    const double primal_res = std::max(inf_norm(r_e), m > 0 ? std::max(inf_norm(r_p), q.maxCoeff()) : 0.0);
    const double dual_res = inf_norm(r_d);

    out.iterations = iter;
    out.primal_residual = primal_res;
    out.dual_residual = dual_res;
    out.mu = mu;

    bool converged = primal_res <= options.tolerance * scale_p && dual_res <= options.tolerance * scale_d &&
                     mu <= options.tolerance;
    // Late iterates are badly conditioned (λ/w spans many decades) and can
    // stall short of the dual tolerance; the active-set system is not.
    if (!converged && m > 0 && mu <= 1e-8 &&
        polish(prog, x, y, lam, w, options.tolerance * scale_p, options.tolerance * scale_d, true)) {
      const Residuals r = residuals(prog, x, y, lam);
      out.primal_residual = r.primal;
      out.dual_residual = r.dual;
      out.mu = 0.0;
      out.status = SolveStatus::converged;
      break;
    }
    const bool diverged = m > 0 && inf_norm(lam) > options.divergence_threshold * scale_d;
    if (converged || diverged || iter >= options.max_iterations) {
      out.status = converged ? SolveStatus::converged
                   : diverged ? SolveStatus::infeasible
                   : primal_res > 1e-6 * scale_p ? SolveStatus::infeasible
                                                 : SolveStatus::max_iterations;
      break;
    }

    // Reduced system: (H + curvature + Jᵀ D J) dx + Eᵀ dy = rhs, E dx = -r_e.
    VectorXd d = lam.cwiseQuotient(w);
    SparseMatrix scaled = jacobian;
    for (Index col = 0; col < scaled.outerSize(); ++col) {
      for (SparseMatrix::InnerIterator it(scaled, col); it; ++it) {
        it.valueRef() *= d(it.row());
      }
    }
    const SparseMatrix mmat = prog.hessian + curvature + SparseMatrix(jacobian.transpose()) * scaled;
    if (!kkt.factor(mmat, prog.eq_matrix, 1e-9)) {
      out.status = SolveStatus::max_iterations;
      break;
    }

    auto direction = [&](const VectorXd& r_c, VectorXd& dx, VectorXd& dy, VectorXd& dl, VectorXd& dw) {
      VectorXd rhs(n + p);
      rhs.head(n) = -r_d - jacobian.transpose() * (d.cwiseProduct(r_p) - r_c.cwiseQuotient(w));
      rhs.tail(p) = -r_e;
      const VectorXd sol = kkt.solve(rhs);
      dx = sol.head(n);
      dy = sol.tail(p);
      dl = d.cwiseProduct(jacobian * dx + r_p) - r_c.cwiseQuotient(w);
      dw = -(r_c + w.cwiseProduct(dl)).cwiseQuotient(lam);
    };

    VectorXd dx, dy, dl, dw;
    if (m == 0) {
      direction(VectorXd(), dx, dy, dl, dw);
      x += dx;
      y += dy;
      continue;
    }

    const VectorXd wl = w.cwiseProduct(lam);
    direction(wl, dx, dy, dl, dw);
    const double a_aff = std::min(max_step(w, dw), max_step(lam, dl));
    const double mu_aff = (w + a_aff * dw).dot(lam + a_aff * dl) / static_cast<double>(m);
    const double sigma = std::pow(std::clamp(mu_aff / mu, 0.0, 1.0), 3);
    const VectorXd r_c = (wl + dw.cwiseProduct(dl)).array() - sigma * mu;
    direction(r_c, dx, dy, dl, dw);

    const double alpha = std::min(1.0, 0.99 * std::min(max_step(w, dw), max_step(lam, dl)));
    x += alpha * dx;
    y += alpha * dy;
    lam += alpha * dl;
    w += alpha * dw;
    // Keep strictly interior against rounding.
    lam = lam.cwiseMax(std::numeric_limits<double>::min());
    w = w.cwiseMax(std::numeric_limits<double>::min());
  }

  if (out.status == SolveStatus::converged && m > 0 && out.mu > 0.0 &&
      polish(prog, x, y, lam, w, options.tolerance * scale_p, options.tolerance * scale_d, false)) {
    const Residuals r = residuals(prog, x, y, lam);
    out.primal_residual = r.primal;
    out.dual_residual = r.dual;
    out.mu = 0.0;
  }
  out.x = x;
  out.eq_dual = y;
  out.ineq_dual = lam;
  out.objective = prog.objective(x);
  return out;
}

}  // namespace resilia
