#include <cmath>
#include <filesystem>
#include <iostream>
#include <limits>
#include <string>

#include "CLI11.hpp"

#include "resilia/experiments.hpp"
#include "resilia/io.hpp"
#include "resilia/lqr.hpp"
#include "resilia/resilient.hpp"
#include "resilia/robust.hpp"

namespace fs = std::filesystem;
using namespace resilia;

namespace {

constexpr int kOk = 0;
constexpr int kInternal = 1;
constexpr int kInfeasible = 2;

int status_code(SolveStatus s) {
  return s == SolveStatus::infeasible ? kInfeasible : kOk;
}

fs::path prepare(const std::string& dir) {
  fs::path out(dir);
  fs::create_directories(out);
  return out;
}

struct SolveArgs {
  std::string problem;
  std::string mode = "resilient";
  double delta = 0.1;
  double sigma = 0.5;
  double lipschitz = -1.0;
  std::uint64_t seed = 1;
  std::int64_t samples = 100000;
  bool worst_case = false;
  std::string cost = "quadratic";
  double gamma = 1.0;
  std::string gamma_matrix;
  std::string algorithm = "joint";
  std::string sign = "nonnegative";
  double tol = 1e-8;
  int max_iter = 200000;
  std::string out = "out";
};

int run_solve(const SolveArgs& a) {
  const ProblemSpec ps = io::problem_from_json(io::read_json(a.problem));
  const fs::path dir = prepare(a.out);
  io::Json report;
  DualMap lam = DualMap::zeros(ps);
  SlackMap slack = SlackMap::zeros(ps);
  SolveStatus status = SolveStatus::converged;

  if (a.mode == "robust") {
    RobustSolution sol;
    if (a.worst_case) {
      sol = solve_worst_case(ps);
    } else {
      RobustConfig cfg;
      cfg.delta = a.delta;
      cfg.sigma = a.sigma;
      double lmax = 0.0;
      for (const Constraint& c : ps.constraints) {
        lmax = std::max(lmax, c.lipschitz);
      }
      cfg.lipschitz_max = a.lipschitz >= 0.0 ? a.lipschitz : lmax;
      sol = solve_robust_surrogate(ps, cfg);
      if (sol.report.status != SolveStatus::infeasible) {
        const ScenarioSampler sampler(ps.scenarios);
        const ViolationEstimate est = estimate_violation_probability(ps, sol.z, sampler, a.samples, a.seed);
        report["satisfaction_probability"] = est.p_hat;
        report["ci_halfwidth"] = est.ci_halfwidth;
      }
      report["epsilon"] = sol.epsilon;
    }
    lam = sol.lam;
    status = sol.report.status;
    report["report"] = io::report_to_json(sol.report);
    report["z"] = io::to_json(sol.z);
  } else if (a.mode == "resilient") {
    const std::size_t m = ps.constraint_count();
    if (a.cost == "linear") {
      throw std::invalid_argument("linear violation costs have no slack fixed point; use quadratic or heaviside");
    }
    if (a.cost == "heaviside") {
      std::vector<std::size_t> hard;
      for (std::size_t i = 0; i < m; ++i) {
        if (!ps.constraints[i].mirror) {
          hard.push_back(i);
        }
      }
      const EnumerationResult r =
          solve_mixed_enumeration(ps, {}, hard, a.gamma, ViolationCost::identity(m), Execution::parallel);
      status = r.report.status;
      slack = r.s;
      report["report"] = io::report_to_json(r.report);
      report["z"] = io::to_json(r.z);
      report["achieved_delta"] = r.achieved_delta;
      report["satisfied_scenarios"] = r.satisfied;
      report["value"] = r.value;
    } else if (a.cost == "quadratic") {
      const ViolationCost h = a.gamma_matrix.empty()
                                  ? ViolationCost::identity(m, a.gamma)
                                  : ViolationCost::quadratic(io::matrix_from_json(io::read_json(a.gamma_matrix)));
      h.validate();
      if (a.algorithm == "joint") {
        ResilientOptions opts;
        opts.sign = a.sign == "free" ? SlackSign::free : SlackSign::nonnegative;
        opts.kkt_tolerance = a.tol;
        const ResilientSolution r = solve_resilient_joint(ps, h, opts);
        status = r.report.status;
        lam = r.lam;
        slack = r.s;
        report["report"] = io::report_to_json(r.report);
        report["z"] = io::to_json(r.z);
      } else if (a.algorithm == "arrow-hurwicz") {
        const ArrowHurwiczResult r =
            run_arrow_hurwicz(ps, h, initial_saddle_state(ps), a.tol, a.max_iter, Execution::parallel);
        status = r.report.status;
        lam = r.state.lam;
        slack = r.state.s;
        report["report"] = io::report_to_json(r.report);
        report["z"] = io::to_json(r.state.z);
      } else {
        throw std::invalid_argument("unknown algorithm: " + a.algorithm);
      }
      report["expected_cost"] = expected_cost(ps, h, slack);
    } else {
      throw std::invalid_argument("unknown cost: " + a.cost);
    }
  } else {
    throw std::invalid_argument("mode must be robust or resilient");
  }
  report["mode"] = a.mode;
  io::write_json(dir / "report.json", report);
  io::write_duals_csv(dir / "duals.csv", lam, slack);
  std::cout << report["report"].dump() << '\n';
  return status_code(status);
}

int run_lqr(const std::string& problem, const std::string& mode, double gamma, const std::string& out) {
  const LqrProblem lqr = io::lqr_from_json(io::read_json(problem));
  const fs::path dir = prepare(out);
  const std::vector<double> one{1.0};
  const LoweredLqr lowered = lower_to_problem_spec(lqr, one_hot_scenarios(one));
  Vector z;
  SolveReport report;
  SlackMap slack = SlackMap::zeros(lowered.spec);
  if (mode == "robust") {
    const RobustSolution r = solve_worst_case(lowered.spec);
    z = r.z;
    report = r.report;
  } else {
    const ResilientSolution r =
        solve_resilient_joint(lowered.spec, ViolationCost::identity(lowered.spec.constraint_count(), gamma));
    z = r.z;
    report = r.report;
    slack = r.s;
  }
  io::Json j;
  j["report"] = io::report_to_json(report);
  j["P"] = io::to_json(lqr.P_term);
  if (report.status != SolveStatus::infeasible) {
    const Trajectory plan = extract_plan(lowered, z, lqr.x0).front();
    j["states"] = io::to_json(plan.states);
    j["inputs"] = io::to_json(plan.inputs);
  }
  io::write_json(dir / "plan.json", j);
  io::write_duals_csv(dir / "duals.csv", DualMap::zeros(lowered.spec), slack);
  std::cout << j["report"].dump() << '\n';
  return status_code(report.status);
}

void mode_flags(const std::string& mode, bool& robust, bool& resilient) {
  if (mode != "robust" && mode != "resilient" && mode != "both") {
    throw std::invalid_argument("mode must be robust, resilient or both");
  }
  robust = mode != "resilient";
  resilient = mode != "robust";
}

void summarize(const std::string& label, const ExperimentResult& r) {
  std::cout << label << " status=" << to_string(r.report.status) << " objective=" << r.objective;
  for (const auto& [k, v] : r.metrics) {
    std::cout << ' ' << k << '=' << v;
  }
  if (!r.note.empty()) {
    std::cout << " note=\"" << r.note << '"';
  }
  std::cout << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust and resilient scenario programs, LQR lowering and quadrotor experiments"};
  app.require_subcommand(1);

  SolveArgs sa;
  auto* solve = app.add_subcommand("solve", "Solve a problem spec in robust or resilient mode");
  solve->add_option("--problem", sa.problem, "Problem spec JSON")->required()->check(CLI::ExistingFile);
  solve->add_option("--mode", sa.mode)->check(CLI::IsMember({"robust", "resilient"}));
  solve->add_option("--delta", sa.delta);
  solve->add_option("--sigma", sa.sigma);
  solve->add_option("--lipschitz", sa.lipschitz, "Override the largest declared Lipschitz bound");
  solve->add_option("--seed", sa.seed);
  solve->add_option("--samples", sa.samples);
  solve->add_flag("--worst-case", sa.worst_case, "Enforce every scenario instead of the surrogate");
  solve->add_option("--cost", sa.cost)->check(CLI::IsMember({"quadratic", "linear", "heaviside"}));
  solve->add_option("--gamma", sa.gamma);
  solve->add_option("--gamma-matrix", sa.gamma_matrix, "JSON matrix for the quadratic cost")
      ->check(CLI::ExistingFile);
  solve->add_option("--algorithm", sa.algorithm)->check(CLI::IsMember({"joint", "arrow-hurwicz"}));
  solve->add_option("--slack-sign", sa.sign)->check(CLI::IsMember({"nonnegative", "free"}));
  solve->add_option("--tol", sa.tol);
  solve->add_option("--max-iter", sa.max_iter);
  solve->add_option("--out", sa.out);

  std::string lqr_problem;
  std::string lqr_mode = "resilient";
  double lqr_gamma = 1.0;
  std::string lqr_out = "out";
  auto* lqr = app.add_subcommand("lqr", "Lower and solve a constrained LQR instance");
  lqr->add_option("--problem", lqr_problem)->required()->check(CLI::ExistingFile);
  lqr->add_option("--mode", lqr_mode)->check(CLI::IsMember({"robust", "resilient"}));
  lqr->add_option("--gamma", lqr_gamma);
  lqr->add_option("--out", lqr_out);

  ShepherdConfig sc;
  std::string sc_mode = "both";
  std::string sc_out = "out";
  double home_x = sc.home(0);
  double home_y = sc.home(1);
  auto* shepherd = app.add_subcommand("shepherd", "Shepherd surveillance experiment");
  shepherd->add_option("--delta", sc.delta);
  shepherd->add_option("--radius", sc.radius);
  shepherd->add_option("--coverage", sc.coverage_fraction);
  shepherd->add_option("--home-x", home_x);
  shepherd->add_option("--home-y", home_y);
  shepherd->add_option("--sheep", sc.sheep_count);
  shepherd->add_option("--rings", sc.rings);
  shepherd->add_option("--gamma", sc.gamma);
  shepherd->add_option("--samples", sc.samples);
  shepherd->add_option("--seed", sc.seed);
  shepherd->add_option("--mode", sc_mode);
  shepherd->add_option("--out", sc_out);

  NavigationConfig nc = NavigationConfig::defaults();
  std::string nc_mode = "both";
  std::string nc_out = "out";
  auto* navigate = app.add_subcommand("navigate", "Waypoint navigation with an unknown obstacle mass");
  navigate->add_option("--ts", nc.params.Ts, "Sample time");
  navigate->add_option("--gamma", nc.gamma);
  navigate->add_option("--delta", nc.delta);
  navigate->add_option("--mode", nc_mode);
  navigate->add_option("--out", nc_out);

  MpcWindConfig mc = MpcWindConfig::defaults();
  std::string mc_mode = "both";
  std::string mc_out = "out";
  bool calm = false;
  auto* mpc = app.add_subcommand("mpc-wind", "Online MPC under scripted wind gusts");
  mpc->add_option("--ts", mc.params.Ts, "Sample time");
  mpc->add_option("--gamma", mc.gamma);
  mpc->add_option("--step-cap", mc.step_cap);
  mpc->add_flag("--calm", calm, "Disable the gust schedule");
  mpc->add_option("--mode", mc_mode);
  mpc->add_option("--out", mc_out);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*solve) {
      return run_solve(sa);
    }
    if (*lqr) {
      return run_lqr(lqr_problem, lqr_mode, lqr_gamma, lqr_out);
    }
    if (*shepherd) {
      bool robust = false;
      bool resilient = false;
      mode_flags(sc_mode, robust, resilient);
      sc.home = Vector{{home_x, home_y}};
      const fs::path dir = prepare(sc_out);
      const ShepherdOutcome res = run_shepherd(sc, robust, resilient);
      io::Json j;
      std::vector<const ExperimentResult*> traces;
      std::vector<std::string> labels;
      int code = kOk;
      for (const auto* r : {res.robust ? &*res.robust : nullptr, res.resilient ? &*res.resilient : nullptr}) {
        if (r) {
          j[to_string(r->mode)] = io::result_to_json(*r);
          traces.push_back(r);
          labels.emplace_back(to_string(r->mode));
          summarize(to_string(r->mode), *r);
          code = std::max(code, status_code(r->report.status));
        }
      }
      io::write_json(dir / "result.json", j);
      io::write_trace_csv(dir / "trace.csv", traces, labels);
      return code;
    }
    if (*navigate) {
      bool robust = false;
      bool resilient = false;
      mode_flags(nc_mode, robust, resilient);
      const fs::path dir = prepare(nc_out);
      const auto cases = run_navigation(nc, robust, resilient);
      io::Json j = io::Json::array();
      std::vector<const ExperimentResult*> traces;
      std::vector<std::string> labels;
      int code = kOk;
      for (const NavigationCase& c : cases) {
        io::Json e;
        e["mass"] = c.mass;
        e["probability"] = c.probability;
        for (const auto* r : {c.robust ? &*c.robust : nullptr, c.resilient ? &*c.resilient : nullptr}) {
          if (r) {
            e[to_string(r->mode)] = io::result_to_json(*r);
            traces.push_back(r);
            labels.push_back(std::string(to_string(r->mode)) + "@" + std::to_string(c.mass));
            summarize(labels.back(), *r);
            code = std::max(code, status_code(r->report.status));
          }
        }
        j.push_back(std::move(e));
      }
      io::write_json(dir / "result.json", io::Json{{"cases", j}});
      io::write_trace_csv(dir / "trace.csv", traces, labels);
      return code;
    }
    if (*mpc) {
      bool robust = false;
      bool resilient = false;
      mode_flags(mc_mode, robust, resilient);
      if (calm) {
        mc.gusts.clear();
      }
      const fs::path dir = prepare(mc_out);
      io::Json j;
      std::vector<ExperimentResult> runs;
      std::vector<std::string> labels;
      if (robust) {
        runs.push_back(run_mpc_wind(mc, Mode::robust));
      }
      if (resilient) {
        runs.push_back(run_mpc_wind(mc, Mode::resilient));
      }
      int code = kOk;
      std::vector<const ExperimentResult*> traces;
      for (const ExperimentResult& r : runs) {
        j[to_string(r.mode)] = io::result_to_json(r);
        traces.push_back(&r);
        labels.emplace_back(to_string(r.mode));
        summarize(to_string(r.mode), r);
        code = std::max(code, status_code(r.report.status));
      }
      io::write_json(dir / "result.json", j);
      io::write_trace_csv(dir / "trace.csv", traces, labels);
      return code;
    }
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << '\n';
    return kInfeasible;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInternal;
  }
  return kInternal;
}
