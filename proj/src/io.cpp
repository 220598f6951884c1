#include "resilia/io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace resilia::io {

namespace {

template <typename T>
T get_or(const Json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

Box box_from_json(const Json& j, Eigen::Index n) {
  if (j.is_null()) {
    return Box::unbounded(n);
  }
  Box b;
  if (j.is_array()) {
    b = Box::symmetric(vector_from_json(j));
  } else {
    b.lower = vector_from_json(j.at("lower"));
    b.upper = vector_from_json(j.at("upper"));
  }
  if (b.size() != n) {
    throw std::invalid_argument("box has the wrong dimension");
  }
  return b;
}

double json_number(const Json& v) {
  if (v.is_null()) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf" || s == "+inf") {
      return std::numeric_limits<double>::infinity();
    }
    if (s == "-inf") {
      return -std::numeric_limits<double>::infinity();
    }
    throw std::invalid_argument("unrecognized number: " + s);
  }
  return v.get<double>();
}

std::string csv_number(double v) {
  if (std::isnan(v)) {
    return "";
  }
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

Json to_json(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    out.push_back(v(i));
  }
  return out;
}

Json to_json(const Matrix& m) {
  Json out = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      row.push_back(m(r, c));
    }
    out.push_back(std::move(row));
  }
  return out;
}

Vector vector_from_json(const Json& j) {
  if (!j.is_array()) {
    throw std::invalid_argument("expected an array of numbers");
  }
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) = json_number(j[i]);
  }
  return v;
}

Matrix matrix_from_json(const Json& j) {
  if (!j.is_array()) {
    throw std::invalid_argument("expected a nested array");
  }
  if (j.empty()) {
    return Matrix();
  }
  const std::size_t cols = j[0].size();
  Matrix m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array() || j[r].size() != cols) {
      throw std::invalid_argument("matrix rows must have equal length");
    }
    for (std::size_t c = 0; c < cols; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = json_number(j[r][c]);
    }
  }
  return m;
}

ProblemSpec problem_from_json(const Json& j) {
  ProblemSpec ps;
  const Json& obj = j.at("objective");
  ps.objective.linear = vector_from_json(obj.at("linear"));
  ps.objective.quadratic = obj.contains("quadratic")
                               ? matrix_from_json(obj.at("quadratic"))
                               : Matrix::Zero(ps.objective.linear.size(), ps.objective.linear.size());
  ps.objective.offset = get_or(obj, "offset", 0.0);

  for (const Json& c : j.at("constraints")) {
    const std::string kind = get_or<std::string>(c, "kind", "affine");
    if (kind == "equality") {
      add_equality(ps, vector_from_json(c.at("a")), c.at("b").get<double>(), get_or<std::string>(c, "tag", ""));
      continue;
    }
    Constraint con;
    if (kind == "affine") {
      con = Constraint::affine_row(vector_from_json(c.at("a")), get_or(c, "b", 0.0));
      if (c.contains("a_xi")) {
        con.a_xi = matrix_from_json(c.at("a_xi"));
      }
      if (c.contains("b_xi")) {
        con.b_xi = vector_from_json(c.at("b_xi"));
      }
    } else if (kind == "ball") {
      con = Constraint::ball(matrix_from_json(c.at("selector")), vector_from_json(c.at("center")),
                             c.at("radius_sq").get<double>());
      if (c.contains("center_xi")) {
        con.center_xi = matrix_from_json(c.at("center_xi"));
      }
    } else {
      throw std::invalid_argument("unknown constraint kind: " + kind);
    }
    con.lipschitz = get_or(c, "lipschitz", 0.0);
    con.soft = get_or(c, "soft", true);
    con.tag = get_or<std::string>(c, "tag", "");
    if (c.contains("mirror") && !c.at("mirror").is_null()) {
      con.mirror = c.at("mirror").get<std::size_t>();
    }
    ps.constraints.push_back(std::move(con));
  }

  const Json& sc = j.at("scenarios");
  std::vector<Vector> points;
  for (const Json& p : sc.at("points")) {
    points.push_back(vector_from_json(p));
  }
  auto weights = sc.at("weights").get<std::vector<double>>();
  auto densities = sc.contains("densities") ? sc.at("densities").get<std::vector<double>>()
                                            : std::vector<double>(points.size(), 1.0);
  ps.scenarios = ScenarioSet(std::move(points), std::move(weights), std::move(densities));
  if (j.contains("slater_point") && !j.at("slater_point").is_null()) {
    ps.slater_point = vector_from_json(j.at("slater_point"));
  }
  check_shapes(ps);
  return ps;
}

Json problem_to_json(const ProblemSpec& ps) {
  Json out;
  out["objective"] = {{"quadratic", to_json(ps.objective.quadratic)},
                      {"linear", to_json(ps.objective.linear)},
                      {"offset", ps.objective.offset}};
  Json cons = Json::array();
  for (const Constraint& c : ps.constraints) {
    Json e;
    e["lipschitz"] = c.lipschitz;
    e["soft"] = c.soft;
    e["tag"] = c.tag;
    e["mirror"] = c.mirror ? Json(*c.mirror) : Json(nullptr);
    if (c.kind == ConstraintKind::affine) {
      e["kind"] = "affine";
      e["a"] = to_json(c.a);
      e["b"] = c.b;
      if (c.a_xi.size() > 0) {
        e["a_xi"] = to_json(c.a_xi);
      }
      if (c.b_xi.size() > 0) {
        e["b_xi"] = to_json(c.b_xi);
      }
    } else {
      e["kind"] = "ball";
      e["selector"] = to_json(c.selector);
      e["center"] = to_json(c.center);
      e["radius_sq"] = c.radius_sq;
      if (c.center_xi.size() > 0) {
        e["center_xi"] = to_json(c.center_xi);
      }
    }
    cons.push_back(std::move(e));
  }
  out["constraints"] = std::move(cons);
  Json pts = Json::array();
  for (const Vector& p : ps.scenarios.points()) {
    pts.push_back(to_json(p));
  }
  out["scenarios"] = {{"points", pts}, {"weights", ps.scenarios.weights()}, {"densities", ps.scenarios.densities()}};
  if (ps.slater_point) {
    out["slater_point"] = to_json(*ps.slater_point);
  }
  return out;
}

Json report_to_json(const SolveReport& report) {
  return {{"primal_value", report.primal_value},
          {"dual_value", report.dual_value},
          {"kkt_residual", report.kkt_residual},
          {"iterations", report.iterations},
          {"status", to_string(report.status)}};
}

QuadrotorParams params_from_json(const Json& j) {
  QuadrotorParams p;
  p.m = get_or(j, "m", p.m);
  p.M = get_or(j, "M", p.M);
  p.m_prime = get_or(j, "m_prime", p.m_prime);
  p.l = get_or(j, "l", p.l);
  p.R = get_or(j, "R", p.R);
  p.Ix = get_or(j, "Ix", p.Ix);
  p.Iy = get_or(j, "Iy", p.Iy);
  p.Iz = get_or(j, "Iz", p.Iz);
  p.g = get_or(j, "g", p.g);
  p.Ts = get_or(j, "Ts", p.Ts);
  p.validate();
  return p;
}

Json params_to_json(const QuadrotorParams& p) {
  return {{"m", p.m},   {"M", p.M},   {"m_prime", p.m_prime}, {"l", p.l}, {"R", p.R},
          {"Ix", p.Ix}, {"Iy", p.Iy}, {"Iz", p.Iz},           {"g", p.g}, {"Ts", p.Ts}};
}

LqrProblem lqr_from_json(const Json& j) {
  LqrProblem lqr;
  lqr.A = matrix_from_json(j.at("A"));
  lqr.B = matrix_from_json(j.at("B"));
  const auto n = lqr.A.rows();
  lqr.W = j.contains("W") ? matrix_from_json(j.at("W")) : Matrix::Zero(n, 1);
  lqr.Q = matrix_from_json(j.at("Q"));
  lqr.R = matrix_from_json(j.at("R"));
  lqr.P_term = j.contains("P") ? matrix_from_json(j.at("P")) : solve_dare(lqr.A, lqr.B, lqr.Q, lqr.R);
  lqr.x0 = vector_from_json(j.at("x0"));
  lqr.N = j.at("N").get<int>();
  lqr.x_bound = box_from_json(j.contains("x_bound") ? j.at("x_bound") : Json(nullptr), n);
  lqr.u_bound = box_from_json(j.contains("u_bound") ? j.at("u_bound") : Json(nullptr), lqr.B.cols());
  if (j.contains("safety_set")) {
    lqr.safety_set = box_from_json(j.at("safety_set"), n);
  }
  if (j.contains("waypoints")) {
    for (const Json& w : j.at("waypoints")) {
      lqr.waypoints.push_back({w.at("k").get<int>(), box_from_json(w.at("box"), n)});
    }
  }
  if (j.contains("terminal_set") && !j.at("terminal_set").is_null()) {
    lqr.terminal_set = box_from_json(j.at("terminal_set"), n);
  }
  lqr.disturbance = j.contains("disturbance") ? vector_from_json(j.at("disturbance")) : Vector::Zero(lqr.W.cols());
  if (j.contains("slack_flags")) {
    const Json& f = j.at("slack_flags");
    lqr.slack.state = get_or(f, "state", lqr.slack.state);
    lqr.slack.safety = get_or(f, "safety", lqr.slack.safety);
    lqr.slack.input = get_or(f, "input", lqr.slack.input);
    lqr.slack.waypoint = get_or(f, "waypoint", lqr.slack.waypoint);
    lqr.slack.terminal = get_or(f, "terminal", lqr.slack.terminal);
  }
  lqr.validate();
  return lqr;
}

Json result_to_json(const ExperimentResult& r) {
  Json out;
  out["experiment"] = r.experiment;
  out["mode"] = to_string(r.mode);
  out["report"] = report_to_json(r.report);
  out["decision"] = to_json(r.decision);
  out["objective"] = r.objective;
  out["metrics"] = r.metrics;
  out["note"] = r.note;
  out["runtime_seconds"] = r.runtime_seconds;
  out["violation_samples"] = r.violation_samples;
  out["slack_table"] = to_json(r.slack_table);
  return out;
}

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open " + path.string());
  }
  return Json::parse(in);
}

void write_json(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  out << j.dump(2) << '\n';
}

void write_duals_csv(const std::filesystem::path& path, const DualMap& lam, const SlackMap& s) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  out << "constraint,scenario,lambda,slack\n";
  for (Eigen::Index i = 0; i < lam.lambda.rows(); ++i) {
    for (Eigen::Index j = 0; j < lam.lambda.cols(); ++j) {
      out << i << ',' << j << ',' << csv_number(lam.lambda(i, j)) << ',' << csv_number(s.s(i, j)) << '\n';
    }
  }
}

void write_trace_csv(const std::filesystem::path& path, const std::vector<const ExperimentResult*>& results,
                     const std::vector<std::string>& labels) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  if (results.empty()) {
    return;
  }
  out << "mode";
  for (const std::string& h : results.front()->trace_header) {
    out << ',' << h;
  }
  out << '\n';
  for (std::size_t r = 0; r < results.size(); ++r) {
    for (const auto& row : results[r]->trace) {
      out << labels[r];
      for (double v : row) {
        out << ',' << csv_number(v);
      }
      out << '\n';
    }
  }
}

}  // namespace resilia::io
