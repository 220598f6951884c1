#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "resilia/duality.hpp"
#include "resilia/experiments.hpp"
#include "resilia/lqr.hpp"
#include "resilia/problem.hpp"
#include "resilia/quadrotor.hpp"
#include "resilia/resilient.hpp"

namespace resilia::io {

using Json = nlohmann::json;

Json to_json(const Vector& v);
Json to_json(const Matrix& m);
Vector vector_from_json(const Json& j);
/// Row-major nested arrays.
Matrix matrix_from_json(const Json& j);

/// Keys `objective`, `constraints`, `scenarios` and optionally `slater_point`.
/// A constraint with "kind": "equality" expands to two mirrored hard rows.
ProblemSpec problem_from_json(const Json& j);
Json problem_to_json(const ProblemSpec& ps);

Json report_to_json(const SolveReport& report);

QuadrotorParams params_from_json(const Json& j);
Json params_to_json(const QuadrotorParams& p);

/// Keys `A,B,W,Q,R,x0,N,x_bound,u_bound,waypoints,terminal_set,slack_flags`.
/// A missing `P` is filled with the Riccati solution.
LqrProblem lqr_from_json(const Json& j);

Json result_to_json(const ExperimentResult& r);

Json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const Json& j);

/// Columns `constraint,scenario,lambda,slack`.
void write_duals_csv(const std::filesystem::path& path, const DualMap& lam, const SlackMap& s);

/// One CSV for several results sharing a header; a leading `mode` column
/// tells them apart.
void write_trace_csv(const std::filesystem::path& path, const std::vector<const ExperimentResult*>& results,
                     const std::vector<std::string>& labels);

}  // namespace resilia::io
