#include <cmath>

#include <benchmark/benchmark.h>

#include "resilia/kernels.hpp"
#include "resilia/robust.hpp"

using namespace resilia;

namespace {

Execution mode_of(const benchmark::State& state) {
  return state.range(0) == 0 ? Execution::serial : Execution::parallel;
}

void set_label(benchmark::State& state) {
  state.SetLabel(state.range(0) == 0 ? "serial" : "parallel");
}

/// Shepherd-style coverage check: five sheep on a disc of radius 10.
void BM_MonteCarloCoverage(benchmark::State& state) {
  const DiscSampler sampler(Vector::Zero(2), 10.0, 5);
  const Vector x = Vector{{0.5, 0.0}};
  for (auto _ : state) {
    const auto hits = kernels::monte_carlo_count(
        sampler,
        [&](const Vector& xi) {
          for (int i = 0; i < 5; ++i) {
            if ((x - xi.segment(2 * i, 2)).squaredNorm() > 90.0) {
              return false;
            }
          }
          return true;
        },
        100000, 7, mode_of(state));
    benchmark::DoNotOptimize(hits);
  }
  set_label(state);
}
BENCHMARK(BM_MonteCarloCoverage)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_GridMinimize(benchmark::State& state) {
  const Vector lo = Vector::Constant(3, -2.0);
  const Vector hi = Vector::Constant(3, 2.0);
  const Vector step = Vector::Constant(3, 0.02);
  const auto fn = [](const Vector& z) {
    return std::pow(z(0) - 0.3, 2) + 2.0 * std::pow(z(1) + 0.1, 2) + std::cosh(z(2));
  };
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernels::grid_minimize(lo, hi, step, fn, mode_of(state)));
  }
  set_label(state);
}
BENCHMARK(BM_GridMinimize)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_ConstraintGradient(benchmark::State& state) {
  ProblemSpec ps;
  ps.objective = Objective::squared_distance(Vector::Zero(2));
  Constraint c = Constraint::ball(Matrix::Identity(2, 2), Vector::Zero(2), 1.0);
  c.center_xi = Matrix::Identity(2, 2);
  for (int i = 0; i < 8; ++i) {
    ps.constraints.push_back(c);
  }
  ps.scenarios = disc_ring_grid(Vector::Zero(2), 10.0, 40, 3);
  const Matrix lambda = Matrix::Ones(8, static_cast<Eigen::Index>(ps.scenario_count()));
  const Vector z = Vector{{0.3, -0.2}};
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernels::weighted_constraint_gradient(ps, z, lambda, mode_of(state)));
  }
  set_label(state);
}
BENCHMARK(BM_ConstraintGradient)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

void BM_ScenarioEnumeration(benchmark::State& state) {
  ProblemSpec ps;
  ps.objective = Objective::squared_distance(Vector{{3.0, 1.0}});
  Constraint c = Constraint::ball(Matrix::Identity(2, 2), Vector::Zero(2), 4.0);
  c.center_xi = Matrix::Identity(2, 2);
  ps.constraints.push_back(c);
  std::vector<Vector> pts;
  for (int j = 0; j < 10; ++j) {
    const double a = 2.0 * M_PI * j / 10.0;
    pts.push_back(Vector{{std::cos(a), std::sin(a)}});
  }
  ps.scenarios = build_scenario_set(pts, [](const Vector&) { return 1.0; });
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_scenario_chance(ps, 0.3, mode_of(state)));
  }
  set_label(state);
}
BENCHMARK(BM_ScenarioEnumeration)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
