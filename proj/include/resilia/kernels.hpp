#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <utility>
#include <vector>

#include "resilia/problem.hpp"

namespace resilia {

/// Selects the serial reference or the OpenMP variant of a kernel. Both give
/// bitwise-identical results.
enum class Execution { serial, parallel };

/// Draws disturbance realizations from a fixed 64-bit Mersenne Twister.
class Sampler {
 public:
  virtual ~Sampler() = default;
  virtual int dimension() const = 0;
  virtual Vector sample(std::mt19937_64& rng) const = 0;
};

/// Uniform on [0, 1) from the top 53 bits, independent of the standard
/// library's distribution implementations.
double uniform01(std::mt19937_64& rng);

/// `copies` independent uniform points of a disc, stacked.
class DiscSampler final : public Sampler {
 public:
  DiscSampler(Vector center, double radius, int copies = 1);
  int dimension() const override { return 2 * copies_; }
  Vector sample(std::mt19937_64& rng) const override;

 private:
  Vector center_;
  double radius_;
  int copies_;
};

class BoxSampler final : public Sampler {
 public:
  BoxSampler(Vector lower, Vector upper);
  int dimension() const override { return static_cast<int>(lower_.size()); }
  Vector sample(std::mt19937_64& rng) const override;

 private:
  Vector lower_;
  Vector upper_;
};

/// Draws scenario points with probability equal to their weights.
class ScenarioSampler final : public Sampler {
 public:
  explicit ScenarioSampler(ScenarioSet scenarios);
  int dimension() const override { return scenarios_.dimension(); }
  Vector sample(std::mt19937_64& rng) const override;

 private:
  ScenarioSet scenarios_;
  std::vector<double> cumulative_;
};

namespace kernels {

/// Samples per generator stream. Stream b is seeded from (seed, b), so results
/// do not depend on how blocks are spread over threads.
inline constexpr std::int64_t kBlockSize = 4096;

std::mt19937_64 block_engine(std::uint64_t seed, std::int64_t block);

/// values[k] = fn(k-th sample).
std::vector<double> monte_carlo_map(const Sampler& sampler, const std::function<double(const Vector&)>& fn,
                                    std::int64_t n, std::uint64_t seed, Execution exec);

/// Number of samples accepted by `accept`.
std::int64_t monte_carlo_count(const Sampler& sampler, const std::function<bool(const Vector&)>& accept,
                               std::int64_t n, std::uint64_t seed, Execution exec);

struct GridResult {
  Vector argmin;
  double value = 0.0;
  std::int64_t evaluated = 0;
};

/// Exhaustive minimization of `fn` over the lattice lower + k·step. Points where
/// fn returns +inf are infeasible. Ties go to the smallest lattice index.
GridResult grid_minimize(const Vector& lower, const Vector& upper, const Vector& step,
                         const std::function<double(const Vector&)>& fn, Execution exec);

/// Σ_j w_j Σ_i λ_ij ∇_z g_i(z, ξ_j). Per-scenario partial sums are formed
/// independently and added in scenario order.
Vector weighted_constraint_gradient(const ProblemSpec& ps, const Vector& z, const Matrix& lambda, Execution exec);

/// out[k] = fn(k) for k < count.
template <class T, class Fn>
std::vector<T> map_indices(std::int64_t count, Fn&& fn, Execution exec) {
  std::vector<T> out(static_cast<std::size_t>(count));
#pragma omp parallel for schedule(dynamic) if (exec == Execution::parallel)
  for (std::int64_t k = 0; k < count; ++k) {
    out[static_cast<std::size_t>(k)] = fn(k);
  }
  return out;
}

}  // namespace kernels
}  // namespace resilia
