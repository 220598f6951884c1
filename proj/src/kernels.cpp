#include "resilia/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace resilia {

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

DiscSampler::DiscSampler(Vector center, double radius, int copies)
    : center_(std::move(center)), radius_(radius), copies_(copies) {
  if (center_.size() != 2 || !(radius_ > 0.0) || copies_ < 1) {
    throw std::invalid_argument("disc sampler needs a planar center, positive radius and copies");
  }
}

Vector DiscSampler::sample(std::mt19937_64& rng) const {
  Vector out(2 * copies_);
  for (int c = 0; c < copies_; ++c) {
    const double r = radius_ * std::sqrt(uniform01(rng));
    const double theta = 2.0 * std::numbers::pi * uniform01(rng);
    out(2 * c) = center_(0) + r * std::cos(theta);
    out(2 * c + 1) = center_(1) + r * std::sin(theta);
  }
  return out;
}

BoxSampler::BoxSampler(Vector lower, Vector upper) : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.size() != upper_.size() || lower_.size() == 0 || (upper_ - lower_).minCoeff() < 0.0) {
    throw std::invalid_argument("box sampler bounds are inconsistent");
  }
}

Vector BoxSampler::sample(std::mt19937_64& rng) const {
  Vector out(lower_.size());
  for (Eigen::Index k = 0; k < out.size(); ++k) {
    out(k) = lower_(k) + (upper_(k) - lower_(k)) * uniform01(rng);
  }
  return out;
}

ScenarioSampler::ScenarioSampler(ScenarioSet scenarios) : scenarios_(std::move(scenarios)) {
  double total = 0.0;
  for (double w : scenarios_.weights()) {
    total += w;
    cumulative_.push_back(total);
  }
}

Vector ScenarioSampler::sample(std::mt19937_64& rng) const {
  const double u = uniform01(rng) * cumulative_.back();
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  const auto j = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()), cumulative_.size() - 1);
  return scenarios_.xi(j);
}

namespace kernels {

std::mt19937_64 block_engine(std::uint64_t seed, std::int64_t block) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(static_cast<std::uint64_t>(block) >> 32)};
  return std::mt19937_64(seq);
}

std::vector<double> monte_carlo_map(const Sampler& sampler, const std::function<double(const Vector&)>& fn,
                                    std::int64_t n, std::uint64_t seed, Execution exec) {
  if (n < 1) {
    throw std::invalid_argument("Monte Carlo needs at least one sample");
  }
  std::vector<double> values(static_cast<std::size_t>(n));
  const std::int64_t blocks = (n + kBlockSize - 1) / kBlockSize;
#pragma omp parallel for schedule(static) if (exec == Execution::parallel)
  for (std::int64_t b = 0; b < blocks; ++b) {
    auto rng = block_engine(seed, b);
    const std::int64_t end = std::min(n, (b + 1) * kBlockSize);
    for (std::int64_t k = b * kBlockSize; k < end; ++k) {
      values[static_cast<std::size_t>(k)] = fn(sampler.sample(rng));
    }
  }
  return values;
}

std::int64_t monte_carlo_count(const Sampler& sampler, const std::function<bool(const Vector&)>& accept,
                               std::int64_t n, std::uint64_t seed, Execution exec) {
  if (n < 1) {
    throw std::invalid_argument("Monte Carlo needs at least one sample");
  }
  const std::int64_t blocks = (n + kBlockSize - 1) / kBlockSize;
  std::int64_t count = 0;
#pragma omp parallel for schedule(static) reduction(+ : count) if (exec == Execution::parallel)
  for (std::int64_t b = 0; b < blocks; ++b) {
    auto rng = block_engine(seed, b);
    const std::int64_t end = std::min(n, (b + 1) * kBlockSize);
    for (std::int64_t k = b * kBlockSize; k < end; ++k) {
      count += accept(sampler.sample(rng)) ? 1 : 0;
    }
  }
  return count;
}

GridResult grid_minimize(const Vector& lower, const Vector& upper, const Vector& step,
                         const std::function<double(const Vector&)>& fn, Execution exec) {
  const auto dims = lower.size();
  if (upper.size() != dims || step.size() != dims || dims == 0) {
    throw std::invalid_argument("grid bounds are inconsistent");
  }
  std::vector<std::int64_t> counts(static_cast<std::size_t>(dims));
  std::int64_t total = 1;
  for (Eigen::Index k = 0; k < dims; ++k) {
    if (!(step(k) > 0.0) || upper(k) < lower(k)) {
      throw std::invalid_argument("grid step must be positive and bounds ordered");
    }
    counts[static_cast<std::size_t>(k)] = static_cast<std::int64_t>(std::floor((upper(k) - lower(k)) / step(k) + 1e-9)) + 1;
    total *= counts[static_cast<std::size_t>(k)];
  }
  auto point = [&](std::int64_t index) {
    Vector x(dims);
    for (Eigen::Index k = dims - 1; k >= 0; --k) {
      const std::int64_t c = counts[static_cast<std::size_t>(k)];
      x(k) = lower(k) + static_cast<double>(index % c) * step(k);
      index /= c;
    }
    return x;
  };

  double best_value = std::numeric_limits<double>::infinity();
  std::int64_t best_index = -1;
#pragma omp parallel if (exec == Execution::parallel)
  {
    double local_value = std::numeric_limits<double>::infinity();
    std::int64_t local_index = -1;
#pragma omp for schedule(static)
    for (std::int64_t idx = 0; idx < total; ++idx) {
      const double v = fn(point(idx));
      if (v < local_value) {
        local_value = v;
        local_index = idx;
      }
    }
#pragma omp critical
    {
      if (local_index >= 0 &&
          (local_value < best_value || (local_value == best_value && local_index < best_index))) {
        best_value = local_value;
        best_index = local_index;
      }
    }
  }
  GridResult out;
  out.evaluated = total;
  out.value = best_value;
  if (best_index >= 0) {
    out.argmin = point(best_index);
  }
  return out;
}

Vector weighted_constraint_gradient(const ProblemSpec& ps, const Vector& z, const Matrix& lambda, Execution exec) {
  const auto nsc = static_cast<std::int64_t>(ps.scenario_count());
  const std::size_t m = ps.constraint_count();
  if (lambda.rows() != static_cast<Eigen::Index>(m) || lambda.cols() != nsc) {
    throw std::invalid_argument("dual map shape mismatch");
  }
  if (z.size() != ps.dimension()) {
    throw std::invalid_argument("decision dimension mismatch");
  }
  check_shapes(ps);
  std::vector<Vector> partial(static_cast<std::size_t>(nsc), Vector::Zero(z.size()));
#pragma omp parallel for schedule(static) if (exec == Execution::parallel)
  for (std::int64_t j = 0; j < nsc; ++j) {
    Vector& acc = partial[static_cast<std::size_t>(j)];
    const Vector& xi = ps.scenarios.xi(static_cast<std::size_t>(j));
    for (std::size_t i = 0; i < m; ++i) {
      const double l = lambda(static_cast<Eigen::Index>(i), j);
      if (l != 0.0) {
        acc += l * constraint_gradient(ps.constraints[i], z, xi);
      }
    }
  }
  Vector total = Vector::Zero(z.size());
  for (std::int64_t j = 0; j < nsc; ++j) {
    total += ps.scenarios.weight(static_cast<std::size_t>(j)) * partial[static_cast<std::size_t>(j)];
  }
  return total;
}

}  // namespace kernels
}  // namespace resilia
