#pragma once

// Smooth unconstrained objectives with analytic gradients, per-solve
// evaluation counters and a central-difference gradient checker.

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hcg/linalg.hpp"

namespace hcg {

class NonFiniteValue : public std::runtime_error {
 public:
  explicit NonFiniteValue(const std::string& what) : std::runtime_error(what) {}
};

using ValueFn = std::function<double(std::span<const double>)>;
using GradientFn = std::function<void(std::span<const double>, std::span<double>)>;

/// An immutable problem definition. Safe to share across threads; counting
/// happens in Objective, which is created per solve.
struct Problem {
  std::string name;
  std::size_t n = 0;
  Vector x0;
  ValueFn f;
  GradientFn g;
  std::optional<double> f_star;

  Problem() = default;
  Problem(std::string name_, Vector x0_, ValueFn f_, GradientFn g_,
          std::optional<double> f_star_ = std::nullopt)
      : name(std::move(name_)),
        n(x0_.size()),
        x0(std::move(x0_)),
        f(std::move(f_)),
        g(std::move(g_)),
        f_star(f_star_) {
    if (n == 0) throw std::invalid_argument("problem '" + name + "' has dimension 0");
  }
};

struct EvalCounters {
  std::size_t f_evals = 0;
  std::size_t g_evals = 0;
};

/// Counting evaluator bound to one problem for the duration of a solve.
class Objective {
 public:
  explicit Objective(const Problem& problem) : problem_(&problem) {}

  double value(std::span<const double> x) {
    require_same_size(problem_->n, x.size());
    ++counters_.f_evals;
    const double fx = problem_->f(x);
    if (!std::isfinite(fx)) throw NonFiniteValue("non-finite objective value in '" + problem_->name + "'");
    return fx;
  }

  void gradient(std::span<const double> x, std::span<double> out) {
    require_same_size(problem_->n, x.size());
    require_same_size(problem_->n, out.size());
    ++counters_.g_evals;
    problem_->g(x, out);
    if (!all_finite(out)) throw NonFiniteValue("non-finite gradient in '" + problem_->name + "'");
  }

  Vector gradient(std::span<const double> x) {
    Vector out(problem_->n);
    gradient(x, out);
    return out;
  }

  const Problem& problem() const noexcept { return *problem_; }
  std::size_t dimension() const noexcept { return problem_->n; }
  const EvalCounters& counters() const noexcept { return counters_; }

 private:
  const Problem* problem_;
  EvalCounters counters_;
};

/// Max over coordinates of |central difference - analytic| / (1 + |analytic|).
inline double check_gradient(const Problem& problem, std::span<const double> x, double h = 1e-6) {
  if (!(h > 0.0)) throw std::invalid_argument("check_gradient: step must be positive");
  require_same_size(problem.n, x.size());

  Vector analytic(problem.n);
  problem.g(x, analytic);
  if (!all_finite(analytic)) throw NonFiniteValue("non-finite gradient in '" + problem.name + "'");

  Vector probe(x.begin(), x.end());
  double worst = 0.0;
  for (std::size_t i = 0; i < problem.n; ++i) {
    const double xi = probe[i];
    probe[i] = xi + h;
    const double fp = problem.f(probe);
    probe[i] = xi - h;
    const double fm = problem.f(probe);
    probe[i] = xi;
    if (!std::isfinite(fp) || !std::isfinite(fm))
      throw NonFiniteValue("non-finite value while differencing '" + problem.name + "'");
    const double fd = (fp - fm) / (2.0 * h);
    worst = std::max(worst, std::abs(fd - analytic[i]) / (1.0 + std::abs(analytic[i])));
  }
  return worst;
}

/// Seeded probe points for gradient checking: x0 + r * U(-1, 1)^n with the
/// radius shrinking as 1/sqrt(n) past n = 10 so objective magnitudes (and
/// with them the differencing round-off) stay comparable across dimensions.
inline std::vector<Vector> probe_points(const Problem& problem, std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const double radius = problem.n <= 10 ? 0.5 : 0.5 * std::sqrt(10.0 / static_cast<double>(problem.n));
  std::vector<Vector> points;
  points.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    Vector x(problem.x0);
    for (double& v : x) {
      const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;  // [0, 1)
      v += radius * (2.0 * u - 1.0);
    }
    points.push_back(std::move(x));
  }
  return points;
}

/// Worst checker error over x0 and `count` seeded probe points.
inline double check_gradient_seeded(const Problem& problem, std::size_t count = 10, std::uint64_t seed = 2024,
                                    double h = 1e-6) {
  double worst = check_gradient(problem, problem.x0, h);
  for (const auto& x : probe_points(problem, count, seed)) worst = std::max(worst, check_gradient(problem, x, h));
  return worst;
}

}  // namespace hcg
