#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "hcg/benchsuite.hpp"
#include "hcg/objective.hpp"

using namespace hcg;

namespace {

Problem half_norm_squared(Vector x0) {
  return Problem(
      "half_norm_sq", std::move(x0),
      [](std::span<const double> x) { return 0.5 * squared_norm(x); },
      [](std::span<const double> x, std::span<double> g) { std::copy(x.begin(), x.end(), g.begin()); }, 0.0);
}

}  // namespace

TEST(Objective, ValueExamples) {
  Objective sum_sq(instantiate("sum_squares", 3).problem);
  EXPECT_EQ(sum_sq.value(Vector{0.0, 0.0, 0.0}), 0.0);
  Objective rosen(instantiate("ext_rosenbrock", 2).problem);
  EXPECT_NEAR(rosen.value(Vector{-1.2, 1.0}), 24.2, 1e-12);
}

TEST(Objective, WrongLengthThrows) {
  Objective obj(instantiate("sum_squares", 3).problem);
  EXPECT_THROW(obj.value(Vector{1.0, 2.0}), DimensionMismatch);
  EXPECT_THROW(obj.gradient(Vector{1.0}), DimensionMismatch);
}

TEST(Objective, GradientExamples) {
  Objective q(half_norm_squared({0.0, 0.0}));
  EXPECT_EQ(q.gradient(Vector{3.0, 4.0}), (Vector{3.0, 4.0}));

  Objective rosen(instantiate("ext_rosenbrock", 2).problem);
  EXPECT_EQ(rosen.gradient(Vector{1.0, 1.0}), (Vector{0.0, 0.0}));

  Objective sum_sq(instantiate("sum_squares", 3).problem);
  EXPECT_EQ(sum_sq.gradient(Vector{1.0, 1.0, 1.0}), (Vector{2.0, 4.0, 6.0}));
}

TEST(Objective, CountersTickOncePerCall) {
  Objective obj(half_norm_squared({1.0, 1.0}));
  const Vector x{1.0, 2.0};
  obj.value(x);
  obj.value(x);
  obj.gradient(x);
  EXPECT_EQ(obj.counters().f_evals, 2u);
  EXPECT_EQ(obj.counters().g_evals, 1u);
}

TEST(Objective, NonFiniteIsReported) {
  Problem p("nan", Vector{1.0}, [](std::span<const double>) { return std::numeric_limits<double>::quiet_NaN(); },
            [](std::span<const double>, std::span<double> g) { g[0] = std::numeric_limits<double>::infinity(); });
  Objective obj(p);
  EXPECT_THROW(obj.value(Vector{1.0}), NonFiniteValue);
  EXPECT_THROW(obj.gradient(Vector{1.0}), NonFiniteValue);
}

TEST(Objective, EvaluationDoesNotMutateInput) {
  Objective obj(instantiate("ext_rosenbrock", 4).problem);
  const Vector x{-1.2, 1.0, 0.3, -0.7};
  const Vector copy = x;
  obj.value(x);
  obj.gradient(x);
  EXPECT_EQ(x, copy);
}

TEST(CheckGradient, QuadraticIsExactToRoundOff) {
  const Problem p = half_norm_squared({0.0, 0.0, 0.0});
  EXPECT_LE(check_gradient(p, Vector{0.3, -1.7, 2.5}, 1e-6), 1e-9);
  EXPECT_LE(check_gradient(p, Vector{10.0, -4.0, 0.0}, 1e-6), 1e-9);
}

TEST(CheckGradient, DetectsFactorTwoBug) {
  Problem p(
      "bugged", Vector{1.0, 2.0}, [](std::span<const double> x) { return 0.5 * squared_norm(x); },
      [](std::span<const double> x, std::span<double> g) {
        for (std::size_t i = 0; i < x.size(); ++i) g[i] = 2.0 * x[i];
      });
  const double err = check_gradient(p, Vector{1.0, 2.0});
  EXPECT_GT(err, 1e-2);
  // |x - 2x| / (1 + |2x|) at x = 2
  EXPECT_NEAR(err, 2.0 / 5.0, 1e-6);
}

TEST(CheckGradient, RosenbrockAtSeededPoints) {
  EXPECT_LE(check_gradient_seeded(instantiate("ext_rosenbrock", 10).problem, 10, 2024, 1e-6), 1e-5);
}

TEST(CheckGradient, ProbePointsAreSeeded) {
  const Problem p = instantiate("ext_rosenbrock", 4).problem;
  EXPECT_EQ(probe_points(p, 5, 11), probe_points(p, 5, 11));
  EXPECT_NE(probe_points(p, 5, 11), probe_points(p, 5, 12));
  EXPECT_EQ(probe_points(p, 5, 11).size(), 5u);
}

TEST(CheckGradient, DoesNotTouchCounters) {
  const Problem p = half_norm_squared({1.0});
  Objective obj(p);
  check_gradient(p, Vector{1.0});
  EXPECT_EQ(obj.counters().f_evals, 0u);
}
