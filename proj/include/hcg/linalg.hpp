#pragma once

// Dense vector kernels shared by the solver, line search and coefficient
// formulas. All reductions run in index order so results are reproducible.

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hcg {

using Vector = std::vector<double>;

class DimensionMismatch : public std::invalid_argument {
 public:
  DimensionMismatch(std::size_t expected, std::size_t got)
      : std::invalid_argument("dimension mismatch: expected " + std::to_string(expected) +
                              ", got " + std::to_string(got)),
        expected_(expected),
        got_(got) {}

  std::size_t expected() const noexcept { return expected_; }
  std::size_t got() const noexcept { return got_; }

 private:
  std::size_t expected_;
  std::size_t got_;
};

inline void require_same_size(std::size_t expected, std::size_t got) {
  if (expected != got) throw DimensionMismatch(expected, got);
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  require_same_size(a.size(), b.size());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double squared_norm(std::span<const double> a) { return dot(a, a); }

inline double norm(std::span<const double> a) { return std::sqrt(squared_norm(a)); }

inline double max_abs(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

/// out = x + alpha * d. This is the only place trial points are formed, so
/// a step re-evaluated elsewhere with this helper reproduces the same bits.
inline void step_point(std::span<const double> x, double alpha, std::span<const double> d,
                       std::span<double> out) {
  require_same_size(x.size(), d.size());
  require_same_size(x.size(), out.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + alpha * d[i];
}

/// Neumaier-compensated accumulator. Benchmark objectives sum with it so the
/// value is close to correctly rounded; the line search's sufficient-decrease
/// test then only sees rounding that is monotone in the true value.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
  }
  CompensatedSum& operator+=(double v) {
    add(v);
    return *this;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline Vector step_point(std::span<const double> x, double alpha, std::span<const double> d) {
  Vector out(x.size());
  step_point(x, alpha, d, out);
  return out;
}

inline Vector difference(std::span<const double> a, std::span<const double> b) {
  require_same_size(a.size(), b.size());
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

inline Vector negated(std::span<const double> a) {
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = -a[i];
  return out;
}

inline bool all_finite(std::span<const double> a) {
  for (double v : a)
    if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace hcg
