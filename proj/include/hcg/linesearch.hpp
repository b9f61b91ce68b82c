#pragma once

// Strong Wolfe-Powell step selection: bracket phase followed by a zoom with
// safeguarded cubic interpolation.
//
//   f(x + a d) <= f0 + delta * a * g0'd
//   |g(x + a d)'d| <= sigma * |g0'd|

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>

#include "hcg/linalg.hpp"
#include "hcg/objective.hpp"

namespace hcg {

struct WolfeParams {
  double delta = 1e-4;
  double sigma = 0.9;
  int max_evals = 60;
  double alpha_max = 1e6;

  void validate() const {
    if (!(delta > 0.0 && delta < 0.5)) throw std::invalid_argument("wolfe: delta must lie in (0, 0.5)");
    if (!(sigma > delta && sigma < 1.0)) throw std::invalid_argument("wolfe: sigma must lie in (delta, 1)");
    if (max_evals < 1) throw std::invalid_argument("wolfe: max_evals must be positive");
    if (!(alpha_max > 0.0)) throw std::invalid_argument("wolfe: alpha_max must be positive");
  }
};

enum class LineSearchStatus { Converged, MaxEvals, NonDescent, NonFinite };

inline const char* to_string(LineSearchStatus s) {
  switch (s) {
    case LineSearchStatus::Converged: return "Converged";
    case LineSearchStatus::MaxEvals: return "MaxEvals";
    case LineSearchStatus::NonDescent: return "NonDescent";
    case LineSearchStatus::NonFinite: return "NonFinite";
  }
  return "?";
}

struct LineSearchResult {
  double alpha = 0.0;
  double f_new = 0.0;
  Vector x_new;
  Vector g_new;
  int evals_used = 0;
  LineSearchStatus status = LineSearchStatus::MaxEvals;
};

inline bool sufficient_decrease(double f0, double dphi0, double f_a, double alpha, double delta) {
  return f_a <= f0 + delta * alpha * dphi0;
}

inline bool strong_curvature(double dphi0, double dphi_a, double sigma) {
  return std::abs(dphi_a) <= sigma * std::abs(dphi0);
}

namespace detail {

struct TrialPoint {
  double alpha = 0.0;
  double f = 0.0;
  double dphi = 0.0;
  bool finite = true;
};

// Minimizer of the cubic matching (a, fa, da) and (b, fb, db); NaN when the
// cubic has no usable minimizer.
inline double cubic_minimizer(const TrialPoint& a, const TrialPoint& b) {
  const double h = b.alpha - a.alpha;
  if (h == 0.0) return std::numeric_limits<double>::quiet_NaN();
  const double d1 = a.dphi + b.dphi - 3.0 * (a.f - b.f) / (a.alpha - b.alpha);
  const double disc = d1 * d1 - a.dphi * b.dphi;
  if (!(disc >= 0.0)) return std::numeric_limits<double>::quiet_NaN();
  const double d2 = std::copysign(std::sqrt(disc), h);
  const double denom = b.dphi - a.dphi + 2.0 * d2;
  if (denom == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return b.alpha - h * (b.dphi + d2 - d1) / denom;
}

}  // namespace detail

/// Searches along d from x for a step satisfying the strong Wolfe conditions.
/// `f0`/`g0` are the value and gradient at x; `alpha_init` is the first trial.
inline LineSearchResult strong_wolfe_search(Objective& obj, std::span<const double> x, std::span<const double> d,
                                            double f0, std::span<const double> g0, double alpha_init,
                                            const WolfeParams& params) {
  using detail::TrialPoint;
  const std::size_t n = obj.dimension();
  require_same_size(n, x.size());
  require_same_size(n, d.size());
  require_same_size(n, g0.size());
  if (!(alpha_init > 0.0)) throw std::invalid_argument("line search: alpha_init must be positive");

  LineSearchResult res;
  const double dphi0 = dot(g0, d);
  if (!(dphi0 < 0.0)) {
    res.status = LineSearchStatus::NonDescent;
    return res;
  }

  Vector xt(n), gt(n);
  bool any_finite = false;

  auto evaluate = [&](double alpha) {
    TrialPoint p;
    p.alpha = alpha;
    ++res.evals_used;
    step_point(x, alpha, d, xt);
    try {
      p.f = obj.value(xt);
      obj.gradient(xt, gt);
      p.dphi = dot(gt, d);
      any_finite = true;
    } catch (const NonFiniteValue&) {
      p.finite = false;
      p.f = std::numeric_limits<double>::infinity();
    }
    return p;
  };

  auto accept = [&](const TrialPoint& p) {
    res.alpha = p.alpha;
    res.f_new = p.f;
    res.x_new = xt;
    res.g_new = gt;
    res.status = LineSearchStatus::Converged;
    return res;
  };

  auto fail = [&]() {
    res.status = any_finite ? LineSearchStatus::MaxEvals : LineSearchStatus::NonFinite;
    return res;
  };

  auto is_acceptable = [&](const TrialPoint& p) {
    return p.finite && sufficient_decrease(f0, dphi0, p.f, p.alpha, params.delta) &&
           strong_curvature(dphi0, p.dphi, params.sigma);
  };

  // lo always satisfies sufficient decrease and has the lowest value seen so
  // far; hi is the other end of a bracket containing acceptable steps.
  auto zoom = [&](TrialPoint lo, TrialPoint hi) {
    while (res.evals_used < params.max_evals) {
      const double left = std::min(lo.alpha, hi.alpha);
      const double right = std::max(lo.alpha, hi.alpha);
      const double width = right - left;
      if (width <= 4.0 * std::numeric_limits<double>::epsilon() * right) break;

      double a = hi.finite ? detail::cubic_minimizer(lo, hi) : std::numeric_limits<double>::quiet_NaN();
      const double inner_lo = left + 0.1 * width;
      const double inner_hi = left + 0.9 * width;
      if (!std::isfinite(a))
        a = 0.5 * (lo.alpha + hi.alpha);
      a = std::clamp(a, inner_lo, inner_hi);

      const TrialPoint p = evaluate(a);
      if (is_acceptable(p)) return accept(p);
      if (!p.finite || !sufficient_decrease(f0, dphi0, p.f, p.alpha, params.delta) || p.f >= lo.f) {
        hi = p;
      } else {
        if (p.dphi * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
        lo = p;
      }
    }
    return fail();
  };

  TrialPoint prev{0.0, f0, dphi0, true};
  double alpha = std::min(alpha_init, params.alpha_max);
  for (int i = 0; res.evals_used < params.max_evals; ++i) {
    const TrialPoint p = evaluate(alpha);
    if (!p.finite || !sufficient_decrease(f0, dphi0, p.f, p.alpha, params.delta) || (i > 0 && p.f >= prev.f))
      return zoom(prev, p);
    if (strong_curvature(dphi0, p.dphi, params.sigma)) return accept(p);
    if (p.dphi >= 0.0) return zoom(p, prev);
    if (alpha >= params.alpha_max) break;
    prev = p;
    alpha = std::min(2.0 * alpha, params.alpha_max);
  }
  return fail();
}

}  // namespace hcg
