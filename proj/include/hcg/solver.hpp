#pragma once

// Nonlinear conjugate-gradient driver.
//
//   d0 = -g0, lambda0 = 1/|g0|
//   loop: strong Wolfe search from the trial lambda_k, x_{k+1} = x_k + a_k d_k,
//         beta_k from the selected formula, candidate -g_{k+1} + beta_k d_k,
//         Powell restart to -g_{k+1} when |g_{k+1}'g_k| >= nu |g_{k+1}|^2,
//         next trial lambda_{k+1} = a_k |d_k| / |d_{k+1}|.
//
// The recurrence seeds the line search; the accepted step a_k may differ from
// the trial and the recurrence is applied to the accepted value.

#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hcg/directions.hpp"
#include "hcg/linalg.hpp"
#include "hcg/linesearch.hpp"
#include "hcg/objective.hpp"

namespace hcg {

enum class Method { FR, PRP, HS, HRM, NHS, AWHM, SteepestDescent };

inline const char* to_string(Method m) {
  switch (m) {
    case Method::FR: return "fr";
    case Method::PRP: return "prp";
    case Method::HS: return "hs";
    case Method::HRM: return "hrm";
    case Method::NHS: return "nhs";
    case Method::AWHM: return "awhm";
    case Method::SteepestDescent: return "sd";
  }
  return "?";
}

inline std::optional<Method> parse_method(std::string_view s) {
  for (Method m : {Method::FR, Method::PRP, Method::HS, Method::HRM, Method::NHS, Method::AWHM,
                   Method::SteepestDescent})
    if (s == to_string(m)) return m;
  if (s == "steepest" || s == "steepest_descent") return Method::SteepestDescent;
  return std::nullopt;
}

struct SolverConfig {
  Method method = Method::AWHM;
  double epsilon = 1e-6;
  int max_iter = 10000;
  double nu = 0.2;
  HybridParams hybrid;
  WolfeParams ls;  // delta = 1e-4, sigma = 0.9

  void validate() const {
    if (!(epsilon > 0.0)) throw std::invalid_argument("solver: epsilon must be positive");
    if (max_iter < 1) throw std::invalid_argument("solver: max_iter must be at least 1");
    if (!(nu > 0.0)) throw std::invalid_argument("solver: nu must be positive");
    hybrid.validate();
    ls.validate();
  }
};

enum class SolveStatus { GradientConverged, MaxIterations, LineSearchFailed, NonFinite };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::GradientConverged: return "GradientConverged";
    case SolveStatus::MaxIterations: return "MaxIterations";
    case SolveStatus::LineSearchFailed: return "LineSearchFailed";
    case SolveStatus::NonFinite: return "NonFinite";
  }
  return "?";
}

/// One accepted step from x_k. beta/theta/restarted describe how d_k was
/// built (k = 0 uses d_0 = -g_0 with beta = theta = 0).
struct IterationRecord {
  int k = 0;
  double f = 0.0;
  double g_norm = 0.0;
  double alpha = 0.0;        // accepted step
  double alpha_trial = 0.0;  // first trial handed to the line search
  double beta = 0.0;
  double theta = 0.0;
  double gTd = 0.0;
  double d_norm = 0.0;
  bool restarted = false;
  std::size_t f_evals = 0;  // cumulative after this step
};

struct SolveResult {
  SolveStatus status = SolveStatus::MaxIterations;
  Vector x_final;
  double f_final = 0.0;
  double g_norm_final = 0.0;
  int iterations = 0;
  EvalCounters counters;
  std::chrono::duration<double> wall_time{0.0};
  double max_g_norm = 0.0;
  double min_descent_ratio = 0.0;  // min over steps of -g'd / |g|^2
  std::vector<IterationRecord> trace;
};

/// Read-only view of a step handed to observers after the line search accepts it.
struct StepView {
  int k;
  std::span<const double> x;
  std::span<const double> d;
  std::span<const double> g;
  double f;
  double alpha;
  double f_new;
};

struct SolveOptions {
  bool trace = false;
  std::function<void(const StepView&)> on_step;
};

namespace detail {

inline BetaOutcome compute_beta(Method method, const BetaInputs& in, const HybridParams& hp) {
  if (method == Method::AWHM) return beta_awhm(in, hp);
  try {
    switch (method) {
      case Method::FR: return {beta_fr(in), 0.0, HybridBranch::ThetaZeroNHS};
      case Method::PRP: return {beta_prp(in), 0.0, HybridBranch::ThetaZeroNHS};
      case Method::HS: return {beta_hs(in), 0.0, HybridBranch::ThetaZeroNHS};
      case Method::HRM: return {beta_hrm(in, hp), 1.0, HybridBranch::ThetaOneHRM};
      case Method::NHS: return {beta_nhs(in, hp), 0.0, HybridBranch::ThetaZeroNHS};
      case Method::SteepestDescent: return {0.0, 0.0, HybridBranch::DegenerateFallback};
      case Method::AWHM: break;
    }
  } catch (const DegenerateDenominator&) {
  }
  return {0.0, 0.0, HybridBranch::DegenerateFallback};
}

}  // namespace detail

inline SolveResult solve(const Problem& problem, const SolverConfig& config,
                         std::optional<std::span<const double>> x_start = std::nullopt,
                         const SolveOptions& options = {}) {
  config.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t n = problem.n;

  Vector x = x_start ? Vector(x_start->begin(), x_start->end()) : problem.x0;
  require_same_size(n, x.size());

  Objective obj(problem);
  SolveResult res;
  auto finish = [&](SolveStatus status, double f, double gnorm) {
    res.status = status;
    res.x_final = x;
    res.f_final = f;
    res.g_norm_final = gnorm;
    res.counters = obj.counters();
    res.wall_time = std::chrono::steady_clock::now() - t0;
    return res;
  };

  double f = 0.0;
  Vector g;
  try {
    f = obj.value(x);
    g = obj.gradient(x);
  } catch (const NonFiniteValue&) {
    return finish(SolveStatus::NonFinite, std::numeric_limits<double>::quiet_NaN(),
                  std::numeric_limits<double>::quiet_NaN());
  }
  double gnorm = norm(g);
  res.max_g_norm = gnorm;
  res.min_descent_ratio = std::numeric_limits<double>::infinity();
  if (gnorm <= config.epsilon) return finish(SolveStatus::GradientConverged, f, gnorm);

  Vector d = direction(g);
  double lambda = 1.0 / gnorm;
  BetaOutcome how{0.0, 0.0, HybridBranch::DegenerateFallback};
  bool restarted = false;

  for (int k = 0; k < config.max_iter; ++k) {
    double trial = lambda;
    LineSearchResult ls = strong_wolfe_search(obj, x, d, f, g, trial, config.ls);

    if (ls.status == LineSearchStatus::NonFinite) {
      trial *= 1e-3;
      ls = strong_wolfe_search(obj, x, d, f, g, trial, config.ls);
      if (ls.status == LineSearchStatus::NonFinite) return finish(SolveStatus::NonFinite, f, gnorm);
    }
    if (ls.status != LineSearchStatus::Converged) {
      // one retry along steepest descent with a fresh trial step
      d = direction(g);
      trial = 1.0 / gnorm;
      how = {0.0, 0.0, HybridBranch::DegenerateFallback};
      restarted = true;
      ls = strong_wolfe_search(obj, x, d, f, g, trial, config.ls);
      if (ls.status != LineSearchStatus::Converged) return finish(SolveStatus::LineSearchFailed, f, gnorm);
    }

    const double gtd = dot(g, d);
    const double d_norm = norm(d);
    res.min_descent_ratio = std::min(res.min_descent_ratio, -gtd / (gnorm * gnorm));
    if (options.on_step) options.on_step(StepView{k, x, d, g, f, ls.alpha, ls.f_new});
    if (options.trace) {
      IterationRecord rec;
      rec.k = k;
      rec.f = f;
      rec.g_norm = gnorm;
      rec.alpha = ls.alpha;
      rec.alpha_trial = trial;
      rec.beta = how.beta;
      rec.theta = how.theta;
      rec.gTd = gtd;
      rec.d_norm = d_norm;
      rec.restarted = restarted;
      rec.f_evals = obj.counters().f_evals;
      res.trace.push_back(rec);
    }

    const Vector s = difference(ls.x_new, x);
    const Vector y = difference(ls.g_new, g);
    const double gnorm_new = norm(ls.g_new);
    res.iterations = k + 1;
    res.max_g_norm = std::max(res.max_g_norm, gnorm_new);

    if (gnorm_new <= config.epsilon) {
      x = std::move(ls.x_new);
      return finish(SolveStatus::GradientConverged, ls.f_new, gnorm_new);
    }

    const BetaInputs in{ls.g_new, g, d, s, y};
    how = detail::compute_beta(config.method, in, config.hybrid);
    restarted = config.method != Method::SteepestDescent && restart_check(ls.g_new, g, config.nu);
    Vector d_new = restarted ? direction(ls.g_new) : direction(ls.g_new, how.beta, d);

    lambda = ls.alpha * d_norm / norm(d_new);
    x = std::move(ls.x_new);
    g = std::move(ls.g_new);
    f = ls.f_new;
    gnorm = gnorm_new;
    d = std::move(d_new);
  }
  return finish(SolveStatus::MaxIterations, f, gnorm);
}

/// solve() with the per-iteration trace recorded.
inline SolveResult solve_traced(const Problem& problem, const SolverConfig& config,
                                std::optional<std::span<const double>> x_start = std::nullopt) {
  SolveOptions opts;
  opts.trace = true;
  return solve(problem, config, x_start, opts);
}

/// Trace as CSV: k, f, g_norm, alpha, beta, theta, gTd, restarted.
inline void write_trace_csv(std::ostream& os, const std::vector<IterationRecord>& trace) {
  os << "k,f,g_norm,alpha,beta,theta,gTd,restarted\n";
  std::ostringstream line;
  line << std::setprecision(17);
  for (const auto& r : trace) {
    line.str({});
    line << r.k << ',' << r.f << ',' << r.g_norm << ',' << r.alpha << ',' << r.beta << ',' << r.theta << ','
         << r.gTd << ',' << (r.restarted ? 1 : 0) << '\n';
    os << line.str();
  }
}

}  // namespace hcg
