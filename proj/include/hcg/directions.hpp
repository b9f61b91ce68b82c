#pragma once

// Conjugate-gradient coefficient formulas, the hybrid NHS/HRM coefficient with
// its conjugacy-derived mixing weight, the direction update and the restart
// test.
//
// Index convention: every coefficient is built from the quintuple
// (g_new, g_old, d_old, s, y) with s = x_new - x_old and y = g_new - g_old.

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>

#include "hcg/linalg.hpp"

namespace hcg {

class DegenerateDenominator : public std::domain_error {
 public:
  explicit DegenerateDenominator(const char* formula)
      : std::domain_error(std::string("degenerate denominator in ") + formula) {}
};

struct BetaInputs {
  std::span<const double> g_new;
  std::span<const double> g_old;
  std::span<const double> d_old;
  std::span<const double> s;
  std::span<const double> y;

  void validate() const {
    const std::size_t n = g_new.size();
    require_same_size(n, g_old.size());
    require_same_size(n, d_old.size());
    require_same_size(n, s.size());
    require_same_size(n, y.size());
  }
};

struct HybridParams {
  double tau = 0.4;  // HRM mixing
  double u = 1.1;    // NHS parameter
  double t = 1.0;    // conjugacy scale, d'y = -t s'g
  /// Pins the mixing weight instead of deriving it; used to check that the
  /// hybrid degenerates to its parents.
  std::optional<double> theta_override;

  void validate() const {
    if (!(tau > 0.0 && tau < 1.0)) throw std::invalid_argument("hybrid: tau must lie in (0, 1)");
    if (!(u > 1.0)) throw std::invalid_argument("hybrid: u must exceed 1");
    if (!(t > 0.0)) throw std::invalid_argument("hybrid: t must be positive");
    if (theta_override && !(*theta_override >= 0.0 && *theta_override <= 1.0))
      throw std::invalid_argument("hybrid: theta override must lie in [0, 1]");
  }
};

enum class HybridBranch { ThetaZeroNHS, InteriorAWHM, ThetaOneHRM, DegenerateFallback };

inline const char* to_string(HybridBranch b) {
  switch (b) {
    case HybridBranch::ThetaZeroNHS: return "ThetaZero_NHS";
    case HybridBranch::InteriorAWHM: return "Interior_AWHM";
    case HybridBranch::ThetaOneHRM: return "ThetaOne_HRM";
    case HybridBranch::DegenerateFallback: return "DegenerateFallback";
  }
  return "?";
}

struct BetaOutcome {
  double beta = 0.0;
  double theta = 0.0;
  HybridBranch branch = HybridBranch::DegenerateFallback;
};

/// Fletcher-Reeves: |g_new|^2 / |g_old|^2.
inline double beta_fr(const BetaInputs& in) {
  const double den = squared_norm(in.g_old);
  if (den == 0.0) throw DegenerateDenominator("FR");
  return squared_norm(in.g_new) / den;
}

/// Polak-Ribiere-Polyak: g_new'(g_new - g_old) / |g_old|^2.
inline double beta_prp(const BetaInputs& in) {
  const double den = squared_norm(in.g_old);
  if (den == 0.0) throw DegenerateDenominator("PRP");
  return dot(in.g_new, in.y) / den;
}

/// Hestenes-Stiefel: g_new'y / y'd_old.
inline double beta_hs(const BetaInputs& in) {
  const double den = dot(in.y, in.d_old);
  if (den == 0.0) throw DegenerateDenominator("HS");
  return dot(in.g_new, in.y) / den;
}

/// g_new'(g_new - (|g_new|/|g_old|) g_old) / (tau |g_old|^2 + (1 - tau) |d_old|^2)
inline double beta_hrm(const BetaInputs& in, const HybridParams& p) {
  const double gg_old = squared_norm(in.g_old);
  const double den = p.tau * gg_old + (1.0 - p.tau) * squared_norm(in.d_old);
  if (gg_old == 0.0 || den == 0.0) throw DegenerateDenominator("HRM");
  const double ratio = norm(in.g_new) / std::sqrt(gg_old);
  const double num = squared_norm(in.g_new) - ratio * dot(in.g_new, in.g_old);
  return num / den;
}

/// (|g_new|^2 - (|g_new|/|g_old|) max{0, g_new'g_old})
///   / max{ max{0, u g_new'd_old} + |g_old|^2, d_old'y }
inline double beta_nhs(const BetaInputs& in, const HybridParams& p) {
  const double gg_old = squared_norm(in.g_old);
  if (gg_old == 0.0) throw DegenerateDenominator("NHS");
  const double ratio = norm(in.g_new) / std::sqrt(gg_old);
  const double num = squared_norm(in.g_new) - ratio * std::max(0.0, dot(in.g_new, in.g_old));
  const double den = std::max(std::max(0.0, p.u * dot(in.g_new, in.d_old)) + gg_old, dot(in.d_old, in.y));
  if (!(den > 0.0)) throw DegenerateDenominator("NHS");
  // Cauchy-Schwarz makes the numerator nonnegative; round-off can push it a
  // few ulps below zero.
  return std::max(0.0, num) / den;
}

/// Unclamped mixing weight from the conjugacy condition d_new'y = -t s'g_new:
///   (-t s'g_new + g_new'y - b_nhs d_old'y) / ((b_hrm - b_nhs) d_old'y)
/// Returns 0 when the denominator vanishes relative to the numerator.
inline double theta_new(const BetaInputs& in, double b_nhs, double b_hrm, const HybridParams& p) {
  const double dy = dot(in.d_old, in.y);
  const double num = -p.t * dot(in.s, in.g_new) + dot(in.g_new, in.y) - b_nhs * dy;
  const double den = (b_hrm - b_nhs) * dy;
  if (!(std::abs(den) >= 1e-30 * (1.0 + std::abs(num)))) return 0.0;
  return num / den;
}

inline BetaOutcome beta_awhm(const BetaInputs& in, const HybridParams& p) {
  in.validate();
  double b_nhs = 0.0;
  double b_hrm = 0.0;
  try {
    b_nhs = beta_nhs(in, p);
    b_hrm = beta_hrm(in, p);
  } catch (const DegenerateDenominator&) {
    return {0.0, 0.0, HybridBranch::DegenerateFallback};
  }

  const double theta = p.theta_override ? *p.theta_override : theta_new(in, b_nhs, b_hrm, p);
  if (theta <= 0.0) return {b_nhs, 0.0, HybridBranch::ThetaZeroNHS};
  if (theta >= 1.0) return {b_hrm, 1.0, HybridBranch::ThetaOneHRM};
  if (!std::isfinite(theta)) return {b_nhs, 0.0, HybridBranch::ThetaZeroNHS};
  return {(1.0 - theta) * b_nhs + theta * b_hrm, theta, HybridBranch::InteriorAWHM};
}

/// -g_new + beta * d_old
inline Vector direction(std::span<const double> g_new, double beta, std::span<const double> d_old) {
  require_same_size(g_new.size(), d_old.size());
  Vector d(g_new.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = -g_new[i] + beta * d_old[i];
  return d;
}

/// First-iteration direction: -g.
inline Vector direction(std::span<const double> g) { return negated(g); }

/// True when successive gradients are far from orthogonal:
/// |g_new'g_old| >= nu |g_new|^2.
inline bool restart_check(std::span<const double> g_new, std::span<const double> g_old, double nu = 0.2) {
  if (!(nu > 0.0)) throw std::invalid_argument("restart threshold must be positive");
  return std::abs(dot(g_new, g_old)) >= nu * squared_norm(g_new);
}

}  // namespace hcg
