#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hcg/directions.hpp"

using namespace hcg;

namespace {

// Owns the vectors a BetaInputs view points into.
struct Case {
  Vector g_new, g_old, d_old, s, y;

  Case(Vector gn, Vector go, Vector dold = {}, Vector s_ = {})
      : g_new(std::move(gn)), g_old(std::move(go)), d_old(std::move(dold)), s(std::move(s_)) {
    if (d_old.empty()) d_old = negated(g_old);
    if (s.empty()) s = d_old;
    y = difference(g_new, g_old);
  }
  BetaInputs in() const { return {g_new, g_old, d_old, s, y}; }
};

double naive_dot(const Vector& a, const Vector& b) {
  long double acc = 0.0L;
  for (std::size_t i = 0; i < a.size(); ++i) acc += static_cast<long double>(a[i]) * b[i];
  return static_cast<double>(acc);
}

// Straight transcription of the hybrid rule, used as an oracle.
double naive_awhm(const Case& c, double tau, double u, double t) {
  const double gn2 = naive_dot(c.g_new, c.g_new), go2 = naive_dot(c.g_old, c.g_old);
  const double dd = naive_dot(c.d_old, c.d_old), gngo = naive_dot(c.g_new, c.g_old);
  const double gnd = naive_dot(c.g_new, c.d_old), dy = naive_dot(c.d_old, c.y);
  const double gny = naive_dot(c.g_new, c.y), sgn = naive_dot(c.s, c.g_new);
  const double r = std::sqrt(gn2) / std::sqrt(go2);
  const double hrm = (gn2 - r * gngo) / (tau * go2 + (1 - tau) * dd);
  const double nhs = (gn2 - r * std::max(0.0, gngo)) / std::max(std::max(0.0, u * gnd) + go2, dy);
  const double theta = (-t * sgn + gny - nhs * dy) / ((hrm - nhs) * dy);
  if (theta <= 0) return nhs;
  if (theta >= 1) return hrm;
  return (1 - theta) * nhs + theta * hrm;
}

}  // namespace

TEST(BetaFR, Examples) {
  EXPECT_EQ(beta_fr(Case({1, 1}, {1, 1}).in()), 1.0);
  EXPECT_EQ(beta_fr(Case({2, 0}, {1, 0}).in()), 4.0);
  EXPECT_EQ(beta_fr(Case({1, 2}, {2, 1}).in()), 1.0);
  EXPECT_THROW(beta_fr(Case({1, 2}, {0, 0}, {1, 1}).in()), DegenerateDenominator);
}

TEST(BetaPRP, Examples) {
  EXPECT_EQ(beta_prp(Case({1, 3}, {1, 3}).in()), 0.0);
  EXPECT_EQ(beta_prp(Case({0, 1}, {1, 0}).in()), 1.0);
  EXPECT_EQ(beta_prp(Case({2, 0}, {1, 0}).in()), 2.0);
}

TEST(BetaHS, Examples) {
  EXPECT_EQ(beta_hs(Case({0, 1}, {1, 0}, {-1, 0}).in()), 1.0);
  // y = (1, 0), d_old = (0, 1): orthogonal
  EXPECT_THROW(beta_hs(Case({2, 1}, {1, 1}, {0, 1}).in()), DegenerateDenominator);
  // g_new = g_old: zero numerator and zero denominator
  EXPECT_THROW(beta_hs(Case({1, 1}, {1, 1}).in()), DegenerateDenominator);
}

TEST(BetaHRM, Examples) {
  HybridParams p;
  EXPECT_DOUBLE_EQ(beta_hrm(Case({3, 6}, {1, 2}).in(), p), 0.0);
  EXPECT_EQ(beta_hrm(Case({0, 1}, {1, 0}, {-1, 0}).in(), p), 1.0);
  EXPECT_THROW(beta_hrm(Case({1, 1}, {0, 0}, {0, 0}).in(), p), DegenerateDenominator);
}

TEST(BetaNHS, Examples) {
  HybridParams p;
  EXPECT_EQ(beta_nhs(Case({0, 1}, {1, 0}, {-1, 0}).in(), p), 1.0);
  EXPECT_EQ(beta_nhs(Case({0.3, -2}, {0.3, -2}).in(), p), 0.0);
}

TEST(BetaNHS, NonNegativeOnRandomInputs) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> N;
  HybridParams p;
  for (int i = 0; i < 2000; ++i) {
    Vector gn(4), go(4), d(4);
    for (auto* v : {&gn, &go, &d})
      for (auto& e : *v) e = N(rng);
    EXPECT_GE(beta_nhs(Case(gn, go, d).in(), p), 0.0);
  }
}

TEST(ThetaNew, Examples) {
  HybridParams p;
  const Case base({0, 1}, {1, 0}, {-1, 0}, {1, 0});
  EXPECT_EQ(theta_new(base.in(), 1.0, 2.0, p), 0.0);
  EXPECT_EQ(theta_new(base.in(), 0.7, 0.7, p), 0.0);

  // g_new = (0.1, 1): y = (-0.9, 1), s'g = 0.1, g'y = 0.91, d'y = 0.9
  // num = -0.1 + 0.91 - 0.9 = -0.09, den = (2 - 1) * 0.9
  const Case pert({0.1, 1}, {1, 0}, {-1, 0}, {1, 0});
  EXPECT_NEAR(theta_new(pert.in(), 1.0, 2.0, p), -0.1, 1e-15);
}

TEST(BetaAWHM, BranchSelection) {
  HybridParams p;
  const Case c({0.1, 1}, {1, 0}, {-1, 0}, {1, 0});
  const double nhs = beta_nhs(c.in(), p), hrm = beta_hrm(c.in(), p);

  p.theta_override = 0.0;
  auto o = beta_awhm(c.in(), p);
  EXPECT_EQ(o.beta, nhs);
  EXPECT_EQ(o.branch, HybridBranch::ThetaZeroNHS);

  p.theta_override = 1.0;
  o = beta_awhm(c.in(), p);
  EXPECT_EQ(o.beta, hrm);
  EXPECT_EQ(o.branch, HybridBranch::ThetaOneHRM);

  p.theta_override = 0.5;
  o = beta_awhm(c.in(), p);
  EXPECT_EQ(o.branch, HybridBranch::InteriorAWHM);
  EXPECT_DOUBLE_EQ(o.beta, 0.5 * nhs + 0.5 * hrm);
}

TEST(BetaAWHM, ConvexCombinationArithmetic) {
  const double b_nhs = 0.2, b_hrm = 0.4, theta = 0.5;
  EXPECT_DOUBLE_EQ((1 - theta) * b_nhs + theta * b_hrm, 0.3);
}

TEST(BetaAWHM, DegenerateMapsToFallback) {
  const auto o = beta_awhm(Case({1, 1}, {0, 0}, {0, 0}).in(), HybridParams{});
  EXPECT_EQ(o.branch, HybridBranch::DegenerateFallback);
  EXPECT_EQ(o.beta, 0.0);
}

TEST(BetaAWHM, MatchesNaiveOracleOnRandomInputs) {
  std::mt19937_64 rng(1234);
  std::normal_distribution<double> N;
  const HybridParams p;
  int interior = 0;
  for (int i = 0; i < 1000; ++i) {
    const std::size_t n = 2 + i % 6;
    Vector gn(n), go(n), d(n);
    for (auto* v : {&gn, &go, &d})
      for (auto& e : *v) e = N(rng);
    Vector s(d);
    const double a = 0.1 + std::abs(N(rng));
    for (auto& e : s) e *= a;
    const Case c(gn, go, d, s);
    const auto o = beta_awhm(c.in(), p);
    ASSERT_NE(o.branch, HybridBranch::DegenerateFallback);
    interior += o.branch == HybridBranch::InteriorAWHM;
    const double ref = naive_awhm(c, p.tau, p.u, p.t);
    EXPECT_NEAR(o.beta, ref, 1e-12 * (1.0 + std::abs(ref))) << "case " << i;
  }
  EXPECT_GT(interior, 0);
}

TEST(BetaAWHM, LiesBetweenParents) {
  std::mt19937_64 rng(77);
  std::normal_distribution<double> N;
  const HybridParams p;
  for (int i = 0; i < 1000; ++i) {
    Vector gn(3), go(3), d(3);
    for (auto* v : {&gn, &go, &d})
      for (auto& e : *v) e = N(rng);
    const Case c(gn, go, d);
    const double nhs = beta_nhs(c.in(), p), hrm = beta_hrm(c.in(), p);
    const double b = beta_awhm(c.in(), p).beta;
    const double slack = 1e-15 * (std::abs(nhs) + std::abs(hrm));
    EXPECT_GE(b, std::min(nhs, hrm) - slack);
    EXPECT_LE(b, std::max(nhs, hrm) + slack);
  }
}

TEST(BetaScaling, FRAndPRPInvariantUnderCommonScale) {
  const Case c({0.3, -1.2, 2.0}, {1.5, 0.4, -0.7});
  for (double k : {-3.0, 0.5, 7.0}) {
    Vector gn = c.g_new, go = c.g_old;
    for (auto& v : gn) v *= k;
    for (auto& v : go) v *= k;
    const Case scaled(gn, go);
    EXPECT_NEAR(beta_fr(scaled.in()), beta_fr(c.in()), 1e-14);
    EXPECT_NEAR(beta_prp(scaled.in()), beta_prp(c.in()), 1e-14);
  }
}

TEST(Direction, Examples) {
  const Vector g{1.0, 0.0}, d_old{0.0, 1.0};
  EXPECT_EQ(direction(g, 0.0, d_old), (Vector{-1.0, 0.0}));
  EXPECT_EQ(direction(g, 1.0, d_old), (Vector{-1.0, 1.0}));
  EXPECT_EQ(direction(Vector{3.0, -4.0}), (Vector{-3.0, 4.0}));
  EXPECT_THROW(direction(g, 1.0, Vector{1.0}), DimensionMismatch);
}

TEST(Restart, Examples) {
  EXPECT_FALSE(restart_check(Vector{0.0, 1.0}, Vector{1.0, 0.0}));
  EXPECT_TRUE(restart_check(Vector{1.0, 2.0}, Vector{1.0, 2.0}));
  EXPECT_TRUE(restart_check(Vector{0.0, 0.0}, Vector{1.0, 0.0}));
  EXPECT_THROW(restart_check(Vector{1.0}, Vector{1.0}, 0.0), std::invalid_argument);
}

TEST(HybridParams, Validation) {
  HybridParams p;
  EXPECT_NO_THROW(p.validate());
  p.u = 1.0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = {};
  p.theta_override = 1.5;
  EXPECT_THROW(p.validate(), std::invalid_argument);
}
