#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "hcg/mlapp.hpp"

using namespace hcg;
using namespace hcg::ner;

namespace {

Vector seeded_weights(std::uint64_t seed, double scale) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> N(0.0, scale);
  Vector w(LinearTagModel::dimension());
  for (auto& v : w) v = N(rng);
  return w;
}

std::shared_ptr<const FeaturizedTokens> small_data(std::uint64_t seed, std::size_t sentences) {
  const auto ds = generate_synthetic(seed, sentences);
  return std::make_shared<const FeaturizedTokens>(featurize(ds.train()));
}

}  // namespace

TEST(Synthetic, DeterministicPerSeed) {
  const auto a = generate_synthetic(7, 50), b = generate_synthetic(7, 50), c = generate_synthetic(8, 50);
  ASSERT_EQ(a.sentences.size(), b.sentences.size());
  for (std::size_t i = 0; i < a.sentences.size(); ++i) {
    EXPECT_EQ(a.sentences[i].tokens, b.sentences[i].tokens);
    EXPECT_EQ(a.sentences[i].tags, b.sentences[i].tags);
  }
  bool differs = false;
  for (std::size_t i = 0; i < a.sentences.size(); ++i) differs |= a.sentences[i].tokens != c.sentences[i].tokens;
  EXPECT_TRUE(differs);
  EXPECT_EQ(a.train().size() + a.test().size(), 50u);
  EXPECT_EQ(a.test().size(), 10u);
}

TEST(Synthetic, ValidBio) {
  for (const auto& s : generate_synthetic(3, 500).sentences) EXPECT_TRUE(is_valid_bio(s));
  Sentence bad{{"lung", "pain"}, {Tag::O, Tag::ISymptom}};
  EXPECT_FALSE(is_valid_bio(bad));
  Sentence mixed{{"lung", "pain"}, {Tag::BOrgan, Tag::ISymptom}};
  EXPECT_FALSE(is_valid_bio(mixed));
}

TEST(Synthetic, HistogramSnapshotSeed7) {
  const auto ds = generate_synthetic(7, 200);
  const auto h = tag_histogram(ds.sentences);
  const std::array<std::size_t, kNumTags> frozen{1009, 112, 70, 121, 68, 106, 65, 122, 78};
  EXPECT_EQ(h, frozen);
  std::size_t total = 0;
  for (auto v : h) total += v;
  for (int c = 0; c < 4; ++c) {
    const auto n = h[static_cast<std::size_t>(begin_tag(c))] + h[static_cast<std::size_t>(inside_tag(c))];
    EXPECT_GE(static_cast<double>(n) / static_cast<double>(total), 0.05) << kClassNames[c];
  }
}

TEST(Tags, NamesRoundTrip) {
  for (std::size_t i = 0; i < kNumTags; ++i) EXPECT_EQ(parse_tag(kTagNames[i]), static_cast<Tag>(i));
  EXPECT_FALSE(parse_tag("B-PERSON").has_value());
  EXPECT_EQ(entity_class(Tag::O), -1);
  EXPECT_EQ(entity_class(Tag::IDrug), 3);
}

TEST(Loss, UniformAtZero) {
  const auto data = small_data(7, 20);
  const Vector w(LinearTagModel::dimension(), 0.0);
  EXPECT_NEAR(training_loss(w, *data, 1e-4), std::log(9.0), 1e-12);
  EXPECT_THROW(training_loss(Vector(10, 0.0), *data, 1e-4), DimensionMismatch);
}

TEST(Loss, GradientMatchesCentralDifferences) {
  const auto data = small_data(11, 20);
  const Vector w = seeded_weights(5, 0.3);
  Vector g(w.size());
  training_gradient(w, *data, 1e-4, g);

  // active coordinates (features present in the data) plus random ones
  std::vector<std::size_t> coords;
  for (std::size_t k = 0; k < 20; ++k)
    for (std::size_t t = 0; t < kNumTags; t += 4) coords.push_back(t * kNumFeatures + data->features[k][1]);
  std::mt19937_64 rng(3);
  for (int i = 0; i < 60; ++i) coords.push_back(rng() % w.size());

  const double h = 1e-6;
  double worst = 0.0;
  Vector wp = w;
  for (std::size_t i : coords) {
    wp[i] = w[i] + h;
    const double fp = training_loss(wp, *data, 1e-4);
    wp[i] = w[i] - h;
    const double fm = training_loss(wp, *data, 1e-4);
    wp[i] = w[i];
    worst = std::max(worst, std::abs((fp - fm) / (2 * h) - g[i]) / (1.0 + std::abs(g[i])));
  }
  EXPECT_LE(worst, 1e-5);
}

TEST(Loss, RegularizerDominatesForLargeL2) {
  const auto data = small_data(2, 10);
  const Vector w = seeded_weights(9, 1.0);
  const double l2 = 1e8;
  Vector g(w.size());
  training_gradient(w, *data, l2, g);
  double worst = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) worst = std::max(worst, std::abs(g[i] - l2 * w[i]) / (l2 * 1e-3 + std::abs(l2 * w[i])));
  EXPECT_LE(worst, 1e-6);
}

TEST(Loss, ConvexityCertificate) {
  const auto data = small_data(4, 30);
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const Vector w1 = seeded_weights(100 + seed, 0.5), w2 = seeded_weights(200 + seed, 0.5);
    const double f1 = training_loss(w1, *data, 1e-4), f2 = training_loss(w2, *data, 1e-4);
    for (double t : {0.25, 0.5, 0.75}) {
      Vector mix(w1.size());
      for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = t * w1[i] + (1 - t) * w2[i];
      EXPECT_LE(training_loss(mix, *data, 1e-4), t * f1 + (1 - t) * f2 + 1e-10);
    }
  }
}

TEST(Loss, PairMatchesParts) {
  const auto data = small_data(6, 10);
  LinearTagModel m;
  m.weights = seeded_weights(1, 0.1);
  const auto [f, g] = loss_and_grad(m, *data, 1e-3);
  EXPECT_EQ(f, training_loss(m.weights, *data, 1e-3));
  Vector g2(m.weights.size());
  training_gradient(m.weights, *data, 1e-3, g2);
  EXPECT_EQ(g, g2);
}

TEST(Train, SeparableToySetReachesFullAccuracy) {
  std::vector<Sentence> toy;
  for (int i = 0; i < 8; ++i) {
    toy.push_back({{"qq", "zz"}, {Tag::BDisease, Tag::O}});
    toy.push_back({{"zz", "qq"}, {Tag::O, Tag::BDisease}});
  }
  const auto r = train(toy, SolverConfig{});
  ASSERT_EQ(r.solve.status, SolveStatus::GradientConverged);
  const auto data = featurize(toy);
  for (std::size_t k = 0; k < data.gold.size(); ++k) EXPECT_EQ(r.model.predict(data.features[k]), data.gold[k]);
}

TEST(Train, LossStrictlyDecreasesAndBeatsBaselineF1) {
  const auto ds = generate_synthetic(7, 400);
  const auto r = train(ds.train(), SolverConfig{});
  ASSERT_EQ(r.solve.status, SolveStatus::GradientConverged);
  for (std::size_t k = 0; k + 1 < r.solve.trace.size(); ++k) EXPECT_LT(r.solve.trace[k + 1].f, r.solve.trace[k].f);
  for (const auto& t : r.solve.trace) EXPECT_LT(t.gTd, 0.0);
  EXPECT_GE(evaluate(r.model, ds.test()).macro_f1, 0.9);
}

TEST(Train, HybridNeedsNoMoreEvaluationsThanSteepestDescent) {
  const auto ds = generate_synthetic(7, 400);
  SolverConfig ref;
  ref.epsilon = 1e-9;
  const double l_star = train(ds.train(), ref).solve.f_final;

  SolverConfig hybrid, sd;
  sd.method = Method::SteepestDescent;
  const auto a = f_evals_to_reach(train(ds.train(), hybrid).solve, l_star + 1e-4);
  const auto b = f_evals_to_reach(train(ds.train(), sd).solve, l_star + 1e-4);
  ASSERT_TRUE(a.has_value());
  if (b) {
    EXPECT_LE(*a, *b);
  }
}

TEST(Metrics, CountsToScores) {
  const auto perfect = metrics_from_counts(1, 0, 0);
  EXPECT_EQ(perfect.precision, 1.0);
  EXPECT_EQ(perfect.recall, 1.0);
  EXPECT_EQ(perfect.f1, 1.0);

  const auto m = metrics_from_counts(2, 1, 1);
  EXPECT_DOUBLE_EQ(m.precision, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(m.recall, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(m.f1, 2.0 / 3.0);

  const auto zero = metrics_from_counts(0, 0, 0);
  EXPECT_EQ(zero.precision, 0.0);
  EXPECT_EQ(zero.recall, 0.0);
  EXPECT_EQ(zero.f1, 0.0);
}

TEST(Metrics, F1IsHarmonicMeanAndSymmetric) {
  const auto a = metrics_from_counts(3, 1, 5), b = metrics_from_counts(3, 5, 1);
  EXPECT_DOUBLE_EQ(a.f1, b.f1);
  EXPECT_DOUBLE_EQ(a.f1, 2.0 / (1.0 / a.precision + 1.0 / a.recall));
}

TEST(Metrics, EvaluateCountsAndPermutationInvariance) {
  // Model that predicts O everywhere: every entity token is a false negative.
  const auto ds = generate_synthetic(5, 60);
  LinearTagModel zero;
  const auto m = evaluate(zero, ds.test());
  const auto h = tag_histogram(ds.test());
  for (int c = 0; c < 4; ++c) {
    EXPECT_EQ(m.per_class[c].tp, 0u);
    EXPECT_EQ(m.per_class[c].fn,
              h[static_cast<std::size_t>(begin_tag(c))] + h[static_cast<std::size_t>(inside_tag(c))]);
  }
  EXPECT_EQ(m.macro_f1, 0.0);

  const auto trained = train(ds.train(), SolverConfig{});
  std::vector<Sentence> shuffled(ds.test().begin(), ds.test().end());
  std::reverse(shuffled.begin(), shuffled.end());
  const auto x = evaluate(trained.model, ds.test()), y = evaluate(trained.model, shuffled);
  EXPECT_EQ(x.macro_f1, y.macro_f1);
  for (int c = 0; c < 4; ++c) EXPECT_EQ(x.per_class[c].tp, y.per_class[c].tp);
}

TEST(Metrics, JsonShape) {
  NerMetrics m;
  m.per_class[0] = metrics_from_counts(2, 1, 1);
  const auto j = to_json(m, 1.5);
  EXPECT_EQ(j.at("DISEASE").at("tp"), 2);
  EXPECT_EQ(j.at("wall_time_seconds"), 1.5);
  EXPECT_TRUE(j.contains("macro_f1"));
  EXPECT_FALSE(to_json(m).contains("wall_time_seconds"));
}

TEST(Adam, ZeroLearningRateLeavesWeightsUnchanged) {
  Problem p("q", Vector{3.0}, [](std::span<const double> x) { return x[0] * x[0]; },
            [](std::span<const double> x, std::span<double> g) { g[0] = 2 * x[0]; });
  AdamParams a;
  a.lr = 0.0;
  a.steps = 10;
  EXPECT_EQ(adam_minimize(p, p.x0, a), p.x0);
}

TEST(Adam, MatchesHandSimulationOnQuadratic) {
  // f = (x - 1)^2 from x = 3, five steps
  Problem p("q", Vector{3.0}, [](std::span<const double> x) { return (x[0] - 1) * (x[0] - 1); },
            [](std::span<const double> x, std::span<double> g) { g[0] = 2 * (x[0] - 1); });
  AdamParams a;
  a.lr = 0.1;
  a.steps = 5;
  double x = 3.0, m = 0.0, v = 0.0;
  for (int t = 1; t <= 5; ++t) {
    const double g = 2 * (x - 1);
    m = 0.9 * m + 0.1 * g;
    v = 0.999 * v + 0.001 * g * g;
    x -= 0.1 * (m / (1 - std::pow(0.9, t))) / (std::sqrt(v / (1 - std::pow(0.999, t))) + 1e-8);
  }
  const Vector got = adam_minimize(p, p.x0, a);
  EXPECT_NEAR(got[0], x, 1e-12);
  EXPECT_LT(std::abs(got[0] - 1.0), 2.0);

  a.steps = 2000;
  a.lr = 0.01;
  EXPECT_NEAR(adam_minimize(p, p.x0, a)[0], 1.0, 1e-3);
}

TEST(Adam, DeterministicBaseline) {
  const auto ds = generate_synthetic(7, 60);
  AdamParams a;
  a.steps = 20;
  const auto r1 = baseline_adam(ds.train(), a), r2 = baseline_adam(ds.train(), a);
  EXPECT_EQ(r1.model.weights, r2.model.weights);
  EXPECT_EQ(r1.final_loss, r2.final_loss);
  EXPECT_LT(r1.final_loss, std::log(9.0));
  a.steps = 0;
  EXPECT_THROW(baseline_adam(ds.train(), a), std::invalid_argument);
}

TEST(Tsv, RoundTrip) {
  const auto ds = generate_synthetic(7, 20);
  std::stringstream ss;
  write_tsv(ss, ds.sentences);
  const auto back = read_tsv(ss);
  ASSERT_EQ(back.size(), ds.sentences.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].tokens, ds.sentences[i].tokens);
    EXPECT_EQ(back[i].tags, ds.sentences[i].tags);
  }
}

TEST(Tsv, RejectsMalformedLines) {
  std::istringstream missing_tab("asthma B-DISEASE\n");
  EXPECT_THROW(read_tsv(missing_tab), std::runtime_error);
  std::istringstream bad_tag("asthma\tB-PERSON\n");
  EXPECT_THROW(read_tsv(bad_tag), std::runtime_error);
  std::istringstream crlf("asthma\tB-DISEASE\r\n\r\nlung\tB-ORGAN\n");
  EXPECT_EQ(read_tsv(crlf).size(), 2u);
}
