#pragma once

// Token classification on synthetic BIO-tagged medical-style text: a convex
// multinomial logistic model over hashed character n-gram features, trained
// with the CG solver or an adaptive-moment baseline, scored with token-level
// precision / recall / F1.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <istream>
#include <memory>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "hcg/linalg.hpp"
#include "hcg/objective.hpp"
#include "hcg/solver.hpp"

namespace hcg::ner {

enum class Tag : std::uint8_t { O, BDisease, IDisease, BOrgan, IOrgan, BSymptom, ISymptom, BDrug, IDrug };
inline constexpr std::size_t kNumTags = 9;
inline constexpr std::size_t kNumClasses = 4;

inline constexpr std::array<std::string_view, kNumTags> kTagNames{
    "O", "B-DISEASE", "I-DISEASE", "B-ORGAN", "I-ORGAN", "B-SYMPTOM", "I-SYMPTOM", "B-DRUG", "I-DRUG"};
inline constexpr std::array<std::string_view, kNumClasses> kClassNames{"DISEASE", "ORGAN", "SYMPTOM", "DRUG"};

inline std::string_view tag_name(Tag t) { return kTagNames[static_cast<std::size_t>(t)]; }

inline std::optional<Tag> parse_tag(std::string_view s) {
  for (std::size_t i = 0; i < kTagNames.size(); ++i)
    if (kTagNames[i] == s) return static_cast<Tag>(i);
  return std::nullopt;
}

/// Entity class index in [0, 4), or -1 for O.
inline int entity_class(Tag t) {
  const int v = static_cast<int>(t);
  return v == 0 ? -1 : (v - 1) / 2;
}

inline bool is_begin(Tag t) { return t != Tag::O && (static_cast<int>(t) - 1) % 2 == 0; }
inline Tag begin_tag(int cls) { return static_cast<Tag>(1 + 2 * cls); }
inline Tag inside_tag(int cls) { return static_cast<Tag>(2 + 2 * cls); }

struct Sentence {
  std::vector<std::string> tokens;
  std::vector<Tag> tags;
};

/// Every I- tag follows a B- or I- tag of the same class; tokens and tags align.
inline bool is_valid_bio(const Sentence& s) {
  if (s.tokens.size() != s.tags.size()) return false;
  for (std::size_t i = 0; i < s.tags.size(); ++i) {
    const Tag t = s.tags[i];
    if (t == Tag::O || is_begin(t)) continue;
    if (i == 0 || entity_class(s.tags[i - 1]) != entity_class(t)) return false;
  }
  return true;
}

struct TokenDataset {
  std::vector<Sentence> sentences;
  std::size_t train_size = 0;  // sentences [0, train_size) train, the rest test

  std::span<const Sentence> train() const { return {sentences.data(), train_size}; }
  std::span<const Sentence> test() const {
    return {sentences.data() + train_size, sentences.size() - train_size};
  }
};

namespace lexicon {

struct ClassLexicon {
  std::vector<std::string_view> heads;
  std::vector<std::string_view> tails;
};

inline const std::array<ClassLexicon, kNumClasses>& entities() {
  static const std::array<ClassLexicon, kNumClasses> lex{{
      {{"asthma", "bronchitis", "pneumonia", "eczema", "psoriasis", "angina", "arrhythmia", "tuberculosis",
        "dermatitis", "emphysema", "urticaria", "myocarditis"},
       {"syndrome", "disorder", "infection", "exacerbation", "relapse"}},
      {{"lung", "heart", "skin", "bronchus", "artery", "trachea", "ventricle", "alveoli", "epidermis", "aorta",
        "pleura", "atrium"},
       {"tissue", "wall", "lining", "valve", "lobe"}},
      {{"cough", "fever", "wheezing", "dyspnea", "rash", "itching", "fatigue", "palpitations", "chest", "edema",
        "cyanosis", "sputum"},
       {"pain", "tightness", "shortness", "swelling", "episodes"}},
      {{"salbutamol", "aspirin", "prednisone", "warfarin", "amoxicillin", "heparin", "digoxin", "hydrocortisone",
        "budesonide", "furosemide", "tacrolimus", "metoprolol"},
       {"tablet", "inhaler", "cream", "injection", "dose"}},
  }};
  return lex;
}

inline const std::vector<std::string_view>& fillers() {
  static const std::vector<std::string_view> words{
      "the",     "patient", "has",    "with",     "in",       "of",     "and",   "was",      "treated",
      "shows",   "severe",  "mild",   "a",        "due",      "to",     "after", "reported", "for",
      "signs",   "chronic", "acute",  "on",       "revealed", "is",     "by",    "from",     "history",
      "during",  "without", "causes", "affects",  "common",   "may",    "cases", "often",    "associated"};
  return words;
}

}  // namespace lexicon

namespace detail {

// Bounded draw that only depends on the raw engine output, so datasets are
// identical across standard library implementations.
inline std::size_t draw(std::mt19937_64& rng, std::size_t bound) { return static_cast<std::size_t>(rng() % bound); }
inline bool coin(std::mt19937_64& rng, unsigned percent) { return rng() % 100 < percent; }

}  // namespace detail

/// Deterministic per seed; ~80/20 train/test split.
inline TokenDataset generate_synthetic(std::uint64_t seed, std::size_t num_sentences) {
  if (num_sentences < 10) throw std::invalid_argument("generate_synthetic: need at least 10 sentences");
  std::mt19937_64 rng(seed);
  const auto& ents = lexicon::entities();
  const auto& fill = lexicon::fillers();

  TokenDataset ds;
  ds.sentences.reserve(num_sentences);
  for (std::size_t k = 0; k < num_sentences; ++k) {
    Sentence s;
    const std::size_t segments = 3 + detail::draw(rng, 5);
    bool has_entity = false;
    for (std::size_t seg = 0; seg < segments; ++seg) {
      const bool force = seg + 1 == segments && !has_entity;
      if (force || detail::coin(rng, 45)) {
        const int cls = static_cast<int>(detail::draw(rng, kNumClasses));
        const auto& lex = ents[static_cast<std::size_t>(cls)];
        s.tokens.emplace_back(lex.heads[detail::draw(rng, lex.heads.size())]);
        s.tags.push_back(begin_tag(cls));
        const std::size_t tails = detail::coin(rng, 40) ? 1 + detail::draw(rng, 2) : 0;
        for (std::size_t t = 0; t < tails; ++t) {
          s.tokens.emplace_back(lex.tails[detail::draw(rng, lex.tails.size())]);
          s.tags.push_back(inside_tag(cls));
        }
        has_entity = true;
      } else {
        const std::size_t words = 1 + detail::draw(rng, 3);
        for (std::size_t w = 0; w < words; ++w) {
          s.tokens.emplace_back(fill[detail::draw(rng, fill.size())]);
          s.tags.push_back(Tag::O);
        }
      }
    }
    ds.sentences.push_back(std::move(s));
  }
  ds.train_size = num_sentences - num_sentences / 5;
  return ds;
}

/// Token counts per tag over all sentences.
inline std::array<std::size_t, kNumTags> tag_histogram(std::span<const Sentence> sentences) {
  std::array<std::size_t, kNumTags> h{};
  for (const auto& s : sentences)
    for (Tag t : s.tags) ++h[static_cast<std::size_t>(t)];
  return h;
}

// --- features -------------------------------------------------------------

inline constexpr std::size_t kFeatureBits = 14;
inline constexpr std::size_t kNumFeatures = std::size_t{1} << kFeatureBits;

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

/// Hashed features for token i: bias, word identity, previous word, and
/// character 2/3-grams of the boundary-marked word.
inline std::vector<std::uint32_t> token_features(const Sentence& s, std::size_t i) {
  std::vector<std::uint32_t> out;
  auto add = [&](std::string_view prefix, std::string_view body) {
    std::string key(prefix);
    key += body;
    out.push_back(static_cast<std::uint32_t>(fnv1a(key) & (kNumFeatures - 1)));
  };
  add("bias", "");
  add("w:", s.tokens[i]);
  add("p:", i == 0 ? std::string_view("<s>") : std::string_view(s.tokens[i - 1]));
  const std::string marked = "^" + s.tokens[i] + "$";
  for (std::size_t n = 2; n <= 3; ++n)
    for (std::size_t j = 0; j + n <= marked.size(); ++j) add(n == 2 ? "c2:" : "c3:", std::string_view(marked).substr(j, n));
  return out;
}

struct FeaturizedTokens {
  std::vector<std::vector<std::uint32_t>> features;
  std::vector<Tag> gold;
};

inline FeaturizedTokens featurize(std::span<const Sentence> sentences) {
  FeaturizedTokens ft;
  for (const auto& s : sentences)
    for (std::size_t i = 0; i < s.tokens.size(); ++i) {
      ft.features.push_back(token_features(s, i));
      ft.gold.push_back(s.tags[i]);
    }
  return ft;
}

// --- model ------------------------------------------------------------------

/// Weights are tag-major: W[tag * kNumFeatures + feature].
struct LinearTagModel {
  Vector weights = Vector(kNumTags * kNumFeatures, 0.0);

  static constexpr std::size_t dimension() { return kNumTags * kNumFeatures; }

  std::array<double, kNumTags> scores(const std::vector<std::uint32_t>& feats) const {
    return scores(weights, feats);
  }

  static std::array<double, kNumTags> scores(std::span<const double> w, const std::vector<std::uint32_t>& feats) {
    std::array<double, kNumTags> z{};
    for (std::size_t t = 0; t < kNumTags; ++t) {
      const double* row = w.data() + t * kNumFeatures;
      double acc = 0.0;
      for (std::uint32_t f : feats) acc += row[f];
      z[t] = acc;
    }
    return z;
  }

  Tag predict(const std::vector<std::uint32_t>& feats) const {
    const auto z = scores(feats);
    std::size_t best = 0;
    for (std::size_t t = 1; t < kNumTags; ++t)
      if (z[t] > z[best]) best = t;
    return static_cast<Tag>(best);
  }
};

namespace detail {

inline double log_softmax_into(std::array<double, kNumTags>& z) {
  double m = z[0];
  for (double v : z) m = std::max(m, v);
  double s = 0.0;
  for (double& v : z) {
    v = std::exp(v - m);
    s += v;
  }
  for (double& v : z) v /= s;
  return m + std::log(s);
}

}  // namespace detail

/// Mean multinomial logistic loss + (l2/2)|W|^2.
inline double training_loss(std::span<const double> w, const FeaturizedTokens& data, double l2) {
  require_same_size(LinearTagModel::dimension(), w.size());
  if (data.gold.empty()) throw std::invalid_argument("training_loss: empty data");
  CompensatedSum loss;
  for (std::size_t k = 0; k < data.gold.size(); ++k) {
    auto z = LinearTagModel::scores(w, data.features[k]);
    const double gold_score = z[static_cast<std::size_t>(data.gold[k])];
    const double lse = detail::log_softmax_into(z);
    loss += lse - gold_score;
  }
  return loss.value() / static_cast<double>(data.gold.size()) + 0.5 * l2 * squared_norm(w);
}

inline void training_gradient(std::span<const double> w, const FeaturizedTokens& data, double l2,
                              std::span<double> grad) {
  require_same_size(LinearTagModel::dimension(), w.size());
  require_same_size(w.size(), grad.size());
  if (data.gold.empty()) throw std::invalid_argument("training_gradient: empty data");
  std::fill(grad.begin(), grad.end(), 0.0);
  const double inv_n = 1.0 / static_cast<double>(data.gold.size());
  for (std::size_t k = 0; k < data.gold.size(); ++k) {
    auto p = LinearTagModel::scores(w, data.features[k]);
    detail::log_softmax_into(p);
    p[static_cast<std::size_t>(data.gold[k])] -= 1.0;
    for (std::size_t t = 0; t < kNumTags; ++t) {
      double* row = grad.data() + t * kNumFeatures;
      const double c = p[t] * inv_n;
      for (std::uint32_t f : data.features[k]) row[f] += c;
    }
  }
  for (std::size_t i = 0; i < w.size(); ++i) grad[i] += l2 * w[i];
}

inline std::pair<double, Vector> loss_and_grad(const LinearTagModel& model, const FeaturizedTokens& data, double l2) {
  Vector g(model.weights.size());
  training_gradient(model.weights, data, l2, g);
  return {training_loss(model.weights, data, l2), std::move(g)};
}

/// The training objective as a solver problem, starting from W = 0.
inline Problem training_problem(std::shared_ptr<const FeaturizedTokens> data, double l2) {
  if (!(l2 >= 0.0)) throw std::invalid_argument("l2 must be nonnegative");
  return Problem(
      "ner_softmax", Vector(LinearTagModel::dimension(), 0.0),
      [data, l2](std::span<const double> w) { return training_loss(w, *data, l2); },
      [data, l2](std::span<const double> w, std::span<double> g) { training_gradient(w, *data, l2, g); });
}

struct TrainResult {
  LinearTagModel model;
  SolveResult solve;
  std::chrono::duration<double> wall_time{0.0};
};

inline TrainResult train(std::span<const Sentence> train_set, const SolverConfig& config, double l2 = 1e-4) {
  const auto t0 = std::chrono::steady_clock::now();
  auto data = std::make_shared<const FeaturizedTokens>(featurize(train_set));
  const Problem problem = training_problem(data, l2);
  TrainResult out;
  out.solve = solve_traced(problem, config);
  out.model.weights = out.solve.x_final;
  out.wall_time = std::chrono::steady_clock::now() - t0;
  return out;
}

/// f-evaluation count at which the traced loss first drops to `threshold`.
inline std::optional<std::size_t> f_evals_to_reach(const SolveResult& res, double threshold) {
  for (std::size_t k = 0; k < res.trace.size(); ++k)
    if (res.trace[k].f <= threshold) return k == 0 ? std::size_t{1} : res.trace[k - 1].f_evals;
  if (res.f_final <= threshold) return res.trace.empty() ? std::size_t{1} : res.trace.back().f_evals;
  return std::nullopt;
}

// --- adaptive-moment baseline ----------------------------------------------

struct AdamParams {
  int steps = 300;
  double lr = 0.05;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Full-batch adaptive-moment iteration with bias correction. Uncounted;
/// evaluates only gradients.
inline Vector adam_minimize(const Problem& problem, std::span<const double> x0, const AdamParams& p) {
  if (p.steps < 1) throw std::invalid_argument("adam: steps must be at least 1");
  require_same_size(problem.n, x0.size());
  Vector x(x0.begin(), x0.end());
  Vector g(problem.n), m(problem.n, 0.0), v(problem.n, 0.0);
  double b1t = 1.0, b2t = 1.0;
  for (int step = 1; step <= p.steps; ++step) {
    problem.g(x, g);
    b1t *= p.beta1;
    b2t *= p.beta2;
    for (std::size_t i = 0; i < x.size(); ++i) {
      m[i] = p.beta1 * m[i] + (1.0 - p.beta1) * g[i];
      v[i] = p.beta2 * v[i] + (1.0 - p.beta2) * g[i] * g[i];
      const double mhat = m[i] / (1.0 - b1t);
      const double vhat = v[i] / (1.0 - b2t);
      x[i] -= p.lr * mhat / (std::sqrt(vhat) + p.eps);
    }
  }
  return x;
}

struct AdamResult {
  LinearTagModel model;
  double final_loss = 0.0;
  std::chrono::duration<double> wall_time{0.0};
};

inline AdamResult baseline_adam(std::span<const Sentence> train_set, const AdamParams& params, double l2 = 1e-4) {
  const auto t0 = std::chrono::steady_clock::now();
  auto data = std::make_shared<const FeaturizedTokens>(featurize(train_set));
  const Problem problem = training_problem(data, l2);
  AdamResult out;
  out.model.weights = adam_minimize(problem, problem.x0, params);
  out.final_loss = training_loss(out.model.weights, *data, l2);
  out.wall_time = std::chrono::steady_clock::now() - t0;
  return out;
}

// --- metrics ----------------------------------------------------------------

struct ClassMetrics {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// P = TP/(TP+FP), R = TP/(TP+FN), F1 = 2PR/(P+R); zero denominators give 0.
inline ClassMetrics metrics_from_counts(std::size_t tp, std::size_t fp, std::size_t fn) {
  ClassMetrics m{tp, fp, fn, 0.0, 0.0, 0.0};
  const double dtp = static_cast<double>(tp);
  if (tp + fp > 0) m.precision = dtp / static_cast<double>(tp + fp);
  if (tp + fn > 0) m.recall = dtp / static_cast<double>(tp + fn);
  if (m.precision + m.recall > 0.0) m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
  return m;
}

struct NerMetrics {
  std::array<ClassMetrics, kNumClasses> per_class{};
  double macro_f1 = 0.0;
};

/// Token-level scoring with O excluded. A token counts as a true positive
/// for its gold class only when the predicted tag matches exactly; a wrong
/// prediction is a false positive for the predicted class and a false
/// negative for the gold class.
inline NerMetrics evaluate(const LinearTagModel& model, std::span<const Sentence> sentences) {
  std::array<std::size_t, kNumClasses> tp{}, fp{}, fn{};
  for (const auto& s : sentences)
    for (std::size_t i = 0; i < s.tokens.size(); ++i) {
      const Tag gold = s.tags[i];
      const Tag pred = model.predict(token_features(s, i));
      if (pred == gold) {
        if (gold != Tag::O) ++tp[static_cast<std::size_t>(entity_class(gold))];
        continue;
      }
      if (pred != Tag::O) ++fp[static_cast<std::size_t>(entity_class(pred))];
      if (gold != Tag::O) ++fn[static_cast<std::size_t>(entity_class(gold))];
    }
  NerMetrics out;
  double sum = 0.0;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    out.per_class[c] = metrics_from_counts(tp[c], fp[c], fn[c]);
    sum += out.per_class[c].f1;
  }
  out.macro_f1 = sum / static_cast<double>(kNumClasses);
  return out;
}

inline nlohmann::json to_json(const NerMetrics& m, std::optional<double> wall_time_seconds = std::nullopt) {
  nlohmann::json j = nlohmann::json::object();
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    const auto& cm = m.per_class[c];
    j[std::string(kClassNames[c])] = {{"tp", cm.tp},
                                      {"fp", cm.fp},
                                      {"fn", cm.fn},
                                      {"precision", cm.precision},
                                      {"recall", cm.recall},
                                      {"f1", cm.f1}};
  }
  j["macro_f1"] = m.macro_f1;
  if (wall_time_seconds) j["wall_time_seconds"] = *wall_time_seconds;
  return j;
}

// --- TSV I/O ------------------------------------------------------------------

/// One "token<TAB>tag" line per token, blank line between sentences.
inline void write_tsv(std::ostream& os, std::span<const Sentence> sentences) {
  for (const auto& s : sentences) {
    for (std::size_t i = 0; i < s.tokens.size(); ++i) os << s.tokens[i] << '\t' << tag_name(s.tags[i]) << '\n';
    os << '\n';
  }
}

inline std::vector<Sentence> read_tsv(std::istream& is) {
  std::vector<Sentence> out;
  Sentence cur;
  std::string line;
  std::size_t lineno = 0;
  auto flush = [&]() {
    if (!cur.tokens.empty()) out.push_back(std::move(cur));
    cur = Sentence{};
  };
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      flush();
      continue;
    }
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw std::runtime_error("tsv line " + std::to_string(lineno) + ": missing tab");
    const auto tag = parse_tag(std::string_view(line).substr(tab + 1));
    if (!tag) throw std::runtime_error("tsv line " + std::to_string(lineno) + ": unknown tag");
    cur.tokens.push_back(line.substr(0, tab));
    cur.tags.push_back(*tag);
  }
  flush();
  return out;
}

}  // namespace hcg::ner
