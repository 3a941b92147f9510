#pragma once

// Multinomial naive Bayes over per-user bag-of-words vectors, with stratified
// k-fold evaluation.

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "botweave/data_model.hpp"
#include "botweave/errors.hpp"
#include "botweave/rng.hpp"
#include "botweave/stopwords.hpp"

namespace botweave {

// ---------------------------------------------------------------------------
// Tokens

/// Lowercased alphabetic words and hashtags. Whitespace-separated pieces that
/// start with '@' are handles and are dropped whole; every other character
/// that is not a letter or '#' is removed, then stop words are dropped.
inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  const auto& stops = stop_words();
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    const std::size_t start = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (start == i || text[start] == '@') continue;
    std::string tok;
    for (std::size_t j = start; j < i; ++j) {
      const auto c = static_cast<unsigned char>(text[j]);
      if (std::isalpha(c))
        tok.push_back(static_cast<char>(std::tolower(c)));
      else if (c == '#')
        tok.push_back('#');
    }
    if (tok.empty() || tok == "#" || stops.contains(tok)) continue;
    out.push_back(std::move(tok));
  }
  return out;
}

using TokenCounts = std::unordered_map<std::string, std::uint64_t>;

/// Token counts over all of a user's tweets.
inline TokenCounts count_tokens(const UserRecord& u) {
  TokenCounts c;
  for (const Tweet& t : u.tweets)
    for (auto& tok : tokenize(t.text)) c[std::move(tok)] += 1;
  return c;
}

// ---------------------------------------------------------------------------
// Vocabulary

class Vocabulary {
 public:
  Vocabulary() = default;

  /// Tokens are stored in ascending order; duplicates merge their provenance.
  Vocabulary(std::vector<std::string> tokens, std::vector<std::uint8_t> sources) {
    std::vector<std::size_t> order(tokens.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return tokens[a] < tokens[b]; });
    for (std::size_t i : order) {
      const std::uint8_t src = i < sources.size() ? sources[i] : 0;
      if (!tokens_.empty() && tokens_.back() == tokens[i]) {
        sources_.back() |= src;
        continue;
      }
      tokens_.push_back(std::move(tokens[i]));
      sources_.push_back(src);
    }
    for (std::size_t i = 0; i < tokens_.size(); ++i) index_.emplace(tokens_[i], static_cast<std::uint32_t>(i));
  }

  static constexpr std::uint8_t kFromBot = 1;
  static constexpr std::uint8_t kFromReal = 2;

  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  std::uint8_t sources(std::size_t i) const { return sources_[i]; }
  std::optional<std::uint32_t> find(const std::string& tok) const {
    auto it = index_.find(tok);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }
  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.tokens_ == b.tokens_ && a.sources_ == b.sources_;
  }

 private:
  std::vector<std::string> tokens_;
  std::vector<std::uint8_t> sources_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

inline std::vector<std::string> top_tokens(std::span<const TokenCounts> docs, std::size_t k) {
  std::unordered_map<std::string, std::uint64_t> total;
  for (const TokenCounts& d : docs)
    for (const auto& [tok, n] : d) total[tok] += n;
  std::vector<std::pair<std::string, std::uint64_t>> v(total.begin(), total.end());
  std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (v.size() > k) v.resize(k);
  std::vector<std::string> out;
  out.reserve(v.size());
  for (auto& [tok, n] : v) out.push_back(std::move(tok));
  return out;
}

/// Union of each class's k most frequent tokens (ties broken lexicographically).
inline Vocabulary build_vocab(std::span<const TokenCounts> bot_docs, std::span<const TokenCounts> real_docs,
                              std::size_t bot_top_k, std::size_t real_top_k) {
  if (bot_docs.empty() || real_docs.empty()) throw ParamError("vocabulary needs documents from both classes");
  std::vector<std::string> tokens;
  std::vector<std::uint8_t> sources;
  for (auto& t : top_tokens(bot_docs, bot_top_k)) {
    tokens.push_back(std::move(t));
    sources.push_back(Vocabulary::kFromBot);
  }
  for (auto& t : top_tokens(real_docs, real_top_k)) {
    tokens.push_back(std::move(t));
    sources.push_back(Vocabulary::kFromReal);
  }
  return Vocabulary(std::move(tokens), std::move(sources));
}

/// Sparse (vocabulary index, count) pairs in ascending index order.
struct CountVector {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> entries;

  std::uint64_t total() const {
    std::uint64_t n = 0;
    for (const auto& [i, c] : entries) n += c;
    return n;
  }
  friend bool operator==(const CountVector&, const CountVector&) = default;
};

/// Drops tokens outside the vocabulary.
inline CountVector vectorize(const TokenCounts& counts, const Vocabulary& vocab) {
  CountVector v;
  for (const auto& [tok, n] : counts)
    if (auto i = vocab.find(tok); i && n > 0) v.entries.emplace_back(*i, static_cast<std::uint32_t>(n));
  std::sort(v.entries.begin(), v.entries.end());
  return v;
}

struct LabeledVector {
  CountVector x;
  Label y = Label::unknown;
};

// ---------------------------------------------------------------------------
// Model

struct Prediction {
  Label label = Label::real;
  double margin = 0.0;  // score_bot - score_real
  double score_bot = 0.0;
  double score_real = 0.0;
};

class NBModel {
 public:
  static constexpr std::size_t kBot = 0;
  static constexpr std::size_t kReal = 1;

  NBModel() = default;
  NBModel(Vocabulary vocab, double alpha, std::array<double, 2> log_prior, std::array<std::vector<double>, 2> loglik)
      : vocab_(std::move(vocab)), alpha_(alpha), log_prior_(log_prior), loglik_(std::move(loglik)) {
    if (loglik_[0].size() != vocab_.size() || loglik_[1].size() != vocab_.size())
      throw ParamError("likelihood table does not match vocabulary size");
  }

  /// Add-alpha smoothed multinomial fit; priors from class frequencies.
  static NBModel train(std::span<const LabeledVector> data, Vocabulary vocab, double alpha = 1.0) {
    if (!(alpha > 0)) throw ParamError("smoothing alpha must be positive");
    const std::size_t V = vocab.size();
    if (V == 0) throw ParamError("cannot train on an empty vocabulary");
    std::array<std::vector<double>, 2> counts{std::vector<double>(V, 0.0), std::vector<double>(V, 0.0)};
    std::array<double, 2> docs{0, 0}, totals{0, 0};
    for (const LabeledVector& lv : data) {
      if (lv.y != Label::bot && lv.y != Label::real) continue;
      const std::size_t c = lv.y == Label::bot ? kBot : kReal;
      docs[c] += 1;
      for (const auto& [i, n] : lv.x.entries) {
        if (i >= V) throw ParamError("count vector index outside vocabulary");
        counts[c][i] += n;
        totals[c] += n;
      }
    }
    if (docs[kBot] == 0 || docs[kReal] == 0) throw ParamError("training needs at least one example of each class");
    std::array<double, 2> prior;
    std::array<std::vector<double>, 2> ll;
    for (std::size_t c = 0; c < 2; ++c) {
      prior[c] = std::log(docs[c] / (docs[kBot] + docs[kReal]));
      const double denom = std::log(totals[c] + alpha * static_cast<double>(V));
      ll[c].resize(V);
      for (std::size_t i = 0; i < V; ++i) ll[c][i] = std::log(counts[c][i] + alpha) - denom;
    }
    return NBModel(std::move(vocab), alpha, prior, std::move(ll));
  }

  /// Ties go to "real".
  Prediction predict(const CountVector& x) const {
    Prediction p;
    p.score_bot = log_prior_[kBot];
    p.score_real = log_prior_[kReal];
    for (const auto& [i, n] : x.entries) {
      if (i >= vocab_.size()) continue;
      p.score_bot += n * loglik_[kBot][i];
      p.score_real += n * loglik_[kReal][i];
    }
    p.margin = p.score_bot - p.score_real;
    p.label = p.margin > 0 ? Label::bot : Label::real;
    return p;
  }

  Prediction predict(const UserRecord& u) const { return predict(vectorize(count_tokens(u), vocab_)); }

  const Vocabulary& vocab() const { return vocab_; }
  double alpha() const { return alpha_; }
  double log_prior(std::size_t c) const { return log_prior_[c]; }
  const std::vector<double>& loglik(std::size_t c) const { return loglik_[c]; }

  friend bool operator==(const NBModel&, const NBModel&) = default;

 private:
  Vocabulary vocab_;
  double alpha_ = 1.0;
  std::array<double, 2> log_prior_{0, 0};
  std::array<std::vector<double>, 2> loglik_;
};

inline constexpr std::string_view kModelHeader = "botweave-naive-bayes 1";

namespace detail {
inline std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
}  // namespace detail

/// Plain-text model: header, alpha, priors, vocabulary size, then one line per
/// token: token, provenance bits (1 bot, 2 real), bot and real log-likelihoods.
inline void write_model(std::ostream& out, const NBModel& m) {
  out << kModelHeader << '\n';
  out << "alpha\t" << detail::g17(m.alpha()) << '\n';
  out << "log_prior\t" << detail::g17(m.log_prior(NBModel::kBot)) << '\t' << detail::g17(m.log_prior(NBModel::kReal))
      << '\n';
  out << "vocab\t" << m.vocab().size() << '\n';
  for (std::size_t i = 0; i < m.vocab().size(); ++i)
    out << m.vocab().tokens()[i] << '\t' << int{m.vocab().sources(i)} << '\t'
        << detail::g17(m.loglik(NBModel::kBot)[i]) << '\t' << detail::g17(m.loglik(NBModel::kReal)[i]) << '\n';
}

inline NBModel read_model(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& why) -> DatasetError {
    return DatasetError("model:" + std::to_string(line_no) + ": " + why);
  };
  auto next = [&]() -> std::vector<std::string> {
    if (!std::getline(in, line)) throw fail("unexpected end of file");
    ++line_no;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string part;
    while (std::getline(ss, part, '\t')) f.push_back(part);
    return f;
  };
  auto num = [&](const std::string& s) {
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw fail("bad number '" + s + "'");
    }
  };
  if (!std::getline(in, line) || (++line_no, line != kModelHeader)) throw fail("missing model header");
  auto f = next();
  if (f.size() != 2 || f[0] != "alpha") throw fail("expected alpha");
  const double alpha = num(f[1]);
  f = next();
  if (f.size() != 3 || f[0] != "log_prior") throw fail("expected log_prior");
  const std::array<double, 2> prior{num(f[1]), num(f[2])};
  f = next();
  if (f.size() != 2 || f[0] != "vocab") throw fail("expected vocab size");
  const auto n = static_cast<std::size_t>(num(f[1]));
  std::vector<std::string> tokens;
  std::vector<std::uint8_t> sources;
  std::array<std::vector<double>, 2> ll;
  for (std::size_t i = 0; i < n; ++i) {
    f = next();
    if (f.size() != 4) throw fail("expected 4 tab-separated fields");
    if (!tokens.empty() && !(tokens.back() < f[0])) throw fail("vocabulary not in ascending order");
    tokens.push_back(f[0]);
    sources.push_back(static_cast<std::uint8_t>(num(f[1])));
    ll[0].push_back(num(f[2]));
    ll[1].push_back(num(f[3]));
  }
  return NBModel(Vocabulary(std::move(tokens), std::move(sources)), alpha, prior, std::move(ll));
}

// ---------------------------------------------------------------------------
// Evaluation

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f_measure = 0.0;
};

struct ConfusionMatrix {
  std::uint64_t bot_as_bot = 0;
  std::uint64_t bot_as_real = 0;
  std::uint64_t real_as_bot = 0;
  std::uint64_t real_as_real = 0;

  void add(Label actual, Label predicted) {
    if (actual == Label::bot) (predicted == Label::bot ? bot_as_bot : bot_as_real) += 1;
    if (actual == Label::real) (predicted == Label::bot ? real_as_bot : real_as_real) += 1;
  }
  ConfusionMatrix& operator+=(const ConfusionMatrix& o) {
    bot_as_bot += o.bot_as_bot;
    bot_as_real += o.bot_as_real;
    real_as_bot += o.real_as_bot;
    real_as_real += o.real_as_real;
    return *this;
  }
  std::uint64_t total() const { return bot_as_bot + bot_as_real + real_as_bot + real_as_real; }
  double accuracy() const {
    return total() ? static_cast<double>(bot_as_bot + real_as_real) / static_cast<double>(total()) : 0.0;
  }
  ClassMetrics metrics(Label cls) const {
    const bool bot = cls == Label::bot;
    const double tp = static_cast<double>(bot ? bot_as_bot : real_as_real);
    const double fp = static_cast<double>(bot ? real_as_bot : bot_as_real);
    const double fn = static_cast<double>(bot ? bot_as_real : real_as_bot);
    ClassMetrics m;
    m.precision = tp + fp > 0 ? tp / (tp + fp) : 0.0;
    m.recall = tp + fn > 0 ? tp / (tp + fn) : 0.0;
    m.f_measure = m.precision + m.recall > 0 ? 2 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
    return m;
  }
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

struct EvalReport {
  std::vector<ConfusionMatrix> folds;
  ConfusionMatrix pooled;
  bool balanced = false;
};

/// Stratified fold assignment: each class is shuffled and dealt round-robin.
inline std::vector<std::size_t> stratified_folds(std::span<const Label> labels, std::size_t k, Rng& rng) {
  std::vector<std::size_t> fold(labels.size(), 0);
  for (Label cls : {Label::bot, Label::real}) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == cls) idx.push_back(i);
    if (idx.size() < k)
      throw ParamError("class '" + std::string(to_string(cls)) + "' has " + std::to_string(idx.size()) +
                       " examples, fewer than k = " + std::to_string(k));
    std::shuffle(idx.begin(), idx.end(), rng);
    for (std::size_t j = 0; j < idx.size(); ++j) fold[idx[j]] = j % k;
  }
  return fold;
}

/// k-fold cross validation with a caller-supplied learner.
/// `fit(training_set)` returns a callable mapping a CountVector to a Label.
/// With `balanced`, bot examples in each training split are replicated to
/// roughly match the real class size; test splits are never altered.
template <class Fit>
EvalReport kfold_eval(std::span<const LabeledVector> data, std::size_t k, Rng& rng, Fit&& fit, bool balanced = false) {
  if (k < 2) throw ParamError("k must be at least 2");
  std::vector<Label> labels;
  labels.reserve(data.size());
  for (const auto& lv : data) labels.push_back(lv.y);
  const auto fold = stratified_folds(labels, k, rng);
  EvalReport rep;
  rep.balanced = balanced;
  for (std::size_t f = 0; f < k; ++f) {
    std::vector<LabeledVector> train;
    std::size_t n_bot = 0, n_real = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (fold[i] == f) continue;
      train.push_back(data[i]);
      (data[i].y == Label::bot ? n_bot : n_real) += 1;
    }
    if (balanced && n_bot > 0) {
      const auto copies = std::max<std::size_t>(
          1, static_cast<std::size_t>(std::llround(static_cast<double>(n_real) / static_cast<double>(n_bot))));
      const std::size_t base = train.size();
      for (std::size_t c = 1; c < copies; ++c)
        for (std::size_t i = 0; i < base; ++i)
          if (train[i].y == Label::bot) train.push_back(train[i]);
    }
    const auto predictor = fit(std::span<const LabeledVector>(train));
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < data.size(); ++i)
      if (fold[i] == f) cm.add(data[i].y, predictor(data[i].x));
    rep.pooled += cm;
    rep.folds.push_back(cm);
  }
  return rep;
}

/// k-fold cross validation of the naive Bayes learner over a fixed vocabulary.
inline EvalReport kfold_eval(std::span<const LabeledVector> data, const Vocabulary& vocab, std::size_t k, double alpha,
                             Rng& rng, bool balanced = false) {
  return kfold_eval(
      data, k, rng,
      [&](std::span<const LabeledVector> train) {
        auto model = std::make_shared<NBModel>(NBModel::train(train, vocab, alpha));
        return [model](const CountVector& x) { return model->predict(x).label; };
      },
      balanced);
}

namespace detail {
inline std::string f6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}
}  // namespace detail

/// Confusion matrix and per-class metrics laid out as a small table, followed
/// by per-fold rows.
inline std::string format_eval_report(const EvalReport& r) {
  std::ostringstream o;
  const ConfusionMatrix& m = r.pooled;
  o << "botweave evaluation report\n";
  o << "folds\t" << r.folds.size() << "\n";
  o << "balanced\t" << (r.balanced ? "true" : "false") << "\n\n";
  o << "confusion matrix\n";
  o << "actual\\predicted\tbot\treal\ttotal\n";
  o << "bot\t" << m.bot_as_bot << '\t' << m.bot_as_real << '\t' << m.bot_as_bot + m.bot_as_real << '\n';
  o << "real\t" << m.real_as_bot << '\t' << m.real_as_real << '\t' << m.real_as_bot + m.real_as_real << "\n\n";
  o << "class\tprecision\trecall\tf_measure\n";
  for (Label c : {Label::bot, Label::real}) {
    const auto cm = m.metrics(c);
    o << to_string(c) << '\t' << detail::f6(cm.precision) << '\t' << detail::f6(cm.recall) << '\t'
      << detail::f6(cm.f_measure) << '\n';
  }
  o << "accuracy\t" << detail::f6(m.accuracy()) << "\n\n";
  o << "fold\tbot_as_bot\tbot_as_real\treal_as_bot\treal_as_real\taccuracy\tbot_f\treal_f\n";
  for (std::size_t f = 0; f < r.folds.size(); ++f) {
    const auto& c = r.folds[f];
    o << f << '\t' << c.bot_as_bot << '\t' << c.bot_as_real << '\t' << c.real_as_bot << '\t' << c.real_as_real << '\t'
      << detail::f6(c.accuracy()) << '\t' << detail::f6(c.metrics(Label::bot).f_measure) << '\t'
      << detail::f6(c.metrics(Label::real).f_measure) << '\n';
  }
  return o.str();
}

/// Rows: actual class; columns: predicted class.
inline std::string format_confusion_csv(const ConfusionMatrix& m) {
  std::ostringstream o;
  o << "actual,predicted_bot,predicted_real,total\n";
  o << "bot," << m.bot_as_bot << ',' << m.bot_as_real << ',' << m.bot_as_bot + m.bot_as_real << '\n';
  o << "real," << m.real_as_bot << ',' << m.real_as_real << ',' << m.real_as_bot + m.real_as_real << '\n';
  return o.str();
}

}  // namespace botweave
