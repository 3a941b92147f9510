#pragma once

// End-to-end stages over an output directory. Each stage reads the artifacts
// of earlier stages from disk, so any stage can be rerun on its own.
//
//   generate  -> dataset/, reference/
//   sample    -> sample/sampled_ids.txt
//   geo-scan  -> geo/{grid,baseline}.csv, geo/regions.tsv, geo/seed_candidates.txt
//   filter    -> filter/{seed_bots.txt,seed_rejections.csv,candidates.txt,rejections.csv}
//   train     -> model/{nb_model.txt,training_set.csv}
//   eval      -> eval/{eval_report.txt,eval_report_balanced.txt,confusion_matrix.csv}
//   classify  -> classify/{predictions.csv,retrieved_bots.txt}
//   analyze   -> analyze/*.csv, analyze/summary.txt
//   report    -> report/
//
// Labels are dropped whenever detection stages load users; only `report`
// reads them, to score retrieval against ground truth.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "botweave/config.hpp"
#include "botweave/corpus.hpp"
#include "botweave/data_model.hpp"
#include "botweave/dataset_io.hpp"
#include "botweave/errors.hpp"
#include "botweave/geo.hpp"
#include "botweave/graph_analysis.hpp"
#include "botweave/naive_bayes.hpp"
#include "botweave/parallel.hpp"
#include "botweave/rule_filter.hpp"
#include "botweave/synth_gen.hpp"

namespace botweave {

namespace fs = std::filesystem;

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitStage = 4;

class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& cause, int exit_code)
      : std::runtime_error("stage '" + stage + "' failed: " + cause), stage_(std::move(stage)), exit_code_(exit_code) {}
  const std::string& stage() const { return stage_; }
  int exit_code() const { return exit_code_; }

 private:
  std::string stage_;
  int exit_code_;
};

struct ClassifierConfig {
  double alpha = 1.0;
  std::size_t k_folds = 10;
  std::size_t bot_top_k = 3000;
  std::size_t real_top_k = 5000;
  std::size_t max_train_real = 9000;
};

struct PipelineConfig {
  std::uint64_t seed = 42;
  unsigned threads = default_thread_count();
  fs::path out = "botweave-out";
  fs::path dataset;     // existing dataset; empty means generate into out/dataset
  fs::path reference;   // existing reals-only reference; empty means generate into out/reference
  fs::path bot_corpus = default_bot_corpus_path();
  fs::path real_corpora = default_real_corpus_dir();
  GenParams gen;
  std::size_t n_reference = 10000;
  double sample_p = 0.5;
  FilterRules rules;
  ClassifierConfig classifier;
  DetectOptions detect;
  std::size_t top_followed = 20;

  fs::path dataset_dir() const { return dataset.empty() ? out / "dataset" : dataset; }
  fs::path reference_dir() const { return reference.empty() ? out / "reference" : reference; }

  GenParams reference_params() const {
    GenParams p = gen;
    p.n_bots = 0;
    p.n_real = n_reference;
    p.seed = derive_seed(gen.seed, "reference");
    return p;
  }

  void validate() const {
    try {
      gen.validate();
      rules.validate();
    } catch (const ParamError& e) {
      throw ConfigError(e.what());
    }
    if (!(sample_p >= 0 && sample_p <= 1)) throw ConfigError("sample.p must lie in [0, 1]");
    if (!(classifier.alpha > 0)) throw ConfigError("classifier.alpha must be positive");
    if (classifier.k_folds < 2) throw ConfigError("classifier.k_folds must be at least 2");
    if (detect.band_lo > detect.band_hi) throw ConfigError("geo.band_lo exceeds geo.band_hi");
    if (!(detect.min_fill >= 0 && detect.min_fill <= 1)) throw ConfigError("geo.min_fill must lie in [0, 1]");
  }
};

namespace detail {

inline GeoRect rect_from(const std::vector<double>& v, const std::string& key) {
  if (v.size() != 4) throw ConfigError("config key '" + key + "': expected [lat_min, lat_max, lon_min, lon_max]");
  GeoRect r{v[0], v[1], v[2], v[3]};
  if (!r.valid()) throw ConfigError("config key '" + key + "': invalid rectangle");
  return r;
}

inline std::vector<double> rect_to(const GeoRect& r) { return {r.lat_min, r.lat_max, r.lon_min, r.lon_max}; }

inline Timestamp time_from(Config& c, const std::string& key, Timestamp fallback) {
  const std::string s = c.get_string(key, format_iso8601(fallback));
  try {
    return parse_iso8601(s);
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': expected an ISO-8601 timestamp, got '" + s + "'");
  }
}

}  // namespace detail

/// Reads every recognised key (file or environment) over the defaults and
/// rejects unknown file keys.
inline PipelineConfig pipeline_config_from(Config& c) {
  PipelineConfig p;
  p.seed = c.get_uint("seed", p.seed);
  p.gen.seed = p.seed;
  p.threads = static_cast<unsigned>(c.get_uint("threads", p.threads));

  p.out = c.get_string("paths.out", p.out.string());
  p.dataset = c.get_string("paths.dataset", "");
  p.reference = c.get_string("paths.reference", "");
  p.bot_corpus = c.get_string("paths.bot_corpus", p.bot_corpus.string());
  p.real_corpora = c.get_string("paths.real_corpora", p.real_corpora.string());

  GenParams& g = p.gen;
  g.n_bots = c.get_uint("generate.n_bots", g.n_bots);
  g.n_real = c.get_uint("generate.n_real", g.n_real);
  p.n_reference = c.get_uint("generate.n_reference", p.n_reference);
  g.id_lo = c.get_uint("generate.id_lo", g.id_lo);
  g.id_hi = c.get_uint("generate.id_hi", g.id_hi);
  g.date_lo = detail::time_from(c, "generate.date_lo", g.date_lo);
  g.date_hi = detail::time_from(c, "generate.date_hi", g.date_hi);
  g.bot_active_days = static_cast<std::uint32_t>(c.get_uint("generate.bot_active_days", g.bot_active_days));
  g.bot_tweets_min = static_cast<std::uint32_t>(c.get_uint("generate.bot_tweets_min", g.bot_tweets_min));
  g.bot_tweets_max = static_cast<std::uint32_t>(c.get_uint("generate.bot_tweets_max", g.bot_tweets_max));
  g.bot_text_min = c.get_uint("generate.bot_text_min", g.bot_text_min);
  g.bot_text_max = c.get_uint("generate.bot_text_max", g.bot_text_max);
  g.hashtag_prob = c.get_double("generate.hashtag_prob", g.hashtag_prob);
  g.followback_tags = c.get_strings("generate.followback_tags", g.followback_tags);
  g.geotag_prob_bot = c.get_double("generate.geotag_prob_bot", g.geotag_prob_bot);
  g.leakage = c.get_double("generate.leakage", g.leakage);
  g.bot_follower_cap = c.get_uint("generate.bot_follower_cap", g.bot_follower_cap);
  g.bot_friend_cap = c.get_uint("generate.bot_friend_cap", g.bot_friend_cap);
  g.bot_friends_mean = c.get_double("generate.bot_friends_mean", g.bot_friends_mean);
  g.intra_incoming_frac = c.get_double("generate.intra_incoming_frac", g.intra_incoming_frac);
  g.intra_outgoing_frac = c.get_double("generate.intra_outgoing_frac", g.intra_outgoing_frac);
  g.n_customers = c.get_uint("generate.n_customers", g.n_customers);
  g.customer_share_max = c.get_double("generate.customer_share_max", g.customer_share_max);
  g.customer_share_min = c.get_double("generate.customer_share_min", g.customer_share_min);
  g.real_english_frac = c.get_double("generate.real_english_frac", g.real_english_frac);
  g.real_tweets_mean = c.get_double("generate.real_tweets_mean", g.real_tweets_mean);
  g.real_tweets_sigma = c.get_double("generate.real_tweets_sigma", g.real_tweets_sigma);
  g.real_tweets_max = static_cast<std::uint32_t>(c.get_uint("generate.real_tweets_max", g.real_tweets_max));
  g.real_retweet_prob = c.get_double("generate.real_retweet_prob", g.real_retweet_prob);
  g.real_mention_prob = c.get_double("generate.real_mention_prob", g.real_mention_prob);
  g.real_hashtag_prob = c.get_double("generate.real_hashtag_prob", g.real_hashtag_prob);
  g.real_geotag_user_frac = c.get_double("generate.real_geotag_user_frac", g.real_geotag_user_frac);
  g.real_geotag_tweet_frac = c.get_double("generate.real_geotag_tweet_frac", g.real_geotag_tweet_frac);
  g.real_mobility_mean_km = c.get_double("generate.real_mobility_mean_km", g.real_mobility_mean_km);
  g.real_mobility_alpha = c.get_double("generate.real_mobility_alpha", g.real_mobility_alpha);
  g.real_mobility_user_alpha = c.get_double("generate.real_mobility_user_alpha", g.real_mobility_user_alpha);
  g.real_friend_real_frac = c.get_double("generate.real_friend_real_frac", g.real_friend_real_frac);
  g.collection_end = detail::time_from(c, "generate.collection_end", g.collection_end);

  p.sample_p = c.get_double("sample.p", p.sample_p);

  FilterRules& r = p.rules;
  r.max_tweets = c.get_uint("filter.max_tweets", r.max_tweets);
  r.max_followers = c.get_uint("filter.max_followers", r.max_followers);
  r.max_friends = c.get_uint("filter.max_friends", r.max_friends);
  const std::string src = c.get_string("filter.required_source", std::string(to_string(r.required_source)));
  if (auto s = parse_source(src))
    r.required_source = *s;
  else
    throw ConfigError("config key 'filter.required_source': unknown source '" + src + "'");
  r.id_range.lo = c.get_uint("filter.id_lo", r.id_range.lo);
  r.id_range.hi = c.get_uint("filter.id_hi", r.id_range.hi);
  r.language = c.get_string("filter.language", r.language);
  r.forbid_retweets = c.get_bool("filter.forbid_retweets", r.forbid_retweets);
  r.forbid_mentions = c.get_bool("filter.forbid_mentions", r.forbid_mentions);

  ClassifierConfig& k = p.classifier;
  k.alpha = c.get_double("classifier.alpha", k.alpha);
  k.k_folds = c.get_uint("classifier.k_folds", k.k_folds);
  k.bot_top_k = c.get_uint("classifier.bot_top_k", k.bot_top_k);
  k.real_top_k = c.get_uint("classifier.real_top_k", k.real_top_k);
  k.max_train_real = c.get_uint("classifier.max_train_real", k.max_train_real);

  g.rects.first = detail::rect_from(c.get_doubles("geo.rect_a", detail::rect_to(g.rects.first)), "geo.rect_a");
  g.rects.second = detail::rect_from(c.get_doubles("geo.rect_b", detail::rect_to(g.rects.second)), "geo.rect_b");
  p.detect.band_lo = c.get_uint("geo.band_lo", p.detect.band_lo);
  p.detect.band_hi = c.get_uint("geo.band_hi", p.detect.band_hi);
  p.detect.min_cells = c.get_uint("geo.min_cells", p.detect.min_cells);
  p.detect.min_fill = c.get_double("geo.min_fill", p.detect.min_fill);
  p.detect.baseline_rel_threshold = c.get_double("geo.baseline_rel_threshold", p.detect.baseline_rel_threshold);
  p.top_followed = c.get_uint("analyze.top_followed", p.top_followed);

  c.reject_unknown();
  p.validate();
  return p;
}

// ---------------------------------------------------------------------------
// Artifact helpers

namespace detail {

inline void write_file(const fs::path& file, const std::string& content) {
  std::error_code ec;
  fs::create_directories(file.parent_path(), ec);
  if (ec) throw IoError("cannot create directory " + file.parent_path().string() + ": " + ec.message());
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + file.string() + " for writing");
  out << content;
  out.close();
  if (!out) throw IoError("failed writing " + file.string());
}

inline std::string read_file(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw IoError("cannot read " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string ids_text(const std::vector<UserId>& ids) {
  std::string s;
  for (UserId id : ids) s += std::to_string(id) + '\n';
  return s;
}

inline std::vector<UserId> parse_ids(const std::string& text, const fs::path& file) {
  std::vector<UserId> ids;
  std::istringstream in(text);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      std::size_t used = 0;
      ids.push_back(std::stoull(line, &used));
      if (used != line.size()) throw std::invalid_argument(line);
    } catch (const std::exception&) {
      throw DatasetError(file.string() + ":" + std::to_string(n) + ": expected a user id");
    }
  }
  return ids;
}

inline std::string fmt(double v, int precision = 6) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  return buf;
}

inline std::string fmt_g(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline std::string grid_csv(const GeoGrid& g) {
  std::string s = "lat_cell,lon_cell,count\n";
  for (const auto& [k, n] : g.cells()) s += std::to_string(k.lat) + ',' + std::to_string(k.lon) + ',' + std::to_string(n) + '\n';
  return s;
}

}  // namespace detail

struct RetrievalScore {
  std::uint64_t labeled_bots = 0;
  std::uint64_t retrieved = 0;
  std::uint64_t true_positives = 0;
  double precision() const {
    return retrieved ? static_cast<double>(true_positives) / static_cast<double>(retrieved) : 1.0;
  }
  double recall() const {
    return labeled_bots ? static_cast<double>(true_positives) / static_cast<double>(labeled_bots) : 1.0;
  }
};

inline RetrievalScore evaluate_retrieval(std::span<const UserRecord> labeled, const std::vector<UserId>& retrieved) {
  RetrievalScore s;
  const std::unordered_set<UserId> got(retrieved.begin(), retrieved.end());
  s.retrieved = got.size();
  for (const UserRecord& u : labeled) {
    const bool bot = u.label == Label::bot;
    s.labeled_bots += bot;
    s.true_positives += bot && got.contains(u.id);
  }
  return s;
}

// ---------------------------------------------------------------------------

class Pipeline {
 public:
  explicit Pipeline(PipelineConfig cfg, std::ostream* log = &std::cerr) : cfg_(std::move(cfg)), log_(log) {}

  const PipelineConfig& config() const { return cfg_; }
  fs::path path(const std::string& rel) const { return cfg_.out / rel; }

  static const std::vector<std::string>& stage_names() {
    static const std::vector<std::string> names{"generate", "sample",   "geo-scan", "filter", "train",
                                                "eval",     "classify", "analyze",  "report"};
    return names;
  }

  /// Runs one named stage, mapping failures onto StageError.
  void run_stage(const std::string& name) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
      if (name == "generate") generate();
      else if (name == "sample") sample();
      else if (name == "geo-scan") geo_scan();
      else if (name == "filter") filter();
      else if (name == "train") train();
      else if (name == "eval") eval();
      else if (name == "classify") classify();
      else if (name == "analyze") analyze();
      else if (name == "report") report();
      else throw ConfigError("unknown stage '" + name + "'");
    } catch (const StageError&) {
      throw;
    } catch (const ConfigError& e) {
      throw StageError(name, e.what(), kExitConfig);
    } catch (const DatasetError& e) {
      throw StageError(name, e.what(), kExitData);
    } catch (const IoError& e) {
      throw StageError(name, e.what(), kExitData);
    } catch (const std::exception& e) {
      throw StageError(name, e.what(), kExitStage);
    }
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0);
    log("[" + name + "] done in " + std::to_string(ms.count()) + " ms");
  }

  void run_all() {
    for (const auto& s : stage_names()) run_stage(s);
  }

  // ---- Stages.

  void generate() {
    if (!cfg_.dataset.empty()) {
      log("[generate] using existing dataset " + cfg_.dataset.string());
    } else {
      const auto bot = load_corpus(cfg_.bot_corpus);
      const auto reals = load_corpus_dir(cfg_.real_corpora);
      Dataset ds = generate_dataset(cfg_.gen, bot, reals);
      save_dataset(ds, cfg_.dataset_dir());
      log("[generate] " + std::to_string(ds.users.size()) + " users, " + std::to_string(ds.graph.edges.size()) +
          " edges");
      dataset_.reset();
    }
    if (cfg_.reference.empty() && cfg_.n_reference > 0) {
      const auto bot = load_corpus(cfg_.bot_corpus);
      const auto reals = load_corpus_dir(cfg_.real_corpora);
      Dataset ref = generate_dataset(cfg_.reference_params(), bot, reals);
      save_dataset(ref, cfg_.reference_dir());
      reference_.reset();
      reference_loaded_ = false;
    }
  }

  void sample() {
    const Dataset& ds = dataset();
    const auto ids = sample_uniform(ds.users, cfg_.sample_p, cfg_.seed);
    detail::write_file(path("sample/sampled_ids.txt"), detail::ids_text(ids));
    log("[sample] " + std::to_string(ids.size()) + " of " + std::to_string(ds.users.size()) + " users");
  }

  void geo_scan() {
    const Dataset& ds = dataset();
    const auto sampled = read_ids("sample/sampled_ids.txt", "sample");
    const auto users = pick(ds, sampled);
    GeoGrid grid;
    for (const UserRecord* u : users)
      for (const Tweet& t : u->tweets)
        if (t.geo) grid.add(*t.geo);
    const Dataset* ref = reference();
    std::optional<GeoGrid> baseline;
    if (ref) baseline = bin_tweets(ref->users);
    const auto regions = detect_rectangles(grid, baseline ? &*baseline : nullptr, cfg_.detect);

    std::set<CellKey> region_cells;
    std::string rtxt = "lat_min\tlat_max\tlon_min\tlon_max\tn_cells\tfill_ratio\tmean_count\n";
    for (const auto& r : regions) {
      region_cells.insert(r.cells.begin(), r.cells.end());
      rtxt += detail::fmt_g(r.bounds.lat_min) + '\t' + detail::fmt_g(r.bounds.lat_max) + '\t' +
              detail::fmt_g(r.bounds.lon_min) + '\t' + detail::fmt_g(r.bounds.lon_max) + '\t' +
              std::to_string(r.n_cells) + '\t' + detail::fmt(r.fill_ratio) + '\t' + detail::fmt(r.mean_count) + '\n';
    }
    std::vector<UserId> seeds;
    for (const UserRecord* u : users)
      for (const Tweet& t : u->tweets)
        if (t.geo && region_cells.contains(cell_of(*t.geo))) {
          seeds.push_back(u->id);
          break;
        }
    detail::write_file(path("geo/grid.csv"), detail::grid_csv(grid));
    detail::write_file(path("geo/baseline.csv"), detail::grid_csv(baseline ? *baseline : GeoGrid{}));
    detail::write_file(path("geo/regions.tsv"), rtxt);
    detail::write_file(path("geo/seed_candidates.txt"), detail::ids_text(seeds));
    log("[geo-scan] " + std::to_string(regions.size()) + " regions, " + std::to_string(seeds.size()) +
        " seed candidates");
  }

  void filter() {
    const Dataset& ds = dataset();
    const auto seed_ids = read_ids("geo/seed_candidates.txt", "geo-scan");
    const auto seed_users = copy_users(ds, seed_ids);
    const auto seeds = apply_rules(seed_users, cfg_.rules);
    detail::write_file(path("filter/seed_bots.txt"), detail::ids_text(seeds.candidates));
    detail::write_file(path("filter/seed_rejections.csv"), rejections_csv(seeds.rejected));

    const auto scanned = copy_users(ds, id_range_scan(ds.users, cfg_.rules));
    const auto cands = apply_rules(scanned, cfg_.rules);
    detail::write_file(path("filter/candidates.txt"), detail::ids_text(cands.candidates));
    detail::write_file(path("filter/rejections.csv"), rejections_csv(cands.rejected));
    log("[filter] " + std::to_string(seeds.candidates.size()) + " seed bots, " + std::to_string(scanned.size()) +
        " scanned, " + std::to_string(cands.candidates.size()) + " candidates");
  }

  void train() {
    const TrainingSet ts = training_set();
    std::string csv = "user_id,label,origin\n";
    for (std::size_t i = 0; i < ts.ids.size(); ++i)
      csv += std::to_string(ts.ids[i]) + ',' + std::string(to_string(ts.data[i].y)) + ',' + ts.origin[i] + '\n';
    detail::write_file(path("model/training_set.csv"), csv);
    std::ostringstream model;
    if (ts.n_bot == 0 || ts.n_real == 0) {
      // Degenerate model: no bot examples, so everything is predicted real.
      write_model(model, NBModel(Vocabulary{}, cfg_.classifier.alpha,
                                 {-std::numeric_limits<double>::infinity(), 0.0}, {}));
      log("[train] no examples for one class; wrote a model that predicts real for every user");
    } else {
      write_model(model, NBModel::train(ts.data, ts.vocab, cfg_.classifier.alpha));
      log("[train] " + std::to_string(ts.n_bot) + " bots, " + std::to_string(ts.n_real) + " reals, vocabulary " +
          std::to_string(ts.vocab.size()));
    }
    detail::write_file(path("model/nb_model.txt"), model.str());
  }

  void eval() {
    require("model/training_set.csv", "train");
    const TrainingSet ts = training_set();
    const std::size_t k = cfg_.classifier.k_folds;
    if (ts.n_bot < k || ts.n_real < k) {
      const std::string note = "evaluation skipped: need at least " + std::to_string(k) +
                               " examples per class, have " + std::to_string(ts.n_bot) + " bots and " +
                               std::to_string(ts.n_real) + " reals\n";
      detail::write_file(path("eval/eval_report.txt"), note);
      detail::write_file(path("eval/eval_report_balanced.txt"), note);
      detail::write_file(path("eval/confusion_matrix.csv"), format_confusion_csv({}));
      log("[eval] skipped");
      return;
    }
    Rng rng = make_rng(cfg_.seed, "kfold");
    const auto rep = kfold_eval(ts.data, ts.vocab, k, cfg_.classifier.alpha, rng, false);
    Rng rng_b = make_rng(cfg_.seed, "kfold");
    const auto bal = kfold_eval(ts.data, ts.vocab, k, cfg_.classifier.alpha, rng_b, true);
    detail::write_file(path("eval/eval_report.txt"), format_eval_report(rep));
    detail::write_file(path("eval/eval_report_balanced.txt"), format_eval_report(bal));
    detail::write_file(path("eval/confusion_matrix.csv"), format_confusion_csv(rep.pooled));
    log("[eval] accuracy " + detail::fmt(rep.pooled.accuracy()) + ", balanced " +
        detail::fmt(bal.pooled.accuracy()));
  }

  void classify() {
    const Dataset& ds = dataset();
    const auto cand = read_ids("filter/candidates.txt", "filter");
    require("model/nb_model.txt", "train");
    std::istringstream min(detail::read_file(path("model/nb_model.txt")));
    const NBModel model = read_model(min);
    const auto users = pick(ds, cand);
    std::vector<Prediction> preds(users.size());
    parallel_for(users.size(), cfg_.threads, [&](std::size_t i) { preds[i] = model.predict(*users[i]); });
    std::string csv = "user_id,predicted_label,margin\n";
    std::vector<UserId> bots;
    for (std::size_t i = 0; i < users.size(); ++i) {
      csv += std::to_string(users[i]->id) + ',' + std::string(to_string(preds[i].label)) + ',' +
             detail::fmt_g(preds[i].margin) + '\n';
      if (preds[i].label == Label::bot) bots.push_back(users[i]->id);
    }
    detail::write_file(path("classify/predictions.csv"), csv);
    detail::write_file(path("classify/retrieved_bots.txt"), detail::ids_text(bots));
    log("[classify] retrieved " + std::to_string(bots.size()) + " bots from " + std::to_string(users.size()) +
        " candidates");
  }

  void analyze() {
    const Dataset& ds = dataset();
    const auto bots = read_ids("classify/retrieved_bots.txt", "classify");
    const IdSet botnet(bots.begin(), bots.end());

    const auto lc = link_composition(ds.graph, botnet);
    std::string lcsv = "metric,value\n";
    lcsv += "incoming_total," + std::to_string(lc.incoming_total) + '\n';
    lcsv += "incoming_from_botnet," + std::to_string(lc.incoming_from_botnet) + '\n';
    lcsv += "incoming_fraction," + detail::fmt(lc.incoming_fraction()) + '\n';
    lcsv += "outgoing_total," + std::to_string(lc.outgoing_total) + '\n';
    lcsv += "outgoing_to_botnet," + std::to_string(lc.outgoing_to_botnet) + '\n';
    lcsv += "outgoing_fraction," + detail::fmt(lc.outgoing_fraction()) + '\n';
    lcsv += "distinct_followers," + std::to_string(lc.distinct_followers) + '\n';
    lcsv += "distinct_friends," + std::to_string(lc.distinct_friends) + '\n';
    detail::write_file(path("analyze/link_composition.csv"), lcsv);

    std::vector<UserId> others;
    for (const UserRecord& u : ds.users)
      if (!botnet.contains(u.id)) others.push_back(u.id);
    const auto hb = degree_distributions(ds.graph, bots);
    const auto hr = degree_distributions(ds.graph, others);
    std::string dcsv = "population,direction,degree,count\n";
    auto dump = [&](const char* pop, const char* dir, const std::map<std::uint64_t, std::uint64_t>& h) {
      for (const auto& [d, n] : h) dcsv += std::string(pop) + ',' + dir + ',' + std::to_string(d) + ',' + std::to_string(n) + '\n';
    };
    dump("bot", "in", hb.in);
    dump("bot", "out", hb.out);
    dump("real", "in", hr.in);
    dump("real", "out", hr.out);
    detail::write_file(path("analyze/degree_hist.csv"), dcsv);

    std::string tcsv = "rank,user_id,bot_followers\n";
    const auto top = top_external_followed(ds.graph, botnet, cfg_.top_followed);
    for (std::size_t i = 0; i < top.size(); ++i)
      tcsv += std::to_string(i + 1) + ',' + std::to_string(top[i].id) + ',' + std::to_string(top[i].bot_followers) + '\n';
    detail::write_file(path("analyze/top_followed.csv"), tcsv);

    const auto dist = consecutive_distance_stats(
        ds.users, [&](const UserRecord& u) { return botnet.contains(u.id) ? Label::bot : Label::real; });
    std::string hcsv = "bin_lo_km,bin_hi_km,bots,reals\n";
    for (std::size_t i = 0; i < dist.bots.counts.size(); ++i) {
      const bool last = i + 1 == dist.bots.counts.size();
      hcsv += detail::fmt_g(dist.bots.edges[i]) + ',' + (last ? std::string("inf") : detail::fmt_g(dist.bots.edges[i + 1])) +
              ',' + std::to_string(dist.bots.counts[i]) + ',' + std::to_string(dist.reals.counts[i]) + '\n';
    }
    detail::write_file(path("analyze/distance_hist.csv"), hcsv);

    std::vector<UserRecord> bot_users = copy_users(ds, bots);
    std::vector<UserRecord> real_users;
    for (const UserRecord& u : ds.users)
      if (!botnet.contains(u.id)) real_users.push_back(u);
    const GeoGrid bot_grid = bin_tweets(bot_users);
    const GeoGrid real_grid = bin_tweets(real_users);
    std::ostringstream geo;
    const auto split = rect_split_stats(bot_users, cfg_.gen.rects);
    std::uint64_t bot_tweets = 0;
    for (const auto& u : bot_users) bot_tweets += u.tweets.size();
    geo << "bot_tweets\t" << bot_tweets << "\n";
    geo << "bot_geotagged\t" << split.total() << "\n";
    geo << "bot_geotagged_fraction\t" << detail::fmt(bot_tweets ? double(split.total()) / double(bot_tweets) : 0.0) << "\n";
    geo << "bot_geotags_rect_a\t" << split.in_a << "\n";
    geo << "bot_geotags_rect_b\t" << split.in_b << "\n";
    geo << "bot_geotags_elsewhere\t" << split.elsewhere << "\n";
    auto uniformity = [&](const char* pop, const GeoGrid& g, const GeoRect& r, const char* rect) {
      geo << "uniformity_" << pop << "_" << rect << "\t";
      try {
        const auto u = uniformity_test(g, r);
        geo << "chi2=" << detail::fmt(u.statistic, 3) << " dof=" << u.dof << " p=" << detail::fmt_g(u.p_value)
            << " cells=" << u.cells << " tweets=" << u.tweets << "\n";
      } catch (const PreconditionError& e) {
        geo << "not applicable: " << e.what() << "\n";
      }
    };
    uniformity("bot", bot_grid, cfg_.gen.rects.first, "a");
    uniformity("bot", bot_grid, cfg_.gen.rects.second, "b");
    uniformity("real", real_grid, cfg_.gen.rects.first, "a");
    uniformity("real", real_grid, cfg_.gen.rects.second, "b");
    const auto bm = dist.means(Label::bot);
    const auto rm = dist.means(Label::real);
    geo << "bot_mean_consecutive_km\t" << detail::fmt(mean(bm), 3) << "\tusers=" << bm.size() << "\n";
    geo << "real_mean_consecutive_km\t" << detail::fmt(mean(rm), 3) << "\tusers=" << rm.size() << "\n";
    detail::write_file(path("analyze/geo_summary.txt"), geo.str());

    std::ostringstream s;
    s << "botnet_size\t" << bots.size() << "\n";
    s << "incoming_links\t" << lc.incoming_total << " (" << lc.incoming_from_botnet << " from botnet, "
      << detail::fmt(100 * lc.incoming_fraction(), 2) << "%)\n";
    s << "outgoing_links\t" << lc.outgoing_total << " (" << lc.outgoing_to_botnet << " to botnet, "
      << detail::fmt(100 * lc.outgoing_fraction(), 2) << "%)\n";
    s << "distinct_followers\t" << lc.distinct_followers << "\n";
    s << "distinct_friends\t" << lc.distinct_friends << "\n";
    s << "bot_max_in_degree\t" << hb.max_in() << "\n";
    s << "bot_max_out_degree\t" << hb.max_out() << "\n";
    s << "real_max_in_degree\t" << hr.max_in() << "\n";
    s << "real_max_out_degree\t" << hr.max_out() << "\n";
    s << geo.str();
    detail::write_file(path("analyze/summary.txt"), s.str());
    log("[analyze] botnet " + std::to_string(bots.size()) + ", incoming fraction " +
        detail::fmt(lc.incoming_fraction(), 4) + ", outgoing fraction " + detail::fmt(lc.outgoing_fraction(), 4));
  }

  static const std::vector<std::pair<std::string, std::string>>& report_sources() {
    static const std::vector<std::pair<std::string, std::string>> files{
        {"geo/grid.csv", "geo-scan"},
        {"analyze/distance_hist.csv", "analyze"},
        {"analyze/degree_hist.csv", "analyze"},
        {"eval/confusion_matrix.csv", "eval"},
        {"analyze/link_composition.csv", "analyze"},
        {"analyze/top_followed.csv", "analyze"}};
    return files;
  }

  void report() {
    for (const auto& [rel, stage] : report_sources()) require(rel, stage);
    require("eval/eval_report.txt", "eval");
    require("analyze/summary.txt", "analyze");
    for (const auto& [rel, stage] : report_sources())
      detail::write_file(path("report") / fs::path(rel).filename(), detail::read_file(path(rel)));
    std::string summary = "== classifier ==\n" + detail::read_file(path("eval/eval_report.txt")) +
                          "\n== botnet ==\n" + detail::read_file(path("analyze/summary.txt"));

    // Ground truth, when the dataset carries it.
    const Dataset labeled = load_dataset(cfg_.dataset_dir(), LoadOptions{.keep_labels = true});
    const bool has_labels = std::any_of(labeled.users.begin(), labeled.users.end(),
                                        [](const UserRecord& u) { return u.label.has_value(); });
    if (has_labels) {
      require("classify/retrieved_bots.txt", "classify");
      const auto retrieved = read_ids("classify/retrieved_bots.txt", "classify");
      const auto score = evaluate_retrieval(labeled.users, retrieved);
      const auto rule_pass = apply_rules(labeled.users, cfg_.rules);
      const std::unordered_set<UserId> passed(rule_pass.candidates.begin(), rule_pass.candidates.end());
      std::uint64_t bots = 0, bots_pass = 0, reals = 0, reals_pass = 0;
      for (const UserRecord& u : labeled.users) {
        if (u.label == Label::bot) {
          ++bots;
          bots_pass += passed.contains(u.id);
        } else if (u.label == Label::real) {
          ++reals;
          reals_pass += passed.contains(u.id);
        }
      }
      std::ostringstream r;
      r << "labeled_bots\t" << score.labeled_bots << "\n";
      r << "retrieved\t" << score.retrieved << "\n";
      r << "true_positives\t" << score.true_positives << "\n";
      r << "precision\t" << detail::fmt(score.precision()) << "\n";
      r << "recall\t" << detail::fmt(score.recall()) << "\n";
      r << "rule_recall_on_bots\t" << detail::fmt(bots ? double(bots_pass) / double(bots) : 1.0) << "\n";
      r << "rule_pass_rate_on_reals\t" << detail::fmt(reals ? double(reals_pass) / double(reals) : 0.0) << "\n";
      detail::write_file(path("report/retrieval.txt"), r.str());
      summary += "\n== retrieval vs labels ==\n" + r.str();
    }
    detail::write_file(path("report/summary.txt"), summary);
  }

 private:
  struct TrainingSet {
    std::vector<UserId> ids;
    std::vector<std::string> origin;
    std::vector<LabeledVector> data;
    Vocabulary vocab;
    std::size_t n_bot = 0;
    std::size_t n_real = 0;
  };

  void log(const std::string& msg) const {
    if (log_) *log_ << msg << std::endl;
  }

  void require(const std::string& rel, const std::string& stage) const {
    if (!fs::exists(path(rel)))
      throw StageError(stage, "missing artifact " + path(rel).string() + "; rerun stage '" + stage + "'",
                       kExitStage);
  }

  std::vector<UserId> read_ids(const std::string& rel, const std::string& stage) const {
    require(rel, stage);
    return detail::parse_ids(detail::read_file(path(rel)), path(rel));
  }

  const Dataset& dataset() {
    if (!dataset_) {
      if (!fs::exists(cfg_.dataset_dir() / kUsersFile))
        throw StageError("generate", "missing dataset " + cfg_.dataset_dir().string() + "; rerun stage 'generate'",
                         kExitStage);
      dataset_ = load_dataset(cfg_.dataset_dir(), LoadOptions{.keep_labels = false});
    }
    return *dataset_;
  }

  const Dataset* reference() {
    if (!reference_loaded_) {
      reference_loaded_ = true;
      if (fs::exists(cfg_.reference_dir() / kUsersFile))
        reference_ = load_dataset(cfg_.reference_dir(), LoadOptions{.keep_labels = false});
    }
    return reference_ ? &*reference_ : nullptr;
  }

  Dataset generate_dataset(const GenParams& p, const QuoteCorpus& bot, const std::vector<QuoteCorpus>& reals) const {
    try {
      return botweave::generate(p, bot, reals, cfg_.threads);
    } catch (const ParamError& e) {
      throw ConfigError(e.what());
    }
  }

  static std::vector<const UserRecord*> pick(const Dataset& ds, const std::vector<UserId>& ids) {
    std::vector<const UserRecord*> out;
    out.reserve(ids.size());
    for (UserId id : ids) {
      auto it = std::lower_bound(ds.users.begin(), ds.users.end(), id,
                                 [](const UserRecord& u, UserId v) { return u.id < v; });
      if (it == ds.users.end() || it->id != id)
        throw DatasetError("artifact lists user " + std::to_string(id) + " which is not in the dataset");
      out.push_back(&*it);
    }
    return out;
  }

  static std::vector<UserRecord> copy_users(const Dataset& ds, const std::vector<UserId>& ids) {
    std::vector<UserRecord> out;
    for (const UserRecord* u : pick(ds, ids)) out.push_back(*u);
    return out;
  }

  static std::string rejections_csv(const std::vector<Rejection>& rej) {
    std::string s = "user_id,rule\n";
    for (const auto& r : rej) s += std::to_string(r.id) + ',' + std::string(to_string(r.rule)) + '\n';
    return s;
  }

  /// Seed bots against ordinary English accounts: the reals-only reference
  /// population when present, otherwise sampled users that fail the rules.
  TrainingSet training_set() {
    const Dataset& ds = dataset();
    TrainingSet ts;
    const auto seed_ids = read_ids("filter/seed_bots.txt", "filter");
    std::vector<const UserRecord*> bots = pick(ds, seed_ids);

    std::vector<const UserRecord*> pool;
    std::string origin;
    if (const Dataset* ref = reference()) {
      origin = "reference";
      for (const UserRecord& u : ref->users)
        if (u.language == cfg_.rules.language && !u.tweets.empty()) pool.push_back(&u);
    } else {
      origin = "sample";
      const auto sampled = read_ids("sample/sampled_ids.txt", "sample");
      for (const UserRecord* u : pick(ds, sampled))
        if (u->language == cfg_.rules.language && !u->tweets.empty() && first_failed_rule(*u, cfg_.rules))
          pool.push_back(u);
    }
    const std::uint64_t key = derive_seed(cfg_.seed, "training-reals");
    std::sort(pool.begin(), pool.end(), [&](const UserRecord* a, const UserRecord* b) {
      const double ka = keyed_uniform01(key, a->id), kb = keyed_uniform01(key, b->id);
      return ka != kb ? ka < kb : a->id < b->id;
    });
    if (pool.size() > cfg_.classifier.max_train_real) pool.resize(cfg_.classifier.max_train_real);
    std::sort(pool.begin(), pool.end(), [](const UserRecord* a, const UserRecord* b) { return a->id < b->id; });

    std::vector<const UserRecord*> all = bots;
    all.insert(all.end(), pool.begin(), pool.end());
    std::vector<TokenCounts> counts(all.size());
    parallel_for(all.size(), cfg_.threads, [&](std::size_t i) { counts[i] = count_tokens(*all[i]); });
    ts.n_bot = bots.size();
    ts.n_real = pool.size();
    if (ts.n_bot > 0 && ts.n_real > 0)
      ts.vocab = build_vocab(std::span(counts).first(ts.n_bot), std::span(counts).subspan(ts.n_bot),
                             cfg_.classifier.bot_top_k, cfg_.classifier.real_top_k);
    ts.data.resize(all.size());
    parallel_for(all.size(), cfg_.threads, [&](std::size_t i) {
      ts.data[i] = {vectorize(counts[i], ts.vocab), i < ts.n_bot ? Label::bot : Label::real};
    });
    for (std::size_t i = 0; i < all.size(); ++i) {
      ts.ids.push_back(all[i]->id);
      ts.origin.push_back(i < ts.n_bot ? "seed" : origin);
    }
    return ts;
  }

  PipelineConfig cfg_;
  std::ostream* log_;
  std::optional<Dataset> dataset_;
  std::optional<Dataset> reference_;
  bool reference_loaded_ = false;
};

}  // namespace botweave
