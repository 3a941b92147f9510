#pragma once

// Deterministic synthetic dataset: a quotation botnet embedded in a background
// population of ordinary accounts.
//
// Bots: ids drawn from a narrow range whose creation dates map linearly onto a
// short window; 3-11 quoted tweets each, all from one source, half of them
// geotagged at a uniform point inside one of two rectangles (continent chosen
// by coin flip); sparse follow links that mostly stay inside the botnet plus
// bulk follows of a few customer accounts.
//
// Real users: ids across the 32-bit space, diverse texts with mentions and
// retweets, mixed sources, rare geotags scattered around a home city with
// heavy-tailed displacements, and heavy-tailed follower/friend counts.
//
// Every user draws from its own RNG substream keyed by (seed, kind, index), so
// output is identical for any thread count.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "botweave/cities.hpp"
#include "botweave/corpus.hpp"
#include "botweave/data_model.hpp"
#include "botweave/errors.hpp"
#include "botweave/geo.hpp"
#include "botweave/parallel.hpp"
#include "botweave/rng.hpp"
#include "botweave/time.hpp"

namespace botweave {

inline constexpr UserId kIdSpaceEnd = UserId{1} << 32;

inline constexpr GeoRect kNorthAmericaRect{25.0, 50.0, -125.0, -65.0};
inline constexpr GeoRect kEuropeRect{34.0, 60.0, -11.0, 32.0};

/// Discrete power law P(k) ~ k^-exponent on [min, max].
struct DegreeLaw {
  std::uint64_t min = 5;
  double exponent = 2.3;
  std::uint64_t max = 5000;
};

/// Tweet-level source shares for ordinary users; "Other" absorbs the remainder.
inline std::vector<std::pair<TweetSource, double>> default_source_mix() {
  return {{TweetSource::iphone, 0.311},      {TweetSource::web_client, 0.172}, {TweetSource::android, 0.149},
          {TweetSource::blackberry, 0.068},  {TweetSource::mobile_web, 0.0099},
          {TweetSource::windows_phone, 0.0002}, {TweetSource::other, 0.2899}};
}

struct GenParams {
  std::uint64_t seed = 42;
  std::size_t n_bots = 5000;
  std::size_t n_real = 20000;

  // Bot identity and timing.
  UserId id_lo = 1'500'000'000;
  UserId id_hi = 1'600'000'000;
  Timestamp date_lo = make_date(2013, 6, 20);
  Timestamp date_hi = make_date(2013, 7, 14);
  std::uint32_t bot_active_days = 60;

  // Bot content.
  std::uint32_t bot_tweets_min = 3;
  std::uint32_t bot_tweets_max = 11;
  std::size_t bot_text_min = 40;
  std::size_t bot_text_max = 140;
  double hashtag_prob = 0.3;
  std::vector<std::string> followback_tags{"#teamfollowback", "#followme"};

  // Bot geotags.
  std::pair<GeoRect, GeoRect> rects{kNorthAmericaRect, kEuropeRect};
  double geotag_prob_bot = 0.5;
  double leakage = 0.0;  // share of bot geotags placed outside both rectangles

  // Bot follow graph.
  std::uint64_t bot_follower_cap = 10;
  std::uint64_t bot_friend_cap = 31;
  double bot_friends_mean = 5.1;
  double intra_incoming_frac = 0.91;
  double intra_outgoing_frac = 1.0 / 3.0;
  std::size_t n_customers = 4;
  double customer_share_max = 0.045;
  double customer_share_min = 0.033;

  // Real users.
  double real_english_frac = 0.85;
  double real_tweets_mean = 50.0;
  double real_tweets_sigma = 1.0;
  std::uint32_t real_tweets_max = 3200;
  double real_retweet_prob = 0.15;
  double real_mention_prob = 0.2;
  double real_hashtag_prob = 0.1;
  double real_geotag_user_frac = 0.034;
  double real_geotag_tweet_frac = 0.023;
  double real_mobility_mean_km = 35.0;
  double real_mobility_alpha = 2.5;
  double real_mobility_user_alpha = 2.5;  // Pareto shape of the per-user scale (unit mean)
  DegreeLaw real_friends{5, 2.3, 5000};
  DegreeLaw real_followers{5, 2.2, 5000};
  double real_friend_real_frac = 0.3;
  std::vector<std::pair<TweetSource, double>> source_mix = default_source_mix();
  Timestamp collection_end = make_date(2015, 3, 1);

  void validate() const;
  std::map<std::string, std::string> echo() const;
};

inline void GenParams::validate() const {
  auto prob = [](double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) throw ParamError(std::string(name) + " must be a probability in [0, 1]");
  };
  prob(geotag_prob_bot, "geotag_prob_bot");
  prob(leakage, "leakage");
  prob(hashtag_prob, "hashtag_prob");
  prob(intra_incoming_frac, "intra_incoming_frac");
  prob(intra_outgoing_frac, "intra_outgoing_frac");
  prob(customer_share_max, "customer_share_max");
  prob(customer_share_min, "customer_share_min");
  prob(real_english_frac, "real_english_frac");
  prob(real_retweet_prob, "real_retweet_prob");
  prob(real_mention_prob, "real_mention_prob");
  prob(real_hashtag_prob, "real_hashtag_prob");
  prob(real_geotag_user_frac, "real_geotag_user_frac");
  prob(real_geotag_tweet_frac, "real_geotag_tweet_frac");
  prob(real_friend_real_frac, "real_friend_real_frac");
  if (real_geotag_tweet_frac > real_geotag_user_frac)
    throw ParamError("real_geotag_tweet_frac cannot exceed real_geotag_user_frac");
  if (id_lo == 0 || id_lo >= id_hi) throw ParamError("id range must satisfy 0 < id_lo < id_hi");
  if (id_hi > kIdSpaceEnd) throw ParamError("id_hi must not exceed 2^32");
  if (!(date_lo < date_hi)) throw ParamError("date window must be non-empty");
  if (!rects.first.valid() || !rects.second.valid()) throw ParamError("rectangles must be valid");
  if (rects.first.overlaps(rects.second)) throw ParamError("rectangles must be disjoint");
  if (bot_tweets_min < 1 || bot_tweets_min > bot_tweets_max || bot_tweets_max > 11)
    throw ParamError("bot tweet counts must satisfy 1 <= min <= max <= 11");
  if (bot_text_min < 1 || bot_text_min > bot_text_max || bot_text_max > 240)
    throw ParamError("bot text length must satisfy 1 <= min <= max <= 240");
  if (bot_follower_cap == 0 || bot_friend_cap == 0) throw ParamError("bot caps must be positive");
  if (bot_friends_mean < 0 || bot_friends_mean > static_cast<double>(bot_friend_cap))
    throw ParamError("bot_friends_mean must lie in [0, bot_friend_cap]");
  if (customer_share_min > customer_share_max) throw ParamError("customer_share_min exceeds customer_share_max");
  if (real_tweets_mean < 1 || real_tweets_sigma < 0 || real_tweets_max < 1)
    throw ParamError("real tweet count law is invalid");
  if (real_mobility_mean_km <= 0 || real_mobility_alpha <= 1 || real_mobility_user_alpha <= 1)
    throw ParamError("real mobility needs mean > 0 and both alphas > 1");
  for (const DegreeLaw* law : {&real_friends, &real_followers})
    if (law->min < 1 || law->min > law->max || law->exponent <= 1) throw ParamError("degree law is invalid");
  if (!(collection_end > date_hi)) throw ParamError("collection_end must follow the bot date window");
  double total = 0;
  for (const auto& [src, w] : source_mix) {
    if (w < 0) throw ParamError("source_mix weights must be non-negative");
    total += w;
  }
  if (total <= 0) throw ParamError("source_mix must have positive total weight");
  for (const auto& tag : followback_tags)
    if (tag.size() < 2 || tag.front() != '#') throw ParamError("follow-back tags must start with '#'");

  // Intra-botnet link fractions need at least two bots to be realizable.
  if (n_bots == 1 && (intra_incoming_frac > 0 || intra_outgoing_frac > 0))
    throw ParamError("intra-botnet link fractions must be 0 with a single bot");
  if (n_bots >= 2 && bot_friends_mean > 0 && (intra_incoming_frac == 0) != (intra_outgoing_frac == 0))
    throw ParamError("intra_incoming_frac and intra_outgoing_frac must both be zero or both positive");
}

namespace detail {

inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s = buf;
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

inline std::string fmt_rect(const GeoRect& r) {
  return "[" + fmt_double(r.lat_min) + ", " + fmt_double(r.lat_max) + ", " + fmt_double(r.lon_min) + ", " +
         fmt_double(r.lon_max) + "]";
}

inline std::string quote(std::string_view s) { return "\"" + std::string(s) + "\""; }

}  // namespace detail

inline std::map<std::string, std::string> GenParams::echo() const {
  using detail::fmt_double;
  std::map<std::string, std::string> m;
  m["seed"] = std::to_string(seed);
  m["n_bots"] = std::to_string(n_bots);
  m["n_real"] = std::to_string(n_real);
  m["id_lo"] = std::to_string(id_lo);
  m["id_hi"] = std::to_string(id_hi);
  m["date_lo"] = detail::quote(format_iso8601(date_lo));
  m["date_hi"] = detail::quote(format_iso8601(date_hi));
  m["bot_active_days"] = std::to_string(bot_active_days);
  m["bot_tweets_min"] = std::to_string(bot_tweets_min);
  m["bot_tweets_max"] = std::to_string(bot_tweets_max);
  m["bot_text_min"] = std::to_string(bot_text_min);
  m["bot_text_max"] = std::to_string(bot_text_max);
  m["hashtag_prob"] = fmt_double(hashtag_prob);
  std::string tags = "[";
  for (std::size_t i = 0; i < followback_tags.size(); ++i)
    tags += (i ? ", " : "") + detail::quote(followback_tags[i]);
  m["followback_tags"] = tags + "]";
  m["rect_a"] = detail::fmt_rect(rects.first);
  m["rect_b"] = detail::fmt_rect(rects.second);
  m["geotag_prob_bot"] = fmt_double(geotag_prob_bot);
  m["leakage"] = fmt_double(leakage);
  m["bot_follower_cap"] = std::to_string(bot_follower_cap);
  m["bot_friend_cap"] = std::to_string(bot_friend_cap);
  m["bot_friends_mean"] = fmt_double(bot_friends_mean);
  m["intra_incoming_frac"] = fmt_double(intra_incoming_frac);
  m["intra_outgoing_frac"] = fmt_double(intra_outgoing_frac);
  m["n_customers"] = std::to_string(n_customers);
  m["customer_share_max"] = fmt_double(customer_share_max);
  m["customer_share_min"] = fmt_double(customer_share_min);
  m["real_english_frac"] = fmt_double(real_english_frac);
  m["real_tweets_mean"] = fmt_double(real_tweets_mean);
  m["real_tweets_sigma"] = fmt_double(real_tweets_sigma);
  m["real_tweets_max"] = std::to_string(real_tweets_max);
  m["real_retweet_prob"] = fmt_double(real_retweet_prob);
  m["real_mention_prob"] = fmt_double(real_mention_prob);
  m["real_hashtag_prob"] = fmt_double(real_hashtag_prob);
  m["real_geotag_user_frac"] = fmt_double(real_geotag_user_frac);
  m["real_geotag_tweet_frac"] = fmt_double(real_geotag_tweet_frac);
  m["real_mobility_mean_km"] = fmt_double(real_mobility_mean_km);
  m["real_mobility_alpha"] = fmt_double(real_mobility_alpha);
  m["real_mobility_user_alpha"] = fmt_double(real_mobility_user_alpha);
  auto law = [](const DegreeLaw& l) {
    return "[" + std::to_string(l.min) + ", " + fmt_double(l.exponent) + ", " + std::to_string(l.max) + "]";
  };
  m["real_friends_law"] = law(real_friends);
  m["real_followers_law"] = law(real_followers);
  m["real_friend_real_frac"] = fmt_double(real_friend_real_frac);
  std::string mix = "[";
  for (std::size_t i = 0; i < source_mix.size(); ++i)
    mix += (i ? ", " : "") + detail::quote(std::string(to_string(source_mix[i].first)) + "=" +
                                           fmt_double(source_mix[i].second));
  m["source_mix"] = mix + "]";
  m["collection_end"] = detail::quote(format_iso8601(collection_end));
  return m;
}

// ---------------------------------------------------------------------------
// Ids and creation dates

struct IdAssignment {
  std::vector<UserId> bot_ids;  // ascending
  std::vector<Timestamp> bot_created;
  std::vector<UserId> real_ids;
  std::vector<Timestamp> real_created;
};

/// Linear map of an id inside [id_lo, id_hi] onto [date_lo, date_hi].
inline Timestamp bot_creation_date(UserId id, const GenParams& p) {
  const double frac = static_cast<double>(id - p.id_lo) / static_cast<double>(p.id_hi - p.id_lo);
  const auto span = (p.date_hi - p.date_lo).count();
  return p.date_lo + std::chrono::seconds(static_cast<std::int64_t>(std::floor(frac * static_cast<double>(span))));
}

/// Monotone piecewise-linear id -> creation date over the whole id space,
/// passing through the bot window.
inline Timestamp creation_date(UserId id, const GenParams& p) {
  struct Anchor {
    double id;
    Timestamp at;
  };
  const Anchor anchors[] = {{1.0, make_date(2006, 3, 21)},
                            {static_cast<double>(p.id_lo), p.date_lo},
                            {static_cast<double>(p.id_hi), p.date_hi},
                            {static_cast<double>(kIdSpaceEnd), std::min(make_date(2015, 2, 1), p.collection_end)}};
  const double x = static_cast<double>(id);
  for (std::size_t i = 0; i + 1 < std::size(anchors); ++i) {
    const Anchor& a = anchors[i];
    const Anchor& b = anchors[i + 1];
    if (x <= b.id || i + 2 == std::size(anchors)) {
      const double t = std::clamp((x - a.id) / std::max(1.0, b.id - a.id), 0.0, 1.0);
      const auto span = static_cast<double>((b.at - a.at).count());
      return a.at + std::chrono::seconds(static_cast<std::int64_t>(std::floor(t * span)));
    }
  }
  return anchors[0].at;
}

/// Draws n distinct integers from [0, range) (Floyd's algorithm), ascending.
inline std::vector<std::uint64_t> sample_distinct(std::uint64_t range, std::size_t n, Rng& rng) {
  if (n > range) throw ParamError("cannot draw " + std::to_string(n) + " distinct ids from a range of " +
                                  std::to_string(range));
  std::unordered_set<std::uint64_t> chosen;
  chosen.reserve(n * 2);
  for (std::uint64_t j = range - n; j < range; ++j) {
    const std::uint64_t t = std::uniform_int_distribution<std::uint64_t>(0, j)(rng);
    if (!chosen.insert(t).second) chosen.insert(j);
  }
  std::vector<std::uint64_t> out(chosen.begin(), chosen.end());
  std::sort(out.begin(), out.end());
  return out;
}

inline IdAssignment assign_ids_and_dates(std::size_t n_bots, std::size_t n_real, const GenParams& p, Rng& rng) {
  IdAssignment a;
  for (std::uint64_t v : sample_distinct(p.id_hi - p.id_lo, n_bots, rng)) {
    a.bot_ids.push_back(p.id_lo + v);
    a.bot_created.push_back(bot_creation_date(p.id_lo + v, p));
  }
  std::unordered_set<UserId> used(a.bot_ids.begin(), a.bot_ids.end());
  if (n_real + n_bots >= kIdSpaceEnd - 1) throw ParamError("id space exhausted");
  std::uniform_int_distribution<UserId> any(1, kIdSpaceEnd - 1);
  a.real_ids.reserve(n_real);
  while (a.real_ids.size() < n_real) {
    const UserId id = any(rng);
    if (used.insert(id).second) a.real_ids.push_back(id);
  }
  for (UserId id : a.real_ids) a.real_created.push_back(creation_date(id, p));
  return a;
}

// ---------------------------------------------------------------------------
// Tweet text

namespace detail {

inline bool is_continuation(char c) { return (static_cast<unsigned char>(c) & 0xC0) == 0x80; }

inline std::string_view trim_spaces(std::string_view s) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  return s;
}

inline std::string screen_name(Rng& rng) {
  static constexpr std::string_view syllables[] = {"ka", "lo", "mi", "ra", "ten", "vo", "sha", "lu", "de",
                                                   "an", "ri", "zo", "bel", "ty", "no", "ja", "el", "sa",
                                                   "mar", "kin", "pa", "ro", "qu", "is", "fen", "da"};
  std::string s;
  const int parts = std::uniform_int_distribution<int>(2, 3)(rng);
  for (int i = 0; i < parts; ++i)
    s += syllables[std::uniform_int_distribution<std::size_t>(0, std::size(syllables) - 1)(rng)];
  s[0] = static_cast<char>(s[0] - 'a' + 'A');
  if (bernoulli(rng, 0.6)) s += std::to_string(std::uniform_int_distribution<int>(1, 9999)(rng));
  return s;
}

/// Distinct second offsets in [lo, hi], ascending.
inline std::vector<Timestamp> distinct_times(Timestamp lo, Timestamp hi, std::size_t n, Rng& rng) {
  const auto range = static_cast<std::uint64_t>((hi - lo).count()) + 1;
  std::vector<Timestamp> out;
  for (std::uint64_t v : sample_distinct(range, std::min<std::uint64_t>(n, range), rng))
    out.push_back(lo + std::chrono::seconds(static_cast<std::int64_t>(v)));
  return out;
}

}  // namespace detail

struct BotTextParams {
  std::size_t min_chars = 40;
  std::size_t max_chars = 140;
  double hashtag_prob = 0.3;
  std::vector<std::string> followback_tags{"#teamfollowback", "#followme"};

  static BotTextParams from(const GenParams& p) {
    return {p.bot_text_min, p.bot_text_max, p.hashtag_prob, p.followback_tags};
  }
};

/// A random window of the corpus body (words may be cut at either end). With
/// probability hashtag_prob, one of two decorations is applied with equal odds:
/// a follow-back tag at the start or end, or '#' prefixed to one random word.
inline std::string make_bot_tweet(const QuoteCorpus& corpus, const BotTextParams& tp, Rng& rng) {
  const std::string_view body = corpus.body;
  if (body.empty()) throw ParamError("corpus '" + corpus.title + "' is empty");
  std::string text;
  while (text.empty()) {
    const std::size_t hi = std::min(tp.max_chars, body.size());
    const std::size_t lo = std::min(tp.min_chars, hi);
    const std::size_t len = std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
    std::size_t start = std::uniform_int_distribution<std::size_t>(0, body.size() - len)(rng);
    std::size_t end = start + len;
    while (start < end && detail::is_continuation(body[start])) ++start;
    while (end < body.size() && end > start && detail::is_continuation(body[end])) --end;
    text = std::string(detail::trim_spaces(body.substr(start, end - start)));
  }
  if (!bernoulli(rng, tp.hashtag_prob)) return text;

  if (!tp.followback_tags.empty() && bernoulli(rng, 0.5)) {
    const auto& tag =
        tp.followback_tags[std::uniform_int_distribution<std::size_t>(0, tp.followback_tags.size() - 1)(rng)];
    return bernoulli(rng, 0.5) ? tag + " " + text : text + " " + tag;
  }
  std::vector<std::size_t> word_starts;
  for (std::size_t i = 0; i < text.size(); ++i)
    if (text[i] != ' ' && (i == 0 || text[i - 1] == ' ')) word_starts.push_back(i);
  const std::size_t at = word_starts[std::uniform_int_distribution<std::size_t>(0, word_starts.size() - 1)(rng)];
  text.insert(at, 1, '#');
  return text;
}

/// Continent by fair coin, then a uniform latitude and longitude inside it.
inline GeoPoint fake_location(const std::pair<GeoRect, GeoRect>& rects, Rng& rng) {
  const GeoRect& r = bernoulli(rng, 0.5) ? rects.first : rects.second;
  return {r.lat_min + uniform01(rng) * (r.lat_max - r.lat_min), r.lon_min + uniform01(rng) * (r.lon_max - r.lon_min)};
}

/// Uniform point on the sphere outside both rectangles.
inline GeoPoint stray_location(const std::pair<GeoRect, GeoRect>& rects, Rng& rng) {
  for (;;) {
    GeoPoint p{rad2deg(std::asin(2.0 * uniform01(rng) - 1.0)), -180.0 + 360.0 * uniform01(rng)};
    if (p.valid() && !rects.first.contains(p) && !rects.second.contains(p)) return p;
  }
}

inline UserRecord make_bot_user(const GenParams& p, const QuoteCorpus& corpus, UserId id, Timestamp created,
                                Rng& rng) {
  UserRecord u;
  u.id = id;
  u.screen_name = detail::screen_name(rng);
  u.language = "en";
  u.created_at = created;
  u.label = Label::bot;
  const auto n = std::uniform_int_distribution<std::uint32_t>(p.bot_tweets_min, p.bot_tweets_max)(rng);
  const auto times = detail::distinct_times(created + std::chrono::minutes(1),
                                            created + std::chrono::days(std::max<std::uint32_t>(1, p.bot_active_days)),
                                            n, rng);
  const auto tp = BotTextParams::from(p);
  for (Timestamp ts : times) {
    Tweet t;
    t.text = make_bot_tweet(corpus, tp, rng);
    t.timestamp = ts;
    t.source = TweetSource::windows_phone;
    if (bernoulli(rng, p.geotag_prob_bot))
      t.geo = bernoulli(rng, p.leakage) ? stray_location(p.rects, rng) : fake_location(p.rects, rng);
    u.tweets.push_back(std::move(t));
  }
  return u;
}

// ---------------------------------------------------------------------------
// Real users

namespace detail {

/// Window of whole words from one corpus.
inline std::string real_window(std::string_view body, Rng& rng) {
  const std::size_t target = std::uniform_int_distribution<std::size_t>(20, 120)(rng);
  std::size_t start = std::uniform_int_distribution<std::size_t>(0, body.size() - 1)(rng);
  while (start > 0 && body[start - 1] != ' ') --start;
  std::size_t end = std::min(body.size(), start + target);
  while (end < body.size() && body[end] != ' ') ++end;
  return std::string(trim_spaces(body.substr(start, end - start)));
}

inline const std::vector<std::string>& real_hashtags() {
  static const std::vector<std::string> tags{"#tbt", "#love", "#nofilter", "#mondaymotivation", "#tgif",
                                             "#weekend", "#fail", "#win", "#throwback", "#goals"};
  return tags;
}

}  // namespace detail

/// Mean distance between two independent displacements from a common home,
/// in units of the mean displacement (fixed-seed Monte Carlo, flat-earth).
inline double consecutive_to_displacement_ratio(double alpha) {
  Rng rng = make_rng(0, "mobility-calibration");
  const double xm = (alpha - 1.0) / alpha;  // unit-mean Pareto
  auto radius = [&] { return xm * std::pow(1.0 - uniform01(rng), -1.0 / alpha); };
  constexpr int kDraws = 200000;
  double sum = 0.0;
  for (int i = 0; i < kDraws; ++i) {
    const double a = radius(), b = radius();
    const double theta = 2.0 * std::numbers::pi * uniform01(rng);
    sum += std::sqrt(std::max(0.0, a * a + b * b - 2.0 * a * b * std::cos(theta)));
  }
  return sum / kDraws;
}

/// Pareto draw with the given shape and mean 1.
inline double unit_pareto(double alpha, Rng& rng) {
  return (alpha - 1.0) / alpha * std::pow(1.0 - uniform01(rng), -1.0 / alpha);
}

/// Heavy-tailed displacement from home (Pareto, shape alpha) times the user's
/// own scale, so that consecutive geotags average real_mobility_mean_km apart
/// over the population.
inline double mobility_step_km(const GenParams& p, Rng& rng, double ratio, double user_scale = 1.0) {
  return user_scale * p.real_mobility_mean_km / ratio * unit_pareto(p.real_mobility_alpha, rng);
}

inline GeoPoint sample_home(Rng& rng) {
  static const std::discrete_distribution<std::size_t> pick = [] {
    std::vector<double> w;
    for (const City& c : kCities) w.push_back(c.weight);
    return std::discrete_distribution<std::size_t>(w.begin(), w.end());
  }();
  auto dist = pick;
  const City& c = kCities[dist(rng)];
  const double jitter = std::exponential_distribution<double>(1.0 / 10.0)(rng);
  return destination_point({c.lat, c.lon}, 2.0 * std::numbers::pi * uniform01(rng), jitter);
}

inline UserRecord make_real_user(const GenParams& p, std::span<const QuoteCorpus> corpora, UserId id,
                                 Timestamp created, Rng& rng, double mobility_ratio = 0.0) {
  if (mobility_ratio <= 0) mobility_ratio = consecutive_to_displacement_ratio(p.real_mobility_alpha);
  if (corpora.empty()) throw ParamError("real users need at least one corpus");
  UserRecord u;
  u.id = id;
  u.screen_name = detail::screen_name(rng);
  static constexpr std::string_view other_langs[] = {"es", "pt", "ja", "fr", "ar", "tr", "id"};
  u.language = bernoulli(rng, p.real_english_frac)
                   ? "en"
                   : std::string(other_langs[std::uniform_int_distribution<std::size_t>(0, std::size(other_langs) - 1)(rng)]);
  u.created_at = created;
  u.label = Label::real;

  const double sigma = p.real_tweets_sigma;
  const double mu = std::log(p.real_tweets_mean) - sigma * sigma / 2.0;
  const double draw = std::lognormal_distribution<double>(mu, sigma)(rng);
  const auto n = static_cast<std::size_t>(std::clamp(std::llround(draw), 1LL, static_cast<long long>(p.real_tweets_max)));
  const auto times = detail::distinct_times(created + std::chrono::minutes(1), p.collection_end, n, rng);

  const std::size_t favourite = std::uniform_int_distribution<std::size_t>(0, corpora.size() - 1)(rng);
  const bool geo_user = bernoulli(rng, p.real_geotag_user_frac);
  const double per_tweet_geo = p.real_geotag_user_frac > 0 ? p.real_geotag_tweet_frac / p.real_geotag_user_frac : 0.0;
  const GeoPoint home = geo_user ? sample_home(rng) : GeoPoint{};
  const double user_scale = geo_user ? unit_pareto(p.real_mobility_user_alpha, rng) : 1.0;

  std::vector<double> weights;
  for (const auto& [src, w] : p.source_mix) weights.push_back(w);
  std::discrete_distribution<std::size_t> source_pick(weights.begin(), weights.end());

  for (Timestamp ts : times) {
    Tweet t;
    const std::size_t ci =
        bernoulli(rng, 0.7) ? favourite : std::uniform_int_distribution<std::size_t>(0, corpora.size() - 1)(rng);
    std::string text = detail::real_window(corpora[ci].body, rng);
    if (bernoulli(rng, p.real_retweet_prob))
      text = "RT @" + detail::screen_name(rng) + ": " + text;
    else if (bernoulli(rng, p.real_mention_prob))
      text = "@" + detail::screen_name(rng) + " " + text;
    if (bernoulli(rng, p.real_hashtag_prob)) {
      const auto& tags = detail::real_hashtags();
      text += " " + tags[std::uniform_int_distribution<std::size_t>(0, tags.size() - 1)(rng)];
    }
    t.text = std::move(text);
    t.timestamp = ts;
    t.source = p.source_mix[source_pick(rng)].first;
    if (geo_user && bernoulli(rng, per_tweet_geo)) {
      const double bearing = 2.0 * std::numbers::pi * uniform01(rng);
      t.geo = destination_point(home, bearing, mobility_step_km(p, rng, mobility_ratio, user_scale));
    }
    u.tweets.push_back(std::move(t));
  }
  return u;
}

// ---------------------------------------------------------------------------
// Follow graph

inline std::uint64_t sample_degree(const DegreeLaw& law, Rng& rng) {
  const double k = static_cast<double>(law.min) * std::pow(1.0 - uniform01(rng), -1.0 / (law.exponent - 1.0));
  return std::min<std::uint64_t>(law.max, static_cast<std::uint64_t>(std::floor(k)));
}

/// Bot-follower share for each customer account, linearly spaced from max to min.
inline std::vector<double> customer_shares(const GenParams& p) {
  std::vector<double> s;
  for (std::size_t c = 0; c < p.n_customers; ++c) {
    const double t = p.n_customers == 1 ? 0.0 : static_cast<double>(c) / static_cast<double>(p.n_customers - 1);
    s.push_back(p.customer_share_max + t * (p.customer_share_min - p.customer_share_max));
  }
  return s;
}

/// Builds the follow graph. Bot out-degrees are drawn first; exactly
/// round(intra_outgoing_frac * total) of those links go to other bots, and
/// exactly enough external followers are added so that intra-botnet links make
/// up intra_incoming_frac of bot in-links. Customer accounts receive their
/// designated share of bots as followers. Real users get heavy-tailed friend
/// and follower counts realized against other reals and outside accounts.
inline FollowGraph build_follow_graph(std::span<const UserId> bot_ids, std::span<const UserId> real_ids,
                                      std::span<const UserId> customer_ids, const GenParams& p, Rng& rng) {
  const std::size_t B = bot_ids.size();
  const std::size_t R = real_ids.size();
  FollowGraph g;

  std::unordered_set<UserId> used(bot_ids.begin(), bot_ids.end());
  used.insert(real_ids.begin(), real_ids.end());
  used.insert(customer_ids.begin(), customer_ids.end());
  const std::size_t pool_size = std::max<std::size_t>(
      {10000, R, 2 * static_cast<std::size_t>(std::max(p.real_friends.max, p.real_followers.max))});
  std::vector<UserId> pool;
  pool.reserve(pool_size);
  {
    std::uniform_int_distribution<UserId> any(1, kIdSpaceEnd - 1);
    while (pool.size() < pool_size) {
      const UserId id = any(rng);
      if (used.insert(id).second) pool.push_back(id);
    }
  }
  auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };

  // ---- Bots.
  std::vector<std::unordered_set<UserId>> bot_friends(B), bot_followers(B);
  std::vector<std::uint64_t> bot_in(B, 0);
  std::vector<std::size_t> intra_slots(B, 0), ext_slots(B, 0);
  if (B > 0) {
    std::poisson_distribution<std::uint64_t> out_law(p.bot_friends_mean);
    std::vector<std::size_t> slots;
    for (std::size_t i = 0; i < B; ++i) {
      const std::uint64_t d = p.bot_friends_mean > 0 ? std::min(out_law(rng), p.bot_friend_cap) : 0;
      slots.insert(slots.end(), d, i);
    }
    std::shuffle(slots.begin(), slots.end(), rng);
    const std::size_t intra =
        B >= 2 ? static_cast<std::size_t>(std::llround(p.intra_outgoing_frac * static_cast<double>(slots.size()))) : 0;
    for (std::size_t s = 0; s < slots.size(); ++s) (s < intra ? intra_slots : ext_slots)[slots[s]] += 1;

    const double f_in = p.intra_incoming_frac;
    const std::size_t external_in =
        f_in > 0 ? static_cast<std::size_t>(std::llround(static_cast<double>(intra) * (1.0 - f_in) / f_in)) : 0;
    if (intra + external_in > B * p.bot_follower_cap)
      throw ParamError("bot follower cap cannot absorb the requested incoming links");

    // Intra-botnet links.
    for (std::size_t i = 0; i < B; ++i) {
      if (intra_slots[i] > B - 1) throw ParamError("too few bots to realize intra-botnet out-degree");
      for (std::size_t k = 0; k < intra_slots[i]; ++k) {
        bool placed = false;
        for (int attempt = 0; attempt < 4096 && !placed; ++attempt) {
          const std::size_t j = pick(B);
          if (j == i || bot_in[j] >= p.bot_follower_cap || bot_friends[i].contains(bot_ids[j])) continue;
          bot_friends[i].insert(bot_ids[j]);
          bot_followers[j].insert(bot_ids[i]);
          ++bot_in[j];
          g.edges.push_back({bot_ids[i], bot_ids[j]});
          placed = true;
        }
        if (!placed) throw ParamError("infeasible intra-botnet links under the follower cap");
      }
    }
    // External followers of bots.
    std::vector<std::size_t> open;
    for (std::size_t e = 0; e < external_in; ++e) {
      std::size_t j = pick(B);
      for (int attempt = 0; attempt < 64 && bot_in[j] >= p.bot_follower_cap; ++attempt) j = pick(B);
      if (bot_in[j] >= p.bot_follower_cap) {
        open.clear();
        for (std::size_t o = 0; o < B; ++o)
          if (bot_in[o] < p.bot_follower_cap) open.push_back(o);
        j = open[pick(open.size())];
      }
      for (;;) {
        const UserId src = (R > 0 && bernoulli(rng, 0.5)) ? real_ids[pick(R)] : pool[pick(pool.size())];
        if (bot_followers[j].insert(src).second) {
          g.edges.push_back({src, bot_ids[j]});
          ++bot_in[j];
          break;
        }
      }
    }
    // Customers take their share of bots with spare external out-links.
    const auto shares = customer_shares(p);
    for (std::size_t c = 0; c < customer_ids.size() && c < shares.size(); ++c) {
      const auto want = static_cast<std::size_t>(std::llround(shares[c] * static_cast<double>(B)));
      std::vector<std::size_t> eligible;
      for (std::size_t i = 0; i < B; ++i)
        if (ext_slots[i] > 0) eligible.push_back(i);
      if (eligible.size() < want)
        throw ParamError("not enough bot out-links to give customer " + std::to_string(c) + " its share");
      std::shuffle(eligible.begin(), eligible.end(), rng);
      std::sort(eligible.begin(), eligible.begin() + static_cast<std::ptrdiff_t>(want));
      for (std::size_t k = 0; k < want; ++k) {
        const std::size_t i = eligible[k];
        bot_friends[i].insert(customer_ids[c]);
        g.edges.push_back({bot_ids[i], customer_ids[c]});
        --ext_slots[i];
      }
    }
    // Remaining external friends.
    for (std::size_t i = 0; i < B; ++i) {
      for (std::size_t k = 0; k < ext_slots[i]; ++k) {
        for (;;) {
          const UserId dst = (R > 0 && bernoulli(rng, 0.5)) ? real_ids[pick(R)] : pool[pick(pool.size())];
          if (bot_friends[i].insert(dst).second) {
            g.edges.push_back({bot_ids[i], dst});
            break;
          }
        }
      }
    }
  }

  // ---- Real users.
  std::unordered_map<UserId, std::uint64_t> real_in;
  real_in.reserve(R);
  for (const FollowEdge& e : g.edges) real_in[e.friend_id] += 1;  // bot links into reals
  std::unordered_set<UserId> local;
  for (std::size_t r = 0; r < R; ++r) {
    const std::uint64_t d = std::min<std::uint64_t>(sample_degree(p.real_friends, rng), pool.size() / 2);
    local.clear();
    for (std::uint64_t k = 0; k < d; ++k) {
      for (int attempt = 0; attempt < 64; ++attempt) {
        UserId dst = pool[pick(pool.size())];
        if (R > 1 && bernoulli(rng, p.real_friend_real_frac)) {
          const std::size_t j = pick(R);
          if (j == r) continue;
          dst = real_ids[j];
        }
        if (local.insert(dst).second) {
          g.edges.push_back({real_ids[r], dst});
          real_in[dst] += 1;
          break;
        }
      }
    }
  }
  for (std::size_t r = 0; r < R; ++r) {
    const std::uint64_t want = std::min<std::uint64_t>(sample_degree(p.real_followers, rng), pool.size() / 2);
    const std::uint64_t have = real_in[real_ids[r]];
    if (have >= want) continue;
    local.clear();
    for (std::uint64_t k = have; k < want; ++k) {
      for (;;) {
        const UserId src = pool[pick(pool.size())];
        if (local.insert(src).second) {
          g.edges.push_back({src, real_ids[r]});
          break;
        }
      }
    }
  }
  g.canonicalize();
  return g;
}

/// Sets followers_count / friends_count from realized graph degrees.
inline void apply_degree_counters(std::vector<UserRecord>& users, const FollowGraph& g) {
  std::unordered_map<UserId, std::pair<std::uint64_t, std::uint64_t>> deg;  // in, out
  deg.reserve(users.size());
  for (const UserRecord& u : users) deg[u.id] = {0, 0};
  for (const FollowEdge& e : g.edges) {
    if (auto it = deg.find(e.friend_id); it != deg.end()) ++it->second.first;
    if (auto it = deg.find(e.follower); it != deg.end()) ++it->second.second;
  }
  for (UserRecord& u : users) {
    u.followers_count = deg[u.id].first;
    u.friends_count = deg[u.id].second;
  }
}

// ---------------------------------------------------------------------------

/// Full labeled dataset for the given parameters. Output depends only on
/// (params, corpora), not on `threads`.
inline Dataset generate(const GenParams& p, const QuoteCorpus& bot_corpus, std::span<const QuoteCorpus> real_corpora,
                        unsigned threads = 1) {
  p.validate();
  if (p.n_bots + p.n_real == 0) throw ParamError("n_bots + n_real must be at least 1");
  if (p.n_real > 0 && real_corpora.empty()) throw ParamError("real users need at least one corpus");
  if (p.n_bots > 0 && bot_corpus.body.size() < kMinCorpusChars) throw ParamError("bot corpus is too short");

  Rng id_rng = make_rng(p.seed, "ids");
  const IdAssignment ids = assign_ids_and_dates(p.n_bots, p.n_real, p, id_rng);

  std::vector<UserId> customers;
  {
    Rng rng = make_rng(p.seed, "customers");
    std::unordered_set<UserId> used(ids.bot_ids.begin(), ids.bot_ids.end());
    used.insert(ids.real_ids.begin(), ids.real_ids.end());
    std::uniform_int_distribution<UserId> early(10'000'000, 50'000'000);
    while (customers.size() < p.n_customers) {
      const UserId id = early(rng);
      if (used.insert(id).second) customers.push_back(id);
    }
  }

  const double mobility_ratio = consecutive_to_displacement_ratio(p.real_mobility_alpha);
  Dataset ds;
  ds.users.resize(p.n_bots + p.n_real);
  parallel_for(ds.users.size(), threads, [&](std::size_t i) {
    if (i < p.n_bots) {
      Rng rng = make_rng(p.seed, "bot", i);
      ds.users[i] = make_bot_user(p, bot_corpus, ids.bot_ids[i], ids.bot_created[i], rng);
    } else {
      const std::size_t j = i - p.n_bots;
      Rng rng = make_rng(p.seed, "real", j);
      ds.users[i] = make_real_user(p, real_corpora, ids.real_ids[j], ids.real_created[j], rng, mobility_ratio);
    }
  });

  Rng graph_rng = make_rng(p.seed, "graph");
  ds.graph = build_follow_graph(ids.bot_ids, ids.real_ids, customers, p, graph_rng);
  apply_degree_counters(ds.users, ds.graph);
  std::sort(ds.users.begin(), ds.users.end(), [](const UserRecord& a, const UserRecord& b) { return a.id < b.id; });
  ds.meta = p.echo();
  std::string cust = "[";
  for (std::size_t i = 0; i < customers.size(); ++i) cust += (i ? ", " : "") + std::to_string(customers[i]);
  ds.meta["customer_ids"] = cust + "]";
  return ds;
}

}  // namespace botweave
