#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "botweave/data_model.hpp"
#include "botweave/errors.hpp"
#include "botweave/rng.hpp"

namespace botweave {

/// Half-open id interval [lo, hi).
struct IdRange {
  UserId lo = 1'500'000'000;
  UserId hi = 1'600'000'000;

  constexpr bool contains(UserId id) const { return id >= lo && id < hi; }
  friend bool operator==(const IdRange&, const IdRange&) = default;
};

struct FilterRules {
  std::uint64_t max_tweets = 11;
  std::uint64_t max_followers = 10;
  std::uint64_t max_friends = 31;
  TweetSource required_source = TweetSource::windows_phone;
  IdRange id_range{};
  std::string language = "en";
  bool forbid_retweets = true;
  bool forbid_mentions = true;

  void validate() const {
    if (max_tweets == 0 || max_followers == 0 || max_friends == 0)
      throw ParamError("filter caps must be positive");
    if (id_range.lo >= id_range.hi) throw ParamError("filter id range must be non-empty");
  }
};

/// Rules in evaluation order; a rejection reports the first one that fails.
enum class RuleId { language, id_range, max_tweets, max_followers, max_friends, source, retweet, mention };

constexpr std::string_view to_string(RuleId r) {
  switch (r) {
    case RuleId::language: return "language";
    case RuleId::id_range: return "id_range";
    case RuleId::max_tweets: return "max_tweets";
    case RuleId::max_followers: return "max_followers";
    case RuleId::max_friends: return "max_friends";
    case RuleId::source: return "source";
    case RuleId::retweet: return "retweet";
    case RuleId::mention: return "mention";
  }
  return "unknown";
}

struct Rejection {
  UserId id = 0;
  RuleId rule = RuleId::language;
  friend bool operator==(const Rejection&, const Rejection&) = default;
};

struct FilterResult {
  std::vector<UserId> candidates;    // ascending
  std::vector<Rejection> rejected;   // ascending id
};

inline bool is_retweet(std::string_view text) { return text.starts_with("RT @"); }

inline bool has_mention(std::string_view text) {
  for (std::size_t i = 0; i + 1 < text.size(); ++i) {
    if (text[i] != '@') continue;
    const auto c = static_cast<unsigned char>(text[i + 1]);
    if (std::isalnum(c) || c == '_') return true;
  }
  return false;
}

/// First failed rule, or nullopt if the user passes every rule.
inline std::optional<RuleId> first_failed_rule(const UserRecord& u, const FilterRules& rules) {
  if (u.language != rules.language) return RuleId::language;
  if (!rules.id_range.contains(u.id)) return RuleId::id_range;
  if (u.tweets.size() > rules.max_tweets) return RuleId::max_tweets;
  if (u.followers_count > rules.max_followers) return RuleId::max_followers;
  if (u.friends_count > rules.max_friends) return RuleId::max_friends;
  for (const Tweet& t : u.tweets)
    if (t.source != rules.required_source) return RuleId::source;
  if (rules.forbid_retweets)
    for (const Tweet& t : u.tweets)
      if (is_retweet(t.text)) return RuleId::retweet;
  if (rules.forbid_mentions)
    for (const Tweet& t : u.tweets)
      if (has_mention(t.text)) return RuleId::mention;
  return std::nullopt;
}

inline FilterResult apply_rules(std::span<const UserRecord> users, const FilterRules& rules) {
  rules.validate();
  FilterResult r;
  for (const UserRecord& u : users) {
    if (auto failed = first_failed_rule(u, rules))
      r.rejected.push_back({u.id, *failed});
    else
      r.candidates.push_back(u.id);
  }
  std::sort(r.candidates.begin(), r.candidates.end());
  std::sort(r.rejected.begin(), r.rejected.end(), [](const Rejection& a, const Rejection& b) { return a.id < b.id; });
  return r;
}

/// Each user kept independently with probability p. The draw is keyed on
/// (seed, user id), so the result does not depend on input order.
inline std::vector<UserId> sample_uniform(std::span<const UserRecord> users, double p, std::uint64_t seed) {
  if (!(p >= 0.0 && p <= 1.0)) throw ParamError("sample probability must lie in [0, 1]");
  std::vector<UserId> out;
  const std::uint64_t key_seed = derive_seed(seed, "sample");
  for (const UserRecord& u : users)
    if (keyed_uniform01(key_seed, u.id) < p) out.push_back(u.id);
  std::sort(out.begin(), out.end());
  return out;
}

/// Users inside the id range that declare the required language.
inline std::vector<UserId> id_range_scan(std::span<const UserRecord> users, const FilterRules& rules) {
  std::vector<UserId> out;
  for (const UserRecord& u : users)
    if (rules.id_range.contains(u.id) && u.language == rules.language) out.push_back(u.id);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace botweave
