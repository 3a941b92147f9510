#pragma once

// Core domain types shared by every module: accounts, tweets, geotags and the
// follow graph, plus invariant checking over a whole dataset.

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "botweave/time.hpp"

namespace botweave {

using UserId = std::uint64_t;

/// Longest tweet text accepted, in Unicode code points.
inline constexpr std::size_t kMaxTweetCodePoints = 280;

enum class Label { bot, real, unknown };

constexpr std::string_view to_string(Label l) {
  switch (l) {
    case Label::bot: return "bot";
    case Label::real: return "real";
    case Label::unknown: return "unknown";
  }
  return "unknown";
}

inline std::optional<Label> parse_label(std::string_view s) {
  if (s == "bot") return Label::bot;
  if (s == "real") return Label::real;
  if (s == "unknown") return Label::unknown;
  return std::nullopt;
}

enum class TweetSource { windows_phone, iphone, web_client, android, blackberry, mobile_web, other };

inline constexpr std::array<TweetSource, 7> kAllSources{
    TweetSource::windows_phone, TweetSource::iphone,     TweetSource::web_client, TweetSource::android,
    TweetSource::blackberry,    TweetSource::mobile_web, TweetSource::other};

constexpr std::string_view to_string(TweetSource s) {
  switch (s) {
    case TweetSource::windows_phone: return "Twitter for Windows Phone";
    case TweetSource::iphone: return "Twitter for iPhone";
    case TweetSource::web_client: return "Twitter Web Client";
    case TweetSource::android: return "Twitter for Android";
    case TweetSource::blackberry: return "Twitter for Blackberry";
    case TweetSource::mobile_web: return "Mobile Web";
    case TweetSource::other: return "Other";
  }
  return "Other";
}

inline std::optional<TweetSource> parse_source(std::string_view s) {
  for (TweetSource src : kAllSources)
    if (to_string(src) == s) return src;
  return std::nullopt;
}

struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;

  constexpr bool valid() const { return lat >= -90.0 && lat <= 90.0 && lon >= -180.0 && lon < 180.0; }
  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

/// Axis-aligned latitude/longitude box. Membership is closed on all sides.
struct GeoRect {
  double lat_min = 0.0;
  double lat_max = 0.0;
  double lon_min = 0.0;
  double lon_max = 0.0;

  constexpr bool valid() const {
    return lat_min < lat_max && lon_min < lon_max && lat_min >= -90.0 && lat_max <= 90.0 && lon_min >= -180.0 &&
           lon_max <= 180.0;
  }
  constexpr bool contains(GeoPoint p) const {
    return p.lat >= lat_min && p.lat <= lat_max && p.lon >= lon_min && p.lon <= lon_max;
  }
  constexpr bool overlaps(const GeoRect& o) const {
    return lat_min <= o.lat_max && o.lat_min <= lat_max && lon_min <= o.lon_max && o.lon_min <= lon_max;
  }
  constexpr double area_deg2() const { return (lat_max - lat_min) * (lon_max - lon_min); }
  friend bool operator==(const GeoRect&, const GeoRect&) = default;
};

/// Jaccard index of two boxes in degree-space area.
constexpr double jaccard(const GeoRect& a, const GeoRect& b) {
  const double lat = std::min(a.lat_max, b.lat_max) - std::max(a.lat_min, b.lat_min);
  const double lon = std::min(a.lon_max, b.lon_max) - std::max(a.lon_min, b.lon_min);
  const double inter = (lat > 0 && lon > 0) ? lat * lon : 0.0;
  const double uni = a.area_deg2() + b.area_deg2() - inter;
  return uni > 0 ? inter / uni : 0.0;
}

struct Tweet {
  std::string text;
  Timestamp timestamp{};
  TweetSource source = TweetSource::other;
  std::optional<GeoPoint> geo;

  friend bool operator==(const Tweet&, const Tweet&) = default;
};

struct UserRecord {
  UserId id = 0;
  std::string screen_name;
  std::string language;
  Timestamp created_at{};
  std::uint64_t followers_count = 0;
  std::uint64_t friends_count = 0;
  std::vector<Tweet> tweets;  // ascending timestamp
  std::optional<Label> label;

  friend bool operator==(const UserRecord&, const UserRecord&) = default;
};

/// Directed follow link: `follower` follows `friend_id`.
struct FollowEdge {
  UserId follower = 0;
  UserId friend_id = 0;

  friend auto operator<=>(const FollowEdge&, const FollowEdge&) = default;
};

struct FollowGraph {
  std::vector<FollowEdge> edges;

  /// Sorts lexicographically and drops duplicate edges.
  void canonicalize() {
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  }
  friend bool operator==(const FollowGraph&, const FollowGraph&) = default;
};

struct Dataset {
  std::vector<UserRecord> users;
  FollowGraph graph;
  /// Generator parameter echo; values are literal TOML scalars or arrays.
  std::map<std::string, std::string> meta;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

struct Violation {
  UserId user_id = 0;
  std::string rule;
  std::string detail;
};

inline std::size_t utf8_code_points(std::string_view s) {
  std::size_t n = 0;
  for (unsigned char c : s)
    if ((c & 0xC0) != 0x80) ++n;
  return n;
}

inline void validate_user(const UserRecord& u, std::vector<Violation>& out) {
  if (u.id == 0) out.push_back({u.id, "user_id_positive", "user id must be > 0"});
  for (std::size_t i = 0; i < u.tweets.size(); ++i) {
    const Tweet& t = u.tweets[i];
    const std::string where = "tweet " + std::to_string(i);
    if (t.text.empty()) out.push_back({u.id, "tweet_text_nonempty", where + " has empty text"});
    if (utf8_code_points(t.text) > kMaxTweetCodePoints)
      out.push_back({u.id, "tweet_text_length", where + " exceeds " + std::to_string(kMaxTweetCodePoints) +
                                                    " code points"});
    if (t.geo && !t.geo->valid()) out.push_back({u.id, "geo_range", where + " has out-of-range coordinates"});
    if (i > 0 && !(u.tweets[i - 1].timestamp < t.timestamp))
      out.push_back({u.id, "tweets_ordered", where + " is not strictly after its predecessor"});
  }
}

/// Every broken invariant, one entry per violation. Empty iff the dataset is valid.
inline std::vector<Violation> validate_dataset(const Dataset& ds) {
  std::vector<Violation> out;
  std::unordered_set<UserId> seen;
  seen.reserve(ds.users.size());
  for (const UserRecord& u : ds.users) {
    validate_user(u, out);
    if (!seen.insert(u.id).second) out.push_back({u.id, "user_id_unique", "duplicate user id"});
  }
  std::vector<FollowEdge> sorted = ds.graph.edges;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const FollowEdge& e = sorted[i];
    if (e.follower == 0 || e.friend_id == 0)
      out.push_back({e.follower, "edge_endpoint_positive", "edge endpoint id must be > 0"});
    if (e.follower == e.friend_id) out.push_back({e.follower, "edge_no_self_loop", "self-loop edge"});
    if (i > 0 && sorted[i - 1] == e)
      out.push_back({e.follower, "edge_unique", "duplicate edge to " + std::to_string(e.friend_id)});
  }
  return out;
}

}  // namespace botweave
