#pragma once

// On-disk dataset layout: a directory holding
//   users.ndjson  one user object per line
//   edges.tsv     "follower<TAB>friend" per line, after a header row
//   meta.toml     key = value generator echo
// Output is byte-deterministic: users ascend by id, edges sort lexicographically,
// meta keys sort, and JSON fields keep a fixed order.

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "botweave/data_model.hpp"
#include "botweave/errors.hpp"

namespace botweave {

namespace fs = std::filesystem;

inline constexpr std::string_view kUsersFile = "users.ndjson";
inline constexpr std::string_view kEdgesFile = "edges.tsv";
inline constexpr std::string_view kMetaFile = "meta.toml";
inline constexpr std::string_view kEdgesHeader = "follower\tfriend";
inline constexpr std::string_view kFormatTag = "botweave-dataset-1";

struct LoadOptions {
  /// Detection stages load with labels dropped so ground truth cannot leak.
  bool keep_labels = true;
};

inline std::string user_to_json_line(const UserRecord& u) {
  nlohmann::ordered_json j;
  j["id"] = u.id;
  j["screen_name"] = u.screen_name;
  j["lang"] = u.language;
  j["created_at"] = format_iso8601(u.created_at);
  j["followers_count"] = u.followers_count;
  j["friends_count"] = u.friends_count;
  if (u.label) j["label"] = std::string(to_string(*u.label));
  auto tweets = nlohmann::ordered_json::array();
  for (const Tweet& t : u.tweets) {
    nlohmann::ordered_json jt;
    jt["text"] = t.text;
    jt["ts"] = format_iso8601(t.timestamp);
    jt["source"] = std::string(to_string(t.source));
    if (t.geo) {
      jt["lat"] = t.geo->lat;
      jt["lon"] = t.geo->lon;
    }
    tweets.push_back(std::move(jt));
  }
  j["tweets"] = std::move(tweets);
  return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::strict);
}

namespace detail {

struct LineContext {
  std::string_view file;
  std::size_t line;

  [[noreturn]] void fail(std::string_view field, const std::string& why) const {
    throw DatasetError(std::string(file) + ":" + std::to_string(line) + ": field '" + std::string(field) +
                       "': " + why);
  }
};

template <class Json>
const Json& require(const Json& obj, std::string_view key, const LineContext& ctx, std::string_view path = {}) {
  const std::string name = path.empty() ? std::string(key) : std::string(path) + "." + std::string(key);
  auto it = obj.find(std::string(key));
  if (it == obj.end()) ctx.fail(name, "missing");
  return *it;
}

template <class Json>
std::uint64_t as_u64(const Json& v, std::string_view name, const LineContext& ctx) {
  if (!v.is_number_unsigned()) ctx.fail(name, "expected non-negative integer");
  return v.template get<std::uint64_t>();
}

template <class Json>
std::string as_string(const Json& v, std::string_view name, const LineContext& ctx) {
  if (!v.is_string()) ctx.fail(name, "expected string");
  return v.template get<std::string>();
}

template <class Json>
double as_double(const Json& v, std::string_view name, const LineContext& ctx) {
  if (!v.is_number()) ctx.fail(name, "expected number");
  return v.template get<double>();
}

template <class Json>
Timestamp as_time(const Json& v, std::string_view name, const LineContext& ctx) {
  try {
    return parse_iso8601(as_string(v, name, ctx));
  } catch (const std::invalid_argument& e) {
    ctx.fail(name, e.what());
  }
}

}  // namespace detail

inline UserRecord user_from_json_line(std::string_view line, std::size_t line_no, const LoadOptions& opts = {}) {
  const detail::LineContext ctx{kUsersFile, line_no};
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    ctx.fail("<record>", std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) ctx.fail("<record>", "expected a JSON object");

  UserRecord u;
  u.id = detail::as_u64(detail::require(j, "id", ctx), "id", ctx);
  if (u.id == 0) ctx.fail("id", "user id must be > 0");
  u.screen_name = detail::as_string(detail::require(j, "screen_name", ctx), "screen_name", ctx);
  u.language = detail::as_string(detail::require(j, "lang", ctx), "lang", ctx);
  u.created_at = detail::as_time(detail::require(j, "created_at", ctx), "created_at", ctx);
  u.followers_count = detail::as_u64(detail::require(j, "followers_count", ctx), "followers_count", ctx);
  u.friends_count = detail::as_u64(detail::require(j, "friends_count", ctx), "friends_count", ctx);
  if (auto it = j.find("label"); it != j.end()) {
    auto label = parse_label(detail::as_string(*it, "label", ctx));
    if (!label) ctx.fail("label", "expected one of bot, real, unknown");
    if (opts.keep_labels) u.label = *label;
  }
  const auto& tweets = detail::require(j, "tweets", ctx);
  if (!tweets.is_array()) ctx.fail("tweets", "expected array");
  u.tweets.reserve(tweets.size());
  for (std::size_t i = 0; i < tweets.size(); ++i) {
    const auto& jt = tweets[i];
    const std::string path = "tweets[" + std::to_string(i) + "]";
    if (!jt.is_object()) ctx.fail(path, "expected object");
    Tweet t;
    t.text = detail::as_string(detail::require(jt, "text", ctx, path), path + ".text", ctx);
    t.timestamp = detail::as_time(detail::require(jt, "ts", ctx, path), path + ".ts", ctx);
    const std::string src = detail::as_string(detail::require(jt, "source", ctx, path), path + ".source", ctx);
    auto parsed = parse_source(src);
    if (!parsed) ctx.fail(path + ".source", "unknown tweet source '" + src + "'");
    t.source = *parsed;
    const bool has_lat = jt.contains("lat"), has_lon = jt.contains("lon");
    if (has_lat != has_lon) ctx.fail(path + (has_lat ? ".lon" : ".lat"), "lat and lon must appear together");
    if (has_lat) {
      GeoPoint p{detail::as_double(jt["lat"], path + ".lat", ctx), detail::as_double(jt["lon"], path + ".lon", ctx)};
      if (p.lat < -90.0 || p.lat > 90.0)
        ctx.fail(path + ".lat", "latitude " + std::to_string(p.lat) + " outside [-90, 90] (user " +
                                    std::to_string(u.id) + ")");
      if (p.lon < -180.0 || p.lon >= 180.0)
        ctx.fail(path + ".lon", "longitude " + std::to_string(p.lon) + " outside [-180, 180) (user " +
                                    std::to_string(u.id) + ")");
      t.geo = p;
    }
    u.tweets.push_back(std::move(t));
  }
  return u;
}

namespace detail {

inline std::ifstream open_in(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot open '" + p.string() + "' for reading");
  return in;
}

inline std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + p.string() + "' for writing");
  return out;
}

inline void close_checked(std::ofstream& out, const fs::path& p) {
  out.close();
  if (!out) throw IoError("failed writing '" + p.string() + "'");
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline UserId parse_id(std::string_view s, std::string_view field, const LineContext& ctx) {
  UserId v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) ctx.fail(field, "expected decimal id");
  return v;
}

}  // namespace detail

inline FollowGraph load_edges(const fs::path& file) {
  auto in = detail::open_in(file);
  FollowGraph g;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view sv = detail::trim(line);
    if (sv.empty()) continue;
    if (line_no == 1 && sv == kEdgesHeader) continue;
    const detail::LineContext ctx{kEdgesFile, line_no};
    const auto tab = sv.find('\t');
    if (tab == std::string_view::npos) ctx.fail("<line>", "expected two tab-separated ids");
    g.edges.push_back({detail::parse_id(detail::trim(sv.substr(0, tab)), "follower", ctx),
                       detail::parse_id(detail::trim(sv.substr(tab + 1)), "friend", ctx)});
  }
  return g;
}

inline std::map<std::string, std::string> load_meta(const fs::path& file) {
  std::map<std::string, std::string> meta;
  if (!fs::exists(file)) return meta;
  auto in = detail::open_in(file);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view sv = detail::trim(line);
    if (sv.empty() || sv.front() == '#') continue;
    const auto eq = sv.find('=');
    if (eq == std::string_view::npos)
      detail::LineContext{kMetaFile, line_no}.fail("<line>", "expected 'key = value'");
    std::string key(detail::trim(sv.substr(0, eq)));
    std::string value(detail::trim(sv.substr(eq + 1)));
    if (key == "format") continue;
    meta[std::move(key)] = std::move(value);
  }
  return meta;
}

/// Reads a dataset directory, streaming users one line at a time. Throws
/// DatasetError naming file, line and field for malformed input, and for any
/// validate_dataset violation.
inline Dataset load_dataset(const fs::path& dir, const LoadOptions& opts = {}) {
  if (!fs::is_directory(dir)) throw IoError("dataset directory '" + dir.string() + "' does not exist");
  Dataset ds;
  {
    auto in = detail::open_in(dir / kUsersFile);
    std::string line;
    std::size_t line_no = 0;
    std::unordered_set<UserId> ids;
    while (std::getline(in, line)) {
      ++line_no;
      if (detail::trim(line).empty()) continue;
      UserRecord u = user_from_json_line(line, line_no, opts);
      if (!ids.insert(u.id).second)
        detail::LineContext{kUsersFile, line_no}.fail("id", "duplicate user_id " + std::to_string(u.id));
      ds.users.push_back(std::move(u));
    }
  }
  ds.graph = load_edges(dir / kEdgesFile);
  ds.meta = load_meta(dir / kMetaFile);
  if (auto violations = validate_dataset(ds); !violations.empty()) {
    const Violation& v = violations.front();
    throw DatasetError("dataset '" + dir.string() + "' invalid: user " + std::to_string(v.user_id) + ": " + v.rule +
                       ": " + v.detail + " (" + std::to_string(violations.size()) + " violation(s))");
  }
  return ds;
}

inline void save_dataset(const Dataset& ds, const fs::path& dir) {
  if (auto violations = validate_dataset(ds); !violations.empty()) {
    const Violation& v = violations.front();
    throw DatasetError("refusing to save invalid dataset: user " + std::to_string(v.user_id) + ": " + v.rule + ": " +
                       v.detail);
  }
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());

  std::vector<const UserRecord*> order;
  order.reserve(ds.users.size());
  for (const UserRecord& u : ds.users) order.push_back(&u);
  std::sort(order.begin(), order.end(), [](const UserRecord* a, const UserRecord* b) { return a->id < b->id; });
  {
    const fs::path p = dir / kUsersFile;
    auto out = detail::open_out(p);
    for (const UserRecord* u : order) out << user_to_json_line(*u) << '\n';
    detail::close_checked(out, p);
  }
  {
    std::vector<FollowEdge> edges = ds.graph.edges;
    std::sort(edges.begin(), edges.end());
    const fs::path p = dir / kEdgesFile;
    auto out = detail::open_out(p);
    out << kEdgesHeader << '\n';
    for (const FollowEdge& e : edges) out << e.follower << '\t' << e.friend_id << '\n';
    detail::close_checked(out, p);
  }
  {
    const fs::path p = dir / kMetaFile;
    auto out = detail::open_out(p);
    out << "format = \"" << kFormatTag << "\"\n";
    for (const auto& [k, v] : ds.meta) out << k << " = " << v << '\n';
    detail::close_checked(out, p);
  }
}

}  // namespace botweave
