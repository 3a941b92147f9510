#pragma once

// Sectioned key/value configuration files:
//
//   seed = 7
//   [generate]
//   n_bots = 5000
//   rect_a = [25, 50, -125, -65]
//
// Values are numbers, booleans, double-quoted strings or one-line arrays of
// those. '#' starts a comment outside quotes. Environment variables named
// BOTWEAVE_<SECTION>_<KEY> (or BOTWEAVE_<KEY> at top level) override the file.
// Keys nobody asks for are rejected.

#include <cctype>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "botweave/errors.hpp"

namespace botweave {

class Config {
 public:
  static Config parse(std::string_view text, std::string origin = "config") {
    Config c;
    c.origin_ = std::move(origin);
    std::string section;
    std::size_t line_no = 0;
    std::istringstream in{std::string(text)};
    std::string raw;
    while (std::getline(in, raw)) {
      ++line_no;
      const std::string line = trim(strip_comment(raw));
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']') throw c.error(line_no, "unterminated section header");
        section = trim(line.substr(1, line.size() - 2));
        if (section.empty() || !is_ident(section)) throw c.error(line_no, "invalid section name");
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw c.error(line_no, "expected 'key = value'");
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (!is_ident(key)) throw c.error(line_no, "invalid key '" + key + "'");
      if (value.empty()) throw c.error(line_no, "missing value for '" + key + "'");
      const std::string full = section.empty() ? key : section + "." + key;
      if (c.entries_.contains(full)) throw c.error(line_no, "duplicate key '" + full + "'");
      c.entries_[full] = {value, line_no};
    }
    return c;
  }

  static Config load(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file " + file.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), file.string());
  }

  /// Environment variable consulted for `full_key` ("section.key" or "key").
  static std::string env_name(std::string_view full_key) {
    std::string name = "BOTWEAVE_";
    for (char ch : full_key) name += ch == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    return name;
  }

  std::optional<std::string> raw(const std::string& full_key) {
    known_.insert(full_key);
    if (const char* env = std::getenv(env_name(full_key).c_str())) return std::string(env);
    auto it = entries_.find(full_key);
    if (it == entries_.end()) return std::nullopt;
    return it->second.value;
  }

  std::string get_string(const std::string& key, std::string fallback) {
    auto v = raw(key);
    return v ? unquote(*v, key) : fallback;
  }
  double get_double(const std::string& key, double fallback) {
    auto v = raw(key);
    return v ? to_double(*v, key) : fallback;
  }
  std::uint64_t get_uint(const std::string& key, std::uint64_t fallback) {
    auto v = raw(key);
    return v ? to_uint(*v, key) : fallback;
  }
  bool get_bool(const std::string& key, bool fallback) {
    auto v = raw(key);
    if (!v) return fallback;
    if (*v == "true") return true;
    if (*v == "false") return false;
    throw ConfigError("config key '" + key + "': expected true or false, got '" + *v + "'");
  }
  std::vector<double> get_doubles(const std::string& key, std::vector<double> fallback) {
    auto v = raw(key);
    if (!v) return fallback;
    std::vector<double> out;
    for (const auto& item : split_array(*v, key)) out.push_back(to_double(item, key));
    return out;
  }
  std::vector<std::string> get_strings(const std::string& key, std::vector<std::string> fallback) {
    auto v = raw(key);
    if (!v) return fallback;
    std::vector<std::string> out;
    for (const auto& item : split_array(*v, key)) out.push_back(unquote(item, key));
    return out;
  }

  /// Throws on the first file key that no getter asked for.
  void reject_unknown() const {
    for (const auto& [key, e] : entries_)
      if (!known_.contains(key)) throw error(e.line, "unknown key '" + key + "'");
  }

 private:
  struct Entry {
    std::string value;
    std::size_t line = 0;
  };

  ConfigError error(std::size_t line, const std::string& why) const {
    return ConfigError(origin_ + ":" + std::to_string(line) + ": " + why);
  }

  static std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
  }

  static std::string strip_comment(std::string_view s) {
    bool quoted = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] == '\\' && quoted) {
        ++i;
        continue;
      }
      if (s[i] == '"') quoted = !quoted;
      if (s[i] == '#' && !quoted) return std::string(s.substr(0, i));
    }
    return std::string(s);
  }

  static bool is_ident(std::string_view s) {
    if (s.empty()) return false;
    for (char ch : s)
      if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '_' && ch != '-') return false;
    return true;
  }

  static std::string unquote(const std::string& v, const std::string& key) {
    if (v.size() >= 2 && v.front() == '"' && v.back() == '"') {
      std::string out;
      for (std::size_t i = 1; i + 1 < v.size(); ++i) {
        if (v[i] == '\\' && i + 2 < v.size()) ++i;
        out += v[i];
      }
      return out;
    }
    if (v.find_first_of("\"[]") != std::string::npos)
      throw ConfigError("config key '" + key + "': malformed string " + v);
    return v;
  }

  static double to_double(const std::string& v, const std::string& key) {
    try {
      std::size_t used = 0;
      const double d = std::stod(v, &used);
      if (used == v.size()) return d;
    } catch (const std::exception&) {
    }
    throw ConfigError("config key '" + key + "': expected a number, got '" + v + "'");
  }

  static std::uint64_t to_uint(const std::string& v, const std::string& key) {
    const double d = to_double(v, key);
    if (d < 0 || d != static_cast<double>(static_cast<std::uint64_t>(d)))
      throw ConfigError("config key '" + key + "': expected a non-negative integer, got '" + v + "'");
    return static_cast<std::uint64_t>(d);
  }

  static std::vector<std::string> split_array(const std::string& v, const std::string& key) {
    if (v.size() < 2 || v.front() != '[' || v.back() != ']')
      throw ConfigError("config key '" + key + "': expected an array, got '" + v + "'");
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 1; i + 1 < v.size(); ++i) {
      const char ch = v[i];
      if (ch == '"') quoted = !quoted;
      if (ch == ',' && !quoted) {
        out.push_back(trim(cur));
        cur.clear();
        continue;
      }
      cur += ch;
    }
    if (!trim(cur).empty() || !out.empty()) out.push_back(trim(cur));
    for (const auto& item : out)
      if (item.empty()) throw ConfigError("config key '" + key + "': empty array element");
    return out;
  }

  std::string origin_;
  std::map<std::string, Entry> entries_;
  std::set<std::string> known_;
};

}  // namespace botweave
