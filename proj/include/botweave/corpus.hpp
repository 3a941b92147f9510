#pragma once

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "botweave/data_model.hpp"
#include "botweave/errors.hpp"

namespace botweave {

/// Text source that tweets are quoted from. The body is whitespace-normalized
/// and carries no '#' or '@', so quoted windows never contain accidental
/// hashtags or mentions.
struct QuoteCorpus {
  std::string title;
  std::string body;
};

inline constexpr std::size_t kMinCorpusChars = 10 * kMaxTweetCodePoints;

inline std::string normalize_corpus_text(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  for (char c : raw) {
    if (c == '#' || c == '@') continue;
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

inline QuoteCorpus make_corpus(std::string title, std::string_view raw) {
  QuoteCorpus c{std::move(title), normalize_corpus_text(raw)};
  if (c.body.size() < kMinCorpusChars)
    throw ParamError("corpus '" + c.title + "' has " + std::to_string(c.body.size()) + " characters; at least " +
                     std::to_string(kMinCorpusChars) + " required");
  return c;
}

inline QuoteCorpus load_corpus(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw IoError("cannot open corpus '" + file.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return make_corpus(file.stem().string(), ss.str());
}

/// All *.txt files in a directory, in filename order.
inline std::vector<QuoteCorpus> load_corpus_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw IoError("corpus directory '" + dir.string() + "' not found");
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".txt") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  std::vector<QuoteCorpus> out;
  for (const auto& f : files) out.push_back(load_corpus(f));
  if (out.empty()) throw IoError("corpus directory '" + dir.string() + "' has no .txt files");
  return out;
}

#ifdef BOTWEAVE_DATA_DIR
inline std::filesystem::path default_data_dir() { return BOTWEAVE_DATA_DIR; }
#else
inline std::filesystem::path default_data_dir() { return "data"; }
#endif

inline std::filesystem::path default_bot_corpus_path() {
  return default_data_dir() / "corpora" / "bot_lantern_fleet.txt";
}
inline std::filesystem::path default_real_corpus_dir() { return default_data_dir() / "corpora" / "real"; }

}  // namespace botweave
