#pragma once

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <string>
#include <vector>

#include "botweave/corpus.hpp"
#include "botweave/synth_gen.hpp"

namespace botweave::testing {

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("botweave-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline const QuoteCorpus& bot_corpus() {
  static const QuoteCorpus c = load_corpus(default_bot_corpus_path());
  return c;
}

inline const std::vector<QuoteCorpus>& real_corpora() {
  static const std::vector<QuoteCorpus> c = load_corpus_dir(default_real_corpus_dir());
  return c;
}

inline GenParams small_params(std::size_t n_bots = 300, std::size_t n_real = 400, std::uint64_t seed = 7) {
  GenParams p;
  p.seed = seed;
  p.n_bots = n_bots;
  p.n_real = n_real;
  p.real_tweets_mean = 20;
  return p;
}

inline Dataset small_dataset(std::size_t n_bots = 300, std::size_t n_real = 400, std::uint64_t seed = 7) {
  return generate(small_params(n_bots, n_real, seed), bot_corpus(), real_corpora(), 2);
}

}  // namespace botweave::testing
