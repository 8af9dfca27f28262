#pragma once

#include <unistd.h>

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "benchtop/corpus.hpp"
#include "benchtop/hashing.hpp"

namespace testutil {

// Scratch directory, removed on scope exit.
struct TempDir {
  std::filesystem::path path;

  TempDir() {
    static std::atomic<std::uint64_t> counter{0};
    path = std::filesystem::temp_directory_path() /
           ("benchtop_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter.fetch_add(1)));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::filesystem::path file(const std::string& name) const { return path / name; }
};

inline void write_file(const std::filesystem::path& p, const std::string& body) {
  std::ofstream out(p, std::ios::binary);
  out << body;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

// Deterministic word salad; wordy enough to pass the quality filter.
inline std::vector<std::string> random_words(std::uint64_t seed, std::size_t n,
                                             std::size_t vocab = 600) {
  benchtop::Rng64 rng(seed);
  static const char* stems[] = {"solvent",  "anode",   "cathode", "lithium",
                                "polymer",  "crystal", "thermal", "voltage",
                                "membrane", "kinetic", "organic", "reaction"};
  std::vector<std::string> words;
  words.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::uint64_t k = rng.bounded(vocab);
    words.push_back(std::string(stems[k % 12]) + std::to_string(k));
  }
  return words;
}

inline std::string join_words(const std::vector<std::string>& words,
                              std::size_t line_len = 12) {
  std::string text;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i > 0) text.push_back(i % line_len == 0 ? '\n' : ' ');
    text += words[i];
  }
  return text;
}

inline benchtop::Document make_doc(const std::string& id, std::uint64_t seed,
                                   std::size_t n_words) {
  return {id, join_words(random_words(seed, n_words)), benchtop::Source::other, {}};
}

// Independent shingling oracle: the actual window strings, no hashing.
inline std::set<std::string> word_windows(const std::string& text, std::size_t w) {
  std::vector<std::string> words = benchtop::content_words(text);
  std::set<std::string> windows;
  if (words.size() < w) {
    std::string joined;
    for (std::size_t i = 0; i < words.size(); ++i) {
      if (i) joined.push_back(' ');
      joined += words[i];
    }
    windows.insert(joined);
    return windows;
  }
  for (std::size_t i = 0; i + w <= words.size(); ++i) {
    std::string joined;
    for (std::size_t j = i; j < i + w; ++j) {
      if (j > i) joined.push_back(' ');
      joined += words[j];
    }
    windows.insert(joined);
  }
  return windows;
}

inline double exact_window_jaccard(const std::string& a, const std::string& b,
                                   std::size_t w) {
  std::set<std::string> sa = word_windows(a, w);
  std::set<std::string> sb = word_windows(b, w);
  std::size_t inter = 0;
  for (const auto& s : sa) inter += sb.count(s);
  std::size_t uni = sa.size() + sb.size() - inter;
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace testutil
