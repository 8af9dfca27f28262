#pragma once

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "benchtop/corpus.hpp"
#include "benchtop/errors.hpp"
#include "benchtop/text.hpp"

namespace benchtop {

// Heuristic quality thresholds. Any violated rule rejects the document.
struct FilterConfig {
  std::size_t min_words = 50;
  std::size_t max_words = 500000;
  double max_top_2gram_fraction = 0.20;
  double max_duplicate_line_fraction = 0.30;
  double max_nonalpha_fraction = 0.40;
  double min_mean_word_length = 2.0;
  double max_mean_word_length = 12.0;

  void validate() const {
    if (min_words >= max_words) throw Error("min_words must be < max_words");
    if (min_mean_word_length >= max_mean_word_length) {
      throw Error("mean word length bounds inverted");
    }
    if (max_top_2gram_fraction <= 0 || max_duplicate_line_fraction < 0 ||
        max_nonalpha_fraction <= 0) {
      throw Error("fraction thresholds must be positive");
    }
  }
};

struct RuleHit {
  std::string rule;   // which rule fired
  double measured;    // the statistic that violated it
  double threshold;
};

struct FilterVerdict {
  std::string doc_id;
  bool kept = true;
  std::vector<RuleHit> reasons;  // empty iff kept
};

// ---------------------------------------------------------------------------

namespace detail {

inline double top_2gram_fraction(const std::vector<std::string_view>& words) {
  if (words.size() < 2) return 0.0;
  std::unordered_map<std::string, std::size_t> counts;
  std::size_t best = 0;
  for (std::size_t i = 0; i + 1 < words.size(); ++i) {
    std::string key;
    key.reserve(words[i].size() + words[i + 1].size() + 1);
    key.append(words[i]);
    key.push_back(' ');
    key.append(words[i + 1]);
    best = std::max(best, ++counts[key]);
  }
  return static_cast<double>(best) / static_cast<double>(words.size() - 1);
}

inline double duplicate_line_fraction(std::string_view text) {
  std::size_t total = 0;
  std::unordered_map<std::string, bool> seen;
  std::size_t unique = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos
                                                 ? std::string_view::npos
                                                 : nl - pos);
    if (!line.empty()) {
      ++total;
      if (seen.emplace(std::string(line), true).second) ++unique;
    }
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  if (total == 0) return 0.0;
  return static_cast<double>(total - unique) / static_cast<double>(total);
}

inline double nonalpha_fraction(std::string_view text) {
  std::size_t considered = 0, nonalpha = 0;
  for (char ch : text) {
    unsigned char c = static_cast<unsigned char>(ch);
    if (is_space_byte(ch)) continue;
    ++considered;
    if (!std::isalpha(c) && c < 0x80) ++nonalpha;  // multibyte counts as alpha
  }
  if (considered == 0) return 0.0;
  return static_cast<double>(nonalpha) / static_cast<double>(considered);
}

}  // namespace detail

// Pure function of (text, cfg). Every violated rule is reported together
// with the measured statistic.
inline FilterVerdict score_document(const Document& doc, const FilterConfig& cfg) {
  FilterVerdict v;
  v.doc_id = doc.id;
  auto hit = [&](const char* rule, double measured, double threshold) {
    v.reasons.push_back({rule, measured, threshold});
  };

  const std::vector<std::string_view> words = split_words(doc.text);
  const double word_count = static_cast<double>(words.size());

  if (words.size() < cfg.min_words) {
    hit("min_words", word_count, static_cast<double>(cfg.min_words));
  }
  if (words.size() > cfg.max_words) {
    hit("max_words", word_count, static_cast<double>(cfg.max_words));
  }

  double top2 = detail::top_2gram_fraction(words);
  if (top2 > cfg.max_top_2gram_fraction) {
    hit("top_2gram_fraction", top2, cfg.max_top_2gram_fraction);
  }

  double dup = detail::duplicate_line_fraction(doc.text);
  if (dup > cfg.max_duplicate_line_fraction) {
    hit("duplicate_line_fraction", dup, cfg.max_duplicate_line_fraction);
  }

  double nonalpha = detail::nonalpha_fraction(doc.text);
  if (nonalpha > cfg.max_nonalpha_fraction) {
    hit("nonalpha_fraction", nonalpha, cfg.max_nonalpha_fraction);
  }

  if (!words.empty()) {
    std::size_t chars = 0;
    for (auto w : words) chars += w.size();
    double mean_len = static_cast<double>(chars) / word_count;
    if (mean_len < cfg.min_mean_word_length) {
      hit("mean_word_length_low", mean_len, cfg.min_mean_word_length);
    }
    if (mean_len > cfg.max_mean_word_length) {
      hit("mean_word_length_high", mean_len, cfg.max_mean_word_length);
    }
  }

  v.kept = v.reasons.empty();
  return v;
}

// Kept documents in id order plus one verdict per input document.
inline std::pair<Corpus, std::vector<FilterVerdict>> filter_corpus(
    const Corpus& corpus, const FilterConfig& cfg) {
  cfg.validate();
  Corpus kept;
  std::vector<FilterVerdict> verdicts;
  verdicts.reserve(corpus.documents.size());
  for (const auto& doc : corpus.documents) {
    verdicts.push_back(score_document(doc, cfg));
    if (verdicts.back().kept) kept.documents.push_back(doc);
  }
  return {std::move(kept), std::move(verdicts)};
}

// ---------------------------------------------------------------------------
// Plain-text config: `key = value` lines, `#` comments.
// ---------------------------------------------------------------------------

inline FilterConfig load_filter_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path.string(), "cannot open");
  FilterConfig cfg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    std::size_t eq = s.find('=');
    if (eq == std::string::npos) {
      throw MalformedRecord(line_no, "expected key = value");
    }
    std::string key = trim(s.substr(0, eq));
    std::string value = trim(s.substr(eq + 1));
    try {
      if (key == "min_words") cfg.min_words = std::stoull(value);
      else if (key == "max_words") cfg.max_words = std::stoull(value);
      else if (key == "max_top_2gram_fraction") cfg.max_top_2gram_fraction = std::stod(value);
      else if (key == "max_duplicate_line_fraction") cfg.max_duplicate_line_fraction = std::stod(value);
      else if (key == "max_nonalpha_fraction") cfg.max_nonalpha_fraction = std::stod(value);
      else if (key == "min_mean_word_length") cfg.min_mean_word_length = std::stod(value);
      else if (key == "max_mean_word_length") cfg.max_mean_word_length = std::stod(value);
      else throw MalformedRecord(line_no, "unknown key: " + key);
    } catch (const std::invalid_argument&) {
      throw MalformedRecord(line_no, "bad numeric value: " + value);
    }
  }
  cfg.validate();
  return cfg;
}

inline void write_verdicts_jsonl(const std::vector<FilterVerdict>& verdicts,
                                 const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  for (const auto& v : verdicts) {
    nlohmann::json j;
    j["doc_id"] = v.doc_id;
    j["kept"] = v.kept;
    auto reasons = nlohmann::json::array();
    for (const auto& r : v.reasons) {
      reasons.push_back({{"rule", r.rule}, {"measured", r.measured}, {"threshold", r.threshold}});
    }
    j["reasons"] = reasons;
    out << j.dump() << '\n';
  }
}

}  // namespace benchtop
