#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
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

struct Chunk {
  std::string chunk_id;  // "<doc_id>#<index>"
  std::string doc_id;
  std::string text;
  std::uint32_t span_start = 0;  // first word of the chunk within the doc
  std::uint32_t span_len = 0;
};

// Sliding-window chunking over whitespace words. Chunk boundaries are byte
// ranges of the original text: with overlap 0 consecutive chunks butt up
// against each other (separators included), so their concatenation
// reconstructs the document exactly.
inline std::vector<Chunk> chunk_corpus(const Corpus& corpus,
                                       std::size_t chunk_size,
                                       std::size_t overlap) {
  if (chunk_size == 0) throw Error("chunk_size must be >= 1");
  if (overlap >= chunk_size) throw Error("overlap must be < chunk_size");
  const std::size_t stride = chunk_size - overlap;

  std::vector<Chunk> chunks;
  for (const auto& doc : corpus.documents) {
    const std::string& text = doc.text;
    // byte offsets of each word
    std::vector<std::pair<std::size_t, std::size_t>> words;
    {
      std::size_t i = 0;
      while (i < text.size()) {
        while (i < text.size() && is_space_byte(text[i])) ++i;
        std::size_t begin = i;
        while (i < text.size() && !is_space_byte(text[i])) ++i;
        if (i > begin) words.emplace_back(begin, i);
      }
    }
    const std::size_t n = words.size();
    if (n == 0) {
      chunks.push_back({doc.id + "#0", doc.id, text, 0, 0});
      continue;
    }
    std::size_t index = 0;
    for (std::size_t start = 0;; start += stride, ++index) {
      const std::size_t end = std::min(start + chunk_size, n);
      const bool last = start + chunk_size >= n;
      std::size_t char_begin = index == 0 ? 0 : words[start].first;
      std::size_t char_end;
      if (last) {
        char_end = text.size();
      } else if (overlap == 0) {
        char_end = words[start + stride].first;
      } else {
        char_end = words[end - 1].second;
      }
      Chunk c;
      c.chunk_id = doc.id + "#" + std::to_string(index);
      c.doc_id = doc.id;
      c.text = text.substr(char_begin, char_end - char_begin);
      c.span_start = static_cast<std::uint32_t>(start);
      c.span_len = static_cast<std::uint32_t>(end - start);
      chunks.push_back(std::move(c));
      if (last) break;
    }
  }
  return chunks;
}

// ---------------------------------------------------------------------------
// Okapi-style lexical index
// ---------------------------------------------------------------------------

struct ScoredChunk {
  std::string chunk_id;
  double score = 0.0;
};

class LexicalIndex {
 public:
  LexicalIndex() = default;
  LexicalIndex(std::vector<Chunk> chunks, double k1 = 1.2, double b = 0.75)
      : chunks_(std::move(chunks)), k1_(k1), b_(b) {
    lengths_.reserve(chunks_.size());
    for (std::size_t i = 0; i < chunks_.size(); ++i) {
      auto terms = content_words(chunks_[i].text);
      lengths_.push_back(terms.size());
      total_length_ += terms.size();
      std::unordered_map<std::string, std::uint32_t> tf;
      for (auto& t : terms) ++tf[t];
      for (auto& [term, count] : tf) {
        postings_[term].emplace_back(i, count);
      }
    }
  }

  std::size_t chunk_count() const { return chunks_.size(); }
  double k1() const { return k1_; }
  double b() const { return b_; }
  const std::vector<Chunk>& chunks() const { return chunks_; }

  const Chunk* find_chunk(std::string_view chunk_id) const {
    for (const auto& c : chunks_) {
      if (c.chunk_id == chunk_id) return &c;
    }
    return nullptr;
  }

  std::size_t document_frequency(const std::string& term) const {
    auto it = postings_.find(term);
    return it == postings_.end() ? 0 : it->second.size();
  }

  double average_length() const {
    return chunks_.empty() ? 0.0
                           : static_cast<double>(total_length_) /
                                 static_cast<double>(chunks_.size());
  }

  // Top-k chunks by Okapi-style score, descending; ties broken by chunk_id.
  // Zero-scoring chunks never appear, so a query with no indexed terms
  // returns nothing. The rarity weight uses document frequency alone
  // (no corpus-size term), so a chunk's score depends only on its own
  // statistics, the query terms' df, and the average length.
  std::vector<ScoredChunk> retrieve(std::string_view query, std::size_t k) const {
    if (chunks_.empty()) throw EmptyIndex();
    if (k < 1) throw Error("k must be >= 1");

    std::vector<std::string> terms = content_words(query);
    std::sort(terms.begin(), terms.end());
    terms.erase(std::unique(terms.begin(), terms.end()), terms.end());

    const double avg = average_length();
    std::unordered_map<std::size_t, double> scores;
    for (const auto& term : terms) {
      auto it = postings_.find(term);
      if (it == postings_.end()) continue;
      const double df = static_cast<double>(it->second.size());
      const double idf = std::log(1.0 + 1.0 / (df + 0.5));
      for (const auto& [chunk_idx, tf] : it->second) {
        const double len = static_cast<double>(lengths_[chunk_idx]);
        const double norm = k1_ * (1.0 - b_ + b_ * len / avg);
        scores[chunk_idx] +=
            idf * (static_cast<double>(tf) * (k1_ + 1.0)) /
            (static_cast<double>(tf) + norm);
      }
    }

    std::vector<std::pair<std::size_t, double>> hits(scores.begin(), scores.end());
    std::sort(hits.begin(), hits.end(), [&](const auto& a, const auto& b2) {
      if (a.second != b2.second) return a.second > b2.second;
      return chunks_[a.first].chunk_id < chunks_[b2.first].chunk_id;
    });
    if (hits.size() > k) hits.resize(k);

    std::vector<ScoredChunk> out;
    out.reserve(hits.size());
    for (const auto& [idx, score] : hits) {
      out.push_back({chunks_[idx].chunk_id, score});
    }
    return out;
  }

 private:
  std::vector<Chunk> chunks_;
  double k1_ = 1.2;
  double b_ = 0.75;
  std::vector<std::size_t> lengths_;
  std::size_t total_length_ = 0;
  std::map<std::string, std::vector<std::pair<std::size_t, std::uint32_t>>> postings_;
};

// ---------------------------------------------------------------------------
// Persistence: one binary file. Layout: u32-LE header length, JSON header
// (parameters + chunk count), msgpack chunk payload. Statistics are rebuilt
// on load, so the file stays small and version-stable.
// ---------------------------------------------------------------------------

inline void save_index(const LexicalIndex& index, const std::filesystem::path& path) {
  nlohmann::json header;
  header["format"] = "lexidx1";
  header["k1"] = index.k1();
  header["b"] = index.b();
  header["chunk_count"] = index.chunk_count();
  const std::string header_bytes = header.dump();

  nlohmann::json payload = nlohmann::json::array();
  for (const auto& c : index.chunks()) {
    payload.push_back({{"chunk_id", c.chunk_id},
                       {"doc_id", c.doc_id},
                       {"text", c.text},
                       {"span_start", c.span_start},
                       {"span_len", c.span_len}});
  }
  const std::vector<std::uint8_t> body = nlohmann::json::to_msgpack(payload);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  const std::uint32_t len = static_cast<std::uint32_t>(header_bytes.size());
  char lenbuf[4] = {static_cast<char>(len & 0xff), static_cast<char>((len >> 8) & 0xff),
                    static_cast<char>((len >> 16) & 0xff),
                    static_cast<char>((len >> 24) & 0xff)};
  out.write(lenbuf, 4);
  out.write(header_bytes.data(), static_cast<std::streamsize>(header_bytes.size()));
  out.write(reinterpret_cast<const char*>(body.data()),
            static_cast<std::streamsize>(body.size()));
  if (!out) throw IoError(path.string(), "write failed");
}

inline LexicalIndex load_index(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open");
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  if (bytes.size() < 4) throw IoError(path.string(), "truncated index");
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::uint32_t len = static_cast<std::uint32_t>(p[0]) |
                            (static_cast<std::uint32_t>(p[1]) << 8) |
                            (static_cast<std::uint32_t>(p[2]) << 16) |
                            (static_cast<std::uint32_t>(p[3]) << 24);
  if (bytes.size() < 4 + len) throw IoError(path.string(), "truncated index header");
  nlohmann::json header = nlohmann::json::parse(bytes.substr(4, len), nullptr, false);
  if (header.is_discarded() || header.value("format", "") != "lexidx1") {
    throw IoError(path.string(), "not a lexical index file");
  }
  nlohmann::json payload = nlohmann::json::from_msgpack(
      bytes.begin() + 4 + static_cast<std::ptrdiff_t>(len), bytes.end());
  std::vector<Chunk> chunks;
  chunks.reserve(payload.size());
  for (const auto& j : payload) {
    chunks.push_back({j.at("chunk_id").get<std::string>(),
                      j.at("doc_id").get<std::string>(),
                      j.at("text").get<std::string>(),
                      j.at("span_start").get<std::uint32_t>(),
                      j.at("span_len").get<std::uint32_t>()});
  }
  LexicalIndex index(std::move(chunks), header.value("k1", 1.2),
                     header.value("b", 0.75));
  if (index.chunk_count() != header.value("chunk_count", std::size_t{0})) {
    throw IoError(path.string(), "chunk count mismatch");
  }
  return index;
}

}  // namespace benchtop
