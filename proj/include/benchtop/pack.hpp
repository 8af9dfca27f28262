#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "benchtop/corpus.hpp"
#include "benchtop/errors.hpp"
#include "benchtop/tokenizer.hpp"

namespace benchtop {

struct TokenCounts {
  std::map<std::string, std::size_t> per_doc;
  std::size_t total = 0;
};

inline TokenCounts count_tokens(const Corpus& corpus, Tokenizer& tok) {
  TokenCounts counts;
  for (const auto& doc : corpus.documents) {
    std::size_t n = tok.encode(doc.text).size();
    counts.per_doc[doc.id] = n;
    counts.total += n;
  }
  return counts;
}

// Row slice attribution. doc_id is a real document id, or "SEP" for a
// separator token, or "PAD" for padding; spans tile every row completely.
struct BoundarySpan {
  std::string doc_id;
  std::uint32_t start = 0;  // position within the row
  std::uint32_t end = 0;    // exclusive
};

struct PackedShard {
  std::uint32_t seq_len = 0;
  std::uint32_t vocab_size = 0;
  std::vector<std::vector<TokenId>> rows;            // each exactly seq_len
  std::vector<std::vector<BoundarySpan>> boundaries;  // parallel to rows
};

// ---------------------------------------------------------------------------

// Greedy in-order packing: encode documents in id order, append a separator
// after each one, chop the stream into seq_len rows, pad the tail. With
// split_long=false a document never straddles a row boundary (rows are
// padded out instead) and anything longer than one row is an error.
inline PackedShard pack(const Corpus& corpus, Tokenizer& tok,
                        std::uint32_t seq_len, bool split_long = true) {
  if (seq_len < 2) throw Error("seq_len must be >= 2");
  const SpecialIds sp = tok.specials();

  PackedShard shard;
  shard.seq_len = seq_len;

  std::vector<TokenId> stream;
  // (doc_id, start, end) in stream coordinates; separators and implicit pads
  // are attributed during row slicing
  struct StreamSpan {
    std::string id;
    std::size_t start, end;
  };
  std::vector<StreamSpan> spans;

  for (const auto& doc : corpus.documents) {
    std::vector<TokenId> ids = tok.encode(doc.text);
    if (!split_long && ids.size() > seq_len) throw DocumentLongerThanWindow(doc.id);
    if (!split_long) {
      std::size_t used = stream.size() % seq_len;
      if (used != 0 && used + ids.size() > seq_len) {
        std::size_t pad_to = stream.size() + (seq_len - used);
        spans.push_back({"PAD", stream.size(), pad_to});
        stream.resize(pad_to, sp.pad);
      }
    }
    spans.push_back({doc.id, stream.size(), stream.size() + ids.size()});
    stream.insert(stream.end(), ids.begin(), ids.end());
    spans.push_back({"SEP", stream.size(), stream.size() + 1});
    stream.push_back(sp.doc_sep);
  }

  if (stream.empty()) {
    shard.vocab_size = tok.vocab_size();
    return shard;
  }

  const std::size_t row_count = (stream.size() + seq_len - 1) / seq_len;
  if (stream.size() < row_count * seq_len) {
    spans.push_back({"PAD", stream.size(), row_count * seq_len});
    stream.resize(row_count * seq_len, sp.pad);
  }

  shard.rows.reserve(row_count);
  shard.boundaries.reserve(row_count);
  std::size_t span_idx = 0;
  for (std::size_t r = 0; r < row_count; ++r) {
    const std::size_t lo = r * seq_len;
    const std::size_t hi = lo + seq_len;
    shard.rows.emplace_back(stream.begin() + static_cast<std::ptrdiff_t>(lo),
                            stream.begin() + static_cast<std::ptrdiff_t>(hi));
    std::vector<BoundarySpan> row_spans;
    while (span_idx < spans.size() && spans[span_idx].start < hi) {
      const auto& s = spans[span_idx];
      row_spans.push_back({s.id,
                           static_cast<std::uint32_t>(std::max(s.start, lo) - lo),
                           static_cast<std::uint32_t>(std::min(s.end, hi) - lo)});
      if (s.end <= hi) {
        ++span_idx;
      } else {
        break;  // span continues into the next row
      }
    }
    shard.boundaries.push_back(std::move(row_spans));
  }

  shard.vocab_size = tok.vocab_size();
  return shard;
}

// ---------------------------------------------------------------------------
// Shard file: "SPSHARD1" magic, three u32-LE header fields (seq_len,
// row_count, vocab_size), row-major u32-LE token ids, JSON boundary trailer.
// Bit-exact across platforms.
// ---------------------------------------------------------------------------

namespace detail {

constexpr char kShardMagic[8] = {'S', 'P', 'S', 'H', 'A', 'R', 'D', '1'};

inline void put_u32le(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

inline std::uint32_t get_u32le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace detail

inline std::string shard_to_bytes(const PackedShard& shard) {
  std::string out;
  out.append(detail::kShardMagic, sizeof(detail::kShardMagic));
  detail::put_u32le(out, shard.seq_len);
  detail::put_u32le(out, static_cast<std::uint32_t>(shard.rows.size()));
  detail::put_u32le(out, shard.vocab_size);
  for (const auto& row : shard.rows) {
    for (TokenId id : row) detail::put_u32le(out, id);
  }
  nlohmann::json trailer;
  auto rows = nlohmann::json::array();
  for (const auto& row : shard.boundaries) {
    auto spans = nlohmann::json::array();
    for (const auto& s : row) {
      spans.push_back({{"doc_id", s.doc_id}, {"start", s.start}, {"end", s.end}});
    }
    rows.push_back(std::move(spans));
  }
  trailer["boundaries"] = std::move(rows);
  out += trailer.dump();
  return out;
}

inline void write_shard(const PackedShard& shard, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  std::string bytes = shard_to_bytes(shard);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError(path.string(), "write failed");
}

inline PackedShard shard_from_bytes(const std::string& bytes, const std::string& origin) {
  if (bytes.size() < 20 ||
      std::string_view(bytes.data(), 8) != std::string_view(detail::kShardMagic, 8)) {
    throw IoError(origin, "not a shard file");
  }
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  PackedShard shard;
  shard.seq_len = detail::get_u32le(p + 8);
  std::uint32_t row_count = detail::get_u32le(p + 12);
  shard.vocab_size = detail::get_u32le(p + 16);
  std::size_t offset = 20;
  const std::size_t token_bytes =
      static_cast<std::size_t>(row_count) * shard.seq_len * 4;
  if (bytes.size() < offset + token_bytes) throw IoError(origin, "truncated shard");
  shard.rows.resize(row_count);
  for (std::uint32_t r = 0; r < row_count; ++r) {
    auto& row = shard.rows[r];
    row.resize(shard.seq_len);
    for (std::uint32_t c = 0; c < shard.seq_len; ++c) {
      row[c] = detail::get_u32le(p + offset);
      offset += 4;
    }
  }
  nlohmann::json trailer = nlohmann::json::parse(bytes.substr(offset), nullptr, false);
  if (trailer.is_discarded() || !trailer.contains("boundaries")) {
    throw IoError(origin, "bad shard trailer");
  }
  for (const auto& row : trailer["boundaries"]) {
    std::vector<BoundarySpan> spans;
    for (const auto& s : row) {
      spans.push_back({s.at("doc_id").get<std::string>(),
                       s.at("start").get<std::uint32_t>(),
                       s.at("end").get<std::uint32_t>()});
    }
    shard.boundaries.push_back(std::move(spans));
  }
  if (shard.boundaries.size() != shard.rows.size()) {
    throw IoError(origin, "boundary row count mismatch");
  }
  return shard;
}

inline PackedShard read_shard(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open");
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  return shard_from_bytes(bytes, path.string());
}

}  // namespace benchtop
