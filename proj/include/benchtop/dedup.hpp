#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "benchtop/corpus.hpp"
#include "benchtop/errors.hpp"
#include "benchtop/hashing.hpp"
#include "benchtop/parallel.hpp"
#include "benchtop/text.hpp"

namespace benchtop {

// Hashes of overlapping w-word windows; the sets MinHash sketches.
struct ShingleSet {
  std::string doc_id;
  std::vector<std::uint64_t> shingles;  // sorted, unique
};

struct MinHashSignature {
  std::string doc_id;
  std::vector<std::uint64_t> values;  // one minimum per hash-family member
};

struct LshIndex {
  std::size_t bands = 0;
  std::size_t rows_per_band = 0;
  // (band index, band hash) -> doc ids. The explicit band index keeps every
  // document in exactly `bands` buckets even under hash collisions.
  std::map<std::pair<std::uint32_t, std::uint64_t>, std::vector<std::string>> buckets;
};

struct DuplicateClusters {
  std::vector<std::vector<std::string>> clusters;  // each sorted; ≥ 2 members
  std::vector<std::string> survivors;              // parallel to clusters
};

struct DedupParams {
  std::size_t window = 5;         // shingle width in words
  std::size_t signature_width = 128;
  std::size_t bands = 16;
  std::size_t rows = 8;
  double threshold = 0.8;         // signature-similarity verification gate
  std::uint64_t seed = 0;
  std::size_t workers = 1;
};

// ---------------------------------------------------------------------------

// One hash per contiguous w-word window after lowercasing and punctuation
// stripping. Documents shorter than w words collapse to a single whole-text
// shingle so nothing is unsketchable.
inline ShingleSet shingle(const Document& doc, std::size_t w) {
  if (w < 1) throw Error("shingle window must be >= 1");
  std::vector<std::string> words = content_words(doc.text);
  std::vector<std::uint64_t> hashes;
  auto window_hash = [](const std::vector<std::string>& ws, std::size_t begin,
                        std::size_t end) {
    std::string joined;
    for (std::size_t i = begin; i < end; ++i) {
      if (i > begin) joined.push_back(' ');
      joined += ws[i];
    }
    return hash_bytes(joined);
  };
  if (words.size() < w) {
    hashes.push_back(window_hash(words, 0, words.size()));
  } else {
    hashes.reserve(words.size() - w + 1);
    for (std::size_t i = 0; i + w <= words.size(); ++i) {
      hashes.push_back(window_hash(words, i, i + w));
    }
  }
  std::sort(hashes.begin(), hashes.end());
  hashes.erase(std::unique(hashes.begin(), hashes.end()), hashes.end());
  return ShingleSet{doc.id, std::move(hashes)};
}

inline MinHashSignature minhash(const ShingleSet& s, std::size_t k,
                                std::uint64_t seed) {
  if (k < 1) throw Error("signature width must be >= 1");
  if (s.shingles.empty()) throw EmptyShingleSet(s.doc_id);
  MinHashSignature sig;
  sig.doc_id = s.doc_id;
  sig.values.assign(k, ~0ULL);
  for (std::uint64_t x : s.shingles) {
    for (std::size_t i = 0; i < k; ++i) {
      std::uint64_t h = keyed_hash(x, seed, i);
      if (h < sig.values[i]) sig.values[i] = h;
    }
  }
  return sig;
}

// Fraction of agreeing coordinates: an unbiased Jaccard estimate.
inline double signature_similarity(const MinHashSignature& a,
                                   const MinHashSignature& b) {
  if (a.values.size() != b.values.size() || a.values.empty()) {
    throw Error("signatures have mismatched widths");
  }
  std::size_t equal = 0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    if (a.values[i] == b.values[i]) ++equal;
  }
  return static_cast<double>(equal) / static_cast<double>(a.values.size());
}

// Exact Jaccard over shingle sets (sorted-merge intersection).
inline double jaccard(const ShingleSet& a, const ShingleSet& b) {
  std::size_t inter = 0, i = 0, j = 0;
  while (i < a.shingles.size() && j < b.shingles.size()) {
    if (a.shingles[i] == b.shingles[j]) {
      ++inter; ++i; ++j;
    } else if (a.shingles[i] < b.shingles[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  std::size_t uni = a.shingles.size() + b.shingles.size() - inter;
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

inline std::uint64_t band_key(const MinHashSignature& sig, std::size_t band,
                              std::size_t rows) {
  std::uint64_t h = mix64(0x1b873593ULL + band);
  for (std::size_t i = band * rows; i < (band + 1) * rows; ++i) {
    h = mix64(h ^ sig.values[i]);
  }
  return h;
}

inline LshIndex build_lsh(const std::vector<MinHashSignature>& signatures,
                          std::size_t bands, std::size_t rows) {
  LshIndex index;
  index.bands = bands;
  index.rows_per_band = rows;
  for (const auto& sig : signatures) {
    if (bands * rows != sig.values.size()) {
      throw BandShapeMismatch(bands, rows, sig.values.size());
    }
    for (std::size_t b = 0; b < bands; ++b) {
      index.buckets[{static_cast<std::uint32_t>(b), band_key(sig, b, rows)}]
          .push_back(sig.doc_id);
    }
  }
  return index;
}

// Unordered pairs of doc ids sharing at least one bucket, sorted and unique.
inline std::vector<std::pair<std::string, std::string>> candidate_pairs(
    const LshIndex& index) {
  std::vector<std::pair<std::string, std::string>> pairs;
  for (const auto& [key, ids] : index.buckets) {
    for (std::size_t i = 0; i < ids.size(); ++i) {
      for (std::size_t j = i + 1; j < ids.size(); ++j) {
        auto p = std::minmax(ids[i], ids[j]);
        pairs.emplace_back(p.first, p.second);
      }
    }
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  return pairs;
}

// ---------------------------------------------------------------------------

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void merge(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);  // smaller index wins, keeps roots stable
    parent_[b] = a;
  }

 private:
  std::vector<std::size_t> parent_;
};

// ---------------------------------------------------------------------------

// Sketch, band, verify, cluster. Candidates from LSH are verified against
// full-signature similarity before union-find, so one banding fluke cannot
// chain unrelated documents into a cluster. Survivor per cluster is the
// lexicographically smallest id. Result is identical for any worker count.
inline std::pair<Corpus, DuplicateClusters> dedup_corpus(const Corpus& corpus,
                                                         const DedupParams& params) {
  if (params.bands * params.rows != params.signature_width) {
    throw BandShapeMismatch(params.bands, params.rows, params.signature_width);
  }
  if (!(params.threshold > 0.0 && params.threshold <= 1.0)) {
    throw Error("dedup threshold must be in (0, 1]");
  }

  const std::size_t n = corpus.documents.size();
  std::vector<MinHashSignature> signatures(n);
  parallel_for(n, params.workers, [&](std::size_t i) {
    signatures[i] = minhash(shingle(corpus.documents[i], params.window),
                            params.signature_width, params.seed);
  });

  std::unordered_map<std::string, std::size_t> index_of;
  index_of.reserve(n);
  for (std::size_t i = 0; i < n; ++i) index_of[corpus.documents[i].id] = i;

  LshIndex lsh = build_lsh(signatures, params.bands, params.rows);

  UnionFind uf(n);
  for (const auto& [a, b] : candidate_pairs(lsh)) {
    std::size_t ia = index_of.at(a), ib = index_of.at(b);
    if (signature_similarity(signatures[ia], signatures[ib]) >= params.threshold) {
      uf.merge(ia, ib);
    }
  }

  std::map<std::size_t, std::vector<std::string>> groups;
  for (std::size_t i = 0; i < n; ++i) {
    groups[uf.find(i)].push_back(corpus.documents[i].id);
  }

  DuplicateClusters clusters;
  std::vector<bool> keep(n, true);
  for (auto& [root, members] : groups) {
    if (members.size() < 2) continue;
    std::sort(members.begin(), members.end());
    const std::string& survivor = members.front();
    for (const auto& id : members) {
      if (id != survivor) keep[index_of.at(id)] = false;
    }
    clusters.survivors.push_back(survivor);
    clusters.clusters.push_back(members);
  }
  // groups iterate by root index; present clusters sorted by survivor id
  std::vector<std::size_t> order(clusters.clusters.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return clusters.survivors[a] < clusters.survivors[b];
  });
  DuplicateClusters sorted;
  for (std::size_t i : order) {
    sorted.clusters.push_back(std::move(clusters.clusters[i]));
    sorted.survivors.push_back(std::move(clusters.survivors[i]));
  }

  Corpus survivors;
  for (std::size_t i = 0; i < n; ++i) {
    if (keep[i]) survivors.documents.push_back(corpus.documents[i]);
  }
  return {std::move(survivors), std::move(sorted)};
}

inline void write_clusters_jsonl(const DuplicateClusters& clusters,
                                 const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  for (std::size_t i = 0; i < clusters.clusters.size(); ++i) {
    nlohmann::json j;
    j["survivor"] = clusters.survivors[i];
    j["members"] = clusters.clusters[i];
    out << j.dump() << '\n';
  }
}

}  // namespace benchtop
