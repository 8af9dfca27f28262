#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>

#include "benchtop/dedup.hpp"
#include "helpers.hpp"

using namespace benchtop;

namespace {

ShingleSet make_set(const std::string& id, const std::vector<std::uint64_t>& values) {
  ShingleSet s;
  s.doc_id = id;
  s.shingles = values;
  std::sort(s.shingles.begin(), s.shingles.end());
  return s;
}

// Sets with exact |A∩B| = overlap, |A| = |B| = size.
std::pair<ShingleSet, ShingleSet> sets_with_overlap(std::size_t size,
                                                    std::size_t overlap,
                                                    std::uint64_t tag) {
  std::vector<std::uint64_t> a, b;
  for (std::size_t i = 0; i < overlap; ++i) a.push_back(mix64(tag * 1000003 + i));
  b = a;
  for (std::size_t i = 0; i < size - overlap; ++i) {
    a.push_back(mix64((tag + 7777) * 1000033 + i));
    b.push_back(mix64((tag + 9999) * 1000037 + i));
  }
  return {make_set("a", a), make_set("b", b)};
}

}  // namespace

TEST_CASE("shingle window arithmetic", "[dedup]") {
  Document doc{"d", "a b c", Source::other, {}};
  ShingleSet s = shingle(doc, 2);
  CHECK(s.shingles.size() == 2);  // windows = words - w + 1

  Document doc5{"d5", "one two three", Source::other, {}};
  CHECK(shingle(doc5, 5).shingles.size() == 1);  // whole-text fallback
  CHECK(shingle(Document{"e", "", Source::other, {}}, 3).shingles.size() == 1);
}

TEST_CASE("shingling is deterministic and case-insensitive", "[dedup]") {
  Document a{"a", "Solvent stability IN Lithium cells", Source::other, {}};
  Document b{"b", "solvent stability in lithium cells", Source::other, {}};
  for (std::size_t w : {1, 2, 3}) {
    CHECK(shingle(a, w).shingles == shingle(b, w).shingles);
  }
}

TEST_CASE("exact jaccard matches the brute-force window oracle", "[dedup]") {
  std::string ta = "a b c";
  std::string tb = "a b d";
  Document da{"da", ta, Source::other, {}};
  Document db{"db", tb, Source::other, {}};
  double lib = jaccard(shingle(da, 2), shingle(db, 2));
  double oracle = testutil::exact_window_jaccard(ta, tb, 2);
  CHECK(lib == Catch::Approx(1.0 / 3.0));
  CHECK(lib == Catch::Approx(oracle));

  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto wa = testutil::random_words(seed, 80);
    auto wb = testutil::random_words(seed + 100, 80);
    std::string sa = testutil::join_words(wa);
    std::string sb = testutil::join_words(wb);
    double got = jaccard(shingle(Document{"x", sa, Source::other, {}}, 5),
                         shingle(Document{"y", sb, Source::other, {}}, 5));
    CHECK(got == Catch::Approx(testutil::exact_window_jaccard(sa, sb, 5)).margin(1e-12));
  }
}

TEST_CASE("minhash on identical sets estimates exactly one", "[dedup]") {
  auto [a, b] = sets_with_overlap(60, 60, 1);
  auto sa = minhash(a, 128, 0);
  auto sb = minhash(b, 128, 0);
  CHECK(signature_similarity(sa, sb) == 1.0);
}

TEST_CASE("minhash on disjoint sets estimates near zero", "[dedup]") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto [a, b] = sets_with_overlap(50, 0, seed + 3);
    double est = signature_similarity(minhash(a, 128, seed), minhash(b, 128, seed));
    REQUIRE(est <= 0.05);
  }
}

TEST_CASE("minhash estimator concentrates around true jaccard 0.5", "[dedup]") {
  // |A∩B| = 50, |A∪B| = 100
  auto [a, b] = sets_with_overlap(75, 50, 11);
  int within = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    double est = signature_similarity(minhash(a, 128, seed), minhash(b, 128, seed));
    if (std::abs(est - 0.5) <= 0.15) ++within;
  }
  CHECK(within >= 95);
}

TEST_CASE("minhash rejects empty shingle sets", "[dedup]") {
  ShingleSet empty;
  empty.doc_id = "e";
  REQUIRE_THROWS_AS(minhash(empty, 128, 0), EmptyShingleSet);
}

TEST_CASE("lsh band shape is validated", "[dedup]") {
  auto [a, b] = sets_with_overlap(40, 20, 5);
  std::vector<MinHashSignature> sigs = {minhash(a, 128, 0), minhash(b, 128, 0)};
  CHECK_NOTHROW(build_lsh(sigs, 16, 8));
  REQUIRE_THROWS_AS(build_lsh(sigs, 16, 9), BandShapeMismatch);
}

TEST_CASE("identical signatures collide in every band", "[dedup]") {
  auto [a, b] = sets_with_overlap(60, 60, 21);
  std::vector<MinHashSignature> sigs = {minhash(a, 128, 0), minhash(b, 128, 0)};
  LshIndex index = build_lsh(sigs, 16, 8);

  std::size_t shared = 0;
  for (const auto& [key, ids] : index.buckets) {
    if (ids.size() == 2) ++shared;
  }
  CHECK(shared == 16);
  auto pairs = candidate_pairs(index);
  REQUIRE(pairs.size() == 1);
  CHECK(pairs[0] == std::make_pair(std::string("a"), std::string("b")));
}

TEST_CASE("every doc lands in exactly b buckets", "[dedup]") {
  std::vector<MinHashSignature> sigs;
  for (std::uint64_t i = 0; i < 20; ++i) {
    auto pair = sets_with_overlap(30, 0, 100 + i * 13);
    sigs.push_back(
        minhash(make_set("doc" + std::to_string(i), pair.first.shingles), 128, 1));
  }
  LshIndex index = build_lsh(sigs, 16, 8);
  std::map<std::string, std::size_t> appearances;
  for (const auto& [key, ids] : index.buckets) {
    for (const auto& id : ids) ++appearances[id];
  }
  for (const auto& [id, count] : appearances) CHECK(count == 16);
}

TEST_CASE("lsh candidates cover brute-force band agreement", "[dedup]") {
  std::vector<MinHashSignature> sigs;
  for (std::uint64_t i = 0; i < 20; ++i) {
    // half the docs share most of one base set, so bands do collide
    auto pair = sets_with_overlap(40, i % 2 ? 36 : 0, i % 2 ? 1 : 300 + i);
    sigs.push_back(
        minhash(make_set("doc" + std::to_string(i), pair.first.shingles), 128, 2));
  }
  LshIndex index = build_lsh(sigs, 16, 8);
  auto candidates = candidate_pairs(index);
  std::set<std::pair<std::string, std::string>> candidate_set(candidates.begin(),
                                                              candidates.end());
  // oracle: any r consecutive aligned equal values on a band boundary
  for (std::size_t i = 0; i < sigs.size(); ++i) {
    for (std::size_t j = i + 1; j < sigs.size(); ++j) {
      bool band_match = false;
      for (std::size_t band = 0; band < 16 && !band_match; ++band) {
        bool all = true;
        for (std::size_t r = 0; r < 8; ++r) {
          if (sigs[i].values[band * 8 + r] != sigs[j].values[band * 8 + r]) {
            all = false;
            break;
          }
        }
        band_match = all;
      }
      if (band_match) {
        auto key = std::minmax(sigs[i].doc_id, sigs[j].doc_id);
        REQUIRE(candidate_set.count({key.first, key.second}) == 1);
      }
    }
  }
}

TEST_CASE("banding collision probability follows the s-curve", "[dedup]") {
  // P[candidate] = 1 - (1 - s^r)^b, checked empirically at s in {0.2, 0.8}
  for (double s : {0.2, 0.8}) {
    // J = overlap/(2*size - overlap) = s  =>  overlap = 2*size*s/(1+s)
    const std::size_t size = 60;
    const std::size_t overlap = static_cast<std::size_t>(
        std::llround(2.0 * size * s / (1.0 + s)));
    auto [a, b] = sets_with_overlap(size, overlap, 77);
    const double true_j = static_cast<double>(overlap) /
                          static_cast<double>(2 * size - overlap);
    REQUIRE(std::abs(true_j - s) < 0.02);

    int collided = 0;
    const int trials = 200;
    for (int seed = 0; seed < trials; ++seed) {
      std::vector<MinHashSignature> sigs = {
          minhash(a, 128, static_cast<std::uint64_t>(seed)),
          minhash(b, 128, static_cast<std::uint64_t>(seed))};
      LshIndex index = build_lsh(sigs, 16, 8);
      if (!candidate_pairs(index).empty()) ++collided;
    }
    const double expected = 1.0 - std::pow(1.0 - std::pow(true_j, 8.0), 16.0);
    const double empirical = static_cast<double>(collided) / trials;
    CHECK(std::abs(empirical - expected) <= 0.1);
  }
}

namespace {

Corpus corpus_with_planted_dups(std::uint64_t seed, std::size_t n_unique,
                                std::size_t n_pairs,
                                std::vector<std::set<std::string>>* truth) {
  Corpus corpus;
  for (std::size_t i = 0; i < n_unique; ++i) {
    corpus.documents.push_back(
        testutil::make_doc("u" + std::to_string(100 + i), seed * 997 + i, 120));
  }
  for (std::size_t p = 0; p < n_pairs; ++p) {
    auto words = testutil::random_words(seed * 131071 + 500 + p, 120);
    std::vector<std::string> mutated = words;
    mutated[60] += "x";  // one word changed: jaccard stays >= 0.9
    std::string ida = "p" + std::to_string(100 + p) + "a";
    std::string idb = "p" + std::to_string(100 + p) + "b";
    std::string ta = testutil::join_words(words);
    std::string tb = testutil::join_words(mutated);
    REQUIRE(testutil::exact_window_jaccard(ta, tb, 5) >= 0.9);
    corpus.documents.push_back({ida, ta, Source::other, {}});
    corpus.documents.push_back({idb, tb, Source::other, {}});
    if (truth) truth->push_back({ida, idb});
  }
  std::sort(corpus.documents.begin(), corpus.documents.end(),
            [](const Document& a, const Document& b) { return a.id < b.id; });
  return corpus;
}

// O(n^2) clustering on the exact window jaccard, independent of the library
// signature path.
std::vector<std::set<std::string>> oracle_clusters(const Corpus& corpus,
                                                   double threshold,
                                                   std::size_t w) {
  const std::size_t n = corpus.size();
  std::vector<std::size_t> parent(n);
  for (std::size_t i = 0; i < n; ++i) parent[i] = i;
  std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
    return parent[x] == x ? x : parent[x] = find(parent[x]);
  };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (testutil::exact_window_jaccard(corpus.documents[i].text,
                                         corpus.documents[j].text, w) >= threshold) {
        parent[find(i)] = find(j);
      }
    }
  }
  std::map<std::size_t, std::set<std::string>> groups;
  for (std::size_t i = 0; i < n; ++i) groups[find(i)].insert(corpus.documents[i].id);
  std::vector<std::set<std::string>> clusters;
  for (auto& [root, ids] : groups) {
    if (ids.size() >= 2) clusters.push_back(ids);
  }
  std::sort(clusters.begin(), clusters.end());
  return clusters;
}

}  // namespace

TEST_CASE("dedup keeps the lexicographically smallest duplicate", "[dedup]") {
  Corpus corpus;
  auto doc = testutil::make_doc("id1", 3, 100);
  corpus.documents.push_back(doc);
  corpus.documents.push_back({"id2", doc.text, Source::other, {}});
  auto [survivors, clusters] = dedup_corpus(corpus, DedupParams{});
  REQUIRE(clusters.clusters.size() == 1);
  CHECK(clusters.survivors[0] == "id1");
  CHECK(clusters.clusters[0] == std::vector<std::string>{"id1", "id2"});
  REQUIRE(survivors.size() == 1);
  CHECK(survivors.documents[0].id == "id1");
}

TEST_CASE("unrelated documents survive dedup untouched", "[dedup]") {
  Corpus corpus;
  corpus.documents.push_back(testutil::make_doc("a", 1, 100));
  corpus.documents.push_back(testutil::make_doc("b", 2, 100));
  auto [survivors, clusters] = dedup_corpus(corpus, DedupParams{});
  CHECK(clusters.clusters.empty());
  CHECK(survivors.size() == 2);
}

TEST_CASE("planted duplicate groups match the exact-jaccard oracle", "[dedup]") {
  // 10 docs, 3 planted near-duplicate groups
  std::vector<std::set<std::string>> truth;
  Corpus corpus = corpus_with_planted_dups(5, 4, 3, &truth);
  REQUIRE(corpus.size() == 10);

  DedupParams params;
  auto [survivors, clusters] = dedup_corpus(corpus, params);

  auto oracle = oracle_clusters(corpus, params.threshold, params.window);
  REQUIRE(oracle.size() == 3);

  std::vector<std::set<std::string>> got;
  for (const auto& c : clusters.clusters) got.emplace_back(c.begin(), c.end());
  std::sort(got.begin(), got.end());
  CHECK(got == oracle);
}

TEST_CASE("dedup is idempotent", "[dedup]") {
  Corpus corpus = corpus_with_planted_dups(9, 6, 2, nullptr);
  DedupParams params;
  auto [first, clusters1] = dedup_corpus(corpus, params);
  auto [second, clusters2] = dedup_corpus(first, params);
  CHECK(clusters2.clusters.empty());
  REQUIRE(second.size() == first.size());
  for (std::size_t i = 0; i < first.size(); ++i) {
    CHECK(second.documents[i].id == first.documents[i].id);
  }
}

TEST_CASE("dedup result is independent of worker count", "[dedup]") {
  Corpus corpus = corpus_with_planted_dups(13, 8, 2, nullptr);
  DedupParams one;
  DedupParams four;
  four.workers = 4;
  auto [s1, c1] = dedup_corpus(corpus, one);
  auto [s4, c4] = dedup_corpus(corpus, four);
  REQUIRE(s1.size() == s4.size());
  for (std::size_t i = 0; i < s1.size(); ++i) {
    CHECK(s1.documents[i].id == s4.documents[i].id);
  }
  CHECK(c1.clusters == c4.clusters);
}

TEST_CASE("duplicate clusters serialize to jsonl", "[dedup]") {
  testutil::TempDir dir;
  DuplicateClusters clusters;
  clusters.clusters = {{"a", "b"}};
  clusters.survivors = {"a"};
  write_clusters_jsonl(clusters, dir.file("clusters.jsonl"));
  std::string body = testutil::read_file(dir.file("clusters.jsonl"));
  CHECK(body == "{\"members\":[\"a\",\"b\"],\"survivor\":\"a\"}\n");
}
