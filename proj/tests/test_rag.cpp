#include <catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <string>

#include "benchtop/rag.hpp"
#include "helpers.hpp"

using namespace benchtop;

namespace {

Corpus one_doc(const std::string& id, const std::string& text) {
  Corpus c;
  c.documents.push_back({id, text, Source::other, {}});
  return c;
}

std::string words_text(std::size_t n, const std::string& stem = "w") {
  std::string text;
  for (std::size_t i = 0; i < n; ++i) {
    if (i) text += " ";
    text += stem + std::to_string(i);
  }
  return text;
}

}  // namespace

TEST_CASE("chunk counts follow the stride arithmetic", "[rag]") {
  auto two = chunk_corpus(one_doc("d", words_text(100)), 50, 0);
  REQUIRE(two.size() == 2);
  CHECK(two[0].span_start == 0);
  CHECK(two[0].span_len == 50);
  CHECK(two[1].span_start == 50);

  auto overlapping = chunk_corpus(one_doc("d", words_text(100)), 60, 10);
  REQUIRE(overlapping.size() == 2);  // stride = 50
  CHECK(overlapping[0].span_start == 0);
  CHECK(overlapping[1].span_start == 50);

  REQUIRE_THROWS_AS(chunk_corpus(one_doc("d", "x"), 10, 10), Error);
}

TEST_CASE("overlap-free chunks reconstruct the document", "[rag]") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Corpus corpus;
    corpus.documents.push_back(
        testutil::make_doc("d" + std::to_string(seed), seed, 30 + seed * 17 % 200));
    auto chunks = chunk_corpus(corpus, 16, 0);
    std::string rebuilt;
    for (const auto& c : chunks) rebuilt += c.text;
    REQUIRE(rebuilt == corpus.documents[0].text);
  }
}

TEST_CASE("chunk ids are stable and prefixed by the document", "[rag]") {
  auto chunks = chunk_corpus(one_doc("paper", words_text(75)), 50, 0);
  REQUIRE(chunks.size() == 2);
  CHECK(chunks[0].chunk_id == "paper#0");
  CHECK(chunks[1].chunk_id == "paper#1");
  CHECK(chunks[0].doc_id == "paper");
}

TEST_CASE("a unique term ranks its chunk first", "[rag]") {
  Corpus corpus;
  corpus.documents.push_back({"a", "common words everywhere around here", Source::other, {}});
  corpus.documents.push_back({"b", "common words plus the zeitgeist term", Source::other, {}});
  corpus.documents.push_back({"c", "common words and nothing else at all", Source::other, {}});
  LexicalIndex index(chunk_corpus(corpus, 32, 0));

  auto hits = index.retrieve("zeitgeist", 5);
  REQUIRE_FALSE(hits.empty());
  CHECK(hits[0].chunk_id == "b#0");

  CHECK(index.retrieve("unindexedterm", 5).empty());
}

TEST_CASE("empty index refuses queries", "[rag]") {
  LexicalIndex index;
  REQUIRE_THROWS_AS(index.retrieve("anything", 5), EmptyIndex);
}

TEST_CASE("ranking matches an independent score recomputation", "[rag]") {
  // 20 chunks built from overlapping vocabulary
  Corpus corpus;
  for (int i = 0; i < 20; ++i) {
    std::string text;
    for (int j = 0; j < 30; ++j) {
      int v = (i * 7 + j * 3) % 40;
      text += "term" + std::to_string(v) + " ";
    }
    corpus.documents.push_back({"d" + std::to_string(i), text, Source::other, {}});
  }
  const double k1 = 1.2, b = 0.75;
  LexicalIndex index(chunk_corpus(corpus, 64, 0), k1, b);
  const std::string query = "term0 term3 term9";

  // brute force: recompute the scores straight from the chunk texts
  auto chunks = chunk_corpus(corpus, 64, 0);
  const double n = static_cast<double>(chunks.size());
  double avg = 0;
  std::vector<std::map<std::string, double>> tfs(chunks.size());
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    for (const auto& w : content_words(chunks[i].text)) tfs[i][w] += 1;
    for (const auto& [w, c] : tfs[i]) avg += c;
  }
  avg /= n;
  std::map<std::string, std::size_t> df;
  for (const auto& tf : tfs) {
    for (const auto& [w, c] : tf) df[w] += 1;
  }
  std::map<std::string, double> expected;
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    double score = 0;
    double len = 0;
    for (const auto& [w, c] : tfs[i]) len += c;
    for (const std::string& term : {std::string("term0"), std::string("term3"),
                                    std::string("term9")}) {
      auto it = tfs[i].find(term);
      if (it == tfs[i].end()) continue;
      double idf = std::log(1.0 + 1.0 / (df[term] + 0.5));
      score += idf * it->second * (k1 + 1.0) /
               (it->second + k1 * (1.0 - b + b * len / avg));
    }
    if (score > 0) expected[chunks[i].chunk_id] = score;
  }

  auto hits = index.retrieve(query, 20);
  REQUIRE(hits.size() == expected.size());
  for (const auto& h : hits) {
    REQUIRE(expected.count(h.chunk_id) == 1);
    CHECK(h.score == Catch::Approx(expected[h.chunk_id]).epsilon(1e-12));
  }
  for (std::size_t i = 1; i < hits.size(); ++i) {
    bool ordered = hits[i - 1].score > hits[i].score ||
                   (hits[i - 1].score == hits[i].score &&
                    hits[i - 1].chunk_id < hits[i].chunk_id);
    REQUIRE(ordered);
  }
}

TEST_CASE("retrieval is a pure function of the index and query", "[rag]") {
  Corpus corpus;
  for (int i = 0; i < 8; ++i) {
    corpus.documents.push_back(testutil::make_doc("d" + std::to_string(i), i, 60));
  }
  LexicalIndex index(chunk_corpus(corpus, 32, 8));
  auto q = corpus.documents[3].text.substr(0, 40);
  auto a = index.retrieve(q, 4);
  auto b = index.retrieve(q, 4);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].chunk_id == b[i].chunk_id);
    CHECK(a[i].score == b[i].score);
  }
}

TEST_CASE("adding a termless chunk of average length leaves scores alone", "[rag]") {
  // all chunks the same length so the average stays frozen
  std::vector<Chunk> chunks;
  chunks.push_back({"a#0", "a", "apple banana cherry date", 0, 4});
  chunks.push_back({"b#0", "b", "apple fig grape hazelnut", 0, 4});
  LexicalIndex before(chunks);

  chunks.push_back({"c#0", "c", "kiwi lemon mango nutmeg", 0, 4});
  LexicalIndex after(chunks);

  auto hit_before = before.retrieve("apple", 5);
  auto hit_after = after.retrieve("apple", 5);
  REQUIRE(hit_before.size() == 2);
  REQUIRE(hit_after.size() == 2);
  CHECK(after.average_length() == before.average_length());
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(hit_before[i].chunk_id == hit_after[i].chunk_id);
    CHECK(hit_before[i].score == hit_after[i].score);  // untouched, bit for bit
  }
}

TEST_CASE("index round trips through its binary file", "[rag]") {
  testutil::TempDir dir;
  Corpus corpus;
  for (int i = 0; i < 6; ++i) {
    corpus.documents.push_back(testutil::make_doc("d" + std::to_string(i), i, 90));
  }
  LexicalIndex index(chunk_corpus(corpus, 40, 8), 1.5, 0.6);
  save_index(index, dir.file("index.bin"));
  LexicalIndex back = load_index(dir.file("index.bin"));

  CHECK(back.chunk_count() == index.chunk_count());
  CHECK(back.k1() == 1.5);
  CHECK(back.b() == 0.6);

  std::string q = corpus.documents[2].text.substr(0, 60);
  auto a = index.retrieve(q, 5);
  auto b = back.retrieve(q, 5);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].chunk_id == b[i].chunk_id);
    CHECK(a[i].score == b[i].score);
  }

  testutil::write_file(dir.file("junk.bin"), "zzzz-not-an-index");
  REQUIRE_THROWS_AS(load_index(dir.file("junk.bin")), IoError);
}
