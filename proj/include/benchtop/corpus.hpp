#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "benchtop/errors.hpp"
#include "benchtop/text.hpp"

namespace benchtop {

enum class Source {
  peer_reviewed,
  arxiv,
  chemrxiv,
  open_research,
  pubchem,
  book,
  plos,
  other,
};

inline std::string to_string(Source s) {
  switch (s) {
    case Source::peer_reviewed: return "peer_reviewed";
    case Source::arxiv: return "arxiv";
    case Source::chemrxiv: return "chemrxiv";
    case Source::open_research: return "open_research";
    case Source::pubchem: return "pubchem";
    case Source::book: return "book";
    case Source::plos: return "plos";
    case Source::other: return "other";
  }
  return "other";
}

// Unknown labels map to `other`; the source taxonomy is open-ended.
inline Source source_from_string(std::string_view s) {
  if (s == "peer_reviewed") return Source::peer_reviewed;
  if (s == "arxiv") return Source::arxiv;
  if (s == "chemrxiv") return Source::chemrxiv;
  if (s == "open_research") return Source::open_research;
  if (s == "pubchem") return Source::pubchem;
  if (s == "book") return Source::book;
  if (s == "plos") return Source::plos;
  if (s == "plos_articles") return Source::plos;
  return Source::other;
}

// One corpus record. Immutable by convention once constructed; safe to share
// across threads.
struct Document {
  std::string id;
  std::string text;
  Source source = Source::other;
  std::map<std::string, std::string> meta;
};

struct Corpus {
  std::vector<Document> documents;  // always sorted by id

  std::map<Source, std::size_t> stats() const {
    std::map<Source, std::size_t> counts;
    for (const auto& d : documents) ++counts[d.source];
    return counts;
  }

  const Document* find(std::string_view id) const {
    auto it = std::lower_bound(
        documents.begin(), documents.end(), id,
        [](const Document& d, std::string_view v) { return d.id < v; });
    if (it != documents.end() && it->id == id) return &*it;
    return nullptr;
  }

  std::size_t size() const { return documents.size(); }
};

enum class IngestFormat { jsonl, plain_dir };

// ---------------------------------------------------------------------------
// Normalization
// ---------------------------------------------------------------------------
// CR/LF -> LF, horizontal whitespace runs collapsed to one space, lines
// trimmed, control characters other than newline removed, then canonical
// composition. Composition runs last so marks separated from their base
// only by removed bytes still compose; that is what keeps a second pass a
// no-op. Lossy by design.
inline std::string normalize_text(std::string_view raw) {
  const std::vector<char32_t> cps = utf8_decode(raw);

  std::vector<char32_t> cleaned;
  cleaned.reserve(cps.size());
  bool pending_space = false;
  auto at_line_start = [&] { return cleaned.empty() || cleaned.back() == '\n'; };

  const std::size_t n = cps.size();
  for (std::size_t i = 0; i < n; ++i) {
    char32_t cp = cps[i];
    if (cp == '\r') {
      if (i + 1 < n && cps[i + 1] == '\n') continue;  // CRLF -> LF
      cp = '\n';                                      // lone CR -> LF
    }
    if (cp == '\n') {
      pending_space = false;  // drops line-trailing whitespace
      cleaned.push_back('\n');
      continue;
    }
    bool horizontal_ws = cp == ' ' || cp == '\t' || cp == 0x0b || cp == 0x0c ||
                         cp == 0xa0;  // NBSP folds into plain space
    if (horizontal_ws) {
      if (!at_line_start()) pending_space = true;
      continue;  // collapses runs and drops line-leading whitespace
    }
    if (cp < 0x20 || cp == 0x7f || (cp >= 0x80 && cp <= 0x9f)) continue;
    if (pending_space) {
      cleaned.push_back(' ');
      pending_space = false;
    }
    cleaned.push_back(cp);
  }

  // trim blank lead and tail
  std::size_t lo = 0, hi = cleaned.size();
  while (lo < hi && cleaned[lo] == '\n') ++lo;
  while (hi > lo && cleaned[hi - 1] == '\n') --hi;
  cleaned.assign(cleaned.begin() + static_cast<std::ptrdiff_t>(lo),
                 cleaned.begin() + static_cast<std::ptrdiff_t>(hi));

  compose_canonical(cleaned);
  return utf8_encode(cleaned);
}

inline Document normalize(const Document& doc) {
  Document out = doc;
  out.text = normalize_text(doc.text);
  return out;
}

inline Corpus normalize(const Corpus& corpus) {
  Corpus out;
  out.documents.reserve(corpus.documents.size());
  for (const auto& d : corpus.documents) out.documents.push_back(normalize(d));
  return out;
}

// ---------------------------------------------------------------------------
// Ingestion
// ---------------------------------------------------------------------------

namespace detail {

inline void sort_and_check_ids(Corpus& corpus) {
  std::sort(corpus.documents.begin(), corpus.documents.end(),
            [](const Document& a, const Document& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < corpus.documents.size(); ++i) {
    if (corpus.documents[i].id == corpus.documents[i - 1].id) {
      throw DuplicateId(corpus.documents[i].id);
    }
  }
}

inline Document parse_record(const nlohmann::json& j, std::size_t line_no) {
  if (!j.is_object()) throw MalformedRecord(line_no, "not a JSON object");
  if (!j.contains("id") || !j["id"].is_string() || j["id"].get<std::string>().empty()) {
    throw MalformedRecord(line_no, "missing or empty \"id\"");
  }
  if (!j.contains("text") || !j["text"].is_string()) {
    throw MalformedRecord(line_no, "missing \"text\"");
  }
  Document d;
  d.id = j["id"].get<std::string>();
  d.text = j["text"].get<std::string>();
  if (j.contains("source") && j["source"].is_string()) {
    d.source = source_from_string(j["source"].get<std::string>());
  }
  if (j.contains("meta") && j["meta"].is_object()) {
    for (auto it = j["meta"].begin(); it != j["meta"].end(); ++it) {
      if (it.value().is_string()) d.meta[it.key()] = it.value().get<std::string>();
    }
  }
  return d;
}

}  // namespace detail

// Line-delimited records {id, text, source?, meta?}. Blank lines are skipped.
// Output is sorted by id, so ingestion order never shows.
inline Corpus ingest_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open");
  Corpus corpus;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) throw MalformedRecord(line_no, "invalid JSON");
    corpus.documents.push_back(detail::parse_record(j, line_no));
  }
  detail::sort_and_check_ids(corpus);
  return corpus;
}

// Every regular file directly under `dir` becomes one document; the file name
// is the id and the file body the text.
inline Corpus ingest_plain_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) throw IoError(dir.string(), "not a directory");
  Corpus corpus;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::ifstream in(entry.path(), std::ios::binary);
    if (!in) throw IoError(entry.path().string(), "cannot open");
    std::string body((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    Document d;
    d.id = entry.path().filename().string();
    d.text = std::move(body);
    d.source = Source::other;
    d.meta["path"] = entry.path().string();
    corpus.documents.push_back(std::move(d));
  }
  detail::sort_and_check_ids(corpus);
  return corpus;
}

inline Corpus ingest(const std::filesystem::path& path, IngestFormat format) {
  switch (format) {
    case IngestFormat::jsonl: return ingest_jsonl(path);
    case IngestFormat::plain_dir: return ingest_plain_dir(path);
  }
  throw IoError(path.string(), "unknown ingest format");
}

// ---------------------------------------------------------------------------
// Corpus JSONL round trip
// ---------------------------------------------------------------------------

inline nlohmann::json document_to_json(const Document& d) {
  nlohmann::json j;
  j["id"] = d.id;
  j["text"] = d.text;
  j["source"] = to_string(d.source);
  if (!d.meta.empty()) j["meta"] = d.meta;
  return j;
}

inline void write_corpus_jsonl(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  for (const auto& d : corpus.documents) {
    out << document_to_json(d).dump() << '\n';
  }
  if (!out) throw IoError(path.string(), "write failed");
}

}  // namespace benchtop
