#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "benchtop/chat.hpp"
#include "benchtop/errors.hpp"
#include "benchtop/parallel.hpp"
#include "benchtop/prompts.hpp"
#include "benchtop/rag.hpp"
#include "benchtop/text.hpp"

namespace benchtop {

struct Molecule {
  std::string id;
  std::string name;
  std::string representation;  // free-form identifier or line notation
  std::optional<bool> is_known_good;
};

struct TranscriptEntry {
  std::string agent;  // "generator" or "reflector"
  std::string message;
};

struct GradedMolecule {
  std::string molecule_id;
  int grade = 0;  // 1..10
  std::string explanation;
  std::size_t rounds_used = 0;
  std::vector<TranscriptEntry> transcript;
};

// Bounded FIFO of prior gradings, injected into later generator prompts.
class SessionMemory {
 public:
  explicit SessionMemory(std::size_t capacity = 20, std::size_t digest_chars = 200)
      : capacity_(capacity), digest_chars_(digest_chars) {}

  void add(const std::string& molecule_id, int grade, std::string_view rationale) {
    std::string digest(rationale.substr(0, digest_chars_));
    entries_.push_back({molecule_id, grade, std::move(digest)});
    while (entries_.size() > capacity_) entries_.pop_front();
  }

  std::size_t size() const { return entries_.size(); }
  std::size_t capacity() const { return capacity_; }

  std::string digest() const {
    std::string out;
    for (const auto& e : entries_) {
      out += e.molecule_id + ": grade " + std::to_string(e.grade);
      if (!e.rationale.empty()) out += " (" + e.rationale + ")";
      out.push_back('\n');
    }
    return out;
  }

 private:
  struct Entry {
    std::string molecule_id;
    int grade;
    std::string rationale;
  };
  std::deque<Entry> entries_;
  std::size_t capacity_;
  std::size_t digest_chars_;
};

// ---------------------------------------------------------------------------
// Reply parsing
// ---------------------------------------------------------------------------

struct ParsedGrade {
  int grade = 0;
  std::string reason;
};

namespace detail {

inline std::size_t find_ci(std::string_view haystack, std::string_view needle) {
  if (needle.empty() || haystack.size() < needle.size()) return std::string_view::npos;
  for (std::size_t i = 0; i + needle.size() <= haystack.size(); ++i) {
    bool match = true;
    for (std::size_t j = 0; j < needle.size(); ++j) {
      if (std::tolower(static_cast<unsigned char>(haystack[i + j])) !=
          std::tolower(static_cast<unsigned char>(needle[j]))) {
        match = false;
        break;
      }
    }
    if (match) return i;
  }
  return std::string_view::npos;
}

}  // namespace detail

// "GRADE: <1-10>\nREASON: <text>", case-insensitive markers. Grades outside
// 1..10 do not parse.
inline std::optional<ParsedGrade> parse_grade_reply(std::string_view reply) {
  std::size_t g = detail::find_ci(reply, "grade");
  if (g == std::string_view::npos) return std::nullopt;
  std::size_t pos = g + 5;
  while (pos < reply.size() && (reply[pos] == ':' || reply[pos] == ' ')) ++pos;
  std::size_t digits_end = pos;
  while (digits_end < reply.size() &&
         std::isdigit(static_cast<unsigned char>(reply[digits_end]))) {
    ++digits_end;
  }
  if (digits_end == pos || digits_end - pos > 2) return std::nullopt;
  int grade = 0;
  for (std::size_t i = pos; i < digits_end; ++i) grade = grade * 10 + (reply[i] - '0');
  if (grade < 1 || grade > 10) return std::nullopt;

  ParsedGrade out;
  out.grade = grade;
  std::size_t r = detail::find_ci(reply, "reason");
  if (r != std::string_view::npos) {
    std::size_t rp = r + 6;
    while (rp < reply.size() && (reply[rp] == ':' || reply[rp] == ' ')) ++rp;
    out.reason = trim(reply.substr(rp));
  } else {
    out.reason = trim(reply.substr(digits_end));
  }
  return out;
}

enum class ReflectorVerdict { accept, revise };

struct ParsedReflection {
  ReflectorVerdict verdict = ReflectorVerdict::revise;
  std::string critique;
};

// Two-token contract, case-insensitive. Anything that is neither ACCEPT nor
// REVISE:<text> is treated as a critique verbatim, which keeps the loop
// moving with chatty reflectors.
inline ParsedReflection parse_reflection_reply(std::string_view reply) {
  std::string t = trim(reply);
  std::string lower = to_lower_ascii(t);
  ParsedReflection out;
  if (lower.rfind("accept", 0) == 0) {
    out.verdict = ReflectorVerdict::accept;
    return out;
  }
  if (lower.rfind("revise", 0) == 0) {
    std::size_t pos = 6;
    while (pos < t.size() && (t[pos] == ':' || t[pos] == ' ')) ++pos;
    out.critique = t.substr(pos);
    return out;
  }
  out.critique = t;
  return out;
}

// ---------------------------------------------------------------------------
// The generator/reflector loop
// ---------------------------------------------------------------------------

struct ScreeningOptions {
  std::size_t max_rounds = 3;
  std::size_t top_k = 5;            // retrieved chunks per molecule
  std::size_t chunk_chars = 500;    // per-chunk excerpt cap in prompts
  double generator_temperature = 0.7;
  double reflector_temperature = 0.0;
};

namespace detail {

inline std::string molecule_description(const Molecule& mol) {
  std::string desc = mol.name;
  if (!mol.representation.empty()) desc += " (" + mol.representation + ")";
  return desc;
}

inline std::string retrieved_excerpts(const LexicalIndex& index, const Molecule& mol,
                                      const ScreeningOptions& opts) {
  if (index.chunk_count() == 0) return {};
  std::string out;
  for (const auto& hit : index.retrieve(mol.name + " " + mol.representation,
                                        opts.top_k)) {
    const Chunk* chunk = index.find_chunk(hit.chunk_id);
    if (!chunk) continue;
    std::string excerpt = chunk->text.substr(0, opts.chunk_chars);
    out += "- [" + chunk->chunk_id + "] " + excerpt + "\n";
  }
  return out;
}

}  // namespace detail

// One molecule through the loop: the generator proposes "GRADE:/REASON:",
// the reflector answers ACCEPT or REVISE:<critique>, critiques feed back
// into the generator until acceptance or max_rounds. Only the generator
// sets grades. An unparseable grading reply earns exactly one re-prompt.
inline GradedMolecule screen_molecule_with(const Molecule& mol,
                                           const std::string& retrieved,
                                           ChatBackend& generator,
                                           ChatBackend& reflector,
                                           SessionMemory& memory,
                                           const ScreeningOptions& opts = {}) {
  if (opts.max_rounds < 1) throw Error("max_rounds must be >= 1");
  const std::string desc = detail::molecule_description(mol);

  GradedMolecule result;
  result.molecule_id = mol.id;

  std::vector<ChatMessage> base =
      prompts::generator_messages(desc, retrieved, memory.digest());
  std::vector<ChatMessage> current = base;
  ParsedGrade latest;

  for (std::size_t round = 1; round <= opts.max_rounds; ++round) {
    ChatRequest req;
    req.messages = current;
    req.temperature = opts.generator_temperature;
    std::string reply = generator.chat(req).content;
    result.transcript.push_back({"generator", reply});

    auto parsed = parse_grade_reply(reply);
    if (!parsed) {
      ChatRequest retry;
      retry.messages = prompts::reformat_messages(current, reply);
      retry.temperature = opts.generator_temperature;
      std::string second = generator.chat(retry).content;
      result.transcript.push_back({"generator", second});
      parsed = parse_grade_reply(second);
      if (!parsed) throw UnparseableGrade(second);
      reply = second;
    }
    latest = *parsed;
    result.rounds_used = round;

    ChatRequest ref;
    ref.messages = prompts::reflector_messages(desc, reply);
    ref.temperature = opts.reflector_temperature;
    std::string verdict_reply = reflector.chat(ref).content;
    result.transcript.push_back({"reflector", verdict_reply});

    ParsedReflection verdict = parse_reflection_reply(verdict_reply);
    if (verdict.verdict == ReflectorVerdict::accept) break;
    current = prompts::revision_messages(current, reply, verdict.critique);
  }

  result.grade = latest.grade;
  result.explanation = latest.reason;
  memory.add(mol.id, result.grade, result.explanation);
  return result;
}

inline GradedMolecule screen_molecule(const Molecule& mol, ChatBackend& generator,
                                      ChatBackend& reflector,
                                      const LexicalIndex& index,
                                      SessionMemory& memory,
                                      const ScreeningOptions& opts = {}) {
  return screen_molecule_with(mol, detail::retrieved_excerpts(index, mol, opts),
                              generator, reflector, memory, opts);
}

// Whole-pool screening in the given molecule order. Retrieval is a pure
// function of the molecule and is precomputed in parallel; the agent loop
// itself runs sequentially because each prompt carries the memory of every
// earlier grading. Transcripts are therefore identical for any worker count.
inline std::vector<GradedMolecule> screen_pool(
    const std::vector<Molecule>& molecules, ChatBackend& generator,
    ChatBackend& reflector, const LexicalIndex& index,
    const ScreeningOptions& opts = {}, std::size_t workers = 1) {
  std::vector<std::string> retrieved(molecules.size());
  parallel_for(molecules.size(), workers, [&](std::size_t i) {
    retrieved[i] = detail::retrieved_excerpts(index, molecules[i], opts);
  });

  SessionMemory memory;
  std::vector<GradedMolecule> graded;
  graded.reserve(molecules.size());
  for (std::size_t i = 0; i < molecules.size(); ++i) {
    graded.push_back(screen_molecule_with(molecules[i], retrieved[i], generator,
                                          reflector, memory, opts));
  }
  return graded;
}

// ---------------------------------------------------------------------------
// Ranking and metrics
// ---------------------------------------------------------------------------

struct RankedMolecule {
  std::string molecule_id;
  int grade = 0;
  std::size_t rank = 0;  // 1-based
};

// Descending by grade, ties broken by molecule_id ascending.
inline std::vector<RankedMolecule> rank(const std::vector<GradedMolecule>& graded) {
  std::vector<RankedMolecule> out;
  out.reserve(graded.size());
  for (const auto& g : graded) out.push_back({g.molecule_id, g.grade, 0});
  std::sort(out.begin(), out.end(), [](const RankedMolecule& a, const RankedMolecule& b) {
    if (a.grade != b.grade) return a.grade > b.grade;
    return a.molecule_id < b.molecule_id;
  });
  for (std::size_t i = 1; i < out.size(); ++i) {
    if (out[i].molecule_id == out[i - 1].molecule_id) {
      throw DuplicateMolecule(out[i].molecule_id);
    }
  }
  for (std::size_t i = 0; i < out.size(); ++i) out[i].rank = i + 1;
  return out;
}

inline double mean_grade(const std::vector<GradedMolecule>& graded,
                         const std::vector<std::string>& good_ids) {
  if (good_ids.empty()) throw EmptyGoodSet();
  std::map<std::string, int> grades;
  for (const auto& g : graded) grades[g.molecule_id] = g.grade;
  double sum = 0.0;
  for (const auto& id : good_ids) {
    auto it = grades.find(id);
    if (it == grades.end()) throw UnknownGoodId(id);
    sum += it->second;
  }
  return sum / static_cast<double>(good_ids.size());
}

inline double mean_rank(const std::vector<RankedMolecule>& ranking,
                        const std::vector<std::string>& good_ids) {
  if (good_ids.empty()) throw EmptyGoodSet();
  std::map<std::string, std::size_t> ranks;
  for (const auto& r : ranking) ranks[r.molecule_id] = r.rank;
  double sum = 0.0;
  for (const auto& id : good_ids) {
    auto it = ranks.find(id);
    if (it == ranks.end()) throw UnknownGoodId(id);
    sum += static_cast<double>(it->second);
  }
  return sum / static_cast<double>(good_ids.size());
}

inline double hits_at_k(const std::vector<RankedMolecule>& ranking,
                        const std::vector<std::string>& good_ids, std::size_t k) {
  if (k < 1 || k > ranking.size()) throw KOutOfRange(k, ranking.size());
  std::size_t hits = 0;
  for (std::size_t i = 0; i < k; ++i) {
    if (std::find(good_ids.begin(), good_ids.end(), ranking[i].molecule_id) !=
        good_ids.end()) {
      ++hits;
    }
  }
  return static_cast<double>(hits) / static_cast<double>(k);
}

struct RankingReport {
  std::vector<RankedMolecule> ranked;
  double mean_grade_good = 0.0;
  double mean_rank_good = 0.0;
  std::map<std::size_t, double> hits;  // k -> fraction, k in {5,10,20,50} up to N
};

inline RankingReport build_report(const std::vector<GradedMolecule>& graded,
                                  const std::vector<std::string>& good_ids) {
  RankingReport report;
  report.ranked = rank(graded);
  report.mean_grade_good = mean_grade(graded, good_ids);
  report.mean_rank_good = mean_rank(report.ranked, good_ids);
  for (std::size_t k : {std::size_t{5}, std::size_t{10}, std::size_t{20},
                        std::size_t{50}}) {
    if (k <= report.ranked.size()) {
      report.hits[k] = hits_at_k(report.ranked, good_ids, k);
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// File formats
// ---------------------------------------------------------------------------

inline std::vector<Molecule> read_molecules_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open");
  std::vector<Molecule> molecules;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) throw MalformedRecord(line_no, "invalid JSON");
    Molecule m;
    try {
      m.id = j.at("id").get<std::string>();
      m.name = j.value("name", m.id);
      m.representation = j.value("representation", "");
      if (j.contains("is_known_good") && j["is_known_good"].is_boolean()) {
        m.is_known_good = j["is_known_good"].get<bool>();
      }
    } catch (const nlohmann::json::exception& e) {
      throw MalformedRecord(line_no, e.what());
    }
    molecules.push_back(std::move(m));
  }
  std::map<std::string, bool> seen;
  for (const auto& m : molecules) {
    if (!seen.emplace(m.id, true).second) throw DuplicateMolecule(m.id);
  }
  return molecules;
}

inline void write_graded_jsonl(const std::vector<GradedMolecule>& graded,
                               const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  for (const auto& g : graded) {
    nlohmann::json j;
    j["molecule_id"] = g.molecule_id;
    j["grade"] = g.grade;
    j["explanation"] = g.explanation;
    j["rounds_used"] = g.rounds_used;
    out << j.dump() << '\n';
  }
}

inline std::vector<GradedMolecule> read_graded_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open");
  std::vector<GradedMolecule> graded;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) throw MalformedRecord(line_no, "invalid JSON");
    GradedMolecule g;
    g.molecule_id = j.at("molecule_id").get<std::string>();
    g.grade = j.at("grade").get<int>();
    g.explanation = j.value("explanation", "");
    g.rounds_used = j.value("rounds_used", std::size_t{0});
    graded.push_back(std::move(g));
  }
  return graded;
}

inline void write_transcripts_jsonl(const std::vector<GradedMolecule>& graded,
                                    const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  for (const auto& g : graded) {
    nlohmann::json j;
    j["molecule_id"] = g.molecule_id;
    auto entries = nlohmann::json::array();
    for (const auto& t : g.transcript) {
      entries.push_back({{"agent", t.agent}, {"message", t.message}});
    }
    j["transcript"] = std::move(entries);
    out << j.dump() << '\n';
  }
}

inline nlohmann::ordered_json report_to_json(const RankingReport& report) {
  nlohmann::ordered_json j;
  j["mean_grade_good"] = report.mean_grade_good;
  j["mean_rank_good"] = report.mean_rank_good;
  nlohmann::ordered_json hits;
  for (const auto& [k, v] : report.hits) {
    hits["hits_at_" + std::to_string(k)] = v;
  }
  j["hits"] = std::move(hits);
  auto ranked = nlohmann::ordered_json::array();
  for (const auto& r : report.ranked) {
    ranked.push_back({{"rank", r.rank}, {"molecule_id", r.molecule_id},
                      {"grade", r.grade}});
  }
  j["ranked"] = std::move(ranked);
  return j;
}

inline void write_report_json(const RankingReport& report,
                              const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out << report_to_json(report).dump(2) << '\n';
}

}  // namespace benchtop
