#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "benchtop/chat.hpp"
#include "benchtop/corpus.hpp"
#include "benchtop/errors.hpp"
#include "benchtop/hashing.hpp"
#include "benchtop/parallel.hpp"
#include "benchtop/prompts.hpp"
#include "benchtop/text.hpp"

namespace benchtop {

enum class TaskKind { qa, summarization, reading_comprehension, mcq, chat };

inline std::string to_string(TaskKind k) {
  switch (k) {
    case TaskKind::qa: return "qa";
    case TaskKind::summarization: return "summarization";
    case TaskKind::reading_comprehension: return "reading_comprehension";
    case TaskKind::mcq: return "mcq";
    case TaskKind::chat: return "chat";
  }
  return "qa";
}

inline TaskKind task_kind_from_string(std::string_view s) {
  if (s == "qa") return TaskKind::qa;
  if (s == "summarization") return TaskKind::summarization;
  if (s == "reading_comprehension") return TaskKind::reading_comprehension;
  if (s == "mcq") return TaskKind::mcq;
  if (s == "chat") return TaskKind::chat;
  throw Error("unknown task kind: " + std::string(s));
}

struct InstructionSample {
  std::string id;
  std::string source_doc_id;  // empty only for chat samples
  TaskKind task_kind = TaskKind::qa;
  std::string prompt;
  std::string response;
  std::uint64_t trace_len = 0;  // reasoning-trace token count, 0 if none
  std::optional<std::string> topic_label;
};

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

// Option letters of lines shaped like "A) ..." or "B. ...".
inline std::vector<char> mcq_option_letters(std::string_view prompt) {
  std::vector<char> letters;
  std::size_t pos = 0;
  while (pos <= prompt.size()) {
    std::size_t nl = prompt.find('\n', pos);
    std::string line = trim(prompt.substr(
        pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos));
    if (line.size() >= 2 && line[0] >= 'A' && line[0] <= 'Z' &&
        (line[1] == ')' || line[1] == '.')) {
      letters.push_back(line[0]);
    }
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  return letters;
}

// Empty result means the sample is well formed.
inline std::optional<std::string> validate_sample(const InstructionSample& s) {
  if (s.id.empty()) return "empty id";
  if (s.prompt.empty()) return "empty prompt";
  if (s.response.empty()) return "empty response";
  if (s.task_kind != TaskKind::chat && s.source_doc_id.empty()) {
    return "non-chat sample without source document";
  }
  if (s.task_kind == TaskKind::mcq) {
    auto letters = mcq_option_letters(s.prompt);
    if (letters.size() < 2) return "mcq prompt has fewer than two options";
    std::string answer = trim(s.response);
    char picked = answer.empty() ? '\0'
                                 : static_cast<char>(std::toupper(
                                       static_cast<unsigned char>(answer[0])));
    if (std::find(letters.begin(), letters.end(), picked) == letters.end()) {
      return "mcq response does not name an option";
    }
  }
  return std::nullopt;
}

struct ValidationSplit {
  std::vector<InstructionSample> kept;
  std::vector<std::pair<std::string, std::string>> rejected;  // id, problem
};

inline ValidationSplit validate_samples(const std::vector<InstructionSample>& samples) {
  ValidationSplit out;
  for (const auto& s : samples) {
    if (auto problem = validate_sample(s)) {
      out.rejected.emplace_back(s.id, *problem);
    } else {
      out.kept.push_back(s);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Generation: four task instructions per source document
// ---------------------------------------------------------------------------

namespace detail {

struct ParsedGeneration {
  std::string prompt;
  std::string response;
  std::uint64_t trace_len = 0;
};

// Reply contract: "PROMPT: ...\nRESPONSE: ...", optional trailing "TRACE: ...".
inline std::optional<ParsedGeneration> parse_generation(std::string_view reply) {
  std::size_t p = reply.find("PROMPT:");
  if (p == std::string_view::npos) return std::nullopt;
  std::size_t r = reply.find("RESPONSE:", p);
  if (r == std::string_view::npos) return std::nullopt;
  std::size_t t = reply.find("TRACE:", r);
  ParsedGeneration out;
  out.prompt = trim(reply.substr(p + 7, r - (p + 7)));
  std::size_t resp_end = t == std::string_view::npos ? reply.size() : t;
  out.response = trim(reply.substr(r + 9, resp_end - (r + 9)));
  if (t != std::string_view::npos) {
    out.trace_len = split_words(trim(reply.substr(t + 6))).size();
  }
  if (out.prompt.empty() || out.response.empty()) return std::nullopt;
  return out;
}

inline std::string_view generation_system(TaskKind kind) {
  switch (kind) {
    case TaskKind::qa: return prompts::kGenQa;
    case TaskKind::summarization: return prompts::kGenSummarization;
    case TaskKind::reading_comprehension: return prompts::kGenReadingComprehension;
    case TaskKind::mcq: return prompts::kGenMcq;
    case TaskKind::chat: break;
  }
  throw Error("no generation template for chat");
}

}  // namespace detail

inline constexpr TaskKind kGeneratedKinds[4] = {
    TaskKind::qa, TaskKind::summarization, TaskKind::reading_comprehension,
    TaskKind::mcq};

// One sample per non-chat task kind. A malformed reply gets exactly one
// re-prompt before MalformedGeneration.
inline std::vector<InstructionSample> generate_for_doc(const Document& doc,
                                                       ChatBackend& backend,
                                                       std::size_t min_words = 50) {
  if (split_words(doc.text).size() < min_words) {
    throw Error("document " + doc.id + " shorter than " +
                std::to_string(min_words) + " words");
  }
  std::vector<InstructionSample> samples;
  samples.reserve(4);
  for (TaskKind kind : kGeneratedKinds) {
    auto messages = prompts::generation_messages(detail::generation_system(kind),
                                                 doc.text);
    ChatRequest req;
    req.messages = messages;
    req.temperature = 0.7;
    std::string reply = backend.chat(req).content;

    auto build = [&](const detail::ParsedGeneration& parsed) {
      InstructionSample s;
      s.id = doc.id + ":" + to_string(kind);
      s.source_doc_id = doc.id;
      s.task_kind = kind;
      s.prompt = parsed.prompt;
      s.response = parsed.response;
      s.trace_len = parsed.trace_len;
      return s;
    };

    auto parsed = detail::parse_generation(reply);
    if (parsed) {
      InstructionSample s = build(*parsed);
      if (!validate_sample(s)) {
        samples.push_back(std::move(s));
        continue;
      }
    }
    // one retry with an explicit format reminder
    ChatRequest retry;
    retry.messages = messages;
    retry.messages.push_back({Role::assistant, reply});
    retry.messages.push_back({Role::user,
                              "That reply did not match the required form. "
                              "Reply again exactly as specified."});
    retry.temperature = 0.7;
    std::string second = backend.chat(retry).content;
    parsed = detail::parse_generation(second);
    if (!parsed) throw MalformedGeneration(to_string(kind));
    InstructionSample s = build(*parsed);
    if (validate_sample(s)) throw MalformedGeneration(to_string(kind));
    samples.push_back(std::move(s));
  }
  return samples;
}

// Fans generate_for_doc out over the corpus; sample order follows document
// order regardless of worker count. Documents below the word floor are
// reported, not errored.
struct GenerationRun {
  std::vector<InstructionSample> samples;
  std::vector<std::string> skipped_docs;
};

inline GenerationRun generate_for_corpus(const Corpus& corpus, ChatBackend& backend,
                                         std::size_t min_words = 50,
                                         std::size_t workers = 1) {
  const std::size_t n = corpus.documents.size();
  std::vector<std::vector<InstructionSample>> per_doc(n);
  std::vector<char> skipped(n, 0);
  parallel_for(n, workers, [&](std::size_t i) {
    const Document& doc = corpus.documents[i];
    if (split_words(doc.text).size() < min_words) {
      skipped[i] = 1;
      return;
    }
    per_doc[i] = generate_for_doc(doc, backend, min_words);
  });
  GenerationRun run;
  for (std::size_t i = 0; i < n; ++i) {
    if (skipped[i]) {
      run.skipped_docs.push_back(corpus.documents[i].id);
    } else {
      run.samples.insert(run.samples.end(), per_doc[i].begin(), per_doc[i].end());
    }
  }
  return run;
}

// ---------------------------------------------------------------------------
// Splitting and mixing
// ---------------------------------------------------------------------------

struct DatasetSplit {
  std::vector<InstructionSample> train;
  std::vector<InstructionSample> test;
  std::uint64_t seed = 0;
};

// Grouped split: all samples of one source document land on the same side,
// so the held-out set never sees paraphrases of training text. Group order
// is a seed-keyed shuffle; sizes hit round(fraction * n) exactly whenever
// whole groups can sum to it (always true for uniform group sizes with an
// aligned target).
inline DatasetSplit split(const std::vector<InstructionSample>& samples,
                          double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw Error("train_fraction must be in (0, 1)");
  }
  struct Group {
    std::string key;
    std::uint64_t order;
    std::vector<std::size_t> members;
  };
  std::map<std::string, std::size_t> group_of;
  std::vector<Group> groups;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    const std::string key = s.source_doc_id.empty() ? "sample:" + s.id
                                                    : "doc:" + s.source_doc_id;
    auto [it, inserted] = group_of.emplace(key, groups.size());
    if (inserted) {
      groups.push_back({key, mix64(seed ^ hash_bytes(key)), {}});
    }
    groups[it->second].members.push_back(i);
  }
  std::sort(groups.begin(), groups.end(), [](const Group& a, const Group& b) {
    return a.order != b.order ? a.order < b.order : a.key < b.key;
  });

  const std::size_t target = static_cast<std::size_t>(
      std::llround(train_fraction * static_cast<double>(samples.size())));
  DatasetSplit out;
  out.seed = seed;
  std::size_t train_count = 0;
  for (const auto& g : groups) {
    auto& side = (train_count + g.members.size() <= target) ? out.train : out.test;
    if (&side == &out.train) train_count += g.members.size();
    for (std::size_t i : g.members) side.push_back(samples[i]);
  }
  return out;
}

// Concatenate and reshuffle with the seed; counts add exactly.
inline std::vector<InstructionSample> mix_chat(
    const std::vector<InstructionSample>& domain_train,
    const std::vector<InstructionSample>& chat_samples, std::uint64_t seed) {
  for (const auto& s : chat_samples) {
    if (s.task_kind != TaskKind::chat) {
      throw Error("mix_chat given a non-chat sample: " + s.id);
    }
  }
  std::vector<InstructionSample> mixed;
  mixed.reserve(domain_train.size() + chat_samples.size());
  mixed.insert(mixed.end(), domain_train.begin(), domain_train.end());
  mixed.insert(mixed.end(), chat_samples.begin(), chat_samples.end());
  std::stable_sort(mixed.begin(), mixed.end(),
                   [seed](const InstructionSample& a, const InstructionSample& b) {
                     auto ka = mix64(seed ^ hash_bytes(a.id));
                     auto kb = mix64(seed ^ hash_bytes(b.id));
                     return ka != kb ? ka < kb : a.id < b.id;
                   });
  return mixed;
}

// ---------------------------------------------------------------------------
// Difficulty filtering: keep only what both graders get wrong
// ---------------------------------------------------------------------------

struct DifficultyAudit {
  std::string sample_id;
  bool small_correct = false;
  bool large_correct = false;
  bool retained = false;
  std::string note;  // non-empty when the sample was skipped on error
};

struct DifficultyResult {
  std::vector<InstructionSample> retained;
  std::vector<DifficultyAudit> audits;
};

namespace detail {

inline bool parse_yes_no(std::string_view reply) {
  std::string t = to_lower_ascii(trim(reply));
  if (t.rfind("yes", 0) == 0) return true;
  if (t.rfind("no", 0) == 0) return false;
  throw MalformedResponse("verifier must reply YES or NO, got: " + std::string(reply));
}

}  // namespace detail

inline DifficultyResult difficulty_filter(
    const std::vector<InstructionSample>& samples, ChatBackend& grader_small,
    ChatBackend& grader_large, ChatBackend& verifier, std::size_t workers = 1) {
  const std::size_t n = samples.size();
  std::vector<DifficultyAudit> audits(n);
  parallel_for(n, workers, [&](std::size_t i) {
    const auto& s = samples[i];
    DifficultyAudit a;
    a.sample_id = s.id;
    try {
      auto attempt = [&](ChatBackend& grader) {
        ChatRequest req;
        req.messages = prompts::attempt_messages(s.prompt);
        return grader.chat(req).content;
      };
      auto judge = [&](const std::string& answer) {
        ChatRequest req;
        req.messages = prompts::verify_messages(s.prompt, s.response, answer);
        return detail::parse_yes_no(verifier.chat(req).content);
      };
      a.small_correct = judge(attempt(grader_small));
      a.large_correct = judge(attempt(grader_large));
      a.retained = !a.small_correct && !a.large_correct;
    } catch (const Error& e) {
      a.retained = false;
      a.note = e.what();  // skipped, on the record
    }
    audits[i] = std::move(a);
  });
  DifficultyResult out;
  for (std::size_t i = 0; i < n; ++i) {
    if (audits[i].retained) out.retained.push_back(samples[i]);
  }
  out.audits = std::move(audits);
  return out;
}

// ---------------------------------------------------------------------------
// Diversity sampling: round-robin over topic clusters, weighted by trace_len
// ---------------------------------------------------------------------------

inline std::vector<InstructionSample> diversity_sample(
    const std::vector<InstructionSample>& samples, std::size_t target_n,
    std::uint64_t seed) {
  if (target_n > samples.size()) throw Error("target_n exceeds sample count");
  for (const auto& s : samples) {
    if (!s.topic_label || s.topic_label->empty()) throw MissingTopicLabel(s.id);
  }

  // candidates per cluster, ordered (trace_len desc, id asc) so cumulative
  // weight walks are reproducible
  std::map<std::string, std::vector<std::size_t>> clusters;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    clusters[*samples[i].topic_label].push_back(i);
  }
  for (auto& [label, members] : clusters) {
    std::sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
      if (samples[a].trace_len != samples[b].trace_len) {
        return samples[a].trace_len > samples[b].trace_len;
      }
      return samples[a].id < samples[b].id;
    });
  }

  Rng64 rng(seed);
  std::vector<InstructionSample> selected;
  selected.reserve(target_n);
  while (selected.size() < target_n) {
    bool any = false;
    for (auto& [label, members] : clusters) {
      if (selected.size() == target_n) break;
      if (members.empty()) continue;
      any = true;
      double total = 0.0;
      for (std::size_t idx : members) {
        total += static_cast<double>(samples[idx].trace_len);
      }
      std::size_t pick = 0;
      if (total <= 0.0) {
        pick = rng.bounded(members.size());  // all traceless: uniform
      } else {
        double x = rng.uniform() * total;
        double cum = 0.0;
        for (std::size_t j = 0; j < members.size(); ++j) {
          cum += static_cast<double>(samples[members[j]].trace_len);
          if (x < cum) {
            pick = j;
            break;
          }
          if (j + 1 == members.size()) pick = j;  // guard fp tail
        }
      }
      selected.push_back(samples[members[pick]]);
      members.erase(members.begin() + static_cast<std::ptrdiff_t>(pick));
    }
    if (!any) break;  // unreachable while target_n <= n
  }
  return selected;
}

// ---------------------------------------------------------------------------
// JSONL round trip
// ---------------------------------------------------------------------------

inline nlohmann::json sample_to_json(const InstructionSample& s) {
  nlohmann::json j;
  j["id"] = s.id;
  j["source_doc_id"] = s.source_doc_id;
  j["task_kind"] = to_string(s.task_kind);
  j["prompt"] = s.prompt;
  j["response"] = s.response;
  j["trace_len"] = s.trace_len;
  if (s.topic_label) j["topic_label"] = *s.topic_label;
  return j;
}

inline InstructionSample sample_from_json(const nlohmann::json& j) {
  InstructionSample s;
  s.id = j.at("id").get<std::string>();
  s.source_doc_id = j.value("source_doc_id", "");
  s.task_kind = task_kind_from_string(j.at("task_kind").get<std::string>());
  s.prompt = j.at("prompt").get<std::string>();
  s.response = j.at("response").get<std::string>();
  s.trace_len = j.value("trace_len", 0ULL);
  if (j.contains("topic_label") && j["topic_label"].is_string()) {
    s.topic_label = j["topic_label"].get<std::string>();
  }
  return s;
}

inline void write_samples_jsonl(const std::vector<InstructionSample>& samples,
                                const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  for (const auto& s : samples) out << sample_to_json(s).dump() << '\n';
}

inline std::vector<InstructionSample> read_samples_jsonl(
    const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open");
  std::vector<InstructionSample> samples;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) throw MalformedRecord(line_no, "invalid JSON");
    try {
      samples.push_back(sample_from_json(j));
    } catch (const nlohmann::json::exception& e) {
      throw MalformedRecord(line_no, e.what());
    }
  }
  return samples;
}

inline void write_audits_jsonl(const std::vector<DifficultyAudit>& audits,
                               const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  for (const auto& a : audits) {
    nlohmann::json j;
    j["sample_id"] = a.sample_id;
    j["small_correct"] = a.small_correct;
    j["large_correct"] = a.large_correct;
    j["retained"] = a.retained;
    if (!a.note.empty()) j["note"] = a.note;
    out << j.dump() << '\n';
  }
}

}  // namespace benchtop
