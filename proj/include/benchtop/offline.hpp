#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "benchtop/chat.hpp"
#include "benchtop/hashing.hpp"
#include "benchtop/text.hpp"

namespace benchtop {

// Procedural stand-in for a hosted model: answers every prompt this pipeline
// can send, as a pure function of the request. Keeps the whole artifact
// runnable (and byte-reproducible) with no network and no credentials.
namespace offline {

namespace detail {

inline bool starts_with(std::string_view s, std::string_view prefix) {
  return s.size() >= prefix.size() && s.substr(0, prefix.size()) == prefix;
}

inline std::string_view system_of(const ChatRequest& req) {
  for (const auto& m : req.messages) {
    if (m.role == Role::system) return m.content;
  }
  return {};
}

inline std::string_view last_user(const ChatRequest& req) {
  for (auto it = req.messages.rbegin(); it != req.messages.rend(); ++it) {
    if (it->role == Role::user) return it->content;
  }
  return {};
}

// A few deterministic content words out of a prompt, for flavor.
inline std::vector<std::string> salient_words(std::string_view text,
                                              std::uint64_t h, std::size_t n) {
  std::vector<std::string> words = content_words(text);
  std::vector<std::string> picked;
  if (words.empty()) {
    picked.assign(n, "topic");
    return picked;
  }
  for (std::size_t i = 0; i < n; ++i) {
    picked.push_back(words[mix64(h + i) % words.size()]);
  }
  return picked;
}

inline std::string generation_reply(const ChatRequest& req, std::string_view kind) {
  const std::uint64_t h = request_hash(req);
  std::string_view doc = last_user(req);
  auto w = salient_words(doc, h, 3);
  if (kind == "qa") {
    return "PROMPT: What does the text say about " + w[0] + " and " + w[1] +
           "?\nRESPONSE: The text relates " + w[0] + " to " + w[1] +
           " via " + w[2] + " (" + to_hex(h).substr(0, 6) + ").";
  }
  if (kind == "summarization") {
    return "PROMPT: Summarize the following passage: " + w[0] + " " + w[1] +
           " " + w[2] + " ...\nRESPONSE: The passage discusses " + w[0] +
           ", touching on " + w[1] + " and " + w[2] + ".";
  }
  if (kind == "reading_comprehension") {
    return "PROMPT: Passage: ... " + w[0] + " " + w[1] +
           " ...\nQuestion: which concept accompanies " + w[0] +
           "?\nRESPONSE: " + w[1] + ".";
  }
  // mcq
  const char correct = static_cast<char>('A' + (h % 3));
  std::string reply = "PROMPT: Which term appears alongside " + w[0] + "?\n";
  const char* fillers[3] = {"unrelated term", "distractor", "alternative"};
  for (int i = 0; i < 3; ++i) {
    const char letter = static_cast<char>('A' + i);
    reply += std::string(1, letter) + ") ";
    reply += (letter == correct) ? w[1] : fillers[i];
    reply += "\n";
  }
  reply += "RESPONSE: ";
  reply += correct;
  return reply;
}

}  // namespace detail

// Correctness rate of the simulated graders in the verifier's eyes (out of
// 16). Both graders wrong with probability (1 - p)^2 per sample.
struct OfflineBehavior {
  std::uint32_t verifier_yes_of_16 = 5;
  std::uint32_t reflector_revise_of_16 = 4;
};

inline MockBackend::Fallback make_fallback(OfflineBehavior behavior = {}) {
  return [behavior](const ChatRequest& req) -> std::optional<std::string> {
    const std::string_view system = detail::system_of(req);
    const std::uint64_t h = request_hash(req);

    if (detail::starts_with(system, "You write one question-answering")) {
      return detail::generation_reply(req, "qa");
    }
    if (detail::starts_with(system, "You write one summarization")) {
      return detail::generation_reply(req, "summarization");
    }
    if (detail::starts_with(system, "You write one reading-comprehension")) {
      return detail::generation_reply(req, "reading_comprehension");
    }
    if (detail::starts_with(system, "You write one multiple-choice")) {
      return detail::generation_reply(req, "mcq");
    }
    if (detail::starts_with(system, "Answer the question")) {
      auto w = detail::salient_words(detail::last_user(req), h, 2);
      return "Probably " + w[0] + ", considering " + w[1] + ".";
    }
    if (detail::starts_with(system, "You verify answers")) {
      return (mix64(h ^ 0xfeed) % 16) < behavior.verifier_yes_of_16 ? "YES" : "NO";
    }
    if (detail::starts_with(system, "Classify the question")) {
      static const char* labels[] = {"chemistry", "physics", "materials", "methods"};
      return std::string(labels[mix64(h ^ 0x70b1c) % 4]);
    }
    if (detail::starts_with(system, "You grade molecules")) {
      const int grade = 1 + static_cast<int>(mix64(h ^ 0x6ade) % 10);
      auto w = detail::salient_words(detail::last_user(req), h, 2);
      return "GRADE: " + std::to_string(grade) + "\nREASON: Stability around " +
             w[0] + " and compatibility with " + w[1] + " suggest this rating.";
    }
    if (detail::starts_with(system, "You review a proposed molecule grading")) {
      if ((mix64(h ^ 0x5ef1ec7) % 16) < behavior.reflector_revise_of_16) {
        return "REVISE: justify the rating against the cited excerpts.";
      }
      return "ACCEPT";
    }
    return std::nullopt;
  };
}

inline std::shared_ptr<MockBackend> make_backend(OfflineBehavior behavior = {}) {
  auto backend = std::make_shared<MockBackend>();
  backend->set_fallback(make_fallback(behavior));
  return backend;
}

}  // namespace offline
}  // namespace benchtop
