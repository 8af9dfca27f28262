#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "benchtop/chat.hpp"

namespace benchtop::prompts {

// Versioned prompt assets. Bump the tag when wording changes so transcripts
// and caches can be told apart.
inline constexpr std::string_view kPromptVersion = "v1";

// --- instruction generation -------------------------------------------------

inline constexpr std::string_view kGenQa =
    "You write one question-answering training item from a source document.\n"
    "Reply exactly in the form:\n"
    "PROMPT: <a factual question answerable from the document>\n"
    "RESPONSE: <the correct answer>";

inline constexpr std::string_view kGenSummarization =
    "You write one summarization training item from a source document.\n"
    "Reply exactly in the form:\n"
    "PROMPT: <an instruction asking for a summary of the document text that "
    "you quote in the instruction>\n"
    "RESPONSE: <a faithful summary>";

inline constexpr std::string_view kGenReadingComprehension =
    "You write one reading-comprehension training item from a source "
    "document.\n"
    "Reply exactly in the form:\n"
    "PROMPT: <a passage from the document followed by a comprehension "
    "question about it>\n"
    "RESPONSE: <the answer supported by the passage>";

inline constexpr std::string_view kGenMcq =
    "You write one multiple-choice training item from a source document.\n"
    "Reply exactly in the form:\n"
    "PROMPT: <a question, then at least two options, one per line, each "
    "starting with a capital letter and a closing parenthesis such as 'A)'>\n"
    "RESPONSE: <the letter of the correct option, e.g. 'B'>";

inline std::vector<ChatMessage> generation_messages(std::string_view task_system,
                                                    std::string_view doc_text) {
  return {{Role::system, std::string(task_system)},
          {Role::user, "Document:\n" + std::string(doc_text)}};
}

// --- s1K-style refinement ---------------------------------------------------

inline std::vector<ChatMessage> attempt_messages(std::string_view prompt) {
  return {{Role::system, "Answer the question. Be concise."},
          {Role::user, std::string(prompt)}};
}

inline std::vector<ChatMessage> verify_messages(std::string_view prompt,
                                                std::string_view reference,
                                                std::string_view attempt) {
  return {{Role::system,
           "You verify answers. Reply with exactly YES if the attempt is "
           "correct with respect to the reference answer, otherwise exactly NO."},
          {Role::user, "Question:\n" + std::string(prompt) + "\n\nReference answer:\n" +
                           std::string(reference) + "\n\nAttempt:\n" +
                           std::string(attempt)}};
}

inline std::vector<ChatMessage> topic_messages(std::string_view prompt) {
  return {{Role::system,
           "Classify the question into one thematic category. Reply with a "
           "single lowercase word."},
          {Role::user, std::string(prompt)}};
}

// --- molecule screening -----------------------------------------------------

inline constexpr std::string_view kGeneratorSystem =
    "You grade molecules as candidate electrolyte solvents or additives for "
    "lithium metal batteries. Use the reference excerpts and the prior "
    "gradings for calibration. Reply exactly in the form:\n"
    "GRADE: <integer 1-10, 10 best>\n"
    "REASON: <one short paragraph>";

inline std::vector<ChatMessage> generator_messages(std::string_view molecule_desc,
                                                   std::string_view retrieved,
                                                   std::string_view memory_digest) {
  std::string user = "Molecule:\n" + std::string(molecule_desc);
  if (!retrieved.empty()) user += "\n\nReference excerpts:\n" + std::string(retrieved);
  if (!memory_digest.empty()) user += "\n\nPrior gradings:\n" + std::string(memory_digest);
  return {{Role::system, std::string(kGeneratorSystem)}, {Role::user, user}};
}

inline std::vector<ChatMessage> revision_messages(
    const std::vector<ChatMessage>& previous, std::string_view prior_reply,
    std::string_view critique) {
  std::vector<ChatMessage> msgs = previous;
  msgs.push_back({Role::assistant, std::string(prior_reply)});
  msgs.push_back({Role::user,
                  "A reviewer raised this critique:\n" + std::string(critique) +
                      "\nRevise your grading. Reply again as GRADE:/REASON:."});
  return msgs;
}

inline constexpr std::string_view kReflectorSystem =
    "You review a proposed molecule grading. If it is well calibrated and "
    "well argued, reply exactly ACCEPT. Otherwise reply\n"
    "REVISE: <one concrete critique>";

inline std::vector<ChatMessage> reflector_messages(std::string_view molecule_desc,
                                                   std::string_view grade_reply) {
  return {{Role::system, std::string(kReflectorSystem)},
          {Role::user, "Molecule:\n" + std::string(molecule_desc) +
                           "\n\nProposed grading:\n" + std::string(grade_reply)}};
}

// One re-prompt used after an unparseable grading reply.
inline std::vector<ChatMessage> reformat_messages(
    const std::vector<ChatMessage>& previous, std::string_view bad_reply) {
  std::vector<ChatMessage> msgs = previous;
  msgs.push_back({Role::assistant, std::string(bad_reply)});
  msgs.push_back({Role::user,
                  "That reply did not match the required form. Reply again "
                  "using exactly:\nGRADE: <integer 1-10>\nREASON: <text>"});
  return msgs;
}

}  // namespace benchtop::prompts
