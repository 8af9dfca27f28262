#pragma once

#include <stdexcept>
#include <string>

namespace benchtop {

// Base class for everything thrown by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& path, const std::string& what)
      : Error("io error: " + path + ": " + what), path(path) {}
  std::string path;
};

class MalformedRecord : public Error {
 public:
  MalformedRecord(std::size_t line, const std::string& what)
      : Error("malformed record at line " + std::to_string(line) + ": " + what),
        line(line) {}
  std::size_t line;
};

class DuplicateId : public Error {
 public:
  explicit DuplicateId(const std::string& id)
      : Error("duplicate document id: " + id), id(id) {}
  std::string id;
};

class EmptyShingleSet : public Error {
 public:
  explicit EmptyShingleSet(const std::string& doc_id)
      : Error("empty shingle set for document: " + doc_id), doc_id(doc_id) {}
  std::string doc_id;
};

class BandShapeMismatch : public Error {
 public:
  BandShapeMismatch(std::size_t bands, std::size_t rows, std::size_t width)
      : Error("band shape mismatch: " + std::to_string(bands) + " x " +
              std::to_string(rows) + " != signature width " +
              std::to_string(width)),
        bands(bands),
        rows(rows),
        width(width) {}
  std::size_t bands, rows, width;
};

class DocumentLongerThanWindow : public Error {
 public:
  explicit DocumentLongerThanWindow(const std::string& id)
      : Error("document exceeds sequence window and splitting is disabled: " + id),
        id(id) {}
  std::string id;
};

class StepOutOfRange : public Error {
 public:
  StepOutOfRange(long long step, long long total)
      : Error("step " + std::to_string(step) + " outside [0, " +
              std::to_string(total) + "]") {}
};

// Chat backend errors.
class BackendError : public Error {
 public:
  explicit BackendError(const std::string& msg) : Error(msg) {}
};

class AuthError : public BackendError {
 public:
  explicit AuthError(const std::string& msg) : BackendError("auth: " + msg) {}
};

class RateLimited : public BackendError {
 public:
  explicit RateLimited(double retry_after_s)
      : BackendError("rate limited, retry after " +
                     std::to_string(retry_after_s) + "s"),
        retry_after_s(retry_after_s) {}
  double retry_after_s;
};

class Timeout : public BackendError {
 public:
  explicit Timeout(const std::string& msg) : BackendError("timeout: " + msg) {}
};

class MalformedResponse : public BackendError {
 public:
  explicit MalformedResponse(const std::string& msg)
      : BackendError("malformed response: " + msg) {}
};

class ScriptMiss : public BackendError {
 public:
  explicit ScriptMiss(std::uint64_t request_hash)
      : BackendError("no scripted response for request hash " +
                     std::to_string(request_hash)),
        request_hash(request_hash) {}
  std::uint64_t request_hash;
};

class MalformedGeneration : public Error {
 public:
  explicit MalformedGeneration(const std::string& task_kind)
      : Error("malformed generation for task kind: " + task_kind),
        task_kind(task_kind) {}
  std::string task_kind;
};

class MissingTopicLabel : public Error {
 public:
  explicit MissingTopicLabel(const std::string& id)
      : Error("sample has no topic label: " + id), id(id) {}
  std::string id;
};

class EmptyIndex : public Error {
 public:
  EmptyIndex() : Error("lexical index is empty") {}
};

class UnparseableGrade : public Error {
 public:
  explicit UnparseableGrade(const std::string& reply)
      : Error("could not parse grade from reply: " + reply) {}
};

class DuplicateMolecule : public Error {
 public:
  explicit DuplicateMolecule(const std::string& id)
      : Error("duplicate molecule id: " + id), id(id) {}
  std::string id;
};

class UnknownGoodId : public Error {
 public:
  explicit UnknownGoodId(const std::string& id)
      : Error("good-set id not present in graded set: " + id), id(id) {}
  std::string id;
};

class EmptyGoodSet : public Error {
 public:
  EmptyGoodSet() : Error("good set is empty") {}
};

class KOutOfRange : public Error {
 public:
  KOutOfRange(std::size_t k, std::size_t n)
      : Error("k=" + std::to_string(k) + " outside [1, " + std::to_string(n) + "]") {}
};

class ConfigInvalid : public Error {
 public:
  explicit ConfigInvalid(const std::string& field, const std::string& what)
      : Error("invalid config field '" + field + "': " + what), field(field) {}
  std::string field;
};

class StageFailed : public Error {
 public:
  StageFailed(const std::string& stage, const std::string& cause)
      : Error("stage '" + stage + "' failed: " + cause), stage(stage) {}
  std::string stage;
};

}  // namespace benchtop
