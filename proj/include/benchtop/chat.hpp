#pragma once

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "benchtop/errors.hpp"
#include "benchtop/hashing.hpp"
#include "benchtop/text.hpp"

namespace benchtop {

enum class Role { system, user, assistant };

inline std::string to_string(Role r) {
  switch (r) {
    case Role::system: return "system";
    case Role::user: return "user";
    case Role::assistant: return "assistant";
  }
  return "user";
}

inline Role role_from_string(std::string_view s) {
  if (s == "system") return Role::system;
  if (s == "assistant") return Role::assistant;
  return Role::user;
}

struct ChatMessage {
  Role role = Role::user;
  std::string content;
};

struct ChatRequest {
  std::string model;
  std::vector<ChatMessage> messages;
  double temperature = 0.0;
  std::uint32_t max_tokens = 1024;
  std::optional<std::int64_t> seed;
};

enum class FinishReason { stop, length, error };

inline std::string to_string(FinishReason r) {
  switch (r) {
    case FinishReason::stop: return "stop";
    case FinishReason::length: return "length";
    case FinishReason::error: return "error";
  }
  return "error";
}

struct Usage {
  std::uint64_t prompt_tokens = 0;
  std::uint64_t completion_tokens = 0;
};

struct ChatResponse {
  std::string content;
  FinishReason finish_reason = FinishReason::stop;
  Usage usage;
};

// Stable across platforms and runs; the mock script key.
inline std::uint64_t request_hash(const ChatRequest& req) {
  std::uint64_t h = 0x243f6a8885a308d3ULL;
  for (const auto& m : req.messages) {
    h = mix64(h ^ hash_bytes(to_string(m.role)));
    h = mix64(h ^ hash_bytes(m.content));
  }
  return h;
}

inline nlohmann::json request_to_json(const ChatRequest& req) {
  nlohmann::json j;
  j["model"] = req.model;
  auto msgs = nlohmann::json::array();
  for (const auto& m : req.messages) {
    msgs.push_back({{"role", to_string(m.role)}, {"content", m.content}});
  }
  j["messages"] = std::move(msgs);
  j["temperature"] = req.temperature;
  j["max_tokens"] = req.max_tokens;
  if (req.seed) j["seed"] = *req.seed;
  return j;
}

class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual ChatResponse chat(const ChatRequest& req) = 0;
};

// ---------------------------------------------------------------------------
// Deterministic mock: exact scripted replies by request hash, with an
// optional procedural fallback. A pure function of (script, request).
// ---------------------------------------------------------------------------

class MockBackend final : public ChatBackend {
 public:
  using Fallback = std::function<std::optional<std::string>(const ChatRequest&)>;

  void script(std::uint64_t hash, std::string reply) {
    scripted_[hash] = std::move(reply);
  }

  // Convenience: script by the messages the request will carry.
  void script_messages(const std::vector<ChatMessage>& messages, std::string reply) {
    ChatRequest probe;
    probe.messages = messages;
    script(request_hash(probe), std::move(reply));
  }

  void set_fallback(Fallback fn) { fallback_ = std::move(fn); }

  ChatResponse chat(const ChatRequest& req) override {
    const std::uint64_t h = request_hash(req);
    auto it = scripted_.find(h);
    std::string reply;
    if (it != scripted_.end()) {
      reply = it->second;
    } else if (fallback_) {
      auto r = fallback_(req);
      if (!r) throw ScriptMiss(h);
      reply = std::move(*r);
    } else {
      throw ScriptMiss(h);
    }
    ChatResponse resp;
    resp.content = std::move(reply);
    resp.finish_reason = FinishReason::stop;
    std::size_t prompt_words = 0;
    for (const auto& m : req.messages) prompt_words += split_words(m.content).size();
    resp.usage.prompt_tokens = prompt_words;
    resp.usage.completion_tokens = split_words(resp.content).size();
    return resp;
  }

 private:
  std::unordered_map<std::uint64_t, std::string> scripted_;
  Fallback fallback_;
};

// ---------------------------------------------------------------------------
// HTTP client for the ubiquitous chat-completions wire shape.
// POST <endpoint>/chat/completions with bearer auth from an env var.
// Retries (3 attempts, exponential backoff) on timeout, 429 and 5xx only.
// ---------------------------------------------------------------------------

struct HttpBackendConfig {
  std::string endpoint;      // e.g. "http://localhost:8089/v1"
  std::string api_key_env;   // env var holding the bearer token; empty = none
  std::size_t max_attempts = 3;
  std::size_t backoff_ms = 250;
  std::size_t timeout_ms = 30000;
  std::size_t max_in_flight = 4;
};

class HttpBackend final : public ChatBackend {
 public:
  explicit HttpBackend(HttpBackendConfig cfg)
      : cfg_(std::move(cfg)), gate_(static_cast<std::ptrdiff_t>(
            cfg_.max_in_flight == 0 ? 1 : cfg_.max_in_flight)) {
    auto pos = cfg_.endpoint.find("://");
    if (pos == std::string::npos) throw ConfigInvalid("endpoint", "missing scheme");
    auto path_pos = cfg_.endpoint.find('/', pos + 3);
    if (path_pos == std::string::npos) {
      base_ = cfg_.endpoint;
    } else {
      base_ = cfg_.endpoint.substr(0, path_pos);
      prefix_ = cfg_.endpoint.substr(path_pos);
      while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
    }
  }

  ChatResponse chat(const ChatRequest& req) override {
    gate_.acquire();
    struct Release {
      std::counting_semaphore<256>& g;
      ~Release() { g.release(); }
    } release{gate_};

    const std::string body = request_to_json(req).dump();
    httplib::Headers headers;
    if (!cfg_.api_key_env.empty()) {
      const char* token = std::getenv(cfg_.api_key_env.c_str());
      if (!token || !*token) {
        throw AuthError("environment variable " + cfg_.api_key_env + " is not set");
      }
      headers.emplace("Authorization", std::string("Bearer ") + token);
    }

    std::string last_error;
    for (std::size_t attempt = 1; attempt <= cfg_.max_attempts; ++attempt) {
      if (attempt > 1) {
        std::this_thread::sleep_for(std::chrono::milliseconds(
            cfg_.backoff_ms << (attempt - 2)));
      }
      httplib::Client client(base_);
      client.set_connection_timeout(static_cast<time_t>(cfg_.timeout_ms / 1000),
                                    static_cast<time_t>((cfg_.timeout_ms % 1000) * 1000));
      client.set_read_timeout(static_cast<time_t>(cfg_.timeout_ms / 1000),
                              static_cast<time_t>((cfg_.timeout_ms % 1000) * 1000));
      auto result = client.Post(prefix_ + "/chat/completions", headers, body,
                                "application/json");
      if (!result) {
        auto err = result.error();
        bool timeout = err == httplib::Error::ConnectionTimeout ||
                       err == httplib::Error::Read || err == httplib::Error::Write;
        last_error = httplib::to_string(err);
        if (timeout && attempt < cfg_.max_attempts) continue;
        if (timeout) throw Timeout(last_error);
        throw BackendError("transport: " + last_error);
      }
      const int status = result->status;
      if (status == 200) return parse_response(result->body);
      if (status == 401 || status == 403) throw AuthError("http " + std::to_string(status));
      if (status == 429 || status >= 500) {
        last_error = "http " + std::to_string(status);
        if (attempt < cfg_.max_attempts) continue;
        if (status == 429) {
          throw RateLimited(retry_after_seconds(*result));
        }
        throw BackendError(last_error);
      }
      throw BackendError("http " + std::to_string(status) + ": " + result->body);
    }
    throw BackendError(last_error.empty() ? "exhausted retries" : last_error);
  }

 private:
  static double retry_after_seconds(const httplib::Response& resp) {
    if (resp.has_header("Retry-After")) {
      try {
        return std::stod(resp.get_header_value("Retry-After"));
      } catch (...) {
      }
    }
    return 1.0;
  }

  static ChatResponse parse_response(const std::string& body) {
    nlohmann::json j = nlohmann::json::parse(body, nullptr, false);
    if (j.is_discarded()) throw MalformedResponse("response is not JSON");
    try {
      const auto& choice = j.at("choices").at(0);
      ChatResponse resp;
      resp.content = choice.at("message").at("content").get<std::string>();
      std::string reason = choice.value("finish_reason", "stop");
      resp.finish_reason = reason == "length" ? FinishReason::length
                          : reason == "stop"  ? FinishReason::stop
                                              : FinishReason::error;
      if (j.contains("usage")) {
        resp.usage.prompt_tokens = j["usage"].value("prompt_tokens", 0ULL);
        resp.usage.completion_tokens = j["usage"].value("completion_tokens", 0ULL);
      }
      if (resp.finish_reason == FinishReason::stop && resp.content.empty()) {
        throw MalformedResponse("empty content with finish_reason=stop");
      }
      return resp;
    } catch (const nlohmann::json::exception& e) {
      throw MalformedResponse(e.what());
    }
  }

  HttpBackendConfig cfg_;
  std::string base_;
  std::string prefix_;
  std::counting_semaphore<256> gate_;
};

// ---------------------------------------------------------------------------
// JSONL transcript capture for replay: {request, response, timestamp}.
// A logical clock keeps captures byte-reproducible when wall time is noise.
// ---------------------------------------------------------------------------

class RecordingBackend final : public ChatBackend {
 public:
  RecordingBackend(std::shared_ptr<ChatBackend> inner, std::filesystem::path path,
                   bool logical_clock = false)
      : inner_(std::move(inner)), out_(path, std::ios::binary | std::ios::app),
        logical_clock_(logical_clock) {
    if (!out_) throw IoError(path.string(), "cannot open transcript for append");
  }

  ChatResponse chat(const ChatRequest& req) override {
    ChatResponse resp = inner_->chat(req);
    nlohmann::json rec;
    rec["request"] = request_to_json(req);
    rec["response"] = {{"content", resp.content},
                       {"finish_reason", to_string(resp.finish_reason)},
                       {"usage", {{"prompt_tokens", resp.usage.prompt_tokens},
                                  {"completion_tokens", resp.usage.completion_tokens}}}};
    std::lock_guard<std::mutex> lock(mutex_);
    rec["timestamp"] = logical_clock_ ? std::to_string(sequence_++)
                                      : wall_timestamp();
    out_ << rec.dump() << '\n';
    out_.flush();
    return resp;
  }

 private:
  static std::string wall_timestamp() {
    auto now = std::chrono::system_clock::now();
    auto t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm_utc{};
    gmtime_r(&t, &tm_utc);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
  }

  std::shared_ptr<ChatBackend> inner_;
  std::ofstream out_;
  bool logical_clock_;
  std::uint64_t sequence_ = 0;
  std::mutex mutex_;
};

}  // namespace benchtop
