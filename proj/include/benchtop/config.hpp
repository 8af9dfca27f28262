#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "benchtop/chat.hpp"
#include "benchtop/dedup.hpp"
#include "benchtop/errors.hpp"
#include "benchtop/offline.hpp"
#include "benchtop/quality.hpp"
#include "benchtop/screening.hpp"

namespace benchtop {

struct BackendConfig {
  std::string kind = "offline";  // "offline" or "http"
  std::string endpoint;
  std::string api_key_env;
  std::string model;
};

struct PipelineConfig {
  // inputs
  std::filesystem::path corpus_in;
  std::string corpus_format = "jsonl";  // or "plain_dir"
  std::filesystem::path chat_samples;   // optional
  std::filesystem::path molecules;      // optional
  std::filesystem::path reference_texts;  // corpus for the retrieval index;
                                          // defaults to the filtered corpus

  // output tree; stage artifacts land here under fixed names
  std::filesystem::path workdir = "work";

  DedupParams dedup;
  FilterConfig filter;
  std::string tokenizer = "word";
  std::uint32_t seq_len = 8192;
  bool split_long_docs = true;

  double train_fraction = 0.8;
  std::size_t gen_min_words = 50;
  bool refine_enabled = false;
  std::size_t refine_target = 0;  // 0 = keep all retained samples

  std::size_t chunk_size = 512;
  std::size_t chunk_overlap = 64;
  double bm25_k1 = 1.2;
  double bm25_b = 0.75;
  std::size_t retrieve_k = 5;

  ScreeningOptions screening;

  std::map<std::string, BackendConfig> backends;  // generator, reflector,
                                                  // grader_small, grader_large,
                                                  // verifier

  std::uint64_t seed = 0;
  std::size_t workers = 1;

  // Artifact locations, all under workdir.
  std::filesystem::path artifact(const std::string& name) const {
    return workdir / name;
  }

  void validate() const {
    if (corpus_in.empty()) throw ConfigInvalid("corpus_in", "required");
    if (corpus_format != "jsonl" && corpus_format != "plain_dir") {
      throw ConfigInvalid("corpus_format", "must be jsonl or plain_dir");
    }
    if (dedup.bands * dedup.rows != dedup.signature_width) {
      throw ConfigInvalid("dedup", "bands x rows must equal signature_width");
    }
    if (!(dedup.threshold > 0.0 && dedup.threshold <= 1.0)) {
      throw ConfigInvalid("dedup.threshold", "must be in (0, 1]");
    }
    if (dedup.window < 1) throw ConfigInvalid("dedup.window", "must be >= 1");
    try {
      filter.validate();
    } catch (const Error& e) {
      throw ConfigInvalid("filter", e.what());
    }
    if (seq_len < 2) throw ConfigInvalid("seq_len", "must be >= 2");
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
      throw ConfigInvalid("train_fraction", "must be in (0, 1)");
    }
    if (chunk_overlap >= chunk_size) {
      throw ConfigInvalid("chunk_overlap", "must be < chunk_size");
    }
    if (screening.max_rounds < 1) {
      throw ConfigInvalid("screening.max_rounds", "must be >= 1");
    }
    if (retrieve_k < 1) throw ConfigInvalid("retrieve_k", "must be >= 1");

    // distinct path check over everything explicitly referenced
    std::vector<std::string> paths;
    for (const auto& p : {corpus_in, chat_samples, molecules, reference_texts}) {
      if (!p.empty()) paths.push_back(std::filesystem::absolute(p).string());
    }
    paths.push_back(std::filesystem::absolute(workdir).string());
    std::sort(paths.begin(), paths.end());
    for (std::size_t i = 1; i < paths.size(); ++i) {
      if (paths[i] == paths[i - 1]) {
        throw ConfigInvalid("paths", "duplicate path: " + paths[i]);
      }
    }

    for (const auto& [role, b] : backends) {
      if (b.kind != "offline" && b.kind != "http") {
        throw ConfigInvalid("backends." + role + ".kind", "must be offline or http");
      }
      if (b.kind == "http" && b.endpoint.empty()) {
        throw ConfigInvalid("backends." + role + ".endpoint", "required for http");
      }
    }
  }
};

// ---------------------------------------------------------------------------

namespace detail {

inline void read_path(const nlohmann::json& j, const char* key,
                      std::filesystem::path& out) {
  if (j.contains(key) && j[key].is_string()) out = j[key].get<std::string>();
}

template <typename T>
void read_value(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) {
    try {
      out = j[key].get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw ConfigInvalid(key, e.what());
    }
  }
}

}  // namespace detail

inline PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigInvalid("config", "cannot open " + path.string());
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ConfigInvalid("config", "invalid JSON");

  PipelineConfig cfg;
  if (j.contains("paths")) {
    const auto& p = j["paths"];
    detail::read_path(p, "corpus_in", cfg.corpus_in);
    detail::read_value(p, "corpus_format", cfg.corpus_format);
    detail::read_path(p, "chat_samples", cfg.chat_samples);
    detail::read_path(p, "molecules", cfg.molecules);
    detail::read_path(p, "reference_texts", cfg.reference_texts);
    detail::read_path(p, "workdir", cfg.workdir);
  }
  if (j.contains("dedup")) {
    const auto& d = j["dedup"];
    detail::read_value(d, "window", cfg.dedup.window);
    detail::read_value(d, "signature_width", cfg.dedup.signature_width);
    detail::read_value(d, "bands", cfg.dedup.bands);
    detail::read_value(d, "rows", cfg.dedup.rows);
    detail::read_value(d, "threshold", cfg.dedup.threshold);
  }
  if (j.contains("filter")) {
    const auto& f = j["filter"];
    detail::read_value(f, "min_words", cfg.filter.min_words);
    detail::read_value(f, "max_words", cfg.filter.max_words);
    detail::read_value(f, "max_top_2gram_fraction", cfg.filter.max_top_2gram_fraction);
    detail::read_value(f, "max_duplicate_line_fraction",
                       cfg.filter.max_duplicate_line_fraction);
    detail::read_value(f, "max_nonalpha_fraction", cfg.filter.max_nonalpha_fraction);
    detail::read_value(f, "min_mean_word_length", cfg.filter.min_mean_word_length);
    detail::read_value(f, "max_mean_word_length", cfg.filter.max_mean_word_length);
  }
  detail::read_value(j, "tokenizer", cfg.tokenizer);
  if (j.contains("pack")) {
    detail::read_value(j["pack"], "seq_len", cfg.seq_len);
    detail::read_value(j["pack"], "split_long", cfg.split_long_docs);
  }
  if (j.contains("sftgen")) {
    const auto& s = j["sftgen"];
    detail::read_value(s, "train_fraction", cfg.train_fraction);
    detail::read_value(s, "min_words", cfg.gen_min_words);
    detail::read_value(s, "refine_enabled", cfg.refine_enabled);
    detail::read_value(s, "refine_target", cfg.refine_target);
  }
  if (j.contains("rag")) {
    const auto& r = j["rag"];
    detail::read_value(r, "chunk_size", cfg.chunk_size);
    detail::read_value(r, "overlap", cfg.chunk_overlap);
    detail::read_value(r, "k1", cfg.bm25_k1);
    detail::read_value(r, "b", cfg.bm25_b);
    detail::read_value(r, "top_k", cfg.retrieve_k);
  }
  if (j.contains("screening")) {
    const auto& s = j["screening"];
    detail::read_value(s, "max_rounds", cfg.screening.max_rounds);
    detail::read_value(s, "top_k", cfg.screening.top_k);
  }
  if (j.contains("backends")) {
    for (auto it = j["backends"].begin(); it != j["backends"].end(); ++it) {
      BackendConfig b;
      detail::read_value(*it, "kind", b.kind);
      detail::read_value(*it, "endpoint", b.endpoint);
      detail::read_value(*it, "api_key_env", b.api_key_env);
      detail::read_value(*it, "model", b.model);
      cfg.backends[it.key()] = std::move(b);
    }
  }
  detail::read_value(j, "seed", cfg.seed);
  detail::read_value(j, "workers", cfg.workers);

  cfg.dedup.seed = cfg.seed;
  cfg.dedup.workers = cfg.workers;
  cfg.validate();
  return cfg;
}

// Backend factory with an offline default so the pipeline runs with no
// credentials at all.
inline std::shared_ptr<ChatBackend> make_backend(const PipelineConfig& cfg,
                                                 const std::string& role) {
  auto it = cfg.backends.find(role);
  BackendConfig b = it == cfg.backends.end() ? BackendConfig{} : it->second;
  if (b.kind == "http") {
    HttpBackendConfig hc;
    hc.endpoint = b.endpoint;
    hc.api_key_env = b.api_key_env;
    return std::make_shared<HttpBackend>(hc);
  }
  return offline::make_backend();
}

}  // namespace benchtop
