#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "benchtop/errors.hpp"
#include "benchtop/hashing.hpp"

namespace benchtop {

inline std::string file_digest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open for digest");
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    h = fnv1a64(std::string_view(buf, static_cast<std::size_t>(in.gcount())), h);
    if (in.eof()) break;
  }
  return to_hex(mix64(h));
}

// What a stage consumed and produced, digest-pinned so reruns can be
// compared byte for byte. Paths are recorded relative to the work
// directory (bare file name for anything outside it) and there are no
// wall-clock fields, so two runs of the same inputs produce identical
// manifests wherever they execute.
struct RunManifest {
  std::string stage;
  std::string params_hash;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  std::filesystem::path base;
  std::vector<std::pair<std::string, std::string>> inputs;   // path, digest
  std::vector<std::pair<std::string, std::string>> outputs;  // path, digest

  void add_input(const std::filesystem::path& p) {
    inputs.emplace_back(display_path(p), file_digest(p));
  }
  void add_output(const std::filesystem::path& p) {
    outputs.emplace_back(display_path(p), file_digest(p));
  }

 private:
  std::string display_path(const std::filesystem::path& p) const {
    if (!base.empty()) {
      auto rel = std::filesystem::absolute(p).lexically_relative(
          std::filesystem::absolute(base));
      if (!rel.empty() && rel.native().rfind("..", 0) != 0) return rel.string();
    }
    return p.filename().string();
  }
};

inline std::string params_hash_of(const nlohmann::json& params) {
  return to_hex(hash_bytes(params.dump()));
}

inline void write_manifest(const RunManifest& m, const std::filesystem::path& path) {
  nlohmann::ordered_json j;
  j["stage"] = m.stage;
  j["params_hash"] = m.params_hash;
  j["seed"] = m.seed;
  j["workers"] = m.workers;
  auto files = [](const std::vector<std::pair<std::string, std::string>>& list) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& [p, d] : list) arr.push_back({{"path", p}, {"digest", d}});
    return arr;
  };
  j["inputs"] = files(m.inputs);
  j["outputs"] = files(m.outputs);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out << j.dump(2) << '\n';
}

}  // namespace benchtop
