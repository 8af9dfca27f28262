#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "benchtop/errors.hpp"
#include "benchtop/text.hpp"

namespace benchtop {

using TokenId = std::uint32_t;

struct SpecialIds {
  TokenId pad = 0;
  TokenId bos = 1;
  TokenId eos = 2;
  TokenId doc_sep = 3;
};

// Minimal encode/decode contract the pipeline needs. The production
// vocabulary plugs in behind this; the reference implementation below keeps
// the pipeline runnable with zero external assets.
class Tokenizer {
 public:
  virtual ~Tokenizer() = default;
  virtual std::vector<TokenId> encode(std::string_view text) = 0;
  virtual std::string decode(const std::vector<TokenId>& ids) const = 0;
  virtual TokenId vocab_size() const = 0;
  virtual SpecialIds specials() const = 0;
};

// Deterministic whitespace tokenizer with byte fallback, lossless on any
// byte string:
//   - a maximal non-whitespace run is one token (vocabulary grows on first
//     sight, in encounter order);
//   - a single space between two words is implicit and costs no token;
//   - '\n' is its own token; every other whitespace byte (and irregular
//     space runs) falls back to per-byte tokens.
// So "x" * 100 joined by single spaces encodes to exactly 100 tokens.
class WordTokenizer final : public Tokenizer {
 public:
  static constexpr TokenId kPad = 0;
  static constexpr TokenId kBos = 1;
  static constexpr TokenId kEos = 2;
  static constexpr TokenId kDocSep = 3;
  static constexpr TokenId kNewline = 4;
  static constexpr TokenId kByteBase = 5;                 // +256 byte tokens
  static constexpr TokenId kWordBase = kByteBase + 256;   // first word id

  std::vector<TokenId> encode(std::string_view text) override {
    std::vector<TokenId> out;
    out.reserve(text.size() / 5 + 1);
    std::size_t i = 0;
    bool prev_was_word = false;
    while (i < text.size()) {
      std::size_t sep_begin = i;
      while (i < text.size() && is_space_byte(text[i])) ++i;
      std::string_view sep = text.substr(sep_begin, i - sep_begin);
      std::size_t word_begin = i;
      while (i < text.size() && !is_space_byte(text[i])) ++i;
      std::string_view word = text.substr(word_begin, i - word_begin);

      bool implicit = sep == " " && prev_was_word && !word.empty();
      if (!implicit) emit_separator(sep, out);
      if (!word.empty()) {
        out.push_back(word_id(word));
        prev_was_word = true;
      } else {
        prev_was_word = false;
      }
    }
    return out;
  }

  std::string decode(const std::vector<TokenId>& ids) const override {
    std::string out;
    bool prev_was_word = false;
    for (TokenId id : ids) {
      if (id == kNewline) {
        out.push_back('\n');
        prev_was_word = false;
      } else if (id >= kByteBase && id < kWordBase) {
        out.push_back(static_cast<char>(id - kByteBase));
        prev_was_word = false;
      } else if (id >= kWordBase) {
        std::size_t w = id - kWordBase;
        if (w >= words_.size()) throw Error("token id outside vocabulary");
        if (prev_was_word) out.push_back(' ');
        out += words_[w];
        prev_was_word = true;
      } else {
        prev_was_word = false;  // pad/bos/eos/doc_sep decode to nothing
      }
    }
    return out;
  }

  TokenId vocab_size() const override {
    return kWordBase + static_cast<TokenId>(words_.size());
  }

  SpecialIds specials() const override {
    return SpecialIds{kPad, kBos, kEos, kDocSep};
  }

 private:
  void emit_separator(std::string_view sep, std::vector<TokenId>& out) const {
    for (char c : sep) {
      if (c == '\n') {
        out.push_back(kNewline);
      } else {
        out.push_back(kByteBase + static_cast<unsigned char>(c));
      }
    }
  }

  struct TransparentHash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const {
      return std::hash<std::string_view>{}(s);
    }
  };

  TokenId word_id(std::string_view word) {
    auto it = ids_.find(word);
    if (it != ids_.end()) return it->second;
    TokenId id = kWordBase + static_cast<TokenId>(words_.size());
    words_.emplace_back(word);
    ids_.emplace(words_.back(), id);
    return id;
  }

  std::vector<std::string> words_;
  std::unordered_map<std::string, TokenId, TransparentHash, std::equal_to<>> ids_;
};

inline std::unique_ptr<Tokenizer> make_tokenizer(std::string_view kind) {
  if (kind == "word" || kind.empty()) return std::make_unique<WordTokenizer>();
  throw Error("unknown tokenizer kind: " + std::string(kind));
}

}  // namespace benchtop
