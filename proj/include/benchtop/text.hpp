#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace benchtop {

// ---------------------------------------------------------------------------
// UTF-8 helpers
// ---------------------------------------------------------------------------

// Decode UTF-8 into code points. Invalid sequences are dropped.
inline std::vector<char32_t> utf8_decode(std::string_view s) {
  std::vector<char32_t> out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    unsigned char c = static_cast<unsigned char>(s[i]);
    char32_t cp = 0;
    std::size_t len = 0;
    if (c < 0x80) {
      cp = c;
      len = 1;
    } else if ((c >> 5) == 0x6) {
      cp = c & 0x1f;
      len = 2;
    } else if ((c >> 4) == 0xe) {
      cp = c & 0x0f;
      len = 3;
    } else if ((c >> 3) == 0x1e) {
      cp = c & 0x07;
      len = 4;
    } else {
      ++i;  // stray continuation or invalid lead byte
      continue;
    }
    if (i + len > s.size()) {
      ++i;
      continue;
    }
    bool ok = true;
    for (std::size_t j = 1; j < len; ++j) {
      unsigned char cc = static_cast<unsigned char>(s[i + j]);
      if ((cc >> 6) != 0x2) {
        ok = false;
        break;
      }
      cp = (cp << 6) | (cc & 0x3f);
    }
    if (!ok) {
      ++i;
      continue;
    }
    // Reject overlong encodings and surrogates.
    if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) ||
        (len == 4 && cp < 0x10000) || (cp >= 0xd800 && cp <= 0xdfff) ||
        cp > 0x10ffff) {
      ++i;
      continue;
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

inline void utf8_append(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xc0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xe0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
  } else {
    out.push_back(static_cast<char>(0xf0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3f)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
  }
}

inline std::string utf8_encode(const std::vector<char32_t>& cps) {
  std::string out;
  out.reserve(cps.size());
  for (char32_t cp : cps) utf8_append(out, cp);
  return out;
}

// ---------------------------------------------------------------------------
// Canonical composition, Latin subset
// ---------------------------------------------------------------------------
// Self-contained composition table for combining marks over Latin letters
// (the sequences that actually occur in scientific prose: accents, umlauts,
// cedillas, carons and friends). Canonical pairs only; compatibility
// decompositions are left alone so formula glyphs survive untouched.
// Keeping the table in-repo makes output byte-identical across platforms,
// which a system Unicode library cannot promise.

namespace detail {

inline const std::unordered_map<std::uint64_t, char32_t>& composition_table() {
  auto key = [](char32_t base, char32_t mark) {
    return (static_cast<std::uint64_t>(base) << 32) | mark;
  };
  static const std::unordered_map<std::uint64_t, char32_t> table = [&] {
    std::unordered_map<std::uint64_t, char32_t> t;
    struct Row {
      char32_t mark;
      const char* bases;         // ASCII base letters, in order
      const char32_t* composed;  // parallel array of composed code points
    };
    static const char32_t grave[] = {0xC0, 0xC8, 0xCC, 0xD2, 0xD9, 0x1F8, 0x1E80, 0x1EF2,
                                     0xE0, 0xE8, 0xEC, 0xF2, 0xF9, 0x1F9, 0x1E81, 0x1EF3};
    static const char32_t acute[] = {0xC1, 0x106, 0xC9, 0x1F4, 0xCD, 0x139, 0x143, 0xD3,
                                     0x154, 0x15A, 0xDA, 0x1E82, 0xDD, 0x179,
                                     0xE1, 0x107, 0xE9, 0x1F5, 0xED, 0x13A, 0x144, 0xF3,
                                     0x155, 0x15B, 0xFA, 0x1E83, 0xFD, 0x17A};
    static const char32_t circ[] = {0xC2, 0x108, 0xCA, 0x11C, 0x124, 0xCE, 0x134, 0xD4,
                                    0x15C, 0xDB, 0x174, 0x176,
                                    0xE2, 0x109, 0xEA, 0x11D, 0x125, 0xEE, 0x135, 0xF4,
                                    0x15D, 0xFB, 0x175, 0x177};
    static const char32_t tilde[] = {0xC3, 0x128, 0xD1, 0xD5, 0x168,
                                     0xE3, 0x129, 0xF1, 0xF5, 0x169};
    static const char32_t macron[] = {0x100, 0x112, 0x12A, 0x14C, 0x16A,
                                      0x101, 0x113, 0x12B, 0x14D, 0x16B};
    static const char32_t breve[] = {0x102, 0x114, 0x11E, 0x12C, 0x14E, 0x16C,
                                     0x103, 0x115, 0x11F, 0x12D, 0x14F, 0x16D};
    static const char32_t dot[] = {0x10A, 0x116, 0x120, 0x130, 0x17B,
                                   0x10B, 0x117, 0x121, 0x17C};
    static const char32_t diaer[] = {0xC4, 0xCB, 0xCF, 0xD6, 0xDC, 0x178,
                                     0xE4, 0xEB, 0xEF, 0xF6, 0xFC, 0xFF};
    static const char32_t ring[] = {0xC5, 0x16E, 0xE5, 0x16F};
    static const char32_t dacute[] = {0x150, 0x170, 0x151, 0x171};
    static const char32_t caron[] = {0x1CD, 0x10C, 0x10E, 0x11A, 0x1E6, 0x1CF, 0x13D, 0x147,
                                     0x1D1, 0x158, 0x160, 0x164, 0x1D3, 0x17D,
                                     0x1CE, 0x10D, 0x10F, 0x11B, 0x1E7, 0x1D0, 0x13E, 0x148,
                                     0x1D2, 0x159, 0x161, 0x165, 0x1D4, 0x17E};
    static const char32_t cedilla[] = {0xC7, 0x122, 0x136, 0x13B, 0x145, 0x156, 0x15E, 0x162,
                                       0xE7, 0x123, 0x137, 0x13C, 0x146, 0x157, 0x15F, 0x163};
    static const char32_t ogonek[] = {0x104, 0x118, 0x12E, 0x172,
                                      0x105, 0x119, 0x12F, 0x173};
    static const Row rows[] = {
        {0x0300, "AEIOUNWYaeiounwy", grave},
        {0x0301, "ACEGILNORSUWYZacegilnorsuwyz", acute},
        {0x0302, "ACEGHIJOSUWYaceghijosuwy", circ},
        {0x0303, "AINOUainou", tilde},
        {0x0304, "AEIOUaeiou", macron},
        {0x0306, "AEGIOUaegiou", breve},
        {0x0307, "CEGIZcegz", dot},
        {0x0308, "AEIOUYaeiouy", diaer},
        {0x030A, "AUau", ring},
        {0x030B, "OUou", dacute},
        {0x030C, "ACDEGILNORSTUZacdegilnorstuz", caron},
        {0x0327, "CGKLNRSTcgklnrst", cedilla},
        {0x0328, "AEIUaeiu", ogonek},
    };
    for (const Row& row : rows) {
      for (std::size_t i = 0; row.bases[i] != '\0'; ++i) {
        t.emplace(key(static_cast<char32_t>(row.bases[i]), row.mark),
                  row.composed[i]);
      }
    }
    return t;
  }();
  return table;
}

}  // namespace detail

// Compose base+combining-mark pairs in place. Marks without a table entry
// pass through unchanged. Iterates so a freshly composed character can pick
// up a following mark only via another table hit (none exist in the subset).
inline void compose_canonical(std::vector<char32_t>& cps) {
  const auto& table = detail::composition_table();
  std::size_t w = 0;
  for (std::size_t r = 0; r < cps.size(); ++r) {
    if (w > 0) {
      auto it = table.find((static_cast<std::uint64_t>(cps[w - 1]) << 32) | cps[r]);
      if (it != table.end()) {
        cps[w - 1] = it->second;
        continue;
      }
    }
    cps[w++] = cps[r];
  }
  cps.resize(w);
}

// ---------------------------------------------------------------------------
// Word utilities (byte level; callers pass normalized UTF-8)
// ---------------------------------------------------------------------------

inline bool is_space_byte(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

// Maximal runs of non-whitespace bytes.
inline std::vector<std::string_view> split_words(std::string_view text) {
  std::vector<std::string_view> words;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space_byte(text[i])) ++i;
    std::size_t start = i;
    while (i < text.size() && !is_space_byte(text[i])) ++i;
    if (i > start) words.push_back(text.substr(start, i - start));
  }
  return words;
}

inline std::string to_lower_ascii(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return out;
}

// Lowercased alphanumeric word runs; punctuation acts as a separator.
// This is the unit used for shingling and lexical retrieval.
inline std::vector<std::string> content_words(std::string_view text) {
  std::vector<std::string> words;
  std::string current;
  for (char ch : text) {
    unsigned char c = static_cast<unsigned char>(ch);
    if (std::isalnum(c) || c >= 0x80) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else if (!current.empty()) {
      words.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) words.push_back(std::move(current));
  return words;
}

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && is_space_byte(s[b])) ++b;
  while (e > b && is_space_byte(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

}  // namespace benchtop
