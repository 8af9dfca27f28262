#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace benchtop {

// 64-bit finalizer from the splitmix64 generator. Full avalanche, cheap,
// identical on every platform.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// FNV-1a over raw bytes.
inline std::uint64_t fnv1a64(std::string_view bytes,
                             std::uint64_t seed = 0xcbf29ce484222325ULL) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t hash_bytes(std::string_view bytes) {
  return mix64(fnv1a64(bytes));
}

// Member i of a keyed hash family derived from one seed by counter mixing.
// h_i(x) = mix(x xor key_i), key_i = mix(seed + i).
inline std::uint64_t keyed_hash(std::uint64_t value, std::uint64_t seed,
                                std::uint64_t index) {
  return mix64(value ^ mix64(seed + index));
}

inline std::string to_hex(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[v & 0xf];
    v >>= 4;
  }
  return out;
}

// Deterministic 64-bit PRNG (xorshift-multiply over a splitmix-seeded state).
// Used wherever reproducibility across platforms matters more than quality;
// std::mt19937 would also be portable but distributions are not.
class Rng64 {
 public:
  explicit Rng64(std::uint64_t seed) : state_(mix64(seed ^ 0x5851f42d4c957f2dULL)) {}

  std::uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_);
  }

  // Uniform in [0, n).
  std::uint64_t bounded(std::uint64_t n) {
    return n == 0 ? 0 : next() % n;
  }

  // Uniform double in [0, 1).
  double uniform() {
    return static_cast<double>(next() >> 11) * (1.0 / 9007199254740992.0);
  }

 private:
  std::uint64_t state_;
};

}  // namespace benchtop
