#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace rlab {

// FNV-1a, 64 bit. Used for content fingerprints (datasets, manifests) and
// for deriving deterministic mock behavior from text.
constexpr uint64_t kFnvOffset = 14695981039346656037ull;
constexpr uint64_t kFnvPrime = 1099511628211ull;

constexpr uint64_t fnv1a64(std::string_view data, uint64_t h = kFnvOffset) {
  for (unsigned char c : data) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}

inline uint64_t fnv1a64_u64(uint64_t v, uint64_t h = kFnvOffset) {
  for (int i = 0; i < 8; ++i) {
    h ^= (v >> (8 * i)) & 0xff;
    h *= kFnvPrime;
  }
  return h;
}

// Incremental variant for streaming content.
struct Fnv1a {
  uint64_t state = kFnvOffset;
  void update(std::string_view data) { state = fnv1a64(data, state); }
  uint64_t digest() const { return state; }
};

std::string to_hex(uint64_t v);

// Combines text fields into one stable, well-mixed 64-bit key. Fields are
// separated by an unlikely byte so ("ab","c") and ("a","bc") hash
// differently; a final avalanche step makes every output bit usable for
// seeding and modulo bucketing.
uint64_t hash_fields(std::initializer_list<std::string_view> fields);

}  // namespace rlab
