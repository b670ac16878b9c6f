#include "rlab/hash.hpp"

namespace rlab {

std::string to_hex(uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[v & 0xf];
    v >>= 4;
  }
  return out;
}

uint64_t hash_fields(std::initializer_list<std::string_view> fields) {
  Fnv1a h;
  for (auto f : fields) {
    h.update(f);
    h.update(std::string_view("\x1f", 1));
  }
  // FNV-1a diffuses trailing bytes poorly into the high bits (and its low
  // bit is a parity of the input), so keys differing only in a short suffix
  // would cluster. An avalanche pass makes the key fit for seeding and
  // bucketing.
  uint64_t x = h.digest();
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ull;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebull;
  x ^= x >> 31;
  return x;
}

}  // namespace rlab
