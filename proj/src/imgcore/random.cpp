#include "lesion/random.hpp"

namespace lesion {

std::uint64_t Rng::below(std::uint64_t n) {
  if (n <= 1) return 0;
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t x = next();
  while (x >= limit) x = next();
  return x % n;
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis) {
  std::uint64_t h = basis;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

Rng derive_stream(std::uint64_t root_seed, std::string_view name, std::uint64_t index) {
  Rng mix(root_seed ^ fnv1a64(name));
  std::uint64_t s = mix.next();
  Rng mix2(s ^ (index * 0xD1B54A32D192ED03ULL));
  mix2.next();
  return Rng(mix2.next());
}

}  // namespace lesion
