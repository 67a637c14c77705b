#include "ratchet/rng.hpp"

#include <limits>

namespace ratchet {

std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
  const std::uint64_t limit = max - (max % n + 1) % n;
  std::uint64_t v;
  do {
    v = rng();
  } while (v > limit);
  return v % n;
}

}  // namespace ratchet
