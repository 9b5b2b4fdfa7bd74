#include "reid/rng.hpp"

#include <cassert>

namespace reid {

std::uint64_t Stream::next_below(std::uint64_t bound) {
  assert(bound >= 1);
  if (bound == 1) return 0;
  std::uint64_t mask = bound - 1;
  mask |= mask >> 1;
  mask |= mask >> 2;
  mask |= mask >> 4;
  mask |= mask >> 8;
  mask |= mask >> 16;
  mask |= mask >> 32;
  for (;;) {
    std::uint64_t v = next_u64() & mask;
    if (v < bound) return v;
  }
}

}  // namespace reid
