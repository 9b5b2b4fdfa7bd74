#pragma once

#include <cstdint>
#include <utility>

namespace reid {

// splitmix64 finalizer; full-avalanche 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Weyl increment used both to space counters and to absorb label fields.
inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ull;

// Every consumer of randomness names its stream with a purpose so that
// unrelated draws never alias, no matter how the call order changes.
enum class Purpose : std::uint64_t {
  top_set = 1,     // population top-set sampling
  site_topic = 2,  // per (user, site, epoch) topic draw
  trial_user = 3,  // which user a trial targets
  tie_break = 4,   // random tie-breaking permutations
  matrix_draw = 5, // sampling observations from an explicit matrix
  song_draw = 6,   // sampling liked items in the song experiment
  rule_draw = 7,   // sampling a prediction from a randomized rule
  generic = 8,
};

// Structured stream address. Streams for distinct labels are independent;
// a stream is a pure function of (master_seed, label), so any draw can be
// reproduced in isolation. That is what makes parallel replay exact.
struct StreamLabel {
  Purpose purpose = Purpose::generic;
  std::uint64_t trial = 0;
  std::uint64_t user = 0;
  std::uint64_t site = 0;
  std::uint64_t epoch = 0;
};

// Fold a label into a 64-bit stream base. Chained absorption: each field
// is added together with kGolden and remixed, so field order matters and
// zero fields still perturb the chain.
constexpr std::uint64_t derive_stream_base(std::uint64_t master_seed,
                                           const StreamLabel& label) {
  std::uint64_t h = mix64(master_seed + kGolden);
  h = mix64(h + static_cast<std::uint64_t>(label.purpose) + kGolden);
  h = mix64(h + label.trial + kGolden);
  h = mix64(h + label.user + kGolden);
  h = mix64(h + label.site + kGolden);
  h = mix64(h + label.epoch + kGolden);
  return h;
}

// Counter-based generator (splitmix64 over a derived base). Cheap to
// construct; holds only the counter state.
class Stream {
 public:
  Stream(std::uint64_t master_seed, const StreamLabel& label)
      : state_(derive_stream_base(master_seed, label)) {}

  std::uint64_t next_u64() {
    state_ += kGolden;
    return mix64(state_);
  }

  // Uniform in [0, 1); 53-bit mantissa, never returns 1.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform in [0, bound); bound >= 1. Masked rejection, unbiased and
  // portable (no 128-bit multiply, no modulo bias).
  std::uint64_t next_below(std::uint64_t bound);

 private:
  std::uint64_t state_;
};

// Fisher-Yates; uniform over permutations given a uniform stream.
template <class Items>
void shuffle(Items& items, Stream& stream) {
  using std::swap;
  for (std::size_t i = items.size(); i > 1; --i)
    swap(items[i - 1], items[stream.next_below(i)]);
}

}  // namespace reid
