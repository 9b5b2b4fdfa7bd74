#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "doctest.h"
#include "reid/rng.hpp"

using reid::Purpose;
using reid::Stream;
using reid::StreamLabel;

TEST_CASE("replaying a label reproduces the stream exactly") {
  StreamLabel label{Purpose::site_topic, 17, 3, 2, 5};
  Stream a(42, label);
  Stream b(42, label);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("distinct label fields give distinct streams") {
  StreamLabel base{Purpose::site_topic, 1, 2, 3, 4};
  auto first = [](StreamLabel l) { return Stream(9, l).next_u64(); };
  std::uint64_t ref = first(base);

  StreamLabel other = base;
  other.trial = 2;
  CHECK(first(other) != ref);
  other = base;
  other.user = 3;
  CHECK(first(other) != ref);
  other = base;
  other.site = 4;
  CHECK(first(other) != ref);
  other = base;
  other.epoch = 5;
  CHECK(first(other) != ref);
  other = base;
  other.purpose = Purpose::tie_break;
  CHECK(first(other) != ref);
  CHECK(Stream(10, base).next_u64() != ref);
}

TEST_CASE("swapping values between label fields changes the stream") {
  // field order matters in the absorption chain, so (user=1, site=2) and
  // (user=2, site=1) must not collide
  std::uint64_t a = Stream(0, {Purpose::generic, 0, 1, 2, 0}).next_u64();
  std::uint64_t b = Stream(0, {Purpose::generic, 0, 2, 1, 0}).next_u64();
  CHECK(a != b);
}

TEST_CASE("next_double lies in [0, 1) and has the right mean") {
  Stream s(7, {Purpose::generic, 0, 0, 0, 0});
  double sum = 0;
  const int trials = 100000;
  for (int i = 0; i < trials; ++i) {
    double v = s.next_double();
    REQUIRE(v >= 0.0);
    REQUIRE(v < 1.0);
    sum += v;
  }
  // mean 1/2, sd of the mean = 1/sqrt(12 T); allow 4 sigma
  CHECK(std::abs(sum / trials - 0.5) < 4.0 / std::sqrt(12.0 * trials));
}

TEST_CASE("next_below respects the bound and is near-uniform") {
  Stream s(11, {Purpose::generic, 1, 0, 0, 0});
  std::array<int, 7> counts{};
  const int trials = 70000;
  for (int i = 0; i < trials; ++i) {
    auto v = s.next_below(7);
    REQUIRE(v < 7);
    ++counts[v];
  }
  // chi-square GOF against uniform, df = 6, 99% critical value 16.812
  double chi2 = 0;
  const double expected = trials / 7.0;
  for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
  CHECK(chi2 < 16.812);

  Stream t(11, {Purpose::generic, 2, 0, 0, 0});
  for (int i = 0; i < 100; ++i) CHECK(t.next_below(1) == 0);
}

TEST_CASE("shuffle is uniform over permutations") {
  // n = 3: all 6 permutations; chi-square df = 5, 99% critical 15.086
  std::map<std::array<int, 3>, int> counts;
  const int trials = 60000;
  for (int t = 0; t < trials; ++t) {
    std::array<int, 3> items{0, 1, 2};
    Stream s(3, {Purpose::tie_break, static_cast<std::uint64_t>(t), 0, 0, 0});
    reid::shuffle(items, s);
    ++counts[items];
  }
  REQUIRE(counts.size() == 6);
  double chi2 = 0;
  const double expected = trials / 6.0;
  for (const auto& [perm, c] : counts)
    chi2 += (c - expected) * (c - expected) / expected;
  CHECK(chi2 < 15.086);
}

TEST_CASE("mix64 avalanche sanity") {
  // flipping one input bit flips roughly half the output bits
  int total = 0;
  for (int bit = 0; bit < 64; ++bit) {
    std::uint64_t x = 0x0123456789abcdefull;
    int flips = __builtin_popcountll(reid::mix64(x) ^ reid::mix64(x ^ (1ull << bit)));
    CHECK(flips >= 16);
    CHECK(flips <= 48);
    total += flips;
  }
  CHECK(std::abs(total / 64.0 - 32.0) < 4.0);
}
