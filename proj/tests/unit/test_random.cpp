#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "qneq/random.hpp"

using namespace qneq;

TEST_CASE("philox4x32-10 known-answer vectors") {
  using A4 = std::array<std::uint32_t, 4>;
  CHECK(philox4x32({0, 0, 0, 0}, {0, 0}) == A4{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        A4{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        A4{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("counter stream draws are pure functions of (seed, stream, index)") {
  const CounterRng a(42, 1), b(42, 1), c(42, 2), d(43, 1);
  for (std::uint64_t i : {0ull, 1ull, 1000ull, (1ull << 40) + 7}) {
    CHECK(a.uniform2(i) == b.uniform2(i));
    CHECK(a.uniform2(i) != c.uniform2(i));
    CHECK(a.uniform2(i) != d.uniform2(i));
    const auto u = a.uniform2(i);
    CHECK(u[0] >= 0.0);
    CHECK(u[0] < 1.0);
    CHECK(u[1] >= 0.0);
    CHECK(u[1] < 1.0);
  }
}

TEST_CASE("uniform draws have the right first two moments") {
  const CounterRng rng(7, 0);
  const int n = 200000;
  double sum = 0, sum2 = 0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform(static_cast<std::uint64_t>(i));
    sum += u;
    sum2 += u * u;
  }
  // Standard errors: 1/sqrt(12 n) for the mean, sqrt(4/45 / n) for E[u^2].
  CHECK(std::abs(sum / n - 0.5) < 5 * 0.2887 / std::sqrt(n));
  CHECK(std::abs(sum2 / n - 1.0 / 3) < 5 * 0.2981 / std::sqrt(n));
}

TEST_CASE("derived seeds are distinct across tags") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t tag = 0; tag < 1000; ++tag) seen.insert(derive_seed(12345, tag));
  CHECK(seen.size() == 1000);
  CHECK(derive_seed(1, 2) == derive_seed(1, 2));
}

TEST_CASE("parallel_for covers the range exactly once for any worker count") {
  for (unsigned threads : {1u, 2u, 3u, 8u}) {
    std::vector<int> hits(50000, 0);
    parallel_for(hits.size(), threads, [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) hits[i] += 1;
    });
    for (int h : hits) REQUIRE(h == 1);
  }
  parallel_for(0, 4, [](std::size_t, std::size_t) { FAIL("called on empty range"); });
}
