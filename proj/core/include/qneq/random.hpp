#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>

namespace qneq {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
/// Maps a 128-bit counter and a 64-bit key to 128 pseudo-random bits.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// SplitMix64 finaliser; used to derive child seeds from a parent seed.
std::uint64_t splitmix64(std::uint64_t x);

/// Child seed for a numbered purpose. Distinct tags give unrelated seeds.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag);

/// A reproducible random stream addressed by (seed, stream id, index).
///
/// Draw `i` of the stream never depends on how many draws were made before
/// it, so any partition of an index range across workers reproduces the
/// serial result bit for bit.
class CounterRng {
public:
  CounterRng(std::uint64_t seed, std::uint32_t stream) : seed_(seed), stream_(stream) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint32_t stream() const noexcept { return stream_; }

  /// Two independent doubles in [0, 1) with 53-bit resolution for `index`.
  std::array<double, 2> uniform2(std::uint64_t index, std::uint32_t block = 0) const;

  double uniform(std::uint64_t index) const { return uniform2(index)[0]; }

private:
  std::uint64_t seed_;
  std::uint32_t stream_;
};

/// Runs fn(begin, end) over contiguous chunks of [0, count).
/// threads == 0 selects std::thread::hardware_concurrency().
void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace qneq
