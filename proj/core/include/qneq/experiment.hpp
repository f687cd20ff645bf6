#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "qneq/hidden_variables.hpp"

namespace qneq {

/// One photon of the time ensemble: polariser setting and the +/-1 outcome.
struct PhotonEvent {
  std::uint64_t index = 0;
  double theta = 0.0;
  int outcome = 1;

  friend bool operator==(const PhotonEvent&, const PhotonEvent&) = default;
};

enum class ProtocolMode {
  RandomReset,  // each photon picks a setting uniformly from the angle grid
  FixedGrid,    // photon i uses angles[i mod size]
};

struct ProtocolSpec {
  ProtocolMode mode = ProtocolMode::RandomReset;
  std::vector<double> angles;
  std::uint64_t photon_count = 1;
  std::uint64_t seed = 0;

  void validate() const;
};

/// `count` equally spaced polariser angles k*pi/count on [0, pi).
std::vector<double> uniform_angle_grid(std::size_t count);

/// Random stream ids within a protocol seed.
inline constexpr std::uint32_t kLambdaStream = 1;
inline constexpr std::uint32_t kAngleStream = 2;

/// Simulates the single-photon polariser protocol. Event i draws lambda and
/// (in random-reset mode) its setting from counter index i, so the sequence
/// is the same for any thread count.
std::vector<PhotonEvent> run_protocol(const ModelSpec& model, const LambdaDensity& density,
                                      const ProtocolSpec& spec, unsigned threads = 0);

/// Per-angle (n_plus, n) counts of the exact event stream run_protocol would
/// produce, without materialising it.
struct AngleCounts {
  std::vector<double> angles;
  std::vector<std::uint64_t> n_plus;
  std::vector<std::uint64_t> n;
};
AngleCounts tally_protocol(const ModelSpec& model, const LambdaDensity& density, const ProtocolSpec& spec,
                           unsigned threads = 0);

/// Fixed-setting sub-ensemble for one arrangement m.
std::vector<int> run_arrangement(const UnitAxis& m, const ModelSpec& model, const LambdaDensity& density,
                                 std::uint64_t count, std::uint64_t seed, unsigned threads = 0);

}  // namespace qneq
