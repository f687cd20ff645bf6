#include "qneq/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>

#include "qneq/error.hpp"

namespace qneq {

void ProtocolSpec::validate() const {
  if (photon_count < 1) throw PreconditionError("protocol needs at least one photon");
  if (angles.empty()) throw PreconditionError("protocol angle set is empty");
  for (double a : angles) {
    if (!std::isfinite(a)) throw PreconditionError("protocol angles must be finite");
  }
}

std::vector<double> uniform_angle_grid(std::size_t count) {
  std::vector<double> out(count);
  for (std::size_t k = 0; k < count; ++k) out[k] = std::numbers::pi * static_cast<double>(k) / static_cast<double>(count);
  return out;
}

namespace {

std::size_t setting_index(const ProtocolSpec& spec, const CounterRng& angle_rng, std::uint64_t i) {
  const std::size_t k = spec.angles.size();
  if (spec.mode == ProtocolMode::FixedGrid) return static_cast<std::size_t>(i % k);
  const auto pick = static_cast<std::size_t>(angle_rng.uniform(i) * static_cast<double>(k));
  return std::min(pick, k - 1);
}

}  // namespace

std::vector<PhotonEvent> run_protocol(const ModelSpec& model, const LambdaDensity& density,
                                      const ProtocolSpec& spec, unsigned threads) {
  spec.validate();
  std::vector<UnitAxis> axes;
  axes.reserve(spec.angles.size());
  for (double a : spec.angles) axes.push_back(polariser_axis(a));
  const CounterRng lambda_rng(spec.seed, kLambdaStream);
  const CounterRng angle_rng(spec.seed, kAngleStream);

  std::vector<PhotonEvent> events(spec.photon_count);
  parallel_for(events.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const std::size_t k = setting_index(spec, angle_rng, i);
      const HiddenVar lambda = sample_one(density, lambda_rng, i);
      events[i] = {i, spec.angles[k], outcome_map(axes[k], lambda, model)};
    }
  });
  return events;
}

AngleCounts tally_protocol(const ModelSpec& model, const LambdaDensity& density, const ProtocolSpec& spec,
                           unsigned threads) {
  spec.validate();
  const std::size_t k = spec.angles.size();
  std::vector<UnitAxis> axes;
  axes.reserve(k);
  for (double a : spec.angles) axes.push_back(polariser_axis(a));
  const CounterRng lambda_rng(spec.seed, kLambdaStream);
  const CounterRng angle_rng(spec.seed, kAngleStream);

  AngleCounts out{spec.angles, std::vector<std::uint64_t>(k, 0), std::vector<std::uint64_t>(k, 0)};
  std::mutex merge;
  parallel_for(spec.photon_count, threads, [&](std::size_t begin, std::size_t end) {
    std::vector<std::uint64_t> plus(k, 0), n(k, 0);
    for (std::size_t i = begin; i < end; ++i) {
      const std::size_t a = setting_index(spec, angle_rng, i);
      const HiddenVar lambda = sample_one(density, lambda_rng, i);
      n[a] += 1;
      if (outcome_map(axes[a], lambda, model) > 0) plus[a] += 1;
    }
    std::scoped_lock lock(merge);
    for (std::size_t a = 0; a < k; ++a) {
      out.n_plus[a] += plus[a];
      out.n[a] += n[a];
    }
  });
  return out;
}

std::vector<int> run_arrangement(const UnitAxis& m, const ModelSpec& model, const LambdaDensity& density,
                                 std::uint64_t count, std::uint64_t seed, unsigned threads) {
  if (count < 1) throw PreconditionError("arrangement needs at least one trial");
  const CounterRng rng(seed, kLambdaStream);
  std::vector<int> out(count);
  parallel_for(count, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) out[i] = outcome_map(m, sample_one(density, rng, i), model);
  });
  return out;
}

}  // namespace qneq
