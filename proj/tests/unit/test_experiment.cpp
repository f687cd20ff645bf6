#include <doctest.h>

#include <cmath>
#include <numbers>

#include "qneq/analysis.hpp"
#include "qneq/error.hpp"
#include "qneq/experiment.hpp"

using namespace qneq;

namespace {
const ModelSpec kModelX(UnitAxis({1, 0, 0}), 1.0);
}

TEST_CASE("single photon from a delta ensemble") {
  // m.n = 0.5 at Theta = pi/6 for n = (1, 0, 0).
  const auto events = run_protocol(kModelX, LambdaDensity::delta({1, 0.3}),
                                    {ProtocolMode::FixedGrid, {std::numbers::pi / 6}, 1, 7});
  REQUIRE(events.size() == 1);
  CHECK(events[0].index == 0);
  CHECK(events[0].outcome == 1);
}

TEST_CASE("fully polarised beam at 60 degrees transmits cos^2 60 = 1/4") {
  const ProtocolSpec spec{ProtocolMode::FixedGrid, {std::numbers::pi / 3}, 1000000, 2024};
  const auto events = run_protocol(kModelX, LambdaDensity::equilibrium(kModelX), spec);
  double plus = 0;
  for (const auto& e : events) plus += e.outcome > 0;
  CHECK(std::abs(plus / 1e6 - 0.25) < 0.0013);
}

TEST_CASE("random reset over 12 angles with an unpolarised beam") {
  const ModelSpec model(UnitAxis({1, 0, 0}), 0.0);
  const ProtocolSpec spec{ProtocolMode::RandomReset, uniform_angle_grid(12), 240000, 5};
  const auto table = tabulate(run_protocol(model, LambdaDensity::equilibrium(model), spec));
  CHECK(table.size() == 12);
  for (const auto& r : table.rows()) {
    CHECK(std::abs(r.n_plus / r.n - 0.5) < 4 * std::sqrt(0.25 / r.n));
  }
}

TEST_CASE("event streams are deterministic and independent of worker count") {
  const LambdaDensity d(0.3, SignDensity(shape::Histogram{{-1, 0.2, 1}, {0.4, 0.6}}), SignDensity{});
  const ProtocolSpec spec{ProtocolMode::RandomReset, uniform_angle_grid(24), 50000, 99};
  const auto a = run_protocol(kModelX, d, spec, 1);
  const auto b = run_protocol(kModelX, d, spec, 3);
  CHECK(a == b);
  const auto c = run_protocol(kModelX, d, {ProtocolMode::RandomReset, uniform_angle_grid(24), 50000, 100}, 1);
  CHECK(a != c);

  SUBCASE("streaming tally matches tabulation of the materialised stream") {
    const auto tally = tally_protocol(kModelX, d, spec, 2);
    const auto t1 = tabulate(a);
    const auto t2 = tabulate(tally);
    REQUIRE(t1.size() == t2.size());
    for (std::size_t k = 0; k < t1.size(); ++k) {
      CHECK(t1.rows()[k].theta == t2.rows()[k].theta);
      CHECK(t1.rows()[k].n_plus == t2.rows()[k].n_plus);
      CHECK(t1.rows()[k].n == t2.rows()[k].n);
    }
  }
}

TEST_CASE("fixed grid cycles through the settings in order") {
  const auto angles = uniform_angle_grid(5);
  const auto events = run_protocol(kModelX, LambdaDensity::equilibrium(kModelX),
                                   {ProtocolMode::FixedGrid, angles, 17, 1});
  for (const auto& e : events) CHECK(e.theta == angles[e.index % 5]);
}

TEST_CASE("per-angle frequencies converge to exact probabilities") {
  // For each seed and bin: |p^ - p| < 5 sigma. Bins with p in {0, 1} must match exactly.
  const LambdaDensity d(0.8, SignDensity(shape::PiecewiseLinear{{-1, 0, 1}, {0.1, 2, 0.3}}),
                        SignDensity(shape::Delta{-0.4}));
  const auto angles = uniform_angle_grid(8);
  int failures = 0, checks = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto tally = tally_protocol(kModelX, d, {ProtocolMode::FixedGrid, angles, 8 * 20000, seed});
    for (std::size_t k = 0; k < angles.size(); ++k) {
      const double p = exact_prob_plus(polariser_axis(angles[k]), d, kModelX);
      const double n = static_cast<double>(tally.n[k]);
      const double dev = std::abs(tally.n_plus[k] / n - p);
      ++checks;
      if (!(dev == 0.0 || dev < 5 * std::sqrt(p * (1 - p) / n))) ++failures;
    }
  }
  CHECK(failures <= checks / 100);
}

TEST_CASE("run_arrangement") {
  const auto delta = LambdaDensity::delta({1, 0.1});
  const auto out = run_arrangement(UnitAxis({0, 1, 0}), kModelX, delta, 1000, 3);
  for (int o : out) REQUIRE(o == out.front());

  const auto eq = LambdaDensity::equilibrium(kModelX);
  const auto orth = run_arrangement(UnitAxis({0, 0, 1}), kModelX, eq, 100000, 4);
  CHECK(std::abs(summarize(orth).mean()) < 4 / std::sqrt(100000.0));

  const ModelSpec model(UnitAxis({1, 0, 0}), 0.8);
  const auto aligned = run_arrangement(UnitAxis({1, 0, 0}), model, LambdaDensity::equilibrium(model), 1000000, 5);
  CHECK(std::abs(summarize(aligned).mean() - 0.8) < 0.0024);

  SUBCASE("distinct seeds give uncorrelated sub-ensembles") {
    const ModelSpec m0(UnitAxis({1, 0, 0}), 0.0);
    const auto a = run_arrangement(UnitAxis({1, 0, 0}), m0, LambdaDensity::equilibrium(m0), 100000, 11);
    const auto b = run_arrangement(UnitAxis({1, 0, 0}), m0, LambdaDensity::equilibrium(m0), 100000, 12);
    double sa = 0, sb = 0, sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      sa += a[i], sb += b[i], sab += a[i] * b[i], saa += a[i] * a[i], sbb += b[i] * b[i];
    }
    const double n = static_cast<double>(a.size());
    const double r = (sab / n - sa / n * sb / n) /
                     std::sqrt((saa / n - sa * sa / n / n) * (sbb / n - sb * sb / n / n));
    CHECK(std::abs(r) < 4 / std::sqrt(n));
  }
  CHECK_THROWS_AS(run_arrangement(UnitAxis({1, 0, 0}), kModelX, eq, 0, 1), PreconditionError);
}

TEST_CASE("protocol validation") {
  CHECK_THROWS_AS(run_protocol(kModelX, LambdaDensity::equilibrium(kModelX), {ProtocolMode::FixedGrid, {}, 10, 1}),
                  PreconditionError);
  CHECK_THROWS_AS(run_protocol(kModelX, LambdaDensity::equilibrium(kModelX), {ProtocolMode::FixedGrid, {0.0}, 0, 1}),
                  PreconditionError);
}
