#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "qneq/error.hpp"
#include "qneq/hidden_variables.hpp"

using namespace qneq;
using doctest::Approx;

namespace {

Vec3 random_unit(std::mt19937_64& g) {
  std::normal_distribution<double> n;
  return UnitAxis::normalized({n(g), n(g), n(g)}).components();
}

// m with a prescribed projection on the model axis (1, 0, 0).
UnitAxis with_projection(double mn) { return UnitAxis({mn, std::sqrt(1 - mn * mn), 0}); }

const ModelSpec kModelX(UnitAxis({1, 0, 0}), 1.0);

}  // namespace

TEST_CASE("outcome_map examples") {
  const UnitAxis n({0, 0, 1});
  const ModelSpec model(n, 1.0);
  CHECK(outcome_map(n, {1, -0.5}, model) == 1);
  CHECK(outcome_map(n, {-1, 0.5}, model) == -1);
  // Tie: m.n == u with s = +1 gives +1.
  CHECK(outcome_map(with_projection(0.5), {1, 0.5}, kModelX) == 1);
  // Deterministic.
  for (int i = 0; i < 10; ++i) CHECK(outcome_map(with_projection(0.2), {-1, -0.3}, kModelX) == 1);
}

TEST_CASE("equilibrium density") {
  const auto d0 = LambdaDensity::equilibrium(ModelSpec(UnitAxis({1, 0, 0}), 0.0));
  CHECK(d0.weight_plus() == 0.5);
  CHECK(d0.weight_minus() == 0.5);
  CHECK(std::holds_alternative<shape::Uniform>(d0.plus().shape()));
  const auto d1 = LambdaDensity::equilibrium(kModelX);
  CHECK(d1.weight_plus() == 1.0);
  CHECK(d1.weight_minus() == 0.0);

  // Analytic oracle for P = 0.8 at m = n: sum_s w_s * int du/2 [s - u >= 0].
  const ModelSpec model(UnitAxis({1, 0, 0}), 0.8);
  const double w_plus = 0.9, w_minus = 0.1;
  const double oracle_mean = w_plus * (2 * 1.0 - 1) + w_minus * (2 * 0.0 - 1);
  CHECK(exact_mean(UnitAxis({1, 0, 0}), LambdaDensity::equilibrium(model), model) == Approx(oracle_mean));
  CHECK(oracle_mean == Approx(0.8));
}

TEST_CASE("equilibrium reproduces the Born rule for random models") {
  std::mt19937_64 g(1);
  std::uniform_real_distribution<double> r(0, 1);
  for (int i = 0; i < 1000; ++i) {
    const ModelSpec model(UnitAxis(random_unit(g)), r(g));
    const UnitAxis m(random_unit(g));
    const auto density = LambdaDensity::equilibrium(model);
    const double born = born_prob(m, model.quantum_state()).plus;
    REQUIRE(std::abs(exact_prob_plus(m, density, model) - born) < 1e-12);
    const double minus = density.weight_plus() * (1 - density.plus().cdf(dot(m.components(), model.axis().components()))) +
                         density.weight_minus() * (1 - density.minus().cdf(-dot(m.components(), model.axis().components())));
    REQUIRE(std::abs(exact_prob_plus(m, density, model) + minus - 1.0) < 1e-12);
  }
}

TEST_CASE("exact_prob_plus examples") {
  const auto delta = LambdaDensity::delta({1, 0.3});
  CHECK(exact_prob_plus(with_projection(0.5), delta, kModelX) == 1.0);
  CHECK(exact_prob_plus(with_projection(0.2), delta, kModelX) == 0.0);
  CHECK(exact_mean(with_projection(0.2), delta, kModelX) == -1.0);

  // Two equal bins on [-1, 0], [0, 1], s = +1 only, m.n = 0, against quadrature.
  const LambdaDensity hist(1.0, SignDensity(shape::Histogram{{-1, 0, 1}, {1, 1}}), SignDensity{});
  const double quad = oracle::trapezoid([](double u) { return (0.0 - u >= 0.0 ? 1.0 : 0.0) * 0.5; }, -1, 1, 1000001);
  CHECK(exact_prob_plus(with_projection(0.0), hist, kModelX) == Approx(0.5).epsilon(1e-12));
  CHECK(quad == Approx(0.5).epsilon(1e-5));
}

TEST_CASE("closed-form CDFs agree with quadrature of the raw densities") {
  // Skewed piecewise-linear density and a lopsided histogram, defined here
  // independently of the library's normalisation.
  const std::vector<double> ku{-1.0, -0.2, 0.4, 1.0};
  const std::vector<double> kf{0.0, 2.0, 0.5, 0.1};
  auto pl_raw = [&](double u) {
    for (std::size_t i = 0; i + 1 < ku.size(); ++i) {
      if (u >= ku[i] && u <= ku[i + 1]) return kf[i] + (kf[i + 1] - kf[i]) * (u - ku[i]) / (ku[i + 1] - ku[i]);
    }
    return 0.0;
  };
  const double pl_norm = oracle::trapezoid(pl_raw, -1, 1, 1000001);
  auto hist_raw = [](double u) { return u < -0.5 ? 0.2 / 0.5 : (u < 0.25 ? 0.7 / 0.75 : 0.1 / 0.75); };

  const LambdaDensity density(0.7, SignDensity(shape::PiecewiseLinear{ku, kf}),
                              SignDensity(shape::Histogram{{-1, -0.5, 0.25, 1}, {0.2, 0.7, 0.1}}));
  for (double mn : {-0.9, -0.35, 0.0, 0.1, 0.6, 0.95}) {
    const UnitAxis m = with_projection(mn);
    const double quad =
        0.7 * oracle::trapezoid([&](double u) { return pl_raw(u) / pl_norm * (mn - u >= 0 ? 1.0 : 0.0); }, -1, 1, 1000001) +
        0.3 * oracle::trapezoid([&](double u) { return hist_raw(u) * (-mn - u >= 0 ? 1.0 : 0.0); }, -1, 1, 1000001);
    CHECK(exact_prob_plus(m, density, kModelX) == Approx(quad).epsilon(2e-5));
    CHECK(exact_mean(m, density, kModelX) == Approx(2 * quad - 1).epsilon(4e-5));
  }
}

TEST_CASE("quantile inverts cdf for every shape") {
  const std::vector<SignDensity> shapes{
      SignDensity{},
      SignDensity(shape::Histogram{{-1, -0.2, 0.0, 0.9}, {0.3, 0.0, 0.7}}),
      SignDensity(shape::PiecewiseLinear{{-0.8, 0.0, 0.5, 1.0}, {0.0, 3.0, 3.0, 0.0}}),
      SignDensity(shape::PiecewiseLinear{{-1.0, 1.0}, {2.0, 0.0}}),
  };
  for (const auto& s : shapes) {
    for (int i = 1; i < 200; ++i) {
      const double q = i / 200.0;
      REQUIRE(s.cdf(s.quantile(q)) == Approx(q).epsilon(1e-12));
    }
    CHECK(s.cdf(-1.0 - 1e-9) == 0.0);
    CHECK(s.cdf(1.0) == 1.0);
  }
}

TEST_CASE("density validation") {
  CHECK_THROWS_AS(SignDensity(shape::Delta{1.5}), PreconditionError);
  CHECK_THROWS_AS(SignDensity(shape::Histogram{{-1, 1}, {1, 2}}), PreconditionError);
  CHECK_THROWS_AS(SignDensity(shape::Histogram{{-1, 0, 1}, {-1, 2}}), PreconditionError);
  CHECK_THROWS_AS(SignDensity(shape::PiecewiseLinear{{-1, -1, 1}, {1, 1, 1}}), PreconditionError);
  CHECK_THROWS_AS(SignDensity(shape::PiecewiseLinear{{-1, 1}, {0, 0}}), PreconditionError);
  CHECK_THROWS_AS(LambdaDensity(1.2, SignDensity{}, SignDensity{}), PreconditionError);
  CHECK_THROWS_AS(ModelSpec(UnitAxis({1, 0, 0}), 1.1), PreconditionError);
  // Normalisation: integrates to 1.
  const SignDensity pl(shape::PiecewiseLinear{{-1, 1}, {5, 5}});
  CHECK(pl.cdf(1.0) == 1.0);
  CHECK(pl.cdf(0.0) == Approx(0.5).epsilon(1e-12));
}

TEST_CASE("sample_lambda") {
  const CounterRng rng(99, 1);
  CHECK(sample_lambda(LambdaDensity::equilibrium(kModelX), rng, 0).empty());

  const auto delta = LambdaDensity::delta({-1, 0.25});
  for (const auto& l : sample_lambda(delta, rng, 1000)) REQUIRE(l == HiddenVar{-1, 0.25});

  const auto uniform = LambdaDensity(0.5, SignDensity{}, SignDensity{});
  const auto draws = sample_lambda(uniform, rng, 1000000);
  double mean = 0.0;
  for (const auto& l : draws) mean += l.u;
  mean /= draws.size();
  CHECK(std::abs(mean) < 3 * (1 / std::sqrt(3.0)) / 1e3);

  SUBCASE("deterministic and independent of worker count") {
    const auto a = sample_lambda(uniform, rng, 20000, 5, 1);
    const auto b = sample_lambda(uniform, rng, 20000, 5, 4);
    CHECK(a == b);
    CHECK(a.front() == sample_one(uniform, rng, 5));
  }
  SUBCASE("empirical u distribution matches the CDF (KS distance shrinks)") {
    const SignDensity pl(shape::PiecewiseLinear{{-1.0, -0.2, 0.4, 1.0}, {0.0, 2.0, 0.5, 0.1}});
    const LambdaDensity d(1.0, pl, SignDensity{});
    double previous = 1.0;
    for (std::size_t n : {1000u, 100000u}) {
      auto s = sample_lambda(d, CounterRng(3, 1), n);
      std::vector<double> u;
      for (const auto& l : s) u.push_back(l.u);
      std::sort(u.begin(), u.end());
      double ks = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double f = pl.cdf(u[i]);
        ks = std::max({ks, (i + 1.0) / n - f, f - double(i) / n});
      }
      CHECK(ks < 1.63 / std::sqrt(double(n)));  // 1% critical value
      CHECK(ks < previous);
      previous = ks;
    }
  }
}

TEST_CASE("Monte Carlo means converge to exact means") {
  const LambdaDensity d(0.6, SignDensity(shape::PiecewiseLinear{{-1.0, 0.3, 1.0}, {0.2, 1.5, 0.0}}),
                        SignDensity(shape::Histogram{{-1, 0, 1}, {0.8, 0.2}}));
  const UnitAxis m = with_projection(0.35);
  const double exact = exact_mean(m, d, kModelX);
  for (std::size_t count : {1000u, 10000u, 100000u, 1000000u}) {
    const auto draws = sample_lambda(d, CounterRng(count, 1), count);
    double sum = 0.0;
    for (const auto& l : draws) sum += outcome_map(m, l, kModelX);
    const double mean = sum / count;
    const double se = std::sqrt((1 - exact * exact) / count);
    CHECK(std::abs(mean - exact) < 4 * se);
  }
}

TEST_CASE("additivity residual") {
  std::mt19937_64 g(23);
  std::uniform_real_distribution<double> r(0, 1);
  for (int i = 0; i < 1000; ++i) {
    const ModelSpec model(UnitAxis(random_unit(g)), r(g));
    const auto [triad, c] = rotate_triad(rotation_matrix(random_unit(g), 2 * std::numbers::pi * r(g)),
                                         OrthonormalTriad::standard(), random_unit(g));
    REQUIRE(std::abs(additivity_residual(LambdaDensity::equilibrium(model), model, triad, c)) < 1e-12);
  }

  const auto triad = OrthonormalTriad::standard();
  const auto delta = LambdaDensity::delta({1, 0.1});
  const ModelSpec model(UnitAxis::normalized({1, 2, 0.5}), 1.0);
  CHECK(additivity_residual(delta, model, triad, {1, 0, 0}) == 0.0);
  const double s = std::sqrt(0.5);
  const double bound = oracle::min_pointwise_residual(s, s);
  CHECK(bound == Approx(std::sqrt(2.0) - 1).epsilon(1e-15));
  CHECK(std::abs(additivity_residual(delta, model, triad, {s, s, 0})) >= bound - 1e-15);

  CHECK_THROWS_AS(additivity_residual(delta, model, triad, {1, 1, 0}), PreconditionError);
}

TEST_CASE("pointwise additivity check") {
  const auto triad = OrthonormalTriad::standard();
  const ModelSpec model(UnitAxis::normalized({0.3, -0.4, 0.8}), 1.0);
  const double s = std::sqrt(0.5);
  const auto allowed = oracle::pointwise_residuals(s, s);
  for (int sign : {-1, 1}) {
    for (int k = 0; k <= 100; ++k) {
      const HiddenVar l{sign, -1.0 + 2.0 * k / 100};
      const auto a = pointwise_additivity_check(l, model, triad, {s, s, 0});
      REQUIRE_FALSE(a.additive);
      REQUIRE(std::any_of(allowed.begin(), allowed.end(), [&](double v) { return std::abs(v - a.residual) < 1e-15; }));
      REQUIRE_FALSE(pointwise_additivity_check(l, model, triad, {0.6, 0.8, 0}).additive);
    }
  }
  CHECK(oracle::min_pointwise_residual(0.6, 0.8) > 0.0);
  CHECK_THROWS_AS(pointwise_additivity_check({1, 0}, model, triad, {1, 0, 0}), PreconditionError);
  CHECK_THROWS_AS(pointwise_additivity_check({1, 0}, model, triad, {0.6, 0.6, 0.5291502622129181}), PreconditionError);
}
