#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "qneq/bloch.hpp"
#include "qneq/error.hpp"

using namespace qneq;
using doctest::Approx;

namespace {

Vec3 random_unit(std::mt19937_64& g) {
  std::normal_distribution<double> n;
  return UnitAxis::normalized({n(g), n(g), n(g)}).components();
}

Mat3 random_rotation(std::mt19937_64& g) {
  std::uniform_real_distribution<double> angle(0.0, 2 * std::numbers::pi);
  return rotation_matrix(random_unit(g), angle(g));
}

}  // namespace

TEST_CASE("born_mean examples") {
  CHECK(born_mean(UnitAxis({0, 0, 1}), EnsembleState({0, 0, 0})) == 0.0);
  CHECK(born_mean(UnitAxis({1, 0, 0}), EnsembleState({1, 0, 0})) == 1.0);
  CHECK(born_mean(UnitAxis({1, 0, 0}), EnsembleState({0.8, 0, 0})) == 0.8);
}

TEST_CASE("born_prob examples") {
  const auto unpolarised = born_prob(UnitAxis({0, 0, 1}), EnsembleState({0, 0, 0}));
  CHECK(unpolarised.plus == 0.5);
  CHECK(unpolarised.minus == 0.5);

  // Fully polarised along the Theta = 0 polariser axis, analysed at 60 degrees: cos^2 60 = 1/4.
  const auto p60 = born_prob(polariser_axis(std::numbers::pi / 3), EnsembleState(polariser_axis(0).components()));
  CHECK(p60.plus == Approx(0.25).epsilon(1e-15));

  const auto orth = born_prob(UnitAxis({0, 1, 0}), EnsembleState({0, 0, 1}));
  CHECK(orth.plus == 0.5);
  CHECK(orth.minus == 0.5);
}

TEST_CASE("eigenvalues of general observables") {
  CHECK(eigenvalues({0.0, {0, 0, 1}}) == std::pair{1.0, -1.0});
  CHECK(eigenvalues({5.0, {0, 0, 0}}) == std::pair{5.0, 5.0});
  const auto [hi, lo] = eigenvalues({1.0, {0, 3, 4}});
  const auto [ohi, olo] = oracle::pauli_eigenvalues(1.0, {0, 3, 4});
  CHECK(hi == Approx(ohi).epsilon(1e-12));
  CHECK(lo == Approx(olo).epsilon(1e-12));
  CHECK(hi == Approx(6.0));
  CHECK(lo == Approx(-4.0));

  std::mt19937_64 g(3);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int i = 0; i < 200; ++i) {
    const Vec3 a{u(g), u(g), u(g)};
    const double m0 = u(g);
    const auto e = eigenvalues({m0, a});
    const auto o = oracle::pauli_eigenvalues(m0, a);
    CHECK(e.first == Approx(o.first).epsilon(1e-10));
    CHECK(e.second == Approx(o.second).epsilon(1e-10));
  }
}

TEST_CASE("polariser_axis maps real angles to doubled Bloch longitude") {
  const auto close = [](const UnitAxis& a, const Vec3& b) {
    return norm(add(a.components(), scale(b, -1.0))) < 1e-15;
  };
  CHECK(close(polariser_axis(0), {1, 0, 0}));
  CHECK(close(polariser_axis(std::numbers::pi / 2), {-1, 0, 0}));
  CHECK(close(polariser_axis(std::numbers::pi / 4), {0, 1, 0}));
  for (double t : {0.1, 0.7, 2.3, -1.2}) {
    CHECK(norm(add(polariser_axis(t).components(), scale(polariser_axis(t + std::numbers::pi).components(), -1))) <
          1e-14);
  }
}

TEST_CASE("unit-axis and polarisation invariants are enforced") {
  CHECK_THROWS_AS(UnitAxis({1, 1, 0}), PreconditionError);
  CHECK_THROWS_AS(UnitAxis::normalized({0, 0, 0}), PreconditionError);
  CHECK_THROWS_AS(EnsembleState({0.9, 0.9, 0}), PreconditionError);
  CHECK_THROWS_AS(OrthonormalTriad({UnitAxis({1, 0, 0}), UnitAxis({1, 0, 0}), UnitAxis({0, 0, 1})}),
                  PreconditionError);
}

TEST_CASE("rotate_triad") {
  const auto triad = OrthonormalTriad::standard();
  SUBCASE("identity leaves everything unchanged") {
    const Mat3 id{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
    const auto [t, c] = rotate_triad(id, triad, {0.6, 0.8, 0});
    for (int i = 0; i < 3; ++i) CHECK(t[i].components() == triad[i].components());
    CHECK(c == Vec3{0.6, 0.8, 0});
  }
  SUBCASE("quarter turn about axis 3 permutes the coefficients") {
    const Mat3 rz{{{0, -1, 0}, {1, 0, 0}, {0, 0, 1}}};
    const auto [t, c] = rotate_triad(rz, triad, {1, 0, 0});
    CHECK(c == Vec3{0, 1, 0});
    const Vec3 probe = t.combine(c);
    CHECK(probe[0] == Approx(1.0));
    CHECK(std::abs(probe[1]) < 1e-15);
  }
  SUBCASE("random rotations preserve the probe vector") {
    std::mt19937_64 g(11);
    for (int i = 0; i < 500; ++i) {
      const Vec3 c = random_unit(g);
      const Vec3 before = triad.combine(c);
      const auto [t, c2] = rotate_triad(random_rotation(g), triad, c);
      const Vec3 after = t.combine(c2);
      for (int k = 0; k < 3; ++k) REQUIRE(after[k] == Approx(before[k]).epsilon(1e-10));
      REQUIRE(dot(c2, c2) == Approx(1.0).epsilon(1e-12));
    }
  }
  SUBCASE("non-orthogonal matrices are rejected") {
    const Mat3 shear{{{1, 0.1, 0}, {0, 1, 0}, {0, 0, 1}}};
    CHECK_THROWS_AS(rotate_triad(shear, triad, {1, 0, 0}), PreconditionError);
  }
}

TEST_CASE("probability normalisation over a grid of axes and states") {
  int checked = 0;
  for (int i = 0; i < 10; ++i) {
    for (int j = 0; j < 10; ++j) {
      for (int k = 0; k < 10; ++k) {
        const double th = std::numbers::pi * i / 9.0, ph = 2 * std::numbers::pi * j / 10.0;
        const UnitAxis m({std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th)});
        const double r = k / 9.0;
        const EnsembleState s({r * std::cos(ph + 1.0) * 0.6, r * 0.8, r * std::sin(ph + 1.0) * 0.6});
        const auto p = born_prob(m, s);
        REQUIRE(p.plus + p.minus == Approx(1.0).epsilon(1e-15));
        REQUIRE(p.plus >= 0.0);
        REQUIRE(p.minus >= 0.0);
        ++checked;
      }
    }
  }
  CHECK(checked == 1000);
}

TEST_CASE("Born means are additive over any orthonormal triad") {
  std::mt19937_64 g(5);
  std::uniform_real_distribution<double> r(0, 1);
  for (int i = 0; i < 1000; ++i) {
    const auto base = OrthonormalTriad::standard();
    const auto [triad, unused] = rotate_triad(random_rotation(g), base, {1, 0, 0});
    std::normal_distribution<double> n;
    const Vec3 c{n(g), n(g), n(g)};
    const EnsembleState s(scale(random_unit(g), r(g)));
    const Vec3 v = triad.combine(c);
    const double lhs = born_mean(UnitAxis::normalized(v), s) * norm(v);
    double rhs = 0.0;
    for (int k = 0; k < 3; ++k) rhs += c[k] * born_mean(triad[k], s);
    REQUIRE(std::abs(lhs - rhs) < 1e-12 * std::max(1.0, norm(c)));
  }
}

TEST_CASE("Born means are invariant under simultaneous rotation") {
  std::mt19937_64 g(9);
  std::uniform_real_distribution<double> r(0, 1);
  for (int i = 0; i < 1000; ++i) {
    const UnitAxis m(random_unit(g));
    const Vec3 p = scale(random_unit(g), r(g));
    const Mat3 rot = random_rotation(g);
    const double before = born_mean(m, EnsembleState(p));
    const double after =
        born_mean(UnitAxis::normalized(apply(rot, m.components())), EnsembleState(apply(rot, p)));
    REQUIRE(std::abs(before - after) < 1e-10);
  }
}

TEST_CASE("equatorial sweep is a pure first harmonic") {
  // Exact DFT over N equally spaced settings in [0, pi): only j = 0, 1 survive.
  std::mt19937_64 g(17);
  std::uniform_real_distribution<double> r(0, 1);
  const int n = 16;
  for (int trial = 0; trial < 50; ++trial) {
    const Vec3 p = scale(random_unit(g), r(g));
    const EnsembleState s(p);
    std::vector<double> prob(n);
    for (int k = 0; k < n; ++k) prob[k] = born_prob(polariser_axis(std::numbers::pi * k / n), s).plus;
    for (int j = 0; j <= n / 2; ++j) {
      double re = 0, im = 0;
      for (int k = 0; k < n; ++k) {
        re += prob[k] * std::cos(2.0 * std::numbers::pi * j * k / n);
        im += prob[k] * std::sin(2.0 * std::numbers::pi * j * k / n);
      }
      const double amp = 2.0 * std::hypot(re, im) / n;
      if (j == 0) CHECK(re / n == Approx(0.5).epsilon(1e-12));
      else if (j == 1) CHECK(amp == Approx(std::hypot(p[0], p[1]) / 2).epsilon(1e-12));
      else REQUIRE(amp < 1e-12);
    }
  }
}
