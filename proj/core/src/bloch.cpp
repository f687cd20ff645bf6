#include "qneq/bloch.hpp"

#include <cmath>
#include <string>

#include "qneq/error.hpp"

namespace qneq {

double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

Vec3 scale(const Vec3& a, double s) { return {a[0] * s, a[1] * s, a[2] * s}; }

Vec3 add(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }

Vec3 apply(const Mat3& r, const Vec3& v) { return {dot(r[0], v), dot(r[1], v), dot(r[2], v)}; }

UnitAxis::UnitAxis(const Vec3& components) : v_(components) {
  const double n = norm(v_);
  if (!(std::fabs(n - 1.0) <= 1e-12)) {
    throw PreconditionError("axis is not unit length (norm " + std::to_string(n) + ")");
  }
}

UnitAxis UnitAxis::normalized(const Vec3& v) {
  const double n = norm(v);
  if (!(n > 0.0) || !std::isfinite(n)) throw PreconditionError("cannot normalise a zero or non-finite axis");
  return UnitAxis(scale(v, 1.0 / n));
}

EnsembleState::EnsembleState(const Vec3& polarisation) : p_(polarisation) {
  if (!(norm(p_) <= 1.0 + 1e-12)) throw PreconditionError("polarisation norm exceeds 1");
}

double born_mean(const UnitAxis& m, const EnsembleState& state) {
  return dot(m.components(), state.polarisation());
}

OutcomeProbabilities born_prob(const UnitAxis& m, const EnsembleState& state) {
  const double mean = born_mean(m, state);
  return {0.5 * (1.0 + mean), 0.5 * (1.0 - mean)};
}

std::pair<double, double> eigenvalues(const Observable& obs) {
  const double r = norm(obs.axis_part);
  return {obs.m0 + r, obs.m0 - r};
}

UnitAxis polariser_axis(double theta) {
  return UnitAxis({std::cos(2.0 * theta), std::sin(2.0 * theta), 0.0});
}

OrthonormalTriad::OrthonormalTriad(const std::array<UnitAxis, 3>& axes) : axes_(axes) {
  for (int i = 0; i < 3; ++i) {
    for (int j = i + 1; j < 3; ++j) {
      if (std::fabs(dot(axes_[i].components(), axes_[j].components())) > 1e-12) {
        throw PreconditionError("triad axes are not orthogonal");
      }
    }
  }
}

OrthonormalTriad OrthonormalTriad::standard() {
  return OrthonormalTriad({UnitAxis({1, 0, 0}), UnitAxis({0, 1, 0}), UnitAxis({0, 0, 1})});
}

Vec3 OrthonormalTriad::combine(const Vec3& c) const {
  Vec3 v{0, 0, 0};
  for (int i = 0; i < 3; ++i) v = add(v, scale(axes_[i].components(), c[i]));
  return v;
}

Vec3 OrthonormalTriad::coefficients_of(const Vec3& v) const {
  return {dot(v, axes_[0].components()), dot(v, axes_[1].components()), dot(v, axes_[2].components())};
}

std::pair<OrthonormalTriad, Vec3> rotate_triad(const Mat3& r, const OrthonormalTriad& triad,
                                               const Vec3& c) {
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      double rtr = 0.0;
      for (int k = 0; k < 3; ++k) rtr += r[k][i] * r[k][j];
      if (std::fabs(rtr - (i == j ? 1.0 : 0.0)) > 1e-10) {
        throw PreconditionError("rotation matrix is not orthogonal");
      }
    }
  }
  std::array<Vec3, 3> rotated{};
  for (int i = 0; i < 3; ++i) {
    rotated[i] = {0, 0, 0};
    for (int j = 0; j < 3; ++j) rotated[i] = add(rotated[i], scale(triad[j].components(), r[i][j]));
  }
  // R is only orthogonal to 1e-10; Gram-Schmidt restores the 1e-12 triad invariant.
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < i; ++j) {
      rotated[i] = add(rotated[i], scale(rotated[j], -dot(rotated[i], rotated[j])));
    }
    rotated[i] = UnitAxis::normalized(rotated[i]).components();
  }
  OrthonormalTriad out({UnitAxis(rotated[0]), UnitAxis(rotated[1]), UnitAxis(rotated[2])});
  return {out, apply(r, c)};
}

Mat3 rotation_matrix(const Vec3& axis, double angle) {
  const Vec3 k = UnitAxis::normalized(axis).components();
  const double c = std::cos(angle), s = std::sin(angle), t = 1.0 - c;
  return {{{t * k[0] * k[0] + c, t * k[0] * k[1] - s * k[2], t * k[0] * k[2] + s * k[1]},
           {t * k[0] * k[1] + s * k[2], t * k[1] * k[1] + c, t * k[1] * k[2] - s * k[0]},
           {t * k[0] * k[2] - s * k[1], t * k[1] * k[2] + s * k[0], t * k[2] * k[2] + c}}};
}

}  // namespace qneq
