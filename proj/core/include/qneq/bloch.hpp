#pragma once

#include <array>
#include <utility>

namespace qneq {

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<Vec3, 3>;

double dot(const Vec3& a, const Vec3& b);
double norm(const Vec3& a);
Vec3 scale(const Vec3& a, double s);
Vec3 add(const Vec3& a, const Vec3& b);
Vec3 apply(const Mat3& r, const Vec3& v);

/// Measurement direction on the Bloch sphere. Construction checks |m| = 1
/// to 1e-12; use `normalized` for arbitrary nonzero input.
class UnitAxis {
public:
  explicit UnitAxis(const Vec3& components);
  static UnitAxis normalized(const Vec3& v);

  const Vec3& components() const noexcept { return v_; }
  double operator[](int i) const { return v_[static_cast<std::size_t>(i)]; }

private:
  Vec3 v_;
};

/// Two-state observable m0*I + a.sigma.
struct Observable {
  double m0 = 0.0;
  Vec3 axis_part{0.0, 0.0, 0.0};
};

/// Ensemble of two-state systems summarised by its mean polarisation P, |P| <= 1.
class EnsembleState {
public:
  explicit EnsembleState(const Vec3& polarisation);
  const Vec3& polarisation() const noexcept { return p_; }

private:
  Vec3 p_;
};

struct OutcomeProbabilities {
  double plus;
  double minus;
};

/// Quantum mean of m.sigma: m.P.
double born_mean(const UnitAxis& m, const EnsembleState& state);

/// Outcome probabilities (1 +/- m.P) / 2.
OutcomeProbabilities born_prob(const UnitAxis& m, const EnsembleState& state);

/// Returns (m0 + |a|, m0 - |a|).
std::pair<double, double> eigenvalues(const Observable& obs);

/// Bloch axis for a linear polariser at real-space angle theta: (cos 2θ, sin 2θ, 0).
UnitAxis polariser_axis(double theta);

/// Right-handed orthonormal basis m1, m2, m3 of the Bloch 3-space.
class OrthonormalTriad {
public:
  explicit OrthonormalTriad(const std::array<UnitAxis, 3>& axes);
  static OrthonormalTriad standard();

  const std::array<UnitAxis, 3>& axes() const noexcept { return axes_; }
  const UnitAxis& operator[](int i) const { return axes_[static_cast<std::size_t>(i)]; }

  /// The probe vector sum_i c_i m_i (unit when sum c_i^2 = 1).
  Vec3 combine(const Vec3& c) const;
  /// Expansion coefficients c_i = v.m_i.
  Vec3 coefficients_of(const Vec3& v) const;

private:
  std::array<UnitAxis, 3> axes_;
};

/// Change of basis by an orthogonal R (column-vector action): the new axes are
/// m'_i = sum_j R_ij m_j and the coefficients c'_i = sum_j R_ij c_j, so the probe
/// vector sum_i c_i m_i is unchanged. Throws PreconditionError if R^T R != I to 1e-10.
std::pair<OrthonormalTriad, Vec3> rotate_triad(const Mat3& r, const OrthonormalTriad& triad,
                                               const Vec3& c);

/// Rotation by `angle` about the unit vector `axis` (right-handed).
Mat3 rotation_matrix(const Vec3& axis, double angle);

}  // namespace qneq
