#pragma once

#include <cstddef>
#include <cstdint>
#include <variant>
#include <vector>

#include "qneq/bloch.hpp"
#include "qneq/random.hpp"

namespace qneq {

/// Hidden-variable point lambda = (s, u): s selects one of the pure states
/// +n / -n, u in [-1, 1] is the continuous Bell-type variable.
struct HiddenVar {
  int s = 1;
  double u = 0.0;

  friend bool operator==(const HiddenVar&, const HiddenVar&) = default;
};

/// Bloch axis n of the underlying pure-state pair and the equilibrium
/// polarisation magnitude, so that the quantum state has P = polarisation * n.
class ModelSpec {
public:
  ModelSpec(const UnitAxis& axis, double polarisation);

  const UnitAxis& axis() const noexcept { return axis_; }
  double polarisation() const noexcept { return polarisation_; }
  EnsembleState quantum_state() const;

private:
  UnitAxis axis_;
  double polarisation_;
};

namespace shape {

struct Uniform {};

struct Delta {
  double u0 = 0.0;
};

/// Piecewise-constant density: masses[i] on [edges[i], edges[i+1]].
struct Histogram {
  std::vector<double> edges;
  std::vector<double> masses;
};

/// Continuous piecewise-linear density through (u[i], f[i]); zero outside [u.front(), u.back()].
struct PiecewiseLinear {
  std::vector<double> u;
  std::vector<double> f;
};

}  // namespace shape

using DensityShape = std::variant<shape::Uniform, shape::Delta, shape::Histogram, shape::PiecewiseLinear>;

/// Normalised distribution of u in [-1, 1] for one value of s, with its
/// cumulative distribution and quantile function in closed form.
///
/// Histogram masses and piecewise-linear ordinates are rescaled to unit
/// total mass on construction; everything outside [-1, 1] is rejected.
class SignDensity {
public:
  SignDensity() : SignDensity(shape::Uniform{}) {}
  explicit SignDensity(DensityShape shape);

  const DensityShape& shape() const noexcept { return shape_; }

  /// P(u <= x).
  double cdf(double x) const;
  /// Smallest u with cdf(u) >= q, for q in [0, 1).
  double quantile(double q) const;

private:
  DensityShape shape_;
  std::vector<double> cumulative_;  // mass to the left of each edge / knot
};

/// Ensemble measure rho(lambda) = weight_s * density_s(u).
class LambdaDensity {
public:
  LambdaDensity(double weight_plus, SignDensity plus, SignDensity minus);

  /// The equilibrium measure: weights (1 +/- P)/2, u uniform for both signs.
  static LambdaDensity equilibrium(const ModelSpec& model);
  /// All mass on a single hidden-variable point.
  static LambdaDensity delta(const HiddenVar& lambda0);

  double weight_plus() const noexcept { return weight_plus_; }
  double weight_minus() const noexcept { return 1.0 - weight_plus_; }
  const SignDensity& plus() const noexcept { return plus_; }
  const SignDensity& minus() const noexcept { return minus_; }
  const SignDensity& for_sign(int s) const noexcept { return s > 0 ? plus_ : minus_; }

private:
  double weight_plus_;
  SignDensity plus_;
  SignDensity minus_;
};

/// Deterministic outcome sigma(m, lambda) = sign(s (m.n) - u); a tie gives +1.
/// The map never sees the ensemble density.
int outcome_map(const UnitAxis& m, const HiddenVar& lambda, const ModelSpec& model);

/// Measure of S+(m): sum_s weight_s * CDF_s(s (m.n)).
double exact_prob_plus(const UnitAxis& m, const LambdaDensity& density, const ModelSpec& model);

/// Ensemble mean of sigma(m, lambda): 2 p+ - 1.
double exact_mean(const UnitAxis& m, const LambdaDensity& density, const ModelSpec& model);

/// Draws lambda for indices [offset, offset + count) of the stream.
std::vector<HiddenVar> sample_lambda(const LambdaDensity& density, const CounterRng& rng,
                                     std::size_t count, std::uint64_t offset = 0, unsigned threads = 0);

/// The single draw with the given stream index.
HiddenVar sample_one(const LambdaDensity& density, const CounterRng& rng, std::uint64_t index);

/// E(m) - sum_i c_i E(m_i) with m = sum_i c_i m_i. Requires sum c_i^2 = 1.
double additivity_residual(const LambdaDensity& density, const ModelSpec& model,
                           const OrthonormalTriad& triad, const Vec3& c);

struct PointwiseCheck {
  bool additive;
  double residual;  // sigma(m) - c1 sigma(m1) - c2 sigma(m2)
};

/// Evaluates the outcome identity sigma(m) = c1 sigma(m1) + c2 sigma(m2) at a
/// single lambda, m being the direction of c1 m1 + c2 m2. Requires c3 == 0 and
/// c1 c2 != 0.
PointwiseCheck pointwise_additivity_check(const HiddenVar& lambda0, const ModelSpec& model,
                                          const OrthonormalTriad& triad, const Vec3& c);

}  // namespace qneq
