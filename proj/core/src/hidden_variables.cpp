#include "qneq/hidden_variables.hpp"

#include <algorithm>
#include <cmath>

#include "qneq/error.hpp"

namespace qneq {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void check_grid(const std::vector<double>& x, const char* what) {
  if (x.size() < 2) throw PreconditionError(std::string(what) + " needs at least two points");
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || x[i] < -1.0 || x[i] > 1.0) {
      throw PreconditionError(std::string(what) + " must lie in [-1, 1]");
    }
    if (i > 0 && !(x[i] > x[i - 1])) throw PreconditionError(std::string(what) + " must be strictly increasing");
  }
}

// Solve f0 d + slope d^2 / 2 = r for d >= 0 on a segment with nonnegative density.
double segment_offset(double f0, double slope, double r) {
  if (r <= 0.0) return 0.0;
  const double disc = std::max(0.0, f0 * f0 + 2.0 * slope * r);
  const double denom = f0 + std::sqrt(disc);
  return denom > 0.0 ? 2.0 * r / denom : 0.0;
}

}  // namespace

ModelSpec::ModelSpec(const UnitAxis& axis, double polarisation) : axis_(axis), polarisation_(polarisation) {
  if (!(polarisation >= 0.0 && polarisation <= 1.0)) {
    throw PreconditionError("model polarisation must lie in [0, 1]");
  }
}

EnsembleState ModelSpec::quantum_state() const {
  return EnsembleState(scale(axis_.components(), polarisation_));
}

SignDensity::SignDensity(DensityShape s) : shape_(std::move(s)) {
  std::visit(overloaded{
                 [](shape::Uniform&) {},
                 [](shape::Delta& d) {
                   if (!(d.u0 >= -1.0 && d.u0 <= 1.0)) throw PreconditionError("delta location must lie in [-1, 1]");
                 },
                 [this](shape::Histogram& h) {
                   check_grid(h.edges, "histogram edges");
                   if (h.masses.size() + 1 != h.edges.size()) {
                     throw PreconditionError("histogram needs one mass per bin");
                   }
                   double total = 0.0;
                   for (double m : h.masses) {
                     if (!(m >= 0.0) || !std::isfinite(m)) throw PreconditionError("histogram masses must be nonnegative");
                     total += m;
                   }
                   if (!(total > 0.0)) throw PreconditionError("histogram has zero total mass");
                   cumulative_.assign(1, 0.0);
                   for (double& m : h.masses) {
                     m /= total;
                     cumulative_.push_back(cumulative_.back() + m);
                   }
                 },
                 [this](shape::PiecewiseLinear& p) {
                   check_grid(p.u, "piecewise-linear knots");
                   if (p.f.size() != p.u.size()) throw PreconditionError("piecewise-linear needs one ordinate per knot");
                   for (double f : p.f) {
                     if (!(f >= 0.0) || !std::isfinite(f)) throw PreconditionError("piecewise-linear density must be nonnegative");
                   }
                   double total = 0.0;
                   for (std::size_t i = 0; i + 1 < p.u.size(); ++i) {
                     total += 0.5 * (p.f[i] + p.f[i + 1]) * (p.u[i + 1] - p.u[i]);
                   }
                   if (!(total > 0.0)) throw PreconditionError("piecewise-linear density has zero total mass");
                   for (double& f : p.f) f /= total;
                   cumulative_.assign(1, 0.0);
                   for (std::size_t i = 0; i + 1 < p.u.size(); ++i) {
                     cumulative_.push_back(cumulative_.back() + 0.5 * (p.f[i] + p.f[i + 1]) * (p.u[i + 1] - p.u[i]));
                   }
                 },
             },
             shape_);
  if (!cumulative_.empty()) cumulative_.back() = 1.0;
}

double SignDensity::cdf(double x) const {
  return std::visit(
      overloaded{
          [x](const shape::Uniform&) { return std::clamp(0.5 * (x + 1.0), 0.0, 1.0); },
          [x](const shape::Delta& d) { return x >= d.u0 ? 1.0 : 0.0; },
          [this, x](const shape::Histogram& h) {
            if (x <= h.edges.front()) return 0.0;
            if (x >= h.edges.back()) return 1.0;
            const auto it = std::upper_bound(h.edges.begin(), h.edges.end(), x);
            const std::size_t i = static_cast<std::size_t>(it - h.edges.begin()) - 1;
            const double width = h.edges[i + 1] - h.edges[i];
            return std::min(1.0, cumulative_[i] + h.masses[i] * (x - h.edges[i]) / width);
          },
          [this, x](const shape::PiecewiseLinear& p) {
            if (x <= p.u.front()) return 0.0;
            if (x >= p.u.back()) return 1.0;
            const auto it = std::upper_bound(p.u.begin(), p.u.end(), x);
            const std::size_t i = static_cast<std::size_t>(it - p.u.begin()) - 1;
            const double h = p.u[i + 1] - p.u[i];
            const double d = x - p.u[i];
            const double slope = (p.f[i + 1] - p.f[i]) / h;
            return std::min(1.0, cumulative_[i] + p.f[i] * d + 0.5 * slope * d * d);
          },
      },
      shape_);
}

double SignDensity::quantile(double q) const {
  q = std::clamp(q, 0.0, 1.0);
  return std::visit(
      overloaded{
          [q](const shape::Uniform&) { return 2.0 * q - 1.0; },
          [](const shape::Delta& d) { return d.u0; },
          [this, q](const shape::Histogram& h) {
            auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), q);
            std::size_t i = static_cast<std::size_t>(it - cumulative_.begin());
            i = std::clamp<std::size_t>(i, 1, h.masses.size()) - 1;
            const double width = h.edges[i + 1] - h.edges[i];
            const double frac = h.masses[i] > 0.0 ? (q - cumulative_[i]) / h.masses[i] : 0.0;
            return h.edges[i] + std::clamp(frac, 0.0, 1.0) * width;
          },
          [this, q](const shape::PiecewiseLinear& p) {
            auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), q);
            std::size_t i = static_cast<std::size_t>(it - cumulative_.begin());
            i = std::clamp<std::size_t>(i, 1, p.u.size() - 1) - 1;
            const double h = p.u[i + 1] - p.u[i];
            const double slope = (p.f[i + 1] - p.f[i]) / h;
            const double d = segment_offset(p.f[i], slope, q - cumulative_[i]);
            return p.u[i] + std::clamp(d, 0.0, h);
          },
      },
      shape_);
}

LambdaDensity::LambdaDensity(double weight_plus, SignDensity plus, SignDensity minus)
    : weight_plus_(weight_plus), plus_(std::move(plus)), minus_(std::move(minus)) {
  if (!(weight_plus >= 0.0 && weight_plus <= 1.0)) throw PreconditionError("sign weight must lie in [0, 1]");
}

LambdaDensity LambdaDensity::equilibrium(const ModelSpec& model) {
  return LambdaDensity(0.5 * (1.0 + model.polarisation()), SignDensity{}, SignDensity{});
}

LambdaDensity LambdaDensity::delta(const HiddenVar& lambda0) {
  if (lambda0.s != 1 && lambda0.s != -1) throw PreconditionError("hidden-variable sign must be +1 or -1");
  const SignDensity point(shape::Delta{lambda0.u});
  return LambdaDensity(lambda0.s > 0 ? 1.0 : 0.0, point, point);
}

int outcome_map(const UnitAxis& m, const HiddenVar& lambda, const ModelSpec& model) {
  const double mn = dot(m.components(), model.axis().components());
  return lambda.s * mn - lambda.u >= 0.0 ? 1 : -1;
}

double exact_prob_plus(const UnitAxis& m, const LambdaDensity& density, const ModelSpec& model) {
  const double mn = dot(m.components(), model.axis().components());
  return density.weight_plus() * density.plus().cdf(mn) + density.weight_minus() * density.minus().cdf(-mn);
}

double exact_mean(const UnitAxis& m, const LambdaDensity& density, const ModelSpec& model) {
  return 2.0 * exact_prob_plus(m, density, model) - 1.0;
}

HiddenVar sample_one(const LambdaDensity& density, const CounterRng& rng, std::uint64_t index) {
  const auto [a, b] = rng.uniform2(index);
  const int s = a < density.weight_plus() ? 1 : -1;
  return {s, density.for_sign(s).quantile(b)};
}

std::vector<HiddenVar> sample_lambda(const LambdaDensity& density, const CounterRng& rng,
                                     std::size_t count, std::uint64_t offset, unsigned threads) {
  std::vector<HiddenVar> out(count);
  parallel_for(count, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) out[i] = sample_one(density, rng, offset + i);
  });
  return out;
}

double additivity_residual(const LambdaDensity& density, const ModelSpec& model,
                           const OrthonormalTriad& triad, const Vec3& c) {
  if (std::fabs(dot(c, c) - 1.0) > 1e-10) throw PreconditionError("coefficients must satisfy sum c_i^2 = 1");
  const UnitAxis m = UnitAxis::normalized(triad.combine(c));
  double combined = 0.0;
  for (int i = 0; i < 3; ++i) combined += c[i] * exact_mean(triad[i], density, model);
  return exact_mean(m, density, model) - combined;
}

PointwiseCheck pointwise_additivity_check(const HiddenVar& lambda0, const ModelSpec& model,
                                          const OrthonormalTriad& triad, const Vec3& c) {
  if (c[2] != 0.0) throw PreconditionError("pointwise check requires c3 = 0");
  if (c[0] * c[1] == 0.0) throw PreconditionError("pointwise check requires c1 c2 != 0");
  const UnitAxis m = UnitAxis::normalized(triad.combine(c));
  const double residual = outcome_map(m, lambda0, model) - c[0] * outcome_map(triad[0], lambda0, model) -
                          c[1] * outcome_map(triad[1], lambda0, model);
  return {std::fabs(residual) <= 1e-12, residual};
}

}  // namespace qneq
