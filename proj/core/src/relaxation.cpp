#include "qneq/relaxation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <limits>
#include <optional>

#include "qneq/error.hpp"
#include "qneq/ode.hpp"
#include "qneq/random.hpp"
#include "qneq/statistics.hpp"

namespace qneq {

namespace {

using cplx = std::complex<double>;
constexpr double kPi = std::numbers::pi;

/// Guidance field of one BoxState, evaluated through the reduced amplitude
/// phi = psi / sin(pi x) = sum_k sqrt(2) c_k e^{-i E_k t} U_{k-1}(cos pi x).
class GuidanceField {
public:
  explicit GuidanceField(const BoxState& state) {
    for (const auto& c : state.coefficients()) amp_.push_back(std::numbers::sqrt2 * c);
  }

  struct Value {
    double v;
    double dv;  // d v / d x
  };

  std::optional<Value> operator()(double x, double t) const {
    if (!(x >= 0.0 && x <= 1.0)) return std::nullopt;
    const double sx = std::sin(kPi * x), y = std::cos(kPi * x);
    // e^{-i E_k t} = z^{k^2} with z = e^{-i pi^2 t / 2}.
    const cplx z = std::polar(1.0, -0.5 * kPi * kPi * t);
    const cplx z2 = z * z;
    cplx phase(1.0, 0.0), step = z;
    double u_prev = 0.0, u = 1.0;        // U_{-1}, U_0
    double du_prev = 0.0, du = 0.0;      // derivatives
    double ddu_prev = 0.0, ddu = 0.0;
    cplx phi(0.0), s1(0.0), s2(0.0);
    for (std::size_t k = 0; k < amp_.size(); ++k) {
      phase *= step;
      step *= z2;
      const cplx a = amp_[k] * phase;
      phi += a * u;
      s1 += a * du;
      s2 += a * ddu;
      const double u_next = 2.0 * y * u - u_prev;
      const double du_next = 2.0 * u + 2.0 * y * du - du_prev;
      const double ddu_next = 4.0 * du + 2.0 * y * ddu - ddu_prev;
      u_prev = u, u = u_next;
      du_prev = du, du = du_next;
      ddu_prev = ddu, ddu = ddu_next;
    }
    const double n2 = std::norm(phi);
    if (!(n2 >= kNodeThreshold)) return std::nullopt;
    const cplx dphi = -kPi * sx * s1;
    const cplx ddphi = -kPi * kPi * y * s1 + kPi * kPi * sx * sx * s2;
    const cplx cphi = std::conj(phi);
    const double v = std::imag(cphi * dphi) / n2;
    const double dv = std::imag(cphi * ddphi) / n2 - 2.0 * v * std::real(cphi * dphi) / n2;
    return Value{v, dv};
  }

private:
  std::vector<cplx> amp_;
};

// sin(m pi x) for m = 0..count-1 by the Chebyshev recurrence.
void sine_multiples(double x, std::size_t count, std::vector<double>& out) {
  out.assign(count, 0.0);
  if (count < 2) return;
  const double s = std::sin(kPi * x), c2 = 2.0 * std::cos(kPi * x);
  out[1] = s;
  for (std::size_t m = 2; m < count; ++m) out[m] = c2 * out[m - 1] - out[m - 2];
}

class BornCdf {
public:
  BornCdf(const BoxState& state, double t) : modes_(state.modes()) {
    const auto& c = state.coefficients();
    weight_.resize(modes_ * modes_);
    for (std::size_t j = 0; j < modes_; ++j) {
      for (std::size_t k = 0; k < modes_; ++k) {
        const double de = BoxState::energy(j + 1) - BoxState::energy(k + 1);
        weight_[j * modes_ + k] = 2.0 * c[j] * std::conj(c[k]) * std::polar(1.0, -de * t);
      }
    }
  }

  double operator()(double x) const {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    thread_local std::vector<double> sn;
    sine_multiples(x, 2 * modes_ + 1, sn);
    double total = 0.0;
    for (std::size_t j = 1; j <= modes_; ++j) {
      for (std::size_t k = 1; k <= modes_; ++k) {
        double integral;
        if (j == k) {
          integral = 0.5 * (x - sn[2 * j] / (2.0 * kPi * static_cast<double>(j)));
        } else {
          const std::size_t lo = std::min(j, k), hi = std::max(j, k);
          // sin((j-k) pi x) / (j-k) is symmetric in j, k.
          integral = 0.5 * (sn[hi - lo] / (kPi * static_cast<double>(hi - lo)) -
                            sn[j + k] / (kPi * static_cast<double>(j + k)));
        }
        total += std::real(weight_[(j - 1) * modes_ + (k - 1)]) * integral;
      }
    }
    return total;
  }

private:
  std::size_t modes_;
  std::vector<cplx> weight_;
};

// Inverse of a continuous CDF by grid bracketing and safeguarded Newton.
class BornInverse {
public:
  BornInverse(const BoxState& state, double t) : state_(state), t_(t), cdf_(state, t) {
    constexpr std::size_t grid = 4096;
    x_.resize(grid + 1);
    f_.resize(grid + 1);
    for (std::size_t i = 0; i <= grid; ++i) {
      x_[i] = static_cast<double>(i) / grid;
      f_[i] = cdf_(x_[i]);
    }
  }

  double operator()(double u) const {
    auto it = std::upper_bound(f_.begin(), f_.end(), u);
    std::size_t i = static_cast<std::size_t>(it - f_.begin());
    i = std::clamp<std::size_t>(i, 1, x_.size() - 1);
    double lo = x_[i - 1], hi = x_[i];
    const double flo = f_[i - 1], fhi = f_[i];
    double x = fhi > flo ? lo + (u - flo) / (fhi - flo) * (hi - lo) : 0.5 * (lo + hi);
    for (int iter = 0; iter < 60; ++iter) {
      const double g = cdf_(x) - u;
      if (std::fabs(g) < 1e-15) break;
      if (g > 0.0) hi = x; else lo = x;
      const double rho = born_density(state_, x, t_);
      double next = rho > 0.0 ? x - g / rho : 0.5 * (lo + hi);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (std::fabs(next - x) < 1e-16) break;
      x = next;
    }
    return std::clamp(x, 0x1.0p-53, 1.0 - 0x1.0p-53);
  }

private:
  const BoxState& state_;
  double t_;
  BornCdf cdf_;
  std::vector<double> x_, f_;
};

}  // namespace

BoxState::BoxState(std::vector<std::complex<double>> coefficients) : c_(std::move(coefficients)) {
  if (c_.size() < 2) throw PreconditionError("box state needs at least two modes");
  double total = 0.0;
  for (const auto& c : c_) total += std::norm(c);
  if (std::fabs(total - 1.0) > 1e-12) throw PreconditionError("box state coefficients are not normalised");
}

BoxState BoxState::equal_amplitudes(std::size_t modes, std::uint64_t seed) {
  if (modes < 2) throw PreconditionError("box state needs at least two modes");
  const CounterRng rng(seed, 3);
  std::vector<cplx> c(modes);
  const double amp = 1.0 / std::sqrt(static_cast<double>(modes));
  for (std::size_t k = 0; k < modes; ++k) c[k] = std::polar(amp, 2.0 * kPi * rng.uniform(k));
  // Absorb the rounding of the amplitudes.
  double total = 0.0;
  for (const auto& a : c) total += std::norm(a);
  for (auto& a : c) a /= std::sqrt(total);
  return BoxState(std::move(c));
}

double BoxState::energy(std::size_t k) {
  const double kk = static_cast<double>(k);
  return 0.5 * kk * kk * kPi * kPi;
}

BoxState BoxState::conjugate() const {
  std::vector<cplx> c(c_.size());
  std::transform(c_.begin(), c_.end(), c.begin(), [](const cplx& a) { return std::conj(a); });
  return BoxState(std::move(c));
}

std::complex<double> psi_value(const BoxState& state, double x, double t) {
  cplx psi(0.0);
  const auto& c = state.coefficients();
  for (std::size_t k = 1; k <= c.size(); ++k) {
    psi += c[k - 1] * std::numbers::sqrt2 * std::sin(static_cast<double>(k) * kPi * x) *
           std::polar(1.0, -BoxState::energy(k) * t);
  }
  return psi;
}

double born_density(const BoxState& state, double x, double t) { return std::norm(psi_value(state, x, t)); }

double born_cdf(const BoxState& state, double x, double t) { return BornCdf(state, t)(x); }

double guidance_velocity(const BoxState& state, double x, double t) {
  if (!(x > 0.0 && x < 1.0)) throw PreconditionError("guidance velocity needs x in (0, 1)");
  const auto value = GuidanceField(state)(x, t);
  if (!value) throw NumericError("guidance velocity evaluated at a node of the wave function");
  return value->v;
}

EvolveResult evolve(const TrajectoryEnsemble& ensemble, const BoxState& state, double t_end, double tol,
                    unsigned threads) {
  if (!(t_end > ensemble.time)) throw PreconditionError("evolve needs t_end after the ensemble time");
  if (!(tol > 0.0)) throw PreconditionError("evolve needs a positive tolerance");
  for (double x : ensemble.positions) {
    if (!(x > 0.0 && x < 1.0)) throw PreconditionError("trajectory positions must lie in (0, 1)");
  }
  const GuidanceField field(state);
  const DormandPrince<1> stepper(tol);
  auto rhs = [&field](double t, const std::array<double, 1>& y) -> std::optional<std::array<double, 1>> {
    const auto value = field(y[0], t);
    if (!value) return std::nullopt;
    return std::array<double, 1>{value->v};
  };

  const std::size_t n = ensemble.positions.size();
  EvolveResult out;
  out.ensemble.time = t_end;
  out.ensemble.positions.resize(n);
  std::vector<char> failed(n, 0);
  std::vector<double> fail_time(n, 0.0);
  std::vector<std::size_t> steps(n, 0);
  parallel_for(n, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto r = stepper.integrate(rhs, {ensemble.positions[i]}, ensemble.time, t_end);
      out.ensemble.positions[i] = r.y[0];
      steps[i] = r.accepted;
      if (!r.ok) {
        failed[i] = 1;
        fail_time[i] = r.t;
      }
    }
  });
  for (std::size_t i = 0; i < n; ++i) {
    out.steps += steps[i];
    if (failed[i]) out.failures.push_back({i, out.ensemble.positions[i], fail_time[i]});
  }
  return out;
}

std::vector<double> sample_born(const BoxState& state, double t, std::size_t n, std::uint64_t seed) {
  const BornInverse inverse(state, t);
  const CounterRng rng(seed, 1);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = inverse(rng.uniform(i));
  return out;
}

std::vector<double> sample_uniform(std::size_t n, std::uint64_t seed) {
  const CounterRng rng(seed, 2);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = rng.uniform(i) + 0x1.0p-54;
  return out;
}

FlowMap::FlowMap(const BoxState& state, double t_end, std::size_t knots, double tol) : t_end_(t_end) {
  if (knots < 16) throw PreconditionError("flow map needs at least 16 knots");
  if (!(t_end >= 0.0)) throw PreconditionError("flow map needs t_end >= 0");
  // Knots equally spaced in Born probability (where samples are) plus a uniform
  // grid in x (so the walls are covered).
  std::vector<double> x0;
  const BornInverse inverse(state, 0.0);
  for (std::size_t j = 1; j < knots; ++j) x0.push_back(inverse(static_cast<double>(j) / static_cast<double>(knots)));
  const std::size_t uniform = knots / 4;
  for (std::size_t j = 0; j <= uniform; ++j) x0.push_back(static_cast<double>(j) / static_cast<double>(uniform));
  std::sort(x0.begin(), x0.end());
  for (std::size_t i = 0; i < x0.size(); ++i) {
    if (x0_.empty() || x0[i] - x0_.back() > 1e-9) x0_.push_back(x0[i]);
  }

  const GuidanceField field(state);
  const DormandPrince<2> stepper(tol);
  // y = (X, ln dX/dx0); d ln J / dt = v'(X, t).
  auto rhs = [&field](double t, const std::array<double, 2>& y) -> std::optional<std::array<double, 2>> {
    const auto value = field(y[0], t);
    if (!value) return std::nullopt;
    return std::array<double, 2>{value->v, value->dv};
  };
  x1_.resize(x0_.size());
  slope_.resize(x0_.size());
  for (std::size_t i = 0; i < x0_.size(); ++i) {
    if (t_end == 0.0) {
      x1_[i] = x0_[i];
      slope_[i] = 1.0;
      continue;
    }
    const auto r = stepper.integrate(rhs, {x0_[i], 0.0}, 0.0, t_end);
    if (!r.ok) ++failures_;
    x1_[i] = r.y[0];
    slope_[i] = std::exp(r.y[1]);
  }
}

double FlowMap::operator()(double x0) const {
  auto it = std::upper_bound(x0_.begin(), x0_.end(), x0);
  std::size_t i = static_cast<std::size_t>(it - x0_.begin());
  i = std::clamp<std::size_t>(i, 1, x0_.size() - 1) - 1;
  const double h = x0_[i + 1] - x0_[i];
  const double s = (x0 - x0_[i]) / h;
  const double s2 = s * s, s3 = s2 * s;
  const double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s, h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
  return h00 * x1_[i] + h10 * h * slope_[i] + h01 * x1_[i + 1] + h11 * h * slope_[i + 1];
}

namespace {

EquivarianceResult ks_against_born(const BoxState& state, std::vector<double> positions, double t,
                                   std::size_t failures) {
  std::sort(positions.begin(), positions.end());
  const BornCdf cdf(state, t);
  const double d = stats::ks_statistic(positions, [&cdf](double x) { return cdf(x); });
  return {d, stats::ks_pvalue(d, positions.size()), positions.size(), failures};
}

}  // namespace

EquivarianceResult equivariance_check(const BoxState& state, std::size_t n, double t_end, std::uint64_t seed,
                                      double tol, unsigned threads) {
  if (n < 1000) throw PreconditionError("equivariance check needs at least 1000 trajectories");
  TrajectoryEnsemble ensemble{sample_born(state, 0.0, n, seed), 0.0};
  if (t_end == 0.0) return ks_against_born(state, std::move(ensemble.positions), 0.0, 0);
  auto result = evolve(ensemble, state, t_end, tol, threads);
  return ks_against_born(state, std::move(result.ensemble.positions), t_end, result.failures.size());
}

EquivarianceResult equivariance_check(const BoxState& state, const FlowMap& flow, std::size_t n,
                                      std::uint64_t seed) {
  if (n < 1000) throw PreconditionError("equivariance check needs at least 1000 trajectories");
  std::vector<double> x = sample_born(state, 0.0, n, seed);
  for (double& xi : x) xi = flow(xi);
  return ks_against_born(state, std::move(x), flow.t_end(), flow.failures());
}

CoarseGrain coarse_grain(const TrajectoryEnsemble& ensemble, const BoxState& state, std::size_t cells) {
  if (cells < 8) throw PreconditionError("coarse graining needs at least 8 cells");
  if (ensemble.positions.empty()) throw PreconditionError("coarse graining needs a non-empty ensemble");
  const double dx = 1.0 / static_cast<double>(cells);
  CoarseGrain g{cells, std::vector<double>(cells, 0.0), std::vector<double>(cells, 0.0)};
  for (double x : ensemble.positions) {
    const auto i = std::min(cells - 1, static_cast<std::size_t>(std::max(0.0, x) * static_cast<double>(cells)));
    g.rho[i] += 1.0;
  }
  const double norm = 1.0 / (static_cast<double>(ensemble.positions.size()) * dx);
  for (double& r : g.rho) r *= norm;
  const BornCdf cdf(state, ensemble.time);
  double left = 0.0;
  for (std::size_t i = 0; i < cells; ++i) {
    const double right = i + 1 == cells ? 1.0 : cdf(static_cast<double>(i + 1) * dx);
    g.born[i] = std::max(0.0, right - left) / dx;
    left = right;
  }
  return g;
}

CoarseH coarse_h(const CoarseGrain& grain) {
  const double dx = 1.0 / static_cast<double>(grain.cells);
  double h = 0.0;
  for (std::size_t i = 0; i < grain.cells; ++i) {
    const double r = grain.rho[i];
    if (r <= 0.0) continue;
    if (!(grain.born[i] > 0.0)) return {std::numeric_limits<double>::infinity(), true};
    h += r * std::log(r / grain.born[i]) * dx;
  }
  return {std::max(0.0, h), false};
}

CoarseH coarse_h(const TrajectoryEnsemble& ensemble, const BoxState& state, std::size_t cells) {
  return coarse_h(coarse_grain(ensemble, state, cells));
}

double RelaxationConfig::resolved_t_end() const {
  return t_end > 0.0 ? t_end : 4.0 * kPi / (BoxState::energy(2) - BoxState::energy(1));
}

RelaxationRun run_relaxation(const RelaxationConfig& config, unsigned threads) {
  if (config.checkpoints < 1) throw PreconditionError("relaxation needs at least one checkpoint");
  if (config.trajectories < 1) throw PreconditionError("relaxation needs at least one trajectory");
  RelaxationRun run{BoxState::equal_amplitudes(config.modes, derive_seed(config.seed, 1)), {}, {}, {}, 0};
  const std::uint64_t position_seed = derive_seed(config.seed, 2);
  TrajectoryEnsemble ensemble{config.initial == InitialDensity::Uniform
                                  ? sample_uniform(config.trajectories, position_seed)
                                  : sample_born(run.state, 0.0, config.trajectories, position_seed),
                              0.0};
  run.checkpoints.push_back({0.0, coarse_h(ensemble, run.state, config.cells)});
  const double t_end = config.resolved_t_end();
  for (std::size_t j = 1; j <= config.checkpoints; ++j) {
    const double t = t_end * static_cast<double>(j) / static_cast<double>(config.checkpoints);
    auto step = evolve(ensemble, run.state, t, config.tolerance, threads);
    run.failures += step.failures.size();
    ensemble = std::move(step.ensemble);
    run.checkpoints.push_back({t, coarse_h(ensemble, run.state, config.cells)});
  }
  run.final_grain = coarse_grain(ensemble, run.state, config.cells);
  run.final_ensemble = std::move(ensemble);
  return run;
}

}  // namespace qneq
