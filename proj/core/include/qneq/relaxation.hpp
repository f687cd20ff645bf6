#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace qneq {

/// Wave function in the unit box (hbar = m = L = 1):
/// psi(x, t) = sum_k c_k sqrt(2) sin(k pi x) exp(-i E_k t), E_k = k^2 pi^2 / 2.
class BoxState {
public:
  explicit BoxState(std::vector<std::complex<double>> coefficients);

  /// Equal-amplitude superposition of the first `modes` modes with phases
  /// drawn uniformly from [0, 2 pi) by a seeded counter stream.
  static BoxState equal_amplitudes(std::size_t modes, std::uint64_t seed);

  std::size_t modes() const noexcept { return c_.size(); }
  const std::vector<std::complex<double>>& coefficients() const noexcept { return c_; }
  static double energy(std::size_t k);  // k is 1-based

  /// The state with conjugated coefficients; its evolution is the time reverse.
  BoxState conjugate() const;

private:
  std::vector<std::complex<double>> c_;
};

/// Positions of guided configurations, strictly inside (0, 1).
struct TrajectoryEnsemble {
  std::vector<double> positions;
  double time = 0.0;
};

std::complex<double> psi_value(const BoxState& state, double x, double t);

/// |psi(x, t)|^2.
double born_density(const BoxState& state, double x, double t);

/// Closed-form cumulative distribution int_0^x |psi(s, t)|^2 ds.
double born_cdf(const BoxState& state, double x, double t);

/// Node threshold of the guidance field (see guidance_velocity).
inline constexpr double kNodeThreshold = 1e-14;

/// de Broglie velocity Im(psi* d_x psi) / |psi|^2.
///
/// Evaluated through the reduced amplitude phi = psi / sin(pi x), which has the
/// same velocity and stays regular at the walls. Throws NumericError when
/// |phi|^2 < kNodeThreshold (an interior node).
double guidance_velocity(const BoxState& state, double x, double t);

struct TrajectoryFailure {
  std::size_t index;
  double last_position;
  double last_time;
};

struct EvolveResult {
  TrajectoryEnsemble ensemble;
  std::vector<TrajectoryFailure> failures;  // step-size underflow near a node
  std::size_t steps = 0;
};

/// Integrates every trajectory from ensemble.time to t_end with a Dormand-Prince
/// 5(4) step keeping the absolute local error below `tol`.
EvolveResult evolve(const TrajectoryEnsemble& ensemble, const BoxState& state, double t_end, double tol,
                    unsigned threads = 0);

/// Draws n positions from |psi(., t)|^2 by inverse CDF (grid bracket, then
/// safeguarded Newton on the closed-form CDF). Uses stream indices [0, n).
std::vector<double> sample_born(const BoxState& state, double t, std::size_t n, std::uint64_t seed);

/// Draws n positions uniformly on (0, 1).
std::vector<double> sample_uniform(std::size_t n, std::uint64_t seed);

/// Guidance flow map x0 -> X(t_end; x0) from t = 0, resolved on dense knots
/// (integrating the trajectory and its tangent d X / d x0) and evaluated by
/// cubic Hermite interpolation. All ensembles of one state share the map.
class FlowMap {
public:
  FlowMap(const BoxState& state, double t_end, std::size_t knots, double tol);

  double t_end() const noexcept { return t_end_; }
  std::size_t failures() const noexcept { return failures_; }
  double operator()(double x0) const;

private:
  double t_end_;
  std::vector<double> x0_, x1_, slope_;
  std::size_t failures_ = 0;
};

struct EquivarianceResult {
  double ks_statistic;
  double p_value;
  std::size_t n;
  std::size_t failures;
};

/// Samples n points from |psi_0|^2, evolves them to t_end and compares the
/// result with |psi(., t_end)|^2 by a one-sample Kolmogorov-Smirnov test.
EquivarianceResult equivariance_check(const BoxState& state, std::size_t n, double t_end, std::uint64_t seed,
                                      double tol = 1e-9, unsigned threads = 0);

/// The same check with trajectories carried by a precomputed flow map.
EquivarianceResult equivariance_check(const BoxState& state, const FlowMap& flow, std::size_t n,
                                      std::uint64_t seed);

/// Cell averages of the ensemble density and of |psi|^2 on G equal cells.
struct CoarseGrain {
  std::size_t cells = 0;
  std::vector<double> rho;
  std::vector<double> born;
};

CoarseGrain coarse_grain(const TrajectoryEnsemble& ensemble, const BoxState& state, std::size_t cells);

struct CoarseH {
  double value;     // +infinity when divergent
  bool divergent;   // some cell has rho > 0 where the |psi|^2 average vanishes
};

/// H = sum_cells rho ln(rho / born) dx with 0 ln 0 = 0.
CoarseH coarse_h(const CoarseGrain& grain);
CoarseH coarse_h(const TrajectoryEnsemble& ensemble, const BoxState& state, std::size_t cells);

enum class InitialDensity { Uniform, Born };

struct RelaxationConfig {
  std::size_t modes = 4;
  std::size_t trajectories = 100000;
  std::size_t cells = 32;
  double t_end = 0.0;  // <= 0 selects 4 pi / (E2 - E1)
  std::size_t checkpoints = 8;
  double tolerance = 1e-7;
  InitialDensity initial = InitialDensity::Uniform;
  std::uint64_t seed = 0;

  double resolved_t_end() const;
};

struct RelaxationCheckpoint {
  double time;
  CoarseH h;
};

struct RelaxationRun {
  BoxState state;
  std::vector<RelaxationCheckpoint> checkpoints;  // first entry is t = 0
  TrajectoryEnsemble final_ensemble;
  CoarseGrain final_grain;
  std::size_t failures = 0;
};

/// Phase seed is derive_seed(seed, 1), position seed derive_seed(seed, 2).
RelaxationRun run_relaxation(const RelaxationConfig& config, unsigned threads = 0);

}  // namespace qneq
