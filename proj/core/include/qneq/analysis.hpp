#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qneq/bloch.hpp"
#include "qneq/experiment.hpp"

namespace qneq {

/// Transmission counts for one polariser setting. Counts are doubles so that
/// expected-count tables (exact predictions times n) can be analysed too.
struct AngleBin {
  double theta;
  double n_plus;
  double n;
};

/// Rows sorted by strictly increasing theta in [0, pi), 0 <= n_plus <= n.
class AngleBinTable {
public:
  AngleBinTable() = default;
  explicit AngleBinTable(std::vector<AngleBin> rows);

  const std::vector<AngleBin>& rows() const noexcept { return rows_; }
  std::size_t size() const noexcept { return rows_.size(); }
  double total() const;

private:
  std::vector<AngleBin> rows_;
};

/// Setting folded into the polariser period [0, pi).
double fold_angle(double theta);

/// Exact counts per distinct setting. Throws DataError on empty input.
AngleBinTable tabulate(std::span<const PhotonEvent> events);
AngleBinTable tabulate(const AngleCounts& counts);

/// Merges rows into `bins` equal-width cells of [0, pi) labelled by their centres.
/// Empty cells are dropped.
AngleBinTable rebin(const AngleBinTable& table, std::size_t bins);

/// Weighted least-squares fit p(theta) = a0 + sum_j a_j cos 2j theta + b_j sin 2j theta.
struct HarmonicFit {
  int order = 1;
  double a0 = 0.0;
  std::vector<double> a;  // a[j-1] multiplies cos 2j theta
  std::vector<double> b;  // b[j-1] multiplies sin 2j theta
  double chi2 = 0.0;
  int dof = 0;
  double amplitude1 = 0.0;     // 2 sqrt(a1^2 + b1^2), the polarisation estimate
  double amplitude1_se = 0.0;  // delta-method standard error
  double phase1 = 0.0;         // atan2(b1, a1); equals 2 theta0 for a sinusoid peaking at theta0
  std::vector<double> covariance;  // (2K+1)^2 row-major parameter covariance

  double predict(double theta) const;
};

/// Weights are n / (p~ (1 - p~)) with p~ = (n_plus + 1/2) / (n + 1).
/// Throws PreconditionError for too few bins or an empty bin and NumericError
/// if the normal matrix is rank deficient.
HarmonicFit fit_harmonics(const AngleBinTable& table, int order);

struct TestReport {
  std::string name;
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
  double significance = 0.01;
  bool reject = false;  // p_value < significance
};

inline constexpr double kDefaultSignificance = 0.01;

/// Chi-square goodness of fit of a first-order (sinusoidal) fit.
TestReport sinusoid_gof(const HarmonicFit& fit, double significance = kDefaultSignificance);

/// Likelihood-ratio style test for harmonics above k_null: chi2(k_null) - chi2(k_alt)
/// on 2 (k_alt - k_null) degrees of freedom.
TestReport harmonic_excess_test(const AngleBinTable& table, int k_null = 1, int k_alt = 3,
                                double significance = kDefaultSignificance);

/// Outcome counts of one fixed-setting sub-ensemble.
struct OutcomeSummary {
  std::uint64_t n_plus = 0;
  std::uint64_t n = 0;

  double mean() const;  // 2 p - 1
};
OutcomeSummary summarize(std::span<const int> outcomes);

struct AdditivityReport {
  TestReport test;
  std::array<double, 4> means{};  // E(m1), E(m2), E(m3), E(m)
  double delta = 0.0;
  double standard_error = 0.0;
  /// True when every used sub-ensemble has zero sample variance; the verdict is
  /// then exact (delta compared with 0) and `test.statistic` holds delta itself.
  bool exact = false;
};

/// z-test of E(m) - sum_i c_i E(m_i) = 0 with independent binomial errors.
/// Sub-ensembles are ordered m1, m2, m3, m; the m3 set may be empty when c3 = 0.
AdditivityReport additivity_test(const std::array<OutcomeSummary, 4>& sets, const Vec3& c,
                                 double significance = kDefaultSignificance);

}  // namespace qneq
