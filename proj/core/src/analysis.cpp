#include "qneq/analysis.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "qneq/error.hpp"
#include "qneq/statistics.hpp"

namespace qneq {

AngleBinTable::AngleBinTable(std::vector<AngleBin> rows) : rows_(std::move(rows)) {
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    const AngleBin& r = rows_[i];
    if (!(r.theta >= 0.0 && r.theta < std::numbers::pi)) throw DataError("bin angle outside [0, pi)");
    if (i > 0 && !(r.theta > rows_[i - 1].theta)) throw DataError("bin angles must be strictly increasing");
    if (!(r.n_plus >= 0.0 && r.n_plus <= r.n)) throw DataError("bin counts must satisfy 0 <= n_plus <= n");
  }
}

double AngleBinTable::total() const {
  double t = 0.0;
  for (const auto& r : rows_) t += r.n;
  return t;
}

double fold_angle(double theta) {
  double f = std::fmod(theta, std::numbers::pi);
  if (f < 0.0) f += std::numbers::pi;
  if (f >= std::numbers::pi) f = 0.0;
  return f;
}

AngleBinTable tabulate(std::span<const PhotonEvent> events) {
  if (events.empty()) throw DataError("no events to tabulate");
  std::map<double, std::pair<std::uint64_t, std::uint64_t>> counts;
  for (const auto& e : events) {
    auto& [plus, n] = counts[fold_angle(e.theta)];
    n += 1;
    if (e.outcome > 0) plus += 1;
  }
  std::vector<AngleBin> rows;
  rows.reserve(counts.size());
  for (const auto& [theta, c] : counts) {
    rows.push_back({theta, static_cast<double>(c.first), static_cast<double>(c.second)});
  }
  return AngleBinTable(std::move(rows));
}

AngleBinTable tabulate(const AngleCounts& counts) {
  std::map<double, std::pair<std::uint64_t, std::uint64_t>> merged;
  for (std::size_t k = 0; k < counts.angles.size(); ++k) {
    if (counts.n[k] == 0) continue;
    auto& [plus, n] = merged[fold_angle(counts.angles[k])];
    plus += counts.n_plus[k];
    n += counts.n[k];
  }
  if (merged.empty()) throw DataError("no events to tabulate");
  std::vector<AngleBin> rows;
  for (const auto& [theta, c] : merged) {
    rows.push_back({theta, static_cast<double>(c.first), static_cast<double>(c.second)});
  }
  return AngleBinTable(std::move(rows));
}

AngleBinTable rebin(const AngleBinTable& table, std::size_t bins) {
  if (bins == 0) throw PreconditionError("rebin needs at least one cell");
  const double width = std::numbers::pi / static_cast<double>(bins);
  std::vector<AngleBin> cells(bins);
  for (std::size_t i = 0; i < bins; ++i) cells[i] = {(static_cast<double>(i) + 0.5) * width, 0.0, 0.0};
  for (const auto& r : table.rows()) {
    const auto i = std::min(bins - 1, static_cast<std::size_t>(r.theta / width));
    cells[i].n_plus += r.n_plus;
    cells[i].n += r.n;
  }
  std::erase_if(cells, [](const AngleBin& c) { return c.n == 0.0; });
  return AngleBinTable(std::move(cells));
}

double HarmonicFit::predict(double theta) const {
  double p = a0;
  for (int j = 1; j <= order; ++j) {
    p += a[j - 1] * std::cos(2.0 * j * theta) + b[j - 1] * std::sin(2.0 * j * theta);
  }
  return p;
}

namespace {

struct WeightedDesign {
  Eigen::MatrixXd x;
  Eigen::VectorXd w;
  Eigen::VectorXd p;
};

WeightedDesign design(const AngleBinTable& table, int order) {
  const auto rows = static_cast<Eigen::Index>(table.size());
  const Eigen::Index cols = 2 * order + 1;
  WeightedDesign d{Eigen::MatrixXd(rows, cols), Eigen::VectorXd(rows), Eigen::VectorXd(rows)};
  for (Eigen::Index k = 0; k < rows; ++k) {
    const AngleBin& r = table.rows()[static_cast<std::size_t>(k)];
    d.x(k, 0) = 1.0;
    for (int j = 1; j <= order; ++j) {
      d.x(k, 2 * j - 1) = std::cos(2.0 * j * r.theta);
      d.x(k, 2 * j) = std::sin(2.0 * j * r.theta);
    }
    const double smoothed = (r.n_plus + 0.5) / (r.n + 1.0);
    d.w(k) = r.n / (smoothed * (1.0 - smoothed));
    d.p(k) = r.n_plus / r.n;
  }
  return d;
}

}  // namespace

HarmonicFit fit_harmonics(const AngleBinTable& table, int order) {
  if (order < 0) throw PreconditionError("harmonic order must be nonnegative");
  const std::size_t params = 2 * static_cast<std::size_t>(order) + 1;
  if (table.size() < params) {
    throw PreconditionError("harmonic fit of order " + std::to_string(order) + " needs at least " +
                            std::to_string(params) + " bins");
  }
  for (const auto& r : table.rows()) {
    if (!(r.n >= 1.0)) throw PreconditionError("every bin needs at least one event");
  }

  const WeightedDesign d = design(table, order);
  const Eigen::MatrixXd normal = d.x.transpose() * d.w.asDiagonal() * d.x;
  const Eigen::VectorXd rhs = d.x.transpose() * d.w.asDiagonal() * d.p;

  // Rank test on the unit-diagonal scaling, so it does not depend on the weight scale.
  const Eigen::VectorXd s = normal.diagonal().cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd scaled = s.asDiagonal() * normal * s.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(scaled, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff(), hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 1e-12 * hi)) {
    throw NumericError("harmonic normal matrix is rank deficient (settings too close or too few)");
  }

  const Eigen::LDLT<Eigen::MatrixXd> ldlt(normal);
  const Eigen::VectorXd beta = ldlt.solve(rhs);
  const Eigen::MatrixXd cov = ldlt.solve(Eigen::MatrixXd::Identity(normal.rows(), normal.cols()));
  const Eigen::VectorXd resid = d.p - d.x * beta;

  HarmonicFit fit;
  fit.order = order;
  fit.a0 = beta(0);
  for (int j = 1; j <= order; ++j) {
    fit.a.push_back(beta(2 * j - 1));
    fit.b.push_back(beta(2 * j));
  }
  fit.chi2 = std::max(0.0, resid.dot(d.w.asDiagonal() * resid));
  fit.dof = static_cast<int>(table.size() - params);
  fit.covariance.assign(cov.data(), cov.data() + cov.size());
  if (order >= 1) {
    const double a1 = fit.a[0], b1 = fit.b[0];
    const double r = std::hypot(a1, b1);
    fit.amplitude1 = 2.0 * r;
    fit.phase1 = std::atan2(b1, a1);
    const double caa = cov(1, 1), cbb = cov(2, 2), cab = cov(1, 2);
    if (r > 0.0) {
      const double ga = a1 / r, gb = b1 / r;
      fit.amplitude1_se = 2.0 * std::sqrt(std::max(0.0, ga * ga * caa + 2 * ga * gb * cab + gb * gb * cbb));
    } else {
      fit.amplitude1_se = 2.0 * std::sqrt(0.5 * (caa + cbb));
    }
  }
  return fit;
}

TestReport sinusoid_gof(const HarmonicFit& fit, double significance) {
  if (fit.order != 1) throw PreconditionError("sinusoid goodness of fit needs a first-order fit");
  if (fit.dof < 1) throw PreconditionError("sinusoid goodness of fit needs at least one degree of freedom");
  TestReport t{"sinusoid_gof", fit.chi2, fit.dof, stats::chi_square_sf(fit.chi2, fit.dof), significance, false};
  t.reject = t.p_value < significance;
  return t;
}

TestReport harmonic_excess_test(const AngleBinTable& table, int k_null, int k_alt, double significance) {
  if (k_null < 0 || k_alt <= k_null) throw PreconditionError("harmonic excess needs 0 <= k_null < k_alt");
  const HarmonicFit null_fit = fit_harmonics(table, k_null);
  const HarmonicFit alt_fit = fit_harmonics(table, k_alt);
  const double stat = std::max(0.0, null_fit.chi2 - alt_fit.chi2);
  const int dof = 2 * (k_alt - k_null);
  TestReport t{"harmonic_excess", stat, dof, stats::chi_square_sf(stat, dof), significance, false};
  t.reject = t.p_value < significance;
  return t;
}

double OutcomeSummary::mean() const {
  if (n == 0) throw PreconditionError("mean of an empty sub-ensemble");
  return 2.0 * static_cast<double>(n_plus) / static_cast<double>(n) - 1.0;
}

OutcomeSummary summarize(std::span<const int> outcomes) {
  OutcomeSummary s;
  for (int o : outcomes) {
    if (o != 1 && o != -1) throw DataError("outcome must be +1 or -1");
    s.n += 1;
    if (o > 0) s.n_plus += 1;
  }
  return s;
}

AdditivityReport additivity_test(const std::array<OutcomeSummary, 4>& sets, const Vec3& c, double significance) {
  if (std::fabs(dot(c, c) - 1.0) > 1e-10) throw PreconditionError("coefficients must satisfy sum c_i^2 = 1");
  const std::array<double, 4> weight{-c[0], -c[1], -c[2], 1.0};
  AdditivityReport out;
  double variance = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    if (sets[i].n == 0) {
      if (weight[i] != 0.0) throw PreconditionError("sub-ensemble with nonzero coefficient is empty");
      out.means[i] = 0.0;
      continue;
    }
    out.means[i] = sets[i].mean();
    out.delta += weight[i] * out.means[i];
    variance += weight[i] * weight[i] * (1.0 - out.means[i] * out.means[i]) / static_cast<double>(sets[i].n);
  }
  out.standard_error = std::sqrt(std::max(0.0, variance));
  out.test.name = "additivity";
  out.test.dof = 1;
  out.test.significance = significance;
  if (out.standard_error > 0.0) {
    out.test.statistic = out.delta / out.standard_error;
    out.test.p_value = stats::normal_two_sided(out.test.statistic);
  } else {
    out.exact = true;
    out.test.statistic = out.delta;
    out.test.p_value = std::fabs(out.delta) <= 1e-12 ? 1.0 : 0.0;
  }
  out.test.reject = out.test.p_value < significance;
  return out;
}

}  // namespace qneq
