#include "qneq/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "qneq/error.hpp"

namespace qneq::stats {

namespace {

constexpr double kEps = 1e-17;
constexpr int kMaxIter = 100000;

// exp(-x + a ln x - lnGamma(a)), the common prefactor of P and Q.
double gamma_prefactor(double a, double x) { return std::exp(-x + a * std::log(x) - std::lgamma(a)); }

double lower_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  for (int n = 1; n < kMaxIter; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * kEps) return sum * gamma_prefactor(a, x);
  }
  throw NumericError("incomplete gamma series did not converge");
}

// Modified Lentz evaluation of the continued fraction for Q(a, x).
double upper_fraction(double a, double x) {
  constexpr double tiny = std::numeric_limits<double>::min() / kEps;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kEps * 4) return h * gamma_prefactor(a, x);
  }
  throw NumericError("incomplete gamma continued fraction did not converge");
}

}  // namespace

double gamma_q(double a, double x) {
  if (!(a > 0.0)) throw PreconditionError("gamma_q requires a > 0");
  if (std::isnan(x)) throw NumericError("gamma_q of NaN");
  if (x <= 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  if (x < a + 1.0) return std::clamp(1.0 - lower_series(a, x), 0.0, 1.0);
  return std::clamp(upper_fraction(a, x), 0.0, 1.0);
}

double chi_square_sf(double x, double dof) {
  if (!(dof > 0.0)) throw PreconditionError("chi-square needs positive degrees of freedom");
  return gamma_q(0.5 * dof, 0.5 * x);
}

double normal_two_sided(double z) { return std::erfc(std::fabs(z) / std::numbers::sqrt2); }

double kolmogorov_sf(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 1.18) {
    // Jacobi-transformed series converges fast for small lambda.
    const double f = -std::numbers::pi * std::numbers::pi / (8.0 * lambda * lambda);
    double sum = 0.0;
    for (int j = 1; j < 20; ++j) {
      const double k = 2.0 * j - 1.0;
      sum += std::exp(k * k * f);
    }
    return std::clamp(1.0 - std::sqrt(2.0 * std::numbers::pi) / lambda * sum, 0.0, 1.0);
  }
  double sum = 0.0;
  for (int j = 1; j < 100; ++j) {
    const double term = std::exp(-2.0 * j * j * lambda * lambda);
    sum += (j % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-300) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

double ks_statistic(std::span<const double> sorted, const std::function<double(double)>& cdf) {
  if (sorted.empty()) throw PreconditionError("KS statistic of an empty sample");
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = cdf(sorted[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double ks_pvalue(double d, std::size_t n) {
  const double rn = std::sqrt(static_cast<double>(n));
  return kolmogorov_sf((rn + 0.12 + 0.11 / rn) * d);
}

}  // namespace qneq::stats
