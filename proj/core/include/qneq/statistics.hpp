#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace qneq::stats {

/// Regularised upper incomplete gamma function Q(a, x) = Gamma(a, x) / Gamma(a).
double gamma_q(double a, double x);

/// Upper tail P(X >= x) of the chi-square distribution with `dof` degrees of freedom.
double chi_square_sf(double x, double dof);

/// Two-sided normal tail P(|Z| >= |z|).
double normal_two_sided(double z);

/// Kolmogorov limiting distribution tail Q_KS(lambda) = P(K > lambda).
double kolmogorov_sf(double lambda);

/// One-sample Kolmogorov-Smirnov distance between sorted data and a continuous CDF.
double ks_statistic(std::span<const double> sorted, const std::function<double(double)>& cdf);

/// Asymptotic p-value of a KS distance for n samples (Stephens' small-n correction).
double ks_pvalue(double d, std::size_t n);

}  // namespace qneq::stats
