#pragma once

#include <span>
#include <vector>

namespace cardiotox::stats {

/// Standard normal CDF via erfc; accurate to ~1e-16 absolute.
double normal_cdf(double x);

/// Upper tail 1 - Phi(x) without cancellation.
double normal_sf(double x);

/// Two-sided p-value of a standard normal statistic: 2 (1 - Phi(|z|)).
double two_sided_p(double z);

/// Standard logistic function, never exactly 0 or 1 for |eta| < 709.
double logistic(double eta);

double mean(std::span<const double> xs);

/// Sample standard deviation with denominator n - 1 (0 for n < 2).
double sample_sd(std::span<const double> xs);

/// Empirical quantile with linear interpolation between order statistics
/// (h = (n - 1) q). `sorted` must be ascending and non-empty.
double quantile_sorted(std::span<const double> sorted, double q);

}  // namespace cardiotox::stats
