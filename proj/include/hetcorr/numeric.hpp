#pragma once

#include <functional>
#include <span>
#include <vector>

namespace hetcorr {

/// Standard normal CDF.
double normal_cdf(double x);

/// Standard normal upper tail, 1 - Phi(x), without cancellation.
double normal_sf(double x);

/// Standard normal quantile (Wichura AS241, ~1e-16 relative accuracy).
double normal_quantile(double p);

/// Adaptive Gauss-Kronrod (7/15) quadrature on [a, b].
double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol = 1e-13, int max_depth = 60);

/// Bisection for an increasing function: returns x in [lo, hi] with f(x) ~ target.
/// Stops when the bracket is narrower than x_tol.
double bisect_increasing(const std::function<double(double)>& f, double target, double lo,
                         double hi, double x_tol);

/// P(Binomial(n, p) >= k).
double binomial_upper_tail(long n, double p, long k);

struct Moments {
    double mean = 0.0;
    double sd = 0.0;
    double skewness = 0.0;
};

Moments moments(std::span<const double> xs);

/// Linear-interpolated sample quantile (type 7).
double quantile(std::vector<double> xs, double q);

/// Kolmogorov-Smirnov distance between a sample and a continuous CDF.
double ks_statistic(std::vector<double> xs, const std::function<double(double)>& cdf);

/// One-sided KS: sup_x (F_emp(x) - cdf(x)); positive when the sample is
/// stochastically smaller than the reference law.
double ks_statistic_upper(std::vector<double> xs, const std::function<double(double)>& cdf);

/// Spearman rank correlation (average ranks for ties).
double spearman_correlation(std::span<const double> a, std::span<const double> b);

double pearson_correlation(std::span<const double> a, std::span<const double> b);

/// Pool-adjacent-violators fit of a non-decreasing sequence (equal weights).
std::vector<double> isotonic_increasing(std::span<const double> ys);

}  // namespace hetcorr
