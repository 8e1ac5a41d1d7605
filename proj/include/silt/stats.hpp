#pragma once

#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace silt::stats {

/// Sample moments with their standard errors. `kurtosis` is the plain
/// (non-excess) m4/m2^2, so 3 for a normal law.
struct Moments {
    long n = 0;
    double mean = 0, mean_se = 0;
    double variance = 0, variance_se = 0;  // unbiased
    double skewness = 0, skewness_se = 0;
    double kurtosis = 0, kurtosis_se = 0;
};

Moments moments(std::span<const double> x);

/// Unbiased sample covariance and the standard error of its estimate
/// (from the variance of the centered products).
std::pair<double, double> covariance(std::span<const double> x, std::span<const double> y);

struct KsResult {
    double statistic = 0;
    double p_value = 1;
};

/// Survival function of the Kolmogorov distribution, P(K > lambda).
double kolmogorov_survival(double lambda);

KsResult ks_one_sample(std::span<const double> x, const std::function<double(double)>& cdf);
KsResult ks_two_sample(std::span<const double> x, std::span<const double> y);

struct QqPoint {
    double theoretical;
    double empirical;
};

/// Normal QQ table against N(mean, variance): plotting positions (k-0.5)/n.
std::vector<QqPoint> normal_qq(std::span<const double> x, double mean, double variance);

/// Least-squares slope of y on x with its standard error.
std::pair<double, double> ols_slope(std::span<const double> x, std::span<const double> y);

}  // namespace silt::stats
