#include "silt/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "silt/error.hpp"
#include "silt/rng.hpp"

namespace silt::stats {

namespace {

// Neumaier-compensated running sum; fixed order keeps results reproducible.
struct Sum {
    double s = 0, c = 0;
    void add(double x)
    {
        const double t = s + x;
        c += std::fabs(s) >= std::fabs(x) ? (s - t) + x : (x - t) + s;
        s = t;
    }
    double value() const { return s + c; }
};

double mean_of(std::span<const double> x)
{
    Sum s;
    for (double v : x) s.add(v);
    return s.value() / static_cast<double>(x.size());
}

}  // namespace

Moments moments(std::span<const double> x)
{
    const long n = static_cast<long>(x.size());
    if (n < 4) throw InvalidArgument(fmt::format("moments need at least 4 samples, got {}", n));
    Moments m;
    m.n = n;
    m.mean = mean_of(x);
    Sum s2, s3, s4;
    for (double v : x) {
        const double e = v - m.mean, e2 = e * e;
        s2.add(e2);
        s3.add(e2 * e);
        s4.add(e2 * e2);
    }
    const double dn = static_cast<double>(n);
    const double m2 = s2.value() / dn, m3 = s3.value() / dn, m4 = s4.value() / dn;
    m.variance = s2.value() / (dn - 1.0);
    m.mean_se = std::sqrt(m.variance / dn);
    m.variance_se = std::sqrt(std::max(m4 - m2 * m2, 0.0) / dn);
    m.skewness = m2 > 0 ? m3 / std::pow(m2, 1.5) : 0.0;
    m.kurtosis = m2 > 0 ? m4 / (m2 * m2) : 0.0;
    m.skewness_se = std::sqrt(6.0 * dn * (dn - 1.0) / ((dn - 2.0) * (dn + 1.0) * (dn + 3.0)));
    m.kurtosis_se = 2.0 * m.skewness_se * std::sqrt((dn * dn - 1.0) / ((dn - 3.0) * (dn + 5.0)));
    return m;
}

std::pair<double, double> covariance(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size() || x.size() < 3) throw InvalidArgument("covariance needs equal-length samples (n >= 3)");
    const double mx = mean_of(x), my = mean_of(y);
    const double dn = static_cast<double>(x.size());
    std::vector<double> prod(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) prod[i] = (x[i] - mx) * (y[i] - my);
    const double mp = mean_of(prod);
    Sum dev;
    for (double p : prod) dev.add((p - mp) * (p - mp));
    const double cov = mp * dn / (dn - 1.0);
    const double se = std::sqrt(dev.value() / (dn - 1.0) / dn);
    return {cov, se};
}

double kolmogorov_survival(double lambda)
{
    if (lambda <= 0.0) return 1.0;
    if (lambda < 1.18) {
        // Jacobi-theta form converges fast for small lambda.
        const double w = std::numbers::pi * std::numbers::pi / (8.0 * lambda * lambda);
        double s = 0.0;
        for (int k = 1; k <= 9; k += 2) s += std::exp(-w * k * k);
        return std::clamp(1.0 - std::sqrt(2.0 * std::numbers::pi) / lambda * s, 0.0, 1.0);
    }
    double s = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        s += (k % 2 ? 2.0 : -2.0) * term;
        if (term < 1e-17) break;
    }
    return std::clamp(s, 0.0, 1.0);
}

namespace {
// Stephens' finite-sample correction of the asymptotic statistic.
double ks_p(double D, double ne)
{
    const double r = std::sqrt(ne);
    return kolmogorov_survival((r + 0.12 + 0.11 / r) * D);
}
}  // namespace

KsResult ks_one_sample(std::span<const double> x, const std::function<double(double)>& cdf)
{
    if (x.empty()) throw InvalidArgument("KS test needs samples");
    std::vector<double> s(x.begin(), x.end());
    std::sort(s.begin(), s.end());
    const double n = static_cast<double>(s.size());
    double D = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double F = cdf(s[i]);
        D = std::max({D, F - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - F});
    }
    return {D, ks_p(D, n)};
}

KsResult ks_two_sample(std::span<const double> x, std::span<const double> y)
{
    if (x.empty() || y.empty()) throw InvalidArgument("KS test needs samples");
    std::vector<double> a(x.begin(), x.end()), b(y.begin(), y.end());
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double D = 0.0;
    while (i < a.size() && j < b.size()) {
        const double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == v) ++i;
        while (j < b.size() && b[j] == v) ++j;
        D = std::max(D, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return {D, ks_p(D, na * nb / (na + nb))};
}

std::vector<QqPoint> normal_qq(std::span<const double> x, double mean, double variance)
{
    std::vector<double> s(x.begin(), x.end());
    std::sort(s.begin(), s.end());
    const double sd = std::sqrt(variance);
    const double n = static_cast<double>(s.size());
    std::vector<QqPoint> out(s.size());
    for (std::size_t k = 0; k < s.size(); ++k)
        out[k] = {mean + sd * normal_quantile((static_cast<double>(k) + 0.5) / n), s[k]};
    return out;
}

std::pair<double, double> ols_slope(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("slope fit needs two or more points");
    const double mx = mean_of(x), my = mean_of(y);
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    const double slope = sxy / sxx;
    if (x.size() < 3) return {slope, 0.0};
    double rss = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - my - slope * (x[i] - mx);
        rss += r * r;
    }
    return {slope, std::sqrt(rss / static_cast<double>(x.size() - 2) / sxx)};
}

}  // namespace silt::stats
