#pragma once

// Randomized property scans over the covariance geometry. Shared by the unit
// tests and the acceptance runner; each scan returns its violation count.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>

#include "silt/geometry.hpp"
#include "silt/rng.hpp"

namespace silt::test {

struct ScanResult {
    long samples = 0;
    long violations = 0;
    double worst = 0.0;  // largest normalized excess seen
    std::string first_violation;

    void fail(double excess, const std::string& where)
    {
        ++violations;
        if (first_violation.empty()) first_violation = where;
        worst = std::max(worst, excess);
    }
};

inline geometry::Tau random_tau(Xoshiro256& g, double T = 1.0)
{
    double u[4];
    for (double& x : u) x = T * g.uniform_open();
    geometry::Tau tau{std::min(u[0], u[1]), std::max(u[0], u[1]), std::min(u[2], u[3]), std::max(u[2], u[3])};
    if (tau.sp < tau.s) tau = {tau.sp, tau.tp, tau.s, tau.t};
    return tau;
}

inline double log_uniform(Xoshiro256& g, double lo, double hi)
{
    return lo * std::exp(std::log(hi / lo) * g.uniform_open());
}

/// lambda_rho_mu(tau) == region_lrm(region_decompose(tau)) within `rel`.
/// Region 2 labels the inner interval's variance lambda, so {lambda, rho}
/// is compared as an unordered pair.
inline ScanResult scan_consistency(long n, std::uint64_t seed, double rel = 1e-12)
{
    Xoshiro256 g(seed);
    ScanResult r;
    for (long i = 0; i < n; ++i, ++r.samples) {
        const double H = g.uniform_open();
        const auto tau = random_tau(g);
        const auto direct = geometry::lambda_rho_mu(H, tau);
        const auto rc = geometry::region_decompose(tau);
        auto viaR = geometry::region_lrm(H, rc);
        if (rc.region == 2) std::swap(viaR.lambda, viaR.rho);
        const double scale = std::max(direct.lambda, direct.rho);
        const double e = std::max({std::fabs(direct.lambda - viaR.lambda) / direct.lambda,
                                   std::fabs(direct.rho - viaR.rho) / direct.rho,
                                   std::fabs(direct.mu - viaR.mu) / scale});
        if (e > rel) r.fail(e, "H=" + std::to_string(H));
    }
    return r;
}

/// mu^2 <= lambda rho (1 + slack) always; delta > 0 whenever intervals differ.
inline ScanResult scan_cauchy_schwarz(long n, std::uint64_t seed, double slack = 1e-12)
{
    Xoshiro256 g(seed);
    ScanResult r;
    for (long i = 0; i < n; ++i, ++r.samples) {
        const double H = g.uniform_open();
        const auto tau = random_tau(g);
        const auto v = geometry::lambda_rho_mu(H, tau);
        const double lr = v.lambda * v.rho;
        const double excess = (v.mu * v.mu - lr) / lr;
        const bool identical = tau.s == tau.sp && tau.t == tau.tp;
        if (excess > slack || (!identical && !(excess < 0.0))) r.fail(excess, "H=" + std::to_string(H));
    }
    return r;
}

/// a + b + c >= 3 (abc)^{1/3}.
inline ScanResult scan_amgm(long n, std::uint64_t seed, double slack = 1e-12)
{
    Xoshiro256 g(seed);
    ScanResult r;
    for (long i = 0; i < n; ++i, ++r.samples) {
        const double a = log_uniform(g, 1e-6, 1e3), b = log_uniform(g, 1e-6, 1e3), c = log_uniform(g, 1e-6, 1e3);
        const double lhs = a + b + c, rhs = 3.0 * std::cbrt(a * b * c);
        const double excess = (rhs - lhs) / lhs;
        if (excess > slack) r.fail(excess, "a=" + std::to_string(a));
    }
    return r;
}

enum class K2Domain { All, AGeX };

/// |k2(H,x,a)| <= 2 (a x)^H; `domain` restricts the sampled (x,a).
inline ScanResult scan_k2_product_bound(long n, std::uint64_t seed, K2Domain domain, double slack = 1e-12)
{
    Xoshiro256 g(seed);
    ScanResult r;
    while (r.samples < n) {
        const double H = g.uniform_open();
        const double x = log_uniform(g, 1e-3, 1e3), a = log_uniform(g, 1e-3, 1e3);
        if (domain == K2Domain::AGeX && a < x) continue;
        ++r.samples;
        const double lhs = std::fabs(geometry::k2(H, x, a));
        const double rhs = 2.0 * std::pow(a * x, H);
        const double excess = (lhs - rhs) / rhs;
        if (excess > slack)
            r.fail(excess, "H=" + std::to_string(H) + " x=" + std::to_string(x) + " a=" + std::to_string(a));
    }
    return r;
}

/// |k2(H,x,a)| <= 2^{3-2H} |H(2H-1)| a^{2H-2} x^2 for x < a/2. Both sides
/// vanish at H = 1/2, so the slack is taken relative to the cancelling terms.
inline ScanResult scan_k2_taylor_bound(long n, std::uint64_t seed, double slack = 1e-12)
{
    Xoshiro256 g(seed);
    ScanResult r;
    for (long i = 0; i < n; ++i, ++r.samples) {
        const double H = g.uniform_open();
        const double a = log_uniform(g, 1e-3, 1e3);
        const double x = 0.5 * a * g.uniform_open();
        const double lhs = std::fabs(geometry::k2(H, x, a));
        const double rhs = std::pow(2.0, 3.0 - 2.0 * H) * std::fabs(H * (2.0 * H - 1.0)) * std::pow(a, 2.0 * H - 2.0) * x * x;
        const double terms = 2.0 * geometry::pow2h(a + x, H);
        const double excess = (lhs - rhs) / terms;
        if (excess > slack)
            r.fail(excess, "H=" + std::to_string(H) + " x=" + std::to_string(x) + " a=" + std::to_string(a));
    }
    return r;
}

/// Theta_3 == 0 at H = 1/2 for random gaps (mu_3 telescopes to zero).
inline ScanResult scan_theta3_half(long n, std::uint64_t seed, int d = 3, double slack = 1e-12)
{
    Xoshiro256 g(seed);
    ScanResult r;
    for (long i = 0; i < n; ++i, ++r.samples) {
        const geometry::RegionCoords rc{3, log_uniform(g, 1e-4, 1e2), log_uniform(g, 1e-4, 1e2),
                                        log_uniform(g, 1e-4, 1e2)};
        const auto g3 = geometry::region_lrm(0.5, rc);
        const double theta = geometry::delta_theta(0.5, d, rc, false).theta;
        const double excess = std::fabs(theta) * std::pow(g3.lambda * g3.rho, 0.5 * d);
        if (excess > slack) r.fail(excess, "a=" + std::to_string(rc.a));
    }
    return r;
}

/// delta_i > 0 (strictly) for every region and random positive gaps.
inline ScanResult scan_delta_positive(long n, std::uint64_t seed)
{
    Xoshiro256 g(seed);
    ScanResult r;
    for (long i = 0; i < n; ++i, ++r.samples) {
        const double H = g.uniform_open();
        const geometry::RegionCoords rc{1 + static_cast<int>(g() % 3), log_uniform(g, 1e-3, 1e2),
                                        log_uniform(g, 1e-3, 1e2), log_uniform(g, 1e-3, 1e2)};
        const auto v = geometry::region_lrm(H, rc);
        const double delta = v.lambda * v.rho - v.mu * v.mu;
        if (!(delta > 0.0)) r.fail(-delta, "region=" + std::to_string(rc.region));
    }
    return r;
}

/// Infimum of mu_3 / ((a+b+c)^{2H-2} a c) over a 20^3 log grid in [1e-3, 1]^3.
inline double mu3_ratio_infimum(double H)
{
    double inf = std::numeric_limits<double>::infinity();
    auto node = [](int k) { return std::pow(10.0, -3.0 + 3.0 * k / 19.0); };
    for (int i = 0; i < 20; ++i)
        for (int j = 0; j < 20; ++j)
            for (int k = 0; k < 20; ++k) {
                const double a = node(i), b = node(j), c = node(k);
                const double mu3 = geometry::region_lrm(H, {3, a, b, c}).mu;
                inf = std::min(inf, mu3 / (std::pow(a + b + c, 2.0 * H - 2.0) * a * c));
            }
    return inf;
}

}  // namespace silt::test
