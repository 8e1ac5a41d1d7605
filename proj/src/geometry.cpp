#include "silt/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "silt/error.hpp"

namespace silt::geometry {

double pow2h(double x, double H)
{
    const double ax = std::fabs(x);
    if (ax == 0.0) return 0.0;
    if (H == 0.5) return ax;  // Brownian case exact, so independent increments give exact zeros
    return std::exp(2.0 * H * std::log(ax));
}

GeomValues lambda_rho_mu(double H, const Tau& tau)
{
    const double lambda = pow2h(tau.t - tau.s, H);
    const double rho = pow2h(tau.tp - tau.sp, H);
    const double mu = 0.5 * (pow2h(tau.s - tau.tp, H) + pow2h(tau.sp - tau.t, H) - pow2h(tau.t - tau.tp, H) -
                             pow2h(tau.s - tau.sp, H));
    return {lambda, rho, mu};
}

RegionCoords region_decompose(const Tau& tau)
{
    if (!(tau.s < tau.t) || !(tau.sp < tau.tp))
        throw InvalidArgument("region_decompose requires s < t and s' < t'");
    if (tau.sp < tau.s) throw InvalidArgument("region_decompose requires s <= s' (swap the intervals)");
    if (tau.sp < tau.t) {
        if (tau.t <= tau.tp) return {1, tau.sp - tau.s, tau.t - tau.sp, tau.tp - tau.t};
        return {2, tau.sp - tau.s, tau.tp - tau.sp, tau.t - tau.tp};
    }
    // s' >= t: disjoint, or touching (s' == t), which also satisfies region 1
    // with b = 0; the lower index wins.
    if (tau.sp == tau.t) return {1, tau.sp - tau.s, 0.0, tau.tp - tau.t};
    return {3, tau.t - tau.s, tau.sp - tau.t, tau.tp - tau.sp};
}

namespace {

// (1+x)^p - 1 - p x for |x| < 1, without cancellation for small x.
double binom_tail(double x, double p)
{
    if (std::fabs(x) >= 0.25) return std::expm1(p * std::log1p(x)) - p * x;
    double term = p * x, sum = 0.0;
    for (int k = 2; k < 60; ++k) {
        term *= (p - (k - 1)) / k * x;
        sum += term;
        if (std::fabs(term) <= 1e-18 * std::fabs(sum)) break;
    }
    return sum;
}

// (u + h)^p - u^p for u, h >= 0 at full relative precision.
double first_diff(double u, double h, double p)
{
    if (u == 0.0) return h == 0.0 ? 0.0 : std::exp(p * std::log(h));
    return std::exp(p * std::log(u)) * std::expm1(p * std::log1p(h / u));
}

// mu_3 = 1/2 [(a+b+c)^p + b^p - (b+c)^p - (a+b)^p], a mixed second
// difference; grouped so that no O(1) terms cancel.
double mu3(double a, double b, double c, double p)
{
    if (a == 0.0 || c == 0.0) return 0.0;
    if (a + c < b) {
        const double x = a / b, z = c / b;
        return 0.5 * std::exp(p * std::log(b)) * (binom_tail(x + z, p) - binom_tail(x, p) - binom_tail(z, p));
    }
    if (a >= c) return 0.5 * (first_diff(a + b, c, p) - first_diff(b, c, p));
    return 0.5 * (first_diff(b + c, a, p) - first_diff(b, a, p));
}

}  // namespace

GeomValues region_lrm(double H, const RegionCoords& rc)
{
    const double a = rc.a, b = rc.b, c = rc.c;
    if (!(a >= 0.0 && b >= 0.0 && c >= 0.0)) throw InvalidArgument("region coordinates must be nonnegative");
    const double p = 2.0 * H;
    // Brownian case: mu is the overlap length, exactly.
    const bool bm = H == 0.5;
    switch (rc.region) {
    case 1: {
        // Symmetric in a, c; differencing against the larger keeps a >> b, c exact.
        const double hi = std::max(a, c), lo = std::min(a, c);
        return {pow2h(a + b, H), pow2h(b + c, H),
                bm ? b : 0.5 * (first_diff(hi, b + lo, p) + pow2h(b, H) - pow2h(lo, H))};
    }
    case 2:
        return {pow2h(b, H), pow2h(a + b + c, H), bm ? b : 0.5 * (first_diff(c, b, p) + first_diff(a, b, p))};
    case 3:
        return {pow2h(a, H), pow2h(c, H), bm ? 0.0 : mu3(a, b, c, p)};
    default:
        throw InvalidArgument(fmt::format("region index must be 1, 2 or 3, got {}", rc.region));
    }
}

double theta_from(double lambda, double rho, double mu, int d)
{
    const double lr = lambda * rho;
    const double gamma = mu * mu / lr;
    if (!(gamma < 1.0)) return std::numeric_limits<double>::infinity();
    const double half_d = 0.5 * d;
    return std::pow(lr, -half_d) * std::expm1(-half_d * std::log1p(-gamma));
}

DeltaTheta delta_theta(double H, int d, const RegionCoords& rc, bool hatted)
{
    auto g = region_lrm(H, rc);
    if (hatted) {
        g.lambda += 1.0;
        g.rho += 1.0;
    }
    const double delta = g.lambda * g.rho - g.mu * g.mu;
    if (!(delta > 0.0))
        throw InvalidArgument(
            fmt::format("degenerate configuration: delta = {} <= 0 at region {} ({}, {}, {})", delta, rc.region,
                        rc.a, rc.b, rc.c));
    return {delta, theta_from(g.lambda, g.rho, g.mu, d)};
}

StableGeom stable_lrm(double H, const RegionCoords& rc)
{
    const auto g = region_lrm(H, rc);
    const double lr = g.lambda * g.rho;
    StableGeom out{g.lambda, g.rho, g.mu, g.mu * g.mu / lr, 0.0};
    const bool corner = (rc.region == 1 || rc.region == 2) && rc.a + rc.c < rc.b;
    if (!corner) {
        out.one_minus_gamma = 1.0 - out.gamma;
        return out;
    }
    // sqrt(lambda rho) - mu = b^{2H} * bracket with x = a/b, y = c/b; the
    // first-order terms in x, y cancel exactly and are removed analytically.
    const double x = rc.a / rc.b, y = rc.c / rc.b, p = 2.0 * H;
    const double ex = std::expm1(H * std::log1p(x)), ey = std::expm1(H * std::log1p(y));
    double bracket;
    if (rc.region == 1) {
        bracket = binom_tail(x, H) + binom_tail(y, H) + ex * ey - 0.5 * binom_tail(x + y, p);
    } else {
        bracket = binom_tail(x + y, H) - 0.5 * binom_tail(x, p) - 0.5 * binom_tail(y, p);
    }
    bracket += 0.5 * (pow2h(x, H) + pow2h(y, H));
    const double b2h = pow2h(rc.b, H);
    const double root = std::sqrt(lr);
    const double minus = b2h * bracket;  // sqrt(lambda rho) - mu
    out.one_minus_gamma = minus * (root + g.mu) / lr;
    return out;
}

double theta_stable(double H, int d, const RegionCoords& rc)
{
    const auto g = stable_lrm(H, rc);
    if (!(g.one_minus_gamma > 0.0)) return std::numeric_limits<double>::infinity();
    const double half_d = 0.5 * d;
    const double log_omg = g.gamma < 0.5 ? std::log1p(-g.gamma) : std::log(g.one_minus_gamma);
    return std::pow(g.lambda * g.rho, -half_d) * std::expm1(-half_d * log_omg);
}

double theta_shifted(double H, int d, const RegionCoords& rc, double shift)
{
    return theta_shifted(H, d, rc, shift, shift);
}

double theta_shifted(double H, int d, const RegionCoords& rc, double shift_l, double shift_r)
{
    if (!(shift_l > 0.0 && shift_r > 0.0)) throw InvalidArgument("theta_shifted needs positive shifts");
    const auto g = stable_lrm(H, rc);
    const double lh = g.lambda + shift_l, rh = g.rho + shift_r, lr = lh * rh;
    const double gamma = g.mu * g.mu / lr;
    const double half_d = 0.5 * d;
    double log_omg;
    if (gamma < 0.5) {
        log_omg = std::log1p(-gamma);
    } else {
        const double delta =
            shift_l * shift_r + shift_l * g.rho + shift_r * g.lambda + g.lambda * g.rho * g.one_minus_gamma;
        log_omg = std::log(delta / lr);
    }
    return std::pow(lr, -half_d) * std::expm1(-half_d * log_omg);
}

RegionCoords interval_pair_coords(double x, double y, double z)
{
    if (!(x > 0.0 && y > 0.0 && z >= 0.0)) throw InvalidArgument("interval pair needs x, y > 0 and z >= 0");
    // Region tests use the same rounded differences that become coordinates.
    RegionCoords rc;
    const double inner_gap = (x - z) - y;
    if (z >= x)
        rc = {3, x, z - x, y};
    else if (inner_gap >= 0.0)
        rc = {2, z, y, inner_gap};
    else
        rc = {1, z, x - z, std::max(0.0, (z + y) - x)};
    if (rc.region == 3 && rc.b == 0.0) rc.region = 1;
    return rc;
}

double k1(double H, double x, double y, double z)
{
    if (!(x >= 0.0 && y >= 0.0 && z >= 0.0)) throw InvalidArgument("k1 needs x, y, z >= 0");
    if (x == 0.0 || y == 0.0) return 0.0;
    // Twice the covariance of the increments over [0,x] and [z,z+y], placed
    // directly in region coordinates to avoid differencing large times.
    return 2.0 * region_lrm(H, interval_pair_coords(x, y, z)).mu;
}

double k2(double H, double x, double z) { return k1(H, x, x, z); }

double psi_m(double H, int d, int m, double a, double b, double c)
{
    if (m < 1) throw InvalidArgument("psi_m requires m >= 1");
    double sum = 0.0;
    for (int i = 1; i <= 3; ++i) {
        const auto g = region_lrm(H, {i, a, b, c});
        const double base = (1.0 + g.lambda) * (1.0 + g.rho);
        // As base^{-d/2} gamma-hat^m: mu^{2m} alone overflows in the far field.
        sum += std::pow(base, -0.5 * d) * std::pow(g.mu * g.mu / base, m);
    }
    return sum;
}

}  // namespace silt::geometry
