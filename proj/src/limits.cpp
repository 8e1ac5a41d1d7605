#include "silt/limits.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "silt/chaos.hpp"
#include "silt/error.hpp"
#include "silt/geometry.hpp"
#include "silt/region_integrals.hpp"
#include "silt/silt.hpp"

namespace silt::limits {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kBoundaryGap = 1e-6;

quad::QuadSpec spec_for(double rel_tol)
{
    if (!(rel_tol > 0.0)) throw InvalidArgument("tolerance must be positive");
    quad::QuadSpec s;
    s.rel_tol = rel_tol;
    s.abs_tol = 1e-300;
    s.max_evals = 40'000'000;
    return s;
}

quad::QuadResult scaled(quad::QuadResult r, double factor)
{
    r.value *= factor;
    r.err_estimate *= std::fabs(factor);
    return r;
}

double theta_hat(double H, int d, double a, double b, double c)
{
    double s = 0.0;
    for (int i = 1; i <= 3; ++i) s += geometry::theta_shifted(H, d, {i, a, b, c}, 1.0);
    return s;
}

double theta_sum(double H, int d, double a, double b, double c)
{
    double s = 0.0;
    for (int i = 1; i <= 3; ++i) s += geometry::theta_stable(H, d, {i, a, b, c});
    return s;
}

Regime require_power(const Hurst& H, int d)
{
    if (d <= 2) throw InvalidArgument("sigma2_power needs d > 2 (the window 3/(2d) < H < 3/4 is empty for d = 2)");
    if (!H.exact() && std::fabs(H.value() - 1.5 / d) < kBoundaryGap)
        throw InvalidArgument(fmt::format(
            "H = {} is within {} of 3/(2d) = {}, where sigma^2 diverges; pass H as p/q for the boundary case",
            H.to_string(), kBoundaryGap, 1.5 / d));
    const Regime r = classify(H, d);
    if (r.tag != RegimeTag::CltPower)
        throw InvalidArgument(fmt::format("sigma2_power needs 3/(2d) < H < 3/4; (H = {}, d = {}) is {}", H.to_string(),
                                          d, r.name()));
    if (std::fabs(H.value() - 1.5 / d) < kBoundaryGap)
        throw InvalidArgument(fmt::format("H = {} is within {} of 3/(2d); sigma^2 diverges at the boundary",
                                          H.to_string(), kBoundaryGap));
    return r;
}

}  // namespace

quad::QuadResult xi_t(double H, int d, double T, double rel_tol)
{
    if (!(H > 0.0 && H < 1.0)) throw InvalidArgument("H must lie in (0,1)");
    if (d < 1) throw InvalidArgument("d must be positive");
    if (!(T > 0.0)) throw InvalidArgument("horizon T must be positive");
    if (!(H * d < 1.5))
        throw DivergenceError(fmt::format("Xi_T is finite iff Hd < 3/2 (got Hd = {})", H * d));
    return regions::pair_domain(T, [&](double a, double b, double c) { return theta_sum(H, d, a, b, c); },
                                spec_for(rel_tol));
}

quad::QuadResult variance_limit(double H, int d, double T, double rel_tol)
{
    return scaled(xi_t(H, d, T, rel_tol), std::pow(kTwoPi, -d));
}

quad::QuadResult chaos_limit_partial_sum(const Hurst& H, int d, int M, double rel_tol)
{
    if (M < 1 || M > chaos::kMaxAlphaOrder)
        throw InvalidArgument(fmt::format("chaos order must be in [1, {}]", chaos::kMaxAlphaOrder));
    const Regime r = classify(H, d);
    const double h = H.value();
    // Series coefficients in gamma; the per-chaos prefactor differs by regime.
    std::vector<double> coef(M + 1, 0.0);
    const bool power = r.tag == RegimeTag::CltPower;
    if (!power && r.tag != RegimeTag::CltLog)
        throw InvalidArgument(fmt::format(
            "per-chaos limit variances exist only in the CLT regimes; (H = {}, d = {}) is {}", H.to_string(), d,
            r.name()));
    for (int m = 1; m <= M; ++m)
        coef[m] = chaos::alpha_m(d, m) / std::pow(4.0, m) * (power ? 2.0 : 1.0 / h) / std::pow(kTwoPi, d);
    auto series = [&](double gamma) {
        double s = 0.0;
        for (int m = M; m >= 1; --m) s = (s + coef[m]) * gamma;
        return s;
    };
    if (power) {
        auto f = [&](double a, double b, double c) {
            double s = 0.0;
            for (int i = 1; i <= 3; ++i) {
                const auto g = geometry::region_lrm(h, {i, a, b, c});
                const double base = (1.0 + g.lambda) * (1.0 + g.rho);
                s += std::pow(base, -0.5 * d) * series(g.mu * g.mu / base);
            }
            return s;
        };
        return regions::orthant(f, spec_for(rel_tol));
    }
    auto f = [&](double a, double b, double c) {
        double s = 0.0;
        for (int i = 1; i <= 3; ++i) {
            const auto g = geometry::stable_lrm(h, {i, a, b, c});
            s += std::pow(g.lambda * g.rho, -0.5 * d) * series(g.gamma);
        }
        return s;
    };
    return regions::simplex(f, spec_for(rel_tol));
}

quad::QuadResult chaos_limit_variance(const Hurst& H, int d, int m, double rel_tol)
{
    if (m < 1) throw InvalidArgument("per-chaos limits are defined for m >= 1");
    const Regime r = classify(H, d);
    const double h = H.value(), alpha = chaos::alpha_m(d, m);
    if (r.tag == RegimeTag::CltPower) {
        auto q = regions::orthant([&](double a, double b, double c) { return geometry::psi_m(h, d, m, a, b, c); },
                                  spec_for(rel_tol));
        return scaled(q, alpha / (std::pow(kTwoPi, d) * std::pow(2.0, 2 * m - 1)));
    }
    if (r.tag == RegimeTag::CltLog) {
        auto f = [&](double a, double b, double c) {
            double s = 0.0;
            for (int i = 1; i <= 3; ++i) {
                const auto g = geometry::stable_lrm(h, {i, a, b, c});
                s += std::pow(g.lambda * g.rho, -0.5 * d) * std::pow(g.gamma, m);
            }
            return s;
        };
        return scaled(regions::simplex(f, spec_for(rel_tol)), alpha / (h * std::pow(4.0, m) * std::pow(kTwoPi, d)));
    }
    throw InvalidArgument(fmt::format("per-chaos limit variances exist only in the CLT regimes; (H = {}, d = {}) is {}",
                                      H.to_string(), d, r.name()));
}

quad::QuadResult sigma2_power(const Hurst& H, int d, double rel_tol)
{
    require_power(H, d);
    const double h = H.value();
    auto q = regions::orthant([&](double a, double b, double c) { return theta_hat(h, d, a, b, c); },
                              spec_for(rel_tol));
    return scaled(q, 2.0 * std::pow(kTwoPi, -d));
}

quad::QuadResult sigma2_power_direct(const Hurst& H, int d, double rel_tol)
{
    require_power(H, d);
    const double h = H.value(), half_d = 0.5 * d;
    // Integrand at interval lengths x, y; rc locates the pair [0, x], [z, z + y]
    // with its differences formed exactly by the caller.
    auto g = [&](double x, double y, const geometry::RegionCoords& rc) {
        const double lx = geometry::pow2h(x, h), ly = geometry::pow2h(y, h);
        const double A = (1.0 + lx) * (1.0 + ly);
        const auto sg = geometry::stable_lrm(h, rc);
        const double q = sg.mu * sg.mu;  // K1^2 / 4
        if (q < 0.5 * A) return std::pow(A, -half_d) * std::expm1(-half_d * std::log1p(-q / A));
        // Nearly coincident intervals: A - q = 1 + lx + ly + lx ly (1 - gamma).
        const double delta = 1.0 + lx + ly + lx * ly * std::max(0.0, sg.one_minus_gamma);
        return std::pow(delta, -half_d) - std::pow(A, -half_d);
    };
    // Axes: m = min(x, y) and g = |x - y| (the z-integral has a kink along
    // x = y, kept on a face), then z. Along z the integrand has kinks at
    // z = x - y (when y < x) and z = x; each piece runs between kinks, with
    // the unbounded piece z = x + w on its own semi-infinite axis.
    quad::PointIntegrandN finite = [&](std::span<const quad::Point> p) {
        const double m = p[0].x, gap = p[1].x, v = p[2].from_lo, v1 = p[2].to_hi;
        const double x = m + gap;
        // y < x (x = m + gap, y = m): z = gap v, then z = gap + m v.
        double s = gap * g(x, m, {2, gap * v, m, gap * v1});
        s += m * g(x, m, {1, gap + m * v, m * v1, m * v});
        // y > x (x = m, y = m + gap): z = m v.
        s += m * g(m, x, {1, m * v, m * v1, m * v + gap});
        return s;
    };
    quad::PointIntegrandN tail = [&](std::span<const quad::Point> p) {
        const double m = p[0].x, gap = p[1].x, w = p[2].x, x = m + gap;
        return g(x, m, {3, x, w, m}) + g(m, x, {3, m, w, x});
    };
    const quad::QuadSpec spec = spec_for(rel_tol);
    const std::array<bool, 3> semi_finite{true, true, false}, semi_tail{true, true, true};
    auto q = quad::integrate_product_de(3, finite, semi_finite, spec);
    q += quad::integrate_product_de(3, tail, semi_tail, spec);
    return scaled(q, 2.0 * std::pow(kTwoPi, -d));
}

quad::QuadResult sigma2_log(const Hurst& H, int d, double rel_tol)
{
    if (!H.exact())
        throw InvalidArgument("sigma2_log needs H = 3/(2d) exactly; pass H as a rational p/q");
    const Regime r = classify(H, d);
    if (r.tag != RegimeTag::CltLog)
        throw InvalidArgument(fmt::format("sigma2_log needs H = 3/(2d) < 3/4; (H = {}, d = {}) is {}", H.to_string(), d,
                                          r.name()));
    const double h = H.value();
    auto q = regions::simplex([&](double a, double b, double c) { return theta_sum(h, d, a, b, c); },
                              spec_for(rel_tol));
    return scaled(q, 1.0 / (h * std::pow(kTwoPi, d)));
}

quad::QuadResult sigma2(const Hurst& H, int d, double rel_tol)
{
    const Regime r = classify(H, d);
    if (r.tag == RegimeTag::CltLog) return sigma2_log(H, d, rel_tol);
    return sigma2_power(H, d, rel_tol);
}

double value_or_throw(const quad::QuadResult& r, const std::string& what)
{
    if (!r.converged)
        throw NonConvergence(fmt::format("{}: quadrature did not converge (value {:.6g}, error estimate {:.3g}, {} evals)",
                                         what, r.value, r.err_estimate, r.evals));
    return r.value;
}

void write_constants_csv(std::ostream& os, const std::vector<ConstantRow>& rows)
{
    os << "H,d,quantity,value,err_estimate,evals\n";
    for (const auto& row : rows)
        os << fmt::format("{},{},{},{:.17g},{:.17g},{}\n", row.H, row.d, row.quantity, row.value, row.err_estimate,
                          row.evals);
}

}  // namespace silt::limits
