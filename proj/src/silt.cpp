#include "silt/silt.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "silt/error.hpp"
#include "silt/geometry.hpp"

namespace silt {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kBoundaryGuard = 1e-12;

void check_d(int d)
{
    if (d < 2) throw InvalidArgument(fmt::format("dimension d must be at least 2, got {}", d));
}

// Sign of H - p/q computed exactly when H is rational.
int compare(const Hurst& H, std::int64_t p, std::int64_t q)
{
    if (const auto& r = H.exact()) {
        const __int128 lhs = static_cast<__int128>(r->num) * q, rhs = static_cast<__int128>(p) * r->den;
        return (lhs > rhs) - (lhs < rhs);
    }
    const double b = static_cast<double>(p) / static_cast<double>(q);
    if (std::fabs(H.value() - b) < kBoundaryGuard)
        throw InvalidArgument(fmt::format("H = {} is within 1e-12 of the regime boundary {}/{}; pass H as an exact "
                                          "rational such as \"{}/{}\"",
                                          H.to_string(), p, q, p, q));
    return H.value() > b ? 1 : -1;
}

}  // namespace

std::string_view regime_name(RegimeTag tag)
{
    switch (tag) {
    case RegimeTag::L2Convergent: return "L2-Convergent";
    case RegimeTag::PowerRenorm: return "PowerRenorm";
    case RegimeTag::LogRenorm: return "LogRenorm";
    case RegimeTag::CltPower: return "CLT-Power";
    case RegimeTag::CltLog: return "CLT-Log";
    case RegimeTag::Unsupported: return "Unsupported";
    }
    return "?";
}

std::string_view Regime::name() const { return regime_name(tag); }

std::string_view Regime::condition() const
{
    switch (tag) {
    case RegimeTag::L2Convergent: return "H < 1/d";
    case RegimeTag::PowerRenorm: return "1/d < H < 3/(2d)";
    case RegimeTag::LogRenorm: return "H = 1/d";
    case RegimeTag::CltPower: return "3/(2d) < H < 3/4";
    case RegimeTag::CltLog: return "H = 3/(2d) < 3/4";
    case RegimeTag::Unsupported: return "H >= 3/4";
    }
    return "?";
}

std::string Regime::scaling() const
{
    if (tag == RegimeTag::CltLog) return "(log(1/eps))^-1/2";
    if (tag == RegimeTag::CltPower) return fmt::format("eps^{:.17g}", 0.5 * d - 0.75 / H.value());
    return {};
}

Regime classify(const Hurst& H, int d)
{
    check_d(d);
    if (compare(H, 3, 4) >= 0) return {RegimeTag::Unsupported, H, d};
    const int vs_inv_d = compare(H, 1, d);
    if (vs_inv_d < 0) return {RegimeTag::L2Convergent, H, d};
    if (vs_inv_d == 0) return {RegimeTag::LogRenorm, H, d};
    const int vs_clt = compare(H, 3, 2 * d);
    if (vs_clt < 0) return {RegimeTag::PowerRenorm, H, d};
    if (vs_clt == 0) return {RegimeTag::CltLog, H, d};
    return {RegimeTag::CltPower, H, d};
}

quad::QuadResult chd_quad(double H, int d)
{
    check_d(d);
    if (!(H * d > 1.0))
        throw DivergenceError(fmt::format("C_(H,d) needs Hd > 1 for a finite integral, got Hd = {}", H * d));
    quad::QuadSpec spec;
    spec.rel_tol = 1e-10;
    spec.abs_tol = 1e-300;
    const double half_d = 0.5 * d;
    auto r = quad::integrate_1d([&](double z) { return std::pow(geometry::pow2h(z, H) + 1.0, -half_d); },
                                {0.0, quad::kInf}, spec);
    const double pre = std::pow(kTwoPi, -half_d);
    r.value *= pre;
    r.err_estimate *= pre;
    return r;
}

double chd(double H, int d)
{
    const auto r = chd_quad(H, d);
    if (!r.converged) throw NonConvergence(fmt::format("C_(H,d) quadrature did not converge (H={}, d={})", H, d));
    return r.value;
}

quad::QuadResult mean_ie_quad(double H, int d, double eps, double T)
{
    check_d(d);
    if (!(T > 0.0)) throw InvalidArgument("horizon T must be positive");
    if (!(eps >= 0.0)) throw InvalidArgument("eps must be nonnegative");
    if (eps == 0.0 && !(H * d < 1.0))
        throw DivergenceError(fmt::format("E[I_0] is infinite unless Hd < 1 (got Hd = {})", H * d));
    quad::QuadSpec spec;
    spec.rel_tol = 1e-11;
    spec.abs_tol = 1e-300;
    const double half_d = 0.5 * d;
    auto r = quad::integrate_1d(
        [&](double s) { return (T - s) * std::pow(eps + geometry::pow2h(s, H), -half_d); }, {0.0, T}, spec);
    const double pre = std::pow(kTwoPi, -half_d);
    r.value *= pre;
    r.err_estimate *= pre;
    return r;
}

double mean_ie(double H, int d, double eps, double T)
{
    const auto r = mean_ie_quad(H, d, eps, T);
    if (!r.converged) throw NonConvergence("E[I_eps] quadrature did not converge");
    return r.value;
}

double renorm_subtractor(const Regime& r, double eps, double T)
{
    if (!(eps > 0.0)) throw InvalidArgument("eps must be positive");
    const double H = r.H.value();
    switch (r.tag) {
    case RegimeTag::L2Convergent: return 0.0;
    case RegimeTag::PowerRenorm: return T * chd(H, r.d) * std::pow(eps, 0.5 / H - 0.5 * r.d);
    case RegimeTag::LogRenorm: return T * std::log(1.0 / eps) / (2.0 * H * std::pow(kTwoPi, 0.5 * r.d));
    case RegimeTag::CltPower:
    case RegimeTag::CltLog: return mean_ie(H, r.d, eps, T);
    case RegimeTag::Unsupported: break;
    }
    throw InvalidArgument(fmt::format("no renormalization for H = {}, d = {}: {}", r.H.to_string(), r.d,
                                      r.condition()));
}

double scaling_r(const Regime& r, double eps)
{
    if (!(eps > 0.0)) throw InvalidArgument("eps must be positive");
    if (r.tag == RegimeTag::CltLog) {
        if (!(eps < 1.0)) throw InvalidArgument("log scaling needs eps < 1");
        return 1.0 / std::sqrt(std::log(1.0 / eps));
    }
    if (r.tag == RegimeTag::CltPower) return std::pow(eps, 0.5 * r.d - 0.75 / r.H.value());
    throw InvalidArgument(fmt::format("r(eps) is defined only for 3/(2d) <= H < 3/4; (H = {}, d = {}) is {}",
                                      r.H.to_string(), r.d, r.name()));
}

std::vector<double> trapezoid_weights(const GridSpec& grid)
{
    grid.validate();
    std::vector<double> w(grid.n + 1, grid.dt());
    w.front() *= 0.5;
    w.back() *= 0.5;
    return w;
}

void check_eps_resolution(const GridSpec& grid, double H, double eps)
{
    const double floor = std::pow(grid.dt(), 2.0 * H);
    if (eps < floor)
        throw InvalidArgument(fmt::format("eps = {} is below dt^(2H) = {:.6g}: the heat kernel is narrower than a "
                                          "grid step; refine the grid or pass the override",
                                          eps, floor));
}

double lag_weight(const GridSpec& grid, std::int64_t L)
{
    const double dt2 = grid.dt() * grid.dt();
    const auto n = grid.n;
    if (L < 0 || L > n) return 0.0;
    if (L == 0) return 0.5 * dt2 * (static_cast<double>(n) - 0.5);
    if (L == n) return 0.25 * dt2;
    return dt2 * static_cast<double>(n - L);
}

double discrete_mean_ie(const GridSpec& grid, double H, double eps)
{
    grid.validate();
    if (!(eps > 0.0)) throw InvalidArgument("eps must be positive");
    const double half_d = 0.5 * grid.d, dt = grid.dt();
    // Largest lags first: terms grow toward L = 0.
    double s = 0.0, c = 0.0;
    for (std::int64_t L = grid.n; L >= 0; --L) {
        const double lam = geometry::pow2h(static_cast<double>(L) * dt, H);
        const double term = lag_weight(grid, L) * std::pow(kTwoPi * (eps + lam), -half_d);
        const double t = s + term;
        c += std::fabs(s) >= std::fabs(term) ? (s - t) + term : (term - t) + s;
        s = t;
    }
    return s + c;
}

void to_soa(std::span<const double> rowmajor, std::int64_t np, int d, std::vector<double>& out)
{
    out.resize(static_cast<std::size_t>(np * d));
    for (std::int64_t k = 0; k < np; ++k)
        for (int c = 0; c < d; ++c) out[c * np + k] = rowmajor[k * d + c];
}

void to_soa(const FbmPath& path, std::vector<double>& out) { to_soa(path.values, path.grid.n + 1, path.grid.d, out); }

void estimate_ie_soa(const kernels::PathSoA& path, double dt, std::span<const double> w,
                     std::span<const double> eps, std::span<double> out)
{
    std::vector<double> inv2eps(eps.size());
    for (std::size_t e = 0; e < eps.size(); ++e) {
        if (!(eps[e] > 0.0)) throw InvalidArgument("eps must be positive");
        inv2eps[e] = 0.5 / eps[e];
    }
    kernels::heat_pair_sums(path, w, inv2eps, out);
    const double diag = 0.5 * dt * dt * (static_cast<double>(path.np - 1) - 0.5);
    for (std::size_t e = 0; e < eps.size(); ++e) {
        const double p0 = std::pow(kTwoPi * eps[e], -0.5 * path.d);
        out[e] = p0 * (out[e] + diag);
    }
}

std::vector<double> estimate_ie_ladder(const FbmPath& path, std::span<const double> eps, bool allow_under_resolved)
{
    path.grid.validate();
    if (!allow_under_resolved)
        for (double e : eps) check_eps_resolution(path.grid, path.H, e);
    std::vector<double> soa;
    to_soa(path, soa);
    const auto w = trapezoid_weights(path.grid);
    std::vector<double> out(eps.size());
    estimate_ie_soa({soa, path.grid.n + 1, path.grid.d}, path.grid.dt(), w, eps, out);
    return out;
}

double estimate_ie(const FbmPath& path, double eps, bool allow_under_resolved)
{
    const double e[] = {eps};
    return estimate_ie_ladder(path, e, allow_under_resolved)[0];
}

}  // namespace silt
