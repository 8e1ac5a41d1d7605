#include "silt/chaos.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "silt/error.hpp"
#include "silt/geometry.hpp"
#include "silt/kernels.hpp"
#include "silt/region_integrals.hpp"
#include "silt/silt.hpp"

namespace silt::chaos {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

BigInt central_binomial(int j)
{
    BigInt r = 1;
    for (int k = 1; k <= j; ++k) r = r * (j + k) / k;
    return r;
}

void check_region_args(double H, int d, double eps, double T)
{
    if (!(H > 0.0 && H < 1.0)) throw InvalidArgument("H must lie in (0,1)");
    if (d < 1) throw InvalidArgument("d must be positive");
    if (!(T > 0.0)) throw InvalidArgument("horizon T must be positive");
    if (!(eps > 0.0)) throw InvalidArgument("eps must be positive (the eps = 0 limits live in the limits module)");
}

quad::QuadSpec region_spec(double rel_tol)
{
    quad::QuadSpec spec;
    spec.rel_tol = rel_tol;
    spec.abs_tol = 1e-300;
    spec.max_evals = 200'000'000;
    return spec;
}

}  // namespace

double hermite(int n, double x)
{
    if (n < 0) throw InvalidArgument("Hermite degree must be nonnegative");
    double prev = 1.0, cur = x;
    if (n == 0) return prev;
    for (int k = 1; k < n; ++k) {
        const double next = x * cur - k * prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

double alpha_multi(std::span<const int> counts)
{
    double r = 1.0;
    for (int m : counts) {
        if (m < 0) throw InvalidArgument("multi-index counts must be nonnegative");
        // (2m)! / (m! 2^m) = (2m-1)!!
        for (int k = 2 * m - 1; k > 1; k -= 2) r *= k;
    }
    return r;
}

BigInt alpha_m_exact(int d, int m)
{
    if (d < 1) throw InvalidArgument("alpha_m needs d >= 1");
    if (m < 0 || m > kMaxAlphaOrder)
        throw InvalidArgument(fmt::format("alpha_m supports 0 <= m <= {}, got {}", kMaxAlphaOrder, m));
    // Coefficients of (sum_j C(2j,j) x^j)^d truncated at degree m.
    std::vector<BigInt> base(m + 1), acc(m + 1, 0);
    for (int j = 0; j <= m; ++j) base[j] = central_binomial(j);
    acc[0] = 1;
    for (int k = 0; k < d; ++k) {
        std::vector<BigInt> next(m + 1, 0);
        for (int i = 0; i <= m; ++i)
            for (int j = 0; i + j <= m; ++j) next[i + j] += acc[i] * base[j];
        acc.swap(next);
    }
    return acc[m];
}

double alpha_m(int d, int m) { return alpha_m_exact(d, m).convert_to<double>(); }

ChaosTables chaos_tables(const GridSpec& grid, double H, double eps, int M)
{
    const std::int64_t np = grid.n + 1;
    const double dt = grid.dt(), half_d = 0.5 * grid.d;
    ChaosTables t;
    t.lambda.resize(np);
    t.coef.resize((M + 1) * np);
    const double pre = std::pow(kTwoPi, -half_d);
    for (std::int64_t L = 0; L < np; ++L) {
        t.lambda[L] = geometry::pow2h(static_cast<double>(L) * dt, H);
        for (int m = 0; m <= M; ++m) t.coef[m * np + L] = pre * std::pow(eps + t.lambda[L], -half_d - m);
    }
    t.diag0 = 0.5 * dt * dt * (static_cast<double>(grid.n) - 0.5) * t.coef[0];
    return t;
}

std::vector<double> project_chaos_all(const FbmPath& path, double eps, int M, bool allow_under_resolved)
{
    path.grid.validate();
    if (!(eps > 0.0)) throw InvalidArgument("eps must be positive");
    if (M < 0 || M > kernels::kMaxChaosOrder)
        throw InvalidArgument(fmt::format("chaos order must be in [0, {}]", kernels::kMaxChaosOrder));
    if (!allow_under_resolved) check_eps_resolution(path.grid, path.H, eps);
    std::vector<double> out(M + 1);
    if (M > 0) {
        const auto tables = chaos_tables(path.grid, path.H, eps, M);
        std::vector<double> soa;
        to_soa(path, soa);
        const auto w = trapezoid_weights(path.grid);
        kernels::chaos_pair_sums({soa, path.grid.n + 1, path.grid.d}, w, tables.lambda, tables.coef, M, out);
    }
    out[0] = discrete_mean_ie(path.grid, path.H, eps);
    return out;
}

double project_chaos(const FbmPath& path, double eps, int m, bool allow_under_resolved)
{
    if (m < 0) throw InvalidArgument("chaos index must be nonnegative");
    return project_chaos_all(path, eps, m, allow_under_resolved)[m];
}

quad::QuadResult chaos_variance(double H, int d, double eps, int m, double T, double rel_tol)
{
    check_region_args(H, d, eps, T);
    if (m < 0 || m > kMaxAlphaOrder) throw InvalidArgument("chaos index out of range");
    auto f = [&](double a, double b, double c) {
        double s = 0.0;
        for (int i = 1; i <= 3; ++i) {
            const auto g = geometry::region_lrm(H, {i, a, b, c});
            const double base = (eps + g.lambda) * (eps + g.rho);
            s += std::pow(base, -0.5 * d) * (m == 0 ? 1.0 : std::pow(g.mu * g.mu / base, m));
        }
        return s;
    };
    auto r = regions::pair_domain(T, f, region_spec(rel_tol));
    const double pre = alpha_m(d, m) / (std::pow(kTwoPi, d) * std::pow(4.0, m));
    r.value *= pre;
    r.err_estimate *= pre;
    return r;
}

quad::QuadResult second_moment_ie(double H, int d, double eps, double T, double rel_tol)
{
    check_region_args(H, d, eps, T);
    auto f = [&](double a, double b, double c) {
        double s = 0.0;
        for (int i = 1; i <= 3; ++i) {
            const auto g = geometry::region_lrm(H, {i, a, b, c});
            s += std::pow((g.lambda + eps) * (g.rho + eps) - g.mu * g.mu, -0.5 * d);
        }
        return s;
    };
    auto r = regions::pair_domain(T, f, region_spec(rel_tol));
    const double pre = std::pow(kTwoPi, -d);
    r.value *= pre;
    r.err_estimate *= pre;
    return r;
}

quad::QuadResult variance_ie(double H, int d, double eps, double T, double rel_tol)
{
    check_region_args(H, d, eps, T);
    auto f = [&](double a, double b, double c) {
        double s = 0.0;
        for (int i = 1; i <= 3; ++i) s += geometry::theta_shifted(H, d, {i, a, b, c}, eps);
        return s;
    };
    auto r = regions::pair_domain(T, f, region_spec(rel_tol));
    const double pre = std::pow(kTwoPi, -d);
    r.value *= pre;
    r.err_estimate *= pre;
    return r;
}

quad::QuadResult covariance_ie(double H, int d, double eps, double eta, double T, double rel_tol)
{
    check_region_args(H, d, eps, T);
    check_region_args(H, d, eta, T);
    // Either interval of the pair may carry eps; average the two assignments.
    auto f = [&](double a, double b, double c) {
        double s = 0.0;
        for (int i = 1; i <= 3; ++i)
            s += 0.5 * (geometry::theta_shifted(H, d, {i, a, b, c}, eps, eta) +
                        geometry::theta_shifted(H, d, {i, a, b, c}, eta, eps));
        return s;
    };
    auto r = regions::pair_domain(T, f, region_spec(rel_tol));
    const double pre = std::pow(kTwoPi, -d);
    r.value *= pre;
    r.err_estimate *= pre;
    return r;
}

}  // namespace silt::chaos
