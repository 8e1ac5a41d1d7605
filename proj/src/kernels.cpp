#include "silt/kernels.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <vector>

#include <fmt/format.h>

#include "silt/error.hpp"

namespace silt::kernels {

namespace {

std::atomic<int> g_forced{-1};

void check_args(const PathSoA& p, std::span<const double> w)
{
    if (p.np < 1 || p.d < 1 || p.x.size() != static_cast<std::size_t>(p.np * p.d) ||
        w.size() != static_cast<std::size_t>(p.np))
        throw InvalidArgument("pair kernel: inconsistent path/weight sizes");
}

void check_chaos_args(const PathSoA& p, std::span<const double> lambda, std::span<const double> coef, int M,
                      std::span<double> out)
{
    if (M < 0 || M > kMaxChaosOrder)
        throw InvalidArgument(fmt::format("chaos order must be in [0, {}], got {}", kMaxChaosOrder, M));
    if (lambda.size() != static_cast<std::size_t>(p.np) || coef.size() != static_cast<std::size_t>((M + 1) * p.np) ||
        out.size() != static_cast<std::size_t>(M + 1))
        throw InvalidArgument("chaos kernel: inconsistent table sizes");
}

}  // namespace

Isa detect_isa()
{
#if defined(__x86_64__) || defined(__i386__)
    __builtin_cpu_init();
    if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return Isa::Avx2;
#endif
    return Isa::Scalar;
}

Isa active_isa()
{
    const int f = g_forced.load(std::memory_order_relaxed);
    if (f >= 0) return static_cast<Isa>(f);
    static const Isa chosen = [] {
        const char* env = std::getenv("SILT_KERNEL");
        if (env && std::strcmp(env, "scalar") == 0) return Isa::Scalar;
        return detect_isa();
    }();
    return chosen;
}

void force_isa(Isa isa)
{
    if (isa == Isa::Avx2 && detect_isa() != Isa::Avx2) throw InvalidArgument("AVX2/FMA not available on this CPU");
    g_forced.store(static_cast<int>(isa), std::memory_order_relaxed);
}

std::string_view isa_name(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

void heat_pair_sums(const PathSoA& path, std::span<const double> w, std::span<const double> inv2eps,
                    std::span<double> out)
{
    check_args(path, w);
    if (out.size() != inv2eps.size()) throw InvalidArgument("heat kernel: output size must match eps count");
    if (active_isa() == Isa::Avx2)
        avx2::heat_pair_sums(path, w, inv2eps, out);
    else
        scalar::heat_pair_sums(path, w, inv2eps, out);
}

void chaos_pair_sums(const PathSoA& path, std::span<const double> w, std::span<const double> lambda,
                     std::span<const double> coef, int M, std::span<double> out)
{
    check_args(path, w);
    check_chaos_args(path, lambda, coef, M, out);
    if (active_isa() == Isa::Avx2)
        avx2::chaos_pair_sums(path, w, lambda, coef, M, out);
    else
        scalar::chaos_pair_sums(path, w, lambda, coef, M, out);
}

namespace scalar {

void heat_pair_sums(const PathSoA& p, std::span<const double> w, std::span<const double> inv2eps,
                    std::span<double> out)
{
    const std::size_t ne = inv2eps.size();
    std::vector<double> total(ne, 0.0), row(ne);
    for (std::int64_t i = 0; i + 1 < p.np; ++i) {
        std::fill(row.begin(), row.end(), 0.0);
        for (std::int64_t j = i + 1; j < p.np; ++j) {
            double r2 = 0.0;
            for (int c = 0; c < p.d; ++c) {
                const double dx = p.x[c * p.np + j] - p.x[c * p.np + i];
                r2 += dx * dx;
            }
            for (std::size_t e = 0; e < ne; ++e) row[e] += w[j] * std::exp(-r2 * inv2eps[e]);
        }
        for (std::size_t e = 0; e < ne; ++e) total[e] += w[i] * row[e];
    }
    std::copy(total.begin(), total.end(), out.begin());
}

void chaos_pair_sums(const PathSoA& p, std::span<const double> w, std::span<const double> lambda,
                     std::span<const double> coef, int M, std::span<double> out)
{
    // inv_norm[j] = 1 / (2^j j!)
    double inv_norm[kMaxChaosOrder + 1];
    inv_norm[0] = 1.0;
    for (int j = 1; j <= M; ++j) inv_norm[j] = inv_norm[j - 1] / (2.0 * j);

    std::vector<double> total(M + 1, 0.0), row(M + 1);
    double h[2 * kMaxChaosOrder + 1], poly[kMaxChaosOrder + 1], next[kMaxChaosOrder + 1];
    for (std::int64_t i = 0; i + 1 < p.np; ++i) {
        std::fill(row.begin(), row.end(), 0.0);
        for (std::int64_t j = i + 1; j < p.np; ++j) {
            const std::int64_t L = j - i;
            const double lam = lambda[L];
            for (int m = 0; m <= M; ++m) poly[m] = m == 0 ? 1.0 : 0.0;
            for (int c = 0; c < p.d; ++c) {
                const double x = p.x[c * p.np + j] - p.x[c * p.np + i];
                h[0] = 1.0;
                if (M > 0) h[1] = x;
                for (int n = 1; n < 2 * M; ++n) h[n + 1] = x * h[n] - n * lam * h[n - 1];
                for (int m = 0; m <= M; ++m) {
                    double s = 0.0;
                    for (int q = 0; q <= m; ++q) s += poly[m - q] * (h[2 * q] * inv_norm[q]);
                    next[m] = s;
                }
                std::copy(next, next + M + 1, poly);
            }
            for (int m = 0; m <= M; ++m) {
                const double q = (m % 2 ? -1.0 : 1.0) * poly[m];
                row[m] += w[j] * (coef[m * p.np + L] * q);
            }
        }
        for (int m = 0; m <= M; ++m) total[m] += w[i] * row[m];
    }
    std::copy(total.begin(), total.end(), out.begin());
}

}  // namespace scalar

}  // namespace silt::kernels
