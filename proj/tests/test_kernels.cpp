#include <doctest.h>

#include <cmath>
#include <vector>

#include "silt/kernels.hpp"
#include "silt/rng.hpp"

using namespace silt;
using namespace silt::kernels;

namespace {

struct Fixture {
    std::int64_t np;
    int d;
    std::vector<double> x, w, lambda, coef;
    int M;

    Fixture(std::int64_t np_, int d_, int M_, std::uint64_t seed) : np(np_), d(d_), M(M_)
    {
        Xoshiro256 g(seed);
        x.resize(np * d);
        for (auto& v : x) v = 0.3 * g.normal();
        w.resize(np);
        for (auto& v : w) v = 0.5 + g.uniform_open();
        lambda.resize(np);
        for (std::int64_t L = 0; L < np; ++L) lambda[L] = std::pow(0.01 * L, 0.8);
        coef.resize((M + 1) * np);
        for (auto& v : coef) v = g.uniform_open();
    }
    PathSoA path() const { return {x, np, d}; }
};

// Probabilists' Hermite by the textbook recurrence.
double he(int n, double x)
{
    double a = 1, b = x;
    if (n == 0) return a;
    for (int k = 1; k < n; ++k) {
        const double c = x * b - k * a;
        a = b;
        b = c;
    }
    return b;
}

double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

// Q_m for d = 2 by explicit enumeration of (m1, m2) with m1 + m2 = m.
double q_direct(int m, double x1, double x2, double lam)
{
    double s = 0;
    for (int m1 = 0; m1 <= m; ++m1) {
        const int m2 = m - m1;
        const double r = std::sqrt(lam);
        const double t1 = std::pow(lam, m1) * he(2 * m1, x1 / r) / (std::pow(2.0, m1) * factorial(m1));
        const double t2 = std::pow(lam, m2) * he(2 * m2, x2 / r) / (std::pow(2.0, m2) * factorial(m2));
        s += t1 * t2;
    }
    return (m % 2 ? -1.0 : 1.0) * s;
}

}  // namespace

TEST_CASE("scalar heat kernel matches a brute-force double loop")
{
    Fixture f(23, 3, 0, 1);
    const std::vector<double> inv2eps{0.5 / 0.05, 0.5 / 0.2};
    std::vector<double> out(2);
    scalar::heat_pair_sums(f.path(), f.w, inv2eps, out);
    for (int e = 0; e < 2; ++e) {
        double ref = 0;
        for (int i = 0; i < f.np; ++i)
            for (int j = i + 1; j < f.np; ++j) {
                double r2 = 0;
                for (int c = 0; c < f.d; ++c) r2 += std::pow(f.x[c * f.np + j] - f.x[c * f.np + i], 2);
                ref += f.w[i] * f.w[j] * std::exp(-r2 * inv2eps[e]);
            }
        CHECK(out[e] == doctest::Approx(ref).epsilon(1e-13));
    }
}

TEST_CASE("scalar chaos kernel matches explicit Hermite enumeration")
{
    Fixture f(17, 2, 6, 2);
    std::vector<double> out(f.M + 1);
    scalar::chaos_pair_sums(f.path(), f.w, f.lambda, f.coef, f.M, out);
    for (int m = 0; m <= f.M; ++m) {
        double ref = 0;
        for (int i = 0; i < f.np; ++i)
            for (int j = i + 1; j < f.np; ++j) {
                const int L = j - i;
                ref += f.w[i] * f.w[j] * f.coef[m * f.np + L] *
                       q_direct(m, f.x[j] - f.x[i], f.x[f.np + j] - f.x[f.np + i], f.lambda[L]);
            }
        CHECK(out[m] == doctest::Approx(ref).epsilon(1e-11));
    }
}

TEST_CASE("AVX2 kernels agree with the scalar reference")
{
    if (detect_isa() != Isa::Avx2) {
        MESSAGE("AVX2/FMA unavailable; equivalence not exercised on this CPU");
        return;
    }
    for (std::int64_t np : {1, 2, 3, 4, 5, 7, 8, 9, 33, 257}) {
        for (int d : {2, 3, 5}) {
            Fixture f(np, d, 6, 100 + np * 7 + d);
            const std::vector<double> inv2eps{0.5 / 0.001, 0.5 / 0.02, 0.5 / 0.08, 0.5 / 1.0, 0.5 / 3.0,
                                              0.5 / 0.3,   0.5 / 0.03, 0.5 / 0.7,  0.5 / 0.004};
            std::vector<double> a(inv2eps.size()), b(inv2eps.size());
            scalar::heat_pair_sums(f.path(), f.w, inv2eps, a);
            avx2::heat_pair_sums(f.path(), f.w, inv2eps, b);
            for (std::size_t e = 0; e < a.size(); ++e)
                CHECK(b[e] == doctest::Approx(a[e]).epsilon(1e-13).scale(1e-300));

            for (int M : {0, 1, 2, 6}) {
                std::vector<double> ca(M + 1), cb(M + 1);
                std::vector<double> coef(f.coef.begin(), f.coef.begin() + (M + 1) * np);
                scalar::chaos_pair_sums(f.path(), f.w, f.lambda, coef, M, ca);
                avx2::chaos_pair_sums(f.path(), f.w, f.lambda, coef, M, cb);
                // Chaos terms cancel between pairs; compare against the
                // magnitude of the summed absolute contributions.
                double scale = 0;
                for (double v : ca) scale = std::max(scale, std::fabs(v));
                for (int m = 0; m <= M; ++m) CHECK(std::fabs(ca[m] - cb[m]) <= 1e-11 * (scale + 1e-300));
            }
        }
    }
}

TEST_CASE("AVX2 exp covers the full input range")
{
    if (detect_isa() != Isa::Avx2) return;
    // One pair, unit weights: the kernel returns exp(-r2 * inv2eps) exactly.
    const std::vector<double> x{0.0, 1.0, 0.0, 0.0};
    const std::vector<double> w{1.0, 1.0};
    for (double a = 0.0; a < 800.0; a += 0.37) {
        const std::vector<double> inv{a};
        std::vector<double> s(1), v(1);
        scalar::heat_pair_sums({x, 2, 2}, w, inv, s);
        avx2::heat_pair_sums({x, 2, 2}, w, inv, v);
        if (a <= 708.0)
            CHECK(v[0] == doctest::Approx(s[0]).epsilon(4e-16).scale(1e-300));
        else
            CHECK(v[0] <= 1e-307);
    }
}

TEST_CASE("dispatch")
{
    const Isa before = active_isa();
    force_isa(Isa::Scalar);
    CHECK(active_isa() == Isa::Scalar);
    force_isa(before);
    CHECK(isa_name(Isa::Avx2) == "avx2");
}
