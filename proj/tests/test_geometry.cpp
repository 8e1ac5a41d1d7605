#include <doctest.h>

#include <cmath>

#include "silt/error.hpp"
#include "silt/geometry.hpp"
#include "geometry_checks.hpp"

using namespace silt;
using namespace silt::geometry;

TEST_CASE("pow2h")
{
    CHECK(pow2h(0.0, 0.3) == 0.0);
    CHECK(pow2h(-4.0, 0.5) == doctest::Approx(4.0).epsilon(1e-15));
    CHECK(pow2h(2.0, 0.7) == doctest::Approx(std::pow(2.0, 1.4)).epsilon(1e-15));
}

TEST_CASE("lambda_rho_mu examples")
{
    const auto bm = lambda_rho_mu(0.5, {0, 2, 1, 3});
    CHECK(bm.lambda == doctest::Approx(2.0));
    CHECK(bm.rho == doctest::Approx(2.0));
    CHECK(bm.mu == doctest::Approx(1.0));

    const auto same = lambda_rho_mu(0.7, {0.2, 0.9, 0.2, 0.9});
    const double v = std::pow(0.7, 1.4);
    CHECK(same.lambda == doctest::Approx(v).epsilon(1e-14));
    CHECK(same.rho == doctest::Approx(v).epsilon(1e-14));
    CHECK(same.mu == doctest::Approx(v).epsilon(1e-14));

    CHECK(std::fabs(lambda_rho_mu(0.5, {0.1, 0.3, 0.6, 0.95}).mu) < 1e-15);
}

TEST_CASE("region_decompose patterns and ties")
{
    const auto r1 = region_decompose({0, 2, 1, 3});
    CHECK(r1.region == 1);
    CHECK(r1.a == 1.0);
    CHECK(r1.b == 1.0);
    CHECK(r1.c == 1.0);
    const auto r2 = region_decompose({0, 3, 1, 2});
    CHECK(r2.region == 2);
    CHECK(r2.a == 1.0);
    CHECK(r2.b == 1.0);
    CHECK(r2.c == 1.0);
    const auto r3 = region_decompose({0, 1, 2, 3});
    CHECK(r3.region == 3);
    CHECK(r3.a == 1.0);
    CHECK(r3.b == 1.0);
    CHECK(r3.c == 1.0);

    CHECK(region_decompose({0, 1, 1, 2}).region == 1);  // s' == t
    CHECK(region_decompose({0, 2, 1, 2}).region == 1);  // t == t'
    CHECK_THROWS_AS(region_decompose({1, 2, 0, 3}), InvalidArgument);
    CHECK_THROWS_AS(region_decompose({0, 0, 1, 2}), InvalidArgument);
}

TEST_CASE("region_lrm examples")
{
    const auto g1 = region_lrm(0.5, {1, 1, 1, 1});
    CHECK(g1.lambda == doctest::Approx(2.0));
    CHECK(g1.rho == doctest::Approx(2.0));
    CHECK(g1.mu == doctest::Approx(1.0));
    CHECK(std::fabs(region_lrm(0.5, {3, 0.3, 1.7, 0.2}).mu) < 1e-15);
    CHECK(region_lrm(0.7, {2, 1, 1, 1}).mu == doctest::Approx(std::pow(2.0, 1.4) - 1.0).epsilon(1e-14));
    CHECK(region_lrm(0.7, {2, 1, 1, 1}).mu == doctest::Approx(1.63901).epsilon(1e-5));
    CHECK_THROWS_AS(region_lrm(0.5, {4, 1, 1, 1}), InvalidArgument);
    CHECK_THROWS_AS(region_lrm(0.5, {1, -1, 1, 1}), InvalidArgument);
}

TEST_CASE("delta_theta examples")
{
    const auto p = delta_theta(0.5, 2, {1, 1, 1, 1}, false);
    CHECK(p.delta == doctest::Approx(3.0));
    CHECK(p.theta == doctest::Approx(1.0 / 12.0).epsilon(1e-14));

    const auto h = delta_theta(0.5, 2, {1, 1, 1, 1}, true);
    CHECK(h.delta == doctest::Approx(8.0));
    CHECK(h.theta == doctest::Approx(1.0 / 72.0).epsilon(1e-14));

    CHECK(std::fabs(delta_theta(0.5, 3, {3, 0.4, 0.1, 2.0}, false).theta) < 1e-16);

    // b = c = 0 in region 2 makes the second interval a point: rho = b^{2H} = 0.
    CHECK_THROWS_AS(delta_theta(0.6, 3, {2, 1.0, 0.0, 0.0}, false), InvalidArgument);
    CHECK(delta_theta(0.6, 3, {2, 1.0, 0.0, 0.0}, true).delta > 0.0);
}

TEST_CASE("theta_from matches the naive difference away from cancellation")
{
    const double l = 1.3, r = 0.7, m = 0.5;
    const double naive = std::pow(l * r - m * m, -1.5) - std::pow(l * r, -1.5);
    CHECK(theta_from(l, r, m, 3) == doctest::Approx(naive).epsilon(1e-13));
    // Tiny gamma: the naive form loses all digits, the stable one keeps the
    // leading term (d/2) gamma (lambda rho)^{-d/2}.
    const double tiny = 1e-9;
    CHECK(theta_from(1.0, 1.0, tiny, 2) == doctest::Approx(tiny * tiny).epsilon(1e-12));
}

TEST_CASE("k1 and k2")
{
    CHECK(std::fabs(k2(0.5, 1.0, 2.0)) < 1e-15);
    CHECK(k2(0.7, 1.0, 0.5) == doctest::Approx(std::pow(1.5, 1.4) - std::pow(0.5, 1.4)).epsilon(1e-14));
    CHECK(k2(0.7, 1.0, 0.5) == doctest::Approx(1.38518).epsilon(1e-5));

    // k1 is twice the covariance of increments over [0,x] and [z,z+y].
    Xoshiro256 g(7);
    for (int i = 0; i < 1000; ++i) {
        const double H = g.uniform_open(), x = 2 * g.uniform_open(), y = 2 * g.uniform_open(),
                     z = 2 * g.uniform_open();
        const double mu = lambda_rho_mu(H, {0.0, x, z, z + y}).mu;
        CHECK(k1(H, x, y, z) == doctest::Approx(2.0 * mu).epsilon(1e-12).scale(1.0));
    }
}

TEST_CASE("psi_m")
{
    // H = 1/2, (1,1,1): region 1 has (lambda, rho) = (2, 2), region 2 has
    // (1, 3), both with mu = 1; region 3 vanishes.
    for (int d = 2; d <= 4; ++d) {
        const double e = -0.5 * d - 1.0;
        CHECK(psi_m(0.5, d, 1, 1, 1, 1) == doctest::Approx(std::pow(9.0, e) + std::pow(8.0, e)).epsilon(1e-14));
    }
    Xoshiro256 g(11);
    for (int i = 0; i < 200; ++i) {
        const double a = 3 * g.uniform_open(), b = 3 * g.uniform_open(), c = 3 * g.uniform_open();
        const double H = g.uniform_open();
        for (int m = 1; m <= 4; ++m) CHECK(psi_m(H, 3, m, a, b, c) >= 0.0);
        CHECK(psi_m(0.5, 3, 2, a, b, c) == doctest::Approx(psi_m(0.5, 3, 2, c, b, a)).epsilon(1e-13));
    }
    CHECK_THROWS_AS(psi_m(0.5, 3, 0, 1, 1, 1), InvalidArgument);
}

TEST_CASE("property scans")
{
    using namespace silt::test;
    constexpr long n = 100000;
    CHECK(scan_consistency(n, 1).violations == 0);
    CHECK(scan_cauchy_schwarz(n, 2).violations == 0);
    CHECK(scan_amgm(n, 3).violations == 0);
    CHECK(scan_k2_taylor_bound(n, 4).violations == 0);
    CHECK(scan_theta3_half(n, 5).violations == 0);
    CHECK(scan_delta_positive(n, 6).violations == 0);
    CHECK(scan_k2_product_bound(n, 7, K2Domain::AGeX).violations == 0);
    for (double H : {0.55, 0.6, 0.7, 0.74}) CHECK(mu3_ratio_infimum(H) > 0.0);
}

TEST_CASE("product bound on k2 does not extend to a < x")
{
    // Counterexample: H = 0.9, x = 1, a = 0.5 gives |k2| = 1.5^{1.8} - 0.5^{1.8}
    // ~ 1.7968 > 2 (0.5)^{0.9} ~ 1.0718.
    CHECK(std::fabs(k2(0.9, 1.0, 0.5)) > 2.0 * std::pow(0.5, 0.9));
    CHECK(silt::test::scan_k2_product_bound(10000, 8, silt::test::K2Domain::All).violations > 0);
}

TEST_CASE("stable 1 - gamma against a 60-digit reference")
{
    struct Row {
        double H;
        int region;
        double a, b, c, omg;
    };
    // Reference values computed with mpmath at 60 digits from the defining formulas.
    const Row rows[] = {
        {0.5, 1, 1e-09, 1, 3e-09, 3.9999999870000000823e-9},
        {0.6, 1, 1e-12, 0.7, 2e-11, 2.28499348485616397e-13},
        {0.3, 2, 1e-10, 1, 1e-07, 0.000064094705456588472089},
        {0.7, 2, 1e-14, 1, 1e-14, 5.0237728490191042648e-20},
        {0.6, 1, 0.2, 1, 0.3, 0.2604101085415452827},
        {0.6, 2, 0.1, 0.5, 0.2, 0.27093708138890229382},
        {0.45, 3, 0.3, 0.2, 0.5, 0.9990405254589226573},
    };
    for (const auto& r : rows) {
        const auto g = stable_lrm(r.H, {r.region, r.a, r.b, r.c});
        CHECK(g.one_minus_gamma == doctest::Approx(r.omg).epsilon(1e-12));
    }
    // Agrees with the direct form where there is no cancellation.
    Xoshiro256 g(31);
    for (int i = 0; i < 10000; ++i) {
        const RegionCoords rc{1 + static_cast<int>(g() % 3), g.uniform_open(), g.uniform_open(), g.uniform_open()};
        const double H = 0.05 + 0.7 * g.uniform_open();
        const auto v = region_lrm(H, rc);
        const double direct = (v.lambda * v.rho - v.mu * v.mu) / (v.lambda * v.rho);
        if (direct < 1e-3) continue;
        CHECK(stable_lrm(H, rc).one_minus_gamma == doctest::Approx(direct).epsilon(1e-11));
        CHECK_MESSAGE(theta_stable(H, 3, rc) == doctest::Approx(delta_theta(H, 3, rc, false).theta).epsilon(1e-10), "region ", rc.region);
    }
}

TEST_CASE("kernel values keep full precision far from the diagonal")
{
    // 80-digit references from the defining sums.
    CHECK(k1(0.6, 1, 1, 1e8) == doctest::Approx(9.554572093283923842e-8).epsilon(1e-12));
    CHECK(k1(0.7, 2, 0.5, 1e12) == doctest::Approx(3.5333611290906625293e-8).epsilon(1e-12));
    CHECK(k1(0.3, 1e-9, 2e-9, 1.0) == doctest::Approx(-4.7999999966400006921e-19).epsilon(1e-12));
    CHECK(k1(0.6, 3, 1e-12, 1) == doctest::Approx(2.5784380259964928965e-12).epsilon(1e-12));

    CHECK(region_lrm(0.6, {3, 1e-10, 1, 2e-10}).mu == doctest::Approx(2.3999999997119995532e-21).epsilon(1e-12));
    CHECK(region_lrm(0.4, {3, 1e-6, 0.5, 0.3}).mu == doctest::Approx(-4.1223481348461305165e-8).epsilon(1e-12));
    CHECK(region_lrm(0.6, {2, 0.3, 1e-12, 0.4}).mu == doctest::Approx(9.7113377579937962857e-13).epsilon(1e-12));
    CHECK(region_lrm(0.7, {1, 0.2, 1e-13, 0.5}).mu == doctest::Approx(0.061468930631578783795).epsilon(1e-12));
    CHECK(region_lrm(0.6, {3, 0.4, 1e-9, 1e-7}).mu == doctest::Approx(4.7946672077862188589e-8).epsilon(1e-12));
    CHECK(region_lrm(0.5, {3, 1e-9, 0.3, 0.7}).mu == 0.0);
}
