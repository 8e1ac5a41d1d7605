#include <doctest.h>

#include <cmath>
#include <vector>

#include "silt/rng.hpp"
#include "silt/stats.hpp"

using namespace silt;

TEST_CASE("moments of a known sample")
{
    const std::vector<double> x{1, 2, 3, 4, 10};
    const auto m = stats::moments(x);
    CHECK(m.mean == doctest::Approx(4.0));
    CHECK(m.variance == doctest::Approx(12.5));
    // central moments: m2 = 10, m3 = 36, m4 = 1394/5
    CHECK(m.skewness == doctest::Approx(36.0 / std::pow(10.0, 1.5)));
    CHECK(m.kurtosis == doctest::Approx(278.8 / 100.0));
}

TEST_CASE("normal samples look normal")
{
    Xoshiro256 g(3);
    std::vector<double> x(20000), y(20000);
    for (auto& v : x) v = g.normal();
    for (auto& v : y) v = g.normal();
    const auto m = stats::moments(x);
    CHECK(std::fabs(m.mean) < 4 * m.mean_se);
    CHECK(std::fabs(m.variance - 1) < 4 * m.variance_se);
    CHECK(std::fabs(m.skewness) < 4 * m.skewness_se);
    CHECK(std::fabs(m.kurtosis - 3) < 4 * m.kurtosis_se);
    CHECK(stats::ks_one_sample(x, normal_cdf).p_value > 0.01);
    CHECK(stats::ks_two_sample(x, y).p_value > 0.01);

    for (auto& v : y) v = 1.1 * v + 0.05;
    CHECK(stats::ks_one_sample(y, normal_cdf).p_value < 1e-4);

    const auto [c, se] = stats::covariance(x, y);
    CHECK(std::fabs(c) < 4 * se);
}

TEST_CASE("Kolmogorov survival function")
{
    CHECK(stats::kolmogorov_survival(0.0) == 1.0);
    // Tabulated critical values: P(K > 1.3581) = 0.05, P(K > 1.6276) = 0.01.
    CHECK(stats::kolmogorov_survival(1.3581) == doctest::Approx(0.05).epsilon(1e-3));
    CHECK(stats::kolmogorov_survival(1.6276) == doctest::Approx(0.01).epsilon(1e-3));
    CHECK(stats::kolmogorov_survival(1.17) == doctest::Approx(stats::kolmogorov_survival(1.1801)).epsilon(2e-2));
}

TEST_CASE("QQ and slope")
{
    const std::vector<double> x{3, 1, 2};
    const auto qq = stats::normal_qq(x, 0, 1);
    CHECK(qq[0].empirical == 1);
    CHECK(qq[1].theoretical == doctest::Approx(0.0).scale(1));
    CHECK(qq[2].theoretical == doctest::Approx(-qq[0].theoretical));

    const std::vector<double> lx{0, 1, 2, 3}, ly{1, 3, 5, 7};
    const auto [s, se] = stats::ols_slope(lx, ly);
    CHECK(s == doctest::Approx(2.0));
    CHECK(se == doctest::Approx(0.0).scale(1));
}
