#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>

#include "silt/chaos.hpp"
#include "silt/error.hpp"
#include "silt/mc.hpp"
#include "silt/parallel.hpp"

using namespace silt;

namespace {

mc::McConfig l2_config()
{
    mc::McConfig c;
    c.experiment = mc::Experiment::L2;
    c.H = Hurst(2, 5);
    c.d = 2;
    c.n = 128;
    c.eps = {0.2, 0.1, 0.05};
    c.paths = 400;
    c.seed = 11;
    return c;
}

}  // namespace

TEST_CASE("covariance of I_eps across two smoothing scales")
{
    const auto v = chaos::variance_ie(0.4, 2, 0.1, 1.0);
    const auto c = chaos::covariance_ie(0.4, 2, 0.1, 0.1, 1.0);
    CHECK(c.value == doctest::Approx(v.value).epsilon(1e-10));
    const auto c12 = chaos::covariance_ie(0.4, 2, 0.1, 0.05, 1.0);
    const auto c21 = chaos::covariance_ie(0.4, 2, 0.05, 0.1, 1.0);
    CHECK(c12.value == doctest::Approx(c21.value).epsilon(1e-12));
    const auto v2 = chaos::variance_ie(0.4, 2, 0.05, 1.0);
    CHECK(c12.value > 0.0);
    CHECK(c12.value * c12.value <= v.value * v2.value);
    CHECK(v.value + v2.value - 2.0 * c12.value > 0.0);
}

TEST_CASE("config validation")
{
    auto c = l2_config();
    CHECK_NOTHROW(c.validate());
    c.paths = 99;
    CHECK_THROWS_AS(c.validate(), InvalidArgument);
    c = l2_config();
    c.eps = {0.001};
    CHECK_THROWS_AS(c.validate(), InvalidArgument);
    c.allow_under_resolved = true;
    CHECK_NOTHROW(c.validate());
    c.eps = {};
    CHECK_THROWS_AS(c.validate(), InvalidArgument);
    CHECK(mc::parse_experiment("mc-clt") == mc::Experiment::Clt);
    CHECK_THROWS_AS(mc::parse_experiment("clt2"), InvalidArgument);

    c = l2_config();
    c.experiment = mc::Experiment::Clt;
    try {
        mc::run(c);
        FAIL("expected a regime error");
    } catch (const InvalidArgument& e) {
        CHECK(std::string(e.what()).find("window is empty") != std::string::npos);
    }
    c = l2_config();
    c.H = Hurst(3, 5);
    c.d = 3;
    CHECK_THROWS_AS(mc::run(c), InvalidArgument);
}

TEST_CASE("L2 experiment")
{
    const auto rep = mc::run(l2_config());
    REQUIRE(rep.per_eps.size() == 3);
    for (const auto& s : rep.per_eps) {
        // Exact centering: the mean is pure MC noise.
        CHECK(std::abs(s.centered.mean) < 4.0 * s.centered.mean_se);
        // Discrete estimator against the continuous finite-eps variance.
        CHECK(std::abs(s.centered.variance / s.finite_reference - 1.0) < 0.15);
    }
    REQUIRE(rep.cauchy.size() == 2);
    for (const auto& c : rep.cauchy) CHECK(std::abs(c.rel_error()) < 0.15);
    REQUIRE(rep.limit);
    CHECK(rep.limit->reference == doctest::Approx(0.518166778465 / (4.0 * M_PI * M_PI)).epsilon(1e-6));
}

TEST_CASE("planar Brownian motion: log-renormalized mean is stable")
{
    mc::McConfig c;
    c.experiment = mc::Experiment::L2;
    c.H = Hurst(1, 2);
    c.d = 2;
    c.n = 1024;
    c.eps = {0.02, 0.01, 0.005};
    c.paths = 400;
    c.seed = 3;
    const auto rep = mc::run(c);
    CHECK(rep.regime == "LogRenorm");
    for (std::size_t k = 0; k + 1 < rep.per_eps.size(); ++k) {
        const auto& a = *rep.per_eps[k].renormalized;
        const auto& b = *rep.per_eps[k + 1].renormalized;
        CHECK(std::abs(a.mean - b.mean) < 3.0 * (a.mean_se + b.mean_se));
    }
}

TEST_CASE("reports do not depend on the thread count")
{
    auto c = l2_config();
    c.paths = 120;
    set_thread_count(1);
    const auto a = mc::report_json(mc::run(c)).dump();
    set_thread_count(3);
    const auto b = mc::report_json(mc::run(c)).dump();
    set_thread_count(1);
    CHECK(a == b);
    c.seed += 1;
    CHECK(mc::report_json(mc::run(c)).dump() != a);
}

TEST_CASE("CLT experiment, power scaling")
{
    mc::McConfig c;
    c.experiment = mc::Experiment::Clt;
    c.H = Hurst(3, 5);
    c.d = 3;
    c.n = 128;
    c.eps = {0.2, 0.1};
    c.paths = 300;
    c.seed = 5;
    const auto rep = mc::run(c);
    REQUIRE(rep.limit);
    CHECK(rep.limit->reference == doctest::Approx(0.0396907094772).epsilon(1e-5));
    for (const auto& s : rep.per_eps) {
        CHECK(std::abs(s.statistic.mean) < 4.0 * s.statistic.mean_se);
        CHECK(std::abs(s.statistic.variance - s.finite_reference) < 4.0 * s.statistic.variance_se + s.finite_reference_err);
    }
    REQUIRE(rep.ks);
    REQUIRE(rep.slope);
    CHECK(rep.slope->target == doctest::Approx(-0.5));
    CHECK(rep.qq.size() == 300);

    std::ostringstream qq, tr;
    mc::write_qq_csv(qq, rep);
    mc::write_variance_trace_csv(tr, rep);
    const auto j = mc::report_json(rep);
    CHECK(j["config"]["seed"] == 5);
    CHECK(j["config"]["H"] == "3/5");
    CHECK(!j.contains("wall_seconds"));
    CHECK(mc::report_json(rep, true).contains("wall_seconds"));
    CHECK(qq.str().rfind("# {", 0) == 0);
    CHECK(qq.str().find("\nq_theoretical,q_empirical\n") != std::string::npos);
    CHECK(tr.str().find("\neps,var,var_stderr,reference\n") != std::string::npos);
    CHECK(tr.str().find("\"seed\":5") != std::string::npos);
}

TEST_CASE("chaos check")
{
    mc::McConfig c;
    c.experiment = mc::Experiment::ChaosCheck;
    c.H = Hurst(2, 5);
    c.d = 2;
    c.n = 64;
    c.eps = {0.1};
    c.paths = 1000;
    c.seed = 9;
    c.chaos_orders = 3;
    const auto rep = mc::run(c);
    for (const auto& cmp : rep.comparisons) {
        if (cmp.name == "chaos 1 variance" || cmp.name == "chaos 2 variance")
            CHECK(std::abs(cmp.rel_error()) < 0.2);
        if (cmp.name.find("mean") != std::string::npos || cmp.name.find("covariance") != std::string::npos)
            CHECK(std::abs(cmp.mc) < 4.0 * cmp.mc_se);
        if (cmp.name.rfind("sum of chaos", 0) == 0) CHECK(cmp.mc <= cmp.reference + 3.0 * cmp.reference_err);
    }
}
