#include "silt/mc.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "silt/chaos.hpp"
#include "silt/error.hpp"
#include "silt/fbm.hpp"
#include "silt/kernels.hpp"
#include "silt/limits.hpp"
#include "silt/parallel.hpp"
#include "silt/rng.hpp"
#include "silt/silt.hpp"

namespace silt::mc {

namespace {

using Clock = std::chrono::steady_clock;
using Json = nlohmann::json;

GridSpec grid_of(const McConfig& cfg) { return {cfg.n, cfg.T, cfg.d}; }

/// Per-path values, one row per eps: values[e * paths + p].
struct PathTable {
    std::vector<double> values;
    std::int64_t paths = 0;
    std::span<const double> row(std::size_t e) const
    {
        return std::span<const double>(values).subspan(e * paths, paths);
    }
};

/// estimate_ie for every eps on every path.
PathTable simulate_ladder(const McConfig& cfg, std::string& sampler_method)
{
    const GridSpec grid = grid_of(cfg);
    const CirculantSampler sampler(cfg.H.value(), grid);
    sampler_method = sampler.fell_back() ? "cholesky (circulant fallback)" : "circulant";
    const auto w = trapezoid_weights(grid);
    const std::size_t ne = cfg.eps.size();
    PathTable t{std::vector<double>(ne * cfg.paths), cfg.paths};
    parallel_for(static_cast<std::size_t>(cfg.paths), [&](std::size_t p) {
        std::vector<double> rows((grid.n + 1) * grid.d), soa, out(ne);
        sampler.sample_into(derive_seed(cfg.seed, p), rows);
        to_soa(rows, grid.n + 1, grid.d, soa);
        estimate_ie_soa({soa, grid.n + 1, grid.d}, grid.dt(), w, cfg.eps, out);
        for (std::size_t e = 0; e < ne; ++e) t.values[e * cfg.paths + p] = out[e];
    });
    return t;
}

std::vector<double> shifted(std::span<const double> x, double shift, double scale)
{
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = scale * (x[i] - shift);
    return y;
}

McReport base_report(const McConfig& cfg, const Regime& r)
{
    McReport rep;
    rep.config = cfg;
    rep.regime = std::string(r.name());
    rep.scaling = r.scaling();
    rep.kernel_isa = std::string(kernels::isa_name(kernels::active_isa()));
    return rep;
}

double elapsed(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

Json moments_json(const stats::Moments& m)
{
    return {{"n", m.n},
            {"mean", m.mean},
            {"mean_se", m.mean_se},
            {"variance", m.variance},
            {"variance_se", m.variance_se},
            {"skewness", m.skewness},
            {"skewness_se", m.skewness_se},
            {"kurtosis", m.kurtosis},
            {"kurtosis_se", m.kurtosis_se}};
}

Json comparison_json(const Comparison& c)
{
    return {{"name", c.name},
            {"mc", c.mc},
            {"mc_se", c.mc_se},
            {"reference", c.reference},
            {"reference_err", c.reference_err},
            {"rel_error", c.rel_error()}};
}

void config_comment(std::ostream& os, const McReport& rep, const Json& config)
{
    os << "# " << (config.is_null() ? config_json(rep.config) : config).dump() << '\n';
}

}  // namespace

std::string experiment_name(Experiment e)
{
    switch (e) {
    case Experiment::Clt: return "clt";
    case Experiment::L2: return "l2";
    case Experiment::ChaosCheck: return "chaos-check";
    }
    return "?";
}

Experiment parse_experiment(const std::string& name)
{
    if (name == "clt" || name == "mc-clt") return Experiment::Clt;
    if (name == "l2" || name == "mc-l2") return Experiment::L2;
    if (name == "chaos-check") return Experiment::ChaosCheck;
    throw InvalidArgument(fmt::format("unknown experiment '{}' (expected clt, l2 or chaos-check)", name));
}

void McConfig::validate() const
{
    const GridSpec grid = grid_of(*this);
    grid.validate();
    if (paths < 100) throw InvalidArgument(fmt::format("paths must be at least 100 (got {})", paths));
    if (eps.empty()) throw InvalidArgument("at least one eps is required");
    for (double e : eps) {
        if (!(e > 0.0)) throw InvalidArgument("eps must be positive");
        if (!allow_under_resolved) check_eps_resolution(grid, H.value(), e);
    }
    if (experiment == Experiment::ChaosCheck && (chaos_orders < 1 || chaos_orders > kernels::kMaxChaosOrder))
        throw InvalidArgument(fmt::format("chaos orders must be in [1, {}]", kernels::kMaxChaosOrder));
    if (!(tol > 0.0)) throw InvalidArgument("tol must be positive");
}

McReport run_clt(const McConfig& cfg)
{
    const auto t0 = Clock::now();
    cfg.validate();
    const Regime r = classify(cfg.H, cfg.d);
    if (!r.is_clt()) {
        std::string why = fmt::format("CLT experiments need 3/(2d) <= H < 3/4; (H = {}, d = {}) is {} ({})",
                                      cfg.H.to_string(), cfg.d, r.name(), r.condition());
        if (cfg.d == 2) why += "; for d = 2 the window is empty since 3/(2d) = 3/4";
        throw InvalidArgument(why);
    }
    McReport rep = base_report(cfg, r);
    const auto sigma2 = limits::sigma2(cfg.H, cfg.d, cfg.tol);
    const double ref = cfg.T * limits::value_or_throw(sigma2, "sigma^2");
    const double ref_err = cfg.T * sigma2.err_estimate;

    const PathTable table = simulate_ladder(cfg, rep.sampler);
    const GridSpec grid = grid_of(cfg);
    std::vector<double> terminal_stat;
    for (std::size_t e = 0; e < cfg.eps.size(); ++e) {
        const double eps = cfg.eps[e], scale = scaling_r(r, eps);
        const auto centered = shifted(table.row(e), discrete_mean_ie(grid, cfg.H.value(), eps), 1.0);
        const auto stat = shifted(centered, 0.0, scale);
        EpsSummary s;
        s.eps = eps;
        s.centered = stats::moments(centered);
        s.statistic = stats::moments(stat);
        const auto fin = chaos::variance_ie(cfg.H.value(), cfg.d, eps, cfg.T, cfg.tol);
        s.finite_reference = scale * scale * fin.value;
        s.finite_reference_err = scale * scale * fin.err_estimate;
        rep.comparisons.push_back({fmt::format("variance at eps={} vs T sigma^2", eps), s.statistic.variance,
                                   s.statistic.variance_se, ref, ref_err});
        rep.comparisons.push_back({fmt::format("variance at eps={} vs exact finite-eps variance", eps),
                                   s.statistic.variance, s.statistic.variance_se, s.finite_reference,
                                   s.finite_reference_err});
        rep.per_eps.push_back(s);
        if (e + 1 == cfg.eps.size()) terminal_stat = stat;
    }
    // Distributional diagnostics use the terminal (last) eps of the ladder.
    const auto& last = rep.per_eps.back();
    rep.limit = Comparison{"terminal variance vs T sigma^2", last.statistic.variance, last.statistic.variance_se,
                           ref, ref_err};
    const double sd = std::sqrt(ref);
    rep.ks = stats::ks_one_sample(terminal_stat, [sd](double x) { return normal_cdf(x / sd); });
    rep.qq = stats::normal_qq(terminal_stat, 0.0, ref);

    if (cfg.eps.size() >= 2) {
        std::vector<double> lx, ly;
        for (const auto& s : rep.per_eps) {
            lx.push_back(std::log(s.eps));
            ly.push_back(std::log(s.centered.variance));
        }
        const auto [slope, se] = stats::ols_slope(lx, ly);
        // Var(I_eps - E) ~ eps^{-(d - 3/(2H))} in the power case, ~ log(1/eps) in the log case.
        const double target = r.tag == RegimeTag::CltPower ? -(cfg.d - 1.5 / cfg.H.value()) : 0.0;
        rep.slope = SlopeFit{slope, se, target};
    }
    rep.wall_seconds = elapsed(t0);
    return rep;
}

McReport run_l2(const McConfig& cfg)
{
    const auto t0 = Clock::now();
    cfg.validate();
    const Regime r = classify(cfg.H, cfg.d);
    if (!r.is_l2())
        throw InvalidArgument(fmt::format("L2 experiments need H <= 1/d or 1/d < H < 3/(2d); (H = {}, d = {}) is {} ({})",
                                          cfg.H.to_string(), cfg.d, r.name(), r.condition()));
    McReport rep = base_report(cfg, r);
    const auto vlim = limits::variance_limit(cfg.H.value(), cfg.d, cfg.T, cfg.tol);
    const double ref = limits::value_or_throw(vlim, "(2 pi)^-d Xi_T");

    const PathTable table = simulate_ladder(cfg, rep.sampler);
    const GridSpec grid = grid_of(cfg);
    std::vector<std::vector<double>> centered(cfg.eps.size());
    for (std::size_t e = 0; e < cfg.eps.size(); ++e) {
        const double eps = cfg.eps[e];
        centered[e] = shifted(table.row(e), discrete_mean_ie(grid, cfg.H.value(), eps), 1.0);
        EpsSummary s;
        s.eps = eps;
        s.centered = stats::moments(centered[e]);
        s.statistic = s.centered;
        s.renormalized = stats::moments(shifted(table.row(e), renorm_subtractor(r, eps, cfg.T), 1.0));
        const auto fin = chaos::variance_ie(cfg.H.value(), cfg.d, eps, cfg.T, cfg.tol);
        s.finite_reference = fin.value;
        s.finite_reference_err = fin.err_estimate;
        rep.comparisons.push_back({fmt::format("variance at eps={} vs (2 pi)^-d Xi_T", eps), s.centered.variance,
                                   s.centered.variance_se, ref, vlim.err_estimate});
        rep.comparisons.push_back({fmt::format("variance at eps={} vs exact finite-eps variance", eps),
                                   s.centered.variance, s.centered.variance_se, fin.value, fin.err_estimate});
        rep.per_eps.push_back(s);
    }
    const auto& last = rep.per_eps.back();
    rep.limit = Comparison{"terminal variance vs (2 pi)^-d Xi_T", last.centered.variance, last.centered.variance_se,
                           ref, vlim.err_estimate};
    for (std::size_t e = 0; e + 1 < cfg.eps.size(); ++e) {
        std::vector<double> sq(cfg.paths);
        for (std::int64_t p = 0; p < cfg.paths; ++p) {
            const double diff = centered[e][p] - centered[e + 1][p];
            sq[p] = diff * diff;
        }
        const auto m = stats::moments(sq);
        const double a = cfg.eps[e], b = cfg.eps[e + 1];
        const auto cov = chaos::covariance_ie(cfg.H.value(), cfg.d, a, b, cfg.T, cfg.tol);
        const auto& va = rep.per_eps[e];
        const auto& vb = rep.per_eps[e + 1];
        rep.cauchy.push_back({fmt::format("E[(I_{} - I_{})^2]", a, b), m.mean, m.mean_se,
                              va.finite_reference + vb.finite_reference - 2.0 * cov.value,
                              va.finite_reference_err + vb.finite_reference_err + 2.0 * cov.err_estimate});
    }
    rep.wall_seconds = elapsed(t0);
    return rep;
}

McReport run_chaos_check(const McConfig& cfg)
{
    const auto t0 = Clock::now();
    cfg.validate();
    const Regime r = classify(cfg.H, cfg.d);
    McReport rep = base_report(cfg, r);
    const GridSpec grid = grid_of(cfg);
    const double eps = cfg.eps.front();
    const int M = cfg.chaos_orders;
    const CirculantSampler sampler(cfg.H.value(), grid);
    rep.sampler = sampler.fell_back() ? "cholesky (circulant fallback)" : "circulant";
    const auto w = trapezoid_weights(grid);
    // proj[m * paths + p] for m = 0..M, then the full estimator in row M + 1.
    std::vector<double> proj(static_cast<std::size_t>(M + 2) * cfg.paths);
    const std::vector<double> eps1{eps};
    parallel_for(static_cast<std::size_t>(cfg.paths), [&](std::size_t p) {
        const FbmPath path = sampler.sample(derive_seed(cfg.seed, p));
        const auto v = chaos::project_chaos_all(path, eps, M, true);
        for (int m = 0; m <= M; ++m) proj[m * cfg.paths + p] = v[m];
        std::vector<double> soa;
        double ie = 0.0;
        to_soa(path, soa);
        estimate_ie_soa({soa, grid.n + 1, grid.d}, grid.dt(), w, eps1, std::span<double>(&ie, 1));
        proj[(M + 1) * cfg.paths + p] = ie;
    });
    auto row = [&](int m) { return std::span<const double>(proj).subspan(m * cfg.paths, cfg.paths); };

    const auto total = stats::moments(row(M + 1));
    const auto fin = chaos::variance_ie(cfg.H.value(), cfg.d, eps, cfg.T, cfg.tol);
    EpsSummary s;
    s.eps = eps;
    s.centered = stats::moments(shifted(row(M + 1), discrete_mean_ie(grid, cfg.H.value(), eps), 1.0));
    s.statistic = s.centered;
    s.finite_reference = fin.value;
    s.finite_reference_err = fin.err_estimate;
    rep.per_eps.push_back(s);
    rep.limit = Comparison{"Var(I_eps) vs exact", total.variance, total.variance_se, fin.value, fin.err_estimate};

    double bessel = 0.0;
    for (int m = 1; m <= M; ++m) {
        const auto mm = stats::moments(row(m));
        const auto q = chaos::chaos_variance(cfg.H.value(), cfg.d, eps, m, cfg.T, cfg.tol);
        rep.comparisons.push_back({fmt::format("chaos {} variance", m), mm.variance, mm.variance_se, q.value,
                                   q.err_estimate});
        rep.comparisons.push_back({fmt::format("chaos {} mean", m), mm.mean, mm.mean_se, 0.0, 0.0});
        bessel += mm.variance;
    }
    for (int m = 1; m <= M; ++m)
        for (int k = m + 1; k <= M; ++k) {
            const auto [c, se] = stats::covariance(row(m), row(k));
            rep.comparisons.push_back({fmt::format("chaos {}-{} covariance", m, k), c, se, 0.0, 0.0});
        }
    rep.comparisons.push_back({fmt::format("sum of chaos variances m<={} vs Var(I_eps)", M), bessel, 0.0,
                               total.variance, total.variance_se});
    rep.wall_seconds = elapsed(t0);
    return rep;
}

McReport run(const McConfig& cfg)
{
    switch (cfg.experiment) {
    case Experiment::Clt: return run_clt(cfg);
    case Experiment::L2: return run_l2(cfg);
    case Experiment::ChaosCheck: return run_chaos_check(cfg);
    }
    throw InvalidArgument("unknown experiment");
}

Json config_json(const McConfig& cfg)
{
    return {{"experiment", experiment_name(cfg.experiment)},
            {"H", cfg.H.to_string()},
            {"d", cfg.d},
            {"n", cfg.n},
            {"T", cfg.T},
            {"eps", cfg.eps},
            {"paths", cfg.paths},
            {"seed", cfg.seed},
            {"chaos_orders", cfg.chaos_orders},
            {"allow_under_resolved", cfg.allow_under_resolved},
            {"tol", cfg.tol}};
}

Json report_json(const McReport& rep, bool include_timing)
{
    Json j;
    j["config"] = config_json(rep.config);
    j["regime"] = rep.regime;
    j["scaling"] = rep.scaling;
    j["sampler"] = rep.sampler;
    j["kernel_isa"] = rep.kernel_isa;
    j["paths"] = rep.config.paths;
    Json per = Json::array();
    for (const auto& s : rep.per_eps) {
        Json e{{"eps", s.eps},
               {"centered", moments_json(s.centered)},
               {"statistic", moments_json(s.statistic)},
               {"finite_reference", s.finite_reference},
               {"finite_reference_err", s.finite_reference_err}};
        if (s.renormalized) e["renormalized"] = moments_json(*s.renormalized);
        per.push_back(e);
    }
    j["per_eps"] = per;
    if (rep.limit) j["limit"] = comparison_json(*rep.limit);
    Json cmp = Json::array();
    for (const auto& c : rep.comparisons) cmp.push_back(comparison_json(c));
    j["comparisons"] = cmp;
    if (!rep.cauchy.empty()) {
        Json ca = Json::array();
        for (const auto& c : rep.cauchy) ca.push_back(comparison_json(c));
        j["cauchy"] = ca;
    }
    if (rep.ks) j["ks"] = {{"statistic", rep.ks->statistic}, {"p_value", rep.ks->p_value}};
    if (rep.slope)
        j["slope"] = {{"slope", rep.slope->slope}, {"slope_se", rep.slope->slope_se}, {"target", rep.slope->target}};
    if (include_timing) j["wall_seconds"] = rep.wall_seconds;
    return j;
}

void write_qq_csv(std::ostream& os, const McReport& rep, const Json& config)
{
    config_comment(os, rep, config);
    os << "q_theoretical,q_empirical\n";
    for (const auto& q : rep.qq) os << fmt::format("{:.17g},{:.17g}\n", q.theoretical, q.empirical);
}

void write_variance_trace_csv(std::ostream& os, const McReport& rep, const Json& config)
{
    config_comment(os, rep, config);
    os << "eps,var,var_stderr,reference\n";
    const double ref = rep.limit ? rep.limit->reference : std::nan("");
    for (const auto& s : rep.per_eps)
        os << fmt::format("{:.17g},{:.17g},{:.17g},{:.17g}\n", s.eps, s.statistic.variance, s.statistic.variance_se,
                          ref);
}

}  // namespace silt::mc
