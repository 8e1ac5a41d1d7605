#pragma once

// Seeded Monte Carlo experiments on the discrete estimator: fluctuations in
// the CLT regimes, L2 behaviour along an eps-ladder, and chaos projections.
// Path p uses seed derive_seed(seed, p); per-path results are stored by
// index and reduced in index order, so reports do not depend on threads.

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "silt/hurst.hpp"
#include "silt/stats.hpp"

namespace silt::mc {

enum class Experiment { Clt, L2, ChaosCheck };

std::string experiment_name(Experiment e);
Experiment parse_experiment(const std::string& name);

struct McConfig {
    Experiment experiment = Experiment::Clt;
    Hurst H{1, 2};
    int d = 3;
    std::int64_t n = 1024;
    double T = 1.0;
    /// One value, or a ladder (any order; reports keep the given order).
    std::vector<double> eps{0.02};
    std::int64_t paths = 2000;
    std::uint64_t seed = 42;
    /// chaos-check: projections onto chaoses 1..chaos_orders.
    int chaos_orders = 6;
    /// Skips the eps >= dt^{2H} guard.
    bool allow_under_resolved = false;
    /// Relative tolerance for the quadrature references.
    double tol = 1e-5;

    /// InvalidArgument unless paths >= 100, eps > 0, the grid is valid and
    /// every eps passes the resolution guard (or the override is set).
    void validate() const;
};

struct EpsSummary {
    double eps = 0;
    /// I_eps minus the exact discrete mean (unscaled).
    stats::Moments centered;
    /// CLT: r(eps) times centered. Other experiments: equals centered.
    stats::Moments statistic;
    /// I_eps minus the regime's renormalizer (L2 experiments).
    std::optional<stats::Moments> renormalized;
    /// Exact Var(I_eps) of the continuous functional, scaled like the statistic.
    double finite_reference = 0, finite_reference_err = 0;
};

/// MC value against a quadrature reference, both with uncertainties.
struct Comparison {
    std::string name;
    double mc = 0, mc_se = 0;
    double reference = 0, reference_err = 0;
    double rel_error() const { return mc / reference - 1.0; }
};

struct SlopeFit {
    double slope = 0, slope_se = 0;
    double target = 0;
};

struct McReport {
    McConfig config;
    std::string regime;
    std::string scaling;
    std::string sampler;
    std::string kernel_isa;
    std::vector<EpsSummary> per_eps;
    /// Limit reference for the statistic: T sigma^2 (CLT) or (2 pi)^{-d} Xi_T (L2).
    std::optional<Comparison> limit;
    std::vector<Comparison> comparisons;
    std::optional<stats::KsResult> ks;
    std::vector<stats::QqPoint> qq;
    std::optional<SlopeFit> slope;
    /// L2: E[(C_k - C_{k+1})^2] between consecutive ladder entries, C = centered I.
    std::vector<Comparison> cauchy;
    double wall_seconds = 0;
};

McReport run_clt(const McConfig& cfg);
McReport run_l2(const McConfig& cfg);
McReport run_chaos_check(const McConfig& cfg);
McReport run(const McConfig& cfg);

nlohmann::json config_json(const McConfig& cfg);
/// Wall-clock time is left out unless requested so that identical runs
/// produce identical bytes.
nlohmann::json report_json(const McReport& report, bool include_timing = false);

// CSVs start with one `# ` line holding `config` (config_json(report.config)
// when null), then the header.
void write_qq_csv(std::ostream& os, const McReport& report, const nlohmann::json& config = nullptr);
/// eps,var,var_stderr,reference with var the variance of the statistic and
/// reference the limit value.
void write_variance_trace_csv(std::ostream& os, const McReport& report, const nlohmann::json& config = nullptr);

}  // namespace silt::mc
