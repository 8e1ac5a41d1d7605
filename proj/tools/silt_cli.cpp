// Command-line front end. Options come from an optional JSON config file
// (--config) overlaid by flags; the resolved config, defaults included, is
// embedded in every output. Exit codes: 2 invalid or out-of-regime
// parameters, 3 quadrature non-convergence, 4 I/O.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "silt/chaos.hpp"
#include "silt/error.hpp"
#include "silt/fbm.hpp"
#include "silt/limits.hpp"
#include "silt/mc.hpp"
#include "silt/parallel.hpp"
#include "silt/silt.hpp"

using namespace silt;
using Json = nlohmann::ordered_json;

namespace {

constexpr int kExitInvalid = 2;
constexpr int kExitNonConvergence = 3;
constexpr int kExitIo = 4;

// Keep in sync with docs/config.schema.json.
constexpr std::string_view kKnownKeys[] = {
    "command", "H", "d", "n", "T", "seed", "method", "path", "eps", "allow_under_resolved", "what", "m", "sum_to",
    "both_forms", "tol", "format", "paths", "chaos_orders", "timing", "out"};

/// Resolved configuration: file values, then flags, then defaults filled in
/// as each command reads them, so `json` ends up listing everything used.
class Config {
public:
    Json json = Json::object();

    template <class T>
    T get(const std::string& key, const T& fallback)
    {
        if (!json.contains(key)) json[key] = fallback;
        try {
            return json[key].get<T>();
        } catch (const nlohmann::json::exception&) {
            throw InvalidArgument(fmt::format("config key '{}' has the wrong type", key));
        }
    }

    template <class T>
    T require(const std::string& key)
    {
        if (!json.contains(key)) throw InvalidArgument(fmt::format("missing required option '{}'", key));
        return get<T>(key, T{});
    }

    bool has(const std::string& key) const { return json.contains(key); }

    /// H as written ("p/q" or a decimal); numbers from a JSON file are kept as text.
    Hurst hurst()
    {
        if (!json.contains("H")) throw InvalidArgument("missing required option 'H'");
        if (json["H"].is_number()) json["H"] = json["H"].dump();
        return Hurst::parse(json["H"].get<std::string>());
    }

    /// eps as a list; a scalar in the file is promoted.
    std::vector<double> eps_list(std::vector<double> fallback)
    {
        if (json.contains("eps") && json["eps"].is_number()) json["eps"] = Json::array({json["eps"]});
        return get<std::vector<double>>("eps", fallback);
    }
};

std::string read_file(const std::string& file)
{
    std::ifstream in(file, std::ios::binary);
    if (!in) throw IoError(fmt::format("cannot open '{}'", file));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& file, const std::string& content)
{
    std::ofstream out(file, std::ios::binary);
    if (!out) throw IoError(fmt::format("cannot write '{}'", file));
    out << content;
    if (!out) throw IoError(fmt::format("write to '{}' failed", file));
}

/// Writes to `out` when set, otherwise stdout.
void emit(Config& cfg, const std::string& content)
{
    const auto out = cfg.get<std::string>("out", "");
    if (out.empty())
        std::cout << content;
    else
        write_file(out, content);
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

std::string config_comment(const Config& cfg) { return "# " + cfg.json.dump() + "\n"; }

GridSpec grid_from(Config& cfg)
{
    GridSpec g{cfg.get<std::int64_t>("n", 1024), cfg.get<double>("T", 1.0), cfg.get<int>("d", 3)};
    g.validate();
    return g;
}

FbmPath sample_path(Config& cfg, const Hurst& H)
{
    const GridSpec grid = grid_from(cfg);
    const auto seed = cfg.get<std::uint64_t>("seed", 42);
    const auto method = cfg.get<std::string>("method", "circulant");
    if (method == "circulant") return gen_circulant(H, grid, seed);
    if (method == "cholesky") return gen_cholesky(H, grid, seed);
    throw InvalidArgument(fmt::format("unknown method '{}' (expected circulant or cholesky)", method));
}

int cmd_fbm(Config& cfg)
{
    const Hurst H = cfg.hurst();
    const FbmPath path = sample_path(cfg, H);
    const auto out = cfg.require<std::string>("out");
    save_path(out, path);
    // The path formats have no room for metadata; the config goes alongside.
    Json meta{{"config", cfg.json}, {"method", path.method}, {"file", out}};
    write_file(out + ".json", dump(meta));
    return 0;
}

int cmd_estimate(Config& cfg)
{
    const Hurst H = cfg.hurst();
    const auto eps = cfg.eps_list({0.02});
    const bool allow = cfg.get<bool>("allow_under_resolved", false);
    FbmPath path;
    const auto file = cfg.get<std::string>("path", "");
    if (file.empty()) {
        path = sample_path(cfg, H);
    } else {
        path = load_path(file, H.value(), cfg.get<double>("T", 1.0));
    }
    const auto ie = estimate_ie_ladder(path, eps, allow);
    const Regime r = classify(H, path.grid.d);
    Json rows = Json::array();
    for (std::size_t k = 0; k < eps.size(); ++k) {
        const double mean = discrete_mean_ie(path.grid, H.value(), eps[k]);
        Json row{{"eps", eps[k]}, {"I_eps", ie[k]}, {"discrete_mean", mean}};
        if (r.tag != RegimeTag::Unsupported) {
            const double sub = renorm_subtractor(r, eps[k], path.grid.T);
            row["subtractor"] = sub;
            row["renormalized"] = ie[k] - sub;
        }
        if (r.is_clt()) row["statistic"] = scaling_r(r, eps[k]) * (ie[k] - mean);
        rows.push_back(row);
    }
    Json j{{"config", cfg.json}, {"regime", r.name()}, {"sampler", path.method}, {"estimates", rows}};
    emit(cfg, dump(j));
    return 0;
}

int cmd_classify(Config& cfg)
{
    const Hurst H = cfg.hurst();
    const int d = cfg.get<int>("d", 3);
    const Regime r = classify(H, d);
    Json j{{"regime", r.name()}, {"scaling", r.scaling()}, {"condition", r.condition()}, {"config", cfg.json}};
    emit(cfg, dump(j));
    return 0;
}

int cmd_constants(Config& cfg)
{
    const auto what = cfg.require<std::string>("what");
    const Hurst H = cfg.hurst();
    const int d = cfg.get<int>("d", 3);
    const double h = H.value();
    std::vector<limits::ConstantRow> rows;
    auto add = [&](const std::string& quantity, const quad::QuadResult& q) {
        limits::value_or_throw(q, quantity);
        rows.push_back({H.to_string(), d, quantity, q.value, q.err_estimate, q.evals});
    };
    auto orders = [&] {
        if (cfg.has("m") && cfg.json["m"].is_number()) cfg.json["m"] = Json::array({cfg.json["m"]});
        return cfg.get<std::vector<int>>("m", {1});
    };

    if (what == "chd") {
        add("chd", chd_quad(h, d));
    } else if (what == "xi") {
        const double T = cfg.get<double>("T", 1.0), tol = cfg.get<double>("tol", 1e-6);
        add(fmt::format("xi_t(T={})", T), limits::xi_t(h, d, T, tol));
        add(fmt::format("variance_limit(T={})", T), limits::variance_limit(h, d, T, tol));
    } else if (what == "sigma2") {
        const double tol = cfg.get<double>("tol", 1e-5);
        add("sigma2", limits::sigma2(H, d, tol));
        if (cfg.get<bool>("both_forms", false) && classify(H, d).tag == RegimeTag::CltPower)
            add("sigma2_direct", limits::sigma2_power_direct(H, d, tol));
    } else if (what == "chaos-var") {
        const double T = cfg.get<double>("T", 1.0), tol = cfg.get<double>("tol", 1e-6);
        for (double eps : cfg.eps_list({0.05}))
            for (int m : orders())
                add(fmt::format("chaos_var(m={},eps={},T={})", m, eps, T), chaos::chaos_variance(h, d, eps, m, T, tol));
    } else if (what == "chaos-limit") {
        const double tol = cfg.get<double>("tol", 1e-6);
        for (int m : orders()) add(fmt::format("chaos_limit(m={})", m), limits::chaos_limit_variance(H, d, m, tol));
        if (const int M = cfg.get<int>("sum_to", 0); M > 0)
            add(fmt::format("chaos_limit_sum(M={})", M), limits::chaos_limit_partial_sum(H, d, M, tol));
    } else {
        throw InvalidArgument(
            fmt::format("unknown constant '{}' (expected chd, xi, sigma2, chaos-var or chaos-limit)", what));
    }

    if (cfg.get<std::string>("format", "csv") == "json") {
        Json arr = Json::array();
        for (const auto& r : rows)
            arr.push_back({{"H", r.H},
                           {"d", r.d},
                           {"quantity", r.quantity},
                           {"value", r.value},
                           {"err_estimate", r.err_estimate},
                           {"evals", r.evals}});
        emit(cfg, dump(Json{{"config", cfg.json}, {"constants", arr}}));
    } else {
        std::ostringstream os;
        limits::write_constants_csv(os, rows);
        emit(cfg, config_comment(cfg) + os.str());
    }
    return 0;
}

int cmd_mc(Config& cfg, mc::Experiment experiment)
{
    mc::McConfig m;
    m.experiment = experiment;
    m.H = cfg.hurst();
    m.d = cfg.get<int>("d", 3);
    m.n = cfg.get<std::int64_t>("n", 1024);
    m.T = cfg.get<double>("T", 1.0);
    m.eps = cfg.eps_list(experiment == mc::Experiment::L2 ? std::vector<double>{0.05, 0.025, 0.0125}
                                                          : std::vector<double>{0.02});
    m.paths = cfg.get<std::int64_t>("paths", 2000);
    m.seed = cfg.get<std::uint64_t>("seed", 42);
    m.tol = cfg.get<double>("tol", 1e-5);
    m.allow_under_resolved = cfg.get<bool>("allow_under_resolved", false);
    if (experiment == mc::Experiment::ChaosCheck) m.chaos_orders = cfg.get<int>("chaos_orders", 6);
    const bool timing = cfg.get<bool>("timing", false);
    const auto prefix = cfg.get<std::string>("out", "");

    const mc::McReport rep = mc::run(m);
    Json j = Json::parse(mc::report_json(rep, timing).dump());
    j["config"] = cfg.json;
    if (prefix.empty()) {
        std::cout << dump(j);
        return 0;
    }
    write_file(prefix + ".json", dump(j));
    const nlohmann::json embedded = nlohmann::json::parse(cfg.json.dump());
    std::ostringstream trace;
    mc::write_variance_trace_csv(trace, rep, embedded);
    write_file(prefix + "_trace.csv", trace.str());
    if (!rep.qq.empty()) {
        std::ostringstream qq;
        mc::write_qq_csv(qq, rep, embedded);
        write_file(prefix + "_qq.csv", qq.str());
    }
    return 0;
}

/// Flags that were given on the command line, recorded as JSON values.
struct Overlay {
    Json json = Json::object();

    template <class T>
    void add(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help)
    {
        app->add_option_function<T>(flag, [this, key](const T& v) { json[key] = v; }, help);
    }
    void add_flag(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help)
    {
        app->add_flag_function(flag, [this, key](std::int64_t) { json[key] = true; }, help);
    }
};

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Self-intersection local time of fractional Brownian motion: sampling, estimators, limit "
                 "constants and Monte Carlo checks"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string config_file;
    unsigned threads = 0;
    app.add_option("--config", config_file, "JSON config file; flags override its values");
    app.add_option("--threads", threads, "worker threads (default SILT_THREADS, else 1); never changes results");

    Overlay ov;
    auto common = [&](CLI::App* sub) {
        ov.add<std::string>(sub, "--H", "H", "Hurst parameter, 'p/q' (exact) or decimal");
        ov.add<int>(sub, "--d", "d", "dimension");
        ov.add<std::string>(sub, "--out", "out", "output file (prefix for Monte Carlo runs)");
    };
    auto grid_opts = [&](CLI::App* sub) {
        ov.add<std::int64_t>(sub, "--n", "n", "grid steps");
        ov.add<double>(sub, "--T", "T", "horizon");
        ov.add<std::uint64_t>(sub, "--seed", "seed", "64-bit run seed");
    };

    auto* fbm = app.add_subcommand("fbm", "sample one fBm path to a CSV or binary file");
    common(fbm);
    grid_opts(fbm);
    ov.add<std::string>(fbm, "--method", "method", "circulant (default) or cholesky");

    auto* est = app.add_subcommand("estimate", "discrete I_eps on a sampled or loaded path");
    common(est);
    grid_opts(est);
    ov.add<std::string>(est, "--method", "method", "circulant (default) or cholesky");
    ov.add<std::string>(est, "--path", "path", "path file to load instead of sampling");
    ov.add<std::vector<double>>(est, "--eps", "eps", "smoothing scale(s)");
    ov.add_flag(est, "--allow-under-resolved", "allow_under_resolved", "skip the eps >= dt^(2H) guard");

    auto* con = app.add_subcommand("constants", "quadrature constants as CSV (default) or JSON");
    common(con);
    ov.add<std::string>(con, "--what", "what", "chd | xi | sigma2 | chaos-var | chaos-limit");
    ov.add<double>(con, "--T", "T", "horizon (xi, chaos-var)");
    ov.add<std::vector<double>>(con, "--eps", "eps", "smoothing scale(s) (chaos-var)");
    ov.add<std::vector<int>>(con, "--m", "m", "chaos order(s)");
    ov.add<int>(con, "--sum-to", "sum_to", "chaos-limit: also the sum over m = 1..M");
    ov.add<double>(con, "--tol", "tol", "relative tolerance");
    ov.add<std::string>(con, "--format", "format", "csv or json");
    ov.add_flag(con, "--both-forms", "both_forms", "sigma2 (power case): add the single-integral form");

    auto* cls = app.add_subcommand("classify", "regime of (H, d)");
    common(cls);

    struct McSub {
        CLI::App* app;
        mc::Experiment experiment;
    };
    std::vector<McSub> mcs;
    for (auto [name, e, help] : {std::tuple{"mc-clt", mc::Experiment::Clt, "fluctuations in the CLT regimes"},
                                 std::tuple{"mc-l2", mc::Experiment::L2, "L2 behaviour along an eps-ladder"},
                                 std::tuple{"chaos-check", mc::Experiment::ChaosCheck, "pathwise chaos projections"}}) {
        auto* sub = app.add_subcommand(name, help);
        common(sub);
        grid_opts(sub);
        ov.add<std::vector<double>>(sub, "--eps", "eps", "smoothing scale or ladder");
        ov.add<std::int64_t>(sub, "--paths", "paths", "number of paths (>= 100)");
        ov.add<double>(sub, "--tol", "tol", "relative tolerance of the quadrature references");
        ov.add_flag(sub, "--allow-under-resolved", "allow_under_resolved", "skip the eps >= dt^(2H) guard");
        ov.add_flag(sub, "--timing", "timing", "include wall-clock seconds in the report");
        if (e == mc::Experiment::ChaosCheck) ov.add<int>(sub, "--orders", "chaos_orders", "chaos orders 1..M");
        mcs.push_back({sub, e});
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitInvalid;
    }

    try {
        if (threads > 0) set_thread_count(threads);
        Config cfg;
        if (!config_file.empty()) {
            try {
                cfg.json = Json::parse(read_file(config_file));
            } catch (const nlohmann::json::parse_error& e) {
                throw InvalidArgument(fmt::format("config '{}' is not valid JSON: {}", config_file, e.what()));
            }
            if (!cfg.json.is_object()) throw InvalidArgument("config file must hold a JSON object");
            for (const auto& [k, v] : cfg.json.items())
                if (std::find(std::begin(kKnownKeys), std::end(kKnownKeys), k) == std::end(kKnownKeys))
                    throw InvalidArgument(fmt::format("unknown config key '{}' (see docs/config.schema.json)", k));
        }
        for (auto& [k, v] : ov.json.items()) cfg.json[k] = v;

        CLI::App* sub = app.get_subcommands().front();
        cfg.json["command"] = sub->get_name();
        if (sub == fbm) return cmd_fbm(cfg);
        if (sub == est) return cmd_estimate(cfg);
        if (sub == con) return cmd_constants(cfg);
        if (sub == cls) return cmd_classify(cfg);
        for (const auto& m : mcs)
            if (sub == m.app) return cmd_mc(cfg, m.experiment);
        return kExitInvalid;
    } catch (const InvalidArgument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInvalid;
    } catch (const NonConvergence& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNonConvergence;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    }
}
