// regime_levy: calibrate, diagnose, simulate and study diversification from the
// command line. Exit codes: 0 ok, 2 configuration, 3 I/O, 4 numerical, 5 degenerate.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <openssl/evp.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "regime_levy/regime_levy.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace regime_levy;

namespace {

int exit_code(ErrorCategory c) {
    switch (c) {
        case ErrorCategory::config: return 2;
        case ErrorCategory::io: return 3;
        case ErrorCategory::numerical: return 4;
        case ErrorCategory::degenerate: return 5;
    }
    return 1;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCategory::io, "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string sha256_hex(const std::string& bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        fail(ErrorCategory::io, "sha256 digest failed");
    std::string hex;
    char buf[3];
    for (unsigned int i = 0; i < len; ++i) {
        std::snprintf(buf, sizeof buf, "%02x", digest[i]);
        hex += buf;
    }
    return hex;
}

fs::path prepare_out_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) fail(ErrorCategory::io, "cannot create output directory '" + dir + "'");
    return fs::path(dir);
}

std::ofstream open_out(const fs::path& p) {
    std::ofstream out(p, std::ios::binary);
    if (!out) fail(ErrorCategory::io, "cannot write '" + p.string() + "'");
    return out;
}

void write_json(const fs::path& p, const json& j) {
    auto out = open_out(p);
    out << j.dump(2) << '\n';
}

void setup_logging() {
    auto logger = spdlog::stderr_color_mt("regime_levy");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%l] %v");
    spdlog::set_level(spdlog::level::warn);
    if (const char* env = std::getenv("REGIME_LEVY_LOG")) {
        auto lvl = spdlog::level::from_str(env);
        if (lvl != spdlog::level::off || std::string(env) == "off") spdlog::set_level(lvl);
    }
}

// ---------------------------------------------------------------- calibrate

struct CalibrateConfig {
    std::string input;
    std::string date_col = "date";
    std::string price_col = "close";
    std::string delimiter = ",";
    int regimes = 2;
    double eps = 1e-6;
    std::size_t max_iter = 500;
    double threshold = 0.5;
    double p_error = 0.1;
    std::string out;

    json echo() const {
        return {{"command", "calibrate"}, {"input", input},         {"date_col", date_col},
                {"price_col", price_col}, {"delimiter", delimiter}, {"regimes", regimes},
                {"eps", eps},             {"max_iter", max_iter},   {"threshold", threshold},
                {"p_error", p_error}};
    }
};

int run_calibrate(const CalibrateConfig& cfg) {
    require(cfg.regimes >= 2, "--regimes must be at least 2");
    require(cfg.delimiter.size() == 1, "--delimiter must be a single character");
    require(cfg.eps > 0.0, "--eps must be positive");
    require(cfg.max_iter >= 1, "--max-iter must be at least 1");
    require(cfg.threshold >= 0.5 && cfg.threshold < 1.0, "--threshold must lie in [0.5, 1)");
    require(cfg.p_error > 0.0 && cfg.p_error < 0.5, "--p-error must lie in (0, 0.5)");

    const std::string bytes = read_file(cfg.input);
    std::istringstream in(bytes);
    const auto prices = parse_prices(in, {cfg.delimiter[0], cfg.date_col, cfg.price_col});
    const auto returns = to_log_returns(prices, cfg.input);
    spdlog::info("loaded {} prices, {} returns", prices.size(), returns.size());

    const auto init = default_initial_model(returns.values, cfg.regimes);
    auto em = em_estimate(returns.values, init, {cfg.eps, cfg.max_iter, std::nullopt});
    spdlog::info("EM stopped after {} sweeps ({}), loglik {}", em.trace.iterations,
                 to_string(em.trace.stop_reason), em.trace.loglik_by_iter.back());
    if (em.kappa_floored) spdlog::warn("kappa floored at {} in at least one regime", kKappaFloor);

    const auto assignment = assign_regimes(em.smoothed, cfg.threshold);
    const auto fits = fit_per_regime(returns.values, assignment);
    const auto diag = diagnose(em.smoothed, cfg.p_error);
    spdlog::info("RCM {:.4f}, p-indicator {:.2f}%", diag.rcm, diag.p_indicator);

    CalibrationReport report;
    report.stage1.model = em.model;
    report.stage1.stationary = stationary_distribution(em.model.Pi);
    report.stage1.initial = em.initial;
    report.stage1.loglik = em.trace.loglik_by_iter.back();
    report.stage1.trace = em.trace;
    report.stage1.kappa_floored = em.kappa_floored;
    report.stage2.threshold = cfg.threshold;
    report.stage2.unclassified = assignment.unclassified();
    for (std::size_t i = 0; i < fits.fits.size(); ++i) {
        const auto& f = fits.fits[i];
        if (!f.fit.converged) spdlog::warn("NIG fit for regime {} did not converge", i);
        report.stage2.regimes.push_back(
            {fits.counts[i], f.fit, f.mom.near_gaussian, f.mom.adjusted});
    }
    report.diagnostics = diag;
    report.provenance.input_path = cfg.input;
    report.provenance.input_sha256 = sha256_hex(bytes);
    report.provenance.config = cfg.echo();
    report.files = {{"smoothed", "smoothed.csv"},
                    {"regimes", "regimes.csv"},
                    {"returns", "returns.csv"}};

    const auto dir = prepare_out_dir(cfg.out);
    write_json(dir / "report.json", to_json(report));
    {
        auto out = open_out(dir / "smoothed.csv");
        write_probabilities_csv(out, em.smoothed, returns.dates);
    }
    {
        auto out = open_out(dir / "regimes.csv");
        out << "date,regime\n";
        for (std::size_t t = 0; t < returns.size(); ++t) {
            const auto& l = assignment.labels[t];
            out << format_iso_date(returns.dates[t]) << ',' << (l ? static_cast<long>(*l) : -1L)
                << '\n';
        }
    }
    {
        auto out = open_out(dir / "returns.csv");
        write_returns_csv(out, returns);
    }
    std::cout << json{{"rcm", diag.rcm},
                      {"p_indicator", diag.p_indicator},
                      {"p_error", diag.p_error},
                      {"report", (dir / "report.json").string()}}
                     .dump()
              << '\n';
    return 0;
}

// ---------------------------------------------------------------- diagnose

struct DiagnoseConfig {
    std::string input;
    std::optional<double> p_error;
    std::string out;
};

int run_diagnose(const DiagnoseConfig& cfg) {
    const fs::path input(cfg.input);
    std::optional<CalibrationReport> report;
    fs::path smoothed_path = input;
    if (input.extension() == ".json") {
        report = load_report(cfg.input);
        auto it = report->files.find("smoothed");
        if (it == report->files.end())
            fail(ErrorCategory::io, "report does not name a smoothed-probability file");
        smoothed_path = input.parent_path() / it->second;
    }
    const double p = cfg.p_error ? *cfg.p_error : (report ? report->diagnostics.p_error : 0.1);
    require(p > 0.0 && p < 0.5, "--p-error must lie in (0, 0.5)");

    std::istringstream in(read_file(smoothed_path.string()));
    const auto smoothed = read_probabilities_csv(in);
    const auto diag = diagnose(smoothed, p);
    json j = {{"rcm", diag.rcm},
              {"p_indicator", diag.p_indicator},
              {"p_error", diag.p_error},
              {"steps", smoothed.steps()},
              {"regimes", smoothed.regimes()},
              {"source", smoothed_path.string()}};
    int code = 0;
    if (report) {
        const bool same_p = report->diagnostics.p_error == p;
        const bool matches =
            std::abs(report->diagnostics.rcm - diag.rcm) <= 1e-9 &&
            (!same_p || std::abs(report->diagnostics.p_indicator - diag.p_indicator) <= 1e-9);
        j["matches_report"] = matches;
        if (!matches) {
            std::cout << j.dump() << '\n';
            fail(ErrorCategory::numerical,
                 "recomputed diagnostics differ from the values stored in the report");
        }
    }
    if (!cfg.out.empty()) write_json(prepare_out_dir(cfg.out) / "diagnostics.json", j);
    std::cout << j.dump() << '\n';
    return code;
}

// ---------------------------------------------------------------- simulate / portfolio

struct UniverseConfig {
    std::string report;
    std::size_t assets = 1;
    long horizon = 5000;
    double loading = 1.0;
    double idio_scale = 0.0;
    std::optional<std::uint64_t> seed;
    std::string out;
};

struct SourceModel {
    RegimeNigModel model;
    std::string sha256;
};

SourceModel load_source_model(const std::string& report_path) {
    if (report_path.empty()) return {reference_regime_nig_model(), ""};
    const std::string bytes = read_file(report_path);
    json j;
    try {
        j = json::parse(bytes);
    } catch (const json::exception& e) {
        fail(ErrorCategory::io, std::string("report is not valid JSON: ") + e.what());
    }
    return {regime_nig_model(report_from_json(j)), sha256_hex(bytes)};
}

json universe_echo(const UniverseConfig& cfg, const SourceModel& src, const char* command) {
    json model = json::array();
    for (const auto& law : src.model.laws)
        model.push_back({{"alpha", law.alpha()},
                         {"beta", law.beta()},
                         {"delta", law.delta()},
                         {"mu", law.mu()}});
    json pi = json::array();
    for (Eigen::Index i = 0; i < src.model.Pi.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index k = 0; k < src.model.Pi.cols(); ++k) row.push_back(src.model.Pi(i, k));
        pi.push_back(row);
    }
    return {{"command", command},
            {"toolkit_version", kToolkitVersion},
            {"report", cfg.report.empty() ? json(nullptr) : json(cfg.report)},
            {"report_sha256", src.sha256.empty() ? json(nullptr) : json(src.sha256)},
            {"assets", cfg.assets},
            {"horizon", cfg.horizon},
            {"loading", cfg.loading},
            {"idio_scale", cfg.idio_scale},
            {"seed", *cfg.seed},
            {"regime_laws", model},
            {"transition_matrix", pi}};
}

UniverseSpec make_spec(const UniverseConfig& cfg, const SourceModel& src) {
    require(cfg.seed.has_value(), "--seed is required");
    require(cfg.horizon >= 2, "--horizon must be at least 2");
    require(cfg.assets >= 1, "--assets must be at least 1");
    auto spec = UniverseSpec::uniform(cfg.assets, static_cast<std::size_t>(cfg.horizon),
                                      cfg.loading, cfg.idio_scale, *cfg.seed, src.model);
    spec.validate();
    return spec;
}

int run_simulate(const UniverseConfig& cfg) {
    const auto src = load_source_model(cfg.report);
    const auto spec = make_spec(cfg, src);
    const auto u = simulate_universe(spec);
    const auto dir = prepare_out_dir(cfg.out);
    {
        auto out = open_out(dir / "simulated_returns.csv");
        out << "t,regime";
        for (std::size_t a = 0; a < spec.n_assets; ++a) out << ",asset_" << a;
        out << '\n';
        for (Eigen::Index t = 0; t < u.returns.rows(); ++t) {
            out << t << ',' << u.regimes[static_cast<std::size_t>(t)];
            for (Eigen::Index a = 0; a < u.returns.cols(); ++a)
                out << ',' << format_double(u.returns(t, a));
            out << '\n';
        }
    }
    write_json(dir / "simulate.json", universe_echo(cfg, src, "simulate"));
    spdlog::info("wrote {} x {} simulated returns", u.returns.rows(), u.returns.cols());
    return 0;
}

struct PortfolioConfig {
    UniverseConfig universe;
    std::size_t trials = 200;
    std::vector<std::size_t> sizes;
    std::optional<std::size_t> factors;
};

int run_portfolio(const PortfolioConfig& cfg) {
    const auto src = load_source_model(cfg.universe.report);
    require(cfg.universe.assets >= 2, "--assets must be at least 2 for the portfolio study");
    const auto spec = make_spec(cfg.universe, src);
    require(cfg.trials >= 1, "--trials must be at least 1");

    std::vector<std::size_t> sizes = cfg.sizes;
    if (sizes.empty()) {
        for (std::size_t s : {1, 2, 5, 10, 20, 30, 50, 75, 100})
            if (s < spec.n_assets) sizes.push_back(s);
        sizes.push_back(spec.n_assets);
    }

    const auto u = simulate_universe(spec);
    const auto p = pca(u.returns);
    const auto c90 = components_for_threshold(p, 0.90);
    const auto c95 = components_for_threshold(p, 0.95);
    const std::size_t m = cfg.factors ? *cfg.factors : c95;
    const auto w = factor_weights(p, u.returns, m);
    const auto curve = diversification_curve(u.returns, sizes, cfg.trials, spec.seed);

    const auto dir = prepare_out_dir(cfg.universe.out);
    {
        auto out = open_out(dir / "eigenvalues.csv");
        out << "component,eigenvalue\n";
        for (Eigen::Index i = 0; i < p.eigenvalues.size(); ++i)
            out << i + 1 << ',' << format_double(p.eigenvalues(i)) << '\n';
    }
    {
        auto out = open_out(dir / "explained.csv");
        out << "components,explained_fraction\n";
        for (Eigen::Index i = 0; i < p.explained.size(); ++i)
            out << i + 1 << ',' << format_double(p.explained(i)) << '\n';
    }
    {
        auto out = open_out(dir / "weights.csv");
        out << "asset,weight\n";
        for (Eigen::Index i = 0; i < w.size(); ++i)
            out << "asset_" << i << ',' << format_double(w(i)) << '\n';
    }
    {
        auto out = open_out(dir / "diversification_curve.csv");
        out << "size,mean_std,dispersion,mean_es_1pct\n";
        for (const auto& pt : curve)
            out << pt.size << ',' << format_double(pt.mean_risk) << ','
                << format_double(pt.dispersion) << ',' << format_double(pt.mean_shortfall)
                << '\n';
    }
    auto echo = universe_echo(cfg.universe, src, "portfolio");
    echo["trials"] = cfg.trials;
    echo["sizes"] = sizes;
    echo["factors"] = cfg.factors ? json(*cfg.factors) : json(nullptr);
    json summary = {{"components_for_threshold", {{"0.90", c90}, {"0.95", c95}}},
                    {"factors_used", m},
                    {"config", echo}};
    write_json(dir / "summary.json", summary);
    std::cout << json{{"components_90", c90}, {"components_95", c95}, {"factors_used", m}}.dump()
              << '\n';
    return 0;
}

void add_universe_options(CLI::App* cmd, UniverseConfig& cfg) {
    cmd->add_option("--report", cfg.report, "calibration report supplying Pi and NIG laws");
    cmd->add_option("--assets", cfg.assets, "number of assets");
    cmd->add_option("--horizon", cfg.horizon, "number of simulated periods");
    cmd->add_option("--loading", cfg.loading, "loading on the common NIG draw");
    cmd->add_option("--idio-scale", cfg.idio_scale, "scale of the idiosyncratic NIG draw");
    cmd->add_option("--seed", cfg.seed, "master RNG seed (required)");
    cmd->add_option("--out", cfg.out, "output directory")->required();
}

}  // namespace

int main(int argc, char** argv) {
    setup_logging();
    CLI::App app{"Regime-switching NIG calibration and diversification toolkit"};
    app.set_version_flag("--version", std::string(kToolkitVersion));
    app.require_subcommand(1);

    CalibrateConfig cal;
    auto* c = app.add_subcommand("calibrate", "two-stage regime/NIG calibration of a price file");
    c->add_option("--input", cal.input, "price CSV with a header row")->required();
    c->add_option("--date-col", cal.date_col, "date column name");
    c->add_option("--price-col", cal.price_col, "price column name");
    c->add_option("--delimiter", cal.delimiter, "field delimiter");
    c->add_option("--regimes", cal.regimes, "number of regimes K");
    c->add_option("--eps", cal.eps, "EM log-likelihood tolerance");
    c->add_option("--max-iter", cal.max_iter, "maximum EM sweeps");
    c->add_option("--threshold", cal.threshold, "classification threshold for the NIG fits");
    c->add_option("--p-error", cal.p_error, "error level of the smoothed-probability indicator");
    c->add_option("--seed", "accepted for uniformity; calibration is deterministic");
    c->add_option("--out", cal.out, "output directory")->required();

    DiagnoseConfig dia;
    auto* d = app.add_subcommand("diagnose", "recompute RCM and p-indicator");
    d->add_option("--input", dia.input, "report.json or smoothed.csv")->required();
    d->add_option("--p-error", dia.p_error, "error level p");
    d->add_option("--out", dia.out, "optional output directory for diagnostics.json");

    UniverseConfig sim;
    auto* s = app.add_subcommand("simulate", "simulate Markov-modulated NIG returns");
    add_universe_options(s, sim);

    PortfolioConfig port;
    port.universe.assets = 100;
    port.universe.loading = 0.0;
    port.universe.idio_scale = 1.0;
    auto* p = app.add_subcommand("portfolio", "PCA, factor weights and diversification curve");
    add_universe_options(p, port.universe);
    p->add_option("--trials", port.trials, "random subsets per portfolio size");
    p->add_option("--sizes", port.sizes, "comma-separated portfolio sizes")->delimiter(',');
    p->add_option("--factors", port.factors, "factor count for the weights (default: 95% count)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error[config]: " << e.what() << '\n';
        return 2;
    }

    try {
        if (*c) return run_calibrate(cal);
        if (*d) return run_diagnose(dia);
        if (*s) return run_simulate(sim);
        if (*p) return run_portfolio(port);
    } catch (const Error& e) {
        std::cerr << "error[" << to_string(e.category()) << "]: " << e.what() << '\n';
        return exit_code(e.category());
    } catch (const std::exception& e) {
        std::cerr << "error[numerical]: " << e.what() << '\n';
        return 4;
    }
    return 0;
}
