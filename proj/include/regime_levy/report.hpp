#pragma once

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "regime_levy/data_ingest.hpp"
#include "regime_levy/diagnostics.hpp"
#include "regime_levy/error.hpp"
#include "regime_levy/nig.hpp"
#include "regime_levy/nig_fit.hpp"
#include "regime_levy/portfolio_lab.hpp"
#include "regime_levy/regime_em.hpp"
#include "regime_levy/stage2_fit.hpp"

namespace regime_levy {

inline constexpr const char* kToolkitVersion = "0.1.0";

struct Stage1Report {
    RegimeModel model;
    Eigen::VectorXd stationary;
    Eigen::VectorXd initial;
    double loglik = 0.0;
    EmTrace trace;
    bool kappa_floored = false;
};

struct Stage2RegimeReport {
    std::size_t count = 0;
    NigFitResult fit;
    bool near_gaussian = false;
    bool moments_adjusted = false;
};

struct Stage2Report {
    double threshold = 0.5;
    std::size_t unclassified = 0;
    std::vector<Stage2RegimeReport> regimes;
};

struct Provenance {
    std::string input_path;
    std::string input_sha256;
    std::string toolkit_version = kToolkitVersion;
    nlohmann::json config = nlohmann::json::object();
};

/// Everything a calibration run produces, in one serializable document.
struct CalibrationReport {
    Stage1Report stage1;
    Stage2Report stage2;
    DiagnosticsReport diagnostics;
    Provenance provenance;
    std::map<std::string, std::string> files;
};

namespace detail {

inline nlohmann::json vector_json(const Eigen::VectorXd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

inline Eigen::VectorXd json_vector(const nlohmann::json& j) {
    const auto v = j.get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline nlohmann::json matrix_json(const Eigen::MatrixXd& m) {
    auto rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Eigen::VectorXd r = m.row(i).transpose();
        rows.push_back(vector_json(r));
    }
    return rows;
}

inline Eigen::MatrixXd json_matrix(const nlohmann::json& j) {
    const auto rows = j.get<std::vector<std::vector<double>>>();
    if (rows.empty()) return {};
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != rows.front().size())
            fail(ErrorCategory::io, "report: ragged matrix");
        for (std::size_t k = 0; k < rows[i].size(); ++k)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
    }
    return m;
}

inline nlohmann::json nig_json(const NigParams& p) {
    return {{"alpha", p.alpha()}, {"beta", p.beta()}, {"delta", p.delta()}, {"mu", p.mu()}};
}

inline NigParams json_nig(const nlohmann::json& j) {
    return NigParams(j.at("alpha").get<double>(), j.at("beta").get<double>(),
                     j.at("delta").get<double>(), j.at("mu").get<double>());
}

}  // namespace detail

inline nlohmann::json to_json(const CalibrationReport& r) {
    using nlohmann::json;
    const auto& s1 = r.stage1;
    json stage1 = {
        {"regimes", s1.model.regimes()},
        {"kappa", detail::vector_json(s1.model.kappa)},
        {"theta", detail::vector_json(s1.model.theta)},
        {"sigma", detail::vector_json(s1.model.sigma)},
        {"transition_matrix", detail::matrix_json(s1.model.Pi)},
        {"stationary_distribution", detail::vector_json(s1.stationary)},
        {"initial_distribution", detail::vector_json(s1.initial)},
        {"loglik", s1.loglik},
        {"kappa_floored", s1.kappa_floored},
        {"trace",
         {{"loglik_by_iter", s1.trace.loglik_by_iter},
          {"iterations", s1.trace.iterations},
          {"stop_reason", std::string(to_string(s1.trace.stop_reason))}}},
    };
    json regimes = json::array();
    for (std::size_t i = 0; i < r.stage2.regimes.size(); ++i) {
        const auto& g = r.stage2.regimes[i];
        regimes.push_back({
            {"regime", i},
            {"count", g.count},
            {"params", detail::nig_json(g.fit.params)},
            {"loglik", g.fit.loglik},
            {"iterations", g.fit.iterations},
            {"converged", g.fit.converged},
            {"init", detail::nig_json(g.fit.init_used)},
            {"init_loglik", g.fit.init_loglik},
            {"near_gaussian", g.near_gaussian},
            {"moments_adjusted", g.moments_adjusted},
        });
    }
    return {
        {"toolkit", {{"name", "regime-levy"}, {"version", r.provenance.toolkit_version}}},
        {"provenance",
         {{"input_path", r.provenance.input_path},
          {"input_sha256", r.provenance.input_sha256},
          {"config", r.provenance.config}}},
        {"stage1", stage1},
        {"stage2",
         {{"threshold", r.stage2.threshold},
          {"unclassified", r.stage2.unclassified},
          {"regimes", regimes}}},
        {"diagnostics",
         {{"rcm", r.diagnostics.rcm},
          {"p_indicator", r.diagnostics.p_indicator},
          {"p_error", r.diagnostics.p_error}}},
        {"files", r.files},
    };
}

inline CalibrationReport report_from_json(const nlohmann::json& j) {
    try {
        CalibrationReport r;
        r.provenance.toolkit_version = j.at("toolkit").at("version").get<std::string>();
        const auto& prov = j.at("provenance");
        r.provenance.input_path = prov.at("input_path").get<std::string>();
        r.provenance.input_sha256 = prov.at("input_sha256").get<std::string>();
        r.provenance.config = prov.at("config");

        const auto& s1 = j.at("stage1");
        r.stage1.model.kappa = detail::json_vector(s1.at("kappa"));
        r.stage1.model.theta = detail::json_vector(s1.at("theta"));
        r.stage1.model.sigma = detail::json_vector(s1.at("sigma"));
        r.stage1.model.Pi = detail::json_matrix(s1.at("transition_matrix"));
        r.stage1.stationary = detail::json_vector(s1.at("stationary_distribution"));
        r.stage1.initial = detail::json_vector(s1.at("initial_distribution"));
        r.stage1.loglik = s1.at("loglik").get<double>();
        r.stage1.kappa_floored = s1.at("kappa_floored").get<bool>();
        const auto& tr = s1.at("trace");
        r.stage1.trace.loglik_by_iter = tr.at("loglik_by_iter").get<std::vector<double>>();
        r.stage1.trace.iterations = tr.at("iterations").get<std::size_t>();
        r.stage1.trace.stop_reason = tr.at("stop_reason").get<std::string>() == "tolerance"
                                         ? StopReason::tolerance
                                         : StopReason::max_iters;
        r.stage1.model.validate();

        const auto& s2 = j.at("stage2");
        r.stage2.threshold = s2.at("threshold").get<double>();
        r.stage2.unclassified = s2.at("unclassified").get<std::size_t>();
        for (const auto& g : s2.at("regimes")) {
            const auto params = detail::json_nig(g.at("params"));
            r.stage2.regimes.push_back(Stage2RegimeReport{
                g.at("count").get<std::size_t>(),
                NigFitResult{params, g.at("loglik").get<double>(),
                             g.at("iterations").get<std::size_t>(), g.at("converged").get<bool>(),
                             detail::json_nig(g.at("init")), g.at("init_loglik").get<double>()},
                g.at("near_gaussian").get<bool>(), g.at("moments_adjusted").get<bool>()});
        }
        const auto& d = j.at("diagnostics");
        r.diagnostics = {d.at("rcm").get<double>(), d.at("p_indicator").get<double>(),
                         d.at("p_error").get<double>()};
        r.files = j.at("files").get<std::map<std::string, std::string>>();
        return r;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCategory::io, std::string("malformed calibration report: ") + e.what());
    }
}

inline CalibrationReport load_report(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCategory::io, "cannot open report '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCategory::io, "report '" + path + "' is not valid JSON: " + e.what());
    }
    return report_from_json(j);
}

/// The regime chain and per-regime NIG laws recorded in a report.
inline RegimeNigModel regime_nig_model(const CalibrationReport& r) {
    RegimeNigModel m;
    m.Pi = r.stage1.model.Pi;
    for (const auto& g : r.stage2.regimes) m.laws.push_back(g.fit.params);
    m.validate();
    return m;
}

inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// `date,p_0,...,p_{K-1}` with full round-trip precision.
inline void write_probabilities_csv(std::ostream& out, const ProbabilityMatrix& p,
                                    const std::vector<Date>& dates) {
    require(dates.size() == static_cast<std::size_t>(p.values.rows()),
            "probability CSV: one date per row required");
    out << "date";
    for (Eigen::Index i = 0; i < p.values.cols(); ++i) out << ",p_" << i;
    out << '\n';
    for (Eigen::Index t = 0; t < p.values.rows(); ++t) {
        out << format_iso_date(dates[static_cast<std::size_t>(t)]);
        for (Eigen::Index i = 0; i < p.values.cols(); ++i)
            out << ',' << format_double(p.values(t, i));
        out << '\n';
    }
}

/// Reads every column whose header starts with "p_"; other columns are ignored.
inline ProbabilityMatrix read_probabilities_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) fail(ErrorCategory::io, "probability CSV is empty");
    std::vector<std::string> header;
    for (auto f : detail::split_line(line, ',')) header.emplace_back(f);
    std::vector<std::size_t> cols;
    for (std::size_t c = 0; c < header.size(); ++c)
        if (header[c].rfind("p_", 0) == 0) cols.push_back(c);
    if (cols.size() < 2) fail(ErrorCategory::io, "probability CSV needs at least two p_ columns");
    std::vector<std::vector<double>> rows;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        ++row;
        auto fields = detail::split_line(line, ',');
        std::vector<double> r;
        for (auto c : cols) {
            if (c >= fields.size())
                fail(ErrorCategory::io, "probability CSV row " + std::to_string(row) + " is short");
            double v = 0.0;
            auto f = fields[c];
            auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
            if (ec != std::errc{} || ptr != f.data() + f.size())
                fail(ErrorCategory::io,
                     "probability CSV row " + std::to_string(row) + ": bad number");
            r.push_back(v);
        }
        rows.push_back(std::move(r));
    }
    if (rows.empty()) fail(ErrorCategory::io, "probability CSV has no rows");
    ProbabilityMatrix p;
    p.kind = ProbabilityKind::smoothed;
    p.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t t = 0; t < rows.size(); ++t)
        for (std::size_t i = 0; i < cols.size(); ++i)
            p.values(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(i)) = rows[t][i];
    try {
        validate_probabilities(p, 1e-9);
    } catch (const Error& e) {
        fail(ErrorCategory::io, std::string("probability CSV: ") + e.what());
    }
    return p;
}

}  // namespace regime_levy
