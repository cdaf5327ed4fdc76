#pragma once

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "regime_levy/error.hpp"

namespace regime_levy {

using Date = std::chrono::sys_days;

/// Parses an ISO-8601 calendar day. Anything after the day ("T12:00", " 16:00:00")
/// is truncated.
inline std::optional<Date> parse_iso_date(std::string_view s) {
    auto trim = s.find_first_not_of(" \t\"");
    if (trim == std::string_view::npos) return std::nullopt;
    s.remove_prefix(trim);
    if (s.size() < 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
    if (s.size() > 10 && s[10] != 'T' && s[10] != ' ' && s[10] != '"') return std::nullopt;
    int y = 0;
    unsigned m = 0, d = 0;
    auto ok = [](std::from_chars_result r, const char* end) {
        return r.ec == std::errc{} && r.ptr == end;
    };
    if (!ok(std::from_chars(s.data(), s.data() + 4, y), s.data() + 4)) return std::nullopt;
    if (!ok(std::from_chars(s.data() + 5, s.data() + 7, m), s.data() + 7)) return std::nullopt;
    if (!ok(std::from_chars(s.data() + 8, s.data() + 10, d), s.data() + 10)) return std::nullopt;
    std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m},
                                    std::chrono::day{d}};
    if (!ymd.ok()) return std::nullopt;
    return Date{ymd};
}

inline std::string format_iso_date(Date d) {
    std::chrono::year_month_day ymd{d};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

struct PriceObservation {
    Date date;
    double close;
};

/// Daily closing levels. Dates strictly increase, closes are positive, length >= 2.
class PriceSeries {
public:
    explicit PriceSeries(std::vector<PriceObservation> obs) : obs_(std::move(obs)) {
        require(obs_.size() >= 2, "price series needs at least 2 observations");
        for (std::size_t i = 0; i < obs_.size(); ++i) {
            require(std::isfinite(obs_[i].close) && obs_[i].close > 0.0,
                    "non-positive price at row " + std::to_string(i + 1));
            if (i > 0 && !(obs_[i - 1].date < obs_[i].date))
                fail(ErrorCategory::config,
                     "non-monotone dates at row " + std::to_string(i + 1));
        }
    }

    std::size_t size() const noexcept { return obs_.size(); }
    const PriceObservation& operator[](std::size_t i) const { return obs_[i]; }
    const std::vector<PriceObservation>& observations() const noexcept { return obs_; }

private:
    std::vector<PriceObservation> obs_;
};

/// Log returns r_t = ln(close_t / close_{t-1}), dated by the later close.
struct ReturnSeries {
    std::vector<Date> dates;
    std::vector<double> values;
    std::string source_id;

    std::size_t size() const noexcept { return values.size(); }
};

struct EmpiricalMoments {
    double mean = 0.0;
    double variance = 0.0;
    std::optional<double> skewness;         // empty when variance == 0
    std::optional<double> excess_kurtosis;  // empty when variance == 0
    std::size_t n = 0;
};

struct CsvFormat {
    char delimiter = ',';
    std::string date_col = "date";
    std::string price_col = "close";
};

namespace detail {

inline std::vector<std::string_view> split_line(std::string_view line, char delim) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        auto pos = line.find(delim, start);
        auto field = line.substr(start, pos == std::string_view::npos ? pos : pos - start);
        while (!field.empty() && (field.front() == ' ' || field.front() == '\t' ||
                                  field.front() == '"'))
            field.remove_prefix(1);
        while (!field.empty() && (field.back() == ' ' || field.back() == '\t' ||
                                  field.back() == '"' || field.back() == '\r'))
            field.remove_suffix(1);
        out.push_back(field);
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

inline std::size_t find_column(const std::vector<std::string_view>& header,
                               const std::string& name) {
    auto it = std::find(header.begin(), header.end(), std::string_view(name));
    if (it == header.end()) fail(ErrorCategory::io, "column '" + name + "' not found in header");
    return static_cast<std::size_t>(it - header.begin());
}

}  // namespace detail

/// Reads a delimited price file with a header row. Rows are numbered from 1
/// (the first data row); every defect is reported, never skipped.
inline PriceSeries parse_prices(std::istream& in, const CsvFormat& fmt) {
    std::string line;
    if (!std::getline(in, line)) fail(ErrorCategory::io, "empty price file (header row required)");
    auto header = detail::split_line(line, fmt.delimiter);
    std::vector<std::string> header_copy(header.begin(), header.end());
    std::vector<std::string_view> names(header_copy.begin(), header_copy.end());
    const auto date_idx = detail::find_column(names, fmt.date_col);
    const auto price_idx = detail::find_column(names, fmt.price_col);

    std::vector<PriceObservation> obs;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        ++row;
        const auto where = "row " + std::to_string(row);
        auto fields = detail::split_line(line, fmt.delimiter);
        if (fields.size() <= std::max(date_idx, price_idx))
            fail(ErrorCategory::io, where + ": missing columns");
        auto date = parse_iso_date(fields[date_idx]);
        if (!date) fail(ErrorCategory::io, where + ": unparseable date '" +
                                              std::string(fields[date_idx]) + "'");
        auto pf = fields[price_idx];
        if (pf.empty()) fail(ErrorCategory::io, where + ": missing price");
        double close = 0.0;
        auto [ptr, ec] = std::from_chars(pf.data(), pf.data() + pf.size(), close);
        if (ec != std::errc{} || ptr != pf.data() + pf.size())
            fail(ErrorCategory::io, where + ": unparseable price '" + std::string(pf) + "'");
        if (!std::isfinite(close) || close <= 0.0)
            fail(ErrorCategory::config, where + ": non-positive price");
        if (!obs.empty() && !(obs.back().date < *date))
            fail(ErrorCategory::config, where + ": non-monotone dates");
        obs.push_back({*date, close});
    }
    return PriceSeries(std::move(obs));
}

inline PriceSeries load_prices(const std::string& path, const CsvFormat& fmt = {}) {
    std::ifstream in(path);
    if (!in) fail(ErrorCategory::io, "cannot open price file '" + path + "'");
    return parse_prices(in, fmt);
}

inline ReturnSeries to_log_returns(const PriceSeries& p, std::string source_id = {}) {
    ReturnSeries r;
    r.source_id = std::move(source_id);
    r.dates.reserve(p.size() - 1);
    r.values.reserve(p.size() - 1);
    for (std::size_t i = 1; i < p.size(); ++i) {
        r.dates.push_back(p[i].date);
        r.values.push_back(std::log(p[i].close / p[i - 1].close));
    }
    return r;
}

inline EmpiricalMoments empirical_moments(const std::vector<double>& x) {
    const auto n = x.size();
    require(n >= 4, "empirical moments need at least 4 observations, got " + std::to_string(n));
    EmpiricalMoments m;
    m.n = n;
    double sum = 0.0;
    for (double v : x) sum += v;
    m.mean = sum / static_cast<double>(n);
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double v : x) {
        const double d = v - m.mean;
        const double d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m.variance = m2 / static_cast<double>(n - 1);
    m2 /= static_cast<double>(n);
    m3 /= static_cast<double>(n);
    m4 /= static_cast<double>(n);
    // Relative to the squared mean, a spread at rounding level is a constant series.
    if (m2 > 1e-28 * (m.mean * m.mean) && m2 > 0.0) {
        m.skewness = m3 / std::pow(m2, 1.5);
        m.excess_kurtosis = m4 / (m2 * m2) - 3.0;
    } else {
        m.variance = 0.0;
    }
    return m;
}

inline EmpiricalMoments empirical_moments(const ReturnSeries& r) {
    return empirical_moments(r.values);
}

inline void write_returns_csv(std::ostream& out, const ReturnSeries& r) {
    out << "date,log_return\n";
    char buf[64];
    for (std::size_t i = 0; i < r.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", r.values[i]);
        out << format_iso_date(r.dates[i]) << ',' << buf << '\n';
    }
}

}  // namespace regime_levy
