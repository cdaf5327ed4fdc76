#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "regime_levy/data_ingest.hpp"
#include "support/oracles.hpp"

using namespace regime_levy;
using namespace std::chrono;

namespace {

PriceSeries parse(const std::string& text, const CsvFormat& fmt = {}) {
    std::istringstream in(text);
    return parse_prices(in, fmt);
}

Error error_of(const std::string& text) {
    try {
        parse(text);
    } catch (const Error& e) {
        return e;
    }
    ADD_FAILURE() << "no error raised for:\n" << text;
    return Error(ErrorCategory::config, "");
}

PriceSeries daily(const std::vector<double>& closes) {
    std::vector<PriceObservation> obs;
    Date d = sys_days{year{2000} / January / 3};
    for (double c : closes) {
        obs.push_back({d, c});
        d += days{1};
    }
    return PriceSeries(std::move(obs));
}

}  // namespace

TEST(ParsePrices, ThreeRows) {
    auto p = parse("date,close\n2021-01-04,100\n2021-01-05,110\n2021-01-06,99\n");
    ASSERT_EQ(p.size(), 3u);
    EXPECT_EQ(p[0].close, 100.0);
    EXPECT_EQ(p[2].close, 99.0);
    EXPECT_EQ(format_iso_date(p[1].date), "2021-01-05");
}

TEST(ParsePrices, DuplicateDate) {
    auto e = error_of("date,close\n2021-01-04,100\n2021-01-04,101\n");
    EXPECT_NE(std::string(e.what()).find("non-monotone dates"), std::string::npos) << e.what();
    EXPECT_EQ(e.category(), ErrorCategory::config);
}

TEST(ParsePrices, DecreasingDate) {
    auto e = error_of("date,close\n2021-01-05,100\n2021-01-04,101\n");
    EXPECT_NE(std::string(e.what()).find("non-monotone dates"), std::string::npos);
}

TEST(ParsePrices, ZeroPriceNamesRow) {
    std::string csv = "date,close\n";
    for (int i = 1; i <= 9; ++i)
        csv += "2021-02-0" + std::to_string(i) + "," + (i == 7 ? "0" : "100") + "\n";
    auto e = error_of(csv);
    EXPECT_NE(std::string(e.what()).find("row 7"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("non-positive price"), std::string::npos);
}

TEST(ParsePrices, NegativePrice) {
    auto e = error_of("date,close\n2021-01-04,100\n2021-01-05,-3\n");
    EXPECT_NE(std::string(e.what()).find("row 2"), std::string::npos);
}

TEST(ParsePrices, MissingPrice) {
    auto e = error_of("date,close\n2021-01-04,100\n2021-01-05,\n");
    EXPECT_NE(std::string(e.what()).find("row 2: missing price"), std::string::npos) << e.what();
    EXPECT_EQ(e.category(), ErrorCategory::io);
}

TEST(ParsePrices, MissingColumnAndBadDate) {
    EXPECT_THROW(parse("day,close\n2021-01-04,100\n2021-01-05,101\n"), Error);
    EXPECT_EQ(error_of("date,close\n2021-13-04,100\n2021-01-05,101\n").category(), ErrorCategory::io);
    EXPECT_EQ(error_of("").category(), ErrorCategory::io);
}

TEST(ParsePrices, SingleRowIsTooShort) {
    EXPECT_THROW(parse("date,close\n2021-01-04,100\n"), Error);
}

TEST(ParsePrices, CustomColumnsDelimiterAndTimestamps) {
    CsvFormat fmt;
    fmt.delimiter = ';';
    fmt.date_col = "Date";
    fmt.price_col = "Adj Close";
    auto p = parse(
        "Date;Open;Adj Close\n2021-01-04T16:00:00;1;100.5\n2021-01-05 16:00;1;101.25\r\n", fmt);
    ASSERT_EQ(p.size(), 2u);
    EXPECT_EQ(p[1].close, 101.25);
    EXPECT_EQ(format_iso_date(p[0].date), "2021-01-04");
}

TEST(LoadPrices, MissingFileIsIo) {
    try {
        load_prices("/nonexistent/prices.csv");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.category(), ErrorCategory::io);
    }
}

TEST(LogReturns, HandCase) {
    auto r = to_log_returns(daily({100, 110, 99}), "hand");
    ASSERT_EQ(r.size(), 2u);
    EXPECT_NEAR(r.values[0], 0.09531, 1e-5);
    EXPECT_NEAR(r.values[1], -0.10536, 1e-5);
    EXPECT_DOUBLE_EQ(r.values[0], std::log(1.1));
    EXPECT_EQ(r.source_id, "hand");
    EXPECT_EQ(r.dates[0], daily({100, 110, 99})[1].date);
}

TEST(LogReturns, ConstantAndEFold) {
    auto c = to_log_returns(daily({7, 7, 7}));
    EXPECT_EQ(c.values, (std::vector<double>{0.0, 0.0}));
    auto e = to_log_returns(daily({100, 100 * std::numbers::e}));
    EXPECT_NEAR(e.values[0], 1.0, 1e-15);
}

TEST(LogReturns, CumulativeSumRecomposesPrices) {
    std::mt19937_64 rng(11);
    std::lognormal_distribution<double> step(0.0, 0.05);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> closes{std::exp(3.0 + trial * 0.1)};
        for (int i = 0; i < 500; ++i) closes.push_back(closes.back() * step(rng));
        auto p = daily(closes);
        auto r = to_log_returns(p);
        ASSERT_EQ(r.size(), p.size() - 1);
        double cum = 0.0;
        for (std::size_t t = 0; t < r.size(); ++t) {
            cum += r.values[t];
            EXPECT_NEAR(std::exp(cum), p[t + 1].close / p[0].close,
                        1e-12 * p[t + 1].close / p[0].close);
        }
    }
}

TEST(EmpiricalMoments, SymmetricPairs) {
    std::vector<double> x;
    for (int i = 0; i < 500; ++i) {
        x.push_back(-1.0);
        x.push_back(1.0);
    }
    auto m = empirical_moments(x);
    EXPECT_EQ(m.mean, 0.0);
    ASSERT_TRUE(m.skewness);
    EXPECT_EQ(*m.skewness, 0.0);
    EXPECT_NEAR(m.variance, 1000.0 / 999.0, 1e-15);
    EXPECT_NEAR(*m.excess_kurtosis, -2.0, 1e-14);
    EXPECT_EQ(m.n, 1000u);
}

TEST(EmpiricalMoments, NormalSampleKurtosis) {
    const std::size_t n = 1'000'000;
    std::mt19937_64 rng(1234);
    std::normal_distribution<double> z;
    std::vector<double> x(n);
    for (auto& v : x) v = z(rng);
    auto m = empirical_moments(x);
    EXPECT_NEAR(*m.excess_kurtosis, 0.0, 3.0 * std::sqrt(24.0 / n));
    EXPECT_NEAR(*m.skewness, 0.0, 3.0 * std::sqrt(6.0 / n));
    const auto o = oracle::moments(x);
    EXPECT_NEAR(m.mean, o.mean, 1e-15);
    EXPECT_NEAR(m.variance, o.variance, 1e-13);
    EXPECT_NEAR(*m.excess_kurtosis, o.m4 / (o.m2 * o.m2) - 3.0, 1e-12);
}

TEST(EmpiricalMoments, ConstantSeriesIsUndefined) {
    auto m = empirical_moments(std::vector<double>(10, 0.37));
    EXPECT_EQ(m.variance, 0.0);
    EXPECT_FALSE(m.skewness);
    EXPECT_FALSE(m.excess_kurtosis);
}

TEST(EmpiricalMoments, TooShort) {
    EXPECT_THROW(empirical_moments(std::vector<double>{1, 2, 3}), Error);
}

TEST(EmpiricalMoments, OrderDoesNotMatter) {
    std::mt19937_64 rng(5);
    std::student_t_distribution<double> t(4.0);
    std::vector<double> x(5000);
    for (auto& v : x) v = t(rng);
    const auto a = empirical_moments(x);
    std::shuffle(x.begin(), x.end(), rng);
    const auto b = empirical_moments(x);
    EXPECT_NEAR(a.mean, b.mean, 1e-14);
    EXPECT_NEAR(a.variance, b.variance, 1e-12 * a.variance);
    EXPECT_NEAR(*a.skewness, *b.skewness, 1e-11);
    EXPECT_NEAR(*a.excess_kurtosis, *b.excess_kurtosis, 1e-10);
}

TEST(WriteReturns, RoundTripsValues) {
    auto r = to_log_returns(daily({100, 110, 99, 120.125}));
    std::ostringstream out;
    write_returns_csv(out, r);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "date,log_return");
    for (std::size_t i = 0; i < r.size(); ++i) {
        std::getline(in, line);
        const auto comma = line.find(',');
        EXPECT_EQ(line.substr(0, comma), format_iso_date(r.dates[i]));
        EXPECT_EQ(std::stod(line.substr(comma + 1)), r.values[i]);
    }
}
