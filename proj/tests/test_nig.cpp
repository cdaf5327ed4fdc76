#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "regime_levy/data_ingest.hpp"
#include "regime_levy/nig.hpp"
#include "support/oracles.hpp"

using namespace regime_levy;

namespace {

const NigParams kState1(150.0919, -16.2944, 0.011949, 0.001276);
const NigParams kState2(41.8416, 0.295358, 0.026838, -0.00015);

/// Tails decay like exp(-(alpha - |beta|) |x|), so the window scales with that rate.
double integrate_pdf(const NigParams& p, const std::function<double(double)>& g) {
    const double half = 50.0 / (p.alpha() - std::abs(p.beta())) + 40.0 * p.delta();
    auto f = [&](double x) { return g(x) * nig_pdf(x, p); };
    return oracle::integrate_panels(f, p.mu() - half, p.mu() + half, 400, 1e-13);
}

std::vector<NigParams> parameter_grid() {
    std::vector<NigParams> out{kState1, kState2, NigParams(1.0, 0.0, 1.0, 0.0),
                               NigParams(2.0, -0.4, 1.5, 0.3)};
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 12; ++i) {
        const double alpha = std::exp(std::log(0.5) + u(rng) * std::log(400.0));
        const double beta = (2.0 * u(rng) - 1.0) * 0.8 * alpha;
        const double delta = std::exp(std::log(0.005) + u(rng) * std::log(400.0));
        const double mu = (2.0 * u(rng) - 1.0) * delta;
        out.emplace_back(alpha, beta, delta, mu);
    }
    return out;
}

EmpiricalMoments analytic_moments(const NigParams& p) {
    EmpiricalMoments m;
    m.mean = nig_mean(p);
    m.variance = nig_variance(p);
    m.skewness = nig_skewness(p);
    m.excess_kurtosis = nig_excess_kurtosis(p);
    m.n = 1000;
    return m;
}

}  // namespace

TEST(NigParams, Validation) {
    EXPECT_THROW(NigParams(1.0, 1.0, 1.0, 0.0), Error);
    EXPECT_THROW(NigParams(1.0, -2.0, 1.0, 0.0), Error);
    EXPECT_THROW(NigParams(1.0, 0.0, 0.0, 0.0), Error);
    EXPECT_THROW(NigParams(1.0, 0.0, 1.0, std::numeric_limits<double>::quiet_NaN()), Error);
    EXPECT_NO_THROW(NigParams(1.0, 0.999, 1.0, 0.0));
}

TEST(NigPdf, SymmetricWhenBetaZero) {
    const NigParams p(3.0, 0.0, 0.7, 0.25);
    for (double d : {0.01, 0.3, 2.0, 10.0})
        EXPECT_NEAR(nig_pdf(p.mu() + d, p), nig_pdf(p.mu() - d, p), 1e-15 * nig_pdf(p.mu(), p));
}

TEST(NigPdf, UnitMass) {
    for (const auto& p : parameter_grid())
        EXPECT_NEAR(integrate_pdf(p, [](double) { return 1.0; }), 1.0, 1e-8)
            << p.alpha() << ' ' << p.beta() << ' ' << p.delta();
}

TEST(NigPdf, QuadratureMomentsMatchClosedForm) {
    for (const auto& p : parameter_grid()) {
        const double mean = integrate_pdf(p, [](double x) { return x; });
        const double var = integrate_pdf(p, [&](double x) { return (x - mean) * (x - mean); });
        const double scale = std::sqrt(nig_variance(p));
        EXPECT_NEAR(mean, nig_mean(p), 1e-8 * std::max(std::abs(nig_mean(p)), scale));
        EXPECT_NEAR(var, nig_variance(p), 1e-8 * nig_variance(p));
    }
}

TEST(NigPdf, State2ModeNearMu) {
    const double mode = oracle::golden_section_max([](double x) { return nig_log_pdf(x, kState2); },
                                                   -0.05, 0.05, 1e-10);
    EXPECT_NEAR(mode, kState2.mu(), 1e-4);
}

TEST(NigPdf, LogPdfFiniteFarInTails) {
    EXPECT_TRUE(std::isfinite(nig_log_pdf(5.0, kState1)));
    EXPECT_LT(nig_log_pdf(5.0, kState1), -500.0);
    EXPECT_NEAR(nig_log_pdf(0.01, kState2), std::log(nig_pdf(0.01, kState2)), 1e-12);
}

TEST(NigPdf, Loglikelihood) {
    const std::vector<double> x{0.01, -0.02, 0.0};
    double ll = 0.0;
    for (double v : x) ll += nig_log_pdf(v, kState2);
    EXPECT_DOUBLE_EQ(nig_log_likelihood(x, kState2), ll);
}

TEST(NigCumulant, HandValues) {
    EXPECT_EQ(nig_log_cumulant(0.0, kState1), 0.0);
    EXPECT_NEAR(nig_log_cumulant(0.5, NigParams(1.0, 0.0, 1.0, 0.0)), 0.1339746, 1e-7);
    EXPECT_THROW(nig_log_cumulant(1.0, NigParams(1.0, 0.0, 1.0, 0.0)), Error);
    EXPECT_THROW(nig_log_cumulant(-200.0, kState1), Error);
}

TEST(NigCumulant, DerivativesGiveMoments) {
    for (const auto& p : {kState1, kState2, NigParams(2.0, -0.4, 1.5, 0.3)}) {
        const double h = 1e-4 * p.alpha();
        const double d1 = (nig_log_cumulant(h, p) - nig_log_cumulant(-h, p)) / (2.0 * h);
        const double d2 =
            (nig_log_cumulant(h, p) - 2.0 * nig_log_cumulant(0.0, p) + nig_log_cumulant(-h, p)) /
            (h * h);
        EXPECT_NEAR(d1, nig_mean(p), 1e-6 * std::max(std::abs(nig_mean(p)), std::sqrt(nig_variance(p))));
        EXPECT_NEAR(d2, nig_variance(p), 1e-6 * nig_variance(p));
    }
    // Absolute agreement at the scale of the State-1 mean itself.
    const double h = 1e-2;
    const double d1 = (nig_log_cumulant(h, kState1) - nig_log_cumulant(-h, kState1)) / (2.0 * h);
    EXPECT_NEAR(d1, nig_mean(kState1), 1e-6);
}

TEST(NigMoments, TableValues) {
    const NigParams sym(5.0, 0.0, 0.2, 0.013);
    EXPECT_EQ(nig_mean(sym), 0.013);
    EXPECT_EQ(nig_skewness(sym), 0.0);

    const double mean1 = integrate_pdf(kState1, [](double x) { return x; });
    EXPECT_NEAR(mean1, -2.9e-5, 5e-7);
    EXPECT_NEAR(nig_mean(kState1), mean1, 1e-8 * std::sqrt(nig_variance(kState1)));

    const double m2 = nig_mean(kState2);
    const double var2 = integrate_pdf(kState2, [&](double x) { return (x - m2) * (x - m2); });
    EXPECT_NEAR(var2, 6.42e-4, 1e-6);
    EXPECT_NEAR(std::sqrt(var2), 0.0253, 5e-5);
    EXPECT_NEAR(nig_variance(kState2), var2, 1e-8 * var2);
}

TEST(NigMoments, SkewAndKurtosisMatchQuadrature) {
    for (const auto& p : {kState1, NigParams(2.0, -0.4, 1.5, 0.3)}) {
        const double m = nig_mean(p), s = std::sqrt(nig_variance(p));
        const double m3 = integrate_pdf(p, [&](double x) { return std::pow((x - m) / s, 3); });
        const double m4 = integrate_pdf(p, [&](double x) { return std::pow((x - m) / s, 4); });
        EXPECT_NEAR(m3, nig_skewness(p), 1e-7 * std::max(1.0, std::abs(nig_skewness(p))));
        EXPECT_NEAR(m4 - 3.0, nig_excess_kurtosis(p), 1e-7 * std::max(1.0, nig_excess_kurtosis(p)));
    }
}

TEST(NigLevy, SymmetryAndOrigin) {
    const NigParams p(3.0, 0.0, 0.5, 0.0);
    EXPECT_NEAR(nig_levy_density(0.4, p), nig_levy_density(-0.4, p), 1e-15);
    EXPECT_THROW(nig_levy_density(0.0, p), Error);
    EXPECT_GT(nig_levy_density(0.4, kState1), 0.0);
}

TEST(NigLevy, Integrability) {
    for (const auto& p : {kState1, kState2}) {
        auto f = [&](double x) { return nig_levy_density(x, p); };
        const double tail = oracle::integrate(f, 1.0, 2.0) + oracle::integrate(f, -2.0, -1.0);
        EXPECT_TRUE(std::isfinite(tail));
        EXPECT_GT(tail, 0.0);

        auto g = [&](double x) { return x * x * nig_levy_density(x, p); };
        std::vector<double> sweep;
        for (double eps : {1e-2, 1e-4, 1e-6, 1e-8, 1e-10})
            sweep.push_back(oracle::integrate(g, eps, 1.0, 1e-12));
        for (std::size_t i = 1; i < sweep.size(); ++i) {
            EXPECT_GE(sweep[i], sweep[i - 1]);
            EXPECT_LE(sweep[i], p.delta() / std::numbers::pi * 1.0 + 1e-12);
        }
        EXPECT_LT(sweep.back() - sweep[sweep.size() - 2], 1e-8);
    }
}

TEST(NigSample, State2MeanAndVariance) {
    const std::size_t n = 1'000'000;
    const auto x = nig_sample(kState2, n, 2024u);
    const auto m = oracle::moments(x);
    EXPECT_NEAR(m.mean, nig_mean(kState2), 3.0 * std::sqrt(nig_variance(kState2) / n));
    const double kurt = nig_excess_kurtosis(kState2);
    EXPECT_NEAR(m.variance, nig_variance(kState2),
                3.0 * nig_variance(kState2) * std::sqrt((kurt + 2.0) / n));
}

TEST(NigSample, Deterministic) {
    EXPECT_EQ(nig_sample(kState1, 1000, 9u), nig_sample(kState1, 1000, 9u));
    EXPECT_NE(nig_sample(kState1, 1000, 9u), nig_sample(kState1, 1000, 10u));
}

TEST(NigSample, SymmetricSkewness) {
    const std::size_t n = 1'000'000;
    const auto x = nig_sample(NigParams(3.0, 0.0, 0.5, 0.1), n, 31u);
    const auto m = oracle::moments(x);
    const double skew = m.m3 / std::pow(m.m2, 1.5);
    // Delta-method standard error of the sample skewness for a symmetric law.
    const double se =
        std::sqrt((m.m6 - 6.0 * m.m4 * m.m2 + 9.0 * m.m2 * m.m2 * m.m2) / (n * std::pow(m.m2, 3)));
    EXPECT_NEAR(skew, 0.0, 3.0 * se);
}

TEST(NigSample, ClosedUnderConvolution) {
    const std::size_t n = 100'000;
    const NigParams a(40.0, 3.0, 0.01, 0.001), b(40.0, 3.0, 0.025, -0.002);
    const NigParams sum(40.0, 3.0, 0.035, -0.001);
    std::mt19937_64 rng(4242);
    const auto xa = nig_sample(a, n, rng);
    const auto xb = nig_sample(b, n, rng);
    const auto direct = nig_sample(sum, n, rng);
    std::vector<double> conv(n);
    for (std::size_t i = 0; i < n; ++i) conv[i] = xa[i] + xb[i];
    EXPECT_LT(oracle::ks_statistic(conv, direct), oracle::ks_critical_1pct(n, n));
}

TEST(NigFitMom, SymmetricRoundTrip) {
    const NigParams p(12.0, 0.0, 0.4, -0.02);
    const auto fit = nig_fit_mom(analytic_moments(p));
    EXPECT_EQ(fit.params.beta(), 0.0);
    EXPECT_NEAR(fit.params.alpha(), p.alpha(), 1e-9 * p.alpha());
    EXPECT_NEAR(fit.params.delta(), p.delta(), 1e-9 * p.delta());
    EXPECT_NEAR(fit.params.mu(), p.mu(), 1e-9);
    EXPECT_FALSE(fit.adjusted);
}

TEST(NigFitMom, AsymmetricRoundTrip) {
    for (const auto& p : parameter_grid()) {
        const auto fit = nig_fit_mom(analytic_moments(p));
        EXPECT_NEAR(fit.params.alpha(), p.alpha(), 1e-8 * p.alpha());
        EXPECT_NEAR(fit.params.beta(), p.beta(), 1e-8 * p.alpha());
        EXPECT_NEAR(fit.params.delta(), p.delta(), 1e-8 * p.delta());
        EXPECT_NEAR(fit.params.mu(), p.mu(), 1e-8 * p.delta());
    }
}

TEST(NigFitMom, NearGaussian) {
    EmpiricalMoments m{0.0, 1.0, 0.0, 1e-4, 1000};
    const auto fit = nig_fit_mom(m);
    EXPECT_TRUE(fit.near_gaussian);
    EXPECT_GT(fit.params.alpha(), 100.0);
    EmpiricalMoments closer{0.0, 1.0, 0.0, 1e-8, 1000};
    EXPECT_GT(nig_fit_mom(closer).params.alpha(), fit.params.alpha());
}

TEST(NigFitMom, InfeasibleMoments) {
    EmpiricalMoments m{0.0, 1.0, 2.0, 1.0, 1000};
    try {
        nig_fit_mom(m);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.category(), ErrorCategory::degenerate);
    }
    EmpiricalMoments platy{0.0, 1.0, 0.0, -0.5, 1000};
    EXPECT_THROW(nig_fit_mom(platy), Error);
}

TEST(NigFitMom, ShrinkFallback) {
    const MomOptions opt{.policy = MomPolicy::shrink_to_feasible};
    EmpiricalMoments m{0.001, 4e-4, -2.0, 1.0, 1000};
    const auto fit = nig_fit_mom(m, opt);
    EXPECT_TRUE(fit.adjusted);
    EXPECT_LT(fit.params.beta(), 0.0);
    EXPECT_NEAR(nig_mean(fit.params), m.mean, 1e-9 * std::sqrt(m.variance));
    EXPECT_NEAR(nig_variance(fit.params), m.variance, 1e-9 * m.variance);
    EXPECT_NEAR(nig_excess_kurtosis(fit.params), 1.0, 1e-6);

    EmpiricalMoments platy{0.0, 1.0, 0.1, -0.5, 1000};
    const auto fp = nig_fit_mom(platy, opt);
    EXPECT_TRUE(fp.adjusted);
    EXPECT_TRUE(fp.near_gaussian);
    EXPECT_NEAR(nig_variance(fp.params), 1.0, 1e-9);
}

TEST(NigFitMom, ZeroVariance) {
    EmpiricalMoments m{1.0, 0.0, std::nullopt, std::nullopt, 10};
    EXPECT_THROW(nig_fit_mom(m), Error);
}
