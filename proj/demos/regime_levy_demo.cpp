// Simulates two years of calm/turbulent returns, recovers the regimes with EM
// and fits a NIG law to each of them.
#include <cstdio>
#include <random>

#include "regime_levy/regime_levy.hpp"

using namespace regime_levy;

int main() {
    RegimeNigModel truth;
    truth.Pi.resize(2, 2);
    truth.Pi << 0.98, 0.02, 0.05, 0.95;
    truth.laws = {NigParams(150.0, -16.0, 0.012, 0.0013), NigParams(42.0, 0.3, 0.027, -0.00015)};

    std::mt19937_64 rng(7);
    const auto path = sample_regime_path(truth.Pi, 2000, rng);
    std::vector<double> returns;
    for (auto z : path) returns.push_back(sample_nig(truth.laws[static_cast<std::size_t>(z)], rng));

    auto em = em_estimate(returns, default_initial_model(returns, 2));
    std::printf("EM: %zu sweeps, loglik %.3f\n", em.trace.iterations,
                em.trace.loglik_by_iter.back());
    for (Eigen::Index i = 0; i < 2; ++i)
        std::printf("  regime %ld: sigma %.5f, stay %.3f\n", static_cast<long>(i),
                    em.model.sigma(i), em.model.Pi(i, i));

    const auto fits = fit_per_regime(returns, assign_regimes(em.smoothed));
    for (std::size_t i = 0; i < fits.fits.size(); ++i) {
        const auto& p = fits.fits[i].fit.params;
        std::printf("  NIG %zu (n=%zu): alpha %.2f beta %.3f delta %.5f mu %.5f\n", i,
                    fits.counts[i], p.alpha(), p.beta(), p.delta(), p.mu());
    }
    const auto d = diagnose(em.smoothed);
    std::printf("RCM %.2f, p10 indicator %.2f%%\n", d.rcm, d.p_indicator);
}
