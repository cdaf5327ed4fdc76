#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "regime_levy/error.hpp"
#include "regime_levy/nelder_mead.hpp"
#include "regime_levy/nig.hpp"

namespace regime_levy {

struct NigFitResult {
    NigParams params;
    double loglik;
    std::size_t iterations;
    bool converged;
    NigParams init_used;
    double init_loglik;
};

namespace detail {

/// Unconstrained coordinates, scaled by the sample location/spread so that the
/// simplex moves in O(1) steps along every axis:
///   alpha = |beta| + exp(u0)/s,  beta = u1/s,  delta = s exp(u2),  mu = c + s u3.
struct NigCoordinates {
    double center;
    double scale;

    std::array<double, 4> to_unconstrained(const NigParams& p) const {
        return {std::log((p.alpha() - std::abs(p.beta())) * scale), p.beta() * scale,
                std::log(p.delta() / scale), (p.mu() - center) / scale};
    }

    NigParams from_unconstrained(const std::array<double, 4>& u) const {
        const double beta = u[1] / scale;
        return NigParams(std::abs(beta) + std::exp(u[0]) / scale, beta, scale * std::exp(u[2]),
                         center + scale * u[3]);
    }
};

}  // namespace detail

/// Maximum-likelihood NIG fit started from `init` (typically the method-of-moments
/// estimate). Non-convergence is reported through `converged`, never thrown.
inline NigFitResult nig_fit_mle(const std::vector<double>& data, const NigParams& init,
                                const NelderMeadOptions& cfg = {}) {
    require(data.size() >= 8, "nig_fit_mle: need at least 8 observations, got " +
                                   std::to_string(data.size()));
    double mean = 0.0;
    for (double x : data) mean += x;
    mean /= static_cast<double>(data.size());
    double ss = 0.0;
    for (double x : data) ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / static_cast<double>(data.size() - 1));
    if (!(sd > 0.0)) fail(ErrorCategory::degenerate, "nig_fit_mle: data has zero spread");

    const detail::NigCoordinates coords{mean, sd};
    const double n = static_cast<double>(data.size());
    auto objective = [&](const std::array<double, 4>& u) {
        const double a = std::exp(u[0]);
        const double d = std::exp(u[2]);
        if (!(a > 0.0) || !(d > 0.0) || !std::isfinite(a) || !std::isfinite(d) ||
            !std::isfinite(u[1]) || !std::isfinite(u[3]))
            return std::numeric_limits<double>::infinity();
        return -nig_log_likelihood(data, coords.from_unconstrained(u)) / n;
    };

    const auto start = coords.to_unconstrained(init);
    const NigParams start_params = coords.from_unconstrained(start);
    const double init_ll = nig_log_likelihood(data, start_params);
    auto nm = nelder_mead<4>(objective, start, cfg);
    const NigParams best = coords.from_unconstrained(nm.x);
    const double ll = nig_log_likelihood(data, best);
    return NigFitResult{best, ll, nm.iterations, nm.converged && std::isfinite(ll), init, init_ll};
}

}  // namespace regime_levy
