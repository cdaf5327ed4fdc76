#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "regime_levy/bessel.hpp"
#include "regime_levy/data_ingest.hpp"
#include "regime_levy/error.hpp"

namespace regime_levy {

/// Normal-Inverse-Gaussian parameters: tail heaviness alpha, skewness beta,
/// scale delta and location mu. Construction enforces alpha > |beta|, delta > 0.
class NigParams {
public:
    NigParams(double alpha, double beta, double delta, double mu)
        : alpha_(alpha), beta_(beta), delta_(delta), mu_(mu) {
        if (!(std::isfinite(alpha) && std::isfinite(beta) && std::isfinite(delta) &&
              std::isfinite(mu)))
            fail(ErrorCategory::config, "NIG parameters must be finite");
        if (!(alpha > std::abs(beta)))
            fail(ErrorCategory::config, "NIG parameters require alpha > |beta|");
        if (!(delta > 0.0)) fail(ErrorCategory::config, "NIG parameters require delta > 0");
    }

    double alpha() const noexcept { return alpha_; }
    double beta() const noexcept { return beta_; }
    double delta() const noexcept { return delta_; }
    double mu() const noexcept { return mu_; }
    /// sqrt(alpha^2 - beta^2), computed without cancellation.
    double gamma() const noexcept { return std::sqrt((alpha_ - beta_) * (alpha_ + beta_)); }

    friend bool operator==(const NigParams&, const NigParams&) = default;

private:
    double alpha_, beta_, delta_, mu_;
};

inline double nig_log_pdf(double x, const NigParams& p) {
    const double dx = x - p.mu();
    const double q = std::hypot(p.delta(), dx);
    const double z = p.alpha() * q;
    // K_1(z) = scaled * exp(-z); fold exp(-z) into the exponent.
    return std::log(p.alpha() * p.delta() / std::numbers::pi) - std::log(q) +
           std::log(bessel_k_scaled(1.0, z)) - z + p.delta() * p.gamma() + p.beta() * dx;
}

/// Density exp(delta*gamma + beta*(x-mu)) * alpha*delta*K_1(alpha*q) / (pi*q),
/// q = sqrt(delta^2 + (x-mu)^2).
inline double nig_pdf(double x, const NigParams& p) { return std::exp(nig_log_pdf(x, p)); }

inline double nig_log_likelihood(const std::vector<double>& data, const NigParams& p) {
    double ll = 0.0;
    for (double x : data) ll += nig_log_pdf(x, p);
    return ll;
}

/// Log moment generating function; defined for |beta + z| < alpha.
inline double nig_log_cumulant(double z, const NigParams& p) {
    const double b = p.beta() + z;
    if (!(std::abs(b) < p.alpha()))
        fail(ErrorCategory::config, "nig_log_cumulant: requires |beta + z| < alpha");
    const double inner = std::sqrt((p.alpha() - b) * (p.alpha() + b));
    return p.mu() * z + p.delta() * (p.gamma() - inner);
}

inline double nig_mean(const NigParams& p) {
    return p.mu() + p.delta() * p.beta() / p.gamma();
}

inline double nig_variance(const NigParams& p) {
    const double g = p.gamma();
    return p.delta() * p.alpha() * p.alpha() / (g * g * g);
}

inline double nig_skewness(const NigParams& p) {
    return 3.0 * p.beta() / (p.alpha() * std::sqrt(p.delta() * p.gamma()));
}

inline double nig_excess_kurtosis(const NigParams& p) {
    const double rho = p.beta() / p.alpha();
    return 3.0 * (1.0 + 4.0 * rho * rho) / (p.delta() * p.gamma());
}

/// Density of the Levy measure, exp(beta x) * delta*alpha/(pi |x|) * K_1(alpha |x|).
inline double nig_levy_density(double x, const NigParams& p) {
    if (x == 0.0 || !std::isfinite(x))
        fail(ErrorCategory::config, "nig_levy_density: the Levy measure is singular at 0");
    const double ax = std::abs(x);
    const double z = p.alpha() * ax;
    return std::exp(p.beta() * x - z + std::log(p.delta() * p.alpha() / (std::numbers::pi * ax)) +
                    std::log(bessel_k_scaled(1.0, z)));
}

/// Inverse Gaussian draw with mean m and shape lambda (Michael, Schucany and Haas).
template <class Urbg>
double sample_inverse_gaussian(double m, double lambda, Urbg& rng) {
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unif;
    const double n = normal(rng);
    const double y = n * n;
    const double my = m * y;
    const double x = m + m * my / (2.0 * lambda) -
                     (m / (2.0 * lambda)) * std::sqrt(4.0 * m * lambda * y + my * my);
    if (unif(rng) <= m / (m + x)) return x;
    return m * m / x;
}

/// One NIG draw as a normal variance-mean mixture: V ~ IG(delta/gamma, delta^2),
/// X = mu + beta V + sqrt(V) Z.
template <class Urbg>
double sample_nig(const NigParams& p, Urbg& rng) {
    const double v = sample_inverse_gaussian(p.delta() / p.gamma(), p.delta() * p.delta(), rng);
    std::normal_distribution<double> normal;
    return p.mu() + p.beta() * v + std::sqrt(v) * normal(rng);
}

template <class Urbg>
std::vector<double> nig_sample(const NigParams& p, std::size_t n, Urbg& rng) {
    require(n >= 1, "nig_sample: n must be at least 1");
    std::vector<double> out(n);
    for (auto& x : out) x = sample_nig(p, rng);
    return out;
}

inline std::vector<double> nig_sample(const NigParams& p, std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return nig_sample(p, n, rng);
}

struct MomFit {
    NigParams params;
    bool near_gaussian = false;  // excess kurtosis below the near-Gaussian cutoff
    bool adjusted = false;       // input moments were moved into the feasible region
};

enum class MomPolicy { strict, shrink_to_feasible };

struct MomOptions {
    MomPolicy policy = MomPolicy::strict;
    double feasibility_margin = 1e-6;
    /// Excess kurtosis used when the sample has none (fallback policy only).
    double kurtosis_floor = 1e-3;
    double near_gaussian_kurtosis = 1e-2;
};

/// Inverts the closed-form mean, variance, skewness and excess kurtosis.
/// With rho = beta/alpha and zeta = delta*gamma:
///   skew^2 / kurt = 3 rho^2 / (1 + 4 rho^2),  kurt = 3 (1 + 4 rho^2) / zeta.
inline MomFit nig_fit_mom(const EmpiricalMoments& m, const MomOptions& opt = {}) {
    if (!(m.variance > 0.0) || !m.skewness || !m.excess_kurtosis)
        fail(ErrorCategory::degenerate, "nig_fit_mom: variance must be positive");
    double skew = *m.skewness;
    double kurt = *m.excess_kurtosis;
    bool adjusted = false;
    if (!(3.0 * kurt > 5.0 * skew * skew)) {
        if (opt.policy == MomPolicy::strict)
            fail(ErrorCategory::degenerate,
                 "nig_fit_mom: infeasible moments (need 3*kurtosis > 5*skewness^2)");
        adjusted = true;
        if (kurt < opt.kurtosis_floor) kurt = opt.kurtosis_floor;
        // Shrink |skew| toward 0 until 3 kurt = 5 skew^2 + margin.
        const double target = (3.0 * kurt - opt.feasibility_margin) / 5.0;
        if (skew * skew > target) skew = std::copysign(std::sqrt(std::max(target, 0.0)), skew);
    }
    const double rho2 = skew * skew / (3.0 * kurt - 4.0 * skew * skew);
    const double zeta = 3.0 * (1.0 + 4.0 * rho2) / kurt;
    const double one_minus = 1.0 - rho2;
    const double alpha = std::sqrt(zeta / m.variance) / one_minus;
    const double beta = std::copysign(std::sqrt(rho2), skew) * alpha;
    const double gamma = alpha * std::sqrt(one_minus);
    const double delta = zeta / gamma;
    const double mu = m.mean - delta * beta / gamma;
    return MomFit{NigParams(alpha, beta, delta, mu), kurt < opt.near_gaussian_kurtosis, adjusted};
}

}  // namespace regime_levy
