#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "regime_levy/error.hpp"

namespace regime_levy {

namespace detail {

// Chebyshev expansions of 1/Gamma(1 +/- mu) combinations on |mu| <= 1/2 (Temme's method).
inline double chebyshev_eval(const double* c, int n, double x) {
    double d = 0.0, dd = 0.0;
    const double y2 = 2.0 * x;
    for (int j = n - 1; j > 0; --j) {
        const double sv = d;
        d = y2 * d - dd + c[j];
        dd = sv;
    }
    return x * d - dd + 0.5 * c[0];
}

struct TemmeGammas {
    double gam1, gam2, gampl, gammi;
};

inline TemmeGammas temme_gammas(double mu) {
    static constexpr std::array<double, 7> c1 = {
        -1.142022680371168e0, 6.5165112670737e-3, 3.087090173086e-4, -3.4706269649e-6,
        6.9437664e-9,         3.67795e-11,        -1.356e-13};
    static constexpr std::array<double, 8> c2 = {
        1.843740587300905e0, -7.68528408447867e-2, 1.2719271366546e-3, -4.9717367042e-6,
        -3.31261198e-8,      2.423096e-10,         -1.702e-13,         -1.49e-15};
    const double xx = 8.0 * mu * mu - 1.0;
    TemmeGammas g{};
    g.gam1 = chebyshev_eval(c1.data(), static_cast<int>(c1.size()), xx);
    g.gam2 = chebyshev_eval(c2.data(), static_cast<int>(c2.size()), xx);
    g.gampl = g.gam2 - mu * g.gam1;
    g.gammi = g.gam2 + mu * g.gam1;
    return g;
}

/// Returns (K_mu(x), K_{mu+1}(x)) scaled by exp(x), for |mu| <= 1/2.
inline std::pair<double, double> bessel_k_pair_scaled(double mu, double x) {
    constexpr double eps = 1e-17;
    constexpr int max_iter = 100000;
    const double mu2 = mu * mu;
    const double xi = 1.0 / x;
    if (x < 2.0) {
        // Temme's series.
        const double x2 = 0.5 * x;
        const double pimu = std::numbers::pi * mu;
        const double fact = std::abs(pimu) < 1e-300 ? 1.0 : pimu / std::sin(pimu);
        double d = -std::log(x2);
        double e = mu * d;
        const double fact2 = std::abs(e) < 1e-300 ? 1.0 : std::sinh(e) / e;
        const auto g = temme_gammas(mu);
        double ff = fact * (g.gam1 * std::cosh(e) + g.gam2 * fact2 * d);
        double sum = ff;
        e = std::exp(e);
        double p = 0.5 * e / g.gampl;
        double q = 0.5 / (e * g.gammi);
        double c = 1.0;
        d = x2 * x2;
        double sum1 = p;
        for (int i = 1; i <= max_iter; ++i) {
            const double di = i;
            ff = (di * ff + p + q) / (di * di - mu2);
            c *= d / di;
            p /= di - mu;
            q /= di + mu;
            const double del = c * ff;
            sum += del;
            sum1 += c * (p - di * ff);
            if (std::abs(del) < std::abs(sum) * eps) break;
        }
        const double scale = std::exp(x);
        return {sum * scale, sum1 * 2.0 * xi * scale};
    }
    // Steed's continued fraction (CF2), evaluated directly in scaled form.
    double b = 2.0 * (1.0 + x);
    double d = 1.0 / b;
    double h = d, delh = d;
    double q1 = 0.0, q2 = 1.0;
    const double a1 = 0.25 - mu2;
    double q = a1, c = a1;
    double a = -a1;
    double s = 1.0 + q * delh;
    for (int i = 2; i <= max_iter; ++i) {
        a -= 2.0 * (i - 1);
        c = -a * c / i;
        const double qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        const double dels = q * delh;
        s += dels;
        if (std::abs(dels / s) < eps) break;
    }
    h = a1 * h;
    const double kmu = std::sqrt(std::numbers::pi / (2.0 * x)) / s;
    const double k1 = kmu * (mu + x + 0.5 - h) * xi;
    return {kmu, k1};
}

}  // namespace detail

/// exp(z) * K_v(z): the modified Bessel function of the second kind with the
/// exponential decay factored out, finite for every z > 0.
inline double bessel_k_scaled(double v, double z) {
    if (!(z > 0.0) || !std::isfinite(z))
        fail(ErrorCategory::config, "bessel_k: argument must be positive and finite");
    require(v >= 0.0 && std::isfinite(v), "bessel_k: order must be non-negative");
    const int nl = static_cast<int>(v + 0.5);
    const double mu = v - nl;
    auto [kmu, k1] = detail::bessel_k_pair_scaled(mu, z);
    const double xi2 = 2.0 / z;
    // Upward recurrence K_{m+1} = K_{m-1} + (2m/z) K_m is stable for K.
    for (int i = 1; i <= nl; ++i) {
        const double next = (mu + i) * xi2 * k1 + kmu;
        kmu = k1;
        k1 = next;
    }
    return kmu;
}

/// K_v(z) for v >= 0, z > 0. Underflows to 0 for very large z.
inline double bessel_k(double v, double z) {
    const double scaled = bessel_k_scaled(v, z);
    return scaled * std::exp(-z);
}

inline double log_bessel_k(double v, double z) {
    return std::log(bessel_k_scaled(v, z)) - z;
}

}  // namespace regime_levy
