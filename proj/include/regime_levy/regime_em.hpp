#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "regime_levy/error.hpp"
#include "regime_levy/regime_model.hpp"

namespace regime_levy {

inline double conditional_log_density(double x_t, double x_prev, Eigen::Index regime,
                                      const RegimeModel& m) {
    const double k = m.kappa(regime);
    const double s = m.sigma(regime);
    const double mean = k * m.theta(regime) + (1.0 - k) * x_prev;
    const double z = (x_t - mean) / s;
    return -0.5 * z * z - std::log(s) - 0.5 * std::log(2.0 * std::numbers::pi);
}

/// Gaussian density of x_t given x_{t-1} while in `regime`.
inline double conditional_density(double x_t, double x_prev, Eigen::Index regime,
                                  const RegimeModel& m) {
    require(regime >= 0 && regime < m.regimes(), "conditional_density: regime out of range");
    return std::exp(conditional_log_density(x_t, x_prev, regime, m));
}

/// Output of the forward pass. Row 0 holds the initial distribution in both
/// matrices: x_0 is the conditioning value of the first transition and carries no
/// likelihood term of its own.
struct FilterResult {
    ProbabilityMatrix filtered;
    ProbabilityMatrix predicted;
    double loglik = 0.0;
};

/// Hamilton filter with per-step normalization. Densities are combined in log
/// space relative to the largest one, so the step only fails when every regime
/// has zero predicted mass or the observation is non-finite.
inline FilterResult hamilton_filter(const std::vector<double>& x, const RegimeModel& m,
                                    const Eigen::VectorXd& initial) {
    const auto k = m.regimes();
    require(x.size() >= 2, "hamilton_filter: need at least 2 observations");
    require(initial.size() == k, "hamilton_filter: initial distribution has wrong size");
    require(std::abs(initial.sum() - 1.0) <= 1e-10 && initial.minCoeff() >= 0.0,
            "hamilton_filter: initial distribution must be a probability vector");
    const auto T = static_cast<Eigen::Index>(x.size());

    FilterResult r;
    r.filtered.kind = ProbabilityKind::filtered;
    r.predicted.kind = ProbabilityKind::predicted;
    r.filtered.values.resize(T, k);
    r.predicted.values.resize(T, k);
    r.filtered.values.row(0) = initial.transpose();
    r.predicted.values.row(0) = initial.transpose();

    Eigen::VectorXd logf(k), w(k);
    for (Eigen::Index t = 1; t < T; ++t) {
        const Eigen::VectorXd pred = m.Pi.transpose() * r.filtered.values.row(t - 1).transpose();
        r.predicted.values.row(t) = pred.transpose();
        double top = -std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < k; ++i) {
            logf(i) = conditional_log_density(x[t], x[t - 1], i, m);
            if (pred(i) > 0.0) top = std::max(top, logf(i));
        }
        double total = 0.0;
        if (std::isfinite(top)) {
            for (Eigen::Index i = 0; i < k; ++i)
                w(i) = pred(i) > 0.0 ? pred(i) * std::exp(logf(i) - top) : 0.0;
            total = w.sum();
        }
        if (!(total > 0.0) || !std::isfinite(total))
            fail(ErrorCategory::numerical,
                 "hamilton_filter: all regime densities vanish at t=" + std::to_string(t));
        r.filtered.values.row(t) = (w / total).transpose();
        r.loglik += top + std::log(total);
    }
    return r;
}

/// Kim's backward recursion. Terms whose predicted probability is zero are
/// dropped; the corresponding smoothed mass is necessarily zero as well.
inline ProbabilityMatrix kim_smoother(const FilterResult& f, const RegimeModel& m) {
    const auto T = f.filtered.values.rows();
    const auto k = f.filtered.values.cols();
    require(f.predicted.values.rows() == T && f.predicted.values.cols() == k && m.regimes() == k,
            "kim_smoother: filtered and predicted matrices do not match");
    ProbabilityMatrix s;
    s.kind = ProbabilityKind::smoothed;
    s.values.resize(T, k);
    s.values.row(T - 1) = f.filtered.values.row(T - 1);
    Eigen::VectorXd ratio(k);
    for (Eigen::Index t = T - 2; t >= 0; --t) {
        for (Eigen::Index j = 0; j < k; ++j) {
            const double p = f.predicted.values(t + 1, j);
            ratio(j) = p > 1e-300 ? s.values(t + 1, j) / p : 0.0;
        }
        Eigen::VectorXd row = f.filtered.values.row(t).transpose().cwiseProduct(m.Pi * ratio);
        const double total = row.sum();
        if (!(total > 0.0))
            fail(ErrorCategory::numerical,
                 "kim_smoother: zero smoothed mass at t=" + std::to_string(t));
        s.values.row(t) = (row / total).transpose();
    }
    return s;
}

struct EStep {
    FilterResult filter;
    ProbabilityMatrix smoothed;
    double loglik() const noexcept { return filter.loglik; }
};

inline EStep e_step(const std::vector<double>& x, const RegimeModel& m,
                    const Eigen::VectorXd& initial) {
    EStep e{hamilton_filter(x, m, initial), {}};
    e.smoothed = kim_smoother(e.filter, m);
    return e;
}

struct MStepResult {
    RegimeModel model;
    bool kappa_floored = false;
};

inline constexpr double kKappaFloor = 1e-6;
inline constexpr double kMinRegimeWeight = 1e-8;

namespace detail {

struct WeightedAr1 {
    double intercept;
    double slope;
    double weight;
};

/// Weighted least squares of x_t on (1, x_{t-1}) over t = 1..T-1.
template <class WeightFn>
WeightedAr1 weighted_ar1(const std::vector<double>& x, WeightFn&& weight, Eigen::Index regime) {
    double W = 0.0, mx = 0.0, my = 0.0;
    for (std::size_t t = 1; t < x.size(); ++t) {
        const double w = weight(t);
        W += w;
        mx += w * x[t - 1];
        my += w * x[t];
    }
    if (!(W >= kMinRegimeWeight))
        fail(ErrorCategory::degenerate,
             "regime " + std::to_string(regime) + " has vanishing total probability weight");
    mx /= W;
    my /= W;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t t = 1; t < x.size(); ++t) {
        const double w = weight(t);
        const double dx = x[t - 1] - mx;
        sxx += w * dx * dx;
        sxy += w * dx * (x[t] - my);
    }
    if (!(sxx > 0.0))
        fail(ErrorCategory::degenerate,
             "regime " + std::to_string(regime) + ": lagged values have no weighted spread");
    const double slope = sxy / sxx;
    return {my - slope * mx, slope, W};
}

}  // namespace detail

/// Closed-form maximization: per-regime weighted AR(1) regression for kappa and
/// theta, weighted residual variance for sigma, expected transition counts for Pi.
inline MStepResult m_step(const std::vector<double>& x, const EStep& e, const RegimeModel& prev) {
    const auto k = prev.regimes();
    const auto T = static_cast<Eigen::Index>(x.size());
    const auto& sm = e.smoothed.values;
    require(sm.rows() == T && sm.cols() == k, "m_step: smoothed probabilities do not match data");

    MStepResult out;
    RegimeModel& m = out.model;
    m.kappa.resize(k);
    m.theta.resize(k);
    m.sigma.resize(k);
    for (Eigen::Index i = 0; i < k; ++i) {
        auto weight = [&](std::size_t t) { return sm(static_cast<Eigen::Index>(t), i); };
        const auto fit = detail::weighted_ar1(x, weight, i);
        double kappa = 1.0 - fit.slope;
        if (std::abs(kappa) < kKappaFloor) {
            kappa = kappa < 0.0 ? -kKappaFloor : kKappaFloor;
            out.kappa_floored = true;
        }
        const double slope = 1.0 - kappa;
        double sse = 0.0;
        for (std::size_t t = 1; t < x.size(); ++t) {
            const double r = x[t] - fit.intercept - slope * x[t - 1];
            sse += weight(t) * r * r;
        }
        const double var = sse / fit.weight;
        if (!(var > 0.0))
            fail(ErrorCategory::degenerate,
                 "regime " + std::to_string(i) + " has zero residual variance");
        m.kappa(i) = kappa;
        m.theta(i) = fit.intercept / kappa;
        m.sigma(i) = std::sqrt(var);
    }

    // Expected transitions xi_t(i,j) = filtered_{t-1}(i) Pi_ij smoothed_t(j) / predicted_t(j).
    const auto& filt = e.filter.filtered.values;
    const auto& pred = e.filter.predicted.values;
    Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(k, k);
    Eigen::VectorXd ratio(k);
    for (Eigen::Index t = 1; t < T; ++t) {
        for (Eigen::Index j = 0; j < k; ++j)
            ratio(j) = pred(t, j) > 1e-300 ? sm(t, j) / pred(t, j) : 0.0;
        for (Eigen::Index i = 0; i < k; ++i)
            for (Eigen::Index j = 0; j < k; ++j)
                counts(i, j) += filt(t - 1, i) * prev.Pi(i, j) * ratio(j);
    }
    m.Pi.resize(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
        const double row = counts.row(i).sum();
        if (!(row > 0.0))
            fail(ErrorCategory::degenerate,
                 "regime " + std::to_string(i) + " is never left or entered");
        m.Pi.row(i) = counts.row(i) / row;
    }
    return out;
}

enum class StopReason { max_iters, tolerance };

inline std::string_view to_string(StopReason r) {
    return r == StopReason::tolerance ? "tolerance" : "max-iters";
}

struct EmTrace {
    std::vector<double> loglik_by_iter;  // entry 0 is the initial model's likelihood
    std::size_t iterations = 0;          // completed E+M sweeps
    StopReason stop_reason = StopReason::max_iters;
};

struct EmOptions {
    double eps = 1e-6;
    std::size_t max_iter = 500;
    /// Distribution of the first regime; defaults to the stationary law of the initial Pi.
    std::optional<Eigen::VectorXd> initial;
};

struct EmResult {
    RegimeModel model;
    ProbabilityMatrix smoothed;
    ProbabilityMatrix filtered;
    EmTrace trace;
    Eigen::VectorXd initial;
    bool kappa_floored = false;
};

/// Alternates E and M steps from `init` until the likelihood gain drops below eps
/// or max_iter sweeps have run. The returned probabilities belong to the returned model.
inline EmResult em_estimate(const std::vector<double>& x, const RegimeModel& init,
                            const EmOptions& opt = {}) {
    init.validate();
    require(opt.eps > 0.0, "em_estimate: eps must be positive");
    require(opt.max_iter >= 1, "em_estimate: max_iter must be at least 1");
    const Eigen::VectorXd initial =
        opt.initial ? *opt.initial : stationary_distribution(init.Pi);

    EmResult res;
    res.initial = initial;
    RegimeModel model = init;
    EStep e = e_step(x, model, initial);
    res.trace.loglik_by_iter.push_back(e.loglik());
    res.trace.stop_reason = StopReason::max_iters;
    for (std::size_t it = 1; it <= opt.max_iter; ++it) {
        auto ms = m_step(x, e, model);
        res.kappa_floored = res.kappa_floored || ms.kappa_floored;
        model = std::move(ms.model);
        const double prev = e.loglik();
        e = e_step(x, model, initial);
        res.trace.loglik_by_iter.push_back(e.loglik());
        res.trace.iterations = it;
        if (e.loglik() - prev < opt.eps) {
            res.trace.stop_reason = StopReason::tolerance;
            break;
        }
    }
    res.model = std::move(model);
    res.smoothed = std::move(e.smoothed);
    res.filtered = std::move(e.filter.filtered);
    return res;
}

/// Deterministic starting point: observations whose |x_t - mean| is at or below
/// the 70th percentile seed regime 0 ("calm"); the remainder is split into the
/// other regimes by increasing deviation. Pi starts at 0.9 on the diagonal.
inline RegimeModel default_initial_model(const std::vector<double>& x, Eigen::Index k,
                                         double calm_quantile = 0.7, double stay = 0.9) {
    require(k >= 2, "default_initial_model: K must be at least 2");
    require(x.size() >= 3, "default_initial_model: need at least 3 observations");
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(x.size());
    std::vector<double> dev(x.size());
    for (std::size_t t = 0; t < x.size(); ++t) dev[t] = std::abs(x[t] - mean);
    std::vector<double> sorted = dev;
    std::sort(sorted.begin(), sorted.end());
    auto quantile = [&](double q) {
        const double pos = q * static_cast<double>(sorted.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const auto hi = std::min(lo + 1, sorted.size() - 1);
        return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
    };
    std::vector<double> cuts;
    for (Eigen::Index i = 0; i < k - 1; ++i)
        cuts.push_back(quantile(calm_quantile + (1.0 - calm_quantile) *
                                                    static_cast<double>(i) /
                                                    static_cast<double>(k - 1)));
    auto label = [&](std::size_t t) {
        Eigen::Index l = 0;
        while (l < k - 1 && dev[t] > cuts[static_cast<std::size_t>(l)]) ++l;
        return l;
    };

    RegimeModel m;
    m.kappa.resize(k);
    m.theta.resize(k);
    m.sigma.resize(k);
    for (Eigen::Index i = 0; i < k; ++i) {
        auto weight = [&](std::size_t t) { return label(t) == i ? 1.0 : 0.0; };
        const auto fit = detail::weighted_ar1(x, weight, i);
        double kappa = 1.0 - fit.slope;
        if (std::abs(kappa) < kKappaFloor) kappa = kappa < 0.0 ? -kKappaFloor : kKappaFloor;
        double sse = 0.0;
        for (std::size_t t = 1; t < x.size(); ++t) {
            const double r = x[t] - fit.intercept - (1.0 - kappa) * x[t - 1];
            sse += weight(t) * r * r;
        }
        m.kappa(i) = kappa;
        m.theta(i) = fit.intercept / kappa;
        m.sigma(i) = std::sqrt(std::max(sse / fit.weight, 1e-300));
    }
    m.Pi = Eigen::MatrixXd::Constant(k, k, (1.0 - stay) / static_cast<double>(k - 1));
    m.Pi.diagonal().setConstant(stay);
    return m;
}

}  // namespace regime_levy
