#pragma once

#include <optional>
#include <string>
#include <vector>

#include "regime_levy/data_ingest.hpp"
#include "regime_levy/error.hpp"
#include "regime_levy/nig.hpp"
#include "regime_levy/nig_fit.hpp"
#include "regime_levy/regime_model.hpp"

namespace regime_levy {

/// One label per observation; std::nullopt marks an unclassified step.
struct RegimeAssignment {
    std::vector<std::optional<Eigen::Index>> labels;
    Eigen::Index regimes = 0;
    double threshold = 0.5;

    std::size_t unclassified() const {
        std::size_t n = 0;
        for (const auto& l : labels) n += l ? 0 : 1;
        return n;
    }
};

/// label_t = argmax_i P_ti when that maximum is unique and at least `threshold`.
inline RegimeAssignment assign_regimes(const ProbabilityMatrix& smoothed, double threshold = 0.5) {
    require(threshold >= 0.5 && threshold < 1.0, "assign_regimes: threshold must lie in [0.5, 1)");
    RegimeAssignment a;
    a.regimes = smoothed.values.cols();
    a.threshold = threshold;
    a.labels.reserve(static_cast<std::size_t>(smoothed.values.rows()));
    for (Eigen::Index t = 0; t < smoothed.values.rows(); ++t) {
        Eigen::Index best = 0;
        const double top = smoothed.values.row(t).maxCoeff(&best);
        int ties = 0;
        for (Eigen::Index i = 0; i < a.regimes; ++i) ties += smoothed.values(t, i) == top ? 1 : 0;
        if (ties == 1 && top >= threshold)
            a.labels.emplace_back(best);
        else
            a.labels.emplace_back(std::nullopt);
    }
    return a;
}

struct RegimeNigFit {
    NigFitResult fit;
    MomFit mom;
};

struct RegimeNigFits {
    std::vector<RegimeNigFit> fits;
    std::vector<std::size_t> counts;
};

inline constexpr std::size_t kMinRegimeObservations = 8;

inline std::vector<double> regime_subsample(const std::vector<double>& x,
                                            const RegimeAssignment& a, Eigen::Index regime) {
    std::vector<double> out;
    for (std::size_t t = 0; t < x.size(); ++t)
        if (a.labels[t] && *a.labels[t] == regime) out.push_back(x[t]);
    return out;
}

/// Method-of-moments start followed by maximum likelihood, on each regime's
/// classified observations.
inline RegimeNigFits fit_per_regime(const std::vector<double>& x, const RegimeAssignment& a,
                                    const NelderMeadOptions& cfg = {}) {
    require(a.labels.size() == x.size(), "fit_per_regime: assignment length differs from data");
    RegimeNigFits out;
    for (Eigen::Index i = 0; i < a.regimes; ++i) {
        auto sub = regime_subsample(x, a, i);
        if (sub.size() < kMinRegimeObservations)
            fail(ErrorCategory::degenerate,
                 "regime " + std::to_string(i) + " is under-populated: " +
                     std::to_string(sub.size()) + " classified observations (need " +
                     std::to_string(kMinRegimeObservations) + ")");
        auto mom = nig_fit_mom(empirical_moments(sub), {.policy = MomPolicy::shrink_to_feasible});
        auto mle = nig_fit_mle(sub, mom.params, cfg);
        out.fits.push_back({std::move(mle), std::move(mom)});
        out.counts.push_back(sub.size());
    }
    return out;
}

inline RegimeNigFits fit_per_regime(const ReturnSeries& r, const RegimeAssignment& a,
                                    const NelderMeadOptions& cfg = {}) {
    return fit_per_regime(r.values, a, cfg);
}

}  // namespace regime_levy
