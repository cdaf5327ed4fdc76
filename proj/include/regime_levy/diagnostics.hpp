#pragma once

#include <algorithm>
#include <cmath>

#include "regime_levy/error.hpp"
#include "regime_levy/regime_model.hpp"

namespace regime_levy {

struct DiagnosticsReport {
    double rcm = 0.0;
    double p_indicator = 0.0;
    double p_error = 0.1;
};

/// Regime Classification Measure on a 0-100 scale:
///   100 * (1 - K/(K-1) * mean_t sum_i (P_ti - 1/K)^2).
/// 0 when every row is a unit vector, 100 when every row is uniform.
inline double rcm(const ProbabilityMatrix& smoothed) {
    const auto T = smoothed.values.rows();
    const auto k = smoothed.values.cols();
    if (T == 0) fail(ErrorCategory::config, "rcm: empty probability matrix");
    require(k >= 2, "rcm: needs K >= 2");
    validate_probabilities(smoothed, 1e-9);
    const double inv_k = 1.0 / static_cast<double>(k);
    double ss = (smoothed.values.array() - inv_k).square().sum();
    const double value =
        100.0 * (1.0 - static_cast<double>(k) / static_cast<double>(k - 1) * ss /
                           static_cast<double>(T));
    return std::clamp(value, 0.0, 100.0);
}

/// Percentage of steps classified with error below p: rows whose largest
/// probability exceeds 1 - p.
inline double smoothed_probability_indicator(const ProbabilityMatrix& smoothed, double p) {
    require(p > 0.0 && p < 0.5, "smoothed_probability_indicator: p must lie in (0, 0.5)");
    const auto T = smoothed.values.rows();
    if (T == 0) fail(ErrorCategory::config, "smoothed_probability_indicator: empty matrix");
    Eigen::Index sharp = 0;
    for (Eigen::Index t = 0; t < T; ++t)
        if (smoothed.values.row(t).maxCoeff() > 1.0 - p) ++sharp;
    return 100.0 * static_cast<double>(sharp) / static_cast<double>(T);
}

inline DiagnosticsReport diagnose(const ProbabilityMatrix& smoothed, double p_error = 0.1) {
    return {rcm(smoothed), smoothed_probability_indicator(smoothed, p_error), p_error};
}

}  // namespace regime_levy
