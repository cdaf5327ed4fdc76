#pragma once

#include <cmath>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "regime_levy/error.hpp"

namespace regime_levy {

/// K-regime discretized mean-reverting model on a unit time grid:
///   x_t = kappa_i theta_i + (1 - kappa_i) x_{t-1} + sigma_i eps_t  while in regime i,
/// with the regime following a Markov chain with row-stochastic transition matrix Pi.
struct RegimeModel {
    Eigen::VectorXd kappa;
    Eigen::VectorXd theta;
    Eigen::VectorXd sigma;
    Eigen::MatrixXd Pi;

    Eigen::Index regimes() const noexcept { return kappa.size(); }

    void validate() const {
        const auto k = kappa.size();
        require(k >= 2, "regime model needs K >= 2 regimes");
        require(theta.size() == k && sigma.size() == k && Pi.rows() == k && Pi.cols() == k,
                "regime model: inconsistent dimensions");
        for (Eigen::Index i = 0; i < k; ++i) {
            require(std::isfinite(kappa(i)) && std::isfinite(theta(i)),
                    "regime model: kappa and theta must be finite");
            require(std::isfinite(sigma(i)) && sigma(i) > 0.0, "regime model: sigma must be > 0");
            for (Eigen::Index j = 0; j < k; ++j)
                require(Pi(i, j) >= 0.0 && Pi(i, j) <= 1.0,
                        "regime model: transition probabilities must lie in [0,1]");
            require(std::abs(Pi.row(i).sum() - 1.0) <= 1e-12,
                    "regime model: transition matrix rows must sum to 1");
        }
    }
};

/// Left eigenvector of Pi for eigenvalue 1, normalized to sum to 1.
inline Eigen::VectorXd stationary_distribution(const Eigen::MatrixXd& Pi) {
    const auto k = Pi.rows();
    Eigen::MatrixXd a = Pi.transpose() - Eigen::MatrixXd::Identity(k, k);
    a.row(k - 1).setOnes();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k);
    rhs(k - 1) = 1.0;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    if (!lu.isInvertible())
        fail(ErrorCategory::numerical, "transition matrix has no unique stationary distribution");
    Eigen::VectorXd pi = lu.solve(rhs);
    pi = pi.cwiseMax(0.0);
    return pi / pi.sum();
}

enum class ProbabilityKind { filtered, predicted, smoothed };

inline std::string_view to_string(ProbabilityKind k) {
    switch (k) {
        case ProbabilityKind::filtered: return "filtered";
        case ProbabilityKind::predicted: return "predicted";
        case ProbabilityKind::smoothed: return "smoothed";
    }
    return "unknown";
}

/// T x K regime probabilities; each row sums to 1.
struct ProbabilityMatrix {
    Eigen::MatrixXd values;
    ProbabilityKind kind = ProbabilityKind::smoothed;

    Eigen::Index steps() const noexcept { return values.rows(); }
    Eigen::Index regimes() const noexcept { return values.cols(); }
};

inline void validate_probabilities(const ProbabilityMatrix& p, double tol = 1e-10) {
    if (p.values.rows() == 0 || p.values.cols() == 0)
        fail(ErrorCategory::config, "probability matrix is empty");
    for (Eigen::Index t = 0; t < p.values.rows(); ++t) {
        for (Eigen::Index i = 0; i < p.values.cols(); ++i) {
            const double v = p.values(t, i);
            if (!(v >= -tol && v <= 1.0 + tol))
                fail(ErrorCategory::config,
                     "probability out of [0,1] at row " + std::to_string(t + 1));
        }
        if (std::abs(p.values.row(t).sum() - 1.0) > tol)
            fail(ErrorCategory::config,
                 "probability row " + std::to_string(t + 1) + " does not sum to 1");
    }
}

}  // namespace regime_levy
