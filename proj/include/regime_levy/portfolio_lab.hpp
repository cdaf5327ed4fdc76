#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "regime_levy/error.hpp"
#include "regime_levy/nig.hpp"
#include "regime_levy/regime_model.hpp"

namespace regime_levy {

/// Regime chain plus one NIG law per regime.
struct RegimeNigModel {
    Eigen::MatrixXd Pi;
    std::vector<NigParams> laws;

    void validate() const {
        const auto k = Pi.rows();
        require(k >= 1 && Pi.cols() == k && static_cast<std::size_t>(k) == laws.size(),
                "regime NIG model: Pi and laws disagree on K");
        for (Eigen::Index i = 0; i < k; ++i) {
            require(Pi.row(i).minCoeff() >= 0.0 && std::abs(Pi.row(i).sum() - 1.0) <= 1e-12,
                    "regime NIG model: Pi rows must be probability vectors");
        }
    }
};

/// Calm/turbulent two-regime law used when no calibration report is supplied.
/// Pi keeps regime 0 on about 71.6% of days.
inline RegimeNigModel reference_regime_nig_model() {
    RegimeNigModel m;
    m.Pi.resize(2, 2);
    m.Pi << 0.99, 0.01, 0.0252445265, 0.9747554735;
    m.laws = {NigParams(150.0919, -16.2944, 0.011949, 0.001276),
              NigParams(41.8416, 0.295358, 0.026838, -0.00015)};
    return m;
}

/// Each asset a returns loading_a * C_t + idio_scale_a * E_{t,a}, with C_t and
/// E_{t,a} independent draws from the NIG law of the shared regime z_t.
struct UniverseSpec {
    std::size_t n_assets = 100;
    std::size_t horizon = 5000;
    RegimeNigModel model = reference_regime_nig_model();
    Eigen::VectorXd loadings;     // size n_assets, >= 0
    Eigen::VectorXd idio_scales;  // size n_assets, >= 0
    std::uint64_t seed = 0;

    static UniverseSpec uniform(std::size_t n_assets, std::size_t horizon, double loading,
                                double idio_scale, std::uint64_t seed,
                                RegimeNigModel model = reference_regime_nig_model()) {
        UniverseSpec s;
        s.n_assets = n_assets;
        s.horizon = horizon;
        s.model = std::move(model);
        s.loadings = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n_assets), loading);
        s.idio_scales = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n_assets), idio_scale);
        s.seed = seed;
        return s;
    }

    void validate() const {
        require(n_assets >= 1, "universe needs at least 1 asset");
        require(horizon >= 2, "universe horizon must be at least 2");
        model.validate();
        const auto n = static_cast<Eigen::Index>(n_assets);
        require(loadings.size() == n && idio_scales.size() == n,
                "universe: loadings and idiosyncratic scales need one entry per asset");
        for (Eigen::Index a = 0; a < n; ++a) {
            require(std::isfinite(loadings(a)) && loadings(a) >= 0.0,
                    "universe: loadings must be finite and non-negative");
            require(std::isfinite(idio_scales(a)) && idio_scales(a) >= 0.0,
                    "universe: idiosyncratic scales must be finite and non-negative");
            require(loadings(a) + idio_scales(a) > 0.0,
                    "universe: every asset needs a positive loading or idiosyncratic scale");
        }
    }
};

/// Independent generator for the (seed, stream...) tuple.
template <class... Ids>
std::mt19937_64 substream(std::uint64_t seed, Ids... ids) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(ids)...};
    return std::mt19937_64(seq);
}

struct Universe {
    Eigen::MatrixXd returns;           // horizon x n_assets
    std::vector<Eigen::Index> regimes;  // regime path, one per period
};

template <class Urbg>
std::vector<Eigen::Index> sample_regime_path(const Eigen::MatrixXd& Pi, std::size_t horizon,
                                             Urbg& rng) {
    std::uniform_real_distribution<double> unif;
    auto draw = [&](const Eigen::VectorXd& probs) {
        const double u = unif(rng);
        double acc = 0.0;
        for (Eigen::Index i = 0; i < probs.size(); ++i) {
            acc += probs(i);
            if (u < acc) return i;
        }
        return probs.size() - 1;
    };
    std::vector<Eigen::Index> path(horizon);
    path[0] = Pi.rows() == 1 ? 0 : draw(stationary_distribution(Pi));
    for (std::size_t t = 1; t < horizon; ++t) path[t] = draw(Pi.row(path[t - 1]).transpose());
    return path;
}

inline Universe simulate_universe(const UniverseSpec& spec) {
    spec.validate();
    auto chain_rng = substream(spec.seed, 1u);
    auto draw_rng = substream(spec.seed, 2u);
    Universe u;
    u.regimes = sample_regime_path(spec.model.Pi, spec.horizon, chain_rng);
    const auto n = static_cast<Eigen::Index>(spec.n_assets);
    u.returns.resize(static_cast<Eigen::Index>(spec.horizon), n);
    for (std::size_t t = 0; t < spec.horizon; ++t) {
        const auto& law = spec.model.laws[static_cast<std::size_t>(u.regimes[t])];
        const double common = sample_nig(law, draw_rng);
        for (Eigen::Index a = 0; a < n; ++a) {
            const double idio = sample_nig(law, draw_rng);
            u.returns(static_cast<Eigen::Index>(t), a) =
                spec.loadings(a) * common + spec.idio_scales(a) * idio;
        }
    }
    return u;
}

/// Mean-removed sample covariance with the (T - 1) divisor.
inline Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd& returns) {
    require(returns.rows() >= 2, "covariance needs at least 2 periods");
    require(returns.allFinite(), "returns matrix must be finite");
    const Eigen::RowVectorXd mean = returns.colwise().mean();
    const Eigen::MatrixXd centered = returns.rowwise() - mean;
    return (centered.transpose() * centered) / static_cast<double>(returns.rows() - 1);
}

struct PcaResult {
    Eigen::VectorXd eigenvalues;  // descending, >= 0
    Eigen::VectorXd explained;    // cumulative fraction of total variance
    Eigen::MatrixXd components;   // column i pairs with eigenvalues(i)
};

inline PcaResult pca(const Eigen::MatrixXd& returns) {
    const Eigen::MatrixXd cov = sample_covariance(returns);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success)
        fail(ErrorCategory::numerical, "pca: eigendecomposition failed");
    const auto n = cov.rows();
    PcaResult r;
    r.eigenvalues = solver.eigenvalues().reverse();
    r.components = solver.eigenvectors().rowwise().reverse();
    const double top = r.eigenvalues(0);
    if (!(top > 0.0)) fail(ErrorCategory::degenerate, "pca: covariance is identically zero");
    // Eigenvalues at rounding level of the largest are rank deficiency, not signal.
    const double cutoff = top * static_cast<double>(n) * 1e-14;
    for (Eigen::Index i = 0; i < n; ++i)
        if (r.eigenvalues(i) < cutoff) r.eigenvalues(i) = 0.0;
    const double total = r.eigenvalues.sum();
    r.explained.resize(n);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        acc += r.eigenvalues(i);
        r.explained(i) = acc / total;
    }
    r.explained(n - 1) = 1.0;
    return r;
}

/// Smallest number of leading components whose cumulative share reaches tau.
inline std::size_t components_for_threshold(const PcaResult& p, double tau) {
    require(tau > 0.0 && tau <= 1.0, "components_for_threshold: tau must lie in (0, 1]");
    if (tau == 1.0)
        return static_cast<std::size_t>((p.eigenvalues.array() > 0.0).count());
    for (Eigen::Index i = 0; i < p.explained.size(); ++i)
        if (p.explained(i) >= tau - 1e-12) return static_cast<std::size_t>(i + 1);
    return static_cast<std::size_t>(p.explained.size());
}

/// Weights proportional to Sigma^{-1} 1, normalized to sum to 1. A ridge of
/// 1e-10 * trace / n is added when Sigma is singular.
inline Eigen::VectorXd minimum_variance_weights(const Eigen::MatrixXd& sigma) {
    const auto n = sigma.rows();
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
    Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    Eigen::VectorXd w;
    if (llt.info() == Eigen::Success && llt.rcond() > 1e-12) {
        w = llt.solve(ones);
    } else {
        const double ridge = 1e-10 * sigma.trace() / static_cast<double>(n);
        Eigen::MatrixXd regularized = sigma;
        regularized.diagonal().array() += ridge;
        Eigen::LDLT<Eigen::MatrixXd> ldlt(regularized);
        if (ldlt.info() != Eigen::Success)
            fail(ErrorCategory::numerical, "minimum variance: regularized covariance not solvable");
        w = ldlt.solve(ones);
    }
    const double s = w.sum();
    if (!(std::abs(s) > 0.0) || !std::isfinite(s))
        fail(ErrorCategory::numerical, "minimum variance: weights do not normalize");
    return w / s;
}

/// Minimum-variance weights under the m-factor covariance
/// V_m Lambda_m V_m^T + diag(residual variances).
inline Eigen::VectorXd factor_weights(const PcaResult& p, const Eigen::MatrixXd& returns,
                                      std::size_t m) {
    const auto n = p.eigenvalues.size();
    require(m >= 1 && static_cast<Eigen::Index>(m) <= n,
            "factor_weights: factor count must lie in [1, n_assets]");
    require(returns.cols() == n, "factor_weights: returns do not match the PCA");
    const Eigen::MatrixXd cov = sample_covariance(returns);
    const auto k = static_cast<Eigen::Index>(m);
    const Eigen::MatrixXd v = p.components.leftCols(k);
    Eigen::MatrixXd sigma = v * p.eigenvalues.head(k).asDiagonal() * v.transpose();
    const Eigen::VectorXd residual = (cov.diagonal() - sigma.diagonal()).cwiseMax(0.0);
    sigma.diagonal() += residual;
    return minimum_variance_weights(sigma);
}

struct CurvePoint {
    std::size_t size = 0;
    double mean_risk = 0.0;        // mean over trials of the portfolio return std
    double dispersion = 0.0;       // std over trials of the portfolio return std
    double mean_shortfall = 0.0;   // mean over trials of the 1% expected shortfall (as a loss)
};

inline double sample_std(const std::vector<double>& x) {
    if (x.size() < 2) return 0.0;
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

/// Mean loss over the worst floor(level * n) outcomes (at least one).
inline double expected_shortfall(std::vector<double> returns, double level = 0.01) {
    require(!returns.empty(), "expected_shortfall: empty sample");
    require(level > 0.0 && level < 1.0, "expected_shortfall: level must lie in (0, 1)");
    const auto k = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::floor(level * static_cast<double>(returns.size()))));
    std::partial_sort(returns.begin(), returns.begin() + static_cast<std::ptrdiff_t>(k),
                      returns.end());
    double s = 0.0;
    for (std::size_t i = 0; i < k; ++i) s += returns[i];
    return -s / static_cast<double>(k);
}

/// Equal-weight random-subset experiment. Trial `j` of size index `i` draws its
/// subset from substream(seed, i, j), so results do not depend on evaluation order.
inline std::vector<CurvePoint> diversification_curve(const Eigen::MatrixXd& returns,
                                                     const std::vector<std::size_t>& sizes,
                                                     std::size_t trials, std::uint64_t seed) {
    const auto n = static_cast<std::size_t>(returns.cols());
    const auto horizon = static_cast<std::size_t>(returns.rows());
    require(trials >= 1, "diversification_curve: trials must be at least 1");
    require(!sizes.empty(), "diversification_curve: no portfolio sizes given");
    for (auto s : sizes)
        require(s >= 1 && s <= n, "diversification_curve: size " + std::to_string(s) +
                                      " outside [1, " + std::to_string(n) + "]");

    std::vector<CurvePoint> curve;
    std::vector<std::size_t> idx(n);
    std::vector<double> port(horizon);
    for (std::size_t si = 0; si < sizes.size(); ++si) {
        const std::size_t s = sizes[si];
        const std::size_t runs = s == n ? 1 : trials;
        std::vector<double> risks, shortfalls;
        for (std::size_t trial = 0; trial < runs; ++trial) {
            std::iota(idx.begin(), idx.end(), std::size_t{0});
            auto rng = substream(seed, 3u, static_cast<std::uint32_t>(si),
                                 static_cast<std::uint32_t>(trial));
            for (std::size_t i = 0; i < s; ++i) {
                std::uniform_int_distribution<std::size_t> pick(i, n - 1);
                std::swap(idx[i], idx[pick(rng)]);
            }
            std::sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(s));
            for (std::size_t t = 0; t < horizon; ++t) {
                double acc = 0.0;
                for (std::size_t i = 0; i < s; ++i)
                    acc += returns(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(idx[i]));
                port[t] = acc / static_cast<double>(s);
            }
            risks.push_back(sample_std(port));
            shortfalls.push_back(expected_shortfall(port, 0.01));
        }
        CurvePoint pt;
        pt.size = s;
        pt.mean_risk = std::accumulate(risks.begin(), risks.end(), 0.0) / static_cast<double>(runs);
        pt.dispersion = sample_std(risks);
        pt.mean_shortfall =
            std::accumulate(shortfalls.begin(), shortfalls.end(), 0.0) / static_cast<double>(runs);
        curve.push_back(pt);
    }
    return curve;
}

inline std::vector<CurvePoint> diversification_curve(const UniverseSpec& spec,
                                                     const std::vector<std::size_t>& sizes,
                                                     std::size_t trials) {
    const auto u = simulate_universe(spec);
    return diversification_curve(u.returns, sizes, trials, spec.seed);
}

}  // namespace regime_levy
