#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>

namespace regime_levy {

struct NelderMeadOptions {
    std::size_t max_iterations = 2000;
    /// Converged once every vertex lies within this distance (max-norm) of the best.
    double simplex_tolerance = 1e-10;
    double initial_step = 0.1;
};

template <std::size_t N>
struct NelderMeadResult {
    std::array<double, N> x{};
    double value = std::numeric_limits<double>::infinity();
    std::size_t iterations = 0;
    bool converged = false;
};

/// Minimizes f over R^N with the standard reflection/expansion/contraction/shrink
/// coefficients (1, 2, 1/2, 1/2). Non-finite objective values are treated as +inf.
template <std::size_t N, class F>
NelderMeadResult<N> nelder_mead(F&& f, const std::array<double, N>& start,
                                const NelderMeadOptions& opt = {}) {
    using Point = std::array<double, N>;
    auto eval = [&](const Point& p) {
        const double v = f(p);
        return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    };

    std::array<Point, N + 1> pts{};
    std::array<double, N + 1> vals{};
    pts[0] = start;
    for (std::size_t i = 0; i < N; ++i) {
        pts[i + 1] = start;
        pts[i + 1][i] += opt.initial_step;
    }
    for (std::size_t i = 0; i <= N; ++i) vals[i] = eval(pts[i]);

    std::array<std::size_t, N + 1> order{};
    auto sort_simplex = [&] {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
        auto p2 = pts;
        auto v2 = vals;
        for (std::size_t i = 0; i <= N; ++i) {
            pts[i] = p2[order[i]];
            vals[i] = v2[order[i]];
        }
    };
    auto simplex_size = [&] {
        double s = 0.0;
        for (std::size_t i = 1; i <= N; ++i)
            for (std::size_t j = 0; j < N; ++j) s = std::max(s, std::abs(pts[i][j] - pts[0][j]));
        return s;
    };
    auto along = [](const Point& c, const Point& w, double t) {
        Point r{};
        for (std::size_t j = 0; j < N; ++j) r[j] = c[j] + t * (w[j] - c[j]);
        return r;
    };

    NelderMeadResult<N> res;
    sort_simplex();
    while (res.iterations < opt.max_iterations) {
        if (simplex_size() <= opt.simplex_tolerance) {
            res.converged = true;
            break;
        }
        ++res.iterations;

        Point centroid{};
        for (std::size_t i = 0; i < N; ++i)
            for (std::size_t j = 0; j < N; ++j) centroid[j] += pts[i][j] / static_cast<double>(N);

        const Point xr = along(centroid, pts[N], -1.0);
        const double fr = eval(xr);
        if (fr < vals[0]) {
            const Point xe = along(centroid, pts[N], -2.0);
            const double fe = eval(xe);
            if (fe < fr) {
                pts[N] = xe;
                vals[N] = fe;
            } else {
                pts[N] = xr;
                vals[N] = fr;
            }
        } else if (fr < vals[N - 1]) {
            pts[N] = xr;
            vals[N] = fr;
        } else {
            const bool outside = fr < vals[N];
            const Point xc = outside ? along(centroid, pts[N], -0.5) : along(centroid, pts[N], 0.5);
            const double fc = eval(xc);
            if (fc < (outside ? fr : vals[N])) {
                pts[N] = xc;
                vals[N] = fc;
            } else {
                for (std::size_t i = 1; i <= N; ++i) {
                    pts[i] = along(pts[0], pts[i], 0.5);
                    vals[i] = eval(pts[i]);
                }
            }
        }
        sort_simplex();
    }
    if (!res.converged && simplex_size() <= opt.simplex_tolerance) res.converged = true;
    res.x = pts[0];
    res.value = vals[0];
    return res;
}

}  // namespace regime_levy
