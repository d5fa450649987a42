#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "lfl/common.hpp"

namespace lfl {

/// Downhill-simplex maximizer. Fully deterministic: no randomness, stable
/// ordering with index tie-breaks, fixed reflection/expansion/contraction
/// coefficients (1, 2, 1/2, 1/2).
struct SimplexOptions {
    int max_iterations = 200;
    double initial_step = 0.25;
    double size_tolerance = 1e-10;
};

struct SimplexState {
    std::vector<double> best;
    double best_value = 0.0;
    int iterations = 0;
    double size = 0.0;
};

namespace detail {

inline double simplex_extent(const std::vector<std::vector<double>>& xs, std::size_t best) {
    double m = 0.0;
    for (std::size_t v = 0; v < xs.size(); ++v) {
        for (std::size_t i = 0; i < xs[v].size(); ++i) {
            double d = std::fabs(xs[v][i] - xs[best][i]);
            if (d > m) m = d;
        }
    }
    return m;
}

}  // namespace detail

/// Maximizes f over R^d from x0. `on_iteration(iter, best_x, best_value,
/// size)` fires once per accepted iteration, best vertex first. NaN values
/// from f are treated as -inf.
template <class Fn, class Cb>
SimplexState simplex_maximize(Fn&& f, std::vector<double> x0, const SimplexOptions& opt, Cb&& on_iteration) {
    const std::size_t d = x0.size();
    auto value = [&](const std::vector<double>& x) {
        double v = f(x);
        return std::isnan(v) ? -std::numeric_limits<double>::infinity() : v;
    };

    std::vector<std::vector<double>> xs(d + 1, x0);
    for (std::size_t i = 0; i < d; ++i) xs[i + 1][i] += opt.initial_step;
    std::vector<double> fx(d + 1);
    for (std::size_t v = 0; v <= d; ++v) fx[v] = value(xs[v]);

    std::vector<std::size_t> order(d + 1);
    auto sort_order = [&] {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return fx[a] > fx[b]; });
    };
    sort_order();

    SimplexState st;
    int iter = 0;
    for (; iter < opt.max_iterations; ++iter) {
        std::size_t best = order[0], worst = order[d];
        double size = detail::simplex_extent(xs, best);
        on_iteration(iter, xs[best], fx[best], size);
        if (size < opt.size_tolerance && d > 0) break;
        if (d == 0) break;

        std::vector<double> c(d, 0.0);
        for (std::size_t v = 0; v <= d; ++v) {
            if (v == worst) continue;
            for (std::size_t i = 0; i < d; ++i) c[i] += xs[v][i];
        }
        for (double& ci : c) ci /= static_cast<double>(d);

        auto blend = [&](double tt) {
            std::vector<double> x(d);
            for (std::size_t i = 0; i < d; ++i) x[i] = c[i] + tt * (c[i] - xs[worst][i]);
            return x;
        };

        std::vector<double> xr = blend(1.0);
        double fr = value(xr);
        double f_best = fx[order[0]], f_second = fx[order[d - 1]], f_worst = fx[worst];

        if (fr > f_best) {
            std::vector<double> xe = blend(2.0);
            double fe = value(xe);
            if (fe > fr) {
                xs[worst] = std::move(xe);
                fx[worst] = fe;
            } else {
                xs[worst] = std::move(xr);
                fx[worst] = fr;
            }
        } else if (fr > f_second) {
            xs[worst] = std::move(xr);
            fx[worst] = fr;
        } else {
            bool outside = fr > f_worst;
            std::vector<double> xc = blend(outside ? 0.5 : -0.5);
            double fc = value(xc);
            if ((outside && fc >= fr) || (!outside && fc > f_worst)) {
                xs[worst] = std::move(xc);
                fx[worst] = fc;
            } else {
                std::size_t b = order[0];
                for (std::size_t v = 0; v <= d; ++v) {
                    if (v == b) continue;
                    for (std::size_t i = 0; i < d; ++i) xs[v][i] = xs[b][i] + 0.5 * (xs[v][i] - xs[b][i]);
                    fx[v] = value(xs[v]);
                }
            }
        }
        sort_order();
    }

    st.best = xs[order[0]];
    st.best_value = fx[order[0]];
    st.iterations = iter;
    st.size = detail::simplex_extent(xs, order[0]);
    return st;
}

}  // namespace lfl
