#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "lfl/model.hpp"

namespace lfl {

/// Band-limited real trigonometric polynomial on the model, given by one
/// complex coefficient per representative mode. The full spectrum is the
/// hermitian extension c_{-k} = conj(c_k), c_0 = 0, damped by
/// (1 + |k|^2)^{-smoothing} and scaled by `amplitude`.
struct FourierMetric {
    int cutoff = 1;        // max-norm bound on the integer frequency
    double smoothing = 2.0;
    double amplitude = 1.0;
    std::vector<std::vector<int>> modes;  // representatives, lex order
    std::vector<complex> coeffs;          // parallel to modes
};

/// Representatives of the +-k pairs in [-K, K]^dims: lexicographic order,
/// keeping the vector whose first nonzero entry is positive.
inline std::vector<std::vector<int>> mode_representatives(int dims, int cutoff) {
    if (dims < 1 || dims > 16) throw config_error("mode_representatives: bad dimension");
    if (cutoff < 1 || cutoff > 32) throw config_error("mode_representatives: cutoff out of range");
    double count = 1.0;
    for (int a = 0; a < dims; ++a) count *= 2.0 * cutoff + 1.0;
    if (count > double(1 << 22)) throw config_error("mode_representatives: frequency box too large");

    std::vector<std::vector<int>> reps;
    std::vector<int> k(static_cast<std::size_t>(dims), -cutoff);
    while (true) {
        int first = 0;
        for (int v : k) {
            if (v != 0) {
                first = v;
                break;
            }
        }
        if (first > 0) reps.push_back(k);
        int a = dims - 1;
        while (a >= 0 && k[static_cast<std::size_t>(a)] == cutoff) {
            k[static_cast<std::size_t>(a)] = -cutoff;
            --a;
        }
        if (a < 0) break;
        ++k[static_cast<std::size_t>(a)];
    }
    return reps;
}

/// One independent SplitMix64 stream per mode, keyed by (seed, k); the real
/// part is drawn first. Identical for any grid, so refining the grid keeps
/// the same function.
inline FourierMetric seeded_fourier_metric(int dims, int cutoff, double smoothing, double amplitude,
                                           std::uint64_t seed) {
    FourierMetric fm;
    fm.cutoff = cutoff;
    fm.smoothing = smoothing;
    fm.amplitude = amplitude;
    fm.modes = mode_representatives(dims, cutoff);
    fm.coeffs.reserve(fm.modes.size());
    for (const auto& k : fm.modes) {
        SplitMix64 g{key_for_frequency(seed, k)};
        double re = g.uniform_sym();
        double im = g.uniform_sym();
        fm.coeffs.emplace_back(re, im);
    }
    return fm;
}

inline double mode_weight(const FourierMetric& fm, const std::vector<int>& k) {
    double k2 = 0.0;
    for (int v : k) k2 += double(v) * double(v);
    return std::pow(1.0 + k2, -fm.smoothing);
}

/// Evaluates the polynomial on the grid by separable contraction: the
/// hermitian coefficient box is transformed one axis at a time against
/// per-axis phase tables, axis 0 first. Each output element is a sequential
/// sum, so the result does not depend on the number of worker threads.
inline RField synthesize_metric(const FoliatedModel& model, const FourierMetric& fm) {
    const int D = model.dims();
    const int K = fm.cutoff;
    const int F = 2 * K + 1;
    if (!fm.modes.empty() && static_cast<int>(fm.modes[0].size()) != D)
        throw config_error("synthesize_metric: mode dimension does not match model");
    if (fm.coeffs.size() != fm.modes.size())
        throw config_error("synthesize_metric: coefficient count does not match modes");

    // dense hermitian coefficient box over [-K, K]^D, row-major
    std::int64_t box = 1;
    for (int a = 0; a < D; ++a) box *= F;
    std::vector<complex> cur(static_cast<std::size_t>(box), complex{});
    auto box_index = [&](const std::vector<int>& k, int sign) {
        std::int64_t f = 0;
        for (int a = 0; a < D; ++a) f = f * F + (sign * k[static_cast<std::size_t>(a)] + K);
        return f;
    };
    for (std::size_t m = 0; m < fm.modes.size(); ++m) {
        complex c = fm.amplitude * mode_weight(fm, fm.modes[m]) * fm.coeffs[m];
        cur[static_cast<std::size_t>(box_index(fm.modes[m], +1))] = c;
        cur[static_cast<std::size_t>(box_index(fm.modes[m], -1))] = std::conj(c);
    }

    // phase tables E[a][f * N + i] = exp(2 pi i (f - K) xhat_i)
    std::vector<std::vector<complex>> phases(static_cast<std::size_t>(D));
    for (int a = 0; a < D; ++a) {
        int N = model.size(a);
        const Interval& b = model.bounds[static_cast<std::size_t>(a)];
        auto& E = phases[static_cast<std::size_t>(a)];
        E.resize(static_cast<std::size_t>(F) * static_cast<std::size_t>(N));
        for (int f = 0; f < F; ++f)
            for (int i = 0; i < N; ++i) {
                double xhat = (model.coordinate(a, i) - b.lo) / (b.hi - b.lo);
                double ang = 2.0 * std::numbers::pi * (f - K) * xhat;
                E[static_cast<std::size_t>(f) * static_cast<std::size_t>(N) + static_cast<std::size_t>(i)] =
                    complex(std::cos(ang), std::sin(ang));
            }
    }

    // contract axis a: (outer, F, inner) -> (outer, N_a, inner)
    std::int64_t outer = 1, inner = box / F;
    for (int a = 0; a < D; ++a) {
        const int N = model.size(a);
        const auto& E = phases[static_cast<std::size_t>(a)];
        std::vector<complex> next(static_cast<std::size_t>(outer * N * inner));
        parallel_for(outer * N, [&](std::int64_t lo, std::int64_t hi) {
            for (std::int64_t oi = lo; oi < hi; ++oi) {
                std::int64_t o = oi / N;
                std::int64_t i = oi % N;
                const complex* src = cur.data() + o * F * inner;
                complex* dst = next.data() + oi * inner;
                for (std::int64_t r = 0; r < inner; ++r) {
                    complex acc{};
                    for (int f = 0; f < F; ++f)
                        acc += src[f * inner + r] * E[static_cast<std::size_t>(f) * static_cast<std::size_t>(N) + static_cast<std::size_t>(i)];
                    dst[r] = acc;
                }
            }
        });
        cur = std::move(next);
        outer *= N;
        inner /= F;
    }

    RField out(model.grid.sizes);
    parallel_for(out.size(), [&](std::int64_t lo, std::int64_t hi) {
        for (std::int64_t i = lo; i < hi; ++i) out[i] = cur[static_cast<std::size_t>(i)].real();
    });
    nan_check(out, "synthesize_metric");
    return out;
}

}  // namespace lfl
