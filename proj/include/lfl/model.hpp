#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "lfl/field.hpp"

namespace lfl {

enum class ModelKind { PeriodicProduct, PeriodicSheared, OpenPatch };

inline const char* kind_name(ModelKind k) {
    switch (k) {
        case ModelKind::PeriodicProduct: return "periodic_product";
        case ModelKind::PeriodicSheared: return "periodic_sheared";
        case ModelKind::OpenPatch: return "open_patch";
    }
    return "?";
}

inline ModelKind kind_from_name(const std::string& s) {
    if (s == "periodic_product") return ModelKind::PeriodicProduct;
    if (s == "periodic_sheared") return ModelKind::PeriodicSheared;
    if (s == "open_patch") return ModelKind::OpenPatch;
    throw std::invalid_argument("unknown model kind '" + s + "'");
}

/// Points per axis, coordinate order fixed as (x_1, y_1, ..., x_n, y_n, t).
struct GridSpec {
    std::vector<int> sizes;
};

struct Interval {
    double lo = 0.0;
    double hi = 1.0;
};

/// Transverse coframe dtau = dt - sum_j lambda_j dy_j and the shear entering
/// the leafwise Wirtinger operators.
struct LeafFrame {
    int n = 1;
    std::vector<double> shear;  // lambda_j, length n

    int x_axis(int j) const { return 2 * (j - 1); }      // j is 1-based
    int y_axis(int j) const { return 2 * (j - 1) + 1; }
    int t_axis() const { return 2 * n; }
};

/// A concrete Levi-flat model: one foliated chart with identifications.
/// Immutable after build_model; all operations on it are pure.
struct FoliatedModel {
    int n = 1;  // leaf complex dimension
    ModelKind kind = ModelKind::PeriodicProduct;
    GridSpec grid;
    std::vector<double> shear;     // length n, zero unless PeriodicSheared
    std::vector<Interval> bounds;  // per axis

    // derived
    std::vector<bool> periodic;
    std::vector<double> spacing;
    // antisymmetric circulant weights for spectral differentiation,
    // w[m], m = 1 .. N/2-1 (the Nyquist weight vanishes identically)
    std::vector<std::vector<double>> spectral_weights;

    int dims() const { return 2 * n + 1; }
    std::int64_t points() const { return Field<double>::count(grid.sizes); }
    int size(int axis) const { return grid.sizes[static_cast<std::size_t>(axis)]; }
    bool is_periodic(int axis) const { return periodic[static_cast<std::size_t>(axis)]; }
    LeafFrame leaf_frame() const { return LeafFrame{n, shear}; }
    int x_axis(int j) const { return 2 * (j - 1); }
    int y_axis(int j) const { return 2 * (j - 1) + 1; }
    int t_axis() const { return 2 * n; }

    double coordinate(int axis, int i) const {
        const Interval& b = bounds[static_cast<std::size_t>(axis)];
        return b.lo + spacing[static_cast<std::size_t>(axis)] * i;
    }

    std::vector<double> axis_points(int axis) const {
        std::vector<double> p(static_cast<std::size_t>(size(axis)));
        for (int i = 0; i < size(axis); ++i) p[static_cast<std::size_t>(i)] = coordinate(axis, i);
        return p;
    }

    /// Quadrature weight of point i on one axis (trapezoid; uniform when periodic).
    double quad_weight(int axis, int i) const {
        double h = spacing[static_cast<std::size_t>(axis)];
        if (is_periodic(axis)) return h;
        return (i == 0 || i == size(axis) - 1) ? 0.5 * h : h;
    }

    double volume() const {
        double v = 1.0;
        for (int a = 0; a < dims(); ++a) {
            const Interval& b = bounds[static_cast<std::size_t>(a)];
            v *= is_periodic(a) ? 1.0 : (b.hi - b.lo);
        }
        return v;
    }

    RField sample(const std::function<double(const std::vector<double>&)>& f) const {
        RField out(grid.sizes);
        std::vector<double> x(static_cast<std::size_t>(dims()));
        for (std::int64_t i = 0; i < out.size(); ++i) {
            auto idx = out.multi_index(i);
            for (int a = 0; a < dims(); ++a) x[static_cast<std::size_t>(a)] = coordinate(a, idx[static_cast<std::size_t>(a)]);
            out[i] = f(x);
        }
        return out;
    }
};

inline FoliatedModel build_model(int n, ModelKind kind, GridSpec grid,
                                 std::vector<double> shear = {},
                                 std::vector<Interval> bounds = {}) {
    if (n != 1 && n != 2) throw std::invalid_argument("build_model: leaf dimension n must be 1 or 2");
    const int dims = 2 * n + 1;
    if (static_cast<int>(grid.sizes.size()) != dims)
        throw std::invalid_argument("build_model: grid must have 2n+1 axes");
    for (int s : grid.sizes)
        if (s < 4) throw std::invalid_argument("build_model: every axis size must be >= 4");

    if (shear.empty()) shear.assign(static_cast<std::size_t>(n), 0.0);
    if (static_cast<int>(shear.size()) != n)
        throw std::invalid_argument("build_model: shear vector must have length n");

    bool shear_zero = true;
    for (double l : shear)
        if (l != 0.0) shear_zero = false;

    const bool is_periodic_model = kind != ModelKind::OpenPatch;
    switch (kind) {
        case ModelKind::PeriodicProduct:
            if (!shear_zero) throw std::invalid_argument("build_model: product model requires zero shear");
            break;
        case ModelKind::PeriodicSheared:
            if (shear_zero) throw std::invalid_argument("build_model: sheared model requires nonzero shear");
            break;
        case ModelKind::OpenPatch:
            if (!shear_zero) throw std::invalid_argument("build_model: patch model requires zero shear");
            break;
    }

    if (bounds.empty()) {
        bounds.assign(static_cast<std::size_t>(dims),
                      is_periodic_model ? Interval{0.0, 1.0} : Interval{-1.0, 1.0});
    }
    if (static_cast<int>(bounds.size()) != dims)
        throw std::invalid_argument("build_model: bounds must cover 2n+1 axes");
    for (const Interval& b : bounds) {
        if (!(b.lo < b.hi) || !std::isfinite(b.lo) || !std::isfinite(b.hi))
            throw std::invalid_argument("build_model: bounds must be finite with lo < hi");
    }
    if (is_periodic_model) {
        for (const Interval& b : bounds)
            if (b.lo != 0.0 || b.hi != 1.0)
                throw std::invalid_argument("build_model: periodic axes are [0,1)");
        for (int s : grid.sizes)
            if (s % 2 != 0) throw std::invalid_argument("build_model: periodic axes need even size");
    }

    FoliatedModel m;
    m.n = n;
    m.kind = kind;
    m.grid = std::move(grid);
    m.shear = std::move(shear);
    m.bounds = std::move(bounds);
    m.periodic.assign(static_cast<std::size_t>(dims), is_periodic_model);
    m.spacing.resize(static_cast<std::size_t>(dims));
    m.spectral_weights.resize(static_cast<std::size_t>(dims));
    for (int a = 0; a < dims; ++a) {
        const Interval& b = m.bounds[static_cast<std::size_t>(a)];
        int N = m.size(a);
        if (is_periodic_model) {
            m.spacing[static_cast<std::size_t>(a)] = (b.hi - b.lo) / N;
            // d/dx of the trigonometric interpolant at the nodes:
            //   f'_j = sum_{m=1}^{N/2-1} w_m (f_{j+m} - f_{j-m}),
            //   w_m = (pi/L) (-1)^{m+1} cot(pi m / N)
            double L = b.hi - b.lo;
            auto& w = m.spectral_weights[static_cast<std::size_t>(a)];
            w.resize(static_cast<std::size_t>(N / 2 - 1));
            for (int mm = 1; mm <= N / 2 - 1; ++mm) {
                double c = std::cos(std::numbers::pi * mm / N) / std::sin(std::numbers::pi * mm / N);
                w[static_cast<std::size_t>(mm - 1)] = (mm % 2 == 0 ? -1.0 : 1.0) * std::numbers::pi / L * c;
            }
        } else {
            m.spacing[static_cast<std::size_t>(a)] = (b.hi - b.lo) / (N - 1);
        }
    }
    return m;
}

/// Quadrature sum of a sampled function against the model's volume weights.
/// Uses fixed-block reduction, so the value is independent of thread count.
template <class T>
T integrate_scalar(const FoliatedModel& model, const Field<T>& f) {
    if (f.shape != model.grid.sizes)
        throw std::invalid_argument("integrate_scalar: field does not match model grid");
    const int D = model.dims();
    std::vector<std::vector<double>> w(static_cast<std::size_t>(D));
    for (int axis = 0; axis < D; ++axis) {
        auto& wa = w[static_cast<std::size_t>(axis)];
        wa.resize(static_cast<std::size_t>(model.size(axis)));
        for (int i = 0; i < model.size(axis); ++i) wa[static_cast<std::size_t>(i)] = model.quad_weight(axis, i);
    }
    auto strides = f.strides();
    return block_sum<T>(f.size(), [&](std::int64_t flat) {
        double weight = 1.0;
        std::int64_t rem = flat;
        for (int axis = 0; axis < D; ++axis) {
            std::int64_t s = strides[static_cast<std::size_t>(axis)];
            int i = static_cast<int>(rem / s);
            rem %= s;
            weight *= w[static_cast<std::size_t>(axis)][static_cast<std::size_t>(i)];
        }
        return T(weight * f[flat]);
    });
}

namespace detail {

/// Applies a 1-d derivative to every line of `f` along `axis`.
/// LineOp sees (in, out, N) over contiguous scratch buffers.
template <class T, class LineOp>
Field<T> apply_along_axis(const Field<T>& f, int axis, LineOp&& op) {
    const int N = f.shape[static_cast<std::size_t>(axis)];
    auto strides = f.strides();
    const std::int64_t stride = strides[static_cast<std::size_t>(axis)];
    const std::int64_t total = f.size();
    const std::int64_t lines = total / N;
    const std::int64_t inner = stride;             // product of sizes after axis
    const std::int64_t outer_step = stride * N;    // block containing one full axis sweep

    Field<T> out(f.shape);
    parallel_for(lines, [&](std::int64_t lb, std::int64_t le) {
        std::vector<T> in_buf(static_cast<std::size_t>(N));
        std::vector<T> out_buf(static_cast<std::size_t>(N));
        for (std::int64_t l = lb; l < le; ++l) {
            std::int64_t o = l / inner, r = l % inner;
            std::int64_t base = o * outer_step + r;
            for (int i = 0; i < N; ++i) in_buf[static_cast<std::size_t>(i)] = f[base + i * stride];
            op(in_buf.data(), out_buf.data(), N);
            for (int i = 0; i < N; ++i) out[base + i * stride] = out_buf[static_cast<std::size_t>(i)];
        }
    });
    return out;
}

}  // namespace detail

/// Numerical d/dx_axis: trigonometric-interpolation (spectral) derivative on
/// periodic axes, 2nd-order central differences with one-sided 2nd-order
/// boundary stencils on patch axes. Derivatives of an axis-constant field are
/// exactly zero (all stencils are difference forms).
template <class T>
Field<T> partial_derivative(const FoliatedModel& model, const Field<T>& f, int axis) {
    if (f.shape != model.grid.sizes)
        throw std::invalid_argument("partial_derivative: field does not match model grid");
    if (axis < 0 || axis >= model.dims())
        throw std::invalid_argument("partial_derivative: axis out of range");

    Field<T> out;
    if (model.is_periodic(axis)) {
        const auto& w = model.spectral_weights[static_cast<std::size_t>(axis)];
        out = detail::apply_along_axis(f, axis, [&w](const T* in, T* o, int N) {
            const int M = N / 2 - 1;
            for (int j = 0; j < N; ++j) {
                T acc{};
                for (int m = 1; m <= M; ++m) {
                    int p = j + m;
                    if (p >= N) p -= N;
                    int q = j - m;
                    if (q < 0) q += N;
                    acc += w[static_cast<std::size_t>(m - 1)] * (in[p] - in[q]);
                }
                o[j] = acc;
            }
        });
    } else {
        const double h = model.spacing[static_cast<std::size_t>(axis)];
        const double inv2h = 1.0 / (2.0 * h);
        out = detail::apply_along_axis(f, axis, [inv2h](const T* in, T* o, int N) {
            o[0] = (4.0 * (in[1] - in[0]) - (in[2] - in[0])) * inv2h;
            for (int j = 1; j < N - 1; ++j) o[j] = (in[j + 1] - in[j - 1]) * inv2h;
            o[N - 1] = -(4.0 * (in[N - 2] - in[N - 1]) - (in[N - 3] - in[N - 1])) * inv2h;
        });
    }
    nan_check(out, "partial_derivative");
    return out;
}

/// Leafwise Wirtinger operator d/dz^j = (1/2)(d/dx_j - i (d/dy_j + lambda_j d/dt)),
/// or its conjugate. j is 1-based.
template <class T>
CField wirtinger(const FoliatedModel& model, const Field<T>& f, int j, bool conjugate) {
    if (j < 1 || j > model.n) throw std::invalid_argument("wirtinger: leaf index out of range");
    CField fx, fy;
    if constexpr (std::is_same_v<T, double>) {
        fx = to_complex(partial_derivative(model, f, model.x_axis(j)));
        fy = to_complex(partial_derivative(model, f, model.y_axis(j)));
    } else {
        fx = partial_derivative(model, f, model.x_axis(j));
        fy = partial_derivative(model, f, model.y_axis(j));
    }
    const double lambda = model.shear[static_cast<std::size_t>(j - 1)];
    CField ft;
    if (lambda != 0.0) {
        if constexpr (std::is_same_v<T, double>) {
            ft = to_complex(partial_derivative(model, f, model.t_axis()));
        } else {
            ft = partial_derivative(model, f, model.t_axis());
        }
    }
    const complex unit = conjugate ? complex(0.0, 1.0) : complex(0.0, -1.0);
    CField out(fx.shape);
    parallel_for(out.size(), [&](std::int64_t b, std::int64_t e) {
        if (lambda != 0.0) {
            for (std::int64_t i = b; i < e; ++i)
                out[i] = 0.5 * (fx[i] + unit * (fy[i] + lambda * ft[i]));
        } else {
            for (std::int64_t i = b; i < e; ++i) out[i] = 0.5 * (fx[i] + unit * fy[i]);
        }
    });
    return out;
}

}  // namespace lfl
