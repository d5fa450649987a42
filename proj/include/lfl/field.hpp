#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "lfl/common.hpp"

namespace lfl {

/// A function sampled on the model grid, stored row-major over the fixed
/// coordinate order (x_1, y_1, ..., x_n, y_n, t).
template <class T>
struct Field {
    std::vector<int> shape;
    std::vector<T> data;

    Field() = default;
    explicit Field(std::vector<int> shape_, T fill = T{})
        : shape(std::move(shape_)), data(static_cast<std::size_t>(count(shape)), fill) {}

    static std::int64_t count(const std::vector<int>& shape) {
        std::int64_t n = 1;
        for (int s : shape) n *= s;
        return n;
    }

    std::int64_t size() const { return static_cast<std::int64_t>(data.size()); }
    int rank() const { return static_cast<int>(shape.size()); }

    T& operator[](std::int64_t i) { return data[static_cast<std::size_t>(i)]; }
    const T& operator[](std::int64_t i) const { return data[static_cast<std::size_t>(i)]; }

    /// Row-major strides; last axis is contiguous.
    std::vector<std::int64_t> strides() const {
        std::vector<std::int64_t> s(shape.size());
        std::int64_t acc = 1;
        for (int a = rank() - 1; a >= 0; --a) {
            s[static_cast<std::size_t>(a)] = acc;
            acc *= shape[static_cast<std::size_t>(a)];
        }
        return s;
    }

    std::int64_t flat_index(const std::vector<int>& idx) const {
        auto st = strides();
        std::int64_t f = 0;
        for (std::size_t a = 0; a < idx.size(); ++a) f += idx[a] * st[a];
        return f;
    }

    std::vector<int> multi_index(std::int64_t flat) const {
        std::vector<int> idx(shape.size());
        for (int a = rank() - 1; a >= 0; --a) {
            int s = shape[static_cast<std::size_t>(a)];
            idx[static_cast<std::size_t>(a)] = static_cast<int>(flat % s);
            flat /= s;
        }
        return idx;
    }
};

using RField = Field<double>;
using CField = Field<complex>;

template <class T, class U>
bool same_shape(const Field<T>& a, const Field<U>& b) {
    return a.shape == b.shape;
}

template <class T, class U>
void require_same_shape(const Field<T>& a, const Field<U>& b, const char* what) {
    if (!same_shape(a, b)) throw std::invalid_argument(std::string(what) + ": field shape mismatch");
}

inline double abs_value(double v) { return std::fabs(v); }
inline double abs_value(const complex& v) { return std::abs(v); }

template <class T>
double sup_norm(const Field<T>& f) {
    return block_max(f.size(), [&](std::int64_t i) { return abs_value(f[i]); });
}

template <class T>
bool is_finite(const T& v) {
    return std::isfinite(v);
}
inline bool is_finite(const complex& v) {
    return std::isfinite(v.real()) && std::isfinite(v.imag());
}

template <class T>
void nan_check(const Field<T>& f, const char* what) {
    std::atomic<bool> bad{false};
    parallel_for(f.size(), [&](std::int64_t b, std::int64_t e) {
        for (std::int64_t i = b; i < e; ++i) {
            if (!is_finite(f[i])) {
                bad.store(true, std::memory_order_relaxed);
                return;
            }
        }
    });
    if (bad.load()) throw numeric_error(std::string("non-finite value in ") + what);
}

inline CField to_complex(const RField& f) {
    CField out(f.shape);
    parallel_for(f.size(), [&](std::int64_t b, std::int64_t e) {
        for (std::int64_t i = b; i < e; ++i) out[i] = complex(f[i], 0.0);
    });
    return out;
}

inline RField real_part(const CField& f) {
    RField out(f.shape);
    parallel_for(f.size(), [&](std::int64_t b, std::int64_t e) {
        for (std::int64_t i = b; i < e; ++i) out[i] = f[i].real();
    });
    return out;
}

inline RField imag_part(const CField& f) {
    RField out(f.shape);
    parallel_for(f.size(), [&](std::int64_t b, std::int64_t e) {
        for (std::int64_t i = b; i < e; ++i) out[i] = f[i].imag();
    });
    return out;
}

inline CField conj_field(const CField& f) {
    CField out(f.shape);
    parallel_for(f.size(), [&](std::int64_t b, std::int64_t e) {
        for (std::int64_t i = b; i < e; ++i) out[i] = std::conj(f[i]);
    });
    return out;
}

template <class T>
Field<T> scale_field(const Field<T>& f, T c) {
    Field<T> out(f.shape);
    parallel_for(f.size(), [&](std::int64_t b, std::int64_t e) {
        for (std::int64_t i = b; i < e; ++i) out[i] = c * f[i];
    });
    return out;
}

template <class T>
Field<T> add_fields(const Field<T>& a, const Field<T>& b) {
    require_same_shape(a, b, "add_fields");
    Field<T> out(a.shape);
    parallel_for(a.size(), [&](std::int64_t b0, std::int64_t e0) {
        for (std::int64_t i = b0; i < e0; ++i) out[i] = a[i] + b[i];
    });
    return out;
}

template <class T>
Field<T> sub_fields(const Field<T>& a, const Field<T>& b) {
    require_same_shape(a, b, "sub_fields");
    Field<T> out(a.shape);
    parallel_for(a.size(), [&](std::int64_t b0, std::int64_t e0) {
        for (std::int64_t i = b0; i < e0; ++i) out[i] = a[i] - b[i];
    });
    return out;
}

template <class T>
Field<T> mul_fields(const Field<T>& a, const Field<T>& b) {
    require_same_shape(a, b, "mul_fields");
    Field<T> out(a.shape);
    parallel_for(a.size(), [&](std::int64_t b0, std::int64_t e0) {
        for (std::int64_t i = b0; i < e0; ++i) out[i] = a[i] * b[i];
    });
    return out;
}

inline RField exp_field(const RField& f) {
    RField out(f.shape);
    parallel_for(f.size(), [&](std::int64_t b, std::int64_t e) {
        for (std::int64_t i = b; i < e; ++i) out[i] = std::exp(f[i]);
    });
    return out;
}

}  // namespace lfl
