#pragma once

#include <cmath>
#include <cstring>

#include "lfl/model.hpp"

namespace helpers {

using namespace lfl;

inline FoliatedModel t3(int nx, int ny = 0, int nt = 0) {
    if (ny == 0) ny = nx;
    if (nt == 0) nt = nx;
    return build_model(1, ModelKind::PeriodicProduct, GridSpec{{nx, ny, nt}});
}

inline FoliatedModel t3_sheared(int n, double lambda) {
    return build_model(1, ModelKind::PeriodicSheared, GridSpec{{n, n, n}}, {lambda});
}

inline FoliatedModel t5(int n) {
    return build_model(2, ModelKind::PeriodicProduct, GridSpec{{n, n, n, n, n}});
}

inline FoliatedModel patch1(int nxy, int nt) {
    return build_model(1, ModelKind::OpenPatch, GridSpec{{nxy, nxy, nt}});
}

inline FoliatedModel patch2(int nxy, int nt) {
    return build_model(2, ModelKind::OpenPatch, GridSpec{{nxy, nxy, nxy, nxy, nt}});
}

inline double sup_diff(const RField& a, const RField& b) {
    double m = 0.0;
    for (std::int64_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
    return m;
}

inline double sup_diff(const CField& a, const CField& b) {
    double m = 0.0;
    for (std::int64_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

/// Bit-for-bit equality of two complex fields.
inline bool bitwise_equal(const CField& a, const CField& b) {
    if (a.shape != b.shape) return false;
    return std::memcmp(a.data.data(), b.data.data(),
                       sizeof(complex) * static_cast<std::size_t>(a.size())) == 0;
}

inline bool bitwise_equal(const RField& a, const RField& b) {
    if (a.shape != b.shape) return false;
    return std::memcmp(a.data.data(), b.data.data(),
                       sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

}  // namespace helpers
