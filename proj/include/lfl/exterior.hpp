#pragma once

#include <bit>
#include <map>
#include <stdexcept>
#include <vector>

#include "lfl/model.hpp"

namespace lfl {

/// Degree-k form with complex component fields indexed by strictly increasing
/// coordinate tuples. Tuples are encoded as bitmasks over the axes; absent
/// masks mean zero.
struct DifferentialForm {
    int degree = 0;
    std::map<std::uint32_t, CField> comps;

    bool has(std::uint32_t mask) const { return comps.count(mask) != 0; }
};

inline std::vector<int> mask_to_tuple(std::uint32_t mask) {
    std::vector<int> t;
    for (int a = 0; a < 32; ++a)
        if (mask & (1u << a)) t.push_back(a);
    return t;
}

inline std::uint32_t tuple_to_mask(const std::vector<int>& tuple) {
    std::uint32_t m = 0;
    for (int a : tuple) {
        if (a < 0 || a >= 32) throw std::invalid_argument("tuple_to_mask: axis out of range");
        std::uint32_t bit = 1u << a;
        if (m & bit) throw std::invalid_argument("tuple_to_mask: repeated axis");
        m |= bit;
    }
    return m;
}

/// Sign of dx_A ^ dx_B relative to dx_{sorted(A u B)}: parity of pairs
/// (a in A, b in B) with a > b.
inline int merge_sign(std::uint32_t a, std::uint32_t b) {
    int inversions = 0;
    for (std::uint32_t bb = b; bb; bb &= bb - 1) {
        std::uint32_t bit = bb & (0u - bb);
        inversions += std::popcount(a & ~(bit | (bit - 1)));
    }
    return (inversions % 2 == 0) ? 1 : -1;
}

inline DifferentialForm make_form(int degree) {
    DifferentialForm f;
    f.degree = degree;
    return f;
}

inline DifferentialForm constant_form(const FoliatedModel& model, complex value) {
    DifferentialForm f = make_form(0);
    f.comps.emplace(0u, CField(model.grid.sizes, value));
    return f;
}

inline void set_component(DifferentialForm& f, const std::vector<int>& tuple, CField field) {
    std::uint32_t m = tuple_to_mask(tuple);
    if (std::popcount(m) != f.degree) throw std::invalid_argument("set_component: tuple length != degree");
    f.comps[m] = std::move(field);
}

inline const CField* component(const DifferentialForm& f, const std::vector<int>& tuple) {
    auto it = f.comps.find(tuple_to_mask(tuple));
    return it == f.comps.end() ? nullptr : &it->second;
}

inline double sup_norm(const DifferentialForm& f) {
    double m = 0.0;
    for (const auto& [mask, field] : f.comps) {
        double s = sup_norm(field);
        if (s > m) m = s;
    }
    return m;
}

inline DifferentialForm conj(const DifferentialForm& a) {
    DifferentialForm out = make_form(a.degree);
    for (const auto& [mask, field] : a.comps) out.comps.emplace(mask, conj_field(field));
    return out;
}

inline DifferentialForm scale(complex c, const DifferentialForm& a) {
    DifferentialForm out = make_form(a.degree);
    for (const auto& [mask, field] : a.comps) out.comps.emplace(mask, scale_field(field, c));
    return out;
}

inline DifferentialForm add(const DifferentialForm& a, const DifferentialForm& b) {
    if (a.degree != b.degree) throw std::invalid_argument("add: degree mismatch");
    DifferentialForm out = make_form(a.degree);
    for (const auto& [mask, field] : a.comps) {
        auto it = b.comps.find(mask);
        out.comps.emplace(mask, it == b.comps.end() ? field : add_fields(field, it->second));
    }
    for (const auto& [mask, field] : b.comps)
        if (!a.has(mask)) out.comps.emplace(mask, field);
    return out;
}

/// Pointwise product with a scalar field (0-form coefficients).
inline DifferentialForm multiply(const DifferentialForm& a, const CField& g) {
    DifferentialForm out = make_form(a.degree);
    for (const auto& [mask, field] : a.comps) out.comps.emplace(mask, mul_fields(field, g));
    return out;
}

namespace detail {

struct WedgeTerm {
    const CField* fa;
    const CField* fb;
    double sign;
};

// One group per unordered partition {s, m\s}; a group holds the one ordered
// term (degrees differ) or both (degrees equal). Group order and in-group
// term grouping are independent of argument order, which is what makes
// graded commutativity hold bitwise.
struct WedgeGroup {
    WedgeTerm t[2];
    int count = 0;
};

}  // namespace detail

/// Antisymmetrized product with permutation signs; bilinear.
inline DifferentialForm wedge(const DifferentialForm& a, const DifferentialForm& b) {
    if (a.degree + b.degree > 31) throw std::invalid_argument("wedge: degree overflow");
    DifferentialForm out = make_form(a.degree + b.degree);

    std::map<std::uint32_t, bool> targets;
    for (const auto& [ma, fa] : a.comps)
        for (const auto& [mb, fb] : b.comps)
            if ((ma & mb) == 0) targets[ma | mb] = true;

    const int da = a.degree, db = b.degree;
    for (const auto& [m, ignored] : targets) {
        // canonical partition enumeration: submasks s of m ascending, s being
        // the lower-degree side (ties: the side containing m's lowest bit)
        std::vector<detail::WedgeGroup> groups;
        const std::uint32_t lowest = m & (0u - m);
        std::uint32_t s = 0;
        while (true) {
            int pc = std::popcount(s);
            detail::WedgeGroup g;
            if (da < db ? pc == da : (db < da ? pc == db : (pc == da && ((s & lowest) || m == 0u)))) {
                std::uint32_t sa = (db < da) ? (m & ~s) : s;
                std::uint32_t sb = m & ~sa;
                auto push = [&](std::uint32_t ka, std::uint32_t kb) {
                    auto ia = a.comps.find(ka);
                    auto ib = b.comps.find(kb);
                    if (ia == a.comps.end() || ib == b.comps.end()) return;
                    g.t[g.count++] = {&ia->second, &ib->second, static_cast<double>(merge_sign(ka, kb))};
                };
                push(sa, sb);
                if (da == db && da > 0) push(sb, sa);
                if (g.count > 0) groups.push_back(g);
            }
            if (s == m) break;
            s = (s - m) & m;
        }
        if (groups.empty()) continue;

        CField acc(groups[0].t[0].fa->shape);
        parallel_for(acc.size(), [&](std::int64_t lo, std::int64_t hi) {
            for (std::int64_t i = lo; i < hi; ++i) {
                complex total{};
                for (const auto& g : groups) {
                    complex v = g.t[0].sign * ((*g.t[0].fa)[i] * (*g.t[0].fb)[i]);
                    if (g.count == 2) v += g.t[1].sign * ((*g.t[1].fa)[i] * (*g.t[1].fb)[i]);
                    total += v;
                }
                acc[i] = total;
            }
        });
        out.comps.emplace(m, std::move(acc));
    }
    return out;
}

/// Exterior derivative: d(f dx_T) = sum_a d_a f dx_a ^ dx_T.
inline DifferentialForm ext_d(const FoliatedModel& model, const DifferentialForm& a) {
    if (a.degree >= model.dims()) throw std::invalid_argument("ext_d: form already top degree");
    DifferentialForm out = make_form(a.degree + 1);
    for (const auto& [mask, field] : a.comps) {
        for (int axis = 0; axis < model.dims(); ++axis) {
            std::uint32_t bit = 1u << axis;
            if (mask & bit) continue;
            CField df = partial_derivative(model, field, axis);
            double sgn = merge_sign(bit, mask);
            std::uint32_t target = mask | bit;
            auto it = out.comps.find(target);
            if (it == out.comps.end()) {
                if (sgn < 0) {
                    parallel_for(df.size(), [&](std::int64_t lo, std::int64_t hi) {
                        for (std::int64_t i = lo; i < hi; ++i) df[i] = -df[i];
                    });
                }
                out.comps.emplace(target, std::move(df));
            } else {
                CField& acc = it->second;
                parallel_for(acc.size(), [&](std::int64_t lo, std::int64_t hi) {
                    for (std::int64_t i = lo; i < hi; ++i) acc[i] += sgn * df[i];
                });
            }
        }
    }
    return out;
}

/// Integral of a top-degree form against the positively oriented volume:
/// trapezoidal on periodic axes (= spectral accuracy), composite trapezoid on
/// patch axes.
inline complex integrate_top(const FoliatedModel& model, const DifferentialForm& a) {
    if (a.degree != model.dims()) throw std::invalid_argument("integrate_top: form degree must be 2n+1");
    const std::uint32_t full = (1u << model.dims()) - 1u;
    auto it = a.comps.find(full);
    if (it == a.comps.end()) return complex(0.0, 0.0);
    return integrate_scalar(model, it->second);
}

/// Max over components of sup |a - b|; forms may have different support.
inline double sup_distance(const DifferentialForm& a, const DifferentialForm& b) {
    if (a.degree != b.degree) throw std::invalid_argument("sup_distance: degree mismatch");
    double m = 0.0;
    for (const auto& [mask, fa] : a.comps) {
        auto it = b.comps.find(mask);
        double s = (it == b.comps.end()) ? sup_norm(fa) : sup_norm(sub_fields(fa, it->second));
        if (s > m) m = s;
    }
    for (const auto& [mask, fb] : b.comps)
        if (!a.has(mask)) {
            double s = sup_norm(fb);
            if (s > m) m = s;
        }
    return m;
}

}  // namespace lfl
