#pragma once

#include <string>
#include <vector>

#include "lfl/exterior.hpp"
#include "lfl/model.hpp"

namespace lfl {

/// Leafwise logarithmic derivative of a metric weight u = log h:
/// alpha_j = D_j u, one complex field per leaf direction (1-based j).
struct AlphaField {
    int n = 1;
    std::vector<CField> comp;

    const CField& at(int j) const { return comp[static_cast<std::size_t>(j - 1)]; }
};

/// Leafwise curvature coefficients Theta_{j kbar} = -D_j Dbar_k u, stored
/// row-major and hermitian by construction (real diagonal, Theta_kj = conj
/// Theta_jk).
struct ThetaField {
    int n = 1;
    std::vector<CField> comp;

    const CField& at(int j, int k) const { return comp[static_cast<std::size_t>((j - 1) * n + (k - 1))]; }
    CField& at(int j, int k) { return comp[static_cast<std::size_t>((j - 1) * n + (k - 1))]; }
};

inline AlphaField alpha_coefficients(const FoliatedModel& model, const RField& u) {
    AlphaField a;
    a.n = model.n;
    a.comp.reserve(static_cast<std::size_t>(model.n));
    for (int j = 1; j <= model.n; ++j) a.comp.push_back(wirtinger(model, u, j, false));
    return a;
}

/// For real u, Dbar_k u = conj(alpha_k), so Theta_{jk} = -D_j conj(alpha_k).
/// The discrete mixed derivatives commute only up to rounding; the result is
/// symmetrized so the matrix is exactly hermitian at every point.
inline ThetaField theta_coefficients(const FoliatedModel& model, const AlphaField& alpha) {
    const int n = alpha.n;
    std::vector<CField> raw(static_cast<std::size_t>(n * n));
    for (int j = 1; j <= n; ++j)
        for (int k = 1; k <= n; ++k) {
            CField d = wirtinger(model, conj_field(alpha.at(k)), j, false);
            raw[static_cast<std::size_t>((j - 1) * n + (k - 1))] = scale_field(d, complex(-1.0, 0.0));
        }

    ThetaField th;
    th.n = n;
    th.comp.resize(static_cast<std::size_t>(n * n));
    for (int j = 1; j <= n; ++j) {
        const CField& djj = raw[static_cast<std::size_t>((j - 1) * n + (j - 1))];
        CField diag(djj.shape);
        parallel_for(diag.size(), [&](std::int64_t b, std::int64_t e) {
            for (std::int64_t i = b; i < e; ++i) diag[i] = complex(djj[i].real(), 0.0);
        });
        th.at(j, j) = std::move(diag);
        for (int k = j + 1; k <= n; ++k) {
            const CField& djk = raw[static_cast<std::size_t>((j - 1) * n + (k - 1))];
            const CField& dkj = raw[static_cast<std::size_t>((k - 1) * n + (j - 1))];
            CField up(djk.shape), lo(djk.shape);
            parallel_for(up.size(), [&](std::int64_t b, std::int64_t e) {
                for (std::int64_t i = b; i < e; ++i) {
                    complex v = 0.5 * (djk[i] + std::conj(dkj[i]));
                    up[i] = v;
                    lo[i] = std::conj(v);
                }
            });
            th.at(j, k) = std::move(up);
            th.at(k, j) = std::move(lo);
        }
    }
    return th;
}

inline ThetaField theta_coefficients(const FoliatedModel& model, const RField& u) {
    return theta_coefficients(model, alpha_coefficients(model, u));
}

/// alpha = sum_j alpha_j dz^j written in the real coframe, dz^j = dx_j + i dy_j.
inline DifferentialForm alpha_form(const FoliatedModel& model, const AlphaField& alpha) {
    DifferentialForm f = make_form(1);
    for (int j = 1; j <= model.n; ++j) {
        f.comps.emplace(1u << model.x_axis(j), alpha.at(j));
        f.comps.emplace(1u << model.y_axis(j), scale_field(alpha.at(j), complex(0.0, 1.0)));
    }
    return f;
}

/// Theta = sum_{j,k} Theta_{jk} dz^j ^ dzbar^k expanded over the real coframe
/// (the j = k term is -2i Theta_{jj} dx_j ^ dy_j).
inline DifferentialForm theta_form(const FoliatedModel& model, const ThetaField& theta) {
    DifferentialForm f = make_form(2);
    struct Leg {
        int axis;
        complex factor;
    };
    for (int j = 1; j <= model.n; ++j) {
        Leg left[2] = {{model.x_axis(j), complex(1.0, 0.0)}, {model.y_axis(j), complex(0.0, 1.0)}};
        for (int k = 1; k <= model.n; ++k) {
            Leg right[2] = {{model.x_axis(k), complex(1.0, 0.0)}, {model.y_axis(k), complex(0.0, -1.0)}};
            for (const Leg& a : left)
                for (const Leg& b : right) {
                    if (a.axis == b.axis) continue;
                    std::uint32_t ma = 1u << a.axis, mb = 1u << b.axis;
                    complex factor = a.factor * b.factor * static_cast<double>(merge_sign(ma, mb));
                    CField term = scale_field(theta.at(j, k), factor);
                    std::uint32_t mask = ma | mb;
                    auto it = f.comps.find(mask);
                    if (it == f.comps.end())
                        f.comps.emplace(mask, std::move(term));
                    else
                        it->second = add_fields(it->second, term);
                }
        }
    }
    return f;
}

/// eta = e^u dtau with dtau = dt - sum_j lambda_j dy_j. Only nonzero
/// components are stored, so product models carry a single dt component.
inline DifferentialForm eta_form(const FoliatedModel& model, const RField& u) {
    CField eu = to_complex(exp_field(u));
    DifferentialForm f = make_form(1);
    for (int j = 1; j <= model.n; ++j) {
        double lambda = model.shear[static_cast<std::size_t>(j - 1)];
        if (lambda != 0.0)
            f.comps.emplace(1u << model.y_axis(j), scale_field(eu, complex(-lambda, 0.0)));
    }
    f.comps.emplace(1u << model.t_axis(), std::move(eu));
    return f;
}

/// i Theta - c i alpha ^ conj(alpha): the real (1,1) combination whose
/// positivity is the defining condition.
inline DifferentialForm curvature_combination(const FoliatedModel& model, const AlphaField& alpha,
                                              const ThetaField& theta, double c) {
    DifferentialForm itheta = scale(complex(0.0, 1.0), theta_form(model, theta));
    if (c == 0.0) return itheta;
    DifferentialForm a = alpha_form(model, alpha);
    DifferentialForm aa = wedge(a, conj(a));
    return add(itheta, scale(complex(0.0, -c), aa));
}

namespace detail {

inline DifferentialForm wedge_power(const DifferentialForm& w, int p, const FoliatedModel& model) {
    if (p == 0) return constant_form(model, complex(1.0, 0.0));
    DifferentialForm out = w;
    for (int i = 1; i < p; ++i) out = wedge(out, w);
    return out;
}

}  // namespace detail

/// (i Theta - c i alpha ^ conj alpha)^n ^ eta: the top-degree density whose
/// integral vanishes on compact models. The coefficient is real analytically;
/// the imaginary residue is checked against rounding noise but not stripped,
/// so callers see the raw coefficient.
inline DifferentialForm bulk_form(const FoliatedModel& model, const RField& u, const AlphaField& alpha,
                                  const ThetaField& theta, double c) {
    DifferentialForm w = curvature_combination(model, alpha, theta, c);
    DifferentialForm wn = detail::wedge_power(w, model.n, model);
    DifferentialForm top = wedge(wn, eta_form(model, u));
    const std::uint32_t full = (1u << model.dims()) - 1u;
    auto it = top.comps.find(full);
    if (it != top.comps.end()) {
        double re = sup_norm(real_part(it->second));
        double im = sup_norm(imag_part(it->second));
        if (im > 1e-9 * (1.0 + re)) throw numeric_error("bulk density has a non-real coefficient");
    }
    return top;
}

inline DifferentialForm bulk_form(const FoliatedModel& model, const RField& u, double c) {
    AlphaField a = alpha_coefficients(model, u);
    ThetaField th = theta_coefficients(model, a);
    return bulk_form(model, u, a, th, c);
}

/// (i Theta - c i alpha ^ conj alpha)^(n-1) ^ i alpha ^ eta: the degree-2n
/// primitive whose exterior derivative is the bulk density at c = 1/n.
inline DifferentialForm boundary_form(const FoliatedModel& model, const RField& u, const AlphaField& alpha,
                                      const ThetaField& theta, double c) {
    DifferentialForm w = curvature_combination(model, alpha, theta, c);
    DifferentialForm wn1 = detail::wedge_power(w, model.n - 1, model);
    DifferentialForm ia = scale(complex(0.0, 1.0), alpha_form(model, alpha));
    return wedge(wedge(wn1, ia), eta_form(model, u));
}

inline DifferentialForm boundary_form(const FoliatedModel& model, const RField& u, double c) {
    AlphaField a = alpha_coefficients(model, u);
    ThetaField th = theta_coefficients(model, a);
    return boundary_form(model, u, a, th, c);
}

/// Built-in metric weights: "zero" (u = 0) on any model, "quadratic"
/// (u = -sum_j (x_j^2 + y_j^2), the standard well with index 1/(1+2n))
/// on open patches.
inline RField preset_metric(const FoliatedModel& model, const std::string& name) {
    if (name == "zero") return RField(model.grid.sizes, 0.0);
    if (name == "quadratic") {
        if (model.kind != ModelKind::OpenPatch)
            throw config_error("preset 'quadratic' needs an open patch model");
        return model.sample([&](const std::vector<double>& x) {
            double s = 0.0;
            for (int j = 1; j <= model.n; ++j) {
                double xj = x[static_cast<std::size_t>(model.x_axis(j))];
                double yj = x[static_cast<std::size_t>(model.y_axis(j))];
                s += xj * xj + yj * yj;
            }
            return -s;
        });
    }
    throw config_error("unknown metric preset '" + name + "'");
}

}  // namespace lfl
