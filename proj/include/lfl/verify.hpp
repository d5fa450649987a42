#pragma once

#include <cmath>

#include "lfl/forms.hpp"

namespace lfl {

/// Absolute floor added to every relative denominator so the zero metric
/// reports residual 0 instead of 0/0.
constexpr double kResidualFloor = 1e-14;

inline void require_periodic(const FoliatedModel& model, const char* what) {
    if (model.kind == ModelKind::OpenPatch)
        throw config_error(std::string(what) + " needs a fully periodic model");
}

struct IdentityReport {
    double residual_d_eta = 0.0;    // d(eta) vs (alpha + conj alpha) ^ eta
    double residual_d_alpha = 0.0;  // d(alpha) ^ eta vs Theta ^ eta
    double max() const { return residual_d_eta > residual_d_alpha ? residual_d_eta : residual_d_alpha; }
};

/// Residuals of the two structure identities of the flat connection:
/// d(eta) = (alpha + conj alpha) ^ eta and (d alpha) ^ eta = Theta ^ eta,
/// sup-norm relative to the larger side.
inline IdentityReport check_structure_identities(const FoliatedModel& model, const RField& u) {
    require_periodic(model, "identity check");
    AlphaField a = alpha_coefficients(model, u);
    ThetaField th = theta_coefficients(model, a);
    DifferentialForm af = alpha_form(model, a);
    DifferentialForm ef = eta_form(model, u);

    IdentityReport rep;
    {
        DifferentialForm lhs = ext_d(model, ef);
        DifferentialForm rhs = wedge(add(af, conj(af)), ef);
        double scale = std::max(sup_norm(lhs), sup_norm(rhs));
        rep.residual_d_eta = sup_distance(lhs, rhs) / (scale + kResidualFloor);
    }
    {
        DifferentialForm lhs = wedge(ext_d(model, af), ef);
        DifferentialForm rhs = wedge(theta_form(model, th), ef);
        double scale = std::max(sup_norm(lhs), sup_norm(rhs));
        rep.residual_d_alpha = sup_distance(lhs, rhs) / (scale + kResidualFloor);
    }
    return rep;
}

struct ExactnessReport {
    double residual = 0.0;  // sup |d(boundary) - bulk| / (sup |bulk| + floor)
    double bulk_sup = 0.0;
};

/// The d-computation behind the main estimate: at c = 1/n the boundary form
/// is a primitive of the bulk density, so the sup-norm of
/// ext_d(boundary) - bulk is pure discretization error.
inline ExactnessReport check_exactness(const FoliatedModel& model, const RField& u, double c) {
    require_periodic(model, "exactness check");
    AlphaField a = alpha_coefficients(model, u);
    ThetaField th = theta_coefficients(model, a);
    DifferentialForm bulk = bulk_form(model, u, a, th, c);
    DifferentialForm dbnd = ext_d(model, boundary_form(model, u, a, th, c));

    ExactnessReport rep;
    rep.bulk_sup = sup_norm(bulk);
    rep.residual = sup_distance(dbnd, bulk) / (rep.bulk_sup + kResidualFloor);
    return rep;
}

inline ExactnessReport check_exactness(const FoliatedModel& model, const RField& u) {
    return check_exactness(model, u, 1.0 / model.n);
}

struct IntegralReport {
    complex integral;        // integral of bulk_form(1/n) over the model
    double bulk_sup = 0.0;
    double volume = 0.0;

    double relative() const { return std::abs(integral) / (bulk_sup * volume + kResidualFloor); }
};

/// Total integral of the bulk density at c = 1/n; exactly zero on compact
/// models by Stokes, so the returned value is the quadrature error.
inline IntegralReport check_main_integral(const FoliatedModel& model, const RField& u) {
    require_periodic(model, "integral check");
    DifferentialForm bulk = bulk_form(model, u, 1.0 / model.n);
    IntegralReport rep;
    rep.integral = integrate_top(model, bulk);
    rep.bulk_sup = sup_norm(bulk);
    rep.volume = model.volume();
    return rep;
}

struct RemarkReport {
    complex lhs;  // integral of i Theta ^ eta
    complex rhs;  // integral of i alpha ^ conj alpha ^ eta

    double imag_residual() const {
        double scale = std::max(std::abs(lhs), std::abs(rhs));
        return std::max(std::fabs(lhs.imag()), std::fabs(rhs.imag())) / (scale + kResidualFloor);
    }
    double relative_gap() const {
        double scale = std::max(std::abs(lhs), std::abs(rhs));
        return std::abs(lhs - rhs) / (scale + kResidualFloor);
    }
};

/// In real dimension 3 the two curvature integrals agree for every metric;
/// both sides are computed independently and compared.
inline RemarkReport check_remark_equality(const FoliatedModel& model, const RField& u) {
    if (model.n != 1) throw config_error("remark check needs a model of real dimension 3");
    require_periodic(model, "remark check");
    AlphaField a = alpha_coefficients(model, u);
    ThetaField th = theta_coefficients(model, a);
    DifferentialForm af = alpha_form(model, a);
    DifferentialForm ef = eta_form(model, u);

    RemarkReport rep;
    rep.lhs = integrate_top(model, wedge(scale(complex(0.0, 1.0), theta_form(model, th)), ef));
    rep.rhs = integrate_top(model, wedge(scale(complex(0.0, 1.0), wedge(af, conj(af))), ef));
    return rep;
}

}  // namespace lfl
