#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "lfl/forms.hpp"
#include "lfl/fourier.hpp"
#include "lfl/model.hpp"
#include "lfl/nelder_mead.hpp"

namespace lfl {

/// Coefficient data of one metric, plus the strict-positivity cutoff used by
/// every feasibility decision: min eigenvalue > 1e-12 * (1 + sup |Theta|).
struct MetricGeometry {
    AlphaField alpha;
    ThetaField theta;
    double theta_sup = 0.0;
    double threshold = 0.0;
};

inline MetricGeometry metric_geometry(const FoliatedModel& model, const RField& u) {
    MetricGeometry g;
    g.alpha = alpha_coefficients(model, u);
    g.theta = theta_coefficients(model, g.alpha);
    for (const CField& e : g.theta.comp) {
        double s = sup_norm(e);
        if (s > g.theta_sup) g.theta_sup = s;
    }
    g.threshold = 1e-12 * (1.0 + g.theta_sup);
    return g;
}

namespace detail {

/// Smallest eigenvalue of Theta - c alpha alpha^* at one grid point; c = 0
/// gives Theta itself. Closed forms: scalar for n = 1, trace/discriminant
/// for hermitian 2x2 when n = 2.
inline double shifted_min_eig_at(const MetricGeometry& g, double c, std::int64_t i) {
    if (g.theta.n == 1) {
        const complex a1 = g.alpha.at(1)[i];
        return g.theta.at(1, 1)[i].real() - c * std::norm(a1);
    }
    const complex a1 = g.alpha.at(1)[i];
    const complex a2 = g.alpha.at(2)[i];
    const double a = g.theta.at(1, 1)[i].real() - c * std::norm(a1);
    const double d = g.theta.at(2, 2)[i].real() - c * std::norm(a2);
    const complex b = g.theta.at(1, 2)[i] - c * a1 * std::conj(a2);
    const double disc = std::sqrt((a - d) * (a - d) + 4.0 * std::norm(b));
    return 0.5 * ((a + d) - disc);
}

/// conj(alpha)^T Theta^{-1} alpha at one point; caller guarantees Theta > 0.
inline double schur_s_at(const MetricGeometry& g, std::int64_t i) {
    if (g.theta.n == 1) {
        const complex a1 = g.alpha.at(1)[i];
        return std::norm(a1) / g.theta.at(1, 1)[i].real();
    }
    const complex a1 = g.alpha.at(1)[i];
    const complex a2 = g.alpha.at(2)[i];
    const double a = g.theta.at(1, 1)[i].real();
    const double d = g.theta.at(2, 2)[i].real();
    const complex b = g.theta.at(1, 2)[i];
    const double det = a * d - std::norm(b);
    const double num = d * std::norm(a1) + a * std::norm(a2) - 2.0 * (b * std::conj(a1) * a2).real();
    return num / det;
}

inline RField trace_field(const ThetaField& th) {
    RField tr(th.at(1, 1).shape);
    parallel_for(tr.size(), [&](std::int64_t b, std::int64_t e) {
        for (std::int64_t i = b; i < e; ++i) {
            double v = 0.0;
            for (int j = 1; j <= th.n; ++j) v += th.at(j, j)[i].real();
            tr[i] = v;
        }
    });
    return tr;
}

}  // namespace detail

/// Smallest eigenvalue of Theta at every grid point.
inline RField theta_min_eig_field(const MetricGeometry& g) {
    RField out(g.theta.at(1, 1).shape);
    parallel_for(out.size(), [&](std::int64_t b, std::int64_t e) {
        for (std::int64_t i = b; i < e; ++i) out[i] = detail::shifted_min_eig_at(g, 0.0, i);
    });
    return out;
}

/// s(p) = conj(alpha)^T Theta^{-1} alpha, defined only where Theta is
/// strictly positive; the first offending point (row-major order) is
/// reported otherwise.
inline RField pointwise_s(const MetricGeometry& g) {
    const std::int64_t nn = g.theta.at(1, 1).size();
    for (std::int64_t i = 0; i < nn; ++i)
        if (!(detail::shifted_min_eig_at(g, 0.0, i) > g.threshold)) throw not_positive_error(i);
    RField s(g.theta.at(1, 1).shape);
    parallel_for(nn, [&](std::int64_t b, std::int64_t e) {
        for (std::int64_t i = b; i < e; ++i) s[i] = detail::schur_s_at(g, i);
    });
    nan_check(s, "pointwise_s");
    return s;
}

inline RField pointwise_s(const FoliatedModel& model, const RField& u) {
    return pointwise_s(metric_geometry(model, u));
}

struct ExponentReport {
    double eta = 0.0;
    bool feasible = false;
    double min_theta_eig = 0.0;
    bool has_s_max = false;          // absent when infeasible
    double s_max = 0.0;
    std::vector<int> argmax_point;   // grid index of the s maximum; empty when infeasible
    double mean_trace_theta = 0.0;
};

inline ExponentReport exponent_report(const FoliatedModel& model, const MetricGeometry& g) {
    ExponentReport r;
    RField tr = detail::trace_field(g.theta);
    r.mean_trace_theta = integrate_scalar(model, tr) / model.volume();

    const std::int64_t nn = tr.size();
    double min_eig = detail::shifted_min_eig_at(g, 0.0, 0);
    for (std::int64_t i = 1; i < nn; ++i) {
        double v = detail::shifted_min_eig_at(g, 0.0, i);
        if (v < min_eig) min_eig = v;
    }
    r.min_theta_eig = min_eig;
    r.feasible = min_eig > g.threshold;
    if (!r.feasible) {
        r.eta = 0.0;
        return r;
    }

    double s_max = detail::schur_s_at(g, 0);
    std::int64_t arg = 0;
    for (std::int64_t i = 1; i < nn; ++i) {
        double v = detail::schur_s_at(g, i);
        if (v > s_max) {
            s_max = v;
            arg = i;
        }
    }
    r.has_s_max = true;
    r.s_max = s_max;
    r.argmax_point = g.theta.at(1, 1).multi_index(arg);
    r.eta = 1.0 / (1.0 + s_max);
    return r;
}

/// eta of one metric: 1/(1 + max_p s(p)) when Theta > 0 everywhere, else 0.
/// The value is a supremum over the admissible interval; no open/closed
/// bookkeeping is attempted.
inline ExponentReport exponent_of_metric(const FoliatedModel& model, const RField& u) {
    return exponent_report(model, metric_geometry(model, u));
}

/// Independent route to the same number: bisection over eta in (0, 1], each
/// candidate tested by forming Theta - (eta/(1-eta)) alpha alpha^* pointwise
/// and requiring a positive smallest eigenvalue on the whole grid.
inline double exponent_bisection_oracle(const FoliatedModel& model, const RField& u, double tol) {
    if (!(tol > 0.0)) throw config_error("bisection tolerance must be positive");
    MetricGeometry g = metric_geometry(model, u);
    const std::int64_t nn = g.theta.at(1, 1).size();
    auto admissible = [&](double eta) {
        const double c = eta / (1.0 - eta);
        for (std::int64_t i = 0; i < nn; ++i)
            if (!(detail::shifted_min_eig_at(g, c, i) > 0.0)) return false;
        return true;
    };
    double lo = 0.0;
    {
        // feasibility at eta -> 0+ is positivity of Theta itself
        for (std::int64_t i = 0; i < nn; ++i)
            if (!(detail::shifted_min_eig_at(g, 0.0, i) > 0.0)) return 0.0;
    }
    double alpha_sup = 0.0;
    for (const CField& a : g.alpha.comp) alpha_sup = std::max(alpha_sup, sup_norm(a));
    if (alpha_sup == 0.0) return 1.0;
    double hi = 1.0;
    while (hi - lo > tol) {
        double mid = 0.5 * (lo + hi);
        if (admissible(mid))
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

/// Settings for the two-phase metric search.
struct OptimizeConfig {
    int phase1_iterations = 60;    // feasibility phase budget (chunks of 20)
    int phase2_iterations = 160;   // exponent phase budget across all rounds
    int anneal_rounds = 4;
    double start_temperature = 0.5;
    double end_temperature = 1e-3;
    double initial_step = 0.2;
    std::string base_preset;       // optional analytic start added to the search field
};

struct TraceRow {
    int iteration = 0;
    double min_eig = 0.0;
    double s_max = 0.0;  // 0 when infeasible
    double eta = 0.0;
    double simplex_size = 0.0;
};

struct OptimizeResult {
    RField u;
    ExponentReport report;
    std::vector<TraceRow> trace;
};

namespace detail {

struct EvalDiag {
    double objective = 0.0;
    double min_eig = 0.0;
    bool feasible = false;
    double s_max = 0.0;
    double eta = 0.0;
};

}  // namespace detail

/// Maximizes eta over the band-limited family around an optional analytic
/// base metric. Phase 1 climbs the smallest Theta eigenvalue until the
/// iterate is feasible (compact models never get there: the mean of tr Theta
/// vanishes); phase 2 maximizes 1/(1 + logsumexp_T(s)) while the temperature
/// anneals toward the hard maximum. Deterministic given the seed.
inline OptimizeResult optimize_metric(const FoliatedModel& model, const FourierMetric& param,
                                      const OptimizeConfig& cfg, std::uint64_t seed) {
    int min_size = model.size(0);
    for (int a = 1; a < model.dims(); ++a) min_size = std::min(min_size, model.size(a));
    if (param.cutoff > min_size / 4)
        throw config_error("optimize_metric: cutoff exceeds grid size / 4");

    FourierMetric fm = param;
    if (fm.modes.empty()) fm.modes = mode_representatives(model.dims(), fm.cutoff);
    if (fm.coeffs.empty()) {
        FourierMetric drawn = seeded_fourier_metric(model.dims(), fm.cutoff, fm.smoothing, fm.amplitude, seed);
        fm.coeffs = drawn.coeffs;
    }
    if (fm.coeffs.size() != fm.modes.size())
        throw config_error("optimize_metric: coefficient/mode count mismatch");

    RField base = cfg.base_preset.empty() ? RField(model.grid.sizes, 0.0)
                                          : preset_metric(model, cfg.base_preset);

    auto field_of = [&](const std::vector<double>& x) {
        FourierMetric m = fm;
        for (std::size_t i = 0; i < m.coeffs.size(); ++i)
            m.coeffs[i] = complex(x[2 * i], x[2 * i + 1]);
        return add_fields(base, synthesize_metric(model, m));
    };

    const double vol = model.volume();

    std::map<std::vector<double>, detail::EvalDiag> cache;
    std::vector<double> best_x;
    double best_eta = -1.0;
    double best_min_eig = -std::numeric_limits<double>::infinity();

    double temperature = cfg.start_temperature;
    auto evaluate = [&](const std::vector<double>& x, bool phase2) -> detail::EvalDiag {
        auto it = cache.find(x);
        if (it != cache.end()) {
            detail::EvalDiag d = it->second;
            d.objective = phase2 ? d.objective : d.min_eig;  // objective stored for phase 2
            return d;
        }
        RField u = field_of(x);
        MetricGeometry g = metric_geometry(model, u);
        detail::EvalDiag d;
        const std::int64_t nn = u.size();
        double min_eig = detail::shifted_min_eig_at(g, 0.0, 0);
        for (std::int64_t i = 1; i < nn; ++i)
            min_eig = std::min(min_eig, detail::shifted_min_eig_at(g, 0.0, i));
        d.min_eig = min_eig;
        d.feasible = min_eig > g.threshold;
        if (d.feasible) {
            RField s = pointwise_s(g);
            double s_max = s[0];
            for (std::int64_t i = 1; i < nn; ++i) s_max = std::max(s_max, s[i]);
            d.s_max = s_max;
            d.eta = 1.0 / (1.0 + s_max);
            const double T = temperature;
            RField e(s.shape);
            parallel_for(s.size(), [&](std::int64_t b, std::int64_t en) {
                for (std::int64_t i = b; i < en; ++i) e[i] = std::exp((s[i] - s_max) / T);
            });
            double lse = s_max + T * std::log(integrate_scalar(model, e) / vol);
            d.objective = 1.0 / (1.0 + std::max(lse, 0.0));
        } else {
            d.objective = -1.0 + std::min(min_eig, 0.0);
        }
        if (d.feasible && d.eta > best_eta) {
            best_eta = d.eta;
            best_x = x;
        }
        if (!d.feasible && best_eta < 0.0 && min_eig > best_min_eig) {
            best_min_eig = min_eig;
            best_x = x;
        }
        cache.emplace(x, d);
        detail::EvalDiag out = d;
        out.objective = phase2 ? d.objective : d.min_eig;
        return out;
    };

    std::vector<TraceRow> trace;
    int global_iter = 0;
    auto record = [&](const std::vector<double>& bx, double size) {
        detail::EvalDiag d = evaluate(bx, true);
        trace.push_back({global_iter, d.min_eig, d.feasible ? d.s_max : 0.0, d.feasible ? d.eta : 0.0, size});
        ++global_iter;
    };

    std::vector<double> x(2 * fm.coeffs.size());
    for (std::size_t i = 0; i < fm.coeffs.size(); ++i) {
        x[2 * i] = fm.coeffs[i].real();
        x[2 * i + 1] = fm.coeffs[i].imag();
    }
    // anchor the search at the family center so a feasible analytic base is
    // never lost to a bad seed draw
    evaluate(std::vector<double>(x.size(), 0.0), true);
    detail::EvalDiag d0 = evaluate(x, true);

    // phase 1: push the smallest eigenvalue up until strictly positive
    int budget = cfg.phase1_iterations;
    bool feasible = d0.feasible;
    std::vector<double> cur = x;
    while (!feasible && budget > 0) {
        int chunk = std::min(20, budget);
        budget -= chunk;
        SimplexOptions so;
        so.max_iterations = chunk;
        so.initial_step = cfg.initial_step;
        auto st = simplex_maximize([&](const std::vector<double>& xx) { return evaluate(xx, false).objective; },
                                   cur, so, [&](int, const std::vector<double>& bx, double, double size) { record(bx, size); });
        cur = st.best;
        feasible = evaluate(cur, false).feasible;
    }

    // phase 2: anneal the softmax toward the hard maximum of s
    if (feasible) {
        if (best_eta >= 0.0) cur = best_x;
        int rounds = std::max(1, cfg.anneal_rounds);
        int per_round = std::max(1, cfg.phase2_iterations / rounds);
        for (int r = 0; r < rounds; ++r) {
            double frac = rounds == 1 ? 1.0 : static_cast<double>(r) / (rounds - 1);
            temperature = cfg.start_temperature * std::pow(cfg.end_temperature / cfg.start_temperature, frac);
            cache.clear();  // objective depends on temperature
            SimplexOptions so;
            so.max_iterations = per_round;
            so.initial_step = cfg.initial_step * std::pow(0.5, r);
            auto st = simplex_maximize([&](const std::vector<double>& xx) { return evaluate(xx, true).objective; },
                                       cur, so, [&](int, const std::vector<double>& bx, double, double size) { record(bx, size); });
            cur = st.best;
            if (best_eta >= 0.0) cur = best_x;
        }
    }

    OptimizeResult res;
    std::vector<double> final_x = best_x.empty() ? cur : best_x;
    res.u = field_of(final_x);
    res.report = exponent_of_metric(model, res.u);
    res.trace = std::move(trace);
    return res;
}

}  // namespace lfl
