#pragma once

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "lfl/dfindex.hpp"
#include "lfl/field_io.hpp"
#include "lfl/verify.hpp"

namespace lfl::cli {

inline constexpr int kPass = 0;
inline constexpr int kToleranceFailure = 2;
inline constexpr int kConfigError = 3;
inline constexpr int kNumericalError = 4;

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<int> size;
    std::optional<std::string> out;
};

namespace detail {

inline void require_keys(const json& j, std::initializer_list<const char*> allowed, const char* where) {
    if (!j.is_object()) throw config_error(std::string(where) + " must be a JSON object");
    for (const auto& [key, ignored] : j.items()) {
        bool ok = false;
        for (const char* a : allowed)
            if (key == a) ok = true;
        if (!ok) throw config_error("unknown key '" + key + "' in " + where);
    }
}

template <class T>
T get_or(const json& j, const char* key, T def) {
    if (!j.contains(key)) return def;
    return j.at(key).get<T>();
}

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace detail

struct MetricSource {
    std::string source;  // "fourier" | "file" | "preset"
    std::uint64_t seed = 1;
    int cutoff = 2;
    double amplitude = 1.0;
    double smoothing = 2.0;
    std::string path;    // base path for "file"
    std::string preset;  // name for "preset"
};

struct LoadedConfig {
    json raw;
    FoliatedModel model;
    std::optional<MetricSource> metric;
    std::filesystem::path outdir = ".";
};

inline FoliatedModel model_from_config(const json& m, const std::optional<int>& size_override) {
    detail::require_keys(m, {"n", "kind", "sizes", "shear", "bounds"}, "model");
    if (!m.contains("n") || !m.contains("kind") || !m.contains("sizes"))
        throw config_error("model needs n, kind, sizes");
    int n = m.at("n").get<int>();
    ModelKind kind;
    try {
        kind = kind_from_name(m.at("kind").get<std::string>());
    } catch (const std::invalid_argument& e) {
        throw config_error(e.what());
    }
    std::vector<int> sizes = m.at("sizes").get<std::vector<int>>();
    if (size_override) sizes.assign(sizes.size(), *size_override);
    std::vector<double> shear;
    if (m.contains("shear")) shear = m.at("shear").get<std::vector<double>>();
    std::vector<Interval> bounds;
    if (m.contains("bounds")) {
        for (const auto& iv : m.at("bounds")) {
            if (!iv.is_array() || iv.size() != 2) throw config_error("bounds entries must be [lo, hi]");
            bounds.push_back({iv.at(0).get<double>(), iv.at(1).get<double>()});
        }
    }
    try {
        return build_model(n, kind, GridSpec{std::move(sizes)}, std::move(shear), std::move(bounds));
    } catch (const std::invalid_argument& e) {
        throw config_error(e.what());
    }
}

inline MetricSource metric_from_config(const json& m, const Overrides& ov) {
    detail::require_keys(m, {"source", "seed", "cutoff", "amplitude", "smoothing", "path", "name"}, "metric");
    MetricSource src;
    src.source = detail::get_or<std::string>(m, "source", "");
    if (src.source == "fourier") {
        src.seed = detail::get_or<std::uint64_t>(m, "seed", 1);
        if (!m.contains("cutoff")) throw config_error("fourier metric needs a cutoff");
        src.cutoff = m.at("cutoff").get<int>();
        src.amplitude = detail::get_or<double>(m, "amplitude", 1.0);
        src.smoothing = detail::get_or<double>(m, "smoothing", 2.0);
    } else if (src.source == "file") {
        if (!m.contains("path")) throw config_error("file metric needs a path");
        src.path = m.at("path").get<std::string>();
    } else if (src.source == "preset") {
        if (!m.contains("name")) throw config_error("preset metric needs a name");
        src.preset = m.at("name").get<std::string>();
    } else {
        throw config_error("metric source must be fourier, file, or preset");
    }
    if (ov.seed) src.seed = *ov.seed;
    return src;
}

inline LoadedConfig load_config(const std::filesystem::path& path, const Overrides& ov,
                                bool need_metric) {
    json raw = read_json_file(path);
    detail::require_keys(raw, {"model", "metric", "check", "exponent", "optimize", "output"}, "config");

    LoadedConfig cfg;
    cfg.raw = raw;
    if (raw.contains("metric")) cfg.metric = metric_from_config(raw.at("metric"), ov);
    if (need_metric && !cfg.metric) throw config_error("config needs a metric section");

    bool metric_is_file = cfg.metric && cfg.metric->source == "file";
    if (raw.contains("model")) {
        cfg.model = model_from_config(raw.at("model"), ov.size);
        if (metric_is_file) {
            MetricFile mf = read_metric(cfg.metric->path);
            if (mf.model.n != cfg.model.n || mf.model.kind != cfg.model.kind ||
                mf.model.grid.sizes != cfg.model.grid.sizes)
                throw config_error("metric file does not match the configured model");
        }
    } else if (metric_is_file) {
        cfg.model = read_metric(cfg.metric->path).model;
    } else {
        throw config_error("config needs a model section");
    }

    cfg.outdir = detail::get_or<std::string>(raw, "output", ".");
    if (ov.out) cfg.outdir = *ov.out;
    return cfg;
}

inline int min_grid_size(const FoliatedModel& model) {
    int m = model.size(0);
    for (int a = 1; a < model.dims(); ++a) m = std::min(m, model.size(a));
    return m;
}

inline RField realize_metric(const FoliatedModel& model, const MetricSource& src) {
    if (src.source == "fourier") {
        if (src.cutoff > min_grid_size(model) / 4)
            throw config_error("fourier cutoff exceeds grid size / 4");
        FourierMetric fm =
            seeded_fourier_metric(model.dims(), src.cutoff, src.smoothing, src.amplitude, src.seed);
        return synthesize_metric(model, fm);
    }
    if (src.source == "file") {
        MetricFile mf = read_metric(src.path);
        if (mf.model.grid.sizes != model.grid.sizes)
            throw config_error("metric file grid does not match the model");
        return std::move(mf.u);
    }
    return preset_metric(model, src.preset);
}

inline json model_report_json(const FoliatedModel& model) { return model_to_json(model); }

inline json exponent_to_json(const ExponentReport& r) {
    json j;
    j["eta"] = r.eta;
    j["feasible"] = r.feasible;
    j["min_theta_eig"] = r.min_theta_eig;
    j["s_max"] = r.has_s_max ? json(r.s_max) : json(nullptr);
    j["argmax_point"] = r.argmax_point.empty() ? json(nullptr) : json(r.argmax_point);
    j["mean_trace_theta"] = r.mean_trace_theta;
    return j;
}

/// Plane slice through the (x_1, y_1) axes with every other index at its
/// midpoint; CSV columns x,y,value.
inline void write_plane_slice(const std::filesystem::path& path, const FoliatedModel& model,
                              const RField& f) {
    std::vector<int> idx(static_cast<std::size_t>(model.dims()));
    for (int a = 0; a < model.dims(); ++a) idx[static_cast<std::size_t>(a)] = model.size(a) / 2;
    std::string csv = "x,y,value\n";
    for (int i = 0; i < model.size(0); ++i) {
        for (int j = 0; j < model.size(1); ++j) {
            idx[0] = i;
            idx[1] = j;
            csv += detail::format_double(model.coordinate(0, i));
            csv += ',';
            csv += detail::format_double(model.coordinate(1, j));
            csv += ',';
            csv += detail::format_double(f[f.flat_index(idx)]);
            csv += '\n';
        }
    }
    lfl::detail::write_file_bytes(path, csv);
}

inline void write_trace_csv(const std::filesystem::path& path, const std::vector<TraceRow>& trace) {
    std::string csv = "iteration,min_eig,s_max,eta,simplex_size\n";
    for (const TraceRow& row : trace) {
        csv += std::to_string(row.iteration);
        csv += ',';
        csv += detail::format_double(row.min_eig);
        csv += ',';
        csv += detail::format_double(row.s_max);
        csv += ',';
        csv += detail::format_double(row.eta);
        csv += ',';
        csv += detail::format_double(row.simplex_size);
        csv += '\n';
    }
    lfl::detail::write_file_bytes(path, csv);
}

inline json base_report(const std::string& check, const LoadedConfig& cfg) {
    json j;
    j["check"] = check;
    j["model"] = model_report_json(cfg.model);
    j["seed"] = (cfg.metric && cfg.metric->source == "fourier") ? json(cfg.metric->seed) : json(nullptr);
    return j;
}

inline int finish_report(const LoadedConfig& cfg, const std::string& name, json& report, bool pass) {
    report["pass"] = pass;
    write_json_file(cfg.outdir / ("report_" + name + ".json"), report);
    return pass ? kPass : kToleranceFailure;
}

// command bodies; each returns the process exit code

inline int cmd_gen_metric(const std::filesystem::path& config_path, const Overrides& ov) {
    LoadedConfig cfg = load_config(config_path, ov, true);
    if (cfg.metric->source != "fourier") throw config_error("gen-metric needs a fourier metric source");
    RField u = realize_metric(cfg.model, *cfg.metric);
    write_metric(cfg.outdir / "metric", cfg.model, u);
    return kPass;
}

inline double default_check_tolerance(const std::string& which, int n) {
    if (which == "identity") return 1e-7;
    if (which == "exactness") return n == 1 ? 1e-7 : 1e-5;
    if (which == "integral") return n == 1 ? 1e-8 : 1e-6;
    return 1e-8;  // remark
}

inline int cmd_check(const std::string& which, const std::filesystem::path& config_path, const Overrides& ov) {
    if (which != "identity" && which != "exactness" && which != "integral" && which != "remark")
        throw config_error("unknown check '" + which + "'");
    LoadedConfig cfg = load_config(config_path, ov, true);
    json params = cfg.raw.contains("check") ? cfg.raw.at("check") : json::object();
    detail::require_keys(params, {"tolerance", "c", "imag_tolerance"}, "check");
    double tol = detail::get_or<double>(params, "tolerance", default_check_tolerance(which, cfg.model.n));

    RField u = realize_metric(cfg.model, *cfg.metric);
    json report = base_report(which, cfg);
    report["tolerance"] = tol;

    if (which == "identity") {
        IdentityReport r = check_structure_identities(cfg.model, u);
        report["residual"] = r.max();
        report["details"] = {{"residual_d_eta", r.residual_d_eta}, {"residual_d_alpha", r.residual_d_alpha}};
        return finish_report(cfg, which, report, r.max() <= tol);
    }
    if (which == "exactness") {
        double c = detail::get_or<double>(params, "c", 1.0 / cfg.model.n);
        ExactnessReport r = check_exactness(cfg.model, u, c);
        report["residual"] = r.residual;
        report["details"] = {{"bulk_sup", r.bulk_sup}, {"c", c}};
        DifferentialForm bulk = bulk_form(cfg.model, u, c);
        write_plane_slice(cfg.outdir / "slice_bulk.csv", cfg.model,
                          real_part(bulk.comps.at((1u << cfg.model.dims()) - 1u)));
        return finish_report(cfg, which, report, r.residual <= tol);
    }
    if (which == "integral") {
        IntegralReport r = check_main_integral(cfg.model, u);
        report["residual"] = r.relative();
        report["details"] = {{"integral_re", r.integral.real()},
                             {"integral_im", r.integral.imag()},
                             {"bulk_sup", r.bulk_sup},
                             {"volume", r.volume}};
        DifferentialForm bulk = bulk_form(cfg.model, u, 1.0 / cfg.model.n);
        write_plane_slice(cfg.outdir / "slice_bulk.csv", cfg.model,
                          real_part(bulk.comps.at((1u << cfg.model.dims()) - 1u)));
        return finish_report(cfg, which, report, r.relative() <= tol);
    }
    // remark
    double imag_tol = detail::get_or<double>(params, "imag_tolerance", 1e-9);
    RemarkReport r = check_remark_equality(cfg.model, u);
    report["residual"] = r.relative_gap();
    report["details"] = {{"lhs_re", r.lhs.real()},
                         {"lhs_im", r.lhs.imag()},
                         {"rhs_re", r.rhs.real()},
                         {"rhs_im", r.rhs.imag()},
                         {"imag_residual", r.imag_residual()},
                         {"imag_tolerance", imag_tol}};
    bool pass = r.relative_gap() <= tol && r.imag_residual() <= imag_tol;
    return finish_report(cfg, which, report, pass);
}

inline int cmd_exponent(const std::filesystem::path& config_path, const Overrides& ov) {
    LoadedConfig cfg = load_config(config_path, ov, true);
    json params = cfg.raw.contains("exponent") ? cfg.raw.at("exponent") : json::object();
    detail::require_keys(params,
                         {"expected_eta", "tolerance", "compare_oracle", "bisection_tolerance", "oracle_tolerance"},
                         "exponent");

    RField u = realize_metric(cfg.model, *cfg.metric);
    MetricGeometry g = metric_geometry(cfg.model, u);
    ExponentReport r = exponent_report(cfg.model, g);

    json report = base_report("exponent", cfg);
    report["details"] = exponent_to_json(r);

    bool pass = true;
    double residual = 0.0;
    double tol = detail::get_or<double>(params, "tolerance", 1e-6);
    if (params.contains("expected_eta")) {
        residual = std::fabs(r.eta - params.at("expected_eta").get<double>());
        pass = residual <= tol;
    }
    if (detail::get_or<bool>(params, "compare_oracle", false)) {
        double btol = detail::get_or<double>(params, "bisection_tolerance", 1e-7);
        double otol = detail::get_or<double>(params, "oracle_tolerance", 1e-6);
        double oracle = exponent_bisection_oracle(cfg.model, u, btol);
        double gap = std::fabs(oracle - r.eta);
        report["details"]["bisection_eta"] = oracle;
        report["details"]["bisection_gap"] = gap;
        residual = std::max(residual, gap);
        if (gap > otol) pass = false;
    }
    report["residual"] = residual;
    report["tolerance"] = tol;

    write_plane_slice(cfg.outdir / "slice_min_eig.csv", cfg.model, theta_min_eig_field(g));
    if (r.feasible) write_plane_slice(cfg.outdir / "slice_s.csv", cfg.model, pointwise_s(g));
    return finish_report(cfg, "exponent", report, pass);
}

inline int cmd_optimize(const std::filesystem::path& config_path, const Overrides& ov) {
    LoadedConfig cfg = load_config(config_path, ov, false);
    json params = cfg.raw.contains("optimize") ? cfg.raw.at("optimize") : json::object();
    detail::require_keys(params,
                         {"cutoff", "smoothing", "amplitude", "seed", "base_preset", "phase1_iterations",
                          "phase2_iterations", "anneal_rounds", "start_temperature", "end_temperature",
                          "initial_step", "bound_tolerance"},
                         "optimize");

    FourierMetric fam;
    fam.cutoff = detail::get_or<int>(params, "cutoff", 2);
    fam.smoothing = detail::get_or<double>(params, "smoothing", 2.0);
    fam.amplitude = detail::get_or<double>(params, "amplitude", 1.0);
    std::uint64_t seed = detail::get_or<std::uint64_t>(params, "seed", 1);
    if (ov.seed) seed = *ov.seed;

    OptimizeConfig oc;
    oc.phase1_iterations = detail::get_or<int>(params, "phase1_iterations", oc.phase1_iterations);
    oc.phase2_iterations = detail::get_or<int>(params, "phase2_iterations", oc.phase2_iterations);
    oc.anneal_rounds = detail::get_or<int>(params, "anneal_rounds", oc.anneal_rounds);
    oc.start_temperature = detail::get_or<double>(params, "start_temperature", oc.start_temperature);
    oc.end_temperature = detail::get_or<double>(params, "end_temperature", oc.end_temperature);
    oc.initial_step = detail::get_or<double>(params, "initial_step", oc.initial_step);
    oc.base_preset = detail::get_or<std::string>(params, "base_preset", "");

    OptimizeResult res = optimize_metric(cfg.model, fam, oc, seed);

    write_metric(cfg.outdir / "optimized", cfg.model, res.u);
    write_trace_csv(cfg.outdir / "trace.csv", res.trace);

    json report = base_report("optimize", cfg);
    report["seed"] = seed;
    report["details"] = exponent_to_json(res.report);
    const bool compact = cfg.model.kind != ModelKind::OpenPatch;
    double bound_tol = detail::get_or<double>(params, "bound_tolerance", 1e-9);
    double bound = 1.0 / (cfg.model.n + 1);
    bool pass = true;
    double residual = 0.0;
    if (compact) {
        residual = std::max(0.0, res.report.eta - bound);
        pass = residual <= bound_tol;
        if (!res.report.feasible && std::fabs(res.report.mean_trace_theta) <= 1e-10)
            report["details"]["reason"] = "mean trace of Theta vanishes on a fully periodic model";
    }
    report["residual"] = residual;
    report["tolerance"] = bound_tol;

    if (res.report.feasible) {
        MetricGeometry g = metric_geometry(cfg.model, res.u);
        write_plane_slice(cfg.outdir / "slice_min_eig.csv", cfg.model, theta_min_eig_field(g));
        write_plane_slice(cfg.outdir / "slice_s.csv", cfg.model, pointwise_s(g));
    }
    return finish_report(cfg, "optimize", report, pass);
}

inline int cmd_report_merge(const std::vector<std::string>& inputs, const std::string& out) {
    if (inputs.empty()) throw config_error("report merge needs at least one input");
    json merged = json::array();
    for (const std::string& in : inputs) {
        json j = read_json_file(in);
        if (j.is_array())
            for (auto& e : j) merged.push_back(e);
        else
            merged.push_back(j);
    }
    json wrapper;
    wrapper["reports"] = merged;
    write_json_file(out, wrapper);
    return kPass;
}

/// Wraps a command body, mapping exceptions to the exit-code contract and
/// emitting a one-line machine-readable failure report on stderr.
template <class Fn>
int guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const config_error& e) {
        std::cerr << json{{"error", "config"}, {"message", e.what()}}.dump() << "\n";
        return kConfigError;
    } catch (const not_positive_error& e) {
        std::cerr << json{{"error", "numerical"}, {"message", e.what()}}.dump() << "\n";
        return kNumericalError;
    } catch (const numeric_error& e) {
        std::cerr << json{{"error", "numerical"}, {"message", e.what()}}.dump() << "\n";
        return kNumericalError;
    } catch (const std::exception& e) {
        std::cerr << json{{"error", "config"}, {"message", e.what()}}.dump() << "\n";
        return kConfigError;
    }
}

}  // namespace lfl::cli
