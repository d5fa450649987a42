#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "lfl/exterior.hpp"
#include "lfl/model.hpp"

namespace lfl {

using nlohmann::json;

namespace detail {

inline void put_u32(std::string& buf, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

inline void put_f64(std::string& buf, double x) {
    std::uint64_t v{};
    std::memcpy(&v, &x, 8);
    for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

struct ByteReader {
    const std::string& buf;
    std::size_t pos = 0;

    void need(std::size_t n) const {
        if (pos + n > buf.size()) throw config_error("field file truncated");
    }
    std::uint8_t u8() {
        need(1);
        return static_cast<std::uint8_t>(buf[pos++]);
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(buf[pos + static_cast<std::size_t>(i)])) << (8 * i);
        pos += 4;
        return v;
    }
    double f64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<std::uint8_t>(buf[pos + static_cast<std::size_t>(i)])) << (8 * i);
        pos += 8;
        double x{};
        std::memcpy(&x, &v, 8);
        return x;
    }
};

inline constexpr char kMagic[8] = {'L', 'F', 'L', 'D', '1', '\0', '\0', '\0'};

inline std::string read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("cannot open " + path.string());
    std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return buf;
}

inline void write_file_bytes(const std::filesystem::path& path, const std::string& buf) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw config_error("cannot write " + path.string());
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw config_error("write failed for " + path.string());
}

inline std::string field_header(const std::vector<int>& shape, std::uint8_t kind) {
    std::string buf(kMagic, kMagic + 8);
    put_u32(buf, static_cast<std::uint32_t>(shape.size()));
    for (int s : shape) put_u32(buf, static_cast<std::uint32_t>(s));
    buf.push_back(static_cast<char>(kind));
    return buf;
}

}  // namespace detail

/// Binary field file: 8-byte magic "LFLD1\0\0\0", u32 rank, u32 size per
/// axis, u8 scalar kind (0 = real f64, 1 = complex f64 interleaved re/im),
/// then the row-major payload. All integers and doubles little-endian.
inline void write_field(const std::filesystem::path& path, const RField& f) {
    std::string buf = detail::field_header(f.shape, 0);
    buf.reserve(buf.size() + 8 * static_cast<std::size_t>(f.size()));
    for (std::int64_t i = 0; i < f.size(); ++i) detail::put_f64(buf, f[i]);
    detail::write_file_bytes(path, buf);
}

inline void write_field(const std::filesystem::path& path, const CField& f) {
    std::string buf = detail::field_header(f.shape, 1);
    buf.reserve(buf.size() + 16 * static_cast<std::size_t>(f.size()));
    for (std::int64_t i = 0; i < f.size(); ++i) {
        detail::put_f64(buf, f[i].real());
        detail::put_f64(buf, f[i].imag());
    }
    detail::write_file_bytes(path, buf);
}

struct StoredField {
    int kind = 0;  // 0 real, 1 complex
    RField real;
    CField cplx;

    std::vector<int> shape() const { return kind == 0 ? real.shape : cplx.shape; }
};

inline StoredField read_field(const std::filesystem::path& path) {
    std::string buf = detail::read_file_bytes(path);
    detail::ByteReader r{buf};
    r.need(8);
    if (std::memcmp(buf.data(), detail::kMagic, 8) != 0) throw config_error("bad magic in " + path.string());
    r.pos = 8;
    std::uint32_t rank = r.u32();
    if (rank == 0 || rank > 16) throw config_error("bad rank in " + path.string());
    std::vector<int> shape(rank);
    std::int64_t count = 1;
    for (auto& s : shape) {
        std::uint32_t v = r.u32();
        if (v == 0 || v > (1u << 24)) throw config_error("bad axis size in " + path.string());
        s = static_cast<int>(v);
        count *= s;
    }
    std::uint8_t kind = r.u8();
    StoredField out;
    out.kind = kind;
    if (kind == 0) {
        out.real = RField(shape);
        for (std::int64_t i = 0; i < count; ++i) out.real[i] = r.f64();
    } else if (kind == 1) {
        out.cplx = CField(shape);
        for (std::int64_t i = 0; i < count; ++i) {
            double re = r.f64();
            double im = r.f64();
            out.cplx[i] = complex(re, im);
        }
    } else {
        throw config_error("bad scalar kind in " + path.string());
    }
    if (r.pos != buf.size()) throw config_error("trailing bytes in " + path.string());
    return out;
}

inline RField read_real_field(const std::filesystem::path& path) {
    StoredField s = read_field(path);
    if (s.kind != 0) throw config_error("expected real field in " + path.string());
    return std::move(s.real);
}

inline CField read_complex_field(const std::filesystem::path& path) {
    StoredField s = read_field(path);
    if (s.kind != 1) throw config_error("expected complex field in " + path.string());
    return std::move(s.cplx);
}

/// Sidecar describing the model a field lives on. The binary header is the
/// authority on grid sizes; the sidecar repeats them for readability and the
/// two must agree on read.
inline json model_to_json(const FoliatedModel& model) {
    json j;
    j["kind"] = kind_name(model.kind);
    j["n"] = model.n;
    j["sizes"] = model.grid.sizes;
    j["shear"] = model.shear;
    json b = json::array();
    for (const auto& iv : model.bounds) b.push_back(json::array({iv.lo, iv.hi}));
    j["bounds"] = b;
    return j;
}

inline FoliatedModel model_from_json(const json& j, const std::vector<int>& sizes) {
    if (!j.is_object()) throw config_error("model sidecar must be an object");
    for (const auto& [key, ignored] : j.items())
        if (key != "kind" && key != "n" && key != "sizes" && key != "shear" && key != "bounds")
            throw config_error("unknown key in model sidecar: " + key);
    if (j.contains("sizes") && j.at("sizes").get<std::vector<int>>() != sizes)
        throw config_error("model sidecar sizes do not match the field header");
    if (!j.contains("kind") || !j.contains("n")) throw config_error("model sidecar needs kind and n");
    ModelKind kind = kind_from_name(j.at("kind").get<std::string>());
    int n = j.at("n").get<int>();
    std::vector<double> shear;
    if (j.contains("shear")) shear = j.at("shear").get<std::vector<double>>();
    std::vector<Interval> bounds;
    if (j.contains("bounds")) {
        for (const auto& iv : j.at("bounds")) {
            if (!iv.is_array() || iv.size() != 2) throw config_error("bounds entries must be [lo, hi]");
            bounds.push_back({iv.at(0).get<double>(), iv.at(1).get<double>()});
        }
    }
    return build_model(n, kind, GridSpec{sizes}, shear, bounds);
}

inline void write_json_file(const std::filesystem::path& path, const json& j) {
    detail::write_file_bytes(path, j.dump(2) + "\n");
}

inline json read_json_file(const std::filesystem::path& path) {
    std::string buf = detail::read_file_bytes(path);
    json j = json::parse(buf, nullptr, false);
    if (j.is_discarded()) throw config_error("invalid JSON in " + path.string());
    return j;
}

/// Metric on disk: <base>.lfld holds u = log h, <base>.json the model sidecar.
inline void write_metric(const std::filesystem::path& base, const FoliatedModel& model, const RField& u) {
    std::filesystem::path lfld = base;
    lfld += ".lfld";
    std::filesystem::path side = base;
    side += ".json";
    write_field(lfld, u);
    write_json_file(side, model_to_json(model));
}

struct MetricFile {
    FoliatedModel model;
    RField u;
};

inline MetricFile read_metric(const std::filesystem::path& base) {
    std::filesystem::path lfld = base;
    lfld += ".lfld";
    std::filesystem::path side = base;
    side += ".json";
    RField u = read_real_field(lfld);
    FoliatedModel model = model_from_json(read_json_file(side), u.shape);
    nan_check(u, ("metric file " + lfld.string()).c_str());
    return {std::move(model), std::move(u)};
}

/// Form on disk: <base>.json manifest plus one component file per tuple,
/// named <base>_c<axes joined by "-">.lfld ("scalar" for the empty tuple).
inline std::string component_file_name(const std::string& stem, std::uint32_t mask) {
    std::string tag;
    if (mask == 0) {
        tag = "scalar";
    } else {
        for (int axis : mask_to_tuple(mask)) {
            if (!tag.empty()) tag += "-";
            tag += std::to_string(axis);
        }
    }
    return stem + "_c" + tag + ".lfld";
}

inline void write_form(const std::filesystem::path& base, const FoliatedModel& model, const DifferentialForm& form) {
    std::filesystem::path dir = base.has_parent_path() ? base.parent_path() : std::filesystem::path(".");
    std::string stem = base.filename().string();
    json manifest;
    manifest["degree"] = form.degree;
    manifest["model"] = model_to_json(model);
    json comps = json::array();
    for (const auto& [mask, field] : form.comps) {
        std::string fname = component_file_name(stem, mask);
        write_field(dir / fname, field);
        json entry;
        entry["axes"] = mask_to_tuple(mask);
        entry["file"] = fname;
        comps.push_back(entry);
    }
    manifest["components"] = comps;
    std::filesystem::path man = base;
    man += ".json";
    write_json_file(man, manifest);
}

struct FormFile {
    FoliatedModel model;
    DifferentialForm form;
};

inline FormFile read_form(const std::filesystem::path& base) {
    std::filesystem::path man = base;
    man += ".json";
    json manifest = read_json_file(man);
    if (!manifest.is_object() || !manifest.contains("degree") || !manifest.contains("model") ||
        !manifest.contains("components"))
        throw config_error("form manifest needs degree, model, components");
    std::filesystem::path dir = base.has_parent_path() ? base.parent_path() : std::filesystem::path(".");
    DifferentialForm form = make_form(manifest.at("degree").get<int>());
    std::vector<int> sizes;
    for (const auto& entry : manifest.at("components")) {
        std::vector<int> axes = entry.at("axes").get<std::vector<int>>();
        CField f = read_complex_field(dir / entry.at("file").get<std::string>());
        sizes = f.shape;
        set_component(form, axes, std::move(f));
    }
    if (sizes.empty()) throw config_error("form manifest lists no components");
    FoliatedModel model = model_from_json(manifest.at("model"), sizes);
    return {std::move(model), std::move(form)};
}

}  // namespace lfl
