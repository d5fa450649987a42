#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <sys/wait.h>

#include "golden.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

#include "lfl/cli.hpp"

using namespace lfl;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    fs::path p = fs::current_path() / ("scratch_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string cli_path() {
    const char* p = std::getenv("LFL_CLI");
    REQUIRE(p != nullptr);
    return p;
}

int run_cli(const std::string& args, const std::string& env = "") {
    std::string cmd = env + (env.empty() ? "" : " ") + cli_path() + " " + args + " >/dev/null 2>&1";
    int rc = std::system(cmd.c_str());
    REQUIRE(rc != -1);
    return WEXITSTATUS(rc);
}

json torus_config(int size, std::uint64_t seed, int cutoff, double amplitude) {
    json cfg;
    cfg["model"] = {{"n", 1},
                    {"kind", "periodic_product"},
                    {"sizes", std::vector<int>{size, size, size}}};
    cfg["metric"] = {{"source", "fourier"},
                     {"seed", seed},
                     {"cutoff", cutoff},
                     {"smoothing", 2.0},
                     {"amplitude", amplitude}};
    return cfg;
}

}  // namespace

TEST_CASE("field files round trip bit for bit") {
    fs::path dir = scratch_dir("field_io");
    FoliatedModel m = helpers::t3(8);
    RField r = oracle::seeded_trig_field(m, 3, 2, 1.0);
    write_field(dir / "r.lfld", r);
    RField r2 = read_real_field(dir / "r.lfld");
    REQUIRE(r2.shape == r.shape);
    REQUIRE(helpers::bitwise_equal(r, r2));

    CField c(m.grid.sizes);
    for (std::int64_t i = 0; i < c.size(); ++i) c[i] = complex(r[i], -2.0 * r[i]);
    write_field(dir / "c.lfld", c);
    CField c2 = read_complex_field(dir / "c.lfld");
    REQUIRE(helpers::bitwise_equal(c, c2));
}

TEST_CASE("malformed field files are rejected") {
    fs::path dir = scratch_dir("field_bad");
    FoliatedModel m = helpers::t3(8);
    write_field(dir / "good.lfld", preset_metric(m, "zero"));

    std::string bytes = lfl::detail::read_file_bytes(dir / "good.lfld");
    std::string wrong_magic = bytes;
    wrong_magic[0] = 'X';
    lfl::detail::write_file_bytes(dir / "bad_magic.lfld", wrong_magic);
    REQUIRE_THROWS_AS(read_real_field(dir / "bad_magic.lfld"), config_error);

    lfl::detail::write_file_bytes(dir / "truncated.lfld", bytes.substr(0, bytes.size() / 2));
    REQUIRE_THROWS_AS(read_real_field(dir / "truncated.lfld"), config_error);

    lfl::detail::write_file_bytes(dir / "trailing.lfld", bytes + "xx");
    REQUIRE_THROWS_AS(read_real_field(dir / "trailing.lfld"), config_error);

    REQUIRE_THROWS_AS(read_real_field(dir / "missing.lfld"), config_error);

    // complex payload read as real
    CField c(m.grid.sizes);
    write_field(dir / "cplx.lfld", c);
    REQUIRE_THROWS_AS(read_real_field(dir / "cplx.lfld"), config_error);
}

TEST_CASE("metric files carry their model") {
    fs::path dir = scratch_dir("metric_io");
    const double lambda = 0.375;
    FoliatedModel m = helpers::t3_sheared(8, lambda);
    RField u = oracle::seeded_trig_field(m, 5, 2, 0.5);
    write_metric(dir / "meta", m, u);
    MetricFile mf = read_metric(dir / "meta");
    REQUIRE(mf.model.kind == m.kind);
    REQUIRE(mf.model.n == m.n);
    REQUIRE(mf.model.grid.sizes == m.grid.sizes);
    REQUIRE(mf.model.shear == m.shear);
    REQUIRE(helpers::bitwise_equal(mf.u, u));
}

TEST_CASE("model JSON rejects unknown keys") {
    FoliatedModel m = helpers::t3(8);
    json j = model_to_json(m);
    j["surprise"] = 1;
    REQUIRE_THROWS_AS(model_from_json(j, m.grid.sizes), config_error);
}

TEST_CASE("form files round trip") {
    fs::path dir = scratch_dir("form_io");
    FoliatedModel m = helpers::t3(8);
    DifferentialForm f = oracle::seeded_trig_form(m, 2, 9, 2, 1.0);
    write_form(dir / "beta", m, f);
    FormFile ff = read_form(dir / "beta");
    REQUIRE(ff.form.degree == 2);
    REQUIRE(ff.form.comps.size() == f.comps.size());
    for (const auto& [mask, field] : f.comps) {
        REQUIRE(ff.form.has(mask));
        REQUIRE(helpers::bitwise_equal(field, ff.form.comps.at(mask)));
    }
}

TEST_CASE("gen-metric is deterministic and matches the golden checksum") {
    fs::path dir = scratch_dir("cli_gen");
    json cfg = torus_config(16, 42, 3, 1.0);
    cfg["output"] = (dir / "a").string();
    write_json_file(dir / "a.json", cfg);
    cfg["output"] = (dir / "b").string();
    write_json_file(dir / "b.json", cfg);

    REQUIRE(run_cli("gen-metric -c " + (dir / "a.json").string()) == 0);
    REQUIRE(run_cli("gen-metric -c " + (dir / "b.json").string()) == 0);

    std::string bytes_a = lfl::detail::read_file_bytes(dir / "a" / "metric.lfld");
    std::string bytes_b = lfl::detail::read_file_bytes(dir / "b" / "metric.lfld");
    REQUIRE(bytes_a == bytes_b);
    std::string side_a = lfl::detail::read_file_bytes(dir / "a" / "metric.json");
    std::string side_b = lfl::detail::read_file_bytes(dir / "b" / "metric.json");
    REQUIRE(side_a == side_b);

    std::uint64_t checksum = fnv1a64(bytes_a.data(), bytes_a.size());
    INFO("metric checksum 0x" << std::hex << checksum);
    if (kGoldenMetricChecksum != 0) REQUIRE(checksum == kGoldenMetricChecksum);
}

TEST_CASE("gen-metric respects flag overrides") {
    fs::path dir = scratch_dir("cli_flags");
    json cfg = torus_config(16, 42, 3, 1.0);
    cfg["output"] = (dir / "base").string();
    write_json_file(dir / "cfg.json", cfg);

    REQUIRE(run_cli("gen-metric -c " + (dir / "cfg.json").string()) == 0);
    REQUIRE(run_cli("gen-metric -c " + (dir / "cfg.json").string() + " --size 12 --out " +
                    (dir / "resized").string()) == 0);
    json side = read_json_file(dir / "resized" / "metric.json");
    REQUIRE(side.at("sizes") == json(std::vector<int>{12, 12, 12}));

    REQUIRE(run_cli("gen-metric -c " + (dir / "cfg.json").string() + " --seed 43 --out " +
                    (dir / "reseeded").string()) == 0);
    std::string base_bytes = lfl::detail::read_file_bytes(dir / "base" / "metric.lfld");
    std::string reseeded = lfl::detail::read_file_bytes(dir / "reseeded" / "metric.lfld");
    REQUIRE(base_bytes != reseeded);

    // cutoff 5 > 12/4: config error
    REQUIRE(run_cli("gen-metric -c " + (dir / "cfg.json").string() + " --size 12 --out " +
                    (dir / "x").string() + " --seed 1") == 0);
    json bad = torus_config(16, 1, 5, 1.0);
    bad["output"] = (dir / "bad").string();
    write_json_file(dir / "bad.json", bad);
    REQUIRE(run_cli("gen-metric -c " + (dir / "bad.json").string() + " --size 12") == 3);
}

TEST_CASE("unknown config keys exit with the config code") {
    fs::path dir = scratch_dir("cli_badkey");
    json cfg = torus_config(8, 1, 2, 0.5);
    cfg["extra_section"] = 1;
    write_json_file(dir / "cfg.json", cfg);
    REQUIRE(run_cli("gen-metric -c " + (dir / "cfg.json").string() + " --out " + dir.string()) == 3);

    json cfg2 = torus_config(8, 1, 2, 0.5);
    cfg2["metric"]["typo"] = true;
    write_json_file(dir / "cfg2.json", cfg2);
    REQUIRE(run_cli("gen-metric -c " + (dir / "cfg2.json").string() + " --out " + dir.string()) == 3);

    REQUIRE(run_cli("check identity -c " + (dir / "does_not_exist.json").string()) == 3);
}

TEST_CASE("check commands write reports and honor tolerances") {
    fs::path dir = scratch_dir("cli_check");
    json cfg = torus_config(32, 7, 3, 0.5);
    cfg["output"] = dir.string();
    write_json_file(dir / "cfg.json", cfg);

    REQUIRE(run_cli("check identity -c " + (dir / "cfg.json").string()) == 0);
    json rep = read_json_file(dir / "report_identity.json");
    REQUIRE(rep.at("check") == "identity");
    REQUIRE(rep.at("pass") == true);
    REQUIRE(rep.at("seed") == 7);
    REQUIRE(rep.at("residual").get<double>() <= rep.at("tolerance").get<double>());
    REQUIRE(rep.at("model").at("kind") == "periodic_product");

    // an unreachable tolerance must fail with exit code 2 and pass = false
    json strict = cfg;
    strict["check"] = {{"tolerance", 1e-18}};
    write_json_file(dir / "strict.json", strict);
    REQUIRE(run_cli("check identity -c " + (dir / "strict.json").string()) == 2);
    json rep2 = read_json_file(dir / "report_identity.json");
    REQUIRE(rep2.at("pass") == false);

    REQUIRE(run_cli("check exactness -c " + (dir / "cfg.json").string()) == 0);
    REQUIRE(fs::exists(dir / "slice_bulk.csv"));
    REQUIRE(run_cli("check integral -c " + (dir / "cfg.json").string()) == 0);
    REQUIRE(run_cli("check remark -c " + (dir / "cfg.json").string()) == 0);
    json rem = read_json_file(dir / "report_remark.json");
    REQUIRE(rem.at("details").contains("imag_residual"));
}

TEST_CASE("reports are byte-stable across runs and thread counts") {
    fs::path dir = scratch_dir("cli_stable");
    json cfg = torus_config(32, 11, 3, 0.5);
    cfg["output"] = dir.string();
    write_json_file(dir / "cfg.json", cfg);

    REQUIRE(run_cli("check identity -c " + (dir / "cfg.json").string(), "LFL_THREADS=1") == 0);
    std::string rep1 = lfl::detail::read_file_bytes(dir / "report_identity.json");
    REQUIRE(run_cli("check identity -c " + (dir / "cfg.json").string(), "LFL_THREADS=4") == 0);
    std::string rep4 = lfl::detail::read_file_bytes(dir / "report_identity.json");
    REQUIRE(rep1 == rep4);

    REQUIRE(run_cli("gen-metric -c " + (dir / "cfg.json").string() + " --out " + (dir / "t1").string(),
                    "LFL_THREADS=1") == 0);
    REQUIRE(run_cli("gen-metric -c " + (dir / "cfg.json").string() + " --out " + (dir / "t4").string(),
                    "LFL_THREADS=4") == 0);
    REQUIRE(lfl::detail::read_file_bytes(dir / "t1" / "metric.lfld") ==
            lfl::detail::read_file_bytes(dir / "t4" / "metric.lfld"));
}

TEST_CASE("exponent command checks the analytic patch value") {
    fs::path dir = scratch_dir("cli_exponent");
    json cfg;
    cfg["model"] = {{"n", 1}, {"kind", "open_patch"}, {"sizes", std::vector<int>{17, 17, 5}}};
    cfg["metric"] = {{"source", "preset"}, {"name", "quadratic"}};
    cfg["exponent"] = {{"expected_eta", 1.0 / 3.0},
                       {"tolerance", 1e-6},
                       {"compare_oracle", true},
                       {"bisection_tolerance", 1e-9},
                       {"oracle_tolerance", 1e-6}};
    cfg["output"] = dir.string();
    write_json_file(dir / "cfg.json", cfg);

    REQUIRE(run_cli("exponent -c " + (dir / "cfg.json").string()) == 0);
    json rep = read_json_file(dir / "report_exponent.json");
    REQUIRE(rep.at("pass") == true);
    REQUIRE(rep.at("details").at("feasible") == true);
    REQUIRE(std::fabs(rep.at("details").at("eta").get<double>() - 1.0 / 3.0) < 1e-6);
    REQUIRE(rep.at("details").at("s_max").get<double>() == Catch::Approx(2.0).margin(1e-9));
    REQUIRE(fs::exists(dir / "slice_s.csv"));
    REQUIRE(fs::exists(dir / "slice_min_eig.csv"));
    std::string csv = lfl::detail::read_file_bytes(dir / "slice_s.csv");
    REQUIRE(csv.rfind("x,y,value\n", 0) == 0);

    // infeasible metric: exponent must report eta = 0 with absent s_max
    json flat;
    flat["model"] = cfg["model"];
    flat["metric"] = {{"source", "preset"}, {"name", "zero"}};
    flat["output"] = (dir / "flat").string();
    write_json_file(dir / "flat.json", flat);
    REQUIRE(run_cli("exponent -c " + (dir / "flat.json").string()) == 0);
    json frep = read_json_file(dir / "flat" / "report_exponent.json");
    REQUIRE(frep.at("details").at("feasible") == false);
    REQUIRE(frep.at("details").at("eta") == 0.0);
    REQUIRE(frep.at("details").at("s_max").is_null());
    REQUIRE(frep.at("details").at("argmax_point").is_null());
}

TEST_CASE("optimize command produces trace and bound-respecting report") {
    fs::path dir = scratch_dir("cli_optimize");
    json cfg;
    cfg["model"] = {{"n", 1}, {"kind", "periodic_product"}, {"sizes", std::vector<int>{8, 8, 8}}};
    cfg["optimize"] = {{"cutoff", 1},
                       {"seed", 3},
                       {"phase1_iterations", 8},
                       {"phase2_iterations", 8},
                       {"anneal_rounds", 1}};
    cfg["output"] = dir.string();
    write_json_file(dir / "cfg.json", cfg);

    REQUIRE(run_cli("optimize -c " + (dir / "cfg.json").string()) == 0);
    json rep = read_json_file(dir / "report_optimize.json");
    REQUIRE(rep.at("check") == "optimize");
    REQUIRE(rep.at("pass") == true);
    REQUIRE(rep.at("details").at("eta") == 0.0);
    REQUIRE(rep.at("details").contains("reason"));
    REQUIRE(fs::exists(dir / "optimized.lfld"));
    std::string trace = lfl::detail::read_file_bytes(dir / "trace.csv");
    REQUIRE(trace.rfind("iteration,min_eig,s_max,eta,simplex_size\n", 0) == 0);
    REQUIRE(std::count(trace.begin(), trace.end(), '\n') >= 2);
}

TEST_CASE("report merge bundles result files") {
    fs::path dir = scratch_dir("cli_merge");
    json a = {{"check", "identity"}, {"pass", true}};
    json b = {{"check", "integral"}, {"pass", true}};
    write_json_file(dir / "a.json", a);
    write_json_file(dir / "b.json", b);
    REQUIRE(run_cli("report merge " + (dir / "a.json").string() + " " + (dir / "b.json").string() +
                    " --out " + (dir / "merged.json").string()) == 0);
    json merged = read_json_file(dir / "merged.json");
    REQUIRE(merged.at("reports").size() == 2);
    REQUIRE(merged.at("reports")[0].at("check") == "identity");
}

TEST_CASE("metric files can feed the check commands") {
    fs::path dir = scratch_dir("cli_file_metric");
    json gen = torus_config(32, 13, 3, 0.5);
    gen["output"] = dir.string();
    write_json_file(dir / "gen.json", gen);
    REQUIRE(run_cli("gen-metric -c " + (dir / "gen.json").string()) == 0);

    json chk;
    chk["metric"] = {{"source", "file"}, {"path", (dir / "metric").string()}};
    chk["output"] = (dir / "out").string();
    write_json_file(dir / "chk.json", chk);
    REQUIRE(run_cli("check identity -c " + (dir / "chk.json").string()) == 0);
    json rep = read_json_file(dir / "out" / "report_identity.json");
    REQUIRE(rep.at("pass") == true);
    REQUIRE(rep.at("seed").is_null());
    REQUIRE(rep.at("model").at("sizes") == json(std::vector<int>{32, 32, 32}));

    // mismatched explicit model section
    json bad = chk;
    bad["model"] = {{"n", 1}, {"kind", "periodic_product"}, {"sizes", std::vector<int>{8, 8, 8}}};
    write_json_file(dir / "bad.json", bad);
    REQUIRE(run_cli("check identity -c " + (dir / "bad.json").string()) == 3);
}
