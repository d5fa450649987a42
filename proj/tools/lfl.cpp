#include <CLI11.hpp>

#include "lfl/cli.hpp"

namespace {

struct CommonFlags {
    std::string config;
    lfl::cli::Overrides ov;
    std::uint64_t seed = 0;
    int size = 0;
    std::string out;
};

void attach_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("-c,--config", f.config, "run configuration (JSON)")->required();
    cmd->add_option("--seed", f.seed, "override the metric seed");
    cmd->add_option("--size", f.size, "override every grid axis size");
    cmd->add_option("--out", f.out, "override the output directory");
}

void collect(CLI::App* cmd, CommonFlags& f) {
    if (cmd->count("--seed")) f.ov.seed = f.seed;
    if (cmd->count("--size")) f.ov.size = f.size;
    if (cmd->count("--out")) f.ov.out = f.out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Levi-flat foliated metric toolkit"};
    app.require_subcommand(1);

    CommonFlags gen, chk, exp, opt;
    std::string check_kind;
    std::vector<std::string> merge_inputs;
    std::string merge_out = "merged.json";

    CLI::App* c_gen = app.add_subcommand("gen-metric", "synthesize a seeded metric and write it");
    attach_common(c_gen, gen);

    CLI::App* c_chk = app.add_subcommand("check", "run a structural or integral check");
    c_chk->add_option("kind", check_kind, "identity | exactness | integral | remark")->required();
    attach_common(c_chk, chk);

    CLI::App* c_exp = app.add_subcommand("exponent", "compute the positivity exponent of a metric");
    attach_common(c_exp, exp);

    CLI::App* c_opt = app.add_subcommand("optimize", "search a Fourier family for the best exponent");
    attach_common(c_opt, opt);

    CLI::App* c_rep = app.add_subcommand("report", "report utilities");
    CLI::App* c_mrg = c_rep->add_subcommand("merge", "merge report files into one document");
    c_mrg->add_option("inputs", merge_inputs, "report JSON files")->required();
    c_mrg->add_option("--out", merge_out, "merged output file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : lfl::cli::kConfigError;
    }

    if (c_gen->parsed()) {
        collect(c_gen, gen);
        return lfl::cli::guarded([&] { return lfl::cli::cmd_gen_metric(gen.config, gen.ov); });
    }
    if (c_chk->parsed()) {
        collect(c_chk, chk);
        return lfl::cli::guarded([&] { return lfl::cli::cmd_check(check_kind, chk.config, chk.ov); });
    }
    if (c_exp->parsed()) {
        collect(c_exp, exp);
        return lfl::cli::guarded([&] { return lfl::cli::cmd_exponent(exp.config, exp.ov); });
    }
    if (c_opt->parsed()) {
        collect(c_opt, opt);
        return lfl::cli::guarded([&] { return lfl::cli::cmd_optimize(opt.config, opt.ov); });
    }
    if (c_mrg->parsed())
        return lfl::cli::guarded([&] { return lfl::cli::cmd_report_merge(merge_inputs, merge_out); });
    return lfl::cli::kConfigError;
}
