#include <CLI11.hpp>

#include <cstdint>
#include <string>
#include <vector>

#include "nsreduce/pipeline.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Constraint-system reduction of incompressible flow: symbol checks, "
                 "kernel studies, bound estimation, fixed-point runs, residual reports"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_override;
    int threads = 1;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::vector<std::string> stage_list;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "path to the run configuration")->required();
        sub->add_option("--out", out_override, "output directory (overrides config)");
        sub->add_option("--threads", threads, "worker threads for grid kernels")
            ->check(CLI::PositiveNumber);
        sub->add_option_function<std::uint64_t>(
            "--seed",
            [&](std::uint64_t v) {
                seed = v;
                seed_set = true;
            },
            "seed for randomized sweeps (overrides config)");
    };

    CLI::App* sc = app.add_subcommand("symbol-check", "frequency-domain identity sweep");
    CLI::App* kc = app.add_subcommand("kernel-check", "integral-kernel refinement studies");
    CLI::App* bd = app.add_subcommand("bounds", "bound-constant estimation and admissibility");
    CLI::App* rn = app.add_subcommand("run", "fixed-point iteration");
    CLI::App* vf = app.add_subcommand("verify", "residual report from stored fields");
    CLI::App* al = app.add_subcommand("all", "all stages in order");
    for (CLI::App* sub : {sc, kc, bd, rn, vf}) add_common(sub);
    add_common(al);
    al->add_option("--stages", stage_list, "subset of stages to run");

    CLI11_PARSE(app, argc, argv);

    nsreduce::PipelineOptions opt;
    opt.out_override = out_override;
    opt.threads = threads;
    if (seed_set) opt.seed_override = seed;

    if (sc->parsed()) opt.stages = {"symbol-check"};
    else if (kc->parsed()) opt.stages = {"kernel-check"};
    else if (bd->parsed()) opt.stages = {"bounds"};
    else if (rn->parsed()) opt.stages = {"run"};
    else if (vf->parsed()) opt.stages = {"verify"};
    else if (al->parsed()) opt.stages = stage_list;  // empty selects every stage

    return nsreduce::run_pipeline(config_path, opt);
}
