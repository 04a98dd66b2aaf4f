#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "twinflow/cli/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"twinflow: a two-dialect microscopic traffic simulator and equivalence lab"};
    app.require_subcommand(1);

    std::string config_path;
    std::string plan_path;
    std::string dialect = "A";
    std::string out_dir = ".";
    std::uint64_t seed = 0;
    bool seed_set = false;
    unsigned workers = 0;
    bool workers_set = false;
    bool self_pair = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--out", out_dir, "output directory");
        cmd->add_option("--seed", seed, "engine seed override")->each([&](const std::string&) {
            seed_set = true;
        });
        cmd->add_option("--workers", workers, "worker threads (TWINFLOW_WORKERS overrides)")
            ->each([&](const std::string&) { workers_set = true; });
    };

    CLI::App* run = app.add_subcommand("run", "run one scenario in one dialect");
    run->add_option("--config", config_path, "scenario config JSON")->required();
    run->add_option("--dialect", dialect, "A or B")->check(CLI::IsMember({"A", "B"}));
    add_common(run);

    CLI::App* compare = app.add_subcommand("compare", "paired A/B comparison of one scenario");
    compare->add_option("--config", config_path, "scenario config JSON")->required();
    compare->add_flag("--self-pair", self_pair, "compare dialect A against itself");
    add_common(compare);

    CLI::App* experiment = app.add_subcommand("experiment", "full factorial virtual experiment");
    experiment->add_option("--plan", plan_path, "experiment plan JSON")->required();
    add_common(experiment);

    CLI11_PARSE(app, argc, argv);

    twinflow::cli::CommonOptions opts;
    opts.out_dir = out_dir;
    if (seed_set) opts.seed = seed;
    if (workers_set) opts.workers = workers;

    try {
        if (run->parsed()) {
            const auto d =
                dialect == "A" ? twinflow::engine::Dialect::A : twinflow::engine::Dialect::B;
            return twinflow::cli::cmd_run(config_path, d, opts);
        }
        if (compare->parsed()) return twinflow::cli::cmd_compare(config_path, opts, self_pair);
        if (experiment->parsed()) return twinflow::cli::cmd_experiment(plan_path, opts);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
