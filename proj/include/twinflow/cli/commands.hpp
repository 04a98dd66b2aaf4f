#pragma once

#include <filesystem>
#include <optional>

#include "twinflow/cli/config.hpp"

namespace twinflow::cli {

struct CommonOptions {
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> workers;  // TWINFLOW_WORKERS overrides the flag
    std::filesystem::path out_dir = ".";
};

/// Resolves the effective worker count: environment variable, then flag,
/// then the config value.
unsigned resolve_workers(const CommonOptions& opts, unsigned config_value);

/// Single run of one dialect; writes observations.jsonl and summary.json.
int cmd_run(const std::filesystem::path& config_path, engine::Dialect dialect,
            const CommonOptions& opts);

/// Paired A/B runs on one scenario; writes report.csv and report.json.
/// `self_pair` reruns the same dialect twice (a zero-divergence check).
int cmd_compare(const std::filesystem::path& config_path, const CommonOptions& opts,
                bool self_pair = false);

/// Full factorial experiment; writes cells.csv, ttests.csv,
/// regression_<measure>.csv and manifest.json under out_dir/<plan name>/.
/// Returns nonzero when any cell failed.
int cmd_experiment(const std::filesystem::path& plan_path, const CommonOptions& opts);

/// The experiment core, exposed for tests: runs the plan and writes the
/// results directory. Throws on plan-level errors; per-cell failures are
/// recorded in the manifest.
int run_experiment(const ExperimentPlan& plan, const std::filesystem::path& results_dir,
                   unsigned workers);

}  // namespace twinflow::cli
