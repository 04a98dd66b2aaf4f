#include "twinflow/cli/commands.hpp"

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <thread>

#include <json.hpp>

#include "twinflow/metrics/equivalence.hpp"
#include "twinflow/stats/design.hpp"
#include "twinflow/stats/ols.hpp"
#include "twinflow/stats/tests.hpp"
#include "twinflow/util/counter_rng.hpp"
#include "twinflow/util/text.hpp"

namespace twinflow::cli {

using metrics::EquivalenceReport;
using nlohmann::json;

namespace {

constexpr std::uint64_t kSeedDemand = 0xD0;
constexpr std::uint64_t kSeedEngine = 0xE0;

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open " + path.string() + " for writing");
    out << content;
}

json summary_json(const engine::RunSummary& s) {
    return {{"steps", s.steps},
            {"injected", s.injected},
            {"arrived", s.arrived},
            {"still_active", s.still_active},
            {"still_pending", s.still_pending},
            {"mean_travel_time", s.mean_travel_time},
            {"wall_seconds", s.wall_seconds}};
}

demand::DriverProfile cell_profile(const std::string& model, const std::string& aggressiveness,
                                   double gap_tolerance) {
    demand::DriverProfile profile;
    profile.car_following = demand::car_following_from_string(model);
    profile.aggressiveness = demand::make_profile(aggressiveness);
    profile.gap_tolerance = gap_tolerance;
    return profile;
}

}  // namespace

unsigned resolve_workers(const CommonOptions& opts, unsigned config_value) {
    if (const char* env = std::getenv("TWINFLOW_WORKERS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<unsigned>(v);
    }
    if (opts.workers) return *opts.workers;
    return config_value;
}

int cmd_run(const std::filesystem::path& config_path, engine::Dialect dialect,
            const CommonOptions& opts) {
    ScenarioConfig config = load_scenario(config_path);
    config.engine.dialect = dialect;
    if (opts.seed) config.engine.seed = *opts.seed;
    config.engine.worker_count = resolve_workers(opts, config.engine.worker_count);

    const net::RoadNetwork network = config.network.build();
    const auto flows = config.demand.build(network, config.profile);
    const auto result = engine::run(network, flows, config.engine);

    std::filesystem::create_directories(opts.out_dir);
    metrics::save_jsonl_file(result.observations, opts.out_dir / "observations.jsonl");
    json summary = summary_json(result.summary);
    summary["scenario"] = config.name;
    summary["dialect"] = dialect == engine::Dialect::A ? "A" : "B";
    summary["seed"] = config.engine.seed;
    summary["dt"] = config.engine.dt;
    summary["horizon"] = config.engine.horizon;
    summary["workers"] = config.engine.worker_count;
    write_file(opts.out_dir / "summary.json", summary.dump(2) + "\n");
    return 0;
}

int cmd_compare(const std::filesystem::path& config_path, const CommonOptions& opts, bool self_pair) {
    ScenarioConfig config = load_scenario(config_path);
    if (opts.seed) config.engine.seed = *opts.seed;
    config.engine.worker_count = resolve_workers(opts, config.engine.worker_count);

    const net::RoadNetwork network = config.network.build();
    const auto compiled = engine::CompiledNetwork::compile(network);
    const auto flows = config.demand.build(network, config.profile);

    engine::EngineConfig config_a = config.engine;
    config_a.dialect = engine::Dialect::A;
    engine::EngineConfig config_b = config.engine;
    config_b.dialect = self_pair ? engine::Dialect::A : engine::Dialect::B;

    const auto run_a = engine::run_compiled(compiled, flows, config_a);
    const auto run_b = engine::run_compiled(compiled, flows, config_b);
    const auto report = metrics::equivalence_report(run_a.observations, run_b.observations);

    metrics::ReportMetadata meta;
    meta.scenario = config.name;
    meta.dialect_a = "A";
    meta.dialect_b = self_pair ? "A" : "B";
    meta.seed = config.engine.seed;

    std::filesystem::create_directories(opts.out_dir);
    write_file(opts.out_dir / "report.csv",
               metrics::report_csv_header() + "\n" + metrics::report_csv_row(report, meta) + "\n");
    write_file(opts.out_dir / "report.json", metrics::report_json(report, meta));
    return 0;
}

namespace {

struct CellTask {
    std::size_t cell_index = 0;
    std::size_t replication = 0;
    std::string model;
    std::string aggressiveness;
    double gap_tolerance = 1.0;
    std::size_t network_index = 0;
};

struct CellResult {
    bool ok = false;
    std::string error;
    EquivalenceReport report;
    std::uint64_t engine_seed = 0;
};

}  // namespace

int run_experiment(const ExperimentPlan& plan, const std::filesystem::path& results_dir,
                   unsigned workers) {
    // networks compile once and are shared read-only across cell tasks
    std::vector<net::RoadNetwork> networks;
    std::vector<engine::CompiledNetwork> compiled;
    for (const auto& c : plan.networks) {
        networks.push_back(c.network.build());
        compiled.push_back(engine::CompiledNetwork::compile(networks.back()));
    }

    std::vector<CellTask> tasks;
    std::size_t cell_index = 0;
    for (const auto& model : plan.models)
        for (const auto& agg : plan.aggressiveness)
            for (const double tol : plan.gap_tolerances)
                for (std::size_t ni = 0; ni < plan.networks.size(); ++ni) {
                    for (std::size_t rep = 0; rep < plan.replications; ++rep)
                        tasks.push_back({cell_index, rep, model, agg, tol, ni});
                    ++cell_index;
                }

    std::vector<CellResult> results(tasks.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= tasks.size()) return;
            const CellTask& task = tasks[i];
            CellResult& result = results[i];
            try {
                const auto profile = cell_profile(task.model, task.aggressiveness, task.gap_tolerance);
                const std::uint64_t demand_seed =
                    util::derive_seed(plan.base_seed, task.cell_index, task.replication, kSeedDemand);
                const std::uint64_t engine_seed =
                    util::derive_seed(plan.base_seed, task.cell_index, task.replication, kSeedEngine);
                const auto flows = plan.networks[task.network_index].demand.build_seeded(
                    networks[task.network_index], profile, demand_seed);

                engine::EngineConfig config;
                config.dt = plan.dt;
                config.horizon = plan.horizon;
                config.seed = engine_seed;
                config.worker_count = 1;  // cells are the parallel unit
                config.dialect = engine::Dialect::A;
                const auto run_a = engine::run_compiled(compiled[task.network_index], flows, config);
                config.dialect = engine::Dialect::B;
                const auto run_b = engine::run_compiled(compiled[task.network_index], flows, config);
                result.report =
                    metrics::equivalence_report(run_a.observations, run_b.observations, plan.kl_epsilon);
                result.engine_seed = engine_seed;
                result.ok = true;
            } catch (const std::exception& e) {
                result.ok = false;
                result.error = e.what();
            }
        }
    };
    {
        std::vector<std::thread> threads;
        const unsigned n = std::max(1u, workers);
        for (unsigned t = 1; t < n; ++t) threads.emplace_back(worker);
        worker();
        for (auto& t : threads) t.join();
    }

    std::filesystem::create_directories(results_dir);

    // cells.csv, rows in fixed task order
    std::string cells_csv =
        "model,aggressiveness,gap_tolerance,network,replication,engine_seed,rmse_travel_time,"
        "rmse_waiting_time,rmse_lane_count,rmse_queued_count,rmse_speed,rmse_accel,kl_count,"
        "kl_queued,vehicle_coverage\n";
    std::size_t failed = 0;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        const auto& task = tasks[i];
        const auto& result = results[i];
        if (!result.ok) {
            ++failed;
            continue;
        }
        cells_csv += task.model + "," + task.aggressiveness + "," +
                     util::format_double(task.gap_tolerance) + "," +
                     plan.networks[task.network_index].name + "," + std::to_string(task.replication) +
                     "," + std::to_string(result.engine_seed);
        for (std::size_t m = 0; m < EquivalenceReport::kMeasureCount; ++m)
            cells_csv += "," + util::format_double(result.report.measure(m));
        cells_csv += "," + util::format_double(result.report.vehicle_coverage) + "\n";
    }
    write_file(results_dir / "cells.csv", cells_csv);

    // one-sample t-tests per measure over the successful rows
    std::string ttests_csv = "measure,n,mean,sd,t,df,p\n";
    for (std::size_t m = 0; m < EquivalenceReport::kMeasureCount; ++m) {
        std::vector<double> samples;
        for (std::size_t i = 0; i < tasks.size(); ++i)
            if (results[i].ok) samples.push_back(results[i].report.measure(m));
        ttests_csv += std::string(EquivalenceReport::measure_name(m)) + ",";
        ttests_csv += std::to_string(samples.size()) + ",";
        try {
            const auto t = stats::one_sample_t(samples, 0.0, stats::Tail::two_sided);
            ttests_csv += util::format_double(t.mean) + "," + util::format_double(t.sd) + "," +
                          util::format_double(t.t) + "," + std::to_string(t.df) + "," +
                          util::format_double(t.p) + "\n";
        } catch (const stats::StatsError& e) {
            ttests_csv += std::string(",,,,") + "error: " + e.what() + "\n";
        }
    }
    write_file(results_dir / "ttests.csv", ttests_csv);

    // second-order regression per measure (inference coding)
    std::string regression_note;
    {
        std::vector<stats::FactorLevels> rows;
        std::vector<std::size_t> row_tasks;
        for (std::size_t i = 0; i < tasks.size(); ++i) {
            if (!results[i].ok) continue;
            const auto& task = tasks[i];
            rows.push_back({task.model, task.aggressiveness, task.gap_tolerance,
                            plan.networks[task.network_index].name});
            row_tasks.push_back(i);
        }
        stats::FactorSpace space;
        space.models = plan.models;
        space.aggressiveness = plan.aggressiveness;
        for (const auto& c : plan.networks) space.networks.push_back(c.name);

        if (!rows.empty()) {
            const auto design = stats::build_design_matrix(rows, space, stats::DesignMode::inference);
            if (design.X.rows() <= design.X.cols()) {
                regression_note = "regression skipped: " + std::to_string(design.X.rows()) +
                                  " rows for " + std::to_string(design.X.cols()) +
                                  " columns (too few rows)";
            } else {
                for (std::size_t m = 0; m < EquivalenceReport::kMeasureCount; ++m) {
                    Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
                    for (std::size_t i = 0; i < rows.size(); ++i)
                        y[static_cast<Eigen::Index>(i)] = results[row_tasks[i]].report.measure(m);
                    const auto fit = stats::ols_fit(design.X, y, design.labels);
                    std::string csv = "term,estimate,std_error,t_value,p_value\n";
                    for (std::size_t j = 0; j < fit.terms.size(); ++j) {
                        const auto idx = static_cast<Eigen::Index>(j);
                        csv += util::csv_escape(fit.terms[j]) + "," +
                               util::format_double(fit.coefficients[idx]) + "," +
                               util::format_double(fit.std_errors[idx]) + "," +
                               util::format_double(fit.t_values[idx]) + "," +
                               util::format_double(fit.p_values[idx]) + "\n";
                    }
                    csv += "(r_squared)," + util::format_double(fit.r_squared) + ",,,\n";
                    csv += "(rank)," + std::to_string(fit.rank) + ",,,\n";
                    csv += "(n)," + std::to_string(fit.n) + ",,,\n";
                    write_file(results_dir / ("regression_" +
                                              std::string(EquivalenceReport::measure_name(m)) + ".csv"),
                               csv);
                }
            }
        }
    }

    json manifest;
    manifest["plan"] = {{"name", plan.name},
                        {"models", plan.models},
                        {"aggressiveness", plan.aggressiveness},
                        {"gap_tolerances", plan.gap_tolerances},
                        {"replications", plan.replications},
                        {"base_seed", plan.base_seed},
                        {"dt", plan.dt},
                        {"horizon", plan.horizon},
                        {"kl_epsilon", plan.kl_epsilon}};
    json network_names = json::array();
    for (const auto& c : plan.networks) network_names.push_back(c.name);
    manifest["plan"]["networks"] = network_names;
    manifest["cells"] = plan.cell_count();
    manifest["rows_expected"] = plan.cell_count() * plan.replications;
    manifest["rows_written"] = tasks.size() - failed;
    if (!regression_note.empty()) manifest["regression_note"] = regression_note;
    json failures = json::array();
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        if (results[i].ok) continue;
        failures.push_back({{"cell_index", tasks[i].cell_index},
                            {"replication", tasks[i].replication},
                            {"model", tasks[i].model},
                            {"aggressiveness", tasks[i].aggressiveness},
                            {"gap_tolerance", tasks[i].gap_tolerance},
                            {"network", plan.networks[tasks[i].network_index].name},
                            {"error", results[i].error}});
    }
    manifest["failures"] = failures;
    write_file(results_dir / "manifest.json", manifest.dump(2) + "\n");

    return failed == 0 ? 0 : 2;
}

int cmd_experiment(const std::filesystem::path& plan_path, const CommonOptions& opts) {
    const ExperimentPlan plan = load_plan(plan_path);
    const unsigned workers =
        resolve_workers(opts, std::max(1u, std::thread::hardware_concurrency()));
    return run_experiment(plan, opts.out_dir / plan.name, workers);
}

}  // namespace twinflow::cli
