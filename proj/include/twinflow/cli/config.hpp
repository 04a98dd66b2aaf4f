#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "twinflow/demand/flow.hpp"
#include "twinflow/engine/engine.hpp"
#include "twinflow/net/network.hpp"

namespace twinflow::cli {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Either a generated network or a canonical network file.
struct NetworkSpec {
    std::optional<net::GridParams> grid;
    std::optional<net::ArterialParams> arterial;
    std::optional<std::filesystem::path> file;

    net::RoadNetwork build() const;
};

/// Either generated demand or a canonical flow file.
struct DemandSpec {
    std::optional<demand::DemandParams> params;
    std::optional<std::filesystem::path> file;

    std::vector<demand::Flow> build(const net::RoadNetwork& net,
                                    const demand::DriverProfile& profile) const;
    std::vector<demand::Flow> build_seeded(const net::RoadNetwork& net,
                                           const demand::DriverProfile& profile,
                                           std::uint64_t seed) const;
};

struct ScenarioConfig {
    std::string name;
    NetworkSpec network;
    DemandSpec demand;
    demand::DriverProfile profile;
    engine::EngineConfig engine;
};

ScenarioConfig load_scenario(const std::filesystem::path& path);
ScenarioConfig parse_scenario(const std::string& text, const std::filesystem::path& base_dir,
                              const std::string& default_name);

struct NetworkCase {
    std::string name;
    NetworkSpec network;
    DemandSpec demand;
};

struct ExperimentPlan {
    std::string name;
    std::vector<std::string> models;           // C, 5 levels canonically
    std::vector<std::string> aggressiveness;   // A, 6 levels
    std::vector<double> gap_tolerances;        // L, 5 design points
    std::vector<NetworkCase> networks;         // R
    std::size_t replications = 9;
    std::uint64_t base_seed = 1;
    double dt = 1.0;
    double horizon = 1800.0;
    double kl_epsilon = 1e-6;

    std::size_t cell_count() const {
        return models.size() * aggressiveness.size() * gap_tolerances.size() * networks.size();
    }
};

ExperimentPlan load_plan(const std::filesystem::path& path);
ExperimentPlan parse_plan(const std::string& text, const std::filesystem::path& base_dir);

}  // namespace twinflow::cli
