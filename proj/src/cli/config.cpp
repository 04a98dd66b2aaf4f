#include "twinflow/cli/config.hpp"

#include <fstream>

#include <json.hpp>

#include "twinflow/demand/profile_json.hpp"
#include "twinflow/net/network_io.hpp"

namespace twinflow::cli {

using nlohmann::json;

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

json parse_json(const std::string& text, const std::string& what) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(what + ": not valid JSON: " + e.what());
    }
}

NetworkSpec parse_network_spec(const json& j, const std::filesystem::path& base_dir) {
    NetworkSpec spec;
    if (j.contains("file")) {
        spec.file = base_dir / j.at("file").get<std::string>();
        return spec;
    }
    if (!j.contains("generator")) throw ConfigError("network needs 'generator' or 'file'");
    const json& g = j.at("generator");
    const std::string type = g.value("type", "grid");
    if (type == "grid") {
        net::GridParams p;
        p.rows = g.value("rows", p.rows);
        p.cols = g.value("cols", p.cols);
        p.lanes_per_direction = g.value("lanes_per_direction", p.lanes_per_direction);
        p.block_length = g.value("block_length", p.block_length);
        p.speed_limit = g.value("speed_limit", p.speed_limit);
        p.stub_length = g.value("stub_length", p.stub_length);
        p.phase_duration = g.value("phase_duration", p.phase_duration);
        spec.grid = p;
    } else if (type == "arterial") {
        net::ArterialParams p;
        p.rows = g.value("rows", p.rows);
        p.cols = g.value("cols", p.cols);
        p.major_lanes = g.value("major_lanes", p.major_lanes);
        p.minor_lanes = g.value("minor_lanes", p.minor_lanes);
        p.block_length = g.value("block_length", p.block_length);
        p.speed_limit = g.value("speed_limit", p.speed_limit);
        p.stub_length = g.value("stub_length", p.stub_length);
        p.phase_duration = g.value("phase_duration", p.phase_duration);
        spec.arterial = p;
    } else {
        throw ConfigError("unknown generator type: " + type);
    }
    return spec;
}

DemandSpec parse_demand_spec(const json& j, const std::filesystem::path& base_dir) {
    DemandSpec spec;
    if (j.contains("file")) {
        spec.file = base_dir / j.at("file").get<std::string>();
        return spec;
    }
    demand::DemandParams p;
    const std::string pattern = j.value("pattern", "uniform");
    if (pattern == "uniform") {
        p.pattern = demand::DemandPattern::uniform;
    } else if (pattern == "alternating_major_minor") {
        p.pattern = demand::DemandPattern::alternating_major_minor;
    } else {
        throw ConfigError("unknown demand pattern: " + pattern);
    }
    if (!j.contains("total_vehicles")) throw ConfigError("demand needs 'total_vehicles' or 'file'");
    p.total_vehicles = j.at("total_vehicles").get<std::size_t>();
    p.horizon = j.value("horizon", p.horizon);
    p.seed = j.value("seed", p.seed);
    p.alternation_period = j.value("alternation_period", p.alternation_period);
    spec.params = p;
    return spec;
}

}  // namespace

net::RoadNetwork NetworkSpec::build() const {
    if (file) return net::load_network_file(*file);
    if (grid) return net::generate_grid(*grid);
    if (arterial) return net::generate_arterial(*arterial);
    throw ConfigError("empty network spec");
}

std::vector<demand::Flow> DemandSpec::build(const net::RoadNetwork& net,
                                            const demand::DriverProfile& profile) const {
    if (file) {
        auto flows = demand::load_flows_file(*file);
        for (auto& f : flows) f.profile = profile;
        return flows;
    }
    if (!params) throw ConfigError("empty demand spec");
    demand::DemandParams p = *params;
    p.profile = profile;
    return demand::build_demand(net, p);
}

std::vector<demand::Flow> DemandSpec::build_seeded(const net::RoadNetwork& net,
                                                   const demand::DriverProfile& profile,
                                                   std::uint64_t seed) const {
    if (file) return build(net, profile);
    demand::DemandParams p = *params;
    p.profile = profile;
    p.seed = seed;
    return demand::build_demand(net, p);
}

ScenarioConfig parse_scenario(const std::string& text, const std::filesystem::path& base_dir,
                              const std::string& default_name) {
    const json doc = parse_json(text, "scenario config");
    if (!doc.is_object()) throw ConfigError("scenario config must be a JSON object");
    ScenarioConfig config;
    config.name = doc.value("name", default_name);
    if (!doc.contains("network")) throw ConfigError("scenario config needs 'network'");
    config.network = parse_network_spec(doc.at("network"), base_dir);
    if (!doc.contains("demand")) throw ConfigError("scenario config needs 'demand'");
    config.demand = parse_demand_spec(doc.at("demand"), base_dir);
    if (doc.contains("profile")) config.profile = demand::profile_from_json(doc.at("profile"));
    if (doc.contains("engine")) {
        const json& e = doc.at("engine");
        config.engine.dt = e.value("dt", config.engine.dt);
        config.engine.horizon = e.value("horizon", config.engine.horizon);
        config.engine.seed = e.value("seed", config.engine.seed);
        config.engine.worker_count = e.value("workers", config.engine.worker_count);
        if (e.contains("dialect")) {
            const std::string d = e.at("dialect").get<std::string>();
            if (d != "A" && d != "B") throw ConfigError("engine.dialect must be \"A\" or \"B\"");
            config.engine.dialect = d == "A" ? engine::Dialect::A : engine::Dialect::B;
        }
    }
    return config;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
    return parse_scenario(read_file(path), path.parent_path(), path.stem().string());
}

ExperimentPlan parse_plan(const std::string& text, const std::filesystem::path& base_dir) {
    const json doc = parse_json(text, "experiment plan");
    if (!doc.is_object()) throw ConfigError("experiment plan must be a JSON object");
    ExperimentPlan plan;
    plan.name = doc.value("name", "experiment");
    if (!doc.contains("models") || !doc.contains("aggressiveness") || !doc.contains("gap_tolerances") ||
        !doc.contains("networks"))
        throw ConfigError("experiment plan needs models, aggressiveness, gap_tolerances, networks");
    plan.models = doc.at("models").get<std::vector<std::string>>();
    plan.aggressiveness = doc.at("aggressiveness").get<std::vector<std::string>>();
    plan.gap_tolerances = doc.at("gap_tolerances").get<std::vector<double>>();
    for (const auto& jn : doc.at("networks")) {
        NetworkCase c;
        c.name = jn.at("name").get<std::string>();
        c.network = parse_network_spec(jn.at("network"), base_dir);
        c.demand = parse_demand_spec(jn.at("demand"), base_dir);
        plan.networks.push_back(std::move(c));
    }
    plan.replications = doc.value("replications", plan.replications);
    plan.base_seed = doc.value("base_seed", plan.base_seed);
    plan.dt = doc.value("dt", plan.dt);
    plan.horizon = doc.value("horizon", plan.horizon);
    plan.kl_epsilon = doc.value("kl_epsilon", plan.kl_epsilon);
    if (plan.replications < 1) throw ConfigError("replications must be >= 1");
    if (plan.models.empty() || plan.aggressiveness.empty() || plan.gap_tolerances.empty() ||
        plan.networks.empty())
        throw ConfigError("factor grids must be non-empty");
    return plan;
}

ExperimentPlan load_plan(const std::filesystem::path& path) {
    return parse_plan(read_file(path), path.parent_path());
}

}  // namespace twinflow::cli
