#include "twinflow/net/network_io.hpp"

#include <fstream>

#include <json.hpp>

namespace twinflow::net {

using nlohmann::json;

namespace {

json to_json(const RoadNetwork& net) {
    json doc;
    doc["intersections"] = json::array();
    for (const auto& i : net.intersections)
        doc["intersections"].push_back({{"id", i.id}, {"x", i.x}, {"y", i.y}, {"signalized", i.signalized}});
    doc["roads"] = json::array();
    for (const auto& r : net.roads)
        doc["roads"].push_back({{"id", r.id},
                                {"from", r.from},
                                {"to", r.to},
                                {"length", r.length},
                                {"lanes", r.lanes},
                                {"speed_limit", r.speed_limit},
                                {"class", to_string(r.road_class)}});
    doc["connections"] = json::array();
    for (const auto& c : net.connections)
        doc["connections"].push_back({{"from_lane", c.from_lane},
                                      {"to_lane", c.to_lane},
                                      {"intersection", c.intersection},
                                      {"signal_group", c.signal_group}});
    doc["signals"] = json::object();
    for (const auto& [node, program] : net.signal_programs) {
        json phases = json::array();
        for (const auto& p : program.phases) phases.push_back({{"duration", p.duration}, {"groups", p.groups}});
        doc["signals"][node] = {{"offset", program.offset}, {"phases", phases}};
    }
    return doc;
}

template <typename T>
T require(const json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key))
        throw NetworkError("schema error: missing field '" + std::string(key) + "' in " + where);
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw NetworkError("schema error: bad field '" + std::string(key) + "' in " + where + ": " + e.what());
    }
}

}  // namespace

std::string save_network(const RoadNetwork& net) { return to_json(net).dump(2) + "\n"; }

void save_network_file(const RoadNetwork& net, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw NetworkError("cannot open " + path.string() + " for writing");
    out << save_network(net);
}

RoadNetwork load_network(const std::string& document) {
    json doc;
    try {
        doc = json::parse(document);
    } catch (const json::exception& e) {
        throw NetworkError(std::string("schema error: not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw NetworkError("schema error: top level must be an object");

    RoadNetwork net;
    for (const auto& j : require<json>(doc, "intersections", "document")) {
        Intersection i;
        i.id = require<std::string>(j, "id", "intersections[]");
        i.x = require<double>(j, "x", "intersections[]");
        i.y = require<double>(j, "y", "intersections[]");
        i.signalized = require<bool>(j, "signalized", "intersections[]");
        net.intersections.push_back(std::move(i));
    }
    for (const auto& j : require<json>(doc, "roads", "document")) {
        Road r;
        r.id = require<std::string>(j, "id", "roads[]");
        r.from = require<std::string>(j, "from", "roads[]");
        r.to = require<std::string>(j, "to", "roads[]");
        r.length = require<double>(j, "length", "roads[]");
        r.lanes = require<int>(j, "lanes", "roads[]");
        r.speed_limit = require<double>(j, "speed_limit", "roads[]");
        r.road_class = road_class_from_string(require<std::string>(j, "class", "roads[]"));
        net.roads.push_back(std::move(r));
    }
    for (const auto& j : require<json>(doc, "connections", "document")) {
        Connection c;
        c.from_lane = require<std::string>(j, "from_lane", "connections[]");
        c.to_lane = require<std::string>(j, "to_lane", "connections[]");
        c.intersection = require<std::string>(j, "intersection", "connections[]");
        c.signal_group = require<int>(j, "signal_group", "connections[]");
        net.connections.push_back(std::move(c));
    }
    const json signals = require<json>(doc, "signals", "document");
    if (!signals.is_object()) throw NetworkError("schema error: 'signals' must be an object");
    for (const auto& [node, j] : signals.items()) {
        SignalProgram program;
        program.offset = require<double>(j, "offset", "signals." + node);
        for (const auto& jp : require<json>(j, "phases", "signals." + node)) {
            SignalPhase phase;
            phase.duration = require<double>(jp, "duration", "signals." + node + ".phases[]");
            phase.groups = require<std::vector<int>>(jp, "groups", "signals." + node + ".phases[]");
            program.phases.push_back(std::move(phase));
        }
        net.signal_programs[node] = std::move(program);
    }

    if (const auto report = validate_network(net); !report.empty())
        throw NetworkError("referential-integrity error:\n" + report.summary());
    return net;
}

RoadNetwork load_network_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw NetworkError("cannot open " + path.string());
    std::string document((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return load_network(document);
}

}  // namespace twinflow::net
