#include "twinflow/net/network.hpp"

#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace twinflow::net {

std::string to_string(RoadClass c) {
    switch (c) {
        case RoadClass::standard: return "standard";
        case RoadClass::major: return "major";
        case RoadClass::minor: return "minor";
        case RoadClass::boundary: return "boundary";
    }
    return "standard";
}

RoadClass road_class_from_string(const std::string& s) {
    if (s == "standard") return RoadClass::standard;
    if (s == "major") return RoadClass::major;
    if (s == "minor") return RoadClass::minor;
    if (s == "boundary") return RoadClass::boundary;
    throw NetworkError("unknown road class: " + s);
}

std::string lane_id(const std::string& road_id, int lane_index) {
    return road_id + "#" + std::to_string(lane_index);
}

std::pair<std::string, int> split_lane_id(const std::string& lane) {
    const auto pos = lane.rfind('#');
    if (pos == std::string::npos || pos + 1 >= lane.size()) return {lane, -1};
    try {
        return {lane.substr(0, pos), std::stoi(lane.substr(pos + 1))};
    } catch (const std::exception&) {
        return {lane, -1};
    }
}

double SignalProgram::cycle() const {
    double total = 0.0;
    for (const auto& p : phases) total += p.duration;
    return total;
}

const Intersection* RoadNetwork::find_intersection(const std::string& id) const {
    for (const auto& i : intersections)
        if (i.id == id) return &i;
    return nullptr;
}

const Road* RoadNetwork::find_road(const std::string& id) const {
    for (const auto& r : roads)
        if (r.id == id) return &r;
    return nullptr;
}

int RoadNetwork::signalized_count() const {
    int n = 0;
    for (const auto& i : intersections) n += i.signalized ? 1 : 0;
    return n;
}

std::string ValidationReport::summary() const {
    std::ostringstream out;
    for (const auto& v : violations) out << v.code << ": " << v.message << "\n";
    return out.str();
}

ValidationReport validate_network(const RoadNetwork& net) {
    ValidationReport report;
    auto add = [&](std::string code, std::string message) {
        report.violations.push_back({std::move(code), std::move(message)});
    };

    std::unordered_map<std::string, const Intersection*> nodes;
    for (const auto& i : net.intersections) {
        if (!nodes.emplace(i.id, &i).second) add("dup-intersection", "duplicate intersection id " + i.id);
    }

    std::unordered_map<std::string, const Road*> roads;
    std::unordered_set<std::string> lane_ids;
    for (const auto& r : net.roads) {
        if (!roads.emplace(r.id, &r).second) add("dup-road", "duplicate road id " + r.id);
        if (!nodes.count(r.from)) add("road-endpoint", "road " + r.id + " references missing intersection " + r.from);
        if (!nodes.count(r.to)) add("road-endpoint", "road " + r.id + " references missing intersection " + r.to);
        if (!(r.length > 0.0)) add("road-length", "road " + r.id + " has non-positive length");
        if (r.lanes < 1) add("road-lanes", "road " + r.id + " has lane count < 1");
        if (!(r.speed_limit > 0.0)) add("road-speed", "road " + r.id + " has non-positive speed limit");
        for (int l = 0; l < r.lanes; ++l) {
            if (!lane_ids.insert(lane_id(r.id, l)).second)
                add("dup-lane", "duplicate lane id " + lane_id(r.id, l));
        }
    }

    // signal groups referenced by connections, per intersection
    std::unordered_map<std::string, std::set<int>> referenced_groups;
    for (const auto& c : net.connections) {
        const auto [from_road_id, from_idx] = split_lane_id(c.from_lane);
        const auto [to_road_id, to_idx] = split_lane_id(c.to_lane);
        const Road* from_road = nullptr;
        const Road* to_road = nullptr;
        if (auto it = roads.find(from_road_id); it != roads.end()) from_road = it->second;
        if (auto it = roads.find(to_road_id); it != roads.end()) to_road = it->second;
        if (!from_road || from_idx < 0 || from_idx >= (from_road ? from_road->lanes : 0))
            add("conn-lane", "connection references missing lane " + c.from_lane);
        if (!to_road || to_idx < 0 || to_idx >= (to_road ? to_road->lanes : 0))
            add("conn-lane", "connection references missing lane " + c.to_lane);
        if (!nodes.count(c.intersection))
            add("conn-node", "connection references missing intersection " + c.intersection);
        if (from_road && from_road->to != c.intersection)
            add("conn-incident", "connection from_lane " + c.from_lane + " does not end at " + c.intersection);
        if (to_road && to_road->from != c.intersection)
            add("conn-incident", "connection to_lane " + c.to_lane + " does not start at " + c.intersection);
        referenced_groups[c.intersection].insert(c.signal_group);
    }

    for (const auto& [node_id, program] : net.signal_programs) {
        if (!nodes.count(node_id)) add("signal-node", "signal program for missing intersection " + node_id);
        if (program.phases.empty()) {
            add("signal-phases", "signal program at " + node_id + " has no phases");
            continue;
        }
        std::set<int> covered;
        for (const auto& phase : program.phases) {
            if (!(phase.duration > 0.0))
                add("signal-duration", "signal program at " + node_id + " has non-positive phase duration");
            covered.insert(phase.groups.begin(), phase.groups.end());
        }
        if (auto it = referenced_groups.find(node_id); it != referenced_groups.end()) {
            for (int g : it->second) {
                if (!covered.count(g))
                    add("signal-orphan-group",
                        "signal group " + std::to_string(g) + " at " + node_id + " appears in no phase");
            }
        }
    }

    return report;
}

}  // namespace twinflow::net
