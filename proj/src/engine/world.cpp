#include "twinflow/engine/world.hpp"

#include <algorithm>
#include <cmath>

namespace twinflow::engine {

CompiledNetwork CompiledNetwork::compile(const net::RoadNetwork& source) {
    if (const auto report = net::validate_network(source); !report.empty())
        throw SimulationError("invalid network:\n" + report.summary());

    CompiledNetwork c;
    std::unordered_map<std::string, std::uint32_t> node_index;
    for (const auto& i : source.intersections) {
        node_index.emplace(i.id, static_cast<std::uint32_t>(c.nodes.size()));
        Node node;
        node.id = i.id;
        node.signalized = i.signalized;
        if (auto it = source.signal_programs.find(i.id); it != source.signal_programs.end()) {
            node.offset = it->second.offset;
            for (const auto& phase : it->second.phases) {
                std::uint64_t mask = 0;
                for (int g : phase.groups) {
                    if (g < 0 || g >= 64) throw SimulationError("signal group out of range at " + i.id);
                    mask |= 1ULL << g;
                }
                node.phase_group_masks.push_back(mask);
                node.phase_durations.push_back(phase.duration);
            }
        }
        c.nodes.push_back(std::move(node));
    }

    for (const auto& r : source.roads) {
        const auto road_id = static_cast<std::uint32_t>(c.roads.size());
        c.road_index.emplace(r.id, road_id);
        Road road;
        road.id = r.id;
        road.first_lane = static_cast<std::uint32_t>(c.lanes.size());
        road.lane_count = r.lanes;
        road.length = r.length;
        road.from_node = node_index.at(r.from);
        road.to_node = node_index.at(r.to);
        for (int l = 0; l < r.lanes; ++l) {
            Lane lane;
            lane.id = net::lane_id(r.id, l);
            lane.road = road_id;
            lane.index = l;
            lane.length = r.length;
            lane.speed_limit = r.speed_limit;
            lane.end_node = road.to_node;
            c.lanes.push_back(std::move(lane));
        }
        // neighbors within the road; index 0 is rightmost so "left" is +1
        for (int l = 0; l < r.lanes; ++l) {
            auto& lane = c.lanes[road.first_lane + l];
            if (l + 1 < r.lanes) lane.left = road.first_lane + l + 1;
            if (l > 0) lane.right = road.first_lane + l - 1;
        }
        c.roads.push_back(std::move(road));
    }

    for (const auto& conn : source.connections) {
        const auto [from_road, from_idx] = net::split_lane_id(conn.from_lane);
        const auto [to_road, to_idx] = net::split_lane_id(conn.to_lane);
        const auto fr = c.road_index.at(from_road);
        const auto tr = c.road_index.at(to_road);
        auto& lane = c.lanes[c.roads[fr].first_lane + from_idx];
        lane.outs.push_back({tr, c.roads[tr].first_lane + to_idx, conn.signal_group});
    }
    for (auto& lane : c.lanes)
        std::sort(lane.outs.begin(), lane.outs.end(),
                  [](const LaneOut& a, const LaneOut& b) { return a.next_road < b.next_road; });

    return c;
}

const CompiledNetwork::LaneOut* CompiledNetwork::out_for(std::uint32_t lane,
                                                         std::uint32_t next_road) const {
    for (const auto& out : lanes[lane].outs)
        if (out.next_road == next_road) return &out;
    return nullptr;
}

int CompiledNetwork::steps_to_service(std::uint32_t lane, std::uint32_t next_road) const {
    const auto& l = lanes[lane];
    const auto& road = roads[l.road];
    int best = -1;
    for (int i = 0; i < road.lane_count; ++i) {
        if (out_for(road.first_lane + i, next_road) == nullptr) continue;
        const int d = std::abs(i - l.index);
        if (best < 0 || d < best) best = d;
    }
    return best;
}

std::size_t World::active_count() const {
    std::size_t n = 0;
    for (const auto& v : vehicles) n += v.active ? 1 : 0;
    return n;
}

}  // namespace twinflow::engine
