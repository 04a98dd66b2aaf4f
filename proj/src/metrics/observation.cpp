#include "twinflow/metrics/observation.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "twinflow/engine/engine.hpp"

namespace twinflow::metrics {

using nlohmann::json;

StepObservation observe_step(const engine::World& world) {
    const auto& net = *world.net;
    StepObservation obs;
    obs.clock = world.clock;
    obs.lanes.reserve(net.lanes.size());
    for (std::uint32_t lane = 0; lane < net.lanes.size(); ++lane) {
        LaneObs lo;
        lo.id = net.lanes[lane].id;
        for (const auto& o : world.lane_occupants[lane]) {
            ++lo.count;  // shadows occupy capacity
            if (o.shadow) continue;
            const auto& v = world.vehicles[o.vehicle];
            if (v.speed < kQueuedSpeedThreshold) ++lo.queued;
            VehicleObs vo;
            vo.id = v.id;
            vo.lane = lo.id;
            vo.speed = v.speed;
            vo.accel = v.accel;
            vo.travel_time = v.travel_time;
            vo.waiting_time = v.waiting_time;
            obs.vehicles.push_back(std::move(vo));
        }
        obs.lanes.push_back(std::move(lo));
    }
    return obs;
}

std::string to_jsonl(const ObservationStream& stream) {
    std::ostringstream out;
    json header;
    header["lanes"] = json::array();
    if (!stream.empty())
        for (const auto& lane : stream.front().lanes) header["lanes"].push_back(lane.id);
    out << header.dump() << "\n";
    for (const auto& step : stream) {
        json rec;
        rec["t"] = step.clock;
        json vehicles = json::array();
        for (const auto& v : step.vehicles)
            vehicles.push_back({v.id, v.lane, v.speed, v.accel, v.travel_time, v.waiting_time});
        rec["vehicles"] = std::move(vehicles);
        json count = json::array();
        json queued = json::array();
        for (const auto& lane : step.lanes) {
            count.push_back(lane.count);
            queued.push_back(lane.queued);
        }
        rec["count"] = std::move(count);
        rec["queued"] = std::move(queued);
        out << rec.dump() << "\n";
    }
    return out.str();
}

void save_jsonl_file(const ObservationStream& stream, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << to_jsonl(stream);
}

ObservationStream from_jsonl(const std::string& text) {
    ObservationStream stream;
    std::istringstream in(text);
    std::string line;
    std::vector<std::string> lane_ids;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::exception& e) {
            throw std::runtime_error(std::string("observation stream: bad line: ") + e.what());
        }
        if (!header_seen) {
            if (!rec.contains("lanes")) throw std::runtime_error("observation stream: missing header");
            lane_ids = rec.at("lanes").get<std::vector<std::string>>();
            header_seen = true;
            continue;
        }
        StepObservation obs;
        obs.clock = rec.at("t").get<double>();
        for (const auto& jv : rec.at("vehicles")) {
            VehicleObs v;
            v.id = jv.at(0).get<std::string>();
            v.lane = jv.at(1).get<std::string>();
            v.speed = jv.at(2).get<double>();
            v.accel = jv.at(3).get<double>();
            v.travel_time = jv.at(4).get<double>();
            v.waiting_time = jv.at(5).get<double>();
            obs.vehicles.push_back(std::move(v));
        }
        const auto count = rec.at("count").get<std::vector<std::uint32_t>>();
        const auto queued = rec.at("queued").get<std::vector<std::uint32_t>>();
        if (count.size() != lane_ids.size() || queued.size() != lane_ids.size())
            throw std::runtime_error("observation stream: lane vector size mismatch");
        obs.lanes.resize(lane_ids.size());
        for (std::size_t i = 0; i < lane_ids.size(); ++i)
            obs.lanes[i] = {lane_ids[i], count[i], queued[i]};
        stream.push_back(std::move(obs));
    }
    return stream;
}

ObservationStream load_jsonl_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return from_jsonl(text);
}

}  // namespace twinflow::metrics
