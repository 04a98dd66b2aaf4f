#include "twinflow/demand/flow.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <queue>
#include <random>
#include <set>
#include <unordered_map>

#include <json.hpp>

#include "twinflow/demand/profile_json.hpp"

namespace twinflow::demand {

using nlohmann::json;

namespace {

struct RoadGraph {
    std::unordered_map<std::string, std::size_t> index;
    std::vector<const net::Road*> roads;
    std::vector<std::vector<std::size_t>> next;  // road -> roads reachable through a connection

    explicit RoadGraph(const net::RoadNetwork& net) {
        roads.reserve(net.roads.size());
        for (const auto& r : net.roads) {
            index.emplace(r.id, roads.size());
            roads.push_back(&r);
        }
        next.resize(roads.size());
        std::set<std::pair<std::size_t, std::size_t>> seen;
        for (const auto& c : net.connections) {
            const auto [from_road, fi] = net::split_lane_id(c.from_lane);
            const auto [to_road, ti] = net::split_lane_id(c.to_lane);
            auto a = index.find(from_road);
            auto b = index.find(to_road);
            if (a == index.end() || b == index.end()) continue;
            if (seen.emplace(a->second, b->second).second) next[a->second].push_back(b->second);
        }
        for (auto& v : next) std::sort(v.begin(), v.end());
    }

    double travel_time(std::size_t i) const { return roads[i]->length / roads[i]->speed_limit; }
};

std::vector<std::string> dijkstra(const RoadGraph& g, std::size_t src, std::size_t dst) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(g.roads.size(), inf);
    std::vector<std::size_t> prev(g.roads.size(), SIZE_MAX);
    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> q;
    dist[src] = g.travel_time(src);
    q.push({dist[src], src});
    while (!q.empty()) {
        const auto [d, u] = q.top();
        q.pop();
        if (d > dist[u]) continue;
        if (u == dst) break;
        for (std::size_t v : g.next[u]) {
            const double nd = d + g.travel_time(v);
            if (nd < dist[v]) {
                dist[v] = nd;
                prev[v] = u;
                q.push({nd, v});
            }
        }
    }
    if (dist[dst] == inf) return {};
    std::vector<std::string> route;
    for (std::size_t u = dst;; u = prev[u]) {
        route.push_back(g.roads[u]->id);
        if (u == src) break;
    }
    std::reverse(route.begin(), route.end());
    return route;
}

std::string flow_id(std::size_t i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "v%06zu", i);
    return buf;
}

}  // namespace

bool route_connected(const net::RoadNetwork& net, const std::vector<std::string>& route) {
    if (route.empty()) return false;
    const RoadGraph g(net);
    for (std::size_t i = 0; i < route.size(); ++i) {
        auto it = g.index.find(route[i]);
        if (it == g.index.end()) return false;
        if (i + 1 < route.size()) {
            auto jt = g.index.find(route[i + 1]);
            if (jt == g.index.end()) return false;
            const auto& nx = g.next[it->second];
            if (!std::binary_search(nx.begin(), nx.end(), jt->second)) return false;
        }
    }
    return true;
}

std::vector<std::string> shortest_route(const net::RoadNetwork& net, const std::string& from_road,
                                        const std::string& to_road) {
    const RoadGraph g(net);
    auto a = g.index.find(from_road);
    auto b = g.index.find(to_road);
    if (a == g.index.end() || b == g.index.end()) return {};
    return dijkstra(g, a->second, b->second);
}

std::vector<Flow> build_demand(const net::RoadNetwork& net, const DemandParams& params) {
    if (!(params.horizon > 0.0)) throw DemandError("horizon must be > 0");

    std::set<std::string> signalized;
    for (const auto& i : net.intersections)
        if (i.signalized) signalized.insert(i.id);

    // origins enter the network (start at an unsignalized boundary node),
    // destinations leave it
    struct Stub {
        std::string road;
        net::RoadClass cls;
    };
    std::vector<Stub> origins, destinations;
    for (const auto& r : net.roads) {
        if (!signalized.count(r.from)) origins.push_back({r.id, r.road_class});
        if (!signalized.count(r.to)) destinations.push_back({r.id, r.road_class});
    }
    if (params.total_vehicles > 0 && (origins.empty() || destinations.empty()))
        throw DemandError("network has no boundary stub roads to source demand from");

    const bool alternating = params.pattern == DemandPattern::alternating_major_minor;
    auto class_filter = [](const std::vector<Stub>& stubs, net::RoadClass cls) {
        std::vector<Stub> out;
        for (const auto& s : stubs)
            if (s.cls == cls) out.push_back(s);
        return out;
    };
    std::vector<Stub> major_origins, minor_origins, major_destinations, minor_destinations;
    if (alternating) {
        major_origins = class_filter(origins, net::RoadClass::major);
        minor_origins = class_filter(origins, net::RoadClass::minor);
        major_destinations = class_filter(destinations, net::RoadClass::major);
        minor_destinations = class_filter(destinations, net::RoadClass::minor);
        if (major_origins.empty() || minor_origins.empty() || major_destinations.empty() ||
            minor_destinations.empty())
            throw DemandError("alternating pattern requires a network with major and minor road classes");
    }

    const RoadGraph g(net);
    std::mt19937_64 rng(params.seed);
    std::vector<Flow> flows;
    flows.reserve(params.total_vehicles);

    for (std::size_t i = 0; i < params.total_vehicles; ++i) {
        const double depart =
            params.horizon * static_cast<double>(i) / static_cast<double>(params.total_vehicles);
        const std::vector<Stub>* o_pool = &origins;
        const std::vector<Stub>* d_pool = &destinations;
        if (alternating) {
            const bool major_phase =
                static_cast<std::uint64_t>(depart / params.alternation_period) % 2 == 0;
            o_pool = major_phase ? &major_origins : &minor_origins;
            d_pool = major_phase ? &major_destinations : &minor_destinations;
        }
        std::vector<std::string> route;
        for (int attempt = 0; attempt < 64 && route.empty(); ++attempt) {
            const auto& o = (*o_pool)[rng() % o_pool->size()];
            const auto& d = (*d_pool)[rng() % d_pool->size()];
            if (o.road == d.road) continue;
            route = dijkstra(g, g.index.at(o.road), g.index.at(d.road));
        }
        if (route.empty()) throw DemandError("no-route: could not find a connected origin/destination pair");
        flows.push_back({flow_id(i), depart, std::move(route), params.profile});
    }
    return flows;
}

json profile_to_json(const DriverProfile& p) {
    return {{"car_following", to_string(p.car_following)},
            {"aggressiveness",
             {{"max_accel", p.aggressiveness.max_accel},
              {"max_decel", p.aggressiveness.max_decel},
              {"max_emergency_decel", p.aggressiveness.max_emergency_decel},
              {"min_gap", p.aggressiveness.min_gap},
              {"min_headway", p.aggressiveness.min_headway}}},
            {"gap_tolerance", p.gap_tolerance},
            {"vehicle_length", p.vehicle_length},
            {"desired_speed_factor", p.desired_speed_factor},
            {"wagner",
             {{"beta", p.wagner.beta},
              {"perception_dv_coeff", p.wagner.perception_dv_coeff},
              {"min_perception_dv", p.wagner.min_perception_dv}}},
            {"wiedemann", {{"bx", p.wiedemann.bx}, {"ex", p.wiedemann.ex}, {"cx", p.wiedemann.cx}}},
            {"acc",
             {{"k_v", p.acc.k_v},
              {"k_g", p.acc.k_g},
              {"k_d", p.acc.k_d},
              {"switch_margin", p.acc.switch_margin}}}};
}

DriverProfile profile_from_json(const json& j, const DriverProfile& base) {
    if (!j.is_object()) throw DemandError("schema error: profile must be an object");
    DriverProfile p = base;
    for (const auto& [key, value] : j.items()) {
        if (key == "car_following") {
            p.car_following = car_following_from_string(value.get<std::string>());
        } else if (key == "aggressiveness") {
            if (value.is_string()) {
                p.aggressiveness = make_profile(value.get<std::string>());
            } else {
                auto& a = p.aggressiveness;
                a.max_accel = value.value("max_accel", a.max_accel);
                a.max_decel = value.value("max_decel", a.max_decel);
                a.max_emergency_decel = value.value("max_emergency_decel", a.max_emergency_decel);
                a.min_gap = value.value("min_gap", a.min_gap);
                a.min_headway = value.value("min_headway", a.min_headway);
            }
        } else if (key == "gap_tolerance") {
            p.gap_tolerance = value.get<double>();
        } else if (key == "vehicle_length") {
            p.vehicle_length = value.get<double>();
        } else if (key == "desired_speed_factor") {
            p.desired_speed_factor = value.get<double>();
        } else if (key == "wagner") {
            p.wagner.beta = value.value("beta", p.wagner.beta);
            p.wagner.perception_dv_coeff = value.value("perception_dv_coeff", p.wagner.perception_dv_coeff);
            p.wagner.min_perception_dv = value.value("min_perception_dv", p.wagner.min_perception_dv);
        } else if (key == "wiedemann") {
            p.wiedemann.bx = value.value("bx", p.wiedemann.bx);
            p.wiedemann.ex = value.value("ex", p.wiedemann.ex);
            p.wiedemann.cx = value.value("cx", p.wiedemann.cx);
        } else if (key == "acc") {
            p.acc.k_v = value.value("k_v", p.acc.k_v);
            p.acc.k_g = value.value("k_g", p.acc.k_g);
            p.acc.k_d = value.value("k_d", p.acc.k_d);
            p.acc.switch_margin = value.value("switch_margin", p.acc.switch_margin);
        } else {
            throw DemandError("schema error: unknown profile field '" + key + "'");
        }
    }
    if (p.gap_tolerance <= 0) throw DemandError("profile: gap_tolerance must be > 0");
    if (p.vehicle_length <= 0) throw DemandError("profile: vehicle_length must be > 0");
    if (!p.aggressiveness.valid()) throw DemandError("profile: aggressiveness parameters violate invariants");
    return p;
}

namespace {

json flow_to_json(const Flow& f) {
    return {{"id", f.id},
            {"depart", f.depart_time},
            {"route", f.route},
            {"profile", profile_to_json(f.profile)}};
}

Flow flow_from_json(const json& j) {
    Flow f;
    if (!j.contains("id") || !j.contains("depart") || !j.contains("route"))
        throw DemandError("schema error: flow record needs id, depart, route");
    f.id = j.at("id").get<std::string>();
    f.depart_time = j.at("depart").get<double>();
    f.route = j.at("route").get<std::vector<std::string>>();
    if (f.route.empty()) throw DemandError("schema error: flow " + f.id + " has an empty route");
    if (f.depart_time < 0) throw DemandError("schema error: flow " + f.id + " departs before t=0");
    if (j.contains("profile")) f.profile = profile_from_json(j.at("profile"));
    return f;
}

std::vector<Flow> expand_interval(const std::string& base_id, double t0, double t1, double step,
                                  const std::vector<std::string>& route, const DriverProfile& profile) {
    std::vector<Flow> out;
    if (step <= 0.0) return out;
    std::size_t k = 0;
    for (double t = t0; t < t1; t = t0 + static_cast<double>(++k) * step)
        out.push_back({base_id + "_" + std::to_string(k), t, route, profile});
    return out;
}

}  // namespace

std::vector<Flow> convert_flows(const std::string& document) {
    json doc;
    try {
        doc = json::parse(document);
    } catch (const json::exception& e) {
        throw DemandError(std::string("schema error: not valid JSON: ") + e.what());
    }

    std::vector<Flow> out;
    if (doc.is_array()) {
        // canonical single-vehicle records or dialect-A interval flows
        std::size_t n = 0;
        for (const auto& j : doc) {
            if (j.contains("depart")) {
                out.push_back(flow_from_json(j));
            } else if (j.contains("interval")) {
                const double interval = j.at("interval").get<double>();
                if (interval < 0) throw DemandError("negative-rate error: interval must be >= 0");
                const double t0 = j.at("startTime").get<double>();
                const double t1 = j.at("endTime").get<double>();
                const auto route = j.at("route").get<std::vector<std::string>>();
                DriverProfile profile;
                if (j.contains("vehicle")) profile = profile_from_json(j.at("vehicle"));
                auto flows = expand_interval("a" + std::to_string(n), t0, t1, interval, route, profile);
                out.insert(out.end(), flows.begin(), flows.end());
            } else {
                throw DemandError("schema error: flow record " + std::to_string(n) +
                                  " matches neither dialect");
            }
            ++n;
        }
    } else if (doc.is_object() && doc.contains("flows")) {
        for (const auto& j : doc.at("flows")) {
            const std::string id = j.value("id", "f" + std::to_string(out.size()));
            const auto route = j.at("route").get<std::vector<std::string>>();
            const double begin = j.at("begin").get<double>();
            const double end = j.at("end").get<double>();
            double period = 0.0;
            if (j.contains("rate")) {
                const double rate = j.at("rate").get<double>();
                if (rate < 0) throw DemandError("negative-rate error: rate must be >= 0");
                period = rate > 0 ? 1.0 / rate : 0.0;
            } else if (j.contains("period")) {
                period = j.at("period").get<double>();
                if (period < 0) throw DemandError("negative-rate error: period must be >= 0");
            } else {
                throw DemandError("schema error: flow " + id + " needs rate or period");
            }
            DriverProfile profile;
            if (j.contains("profile")) profile = profile_from_json(j.at("profile"));
            auto flows = expand_interval(id, begin, end, period, route, profile);
            out.insert(out.end(), flows.begin(), flows.end());
        }
    } else {
        throw DemandError("schema error: document matches neither flow dialect");
    }

    std::stable_sort(out.begin(), out.end(),
                     [](const Flow& a, const Flow& b) { return a.depart_time < b.depart_time; });
    return out;
}

std::string save_flows(const std::vector<Flow>& flows) {
    json doc = json::array();
    for (const auto& f : flows) doc.push_back(flow_to_json(f));
    return doc.dump(2) + "\n";
}

void save_flows_file(const std::vector<Flow>& flows, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DemandError("cannot open " + path.string() + " for writing");
    out << save_flows(flows);
}

std::vector<Flow> load_flows(const std::string& document) {
    json doc;
    try {
        doc = json::parse(document);
    } catch (const json::exception& e) {
        throw DemandError(std::string("schema error: not valid JSON: ") + e.what());
    }
    if (!doc.is_array()) throw DemandError("schema error: canonical flow file must be a JSON array");
    std::vector<Flow> out;
    for (const auto& j : doc) out.push_back(flow_from_json(j));
    return out;
}

std::vector<Flow> load_flows_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DemandError("cannot open " + path.string());
    std::string document((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return load_flows(document);
}

}  // namespace twinflow::demand
