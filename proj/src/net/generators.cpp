#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "twinflow/net/network.hpp"

namespace twinflow::net {
namespace {

enum class Heading { north, east, south, west };

Heading heading_of(const RoadNetwork& net, const Road& r) {
    const auto* a = net.find_intersection(r.from);
    const auto* b = net.find_intersection(r.to);
    const double dx = b->x - a->x;
    const double dy = b->y - a->y;
    if (std::abs(dx) >= std::abs(dy)) return dx >= 0 ? Heading::east : Heading::west;
    return dy >= 0 ? Heading::north : Heading::south;
}

bool is_vertical(Heading h) { return h == Heading::north || h == Heading::south; }

// 0 = through, 1 = right, 2 = left, 3 = u-turn
int turn_kind(Heading in, Heading out) {
    const int a = static_cast<int>(in);
    const int b = static_cast<int>(out);
    const int d = (b - a + 4) % 4;
    if (d == 0) return 0;
    if (d == 1) return 1;  // compass order N,E,S,W: +1 is a right turn
    if (d == 3) return 2;
    return 3;
}

struct Builder {
    RoadNetwork net;
    double speed_limit = 0.0;
    double phase_duration = 30.0;

    std::string node_id(int r, int c) const { return "n" + std::to_string(r) + "_" + std::to_string(c); }

    void add_node(std::string id, double x, double y, bool signalized) {
        net.intersections.push_back({std::move(id), x, y, signalized});
    }

    void add_pair(const std::string& base, const std::string& a, const std::string& b, double length,
                  int lanes, RoadClass cls) {
        net.roads.push_back({base + "_f", a, b, length, lanes, speed_limit, cls});
        net.roads.push_back({base + "_r", b, a, length, lanes, speed_limit, cls});
    }

    void connect_intersections() {
        // incoming/outgoing indexed per node, in road emission order
        for (const auto& node : net.intersections) {
            if (!node.signalized) continue;
            std::vector<const Road*> in, out;
            for (const auto& r : net.roads) {
                if (r.to == node.id) in.push_back(&r);
                if (r.from == node.id) out.push_back(&r);
            }
            for (const Road* rin : in) {
                const Heading hin = heading_of(net, *rin);
                for (const Road* rout : out) {
                    if (rout->to == rin->from) continue;  // u-turn back onto the reverse edge
                    const Heading hout = heading_of(net, *rout);
                    const int kind = turn_kind(hin, hout);
                    if (kind == 3) continue;
                    const int group = is_vertical(hin) ? 0 : 1;
                    auto add_conn = [&](int from_idx, int to_idx) {
                        net.connections.push_back({lane_id(rin->id, from_idx), lane_id(rout->id, to_idx),
                                                   node.id, group});
                    };
                    if (kind == 0) {
                        for (int l = 0; l < rin->lanes; ++l) add_conn(l, std::min(l, rout->lanes - 1));
                    } else if (kind == 1) {
                        add_conn(0, 0);
                    } else {
                        add_conn(rin->lanes - 1, rout->lanes - 1);
                    }
                }
            }
            net.signal_programs[node.id] =
                SignalProgram{{SignalPhase{phase_duration, {0}}, SignalPhase{phase_duration, {1}}}, 0.0};
        }
    }
};

RoadNetwork generate_lattice(int rows, int cols, int h_lanes, int v_lanes, double block_length,
                             double speed_limit, double stub_length, double phase_duration,
                             RoadClass h_class, RoadClass v_class) {
    if (rows < 1 || cols < 1) throw NetworkError("invalid dimension: rows and cols must be >= 1");
    if (h_lanes < 1 || v_lanes < 1) throw NetworkError("invalid dimension: lane counts must be >= 1");
    if (!(block_length > 0.0)) throw NetworkError("invalid dimension: block_length must be > 0");

    Builder b;
    b.speed_limit = speed_limit;
    b.phase_duration = phase_duration;

    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
            b.add_node(b.node_id(r, c), c * block_length, r * block_length, true);

    // boundary nodes on open perimeter sides; y grows northward, x eastward
    struct Side {
        const char* tag;
        double dx, dy;
    };
    const std::array<Side, 4> sides = {{{"n", 0, 1}, {"e", 1, 0}, {"s", 0, -1}, {"w", -1, 0}}};
    auto open_side = [&](int r, int c, const Side& s) {
        const int rr = r + static_cast<int>(s.dy);
        const int cc = c + static_cast<int>(s.dx);
        return rr < 0 || rr >= rows || cc < 0 || cc >= cols;
    };
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            for (const auto& s : sides) {
                if (!open_side(r, c, s)) continue;
                const std::string bid =
                    std::string("b") + s.tag + "_" + std::to_string(r) + "_" + std::to_string(c);
                b.add_node(bid, c * block_length + s.dx * stub_length, r * block_length + s.dy * stub_length,
                           false);
            }
        }
    }

    // internal roads
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c + 1 < cols; ++c)
            b.add_pair("h" + std::to_string(r) + "_" + std::to_string(c), b.node_id(r, c), b.node_id(r, c + 1),
                       block_length, h_lanes, h_class);
    for (int r = 0; r + 1 < rows; ++r)
        for (int c = 0; c < cols; ++c)
            b.add_pair("v" + std::to_string(r) + "_" + std::to_string(c), b.node_id(r, c), b.node_id(r + 1, c),
                       block_length, v_lanes, v_class);

    // boundary stubs; horizontal stubs carry the horizontal class and lane
    // count so corridors keep their width to the network edge
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            for (const auto& s : sides) {
                if (!open_side(r, c, s)) continue;
                const bool horizontal = s.dy == 0;
                const std::string bid =
                    std::string("b") + s.tag + "_" + std::to_string(r) + "_" + std::to_string(c);
                const std::string base =
                    std::string("s") + s.tag + "_" + std::to_string(r) + "_" + std::to_string(c);
                b.add_pair(base, bid, b.node_id(r, c), stub_length, horizontal ? h_lanes : v_lanes,
                           horizontal ? h_class : v_class);
            }
        }
    }

    b.connect_intersections();
    return std::move(b.net);
}

}  // namespace

RoadNetwork generate_grid(const GridParams& p) {
    if (p.lanes_per_direction < 1) throw NetworkError("invalid dimension: lanes_per_direction must be >= 1");
    return generate_lattice(p.rows, p.cols, p.lanes_per_direction, p.lanes_per_direction, p.block_length,
                            p.speed_limit, p.stub_length, p.phase_duration, RoadClass::standard,
                            RoadClass::standard);
}

RoadNetwork generate_arterial(const ArterialParams& p) {
    if (p.minor_lanes < 1 || p.major_lanes <= p.minor_lanes)
        throw NetworkError("invalid dimension: require major_lanes > minor_lanes >= 1");
    return generate_lattice(p.rows, p.cols, p.major_lanes, p.minor_lanes, p.block_length, p.speed_limit,
                            p.stub_length, p.phase_duration, RoadClass::major, RoadClass::minor);
}

}  // namespace twinflow::net
