#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace twinflow::net {

struct Intersection {
    std::string id;
    double x = 0.0;  // m, layout plane
    double y = 0.0;
    bool signalized = false;

    friend bool operator==(const Intersection&, const Intersection&) = default;
};

enum class RoadClass { standard, major, minor, boundary };

std::string to_string(RoadClass c);
RoadClass road_class_from_string(const std::string& s);

/// Directed edge between two intersections. All lanes of a road share its
/// length and speed limit; lane index 0 is the rightmost lane.
struct Road {
    std::string id;
    std::string from;
    std::string to;
    double length = 0.0;       // m
    int lanes = 1;             // per direction (this edge)
    double speed_limit = 0.0;  // m/s
    RoadClass road_class = RoadClass::standard;

    friend bool operator==(const Road&, const Road&) = default;
};

/// Lane ids are derived: "<road_id>#<lane_index>".
std::string lane_id(const std::string& road_id, int lane_index);
/// Splits a lane id into (road_id, lane_index); index -1 when malformed.
std::pair<std::string, int> split_lane_id(const std::string& lane);

struct Connection {
    std::string from_lane;
    std::string to_lane;
    std::string intersection;
    int signal_group = 0;

    friend bool operator==(const Connection&, const Connection&) = default;
};

struct SignalPhase {
    double duration = 0.0;        // s
    std::vector<int> groups;      // permitted signal groups

    friend bool operator==(const SignalPhase&, const SignalPhase&) = default;
};

struct SignalProgram {
    std::vector<SignalPhase> phases;
    double offset = 0.0;  // s, cycle offset

    double cycle() const;

    friend bool operator==(const SignalProgram&, const SignalProgram&) = default;
};

struct RoadNetwork {
    std::vector<Intersection> intersections;
    std::vector<Road> roads;
    std::vector<Connection> connections;
    std::map<std::string, SignalProgram> signal_programs;

    const Intersection* find_intersection(const std::string& id) const;
    const Road* find_road(const std::string& id) const;
    int signalized_count() const;

    friend bool operator==(const RoadNetwork&, const RoadNetwork&) = default;
};

struct Violation {
    std::string code;
    std::string message;
};

struct ValidationReport {
    std::vector<Violation> violations;
    bool empty() const { return violations.empty(); }
    std::string summary() const;
};

/// Re-checks every structural invariant; violations are report entries,
/// never exceptions.
ValidationReport validate_network(const RoadNetwork& net);

struct GridParams {
    int rows = 1;
    int cols = 1;
    int lanes_per_direction = 1;
    double block_length = 300.0;   // m
    double speed_limit = 13.89;    // m/s
    double stub_length = 200.0;    // m, boundary source/sink roads
    double phase_duration = 30.0;  // s, per phase of the two-phase program
};

struct ArterialParams {
    int rows = 1;
    int cols = 1;
    int major_lanes = 2;  // per direction, horizontal roads
    int minor_lanes = 1;  // per direction, vertical roads
    double block_length = 300.0;
    double speed_limit = 13.89;
    double stub_length = 200.0;
    double phase_duration = 30.0;
};

/// rows x cols signalized grid with bidirectional roads between neighbors and
/// bidirectional boundary stubs on every open perimeter side. Every
/// signalized intersection gets the default two-phase fixed-time program
/// (group 0 = north-south movements, group 1 = east-west movements).
RoadNetwork generate_grid(const GridParams& p);

/// Grid variant with horizontal roads as the major class and vertical roads
/// as the minor class. Requires major_lanes > minor_lanes >= 1.
RoadNetwork generate_arterial(const ArterialParams& p);

class NetworkError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace twinflow::net
