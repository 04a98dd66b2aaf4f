#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <unordered_map>
#include <vector>

#include "twinflow/behavior/models.hpp"
#include "twinflow/demand/flow.hpp"
#include "twinflow/net/network.hpp"
#include "twinflow/util/counter_rng.hpp"

namespace twinflow::engine {

using behavior::Dialect;

class SimulationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct EngineConfig {
    Dialect dialect = Dialect::A;
    double dt = 1.0;          // s
    double horizon = 3600.0;  // s
    std::uint64_t seed = 1;
    unsigned worker_count = 1;
};

constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

/// Index-based view of a RoadNetwork, immutable after compile(); shared
/// read-only across worker threads.
struct CompiledNetwork {
    struct Node {
        std::string id;
        bool signalized = false;
        std::vector<std::uint64_t> phase_group_masks;  // bit g = group g permitted
        std::vector<double> phase_durations;
        double offset = 0.0;
    };
    struct LaneOut {
        std::uint32_t next_road = kNone;
        std::uint32_t to_lane = kNone;
        int signal_group = 0;
    };
    struct Lane {
        std::string id;
        std::uint32_t road = kNone;
        int index = 0;  // 0 = rightmost
        double length = 0.0;
        double speed_limit = 0.0;
        std::uint32_t left = kNone;   // neighbor lanes on the same road
        std::uint32_t right = kNone;
        std::uint32_t end_node = kNone;
        std::vector<LaneOut> outs;  // sorted by next_road
    };
    struct Road {
        std::string id;
        std::uint32_t first_lane = kNone;
        int lane_count = 0;
        double length = 0.0;
        std::uint32_t from_node = kNone;
        std::uint32_t to_node = kNone;
    };

    std::vector<Node> nodes;
    std::vector<Road> roads;
    std::vector<Lane> lanes;
    std::unordered_map<std::string, std::uint32_t> road_index;

    /// Throws SimulationError when validate_network is non-empty.
    static CompiledNetwork compile(const net::RoadNetwork& net);

    const LaneOut* out_for(std::uint32_t lane, std::uint32_t next_road) const;
    /// Lane distance from `lane` to the nearest lane of its road with a
    /// connection to next_road; -1 when no lane serves it.
    int steps_to_service(std::uint32_t lane, std::uint32_t next_road) const;
};

struct Vehicle {
    std::string id;
    demand::DriverProfile profile;
    std::vector<std::uint32_t> route;  // road indices
    std::uint32_t route_pos = 0;
    std::uint32_t lane = kNone;
    double position = 0.0;  // m, front bumper from lane start
    double speed = 0.0;
    double accel = 0.0;
    double depart = 0.0;  // s, actual insertion time
    double arrive = -1.0;
    double travel_time = 0.0;
    double waiting_time = 0.0;
    std::uint64_t priority = 0;  // dialect A conflict draws; id order in B

    enum class LcPhase : std::uint8_t { none, committing };
    LcPhase lc_phase = LcPhase::none;
    std::uint32_t lc_target = kNone;
    std::uint32_t signaled_lag = kNone;  // dialect B: lag vehicle watching us

    bool active = false;
    std::uint64_t moved_stamp = 0;  // step counter of the last applied move

    std::uint32_t current_road() const { return route[route_pos]; }
    bool on_last_road() const { return route_pos + 1 == route.size(); }
    double tail() const { return position - profile.vehicle_length; }
};

/// Lane occupancy entry; shadows mirror their subject's geometry on the
/// lane-change target lane while a change is committing (dialect A).
struct Occupant {
    std::uint32_t vehicle = kNone;
    bool shadow = false;
};

struct PendingFlow {
    std::uint32_t vehicle = kNone;  // preallocated Vehicle slot
    double depart = 0.0;
    std::uint64_t order = 0;  // position in the flow list, id-order tiebreak
};

struct World {
    const CompiledNetwork* net = nullptr;
    EngineConfig config;
    double clock = 0.0;
    std::uint64_t step_count = 0;

    std::vector<Vehicle> vehicles;
    std::vector<std::vector<Occupant>> lane_occupants;  // sorted by position desc
    std::vector<std::uint32_t> phase_index;             // per node
    std::vector<double> phase_elapsed;

    std::vector<PendingFlow> pending;  // sorted by (depart, order); not yet inserted
    std::size_t injected_count = 0;
    std::size_t arrived_count = 0;

    util::CounterRng rng{0};

    std::size_t active_count() const;
};

}  // namespace twinflow::engine
