#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace twinflow::metrics {

struct VehicleObs {
    std::string id;
    std::string lane;
    double speed = 0.0;         // m/s
    double accel = 0.0;         // m/s^2, realized over the last step
    double travel_time = 0.0;   // s, cumulative
    double waiting_time = 0.0;  // s, cumulative

    friend bool operator==(const VehicleObs&, const VehicleObs&) = default;
};

struct LaneObs {
    std::string id;
    std::uint32_t count = 0;   // occupants, shadow copies included
    std::uint32_t queued = 0;  // speed < 0.1 m/s, real vehicles only

    friend bool operator==(const LaneObs&, const LaneObs&) = default;
};

/// One record per step. Lane records cover every lane of the network in
/// network order; vehicle records cover every active vehicle exactly once,
/// in lane order.
struct StepObservation {
    double clock = 0.0;
    std::vector<VehicleObs> vehicles;
    std::vector<LaneObs> lanes;

    friend bool operator==(const StepObservation&, const StepObservation&) = default;
};

using ObservationStream = std::vector<StepObservation>;

/// Queued means strictly below this speed.
constexpr double kQueuedSpeedThreshold = 0.1;  // m/s

/// Line-delimited serialization: a header line declaring the lane order,
/// then one JSON record per step with per-lane counts as plain arrays
/// aligned with that order.
std::string to_jsonl(const ObservationStream& stream);
void save_jsonl_file(const ObservationStream& stream, const std::filesystem::path& path);
ObservationStream from_jsonl(const std::string& text);
ObservationStream load_jsonl_file(const std::filesystem::path& path);

}  // namespace twinflow::metrics
