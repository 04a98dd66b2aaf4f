#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace twinflow::demand {

/// Car-following aggressiveness parameters. Maxima double as the usual
/// values: the engine never uses a separate comfortable/maximum split.
struct AggressivenessProfile {
    double max_accel = 2.9;             // m/s^2, > 0
    double max_decel = -5.0;            // m/s^2, < 0
    double max_emergency_decel = -9.0;  // m/s^2, <= max_decel
    double min_gap = 2.0;               // m, > 0
    double min_headway = 1.3;           // s, > 0

    bool valid() const {
        return max_accel > 0 && max_decel < 0 && max_emergency_decel <= max_decel && min_gap > 0 &&
               min_headway > 0;
    }

    friend bool operator==(const AggressivenessProfile&, const AggressivenessProfile&) = default;
};

enum class CarFollowingModel { krauss_default, krauss_lookahead, wagner, wiedemann, acc };

std::string to_string(CarFollowingModel m);
CarFollowingModel car_following_from_string(const std::string& s);
const std::vector<CarFollowingModel>& all_car_following_models();

struct WagnerParams {
    double beta = 0.5;                   // probability of the action-point branch
    double perception_dv_coeff = 3.3e-4; // 1/(m*s): dv threshold grows with gap^2
    double min_perception_dv = 0.1;      // m/s, floor of the dead zone
    friend bool operator==(const WagnerParams&, const WagnerParams&) = default;
};

struct WiedemannParams {
    double bx = 2.5;  // following-distance factor, ABX = min_gap + bx*sqrt(v)
    double ex = 2.0;  // SDX = min_gap + ex*bx*sqrt(v)
    double cx = 40.0; // approach perception scale, SDV = ((gap - min_gap)/cx)^2
    friend bool operator==(const WiedemannParams&, const WiedemannParams&) = default;
};

struct AccParams {
    double k_v = 0.4;              // 1/s, speed-control gain
    double k_g = 0.23;             // 1/s^2, gap-control gap gain
    double k_d = 0.07;             // 1/s, gap-control closing-rate gain
    double switch_margin = 2.0;    // m above desired gap where speed control takes over
    friend bool operator==(const AccParams&, const AccParams&) = default;
};

struct DriverProfile {
    AggressivenessProfile aggressiveness;
    CarFollowingModel car_following = CarFollowingModel::krauss_default;
    double gap_tolerance = 1.0;         // divisor on the lane-change collision-avoidance gap
    double vehicle_length = 5.0;        // m
    double desired_speed_factor = 1.0;  // fraction of the lane speed limit
    WagnerParams wagner;
    WiedemannParams wiedemann;
    AccParams acc;

    friend bool operator==(const DriverProfile&, const DriverProfile&) = default;
};

class DemandError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The six aggressiveness labels, in canonical order.
const std::vector<std::string>& aggressiveness_labels();

/// Returns the parameter row for one of the six labels; throws DemandError
/// on an unknown label.
AggressivenessProfile make_profile(const std::string& aggressiveness_type);

}  // namespace twinflow::demand
