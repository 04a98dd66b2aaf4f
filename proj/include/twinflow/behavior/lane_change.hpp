#pragma once

#include <cstdint>
#include <optional>

#include "twinflow/behavior/models.hpp"

namespace twinflow::behavior {

enum class LaneChangeMotivation { strategic, tactical };

struct LaneChangePlan {
    std::uint32_t target_lane = 0;
    LaneChangeMotivation motivation = LaneChangeMotivation::strategic;
};

/// Snapshot of one adjacent lane as seen from the subject's position.
/// Gaps are bumper to bumper; required gaps come from required_gap() with
/// the respective follower's context and the subject's gap tolerance.
struct NeighborView {
    std::uint32_t lane = 0;
    /// lane distance to the nearest lane that serves the route's next road
    /// (0 = this lane serves it)
    int steps_to_service = 0;
    bool has_lead = false;
    double lead_gap = kInfiniteGap;
    double lead_speed = 0.0;
    double lead_required_gap = 0.0;  // subject behind the new lead
    bool has_lag = false;
    double lag_gap = kInfiniteGap;
    double lag_required_gap = 0.0;  // new lag behind the subject
};

struct LaneChangeQuery {
    int current_steps_to_service = 0;  // 0 when the current lane serves the route
    double own_speed = 0.0;
    double desired_speed = 0.0;
    bool has_lead = false;
    double lead_gap = kInfiniteGap;
    double lead_speed = 0.0;
    double tactical_speed_margin = 1.0;  // m/s the lead must be slower by
    double tactical_gap_horizon = 75.0;  // m within which a slow lead matters
    std::optional<NeighborView> left;
    std::optional<NeighborView> right;
};

/// Dialect A emits plans only to follow the route (strategic). Dialect B
/// evaluates strategic first, then tactical overtaking. A plan is emitted
/// only when both the lead and lag gaps on the target lane meet their
/// required gaps.
std::optional<LaneChangePlan> plan_lane_change(const LaneChangeQuery& query, Dialect dialect);

}  // namespace twinflow::behavior
