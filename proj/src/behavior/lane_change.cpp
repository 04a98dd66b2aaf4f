#include "twinflow/behavior/lane_change.hpp"

namespace twinflow::behavior {

namespace {

bool gaps_acceptable(const NeighborView& n) {
    if (n.has_lead && n.lead_gap < n.lead_required_gap) return false;
    if (n.has_lag && n.lag_gap < n.lag_required_gap) return false;
    return true;
}

}  // namespace

std::optional<LaneChangePlan> plan_lane_change(const LaneChangeQuery& q, Dialect dialect) {
    // strategic: move toward a lane that can serve the route's next road
    if (q.current_steps_to_service > 0) {
        const NeighborView* best = nullptr;
        for (const auto* n : {q.left ? &*q.left : nullptr, q.right ? &*q.right : nullptr}) {
            if (!n || n->steps_to_service >= q.current_steps_to_service) continue;
            if (!best || n->steps_to_service < best->steps_to_service) best = n;
        }
        if (best && gaps_acceptable(*best))
            return LaneChangePlan{best->lane, LaneChangeMotivation::strategic};
        return std::nullopt;
    }

    if (dialect == Dialect::A) return std::nullopt;

    // tactical overtaking: a perceptibly slow lead within the horizon and a
    // neighbor lane that also serves the route and moves faster
    if (!q.has_lead || q.lead_gap > q.tactical_gap_horizon) return std::nullopt;
    if (q.lead_speed >= q.desired_speed - q.tactical_speed_margin) return std::nullopt;
    const NeighborView* best = nullptr;
    double best_speed = q.lead_speed;
    for (const auto* n : {q.left ? &*q.left : nullptr, q.right ? &*q.right : nullptr}) {
        if (!n || n->steps_to_service != 0) continue;
        const double neighbor_speed = n->has_lead ? n->lead_speed : q.desired_speed;
        const double neighbor_room = n->has_lead ? n->lead_gap : kInfiniteGap;
        if (neighbor_room < q.lead_gap) continue;
        if (neighbor_speed <= best_speed + q.tactical_speed_margin) continue;
        if (!gaps_acceptable(*n)) continue;
        best = n;
        best_speed = neighbor_speed;
    }
    if (best) return LaneChangePlan{best->lane, LaneChangeMotivation::tactical};
    return std::nullopt;
}

}  // namespace twinflow::behavior
