#pragma once

#include <limits>

#include "twinflow/demand/profile.hpp"

namespace twinflow::behavior {

/// Stepping pipeline flavor. A is the snapshot-parallel dialect, B the
/// sequential one; they also select the free-speed rule and the
/// stop-distance quadratic.
enum class Dialect { A, B };

/// Discretization of the stop-distance quadratic. Both include the exact
/// ballistic advance of the current step; `held` additionally holds the new
/// speed for one reaction step before braking, `averaged` starts braking at
/// the next step.
enum class StopRule { held, averaged };

constexpr double kInfiniteGap = std::numeric_limits<double>::infinity();

/// Everything a car-following evaluation may look at. gap is bumper to
/// bumper; kInfiniteGap (with lead_speed 0) encodes an empty road ahead.
/// lookahead_distance is the distance to the route's next obstruction: a
/// stop line the vehicle cannot pass this phase, a lane end it cannot
/// continue through, or infinity when the road ahead is clear.
struct FollowerContext {
    double own_speed = 0.0;      // m/s
    double lead_speed = 0.0;     // m/s
    double gap = kInfiniteGap;   // m
    double desired_speed = 0.0;  // m/s, already capped by the lane speed limit
    double dt = 1.0;             // s
    double lookahead_distance = kInfiniteGap;  // m
    /// false when the lead's position is already this step's final one
    /// (sequential pipeline); the one-step safety cap then credits the lead
    /// no further concurrent advance.
    bool lead_moves_concurrently = true;
    const demand::DriverProfile* profile = nullptr;
};

struct Kinematics {
    double position = 0.0;  // m along lane
    double speed = 0.0;     // m/s
    double accel = 0.0;     // m/s^2 applied over the last step
};

/// Krauss (1998) safe following speed,
///   v_safe = v_lead + (gap - v_lead*tau) / (tau + (v + v_lead)/(2b)),
/// with tau = min_headway and b = |braking| (pass the comfortable or the
/// emergency rate). Additionally capped so one ballistic step at the
/// returned speed cannot close more than the gap available under the lead's
/// worst-case stop, and floored at 0.
double krauss_safe_speed(const FollowerContext& ctx, double braking);

/// Model-flavored convenience: braking = |max_decel|.
double krauss_safe_speed(const FollowerContext& ctx);

/// Largest speed that can still stop within `distance` under the ballistic
/// update, by the dialect's quadratic.
double stopping_speed(const FollowerContext& ctx, double distance, StopRule rule);

/// Dialect A: the desired speed, lookahead ignored. Dialect B: additionally
/// capped by the stopping speed for the visible lookahead distance.
double free_speed(const FollowerContext& ctx, Dialect dialect);

/// Full Krauss next-speed proposal: min(accelerated, free, safe). The
/// `lookahead_free_speed` flag selects the model-level free-speed rule
/// (false = krauss_default, true = krauss_lookahead).
double krauss_next_speed(const FollowerContext& ctx, bool lookahead_free_speed);

/// Krauss/action-point mixture: with probability beta the driver only reacts
/// when the perceptual threshold is crossed (inside the dead zone the speed
/// is held), otherwise the Krauss proposal applies. `unit_draw` comes from
/// the engine-owned seeded stream.
double wagner_speed(const FollowerContext& ctx, double unit_draw, bool lookahead_free_speed = false);

/// True iff (gap, dv) lies inside the action-point perceptual dead zone.
bool wagner_in_dead_zone(const FollowerContext& ctx);

enum class WiedemannMode { free, approaching, following, emergency };

struct WiedemannDecision {
    WiedemannMode mode;
    double speed;  // m/s proposal for the next step
};

/// Psycho-physical regimes over the (gap, speed-difference) plane.
WiedemannDecision wiedemann_speed(const FollowerContext& ctx);

/// Adaptive cruise control: speed control when the gap is large, gap control
/// when small; returns an acceleration clipped to
/// [max_emergency_decel, max_accel].
double acc_accel(const FollowerContext& ctx);

/// Safety envelope applied to every model: min(proposed, Krauss safe speed
/// at the emergency braking rate), floored at 0.
double safety_clip(double proposed_speed, const FollowerContext& ctx);

/// Unclamped safety envelope at the emergency rate: the Krauss formula, the
/// exact one-step advance cap, and the inductive total-braking-distance cap
/// (advance + v'^2/(2b) <= gap + v_lead^2/(2b), which is invariant under
/// worst-case lead braking). Negative values encode a mid-step stop.
double safety_envelope_command(const FollowerContext& ctx);

/// Ballistic step: v' = max(0, v + a*dt); position integrates the exact
/// piecewise-constant-acceleration trajectory, including a mid-step stop.
Kinematics ballistic_update(const Kinematics& k, double accel, double dt);

/// Collision-avoidance gap the context's driver needs behind its lead,
/// i.e. the inverse of the Krauss safe-speed formula at the comfortable
/// braking rate, floored at 0.
double collision_avoidance_gap(const FollowerContext& ctx);

/// Lane-change acceptance gap: collision-avoidance gap divided by the
/// tolerance factor.
double required_gap(const FollowerContext& ctx, double gap_tolerance);

/// One engine-pipeline evaluation: runs the profile's model, applies the
/// accel bounds, the dialect's obstruction cap, and the safety envelope.
/// Returns the commanded end-of-step speed in the ballistic convention: a
/// negative command means the vehicle must stop mid-step, and
/// ballistic_update integrates the shortened advance. Floored at
/// own_speed + max_emergency_decel*dt. This is the entry point the engine
/// uses, paired with ballistic_update.
double next_speed_command(const FollowerContext& ctx, Dialect dialect, double wagner_draw);

/// next_speed_command clamped to a realizable speed (>= 0).
double next_speed(const FollowerContext& ctx, Dialect dialect, double wagner_draw);

}  // namespace twinflow::behavior
