#include "twinflow/behavior/models.hpp"

#include <algorithm>
#include <cmath>

namespace twinflow::behavior {

namespace {

/// Exact ballistic advance of a vehicle braking at rate b from speed v over
/// one step (stops mid-step when v < b*dt).
double braking_advance(double v, double b, double dt) {
    if (v <= 0.0) return 0.0;
    const double t_stop = v / b;
    const double t = std::min(dt, t_stop);
    return v * t - 0.5 * b * t * t;
}

const demand::AggressivenessProfile& agg(const FollowerContext& ctx) { return ctx.profile->aggressiveness; }

constexpr double kMustStop = -1e300;

/// Largest commanded speed whose exact ballistic advance stays within
/// `available` meters this step. Positive commands advance (v + cmd)*dt/2;
/// negative commands stop mid-step after v^2*dt/(2*(v - cmd)) meters.
double advance_cap(double v, double available, double dt) {
    if (available <= 0.0) return kMustStop;
    if (available >= 0.5 * v * dt) return 2.0 * available / dt - v;
    return v - v * v * dt / (2.0 * available);
}

/// Largest commanded speed keeping the total-braking-distance invariant
///   advance + cmd^2/(2b) <= gap + v_lead^2/(2b)
/// which worst-case lead braking preserves step over step.
double total_braking_cap(double v, double vl, double gap, double b, double dt) {
    const double available = gap + vl * vl / (2.0 * b);
    if (available <= 0.0) return kMustStop;
    const double x = available - 0.5 * v * dt;
    if (x <= 0.0) return v - v * v * dt / (2.0 * available);
    return 0.5 * (std::sqrt(b * b * dt * dt + 8.0 * b * x) - b * dt);
}

double krauss_safe_command(const FollowerContext& ctx, double braking) {
    if (std::isinf(ctx.gap)) return kInfiniteGap;
    const double tau = agg(ctx).min_headway;
    const double b = std::abs(braking);
    const double v = ctx.own_speed;
    const double vl = ctx.lead_speed;
    const double formula = vl + (ctx.gap - vl * tau) / (tau + (v + vl) / (2.0 * b));
    // one ballistic step at the returned command must not close more than the
    // gap available under the lead's worst-case stop
    const double lead_advance = ctx.lead_moves_concurrently ? braking_advance(vl, b, ctx.dt) : 0.0;
    return std::min(formula, advance_cap(v, ctx.gap + lead_advance, ctx.dt));
}

}  // namespace

double krauss_safe_speed(const FollowerContext& ctx, double braking) {
    const double raw = krauss_safe_command(ctx, braking);
    return std::isinf(raw) ? raw : std::max(0.0, raw);
}

double krauss_safe_speed(const FollowerContext& ctx) {
    return krauss_safe_speed(ctx, agg(ctx).max_decel);
}

namespace {

double stopping_command(const FollowerContext& ctx, double distance, StopRule rule) {
    if (std::isinf(distance)) return kInfiniteGap;
    const double v = ctx.own_speed;
    const double dt = ctx.dt;
    if (distance <= 0.0) return v > 0.0 ? kMustStop : 0.0;
    const double b = std::abs(agg(ctx).max_decel);
    // the ballistic step itself advances (v + v')*dt/2, so that term is part
    // of both quadratics; the rules differ in the continuation after it
    const double x = distance - v * dt / 2.0;
    if (x <= 0.0) return v - v * v * dt / (2.0 * distance);  // mid-step stop within `distance`
    if (rule == StopRule::held) {
        // v'^2/(2b) + (3/2)*v'*dt = x: one reaction step held at v' before braking
        return 0.5 * (std::sqrt(9.0 * b * b * dt * dt + 8.0 * b * x) - 3.0 * b * dt);
    }
    // v'^2/(2b) + v'*dt/2 = x: braking starts right at the next step
    return 0.5 * (std::sqrt(b * b * dt * dt + 8.0 * b * x) - b * dt);
}

}  // namespace

double stopping_speed(const FollowerContext& ctx, double distance, StopRule rule) {
    const double raw = stopping_command(ctx, distance, rule);
    return std::isinf(raw) ? raw : std::max(0.0, raw);
}

double free_speed(const FollowerContext& ctx, Dialect dialect) {
    if (dialect == Dialect::A) return ctx.desired_speed;
    return std::min(ctx.desired_speed, stopping_speed(ctx, ctx.lookahead_distance, StopRule::averaged));
}

double krauss_next_speed(const FollowerContext& ctx, bool lookahead_free_speed) {
    const double accelerated = ctx.own_speed + agg(ctx).max_accel * ctx.dt;
    const double free = free_speed(ctx, lookahead_free_speed ? Dialect::B : Dialect::A);
    const double safe = krauss_safe_speed(ctx);
    return std::max(0.0, std::min({accelerated, free, safe}));
}

bool wagner_in_dead_zone(const FollowerContext& ctx) {
    if (std::isinf(ctx.gap)) return false;
    if (ctx.gap <= agg(ctx).min_gap) return false;
    const auto& w = ctx.profile->wagner;
    const double dv_threshold =
        std::max(w.min_perception_dv, w.perception_dv_coeff * ctx.gap * ctx.gap);
    return std::abs(ctx.own_speed - ctx.lead_speed) <= dv_threshold;
}

double wagner_speed(const FollowerContext& ctx, double unit_draw, bool lookahead_free_speed) {
    const double krauss = krauss_next_speed(ctx, lookahead_free_speed);
    if (unit_draw >= ctx.profile->wagner.beta) return krauss;
    // action point: hold until the perceptual threshold is crossed, then
    // react with the collision-avoidance speed
    if (wagner_in_dead_zone(ctx)) return std::min(ctx.own_speed, free_speed(ctx, Dialect::A));
    return krauss;
}

WiedemannDecision wiedemann_speed(const FollowerContext& ctx) {
    const auto& a = agg(ctx);
    const auto& w = ctx.profile->wiedemann;
    if (std::isinf(ctx.gap)) return {WiedemannMode::free, ctx.desired_speed};

    const double dv = ctx.own_speed - ctx.lead_speed;  // > 0 when closing
    const double ax = a.min_gap;
    const double v_slow = std::min(ctx.own_speed, ctx.lead_speed);
    const double abx = ax + w.bx * std::sqrt(v_slow);
    const double sdx = ax + w.ex * w.bx * std::sqrt(v_slow);
    const double sdv = ctx.gap > ax ? ((ctx.gap - ax) / w.cx) * ((ctx.gap - ax) / w.cx) : 0.0;

    if (ctx.gap < ax || (ctx.gap < abx && dv > 0.0)) {
        return {WiedemannMode::emergency, std::max(0.0, ctx.own_speed + a.max_emergency_decel * ctx.dt)};
    }
    if (dv > sdv) {
        // decelerate so the speed difference is gone by the desired distance
        const double room = std::max(ctx.gap - abx, 0.01);
        const double decel = std::max(-dv * dv / (2.0 * room), a.max_decel);
        return {WiedemannMode::approaching, std::max(0.0, ctx.own_speed + decel * ctx.dt)};
    }
    if (ctx.gap > sdx) {
        return {WiedemannMode::free, ctx.desired_speed};
    }
    return {WiedemannMode::following, ctx.lead_speed};
}

double acc_accel(const FollowerContext& ctx) {
    const auto& a = agg(ctx);
    const auto& p = ctx.profile->acc;
    double accel;
    if (std::isinf(ctx.gap)) {
        accel = p.k_v * (ctx.desired_speed - ctx.own_speed);
    } else {
        const double desired_gap = a.min_gap + ctx.own_speed * a.min_headway;
        if (ctx.gap > desired_gap + p.switch_margin) {
            accel = p.k_v * (ctx.desired_speed - ctx.own_speed);
        } else {
            accel = p.k_g * (ctx.gap - desired_gap) + p.k_d * (ctx.lead_speed - ctx.own_speed);
        }
    }
    return std::clamp(accel, a.max_emergency_decel, a.max_accel);
}

double safety_envelope_command(const FollowerContext& ctx) {
    if (std::isinf(ctx.gap)) return kInfiniteGap;
    const auto& a = agg(ctx);
    const double b = std::abs(a.max_emergency_decel);
    return std::min(krauss_safe_command(ctx, a.max_emergency_decel),
                    total_braking_cap(ctx.own_speed, ctx.lead_speed, ctx.gap, b, ctx.dt));
}

double safety_clip(double proposed_speed, const FollowerContext& ctx) {
    const double safe = safety_envelope_command(ctx);
    return std::max(0.0, std::min(proposed_speed, safe));
}

Kinematics ballistic_update(const Kinematics& k, double accel, double dt) {
    Kinematics next;
    const double v_raw = k.speed + accel * dt;
    if (v_raw >= 0.0) {
        next.speed = v_raw;
        next.position = k.position + k.speed * dt + 0.5 * accel * dt * dt;
    } else {
        // stops mid-step at t* = v/|a|
        const double t_stop = k.speed / -accel;
        next.speed = 0.0;
        next.position = k.position + k.speed * t_stop + 0.5 * accel * t_stop * t_stop;
    }
    next.accel = (next.speed - k.speed) / dt;
    return next;
}

double collision_avoidance_gap(const FollowerContext& ctx) {
    const auto& a = agg(ctx);
    const double tau = a.min_headway;
    const double b = std::abs(a.max_decel);
    const double v = ctx.own_speed;
    const double vl = ctx.lead_speed;
    const double gap = vl * tau + (v - vl) * (tau + (v + vl) / (2.0 * b));
    return std::max(0.0, gap);
}

double required_gap(const FollowerContext& ctx, double gap_tolerance) {
    return collision_avoidance_gap(ctx) / gap_tolerance;
}

double next_speed_command(const FollowerContext& ctx, Dialect dialect, double wagner_draw) {
    const auto& a = agg(ctx);
    double proposed;
    switch (ctx.profile->car_following) {
        case demand::CarFollowingModel::krauss_default:
            proposed = krauss_next_speed(ctx, false);
            break;
        case demand::CarFollowingModel::krauss_lookahead:
            proposed = krauss_next_speed(ctx, true);
            break;
        case demand::CarFollowingModel::wagner:
            proposed = wagner_speed(ctx, wagner_draw, dialect == Dialect::B);
            break;
        case demand::CarFollowingModel::wiedemann:
            proposed = wiedemann_speed(ctx).speed;
            break;
        case demand::CarFollowingModel::acc:
            proposed = ctx.own_speed + acc_accel(ctx) * ctx.dt;
            break;
        default:
            proposed = krauss_next_speed(ctx, false);
    }

    // acceleration bounds (exact clip), then the dialect's obstruction cap,
    // then the universal safety envelope; caps may go negative (mid-step stop)
    proposed = std::min(proposed, ctx.own_speed + a.max_accel * ctx.dt);
    proposed = std::min(proposed, ctx.desired_speed);
    const StopRule rule = dialect == Dialect::A ? StopRule::held : StopRule::averaged;
    proposed = std::min(proposed, stopping_command(ctx, ctx.lookahead_distance, rule));
    proposed = std::min(proposed, safety_envelope_command(ctx));
    return std::max(proposed, ctx.own_speed + a.max_emergency_decel * ctx.dt);
}

double next_speed(const FollowerContext& ctx, Dialect dialect, double wagner_draw) {
    return std::max(0.0, next_speed_command(ctx, dialect, wagner_draw));
}

}  // namespace twinflow::behavior
