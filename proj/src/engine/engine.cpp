#include "twinflow/engine/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "twinflow/behavior/lane_change.hpp"

namespace twinflow::engine {

namespace {

using behavior::FollowerContext;
using behavior::kInfiniteGap;

constexpr double kMaxLookahead = 1000.0;  // m; obstructions beyond this are invisible
constexpr double kGapSlack = 1e-9;

struct Proposal {
    double new_speed = 0.0;
    double new_position = 0.0;
    bool valid = false;
};

struct Entrant {
    std::uint32_t vehicle = kNone;
    std::uint32_t from_lane = kNone;
    std::uint32_t to_lane = kNone;
    double overshoot = 0.0;
    double new_speed = 0.0;
};

struct PlannedChange {
    std::uint32_t vehicle = kNone;
    std::uint32_t from_lane = kNone;
    std::uint32_t to_lane = kNone;
};

/// One step's transient state and the stepping logic for both dialects.
class Stepper {
public:
    Stepper(World& world, util::ThreadPool& pool) : w(world), net(*world.net), pool(pool) {}

    void run_step() {
        proposals.assign(w.vehicles.size(), Proposal{});
        plans.clear();
        entrants.clear();

        if (w.config.dialect == Dialect::A) {
            step_parallel();
        } else {
            step_sequential();
        }

        advance_signals(w, w.config.dt);
        w.clock += w.config.dt;
        ++w.step_count;
        inject_vehicles(w);
        accumulate_times();
        check_invariants();
    }

private:
    World& w;
    const CompiledNetwork& net;
    util::ThreadPool& pool;
    std::vector<Proposal> proposals;
    std::vector<PlannedChange> plans;
    std::vector<Entrant> entrants;
    std::vector<std::uint32_t> signaled_by;  // lag vehicle -> subject (dialect B)

    const Vehicle& veh(std::uint32_t i) const { return w.vehicles[i]; }
    Vehicle& veh(std::uint32_t i) { return w.vehicles[i]; }
    std::uint32_t index_of(const Vehicle& v) const {
        return static_cast<std::uint32_t>(&v - w.vehicles.data());
    }
    bool moved_this_step(const Vehicle& v) const { return v.moved_stamp == w.step_count + 1; }

    double occ_position(const Occupant& o) const { return veh(o.vehicle).position; }
    double occ_tail(const Occupant& o) const { return veh(o.vehicle).tail(); }

    double emergency_advance(const Vehicle& v) const {
        const double b = -v.profile.aggressiveness.max_emergency_decel;
        const double t = std::min(w.config.dt, v.speed / b);
        return v.speed * t - 0.5 * b * t * t;
    }

    bool group_open(std::uint32_t node_idx, int group) const {
        const auto& node = net.nodes[node_idx];
        if (node.phase_group_masks.empty()) return true;  // unsignalized
        return (node.phase_group_masks[w.phase_index[node_idx]] >> group) & 1ULL;
    }

    bool connection_open(std::uint32_t lane, const CompiledNetwork::LaneOut& out) const {
        return group_open(net.lanes[lane].end_node, out.signal_group);
    }

    /// Distance from `position` on `lane` to the route's next obstruction: a
    /// stop line the vehicle may not pass or a lane end it cannot continue
    /// through. The destination end of the final road is a free exit.
    double obstruction_distance(std::uint32_t lane, double position, const Vehicle& v) const {
        std::uint32_t route_pos = v.route_pos;
        double d = net.lanes[lane].length - position;
        for (;;) {
            if (route_pos + 1 >= v.route.size()) return kInfiniteGap;
            const auto* out = net.out_for(lane, v.route[route_pos + 1]);
            if (out == nullptr) return d;
            if (!connection_open(lane, *out)) return d;
            if (d > kMaxLookahead) return kInfiniteGap;
            lane = out->to_lane;
            ++route_pos;
            d += net.lanes[lane].length;
        }
    }

    struct LeaderInfo {
        bool found = false;
        double gap = kInfiniteGap;
        double speed = 0.0;
        bool moved = false;  // already holds its final position this step
    };

    LeaderInfo leader_at(const Occupant& o, double gap) const {
        LeaderInfo info;
        info.found = true;
        info.gap = gap;
        info.speed = veh(o.vehicle).speed;
        info.moved = moved_this_step(veh(o.vehicle));
        return info;
    }

    /// Leader on the vehicle's own lane (the occupant ranked just ahead) or,
    /// failing that, the rearmost occupant of the route's next lane across
    /// the intersection. Signal state does not hide a physical leader.
    LeaderInfo find_leader(const Vehicle& v, std::uint32_t lane, std::size_t rank) const {
        const auto& occ = w.lane_occupants[lane];
        if (rank > 0) {
            const Occupant& ahead = occ[rank - 1];
            return leader_at(ahead, occ_tail(ahead) - v.position);
        }
        if (v.route_pos + 1 < v.route.size()) {
            if (const auto* out = net.out_for(lane, v.route[v.route_pos + 1])) {
                const auto& next_occ = w.lane_occupants[out->to_lane];
                if (!next_occ.empty()) {
                    const Occupant& rear = next_occ.back();
                    return leader_at(rear, (net.lanes[lane].length - v.position) + occ_tail(rear));
                }
            }
        }
        return {};
    }

    double desired_speed(const Vehicle& v, std::uint32_t lane) const {
        const double limit = net.lanes[lane].speed_limit;
        return std::min(limit, limit * v.profile.desired_speed_factor);
    }

    FollowerContext make_context(const Vehicle& v, const LeaderInfo& leader) const {
        FollowerContext ctx;
        ctx.own_speed = v.speed;
        ctx.desired_speed = desired_speed(v, v.lane);
        ctx.dt = w.config.dt;
        ctx.profile = &v.profile;
        ctx.lookahead_distance = obstruction_distance(v.lane, v.position, v);
        if (leader.found) {
            ctx.gap = std::max(0.0, leader.gap);
            ctx.lead_speed = leader.speed;
            ctx.lead_moves_concurrently = !leader.moved;
        }
        return ctx;
    }

    /// Tightest constraint among the in-lane leader, the target-lane leader
    /// while a change is committing, and a signaling subject (dialect B).
    LeaderInfo effective_leader(const Vehicle& v, std::uint32_t lane, std::size_t rank) const {
        LeaderInfo best = find_leader(v, lane, rank);
        if (v.lc_phase == Vehicle::LcPhase::committing && v.lc_target != kNone) {
            const auto& target_occ = w.lane_occupants[v.lc_target];
            for (std::size_t i = target_occ.size(); i-- > 0;) {
                const Occupant& o = target_occ[i];
                if (o.vehicle == index_of(v)) continue;
                if (occ_position(o) <= v.position) continue;
                const LeaderInfo cand = leader_at(o, occ_tail(o) - v.position);
                if (!best.found || cand.gap < best.gap) best = cand;
                break;
            }
        }
        if (!signaled_by.empty()) {
            const std::uint32_t subject_idx = signaled_by[index_of(v)];
            if (subject_idx != kNone && veh(subject_idx).active) {
                const Vehicle& subject = veh(subject_idx);
                LeaderInfo cand;
                cand.found = true;
                cand.gap = subject.tail() - v.position;
                cand.speed = subject.speed;
                cand.moved = moved_this_step(subject);
                if (!best.found || cand.gap < best.gap) best = cand;
            }
        }
        return best;
    }

    double wagner_draw(std::uint32_t vehicle_idx) const {
        return w.rng.unit(w.step_count, vehicle_idx, util::kPurposeWagner);
    }

    // ---- dialect A: snapshot proposals, deterministic merge ----

    void step_parallel() {
        std::vector<PlannedChange> plan_slots(w.vehicles.size());
        pool.parallel_for(net.lanes.size(), [&](std::size_t lo, std::size_t hi) {
            for (std::size_t lane = lo; lane < hi; ++lane) {
                const auto& occ = w.lane_occupants[lane];
                for (std::size_t rank = 0; rank < occ.size(); ++rank) {
                    if (occ[rank].shadow) continue;
                    const std::uint32_t vi = occ[rank].vehicle;
                    const Vehicle& v = w.vehicles[vi];
                    const FollowerContext ctx =
                        make_context(v, effective_leader(v, static_cast<std::uint32_t>(lane), rank));
                    const double cmd = behavior::next_speed_command(ctx, Dialect::A, wagner_draw(vi));
                    const auto kin = behavior::ballistic_update(
                        {v.position, v.speed, 0.0}, (cmd - v.speed) / w.config.dt, w.config.dt);
                    proposals[vi] = {kin.speed, kin.position, true};
                    if (v.lc_phase == Vehicle::LcPhase::none) {
                        if (auto plan =
                                consider_lane_change(v, static_cast<std::uint32_t>(lane), rank, Dialect::A))
                            plan_slots[vi] = *plan;
                    }
                }
            }
        });
        for (std::uint32_t vi = 0; vi < plan_slots.size(); ++vi)
            if (plan_slots[vi].vehicle != kNone) plans.push_back(plan_slots[vi]);

        apply_moves();
        place_entrants();
        commit_lane_changes();
        accept_new_plans(Dialect::A);
    }

    void apply_moves() {
        for (std::uint32_t lane = 0; lane < net.lanes.size(); ++lane) {
            auto& occ = w.lane_occupants[lane];
            for (std::size_t rank = 0; rank < occ.size();) {
                if (occ[rank].shadow) {
                    ++rank;
                    continue;
                }
                const std::uint32_t vi = occ[rank].vehicle;
                Vehicle& v = w.vehicles[vi];
                const Proposal& p = proposals[vi];
                if (!p.valid) {
                    ++rank;
                    continue;
                }
                if (p.new_position > net.lanes[lane].length + kGapSlack) {
                    if (v.on_last_road()) {
                        apply_kinematics(v, p.new_speed, p.new_position);
                        retire(vi, lane, rank);
                        continue;  // occupant removed
                    }
                    const auto* out = net.out_for(lane, v.route[v.route_pos + 1]);
                    const bool forced =
                        emergency_advance(v) > net.lanes[lane].length - v.position + kGapSlack;
                    if (out != nullptr && (connection_open(lane, *out) || forced)) {
                        // placed after all lanes have moved; state stays pre-step
                        entrants.push_back(
                            {vi, lane, out->to_lane, p.new_position - net.lanes[lane].length, p.new_speed});
                        ++rank;
                        continue;
                    }
                    hold_at_line(v, p.new_speed);
                } else {
                    apply_kinematics(v, p.new_speed, p.new_position);
                }
                ++rank;
            }
        }
    }

    /// Entrants are resolved per target lane after all moves, ordered by
    /// overshoot, then the seeded priority draw, then id.
    void place_entrants() {
        std::sort(entrants.begin(), entrants.end(), [&](const Entrant& a, const Entrant& b) {
            if (a.to_lane != b.to_lane) return a.to_lane < b.to_lane;
            if (a.overshoot != b.overshoot) return a.overshoot > b.overshoot;
            if (veh(a.vehicle).priority != veh(b.vehicle).priority)
                return veh(a.vehicle).priority < veh(b.vehicle).priority;
            return a.vehicle < b.vehicle;
        });
        for (const Entrant& e : entrants) {
            Vehicle& v = w.vehicles[e.vehicle];
            auto& origin = w.lane_occupants[e.from_lane];
            const auto it = std::find_if(origin.begin(), origin.end(), [&](const Occupant& o) {
                return o.vehicle == e.vehicle && !o.shadow;
            });
            if (it == origin.end()) throw SimulationError("entrant missing from origin lane");
            origin.erase(it);
            abort_lane_change(e.vehicle);
            enter_lane(e.vehicle, e.to_lane, e.overshoot, e.new_speed);
            if (v.lane == e.from_lane) resolve_overlaps(e.from_lane);
        }
    }

    // ---- dialect B: sequential per lane, front to back ----

    void step_sequential() {
        signaled_by.assign(w.vehicles.size(), kNone);
        for (const auto& subject : w.vehicles)
            if (subject.active && subject.signaled_lag != kNone)
                signaled_by[subject.signaled_lag] = index_of(subject);

        for (std::uint32_t lane = 0; lane < net.lanes.size(); ++lane) {
            auto& occ = w.lane_occupants[lane];
            for (std::size_t rank = 0; rank < occ.size();) {
                const std::uint32_t vi = occ[rank].vehicle;
                Vehicle& v = w.vehicles[vi];
                if (occ[rank].shadow || moved_this_step(v)) {
                    ++rank;
                    continue;
                }
                const FollowerContext ctx = make_context(v, effective_leader(v, lane, rank));
                const double v_new = behavior::next_speed(ctx, Dialect::B, wagner_draw(vi));
                const double new_pos = v.position + 0.5 * (v.speed + v_new) * w.config.dt;
                if (new_pos > net.lanes[lane].length + kGapSlack) {
                    if (v.on_last_road()) {
                        apply_kinematics(v, v_new, new_pos);
                        retire(vi, lane, rank);
                        continue;
                    }
                    const auto* out = net.out_for(lane, v.route[v.route_pos + 1]);
                    const bool forced =
                        emergency_advance(v) > net.lanes[lane].length - v.position + kGapSlack;
                    if (out != nullptr && (connection_open(lane, *out) || forced)) {
                        abort_lane_change(vi);
                        occ.erase(occ.begin() + static_cast<std::ptrdiff_t>(rank));
                        enter_lane(vi, out->to_lane, new_pos - net.lanes[lane].length, v_new);
                        if (v.lane == lane) {
                            // held at the origin line; re-inserted at the front
                            ++rank;
                        }
                        continue;
                    }
                    hold_at_line(v, v_new);
                } else {
                    apply_kinematics(v, v_new, new_pos);
                }
                ++rank;
            }
        }
        // lane changes strictly after car-following, on the updated state
        commit_lane_changes();
        plan_sequential_changes();
        signaled_by.clear();
    }

    // ---- shared movement helpers ----

    void apply_kinematics(Vehicle& v, double new_speed, double new_position) {
        v.accel = (new_speed - v.speed) / w.config.dt;
        v.speed = new_speed;
        v.position = new_position;
        v.moved_stamp = w.step_count + 1;
    }

    /// Emergency-brakes at the stop line; position is clamped to the line.
    void hold_at_line(Vehicle& v, double proposed_speed) {
        const double held_speed =
            std::max(0.0, v.speed + v.profile.aggressiveness.max_emergency_decel * w.config.dt);
        apply_kinematics(v, std::min(proposed_speed, held_speed), net.lanes[v.lane].length);
    }

    void retire(std::uint32_t vi, std::uint32_t lane, std::size_t rank) {
        Vehicle& v = w.vehicles[vi];
        abort_lane_change(vi);
        auto& occ = w.lane_occupants[lane];
        occ.erase(occ.begin() + static_cast<std::ptrdiff_t>(rank));
        v.active = false;
        v.arrive = w.clock + w.config.dt;
        v.travel_time += w.config.dt;
        ++w.arrived_count;
    }

    /// Moves a crossing vehicle onto `to_lane`, clamped behind its current
    /// rearmost occupant. When even position 0 is blocked the vehicle stays
    /// on its origin lane, held at the line.
    void enter_lane(std::uint32_t vi, std::uint32_t to_lane, double overshoot, double new_speed) {
        Vehicle& v = w.vehicles[vi];
        auto& target = w.lane_occupants[to_lane];
        double cap = kInfiniteGap;
        double rear_speed = kInfiniteGap;
        if (!target.empty()) {
            cap = occ_tail(target.back());
            rear_speed = veh(target.back().vehicle).speed;
        }
        if (cap < 0.0) {
            hold_at_line(v, new_speed);
            insert_sorted(v.lane, {vi, false});
            return;
        }
        double pos = overshoot;
        double speed = new_speed;
        if (pos > cap) {
            pos = cap;
            speed = std::min(speed, rear_speed);
        }
        apply_kinematics(v, speed, std::max(0.0, pos));
        v.lane = to_lane;
        ++v.route_pos;
        target.push_back({vi, false});
    }

    /// Re-establishes tail >= next-position down a lane after a hold; clamped
    /// vehicles never move backwards relative to their pre-step position.
    void resolve_overlaps(std::uint32_t lane) {
        auto& occ = w.lane_occupants[lane];
        for (std::size_t i = 1; i < occ.size(); ++i) {
            if (occ[i].shadow) continue;
            const double bound = occ_tail(occ[i - 1]);
            Vehicle& v = veh(occ[i].vehicle);
            if (v.position > bound) {
                v.position = std::max(0.0, bound);
                v.speed = std::min(v.speed, veh(occ[i - 1].vehicle).speed);
            }
        }
    }

    // ---- lane changes ----

    std::optional<PlannedChange> consider_lane_change(const Vehicle& v, std::uint32_t lane,
                                                      std::size_t rank, Dialect dialect) const {
        if (v.on_last_road()) return std::nullopt;
        const auto& l = net.lanes[lane];
        if (l.left == kNone && l.right == kNone) return std::nullopt;

        behavior::LaneChangeQuery q;
        q.current_steps_to_service =
            net.out_for(lane, v.route[v.route_pos + 1]) != nullptr
                ? 0
                : std::max(1, net.steps_to_service(lane, v.route[v.route_pos + 1]));
        q.own_speed = v.speed;
        q.desired_speed = desired_speed(v, lane);
        const LeaderInfo lead = find_leader(v, lane, rank);
        q.has_lead = lead.found;
        q.lead_gap = lead.gap;
        q.lead_speed = lead.speed;
        if (l.left != kNone) q.left = neighbor_view(v, l.left);
        if (l.right != kNone) q.right = neighbor_view(v, l.right);

        const auto plan = behavior::plan_lane_change(q, dialect);
        if (!plan) return std::nullopt;
        return PlannedChange{index_of(v), lane, plan->target_lane};
    }

    behavior::NeighborView neighbor_view(const Vehicle& v, std::uint32_t lane) const {
        behavior::NeighborView n;
        n.lane = lane;
        const int steps = net.steps_to_service(lane, v.route[v.route_pos + 1]);
        n.steps_to_service = steps < 0 ? 1000 : steps;
        const Occupant* lead = nullptr;
        const Occupant* lag = nullptr;
        neighbors_around(v, lane, lead, lag);
        if (lead != nullptr) {
            const Vehicle& lv = veh(lead->vehicle);
            n.has_lead = true;
            n.lead_gap = occ_tail(*lead) - v.position;
            n.lead_speed = lv.speed;
            n.lead_required_gap =
                behavior::required_gap(pair_context(v, lv.speed), v.profile.gap_tolerance);
        }
        if (lag != nullptr) {
            const Vehicle& gv = veh(lag->vehicle);
            n.has_lag = true;
            n.lag_gap = v.tail() - occ_position(*lag);
            n.lag_required_gap =
                behavior::required_gap(pair_context(gv, v.speed), v.profile.gap_tolerance);
        }
        return n;
    }

    FollowerContext pair_context(const Vehicle& follower, double lead_speed) const {
        FollowerContext ctx;
        ctx.own_speed = follower.speed;
        ctx.lead_speed = lead_speed;
        ctx.dt = w.config.dt;
        ctx.profile = &follower.profile;
        return ctx;
    }

    /// Nearest occupants ahead of and behind the subject's position on
    /// `lane`, skipping the subject's own shadow.
    void neighbors_around(const Vehicle& v, std::uint32_t lane, const Occupant*& lead,
                          const Occupant*& lag) const {
        lead = nullptr;
        lag = nullptr;
        for (const auto& o : w.lane_occupants[lane]) {
            if (o.vehicle == index_of(v)) continue;
            if (occ_position(o) > v.position) {
                lead = &o;
            } else {
                lag = &o;
                break;
            }
        }
    }

    void abort_lane_change(std::uint32_t vi) {
        Vehicle& v = w.vehicles[vi];
        if (v.lc_phase != Vehicle::LcPhase::committing) return;
        auto& target = w.lane_occupants[v.lc_target];
        target.erase(std::remove_if(target.begin(), target.end(),
                                    [&](const Occupant& o) { return o.shadow && o.vehicle == vi; }),
                     target.end());
        v.lc_phase = Vehicle::LcPhase::none;
        v.lc_target = kNone;
        v.signaled_lag = kNone;
    }

    /// Completes changes planned last step; a collapsed gap aborts with no
    /// state change.
    void commit_lane_changes() {
        std::vector<std::uint32_t> committing;
        for (std::uint32_t vi = 0; vi < w.vehicles.size(); ++vi)
            if (w.vehicles[vi].active && w.vehicles[vi].lc_phase == Vehicle::LcPhase::committing)
                committing.push_back(vi);
        std::sort(committing.begin(), committing.end(), [&](std::uint32_t a, std::uint32_t b) {
            if (veh(a).priority != veh(b).priority) return veh(a).priority < veh(b).priority;
            return a < b;
        });
        for (std::uint32_t vi : committing) {
            Vehicle& v = w.vehicles[vi];
            const std::uint32_t target = v.lc_target;
            const auto& l = net.lanes[v.lane];
            if ((l.left != target && l.right != target) || !change_feasible(v, target)) {
                abort_lane_change(vi);
                continue;
            }
            auto& from = w.lane_occupants[v.lane];
            from.erase(std::find_if(from.begin(), from.end(), [&](const Occupant& o) {
                return o.vehicle == vi && !o.shadow;
            }));
            auto& to = w.lane_occupants[target];
            to.erase(std::remove_if(to.begin(), to.end(),
                                    [&](const Occupant& o) { return o.shadow && o.vehicle == vi; }),
                     to.end());
            v.lane = target;
            insert_sorted(target, {vi, false});
            v.lc_phase = Vehicle::LcPhase::none;
            v.lc_target = kNone;
            v.signaled_lag = kNone;
        }
    }

    bool change_feasible(const Vehicle& v, std::uint32_t target) const {
        const Occupant* lead = nullptr;
        const Occupant* lag = nullptr;
        neighbors_around(v, target, lead, lag);
        if (lead != nullptr) {
            const double gap = occ_tail(*lead) - v.position;
            if (gap < 0.0) return false;
            if (gap < behavior::required_gap(pair_context(v, veh(lead->vehicle).speed),
                                             v.profile.gap_tolerance) -
                          kGapSlack)
                return false;
        }
        if (lag != nullptr) {
            const double gap = v.tail() - occ_position(*lag);
            if (gap < 0.0) return false;
            if (gap < behavior::required_gap(pair_context(veh(lag->vehicle), v.speed),
                                             v.profile.gap_tolerance) -
                          kGapSlack)
                return false;
        }
        // the target lane must leave room to stop for its own obstruction
        const double od = obstruction_distance(target, v.position, v);
        if (std::isinf(od)) return true;
        FollowerContext stop_ctx = pair_context(v, 0.0);
        return v.speed <= behavior::stopping_speed(stop_ctx, od, behavior::StopRule::averaged) + kGapSlack;
    }

    void insert_sorted(std::uint32_t lane, Occupant o) {
        auto& occ = w.lane_occupants[lane];
        const double pos = occ_position(o);
        auto it = occ.begin();
        while (it != occ.end() && occ_position(*it) > pos) ++it;
        occ.insert(it, o);
    }

    /// Accepted plans: dialect A inserts a shadow copy the lag vehicle will
    /// follow; dialect B signals the lag vehicle directly. Both complete
    /// next step. Conflicts resolve in priority order because later
    /// acceptances see earlier shadows.
    void accept_plan(const PlannedChange& plan, Dialect dialect) {
        Vehicle& v = w.vehicles[plan.vehicle];
        if (!v.active || v.lc_phase != Vehicle::LcPhase::none) return;
        if (v.lane != plan.from_lane) return;  // crossed an intersection since planning
        if (!change_feasible(v, plan.to_lane)) return;
        v.lc_phase = Vehicle::LcPhase::committing;
        v.lc_target = plan.to_lane;
        if (dialect == Dialect::A) {
            insert_sorted(plan.to_lane, {plan.vehicle, true});
        } else {
            const Occupant* lead = nullptr;
            const Occupant* lag = nullptr;
            neighbors_around(v, plan.to_lane, lead, lag);
            if (lag != nullptr) v.signaled_lag = lag->vehicle;
        }
    }

    void accept_new_plans(Dialect dialect) {
        std::sort(plans.begin(), plans.end(), [&](const PlannedChange& a, const PlannedChange& b) {
            if (veh(a.vehicle).priority != veh(b.vehicle).priority)
                return veh(a.vehicle).priority < veh(b.vehicle).priority;
            return a.vehicle < b.vehicle;
        });
        for (const auto& plan : plans) accept_plan(plan, dialect);
    }

    /// Dialect B plans on the post-car-following state, lane by lane,
    /// front to back.
    void plan_sequential_changes() {
        for (std::uint32_t lane = 0; lane < net.lanes.size(); ++lane) {
            const auto occ_copy = w.lane_occupants[lane];
            for (std::size_t rank = 0; rank < occ_copy.size(); ++rank) {
                if (occ_copy[rank].shadow) continue;
                const std::uint32_t vi = occ_copy[rank].vehicle;
                const Vehicle& v = w.vehicles[vi];
                if (!v.active || v.lane != lane) continue;
                if (v.lc_phase != Vehicle::LcPhase::none) continue;
                if (auto plan = consider_lane_change(v, lane, rank, Dialect::B))
                    accept_plan(*plan, Dialect::B);
            }
        }
    }

    // ---- bookkeeping ----

    void accumulate_times() {
        for (auto& v : w.vehicles) {
            if (!v.active) continue;
            if (v.depart >= w.clock) continue;  // injected at the end of this step
            v.travel_time += w.config.dt;
            if (v.speed < metrics::kQueuedSpeedThreshold) v.waiting_time += w.config.dt;
        }
    }

    void check_invariants() const {
        for (std::uint32_t lane = 0; lane < net.lanes.size(); ++lane) {
            const auto& occ = w.lane_occupants[lane];
            for (std::size_t i = 0; i < occ.size(); ++i) {
                const double pos = occ_position(occ[i]);
                if (pos < -kGapSlack || pos > net.lanes[lane].length + kGapSlack)
                    throw SimulationError("vehicle outside lane bounds on " + net.lanes[lane].id);
                if (i > 0 && occ_tail(occ[i - 1]) - pos < -1e-6)
                    throw SimulationError("overlap on lane " + net.lanes[lane].id + " at step " +
                                          std::to_string(w.step_count));
            }
        }
        if (w.injected_count != w.active_count() + w.arrived_count ||
            w.injected_count + w.pending.size() != w.vehicles.size())
            throw SimulationError("conservation violated at step " + std::to_string(w.step_count));
    }
};

}  // namespace

World make_world(const CompiledNetwork& net, const std::vector<demand::Flow>& flows,
                 const EngineConfig& config) {
    if (!(config.dt > 0.0)) throw SimulationError("dt must be > 0");
    if (config.horizon < config.dt) throw SimulationError("horizon must be >= dt");
    if (config.worker_count < 1) throw SimulationError("worker_count must be >= 1");

    World w;
    w.net = &net;
    w.config = config;
    w.rng = util::CounterRng(config.seed);
    w.lane_occupants.resize(net.lanes.size());

    w.phase_index.assign(net.nodes.size(), 0);
    w.phase_elapsed.assign(net.nodes.size(), 0.0);
    for (std::uint32_t n = 0; n < net.nodes.size(); ++n) {
        const auto& node = net.nodes[n];
        if (node.phase_durations.empty()) continue;
        double cycle = 0.0;
        for (double d : node.phase_durations) cycle += d;
        double at = std::fmod(node.offset, cycle);
        std::uint32_t phase = 0;
        while (at >= node.phase_durations[phase]) {
            at -= node.phase_durations[phase];
            phase = static_cast<std::uint32_t>((phase + 1) % node.phase_durations.size());
        }
        w.phase_index[n] = phase;
        w.phase_elapsed[n] = at;
    }

    w.vehicles.reserve(flows.size());
    for (std::size_t i = 0; i < flows.size(); ++i) {
        const auto& f = flows[i];
        if (f.depart_time < 0.0) throw SimulationError("flow " + f.id + " departs before t=0");
        if (f.route.empty()) throw SimulationError("flow " + f.id + " has an empty route");
        Vehicle v;
        v.id = f.id;
        v.profile = f.profile;
        for (const auto& road : f.route) {
            auto it = net.road_index.find(road);
            if (it == net.road_index.end())
                throw SimulationError("flow " + f.id + " references missing road " + road);
            v.route.push_back(it->second);
        }
        for (std::size_t k = 0; k + 1 < v.route.size(); ++k) {
            const auto& road = net.roads[v.route[k]];
            bool connected = false;
            for (int l = 0; l < road.lane_count && !connected; ++l)
                connected = net.out_for(road.first_lane + l, v.route[k + 1]) != nullptr;
            if (!connected)
                throw SimulationError("flow " + f.id + " has a disconnected route at " + road.id);
        }
        v.priority = config.dialect == Dialect::A
                         ? w.rng.bits(0, static_cast<std::uint64_t>(i), util::kPurposePriority)
                         : static_cast<std::uint64_t>(i);
        w.vehicles.push_back(std::move(v));
    }
    for (std::uint32_t i = 0; i < w.vehicles.size(); ++i)
        w.pending.push_back({i, flows[i].depart_time, static_cast<std::uint64_t>(i)});
    std::stable_sort(w.pending.begin(), w.pending.end(), [](const PendingFlow& a, const PendingFlow& b) {
        if (a.depart != b.depart) return a.depart < b.depart;
        return a.order < b.order;
    });
    return w;
}

void advance_signals(World& w, double dt) {
    const auto& net = *w.net;
    for (std::uint32_t n = 0; n < net.nodes.size(); ++n) {
        const auto& durations = net.nodes[n].phase_durations;
        if (durations.empty()) continue;
        double elapsed = w.phase_elapsed[n] + dt;
        std::uint32_t phase = w.phase_index[n];
        while (elapsed >= durations[phase]) {
            elapsed -= durations[phase];
            phase = static_cast<std::uint32_t>((phase + 1) % durations.size());
        }
        w.phase_index[n] = phase;
        w.phase_elapsed[n] = elapsed;
    }
}

void inject_vehicles(World& w) {
    const auto& net = *w.net;
    std::vector<std::size_t> due;
    for (std::size_t i = 0; i < w.pending.size(); ++i)
        if (w.pending[i].depart <= w.clock) due.push_back(i);
    std::sort(due.begin(), due.end(), [&](std::size_t a, std::size_t b) {
        const auto& fa = w.pending[a];
        const auto& fb = w.pending[b];
        if (fa.depart != fb.depart) return fa.depart < fb.depart;
        const auto pa = w.vehicles[fa.vehicle].priority;
        const auto pb = w.vehicles[fb.vehicle].priority;
        if (pa != pb) return pa < pb;
        return fa.order < fb.order;
    });

    std::vector<std::size_t> inserted;
    for (std::size_t idx : due) {
        const std::uint32_t vi = w.pending[idx].vehicle;
        Vehicle& v = w.vehicles[vi];
        const auto& road = net.roads[v.route[0]];
        std::vector<std::uint32_t> lanes;
        for (int l = 0; l < road.lane_count; ++l) lanes.push_back(road.first_lane + l);
        if (v.route.size() > 1) {
            // lanes that serve the next route road first, then by index
            std::stable_sort(lanes.begin(), lanes.end(), [&](std::uint32_t a, std::uint32_t b) {
                const bool sa = net.out_for(a, v.route[1]) != nullptr;
                const bool sb = net.out_for(b, v.route[1]) != nullptr;
                return sa > sb;
            });
        }
        for (std::uint32_t lane : lanes) {
            auto& occ = w.lane_occupants[lane];
            const double entry_front = v.profile.vehicle_length;
            double headroom = behavior::kInfiniteGap;
            if (!occ.empty()) headroom = w.vehicles[occ.back().vehicle].tail();
            if (headroom < entry_front + v.profile.aggressiveness.min_gap) continue;

            behavior::FollowerContext ctx;
            ctx.dt = w.config.dt;
            ctx.profile = &v.profile;
            ctx.desired_speed = std::min(net.lanes[lane].speed_limit,
                                         net.lanes[lane].speed_limit * v.profile.desired_speed_factor);
            // the envelope must hold at the speed we insert with; evaluating
            // it at the candidate speed is conservative (the safe speed only
            // shrinks as own speed grows)
            ctx.own_speed = ctx.desired_speed;
            if (!occ.empty()) {
                ctx.gap = headroom - entry_front;
                ctx.lead_speed = w.vehicles[occ.back().vehicle].speed;
                ctx.lead_moves_concurrently = false;
            }
            v.lane = lane;
            v.position = entry_front;
            v.speed = behavior::safety_clip(ctx.desired_speed, ctx);
            v.accel = 0.0;
            v.depart = w.clock;
            v.travel_time = 0.0;
            v.waiting_time = 0.0;
            v.route_pos = 0;
            v.active = true;
            v.moved_stamp = w.step_count;
            occ.push_back({vi, false});
            ++w.injected_count;
            inserted.push_back(idx);
            break;
        }
    }
    std::sort(inserted.begin(), inserted.end(), std::greater<>());
    for (std::size_t idx : inserted) w.pending.erase(w.pending.begin() + static_cast<std::ptrdiff_t>(idx));
}

void step(World& w, util::ThreadPool& pool) { Stepper(w, pool).run_step(); }

RunResult run_compiled(const CompiledNetwork& net, const std::vector<demand::Flow>& flows,
                       const EngineConfig& config) {
    const auto t0 = std::chrono::steady_clock::now();
    World w = make_world(net, flows, config);
    util::ThreadPool pool(config.dialect == Dialect::A ? config.worker_count : 1);

    RunResult result;
    inject_vehicles(w);  // flows due at t = 0
    const auto steps = static_cast<std::size_t>(std::ceil(config.horizon / config.dt - 1e-12));
    result.observations.reserve(steps);
    for (std::size_t s = 0; s < steps; ++s) {
        step(w, pool);
        result.observations.push_back(metrics::observe_step(w));
    }

    RunSummary& summary = result.summary;
    summary.steps = steps;
    summary.injected = w.injected_count;
    summary.arrived = w.arrived_count;
    summary.still_active = w.active_count();
    summary.still_pending = w.pending.size();
    double total_tt = 0.0;
    std::size_t arrived = 0;
    for (const auto& v : w.vehicles) {
        if (v.arrive >= 0.0) {
            total_tt += v.arrive - v.depart;
            ++arrived;
        }
    }
    summary.mean_travel_time = arrived > 0 ? total_tt / static_cast<double>(arrived) : 0.0;
    summary.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

RunResult run(const net::RoadNetwork& net, const std::vector<demand::Flow>& flows,
              const EngineConfig& config) {
    const CompiledNetwork compiled = CompiledNetwork::compile(net);
    return run_compiled(compiled, flows, config);
}

}  // namespace twinflow::engine
