#pragma once

#include <memory>

#include "twinflow/engine/world.hpp"
#include "twinflow/metrics/observation.hpp"
#include "twinflow/util/thread_pool.hpp"

namespace twinflow::engine {

struct RunSummary {
    std::size_t steps = 0;
    std::size_t injected = 0;
    std::size_t arrived = 0;
    std::size_t still_active = 0;
    std::size_t still_pending = 0;
    double mean_travel_time = 0.0;  // s, over arrived vehicles
    double wall_seconds = 0.0;

    friend bool operator==(const RunSummary&, const RunSummary&) = default;
};

struct RunResult {
    metrics::ObservationStream observations;
    RunSummary summary;
};

/// Builds the initial world: compiles flows onto the network, seeds the
/// draw stream, initializes signal phases at the program offsets. Flows
/// need not be sorted; routes must be connected.
World make_world(const CompiledNetwork& net, const std::vector<demand::Flow>& flows,
                 const EngineConfig& config);

/// Advances every fixed-time program by dt and re-derives phase indices.
void advance_signals(World& world, double dt);

/// Inserts every pending flow with depart <= clock whose entry lane has
/// headway room; blocked insertions stay pending. Ties on one lane resolve
/// by seeded priority draw (dialect A) or flow order (dialect B).
void inject_vehicles(World& world);

/// One full step of the configured dialect. Internal invariant violations
/// throw SimulationError rather than continuing.
void step(World& world, util::ThreadPool& pool);

/// Executes ceil(horizon/dt) steps, emitting one StepObservation per step.
RunResult run(const net::RoadNetwork& net, const std::vector<demand::Flow>& flows,
              const EngineConfig& config);

/// run() against an already-compiled network (the experiment runner reuses
/// compilations across cells).
RunResult run_compiled(const CompiledNetwork& net, const std::vector<demand::Flow>& flows,
                       const EngineConfig& config);

}  // namespace twinflow::engine

namespace twinflow::metrics {
/// Snapshot of the world as the per-step record; queued iff speed < 0.1 m/s
/// (strict). Shadows count toward lane totals only.
StepObservation observe_step(const engine::World& world);
}  // namespace twinflow::metrics
