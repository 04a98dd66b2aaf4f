#pragma once

#include <stdexcept>
#include <string>

#include "twinflow/metrics/observation.hpp"

namespace twinflow::metrics {

class MetricsError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Aggregation order for the RMSEs: per-timestep RMSE then mean over
/// timesteps (the default), or one global RMSE over all entity-steps
/// (kept behind this flag for sensitivity analysis).
enum class RmseAggregation { per_timestep_mean, global };

struct RmseReport {
    double travel_time = 0.0;   // s
    double waiting_time = 0.0;  // s
    double lane_count = 0.0;    // veh
    double queued_count = 0.0;  // veh
    double speed = 0.0;         // m/s
    double accel = 0.0;         // m/s^2
    /// matched vehicle-steps / union vehicle-steps
    double vehicle_coverage = 0.0;
};

struct KlReport {
    double count = 0.0;   // nats
    double queued = 0.0;  // nats
};

/// Point-to-point differences between two paired runs. Vehicles align by id
/// on the timesteps where both runs have them active; lanes align by the
/// shared network lane order. Throws MetricsError when the streams disagree
/// on horizon or lane set, or when no vehicle is ever matched.
RmseReport rmse_report(const ObservationStream& run_a, const ObservationStream& run_b,
                       RmseAggregation aggregation = RmseAggregation::per_timestep_mean);

/// Mean per-timestep KL divergence KL(A || B) of the epsilon-smoothed,
/// normalized per-lane count distributions, in nats. Timesteps where both
/// runs are empty contribute 0.
KlReport kl_report(const ObservationStream& run_a, const ObservationStream& run_b,
                   double epsilon = 1e-6);

/// The paper-style eight-measure comparison of one paired run.
struct EquivalenceReport {
    double rmse_travel_time = 0.0;
    double rmse_waiting_time = 0.0;
    double rmse_lane_count = 0.0;
    double rmse_queued_count = 0.0;
    double rmse_speed = 0.0;
    double rmse_accel = 0.0;
    double kl_count = 0.0;
    double kl_queued = 0.0;
    double vehicle_coverage = 0.0;

    double measure(std::size_t index) const;
    static const char* measure_name(std::size_t index);
    static constexpr std::size_t kMeasureCount = 8;
};

EquivalenceReport equivalence_report(const ObservationStream& run_a, const ObservationStream& run_b,
                                     double kl_epsilon = 1e-6,
                                     RmseAggregation aggregation = RmseAggregation::per_timestep_mean);

struct ReportMetadata {
    std::string scenario;
    std::string dialect_a;
    std::string dialect_b;
    std::uint64_t seed = 0;
};

/// Bit-exact field order: the eight measures, coverage, then metadata.
std::string report_csv_header();
std::string report_csv_row(const EquivalenceReport& report, const ReportMetadata& meta);
std::string report_json(const EquivalenceReport& report, const ReportMetadata& meta);

}  // namespace twinflow::metrics
