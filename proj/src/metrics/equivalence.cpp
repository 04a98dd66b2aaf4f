#include "twinflow/metrics/equivalence.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "twinflow/simd/kernels.hpp"
#include "twinflow/util/text.hpp"

namespace twinflow::metrics {

namespace {

void check_compatible(const ObservationStream& a, const ObservationStream& b) {
    if (a.size() != b.size())
        throw MetricsError("streams cover different horizons: " + std::to_string(a.size()) + " vs " +
                           std::to_string(b.size()) + " steps");
    if (a.empty()) return;
    const auto& la = a.front().lanes;
    const auto& lb = b.front().lanes;
    if (la.size() != lb.size()) throw MetricsError("streams cover different networks (lane counts differ)");
    for (std::size_t i = 0; i < la.size(); ++i)
        if (la[i].id != lb[i].id) throw MetricsError("streams cover different networks (lane ids differ)");
}

/// Vehicle records of one step sorted by id, as indices.
std::vector<std::size_t> sorted_by_id(const StepObservation& step) {
    std::vector<std::size_t> idx(step.vehicles.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) {
        return step.vehicles[x].id < step.vehicles[y].id;
    });
    return idx;
}

struct MatchedArrays {
    std::vector<double> a_travel, b_travel;
    std::vector<double> a_waiting, b_waiting;
    std::vector<double> a_speed, b_speed;
    std::vector<double> a_accel, b_accel;

    void clear() {
        a_travel.clear(); b_travel.clear();
        a_waiting.clear(); b_waiting.clear();
        a_speed.clear(); b_speed.clear();
        a_accel.clear(); b_accel.clear();
    }
    std::size_t size() const { return a_travel.size(); }
};

/// id-merge-join of one step's vehicle records.
std::size_t gather_matched(const StepObservation& sa, const StepObservation& sb, MatchedArrays& out) {
    out.clear();
    const auto ia = sorted_by_id(sa);
    const auto ib = sorted_by_id(sb);
    std::size_t x = 0, y = 0;
    while (x < ia.size() && y < ib.size()) {
        const auto& va = sa.vehicles[ia[x]];
        const auto& vb = sb.vehicles[ib[y]];
        if (va.id < vb.id) {
            ++x;
        } else if (vb.id < va.id) {
            ++y;
        } else {
            out.a_travel.push_back(va.travel_time);
            out.b_travel.push_back(vb.travel_time);
            out.a_waiting.push_back(va.waiting_time);
            out.b_waiting.push_back(vb.waiting_time);
            out.a_speed.push_back(va.speed);
            out.b_speed.push_back(vb.speed);
            out.a_accel.push_back(va.accel);
            out.b_accel.push_back(vb.accel);
            ++x;
            ++y;
        }
    }
    return ia.size() + ib.size() - out.size();  // union count
}

}  // namespace

RmseReport rmse_report(const ObservationStream& run_a, const ObservationStream& run_b,
                       RmseAggregation aggregation) {
    check_compatible(run_a, run_b);
    RmseReport report;
    MatchedArrays m;

    // vehicle-matched measures
    double sum_travel = 0.0, sum_waiting = 0.0, sum_speed = 0.0, sum_accel = 0.0;
    std::size_t matched_steps = 0;
    std::size_t matched_total = 0, union_total = 0;
    std::vector<double> lane_a, lane_b, queued_a, queued_b;
    double sum_lane = 0.0, sum_queued = 0.0;
    std::size_t lane_steps = 0;

    for (std::size_t t = 0; t < run_a.size(); ++t) {
        const std::size_t union_count = gather_matched(run_a[t], run_b[t], m);
        union_total += union_count;
        matched_total += m.size();
        if (m.size() > 0) {
            const auto n = static_cast<double>(m.size());
            const double sq_travel = simd::sum_squared_diff(m.a_travel, m.b_travel);
            const double sq_waiting = simd::sum_squared_diff(m.a_waiting, m.b_waiting);
            const double sq_speed = simd::sum_squared_diff(m.a_speed, m.b_speed);
            const double sq_accel = simd::sum_squared_diff(m.a_accel, m.b_accel);
            if (aggregation == RmseAggregation::per_timestep_mean) {
                sum_travel += std::sqrt(sq_travel / n);
                sum_waiting += std::sqrt(sq_waiting / n);
                sum_speed += std::sqrt(sq_speed / n);
                sum_accel += std::sqrt(sq_accel / n);
                ++matched_steps;
            } else {
                sum_travel += sq_travel;
                sum_waiting += sq_waiting;
                sum_speed += sq_speed;
                sum_accel += sq_accel;
            }
        }

        // lane-matched measures
        const auto& la = run_a[t].lanes;
        const auto& lb = run_b[t].lanes;
        if (!la.empty()) {
            lane_a.resize(la.size());
            lane_b.resize(la.size());
            queued_a.resize(la.size());
            queued_b.resize(la.size());
            for (std::size_t i = 0; i < la.size(); ++i) {
                lane_a[i] = la[i].count;
                lane_b[i] = lb[i].count;
                queued_a[i] = la[i].queued;
                queued_b[i] = lb[i].queued;
            }
            const auto n = static_cast<double>(la.size());
            const double sq_lane = simd::sum_squared_diff(lane_a, lane_b);
            const double sq_queued = simd::sum_squared_diff(queued_a, queued_b);
            if (aggregation == RmseAggregation::per_timestep_mean) {
                sum_lane += std::sqrt(sq_lane / n);
                sum_queued += std::sqrt(sq_queued / n);
                ++lane_steps;
            } else {
                sum_lane += sq_lane;
                sum_queued += sq_queued;
            }
        }
    }

    if (matched_total == 0) throw MetricsError("no-overlap: no vehicle id is ever active in both runs");

    if (aggregation == RmseAggregation::per_timestep_mean) {
        const auto vsteps = static_cast<double>(std::max<std::size_t>(matched_steps, 1));
        report.travel_time = sum_travel / vsteps;
        report.waiting_time = sum_waiting / vsteps;
        report.speed = sum_speed / vsteps;
        report.accel = sum_accel / vsteps;
        const auto lsteps = static_cast<double>(std::max<std::size_t>(lane_steps, 1));
        report.lane_count = sum_lane / lsteps;
        report.queued_count = sum_queued / lsteps;
    } else {
        const auto mt = static_cast<double>(matched_total);
        report.travel_time = std::sqrt(sum_travel / mt);
        report.waiting_time = std::sqrt(sum_waiting / mt);
        report.speed = std::sqrt(sum_speed / mt);
        report.accel = std::sqrt(sum_accel / mt);
        double lane_total = 0.0;
        for (const auto& step : run_a) lane_total += static_cast<double>(step.lanes.size());
        lane_total = std::max(lane_total, 1.0);
        report.lane_count = std::sqrt(sum_lane / lane_total);
        report.queued_count = std::sqrt(sum_queued / lane_total);
    }
    report.vehicle_coverage =
        union_total > 0 ? static_cast<double>(matched_total) / static_cast<double>(union_total) : 1.0;
    return report;
}

KlReport kl_report(const ObservationStream& run_a, const ObservationStream& run_b, double epsilon) {
    if (!(epsilon > 0.0)) throw MetricsError("kl_report: epsilon must be > 0");
    check_compatible(run_a, run_b);
    KlReport report;
    if (run_a.empty()) return report;

    std::vector<double> ca, cb, pa, pb;
    double sum_count = 0.0, sum_queued = 0.0;

    auto kl_term = [&](const std::vector<double>& raw_a, const std::vector<double>& raw_b) {
        const double total_a = std::accumulate(raw_a.begin(), raw_a.end(), 0.0);
        const double total_b = std::accumulate(raw_b.begin(), raw_b.end(), 0.0);
        if (total_a == 0.0 && total_b == 0.0) return 0.0;  // both empty
        const auto n = static_cast<double>(raw_a.size());
        pa.resize(raw_a.size());
        pb.resize(raw_b.size());
        simd::shift_scale(raw_a, epsilon, 1.0 / (total_a + epsilon * n), pa);
        simd::shift_scale(raw_b, epsilon, 1.0 / (total_b + epsilon * n), pb);
        double kl = 0.0;
        for (std::size_t i = 0; i < pa.size(); ++i) kl += pa[i] * std::log(pa[i] / pb[i]);
        return kl;
    };

    for (std::size_t t = 0; t < run_a.size(); ++t) {
        const auto& la = run_a[t].lanes;
        const auto& lb = run_b[t].lanes;
        ca.resize(la.size());
        cb.resize(la.size());
        for (std::size_t i = 0; i < la.size(); ++i) {
            ca[i] = la[i].count;
            cb[i] = lb[i].count;
        }
        sum_count += kl_term(ca, cb);
        for (std::size_t i = 0; i < la.size(); ++i) {
            ca[i] = la[i].queued;
            cb[i] = lb[i].queued;
        }
        sum_queued += kl_term(ca, cb);
    }
    const auto steps = static_cast<double>(run_a.size());
    report.count = sum_count / steps;
    report.queued = sum_queued / steps;
    return report;
}

double EquivalenceReport::measure(std::size_t index) const {
    switch (index) {
        case 0: return rmse_travel_time;
        case 1: return rmse_waiting_time;
        case 2: return rmse_lane_count;
        case 3: return rmse_queued_count;
        case 4: return rmse_speed;
        case 5: return rmse_accel;
        case 6: return kl_count;
        case 7: return kl_queued;
    }
    throw MetricsError("measure index out of range");
}

const char* EquivalenceReport::measure_name(std::size_t index) {
    static const char* names[] = {"rmse_travel_time", "rmse_waiting_time", "rmse_lane_count",
                                  "rmse_queued_count", "rmse_speed",       "rmse_accel",
                                  "kl_count",          "kl_queued"};
    if (index >= kMeasureCount) throw MetricsError("measure index out of range");
    return names[index];
}

EquivalenceReport equivalence_report(const ObservationStream& run_a, const ObservationStream& run_b,
                                     double kl_epsilon, RmseAggregation aggregation) {
    const RmseReport r = rmse_report(run_a, run_b, aggregation);
    const KlReport k = kl_report(run_a, run_b, kl_epsilon);
    EquivalenceReport report;
    report.rmse_travel_time = r.travel_time;
    report.rmse_waiting_time = r.waiting_time;
    report.rmse_lane_count = r.lane_count;
    report.rmse_queued_count = r.queued_count;
    report.rmse_speed = r.speed;
    report.rmse_accel = r.accel;
    report.kl_count = k.count;
    report.kl_queued = k.queued;
    report.vehicle_coverage = r.vehicle_coverage;
    return report;
}

std::string report_csv_header() {
    return "rmse_travel_time,rmse_waiting_time,rmse_lane_count,rmse_queued_count,rmse_speed,"
           "rmse_accel,kl_count,kl_queued,vehicle_coverage,scenario,dialect_a,dialect_b,seed";
}

std::string report_csv_row(const EquivalenceReport& report, const ReportMetadata& meta) {
    std::string row;
    for (std::size_t i = 0; i < EquivalenceReport::kMeasureCount; ++i) {
        row += util::format_double(report.measure(i));
        row += ',';
    }
    row += util::format_double(report.vehicle_coverage);
    row += ',';
    row += util::csv_escape(meta.scenario);
    row += ',';
    row += util::csv_escape(meta.dialect_a);
    row += ',';
    row += util::csv_escape(meta.dialect_b);
    row += ',';
    row += std::to_string(meta.seed);
    return row;
}

std::string report_json(const EquivalenceReport& report, const ReportMetadata& meta) {
    nlohmann::json j;
    for (std::size_t i = 0; i < EquivalenceReport::kMeasureCount; ++i)
        j[EquivalenceReport::measure_name(i)] = report.measure(i);
    j["vehicle_coverage"] = report.vehicle_coverage;
    j["scenario"] = meta.scenario;
    j["dialect_a"] = meta.dialect_a;
    j["dialect_b"] = meta.dialect_b;
    j["seed"] = meta.seed;
    return j.dump(2) + "\n";
}

}  // namespace twinflow::metrics
