#include "twinflow/stats/design.hpp"

#include <algorithm>

#include "twinflow/demand/profile.hpp"

namespace twinflow::stats {

FactorSpace FactorSpace::canonical(std::vector<std::string> networks) {
    FactorSpace space;
    for (const auto m : demand::all_car_following_models()) space.models.push_back(demand::to_string(m));
    space.aggressiveness = demand::aggressiveness_labels();
    space.networks = std::move(networks);
    return space;
}

namespace {

std::size_t level_index(const std::vector<std::string>& levels, const std::string& value,
                        const char* factor) {
    const auto it = std::find(levels.begin(), levels.end(), value);
    if (it == levels.end())
        throw StatsError(std::string("unknown ") + factor + " level: " + value);
    return static_cast<std::size_t>(it - levels.begin());
}

}  // namespace

DesignMatrix build_design_matrix(const std::vector<FactorLevels>& cells, const FactorSpace& space,
                                 DesignMode mode) {
    if (cells.empty()) throw StatsError("build_design_matrix requires a non-empty cell list");
    const auto& C = space.models;
    const auto& A = space.aggressiveness;
    const auto& R = space.networks;
    if (C.empty() || A.empty() || R.empty()) throw StatsError("factor space has an empty level set");

    // first level is the reference in inference mode
    const std::size_t c0 = mode == DesignMode::inference ? 1 : 0;
    const std::size_t a0 = c0;
    const std::size_t r0 = c0;

    DesignMatrix out;
    auto& labels = out.labels;
    if (mode == DesignMode::inference) labels.push_back("(intercept)");
    for (std::size_t i = c0; i < C.size(); ++i) labels.push_back("C[" + C[i] + "]");
    for (std::size_t i = a0; i < A.size(); ++i) labels.push_back("A[" + A[i] + "]");
    labels.push_back("L");
    labels.push_back("L^2");
    for (std::size_t i = r0; i < R.size(); ++i) labels.push_back("R[" + R[i] + "]");
    for (std::size_t i = c0; i < C.size(); ++i)
        for (std::size_t j = r0; j < R.size(); ++j) labels.push_back("C[" + C[i] + "]:R[" + R[j] + "]");
    for (std::size_t i = a0; i < A.size(); ++i)
        for (std::size_t j = r0; j < R.size(); ++j) labels.push_back("A[" + A[i] + "]:R[" + R[j] + "]");
    for (std::size_t j = r0; j < R.size(); ++j) labels.push_back("L:R[" + R[j] + "]");
    for (std::size_t i = c0; i < C.size(); ++i)
        for (std::size_t j = a0; j < A.size(); ++j) labels.push_back("C[" + C[i] + "]:A[" + A[j] + "]");
    for (std::size_t i = c0; i < C.size(); ++i) labels.push_back("C[" + C[i] + "]:L");
    for (std::size_t i = a0; i < A.size(); ++i) labels.push_back("A[" + A[i] + "]:L");

    out.X = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(cells.size()),
                                  static_cast<Eigen::Index>(labels.size()));
    for (std::size_t row = 0; row < cells.size(); ++row) {
        const auto& cell = cells[row];
        const std::size_t ci = level_index(C, cell.model, "car-following model");
        const std::size_t ai = level_index(A, cell.aggressiveness, "aggressiveness");
        const std::size_t ri = level_index(R, cell.network, "network");
        const double L = cell.gap_tolerance;
        const auto r = static_cast<Eigen::Index>(row);

        Eigen::Index col = 0;
        auto put = [&](bool on, double value = 1.0) {
            if (on) out.X(r, col) = value;
            ++col;
        };
        if (mode == DesignMode::inference) put(true);
        for (std::size_t i = c0; i < C.size(); ++i) put(i == ci);
        for (std::size_t i = a0; i < A.size(); ++i) put(i == ai);
        put(true, L);
        put(true, L * L);
        for (std::size_t i = r0; i < R.size(); ++i) put(i == ri);
        for (std::size_t i = c0; i < C.size(); ++i)
            for (std::size_t j = r0; j < R.size(); ++j) put(i == ci && j == ri);
        for (std::size_t i = a0; i < A.size(); ++i)
            for (std::size_t j = r0; j < R.size(); ++j) put(i == ai && j == ri);
        for (std::size_t j = r0; j < R.size(); ++j) put(j == ri, L);
        for (std::size_t i = c0; i < C.size(); ++i)
            for (std::size_t j = a0; j < A.size(); ++j) put(i == ci && j == ai);
        for (std::size_t i = c0; i < C.size(); ++i) put(i == ci, L);
        for (std::size_t i = a0; i < A.size(); ++i) put(i == ai, L);
    }
    return out;
}

}  // namespace twinflow::stats
