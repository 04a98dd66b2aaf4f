#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "twinflow/stats/special.hpp"

namespace twinflow::stats {

/// One experiment cell's factor levels: car-following model C, aggressiveness
/// A, gap tolerance L (numeric), road network R.
struct FactorLevels {
    std::string model;
    std::string aggressiveness;
    double gap_tolerance = 1.0;
    std::string network;
};

/// The declared level sets, in column order. The canonical experiment uses
/// 5 models x 6 aggressiveness types x 5 tolerances x 2 networks.
struct FactorSpace {
    std::vector<std::string> models;
    std::vector<std::string> aggressiveness;
    std::vector<std::string> networks;

    static FactorSpace canonical(std::vector<std::string> networks);
};

/// paper: the full second-order enumeration with one-hot main effects
/// (rank-deficient by construction, 80 columns for 5x6x5x2); inference:
/// reference-coded full-rank columns plus an intercept.
enum class DesignMode { paper, inference };

struct DesignMatrix {
    Eigen::MatrixXd X;
    std::vector<std::string> labels;
};

/// Term order: C, A, L, L^2, R, C.R, A.R, L.R, C.A, C.L, A.L. Throws
/// StatsError on a level missing from the factor space.
DesignMatrix build_design_matrix(const std::vector<FactorLevels>& cells, const FactorSpace& space,
                                 DesignMode mode);

}  // namespace twinflow::stats
