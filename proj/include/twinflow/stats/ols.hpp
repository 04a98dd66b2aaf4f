#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "twinflow/stats/special.hpp"

namespace twinflow::stats {

struct RegressionModel {
    std::vector<std::string> terms;
    Eigen::VectorXd coefficients;
    Eigen::VectorXd std_errors;  // NaN when rank-deficient
    Eigen::VectorXd t_values;
    Eigen::VectorXd p_values;  // two-sided
    double r_squared = 0.0;
    double sigma2 = 0.0;
    Eigen::Index rank = 0;
    bool rank_deficient = false;
    std::size_t n = 0;
    std::size_t residual_df = 0;
};

/// Least squares with coefficient inference. Rank-deficient designs are fit
/// by the minimum-norm solution and flagged; standard errors and p-values
/// are then NaN.
RegressionModel ols_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                        std::vector<std::string> terms = {});

}  // namespace twinflow::stats
