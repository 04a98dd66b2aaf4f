#include "twinflow/stats/ols.hpp"

#include <cmath>
#include <limits>

namespace twinflow::stats {

RegressionModel ols_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                        std::vector<std::string> terms) {
    if (X.rows() != y.size()) throw StatsError("ols_fit: dimension mismatch between X and y");
    if (X.rows() == 0 || X.cols() == 0) throw StatsError("ols_fit: empty design");
    if (!terms.empty() && static_cast<Eigen::Index>(terms.size()) != X.cols())
        throw StatsError("ols_fit: dimension mismatch between labels and X");

    RegressionModel model;
    model.terms = std::move(terms);
    model.n = static_cast<std::size_t>(X.rows());

    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(X);
    model.rank = cod.rank();
    model.rank_deficient = model.rank < X.cols();
    model.coefficients = cod.solve(y);

    const Eigen::VectorXd residuals = y - X * model.coefficients;
    const double ssr = residuals.squaredNorm();
    const double mean_y = y.mean();
    const double sst = (y.array() - mean_y).square().sum();
    model.r_squared = sst > 0.0 ? 1.0 - ssr / sst : 1.0;

    const auto p = X.cols();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    model.std_errors = Eigen::VectorXd::Constant(p, nan);
    model.t_values = Eigen::VectorXd::Constant(p, nan);
    model.p_values = Eigen::VectorXd::Constant(p, nan);
    model.residual_df = X.rows() > model.rank ? static_cast<std::size_t>(X.rows() - model.rank) : 0;

    if (!model.rank_deficient && X.rows() > p) {
        const auto df = static_cast<double>(X.rows() - p);
        model.sigma2 = ssr / df;
        const Eigen::MatrixXd pinv = cod.pseudoInverse();
        for (Eigen::Index j = 0; j < p; ++j) {
            const double var_j = model.sigma2 * pinv.row(j).squaredNorm();
            model.std_errors[j] = std::sqrt(var_j);
            if (model.std_errors[j] > 0.0) {
                model.t_values[j] = model.coefficients[j] / model.std_errors[j];
                model.p_values[j] = 2.0 * (1.0 - t_cdf(std::abs(model.t_values[j]), df));
            }
        }
    }
    return model;
}

}  // namespace twinflow::stats
