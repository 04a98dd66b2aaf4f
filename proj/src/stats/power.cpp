#include "twinflow/stats/power.hpp"

namespace twinflow::stats {

double f_test_power(double effect_f2, double alpha, std::size_t tested_predictors,
                    std::size_t total_predictors, std::size_t n) {
    if (!(effect_f2 > 0.0)) throw StatsError("power: effect_f2 must be > 0");
    if (!(alpha > 0.0 && alpha < 1.0)) throw StatsError("power: alpha must be in (0, 1)");
    if (tested_predictors == 0) throw StatsError("power: tested_predictors must be >= 1");
    if (n < total_predictors + 2) return 0.0;
    const auto d1 = static_cast<double>(tested_predictors);
    const auto d2 = static_cast<double>(n - total_predictors - 1);
    const double f_crit = f_quantile(1.0 - alpha, d1, d2);
    const double lambda = effect_f2 * static_cast<double>(n);
    return 1.0 - noncentral_f_cdf(f_crit, d1, d2, lambda);
}

std::size_t power_sample_size(double effect_f2, double alpha, double power,
                              std::size_t tested_predictors, std::size_t total_predictors,
                              std::size_t cap) {
    if (!(power > 0.0 && power < 1.0)) throw StatsError("power: target power must be in (0, 1)");
    std::size_t lo = total_predictors + 2;
    std::size_t hi = lo;
    while (f_test_power(effect_f2, alpha, tested_predictors, total_predictors, hi) < power) {
        if (hi >= cap) throw StatsError("power_sample_size did not converge below the cap");
        hi = std::min(cap, hi * 2);
    }
    while (lo < hi) {
        const std::size_t mid = lo + (hi - lo) / 2;
        if (f_test_power(effect_f2, alpha, tested_predictors, total_predictors, mid) < power) {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    return lo;
}

std::size_t replications_per_cell(std::size_t n, std::size_t cells) {
    if (cells < 1) throw StatsError("replications_per_cell: cells must be >= 1");
    return (n + cells - 1) / cells;
}

}  // namespace twinflow::stats
