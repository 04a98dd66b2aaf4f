#pragma once

#include <cstddef>

#include "twinflow/stats/special.hpp"

namespace twinflow::stats {

/// Achieved power of the fixed-model R^2-increase F test at sample size N:
/// numerator df = tested_predictors, denominator df = N - total_predictors
/// - 1, noncentrality lambda = f2 * N.
double f_test_power(double effect_f2, double alpha, std::size_t tested_predictors,
                    std::size_t total_predictors, std::size_t n);

/// Smallest N reaching the target power; throws StatsError past `cap`.
std::size_t power_sample_size(double effect_f2, double alpha, double power,
                              std::size_t tested_predictors, std::size_t total_predictors,
                              std::size_t cap = 10'000'000);

/// ceil(N / cells)
std::size_t replications_per_cell(std::size_t n, std::size_t cells);

}  // namespace twinflow::stats
