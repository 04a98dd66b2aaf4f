#pragma once

#include <cstddef>
#include <span>

#include "twinflow/stats/special.hpp"

namespace twinflow::stats {

enum class Tail { two_sided, greater };

struct TTestResult {
    double t = 0.0;
    double p = 1.0;
    std::size_t df = 0;
    double mean = 0.0;
    double sd = 0.0;
};

/// One-sample t-test of mean == mu0. Requires n >= 2 and positive sample
/// variance; a zero-variance sample raises StatsError rather than passing
/// silently.
TTestResult one_sample_t(std::span<const double> samples, double mu0, Tail tail = Tail::two_sided);

}  // namespace twinflow::stats
