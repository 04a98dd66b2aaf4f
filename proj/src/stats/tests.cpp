#include "twinflow/stats/tests.hpp"

#include <cmath>

namespace twinflow::stats {

TTestResult one_sample_t(std::span<const double> samples, double mu0, Tail tail) {
    const std::size_t n = samples.size();
    if (n < 2) throw StatsError("one_sample_t requires n >= 2");
    double mean = 0.0;
    for (double x : samples) mean += x;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double x : samples) ss += (x - mean) * (x - mean);
    const double var = ss / static_cast<double>(n - 1);
    if (!(var > 0.0)) throw StatsError("degenerate sample: variance is zero");

    TTestResult result;
    result.df = n - 1;
    result.mean = mean;
    result.sd = std::sqrt(var);
    result.t = (mean - mu0) / (result.sd / std::sqrt(static_cast<double>(n)));
    const double df = static_cast<double>(result.df);
    if (tail == Tail::two_sided) {
        result.p = 2.0 * (1.0 - t_cdf(std::abs(result.t), df));
    } else {
        result.p = 1.0 - t_cdf(result.t, df);
    }
    return result;
}

}  // namespace twinflow::stats
