#include "twinflow/stats/special.hpp"

#include <algorithm>
#include <cmath>

namespace twinflow::stats {

namespace {

/// Continued fraction for the incomplete beta (modified Lentz).
double betacf(double a, double b, double x) {
    constexpr int kMaxIterations = 500;
    constexpr double kEps = 3e-16;
    constexpr double kTiny = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIterations; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) return h;
    }
    throw StatsError("incomplete beta continued fraction did not converge");
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0)) throw StatsError("incomplete beta requires a, b > 0");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double log_bt =
        std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
    const double bt = std::exp(log_bt);
    if (x < (a + 1.0) / (a + b + 2.0)) return bt * betacf(a, b, x) / a;
    return 1.0 - bt * betacf(b, a, 1.0 - x) / b;
}

double t_cdf(double t, double df) {
    if (!(df > 0.0)) throw StatsError("t_cdf requires df > 0");
    const double x = df / (df + t * t);
    const double tail = 0.5 * regularized_incomplete_beta(0.5 * df, 0.5, x);
    return t >= 0.0 ? 1.0 - tail : tail;
}

double f_cdf(double f, double d1, double d2) {
    if (!(d1 > 0.0) || !(d2 > 0.0)) throw StatsError("f_cdf requires positive degrees of freedom");
    if (f <= 0.0) return 0.0;
    const double x = d1 * f / (d1 * f + d2);
    return regularized_incomplete_beta(0.5 * d1, 0.5 * d2, x);
}

double f_quantile(double p, double d1, double d2) {
    if (!(p > 0.0) || !(p < 1.0)) throw StatsError("f_quantile requires 0 < p < 1");
    double lo = 0.0;
    double hi = 1.0;
    while (f_cdf(hi, d1, d2) < p) {
        hi *= 2.0;
        if (hi > 1e12) throw StatsError("f_quantile bracket failed");
    }
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (f_cdf(mid, d1, d2) < p) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

double noncentral_f_cdf(double f, double d1, double d2, double lambda, double rel_tol) {
    if (!(d1 > 0.0) || !(d2 > 0.0)) throw StatsError("noncentral_f_cdf requires positive df");
    if (lambda < 0.0) throw StatsError("noncentral_f_cdf requires lambda >= 0");
    if (f <= 0.0) return 0.0;
    if (lambda == 0.0) return f_cdf(f, d1, d2);

    const double y = d1 * f / (d1 * f + d2);
    const double a0 = 0.5 * d1;
    const double b = 0.5 * d2;
    const double theta = 0.5 * lambda;

    // beta term T(a) with I_y(a+1, b) = I_y(a, b) - T(a)
    auto beta_term = [&](double a) {
        return std::exp(std::lgamma(a + b) - std::lgamma(a + 1.0) - std::lgamma(b) + a * std::log(y) +
                        b * std::log1p(-y));
    };

    const double k0 = std::floor(theta);
    const double log_p0 = -theta + k0 * std::log(theta) - std::lgamma(k0 + 1.0);
    const double p0 = std::exp(log_p0);
    const double i0 = regularized_incomplete_beta(a0 + k0, b, y);

    double sum = p0 * i0;
    double covered = p0;

    // upward from k0
    {
        double pk = p0;
        double ik = i0;
        double tk = beta_term(a0 + k0);
        for (double k = k0 + 1.0; k < k0 + 1e7; k += 1.0) {
            pk *= theta / k;
            ik = std::clamp(ik - tk, 0.0, 1.0);
            sum += pk * ik;
            covered += pk;
            if (1.0 - covered <= rel_tol) break;
            if (pk * ik < rel_tol * sum && pk < rel_tol) break;
            const double a = a0 + k;
            tk *= y * (a - 1.0 + b) / a;
        }
    }
    // downward from k0
    {
        double pk = p0;
        double ik = i0;
        double tk = beta_term(a0 + k0);
        for (double k = k0; k >= 1.0; k -= 1.0) {
            // step from k to k-1
            const double a = a0 + k;
            tk *= a / (y * (a - 1.0 + b));  // T(a-1) from T(a)
            ik = std::clamp(ik + tk, 0.0, 1.0);
            pk *= k / theta;
            sum += pk * ik;
            covered += pk;
            if (1.0 - covered <= rel_tol) break;
        }
    }
    return std::clamp(sum, 0.0, 1.0);
}

}  // namespace twinflow::stats
