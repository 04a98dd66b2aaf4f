#pragma once

#include <stdexcept>

namespace twinflow::stats {

class StatsError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Regularized incomplete beta I_x(a, b) by continued fraction (Lentz).
double regularized_incomplete_beta(double a, double b, double x);

/// Student t CDF with df degrees of freedom.
double t_cdf(double t, double df);

/// Central F CDF.
double f_cdf(double f, double d1, double d2);

/// Central F quantile (smallest f with CDF >= p), by bracketed bisection.
double f_quantile(double p, double d1, double d2);

/// Noncentral F CDF by the Poisson-mixture series over incomplete beta
/// terms, expanded outward from the mode of the Poisson weights until the
/// remaining mass is below rel_tol.
double noncentral_f_cdf(double f, double d1, double d2, double lambda, double rel_tol = 1e-12);

}  // namespace twinflow::stats
