#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/non_central_f.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "twinflow/stats/design.hpp"
#include "twinflow/stats/ols.hpp"
#include "twinflow/stats/power.hpp"
#include "twinflow/stats/special.hpp"
#include "twinflow/stats/tests.hpp"

using namespace twinflow;

TEST_CASE("t CDF agrees with the independent boost implementation") {
    for (const double df : {1.0, 2.0, 5.0, 10.0, 30.0, 100.0}) {
        boost::math::students_t dist(df);
        for (double t = -10.0; t <= 10.0; t += 0.37) {
            CAPTURE(df);
            CAPTURE(t);
            CHECK(stats::t_cdf(t, df) == doctest::Approx(boost::math::cdf(dist, t)).epsilon(1e-12));
        }
    }
}

TEST_CASE("central F CDF and quantile agree with boost") {
    for (const double d1 : {1.0, 4.0, 20.0, 80.0}) {
        for (const double d2 : {3.0, 30.0, 300.0, 2565.0}) {
            boost::math::fisher_f dist(d1, d2);
            for (double f = 0.1; f <= 5.0; f += 0.45) {
                CAPTURE(d1);
                CAPTURE(d2);
                CAPTURE(f);
                CHECK(stats::f_cdf(f, d1, d2) ==
                      doctest::Approx(boost::math::cdf(dist, f)).epsilon(1e-10));
            }
            const double q95 = stats::f_quantile(0.95, d1, d2);
            CHECK(q95 == doctest::Approx(boost::math::quantile(dist, 0.95)).epsilon(1e-8));
        }
    }
}

TEST_CASE("noncentral F CDF by series matches boost across a grid") {
    for (const double d1 : {1.0, 8.0, 80.0}) {
        for (const double d2 : {5.0, 100.0, 2565.0}) {
            for (const double lambda : {0.0, 0.5, 5.0, 52.9, 120.0}) {
                boost::math::non_central_f dist(d1, d2, lambda);
                for (double f = 0.2; f <= 4.0; f += 0.6) {
                    CAPTURE(d1);
                    CAPTURE(d2);
                    CAPTURE(lambda);
                    CAPTURE(f);
                    CHECK(stats::noncentral_f_cdf(f, d1, d2, lambda) ==
                          doctest::Approx(boost::math::cdf(dist, f)).epsilon(1e-9));
                }
            }
        }
    }
}

TEST_CASE("one_sample_t: textbook example, symmetry, invariances, degenerate error") {
    SUBCASE("samples [1,2,3] against 0: t = 2*sqrt(3), df 2, closed-form p") {
        const double samples[] = {1.0, 2.0, 3.0};
        const auto r = stats::one_sample_t(samples, 0.0);
        CHECK(r.t == doctest::Approx(2.0 * std::sqrt(3.0)).epsilon(1e-12));
        CHECK(r.df == 2);
        // at df = 2 the CDF has the closed form F(t) = (1 + t/sqrt(2+t^2))/2,
        // so the two-sided p is 1 - 2*sqrt(3/14)
        CHECK(r.p == doctest::Approx(1.0 - 2.0 * std::sqrt(3.0 / 14.0)).epsilon(1e-9));
        // and against the independent boost CDF
        boost::math::students_t dist(2.0);
        CHECK(r.p == doctest::Approx(2.0 * (1.0 - boost::math::cdf(dist, r.t))).epsilon(1e-6));
    }
    SUBCASE("samples symmetric about mu0: t = 0, p = 1") {
        const double samples[] = {1.0, 2.0, 3.0};
        const auto r = stats::one_sample_t(samples, 2.0);
        CHECK(r.t == 0.0);
        CHECK(r.p == doctest::Approx(1.0));
    }
    SUBCASE("greater tail") {
        const double samples[] = {1.0, 2.0, 3.0};
        const auto two = stats::one_sample_t(samples, 0.0, stats::Tail::two_sided);
        const auto greater = stats::one_sample_t(samples, 0.0, stats::Tail::greater);
        CHECK(greater.p == doctest::Approx(two.p / 2.0));
    }
    SUBCASE("shift invariance and positive-scale invariance of t") {
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        std::vector<double> samples(12);
        for (auto& x : samples) x = u(rng);
        const auto base = stats::one_sample_t(samples, 0.25);
        auto shifted = samples;
        for (auto& x : shifted) x += 5.0;
        CHECK(stats::one_sample_t(shifted, 5.25).t == doctest::Approx(base.t).epsilon(1e-12));
        auto scaled = samples;
        for (auto& x : scaled) x *= 3.0;
        CHECK(stats::one_sample_t(scaled, 0.75).t == doctest::Approx(base.t).epsilon(1e-12));
    }
    SUBCASE("zero variance is a reported error") {
        const double samples[] = {2.0, 2.0, 2.0};
        CHECK_THROWS_WITH_AS(stats::one_sample_t(samples, 0.0), doctest::Contains("degenerate"),
                             stats::StatsError);
    }
    SUBCASE("n < 2 rejected") {
        const double samples[] = {1.0};
        CHECK_THROWS_AS(stats::one_sample_t(samples, 0.0), stats::StatsError);
    }
}

namespace {

std::vector<stats::FactorLevels> full_factorial(const stats::FactorSpace& space,
                                                const std::vector<double>& tolerances) {
    std::vector<stats::FactorLevels> cells;
    for (const auto& c : space.models)
        for (const auto& a : space.aggressiveness)
            for (const double l : tolerances)
                for (const auto& r : space.networks) cells.push_back({c, a, l, r});
    return cells;
}

}  // namespace

TEST_CASE("design matrix: 80 paper-mode columns with the enumerated labels") {
    const auto space = stats::FactorSpace::canonical({"grid4x4", "arterial4x4"});
    const std::vector<double> tolerances = {0.5, 0.82, 1.0, 1.18, 1.5};
    const auto cells = full_factorial(space, tolerances);
    REQUIRE(cells.size() == 300);

    const auto design = stats::build_design_matrix(cells, space, stats::DesignMode::paper);
    CHECK(design.X.cols() == 80);
    CHECK(design.labels.size() == 80);

    // independently enumerate the terms: C, A, L, L^2, R, C.R, A.R, L.R, C.A, C.L, A.L
    std::vector<std::string> want;
    for (const auto& c : space.models) want.push_back("C[" + c + "]");
    for (const auto& a : space.aggressiveness) want.push_back("A[" + a + "]");
    want.push_back("L");
    want.push_back("L^2");
    for (const auto& r : space.networks) want.push_back("R[" + r + "]");
    for (const auto& c : space.models)
        for (const auto& r : space.networks) want.push_back("C[" + c + "]:R[" + r + "]");
    for (const auto& a : space.aggressiveness)
        for (const auto& r : space.networks) want.push_back("A[" + a + "]:R[" + r + "]");
    for (const auto& r : space.networks) want.push_back("L:R[" + r + "]");
    for (const auto& c : space.models)
        for (const auto& a : space.aggressiveness) want.push_back("C[" + c + "]:A[" + a + "]");
    for (const auto& c : space.models) want.push_back("C[" + c + "]:L");
    for (const auto& a : space.aggressiveness) want.push_back("A[" + a + "]:L");
    REQUIRE(want.size() == 80);
    CHECK(design.labels == want);
}

TEST_CASE("design matrix: inference mode is full rank and matches the paper-mode rank") {
    const auto space = stats::FactorSpace::canonical({"grid4x4", "arterial4x4"});
    const std::vector<double> tolerances = {0.5, 0.82, 1.0, 1.18, 1.5};
    const auto cells = full_factorial(space, tolerances);

    const auto paper = stats::build_design_matrix(cells, space, stats::DesignMode::paper);
    const auto inference = stats::build_design_matrix(cells, space, stats::DesignMode::inference);

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr_paper(paper.X);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr_inf(inference.X);
    CHECK(qr_inf.rank() == inference.X.cols());  // full rank
    // the aliased paper columns collapse onto the inference span
    CHECK(qr_paper.rank() == qr_inf.rank());
}

TEST_CASE("design matrix: single reference cell in inference mode") {
    const auto space = stats::FactorSpace::canonical({"grid4x4", "arterial4x4"});
    const std::vector<stats::FactorLevels> cells = {
        {space.models.front(), space.aggressiveness.front(), 1.0, space.networks.front()}};
    const auto design = stats::build_design_matrix(cells, space, stats::DesignMode::inference);
    // intercept, L, L^2 are set; every reference-coded column is 0
    for (Eigen::Index j = 0; j < design.X.cols(); ++j) {
        const auto& label = design.labels[static_cast<std::size_t>(j)];
        const double want = label == "(intercept)" ? 1.0 : label == "L" ? 1.0 : label == "L^2" ? 1.0 : 0.0;
        CAPTURE(label);
        CHECK(design.X(0, j) == want);
    }
}

TEST_CASE("design matrix: unknown level raises") {
    const auto space = stats::FactorSpace::canonical({"g"});
    const std::vector<stats::FactorLevels> cells = {{"not_a_model", "aggressive_young", 1.0, "g"}};
    CHECK_THROWS_WITH_AS(stats::build_design_matrix(cells, space, stats::DesignMode::paper),
                         doctest::Contains("unknown"), stats::StatsError);
    CHECK_THROWS_AS(stats::build_design_matrix({}, space, stats::DesignMode::paper), stats::StatsError);
}

TEST_CASE("ols_fit: noiseless recovery is exact") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> z(0.0, 1.0);
    Eigen::MatrixXd X(60, 5);
    for (Eigen::Index i = 0; i < X.rows(); ++i)
        for (Eigen::Index j = 0; j < X.cols(); ++j) X(i, j) = z(rng);
    Eigen::VectorXd beta(5);
    beta << 1.5, -2.0, 0.0, 3.25, 0.5;
    const Eigen::VectorXd y = X * beta;
    const auto model = stats::ols_fit(X, y);
    CHECK(!model.rank_deficient);
    CHECK((model.coefficients - beta).norm() <= 1e-9 * beta.norm());
    CHECK((y - X * model.coefficients).norm() <= 1e-9 * y.norm());
    CHECK(model.r_squared == doctest::Approx(1.0));
}

TEST_CASE("ols_fit: duplicated column flags rank deficiency, minimum-norm solution returned") {
    std::mt19937_64 rng(12);
    std::normal_distribution<double> z(0.0, 1.0);
    Eigen::MatrixXd X(40, 4);
    for (Eigen::Index i = 0; i < X.rows(); ++i)
        for (Eigen::Index j = 0; j < 3; ++j) X(i, j) = z(rng);
    X.col(3) = X.col(0);  // exact collinearity
    Eigen::VectorXd y = X.leftCols(3) * Eigen::Vector3d(1.0, 2.0, 3.0);
    const auto model = stats::ols_fit(X, y);
    CHECK(model.rank_deficient);
    CHECK(model.rank == 3);
    CHECK(std::isnan(model.std_errors[0]));
    // still the least-squares fit
    CHECK((y - X * model.coefficients).norm() <= 1e-9 * y.norm());

    CHECK_THROWS_AS(stats::ols_fit(X, Eigen::VectorXd::Zero(7)), stats::StatsError);
}

TEST_CASE("ols_fit: planted coefficients recovered within 3 standard errors") {
    std::mt19937_64 rng(2025);
    std::normal_distribution<double> z(0.0, 1.0);
    const int trials = 1000;
    const Eigen::Index n = 150, p = 6;
    Eigen::VectorXd beta(p);
    beta << 0.5, -1.0, 2.0, 0.0, 1.25, -0.75;
    std::size_t within = 0, total = 0;
    for (int trial = 0; trial < trials; ++trial) {
        Eigen::MatrixXd X(n, p);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < p; ++j) X(i, j) = z(rng);
        Eigen::VectorXd y = X * beta;
        for (Eigen::Index i = 0; i < n; ++i) y[i] += z(rng);
        const auto model = stats::ols_fit(X, y);
        REQUIRE(!model.rank_deficient);
        for (Eigen::Index j = 0; j < p; ++j) {
            ++total;
            if (std::abs(model.coefficients[j] - beta[j]) <= 3.0 * model.std_errors[j]) ++within;
        }
    }
    CHECK(static_cast<double>(within) / static_cast<double>(total) >= 0.99);
}

TEST_CASE("power analysis: the canonical inputs reproduce the published sample size") {
    const auto n = stats::power_sample_size(0.02, 0.05, 0.95, 80, 80);
    // +/- 2% of 2,646
    CHECK(n >= 2593);
    CHECK(n <= 2699);
    // smallest such N: one less must miss the target
    CHECK(stats::f_test_power(0.02, 0.05, 80, 80, n) >= 0.95);
    CHECK(stats::f_test_power(0.02, 0.05, 80, 80, n - 1) < 0.95);

    CHECK(stats::replications_per_cell(2646, 300) == 9);
    CHECK(stats::replications_per_cell(300, 300) == 1);
    CHECK(stats::replications_per_cell(301, 300) == 2);
    CHECK_THROWS_AS(stats::replications_per_cell(100, 0), stats::StatsError);
}

TEST_CASE("power analysis: monotonicities") {
    const auto base = stats::power_sample_size(0.02, 0.05, 0.95, 20, 20);
    const auto bigger_effect = stats::power_sample_size(0.04, 0.05, 0.95, 20, 20);
    CHECK(bigger_effect < base);
    const auto looser_alpha = stats::power_sample_size(0.02, 0.10, 0.95, 20, 20);
    CHECK(looser_alpha <= base);
    const auto higher_power = stats::power_sample_size(0.02, 0.05, 0.99, 20, 20);
    CHECK(higher_power >= base);
    // power rises with N
    CHECK(stats::f_test_power(0.02, 0.05, 20, 20, 500) <
          stats::f_test_power(0.02, 0.05, 20, 20, 1500));
    CHECK_THROWS_AS(stats::power_sample_size(1e-9, 0.05, 0.9999999, 80, 80, 5000), stats::StatsError);
}
