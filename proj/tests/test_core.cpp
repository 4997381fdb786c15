#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "coverplan/core.hpp"
#include "coverplan/stats.hpp"

using namespace coverplan;

namespace {

const LearningCurve kTableCurve{0.4, 1.0, 0.5};

PlanSpec spec_of(long long m, int T, double delta = 0.01) {
    return PlanSpec{m, T, delta, 0};
}

// Independent tail oracle: plain lgamma summation over the full support. Used
// to cross-check min_trials, which walks the pmf recurrence instead.
double oracle_tail(long long n, double q, long long m) {
    if (m <= 0) return 1.0;
    if (m > n) return 0.0;
    double acc = 0.0;
    for (long long k = m; k <= n; ++k) {
        acc += std::exp(std::lgamma(double(n) + 1.0) - std::lgamma(double(k) + 1.0) -
                        std::lgamma(double(n - k) + 1.0) + double(k) * std::log(q) +
                        double(n - k) * std::log1p(-q));
    }
    return acc;
}

}  // namespace

TEST_CASE("learning curve failure probability") {
    const LearningCurve c{0.4, 0.7, 0.5};
    CHECK(c.failure_prob(0) == doctest::Approx(0.4));
    // Strictly decreasing when p > 0, limit at the irreducible error.
    double prev = c.failure_prob(0);
    for (long long n : {1LL, 5LL, 50LL, 1000LL, 100000LL}) {
        const double f = c.failure_prob(double(n));
        CHECK(f < prev);
        CHECK(f > 0.4 * 0.3);
        prev = f;
    }
    CHECK(c.failure_prob(1e12) == doctest::Approx(0.4 * 0.3).epsilon(1e-5));

    const LearningCurve flat{0.4, 0.0, 0.5};
    CHECK(flat.failure_prob(0) == doctest::Approx(0.4));
    CHECK(flat.failure_prob(1e6) == doctest::Approx(0.4));
}

TEST_CASE("parameter validation") {
    CHECK_THROWS_AS(LearningCurve{0.0, 1.0, 0.5}.validate(), std::invalid_argument);
    CHECK_THROWS_AS(LearningCurve{1.2, 1.0, 0.5}.validate(), std::invalid_argument);
    CHECK_THROWS_AS(LearningCurve{0.4, -0.1, 0.5}.validate(), std::invalid_argument);
    CHECK_THROWS_AS(LearningCurve{0.4, 1.0, 0.0}.validate(), std::invalid_argument);
    CHECK_THROWS_AS(spec_of(0, 2).validate(), std::invalid_argument);
    CHECK_THROWS_AS(spec_of(10, 1).validate(), std::invalid_argument);
    CHECK_THROWS_AS(spec_of(10, 2, 0.0).validate(), std::invalid_argument);
    CHECK_THROWS_AS(regret_constants(kTableCurve, spec_of(10, 2, 0.7)),
                    std::invalid_argument);  // buffer sign requires delta < 1/2 at p=1
}

TEST_CASE("normal quantile accuracy") {
    for (double p : {1e-6, 0.005, 0.01, 0.025, 0.1, 0.5, 0.9, 0.99, 1.0 - 1e-6}) {
        const double x = normal_quantile(p);
        CHECK(normal_cdf(x) == doctest::Approx(p).epsilon(1e-11));
    }
    CHECK(normal_quantile(0.01) == doctest::Approx(-2.3263478740408408).epsilon(1e-10));
}

TEST_CASE("theory constants against the reference table") {
    // (coefficient c0 eps p zeta_T, exponent alpha_T (1-r)) for T = 2..6;
    // coefficients verified independently by scalar arithmetic.
    const double expect_coef[] = {0.7559526299, 1.0403686378, 1.2469141324,
                                  1.3859889957, 1.4743542627};
    const double expect_exp[] = {2.0 / 3, 4.0 / 7, 8.0 / 15, 16.0 / 31, 32.0 / 63};
    for (int T = 2; T <= 6; ++T) {
        const auto rc = regret_constants(kTableCurve, spec_of(100, T));
        CHECK(rc.c0 == doctest::Approx(1.0));
        CHECK(0.4 * rc.zeta_T == doctest::Approx(expect_coef[T - 2]).epsilon(1e-6));
        CHECK(rc.regret_exponent == doctest::Approx(expect_exp[T - 2]).epsilon(1e-12));
    }
    // zeta_2 has the closed form 6 * 2^(-5/3).
    const auto rc2 = regret_constants(kTableCurve, spec_of(100, 2));
    CHECK(rc2.zeta_T == doctest::Approx(6.0 * std::pow(2.0, -5.0 / 3.0)).epsilon(1e-12));
    CHECK(rc2.alpha_T == doctest::Approx(4.0 / 3.0).epsilon(1e-12));

    // p = 0 removes learning: c0 = 1 / (1 - eps).
    const auto rc0 = regret_constants({0.4, 0.0, 0.7}, spec_of(100, 3));
    CHECK(rc0.c0 == doctest::Approx(5.0 / 3.0).epsilon(1e-12));
    CHECK(rc0.regret_exponent == doctest::Approx(0.5));
}

TEST_CASE("solve_ell matches the scalar-arithmetic requirement") {
    // Right side assembled by plain scalar arithmetic, independent of the
    // library plumbing.
    const double zeta = 6.0 * std::pow(2.0, -5.0 / 3.0);
    const double buffer = -normal_quantile(0.01) * std::sqrt(2.0 * 0.4 * zeta) *
                          std::pow(100.0, 1.0 / 3.0);
    const double rhs = 100.0 + 0.4 * zeta * std::pow(100.0, 2.0 / 3.0) + buffer;
    CHECK(rhs == doctest::Approx(129.6).epsilon(1e-3));

    const double ell = solve_ell(kTableCurve, spec_of(100, 2));
    CHECK(ell == doctest::Approx(114.7).epsilon(1e-3));
    // Verify the root by substitution.
    CHECK(ell + std::pow(2.0, -2.0 / 3.0) * std::pow(ell, 2.0 / 3.0) ==
          doctest::Approx(rhs).epsilon(1e-10));
}

TEST_CASE("root identity across configurations") {
    for (int T = 2; T <= 6; ++T) {
        for (long long m : {100LL, 1000LL, 10000LL}) {
            const auto spec = spec_of(m, T);
            const auto rc = regret_constants(kTableCurve, spec);
            const auto pol = static_policy(kTableCurve, spec);
            double lhs = 0.0;
            for (double v : pol.values) lhs += v;
            const double rhs =
                rc.c0 * (double(m) +
                         0.4 * rc.zeta_T * std::pow(double(m), rc.alpha_T * 0.5) +
                         rc.buffer);
            CHECK(lhs == doctest::Approx(rhs).epsilon(1e-8));
        }
    }
}

TEST_CASE("static policy reproduces the reference table within one unit") {
    struct Row {
        long long m;
        int T;
        std::vector<long long> a;
        long long regret;
    };
    // Published schedule and regret values; each entry tolerates +-1.
    const std::vector<Row> rows = {
        {100, 2, {15, 116}, 30},
        {100, 3, {5, 23, 99}, 28},
        {100, 4, {2, 7, 25, 93}, 27},
        {100, 5, {1, 2, 7, 25, 92}, 28},
        {100, 6, {1, 1, 2, 7, 25, 92}, 28},
        {1000, 2, {65, 1040}, 104},
        {1000, 3, {18, 155, 906}, 79},
        {1000, 4, {8, 41, 192, 832}, 73},
        {1000, 5, {4, 13, 51, 202, 802}, 72},
        {1000, 6, {2, 5, 15, 54, 204, 794}, 73},
    };
    for (const auto& row : rows) {
        CAPTURE(row.m);
        CAPTURE(row.T);
        const auto pol = static_policy(kTableCurve, spec_of(row.m, row.T));
        REQUIRE(pol.openings.size() == row.a.size());
        for (size_t t = 0; t < row.a.size(); ++t)
            CHECK(std::llabs(pol.openings[t] - row.a[t]) <= 1);
        const long long fully =
            benchmarks(kTableCurve, spec_of(row.m, row.T)).fully_learned;
        CHECK(std::llabs(pol.total() - fully - row.regret) <= 1);
    }
}

TEST_CASE("schedule is nondecreasing for the reference configuration") {
    for (int T = 2; T <= 6; ++T) {
        for (long long m : {100LL, 1000LL}) {
            const auto pol = static_policy(kTableCurve, spec_of(m, T));
            for (size_t t = 1; t < pol.openings.size(); ++t)
                CHECK(pol.openings[t] >= pol.openings[t - 1]);
        }
    }
}

TEST_CASE("ell approaches m for large targets") {
    const double ell = solve_ell(kTableCurve, spec_of(100000000LL, 2));
    CHECK(ell / 1e8 == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("deterministic policy closed form") {
    const auto spec = spec_of(1000000, 2);
    const auto det = deterministic_policy(kTableCurve, spec);
    CHECK(det.values[0] / std::pow(1e6, 2.0 / 3.0) ==
          doctest::Approx(std::pow(2.0, -2.0 / 3.0)).epsilon(1e-10));
    CHECK(det.values[1] == doctest::Approx(1e6).epsilon(1e-12));

    const auto det3 = deterministic_policy(kTableCurve, spec_of(1000000, 3));
    CHECK(det3.values[0] / std::pow(1e6, 4.0 / 7.0) ==
          doctest::Approx(std::pow(2.0, -10.0 / 7.0)).epsilon(1e-10));
    CHECK(det3.values[1] / std::pow(1e6, 6.0 / 7.0) ==
          doctest::Approx(std::pow(2.0, -8.0 / 7.0)).epsilon(1e-10));

    const double obj = deterministic_objective(kTableCurve, spec);
    CHECK(obj == doctest::Approx(1e6 + 0.4 * 6.0 * std::pow(2.0, -5.0 / 3.0) * 1e4)
                     .epsilon(1e-10));
}

TEST_CASE("deterministic policy with p = 0 collapses to one period") {
    const LearningCurve c{0.4, 0.0, 0.5};
    const auto det = deterministic_policy(c, spec_of(300, 3));
    CHECK(det.openings[0] == 0);
    CHECK(det.openings[1] == 0);
    CHECK(det.openings[2] == 500);  // c0 m = m / (1 - eps)
    CHECK(deterministic_objective(c, spec_of(300, 3)) == doctest::Approx(500.0));
}

TEST_CASE("deterministic oracle binds the coverage constraint") {
    const auto spec = spec_of(100, 3);
    const auto orc = deterministic_oracle(kTableCurve, spec, 1e6);
    // Recompute the coverage from the returned per-period values.
    double cov = 0.0;
    double accrued = 0.0;
    for (double a : orc.values) {
        CHECK(a > 0.0);  // u strictly increasing
        cov += a * kTableCurve.success_prob(accrued);
        accrued += a;
    }
    CHECK(std::fabs(cov - 1e6) / 1e6 <= 1e-9);
}

TEST_CASE("oracle and closed form agree to two percent at the reference point") {
    PlanSpec big = spec_of(1000000, 2);
    const auto orc = deterministic_oracle(kTableCurve, big, 1e6);
    const auto cf = deterministic_policy(kTableCurve, big);
    for (size_t t = 0; t < cf.values.size(); ++t)
        CHECK(std::fabs(cf.values[t] - orc.values[t]) / orc.values[t] <= 0.02);
}

TEST_CASE("oracle agreement improves as the target grows") {
    for (double r : {0.3, 0.5, 0.8}) {
        const LearningCurve curve{0.4, 1.0, r};
        for (int T : {2, 3, 4}) {
            double prev_gap = -1.0;
            for (double m : {1e3, 1e4, 1e5, 1e6}) {
                PlanSpec spec = spec_of(static_cast<long long>(m), T);
                const auto orc = deterministic_oracle(curve, spec, m);
                const auto cf = deterministic_policy(curve, spec);
                double gap = 0.0;
                for (size_t t = 0; t < cf.values.size(); ++t)
                    gap = std::max(gap, std::fabs(cf.values[t] - orc.values[t]) /
                                            orc.values[t]);
                if (prev_gap >= 0.0) CHECK(gap < prev_gap);
                prev_gap = gap;
            }
        }
    }
}

TEST_CASE("min_trials matches the published quantiles") {
    CHECK(min_trials(1.0, 100, 0.01) == 100);
    CHECK(min_trials(0.6, 100, 0.01) == 193);
    CHECK(min_trials(0.6, 1000, 0.01) == 1746);
    CHECK_THROWS_AS(min_trials(0.0, 10, 0.01), std::invalid_argument);
}

TEST_CASE("min_trials minimality on randomized instances") {
    std::mt19937_64 gen(20250809);
    std::uniform_real_distribution<double> uq(0.25, 0.99);
    std::uniform_real_distribution<double> ud(0.001, 0.2);
    std::uniform_int_distribution<long long> um(1, 300);
    for (int it = 0; it < 50; ++it) {
        const double q = uq(gen);
        const double delta = ud(gen);
        const long long m = um(gen);
        const long long n = min_trials(q, m, delta);
        CAPTURE(q);
        CAPTURE(delta);
        CAPTURE(m);
        CHECK(oracle_tail(n, q, m) >= 1.0 - delta);
        if (n > m) CHECK(oracle_tail(n - 1, q, m) < 1.0 - delta);
    }
}

TEST_CASE("benchmarks") {
    const auto b100 = benchmarks(kTableCurve, spec_of(100, 2));
    CHECK(b100.fully_learned == 100);
    CHECK(b100.no_learning == 193);
    const auto b1000 = benchmarks(kTableCurve, spec_of(1000, 4));
    CHECK(b1000.fully_learned == 1000);
    CHECK(b1000.no_learning == 1746);
    // Any epsilon with p = 1 keeps the fully-learned benchmark at m.
    const auto b = benchmarks({0.9, 1.0, 0.3}, spec_of(42, 2));
    CHECK(b.fully_learned == 42);
}

TEST_CASE("static policy rejects offline samples") {
    PlanSpec spec = spec_of(100, 2);
    spec.n0_offline = 10;
    CHECK_THROWS_AS(static_policy(kTableCurve, spec), std::invalid_argument);
}

TEST_CASE("binomial tail against the direct sum") {
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> uq(0.05, 0.95);
    for (int it = 0; it < 30; ++it) {
        const long long n = 1 + static_cast<long long>(gen() % 400);
        const double q = uq(gen);
        const long long m =
            static_cast<long long>(gen() % static_cast<uint64_t>(n + 2));
        CHECK(binomial_tail_at_least(n, q, m) ==
              doctest::Approx(oracle_tail(n, q, m)).epsilon(1e-10));
    }
}
