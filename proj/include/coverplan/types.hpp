#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace coverplan {

/// Thrown when an iterative solver fails to reach its tolerance.
class NoConvergence : public std::runtime_error {
public:
    explicit NoConvergence(const std::string& what) : std::runtime_error(what) {}
};

/// Thrown when a problem instance admits no feasible solution.
class Infeasible : public std::runtime_error {
public:
    explicit Infeasible(const std::string& what) : std::runtime_error(what) {}
};

/**
 * Per-facility failure model. After n accrued samples, a tentative opening
 * fails with probability
 *
 *     epsilon * p / (n + 1)^r + epsilon * (1 - p)
 *
 * epsilon is the initial error, 1 - p the irreducible fraction, and r the
 * learning rate exponent.
 */
struct LearningCurve {
    double epsilon = 0.4;
    double p = 1.0;
    double r = 0.5;

    void validate() const {
        if (!(epsilon > 0.0) || !(epsilon <= 1.0))
            throw std::invalid_argument("LearningCurve: epsilon must be in (0, 1]");
        if (!(p >= 0.0) || !(p <= 1.0))
            throw std::invalid_argument("LearningCurve: p must be in [0, 1]");
        if (!(r > 0.0))
            throw std::invalid_argument("LearningCurve: r must be positive");
    }

    double failure_prob(double n) const {
        return epsilon * p / std::pow(n + 1.0, r) + epsilon * (1.0 - p);
    }

    double success_prob(double n) const { return 1.0 - failure_prob(n); }

    bool perfect_learning() const { return p == 1.0; }
};

/// A planning instance: coverage target m over T periods at risk level delta,
/// with an optional offline sample of size n0_offline already accrued.
struct PlanSpec {
    long long m = 100;
    int T = 2;
    double delta = 0.01;
    long long n0_offline = 0;

    void validate() const {
        if (m < 1) throw std::invalid_argument("PlanSpec: m must be >= 1");
        if (T < 2) throw std::invalid_argument("PlanSpec: T must be >= 2");
        if (!(delta > 0.0) || !(delta < 1.0))
            throw std::invalid_argument("PlanSpec: delta must be in (0, 1)");
        if (n0_offline < 0)
            throw std::invalid_argument("PlanSpec: n0_offline must be >= 0");
    }
};

/// Closed-form constants of the analytic schedule. buffer is the slack added
/// to the coverage requirement to absorb stochastic shortfall.
struct RegretConstants {
    double c0 = 1.0;
    double alpha_T = 0.0;
    double zeta_T = 0.0;
    double regret_exponent = 0.0;
    double buffer = 0.0;
};

enum class Provenance {
    StaticDagger,
    DeterministicClosedForm,
    DeterministicOracle,
    Exact,
    Offline,
    AdaptiveStep,
};

inline const char* to_string(Provenance p) {
    switch (p) {
        case Provenance::StaticDagger: return "static_dagger";
        case Provenance::DeterministicClosedForm: return "deterministic_closed_form";
        case Provenance::DeterministicOracle: return "deterministic_oracle";
        case Provenance::Exact: return "exact";
        case Provenance::Offline: return "offline";
        case Provenance::AdaptiveStep: return "adaptive_step";
    }
    return "unknown";
}

/**
 * A per-period schedule of tentative openings. `openings` holds the integer
 * schedule (rounded half-up), `values` the unrounded per-period quantities
 * where the policy is analytic, and `ell` the positive root coupling the
 * schedule to the buffered coverage requirement (zero when not applicable).
 */
struct Policy {
    std::vector<long long> openings;
    std::vector<double> values;
    double ell = 0.0;
    Provenance provenance = Provenance::StaticDagger;

    long long total() const {
        long long s = 0;
        for (long long a : openings) s += a;
        return s;
    }
};

inline long long round_half_up(double x) {
    return static_cast<long long>(std::floor(x + 0.5));
}

}  // namespace coverplan
