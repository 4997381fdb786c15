#include "coverplan/core.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "coverplan/stats.hpp"

namespace coverplan {

namespace detail {

double effective_rate(double r) {
    const double eps = 1e-6;
    if (std::fabs(r - 1.0) < eps) return r <= 1.0 ? 1.0 - eps : 1.0 + eps;
    return r;
}

namespace {

struct BaseConstants {
    double c0, aT, zT, r;
};

BaseConstants base_constants(const LearningCurve& curve, int T) {
    const double r = effective_rate(curve.r);
    const double c0 = 1.0 / (1.0 - (1.0 - curve.p) * curve.epsilon);
    const double aT = 1.0 / (1.0 - std::pow(r, T));
    const double zT = (1.0 / std::pow(r, T) - 1.0) / (1.0 - r) *
                      std::pow(1.0 / r, r / (1.0 - r) - double(T) * aT) *
                      std::pow(c0, aT * (1.0 - r));
    return {c0, aT, zT, r};
}

double coverage_buffer(const LearningCurve& curve, int T, double delta, double m,
                       double beta) {
    const auto bc = base_constants(curve, T);
    if (curve.p != 1.0)
        return std::sqrt(bc.c0 / 2.0 * std::log(2.0 / delta)) * std::sqrt(m);
    if (delta >= 0.5)
        throw std::invalid_argument(
            "coverage buffer: delta must be below 1/2 when p = 1");
    const double expo =
        (1.0 - beta) * bc.aT * (1.0 - bc.r) + beta * (1.0 - bc.r);
    return -normal_quantile(delta) * std::sqrt(2.0 * curve.epsilon * bc.zT) *
           std::pow(m, 0.5 * expo);
}

}  // namespace

TermSet policy_term_set(const LearningCurve& curve, int T, double delta, double m,
                        double gamma, double beta) {
    const auto bc = base_constants(curve, T);
    const double r = bc.r;
    TermSet ts;
    ts.coef.resize(static_cast<size_t>(T));
    ts.expo.resize(static_cast<size_t>(T));
    for (int t = 1; t <= T; ++t) {
        const double ft = bc.aT * (1.0 - std::pow(r, t));
        ts.coef[size_t(t - 1)] =
            std::pow(r, -(double(t) - double(T) * ft) / (1.0 - r)) *
            std::pow(bc.c0 / gamma, ft);
        ts.expo[size_t(t - 1)] = (1.0 - beta) * ft + beta;
    }
    ts.buffer = coverage_buffer(curve, T, delta, m, beta);
    const double second_order =
        curve.epsilon * curve.p * bc.zT * std::pow(gamma, -bc.aT * (1.0 - r)) *
        std::pow(m, (1.0 - beta) * bc.aT * (1.0 - r) + beta * (1.0 - r));
    ts.rhs = bc.c0 * (m + second_order + ts.buffer);
    return ts;
}

double solve_term_root(const TermSet& terms) {
    auto lhs = [&](double x) {
        double s = 0.0;
        for (size_t i = 0; i < terms.coef.size(); ++i)
            s += terms.coef[i] * std::pow(x, terms.expo[i]);
        return s;
    };
    if (!(terms.rhs > 0.0))
        throw std::invalid_argument("solve_term_root: requirement must be positive");
    double hi = terms.rhs;
    int grow = 0;
    while (lhs(hi) < terms.rhs) {
        hi *= 2.0;
        if (++grow > 200) throw NoConvergence("solve_term_root: no upper bracket");
    }
    double lo = 0.0;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (lhs(mid) < terms.rhs)
            lo = mid;
        else
            hi = mid;
        if (hi - lo <= 1e-14 * hi) break;
    }
    double x = 0.5 * (lo + hi);
    // Newton polish; the left side is strictly increasing.
    for (int it = 0; it < 8; ++it) {
        double f = lhs(x) - terms.rhs;
        double df = 0.0;
        for (size_t i = 0; i < terms.coef.size(); ++i)
            df += terms.coef[i] * terms.expo[i] * std::pow(x, terms.expo[i] - 1.0);
        if (!(df > 0.0)) break;
        double step = f / df;
        double nx = x - step;
        if (nx <= 0.0) break;
        x = nx;
        if (std::fabs(step) <= 1e-14 * x) break;
    }
    if (std::fabs(lhs(x) - terms.rhs) > 1e-10 * terms.rhs)
        throw NoConvergence("solve_term_root: residual tolerance not met");
    return x;
}

}  // namespace detail

RegretConstants regret_constants(const LearningCurve& curve, const PlanSpec& spec) {
    curve.validate();
    spec.validate();
    const double r = detail::effective_rate(curve.r);
    RegretConstants rc;
    rc.c0 = 1.0 / (1.0 - (1.0 - curve.p) * curve.epsilon);
    rc.alpha_T = 1.0 / (1.0 - std::pow(r, spec.T));
    rc.zeta_T = (1.0 / std::pow(r, spec.T) - 1.0) / (1.0 - r) *
                std::pow(1.0 / r, r / (1.0 - r) - double(spec.T) * rc.alpha_T) *
                std::pow(rc.c0, rc.alpha_T * (1.0 - r));
    const double lead = rc.alpha_T * (1.0 - r);
    rc.regret_exponent =
        (curve.p == 1.0 || lead >= 0.5) ? lead : 0.5;
    rc.buffer =
        detail::policy_term_set(curve, spec.T, spec.delta, double(spec.m), 1.0, 0.0)
            .buffer;
    return rc;
}

double solve_ell(const LearningCurve& curve, const PlanSpec& spec) {
    curve.validate();
    spec.validate();
    const auto ts = detail::policy_term_set(curve, spec.T, spec.delta,
                                            double(spec.m), 1.0, 0.0);
    return detail::solve_term_root(ts);
}

std::pair<double, double> remark1_bounds(const LearningCurve& curve,
                                         const PlanSpec& spec) {
    const auto rc = regret_constants(curve, spec);
    const double r = detail::effective_rate(curve.r);
    const double lo = double(spec.m) - std::pow(double(spec.m), rc.alpha_T * (1.0 - r));
    return {lo, double(spec.m) + rc.buffer};
}

Policy static_policy(const LearningCurve& curve, const PlanSpec& spec) {
    curve.validate();
    spec.validate();
    if (spec.n0_offline != 0)
        throw std::invalid_argument(
            "static_policy: n0_offline must be 0 (see offline_policy)");
    const auto ts = detail::policy_term_set(curve, spec.T, spec.delta,
                                            double(spec.m), 1.0, 0.0);
    Policy pol;
    pol.provenance = Provenance::StaticDagger;
    pol.ell = detail::solve_term_root(ts);
    pol.values.resize(ts.coef.size());
    pol.openings.resize(ts.coef.size());
    for (size_t i = 0; i < ts.coef.size(); ++i) {
        pol.values[i] = ts.coef[i] * std::pow(pol.ell, ts.expo[i]);
        pol.openings[i] = round_half_up(pol.values[i]);
    }
    return pol;
}

Policy deterministic_policy(const LearningCurve& curve, const PlanSpec& spec) {
    curve.validate();
    spec.validate();
    Policy pol;
    pol.provenance = Provenance::DeterministicClosedForm;
    pol.ell = double(spec.m);
    pol.values.assign(static_cast<size_t>(spec.T), 0.0);
    pol.openings.assign(static_cast<size_t>(spec.T), 0);
    if (curve.p == 0.0) {
        // Failure probability is constant, so only the total matters.
        const double c0 = 1.0 / (1.0 - curve.epsilon);
        pol.values.back() = c0 * double(spec.m);
        pol.openings.back() = round_half_up(pol.values.back());
        return pol;
    }
    const auto ts = detail::policy_term_set(curve, spec.T, spec.delta,
                                            double(spec.m), 1.0, 0.0);
    for (size_t i = 0; i < ts.coef.size(); ++i) {
        pol.values[i] = ts.coef[i] * std::pow(double(spec.m), ts.expo[i]);
        pol.openings[i] = round_half_up(pol.values[i]);
    }
    return pol;
}

double deterministic_objective(const LearningCurve& curve, const PlanSpec& spec) {
    const auto rc = regret_constants(curve, spec);
    const double r = detail::effective_rate(curve.r);
    return rc.c0 * (double(spec.m) +
                    curve.epsilon * curve.p * rc.zeta_T *
                        std::pow(double(spec.m), rc.alpha_T * (1.0 - r)));
}

Policy deterministic_oracle(const LearningCurve& curve, const PlanSpec& spec,
                            double m_target) {
    curve.validate();
    spec.validate();
    if (!(m_target > 0.0))
        throw std::invalid_argument("deterministic_oracle: m_target must be positive");
    const double r = detail::effective_rate(curve.r);
    const int T = spec.T;

    // Forward pass of the stationarity recurrence from u_0 = 1, u_1 = x.
    auto forward = [&](double x, std::vector<double>* us) -> double {
        std::vector<double> u(static_cast<size_t>(T) + 1);
        u[0] = 1.0;
        u[1] = x;
        for (int t = 1; t < T; ++t) {
            const double ut = u[size_t(t)];
            const double um = u[size_t(t - 1)];
            u[size_t(t + 1)] =
                std::pow(ut, r + 1.0) / (r * std::pow(um, r)) - (1.0 / r - 1.0) * ut;
        }
        double cov = 0.0;
        for (int t = 1; t <= T; ++t) {
            const double a = u[size_t(t)] - u[size_t(t - 1)];
            cov += a * curve.success_prob(u[size_t(t - 1)] - 1.0);
        }
        if (us) *us = std::move(u);
        return cov;
    };

    double lo = 1.0;
    double hi = std::max(2.0, m_target);
    int grow = 0;
    while (forward(hi, nullptr) < m_target) {
        hi *= 2.0;
        if (++grow > 200)
            throw NoConvergence("deterministic_oracle: no upper bracket on u1");
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (forward(mid, nullptr) < m_target)
            lo = mid;
        else
            hi = mid;
    }
    std::vector<double> u;
    const double u1 = 0.5 * (lo + hi);
    const double cov = forward(u1, &u);
    if (std::fabs(cov - m_target) > 1e-9 * m_target)
        throw NoConvergence("deterministic_oracle: coverage residual too large");

    Policy pol;
    pol.provenance = Provenance::DeterministicOracle;
    pol.ell = 0.0;
    pol.values.resize(static_cast<size_t>(T));
    pol.openings.resize(static_cast<size_t>(T));
    for (int t = 1; t <= T; ++t) {
        pol.values[size_t(t - 1)] = u[size_t(t)] - u[size_t(t - 1)];
        pol.openings[size_t(t - 1)] = round_half_up(pol.values[size_t(t - 1)]);
    }
    return pol;
}

long long min_trials(double q, long long m, double delta, long long cap) {
    if (m < 1) throw std::invalid_argument("min_trials: m must be >= 1");
    if (!(delta > 0.0) || !(delta < 1.0))
        throw std::invalid_argument("min_trials: delta must be in (0, 1)");
    if (!(q > 0.0) || q > 1.0)
        throw std::invalid_argument("min_trials: q must be in (0, 1]");
    if (q == 1.0) return m;

    // Normal-approximation seed, then bracket and bisect on the exact tail.
    const double seed =
        double(m) / q - normal_quantile(delta) * std::sqrt(1.0 - q) / q *
                            std::sqrt(double(m));
    long long n = std::max(m, static_cast<long long>(std::ceil(seed)));
    auto feasible = [&](long long nn) {
        return binomial_tail_at_least(nn, q, m) >= 1.0 - delta;
    };
    long long lo, hi;
    if (feasible(n)) {
        hi = n;
        lo = m - 1;  // tail at m - 1 trials is 0 for m >= 1
        // Tighten the lower side geometrically toward the seed.
        long long step = std::max<long long>(1, n / 64);
        while (hi - step > lo && feasible(hi - step)) {
            hi -= step;
            step *= 2;
        }
        lo = std::max(lo, hi - step);
    } else {
        lo = n;
        long long step = std::max<long long>(1, n / 64);
        while (!feasible(lo + step)) {
            lo += step;
            step *= 2;
            if (lo + step > cap)
                throw std::overflow_error("min_trials: exceeded trial cap");
        }
        hi = lo + step;
    }
    while (hi - lo > 1) {
        const long long mid = lo + (hi - lo) / 2;
        if (feasible(mid))
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

BenchmarkPair benchmarks(const LearningCurve& curve, const PlanSpec& spec) {
    curve.validate();
    spec.validate();
    BenchmarkPair out;
    out.fully_learned =
        min_trials(1.0 - curve.epsilon * (1.0 - curve.p), spec.m, spec.delta);
    out.no_learning = min_trials(1.0 - curve.epsilon, spec.m, spec.delta);
    return out;
}

}  // namespace coverplan
