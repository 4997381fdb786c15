#include "coverplan/adaptive.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "coverplan/core.hpp"
#include "coverplan/rng.hpp"

namespace coverplan {

void OfflineSpec::validate() const {
    if (!(gamma > 0.0))
        throw std::invalid_argument("OfflineSpec: gamma must be positive");
    if (!(beta >= 0.0) || !(beta <= 1.0))
        throw std::invalid_argument("OfflineSpec: beta must be in [0, 1]");
    if (!(acquisition_cost > 0.0) || !(acquisition_cost <= 1.0))
        throw std::invalid_argument("OfflineSpec: acquisition_cost must be in (0, 1]");
}

Policy offline_policy(const LearningCurve& curve, const PlanSpec& spec,
                      const OfflineSpec& offline) {
    curve.validate();
    spec.validate();
    offline.validate();
    const double n0_implied =
        offline.gamma * std::pow(double(spec.m), offline.beta);
    if (spec.n0_offline > 0 &&
        std::fabs(n0_implied - double(spec.n0_offline)) >
            1e-6 * std::max(1.0, double(spec.n0_offline)))
        throw std::invalid_argument(
            "offline_policy: n0_offline inconsistent with gamma * m^beta");

    const auto ts = detail::policy_term_set(curve, spec.T, spec.delta,
                                            double(spec.m), offline.gamma,
                                            offline.beta);
    Policy pol;
    pol.provenance = Provenance::Offline;
    pol.ell = detail::solve_term_root(ts);
    pol.values.resize(ts.coef.size());
    pol.openings.resize(ts.coef.size());
    for (size_t i = 0; i < ts.coef.size(); ++i) {
        pol.values[i] = ts.coef[i] * std::pow(pol.ell, ts.expo[i]);
        pol.openings[i] = round_half_up(pol.values[i]);
    }
    return pol;
}

WarmStart warmstart_acquisition(const LearningCurve& curve, const PlanSpec& spec,
                                double cost) {
    curve.validate();
    spec.validate();
    if (!(cost > 0.0) || !(cost <= 1.0))
        throw std::invalid_argument("warmstart_acquisition: cost must be in (0, 1]");
    const auto rc = regret_constants(curve, spec);
    const double r = detail::effective_rate(curve.r);
    const double lead = rc.alpha_T * (1.0 - r);
    const double alpha_T1 = 1.0 / (1.0 - std::pow(r, spec.T + 1));

    WarmStart ws;
    ws.beta_star = (1.0 - r) * alpha_T1;
    ws.gamma_star = std::pow(
        lead * rc.c0 * curve.epsilon * curve.p * rc.zeta_T / cost,
        1.0 / (lead + 1.0));
    ws.n0 = round_half_up(ws.gamma_star * std::pow(double(spec.m), ws.beta_star));
    return ws;
}

long long last_period_exact(const LearningCurve& curve, long long remaining,
                            long long accrued_n, double delta) {
    curve.validate();
    if (remaining < 0)
        throw std::invalid_argument("last_period_exact: remaining must be >= 0");
    if (remaining == 0) return 0;
    const double q = curve.success_prob(double(accrued_n));
    return min_trials(q, remaining, delta);
}

namespace {

// First decision of the remaining-horizon problem given the realized history.
// gamma and beta are inferred from the accrued sample so that
// gamma * remaining^beta equals the sample size, clipped to beta in [0, 1].
long long replan_first_decision(const LearningCurve& curve, long long remaining,
                                int horizon, double delta, long long accrued) {
    PlanSpec sub;
    sub.m = remaining;
    sub.T = horizon;
    sub.delta = delta;
    if (accrued <= 0) {
        return static_policy(curve, sub).openings.front();
    }
    const double mm = std::max(2.0, double(remaining));
    double beta = std::log(double(accrued)) / std::log(mm);
    beta = std::clamp(beta, 0.0, 1.0);
    OfflineSpec off;
    off.beta = beta;
    off.gamma = double(accrued) / std::pow(mm, beta);
    return offline_policy(curve, sub, off).openings.front();
}

Trajectory run_loop(const LearningCurve& curve, const PlanSpec& spec,
                    uint64_t seed, bool adaptive) {
    curve.validate();
    spec.validate();
    Xoshiro256pp rng(seed);

    Policy anchor;
    if (!adaptive) {
        if (spec.n0_offline == 0) {
            anchor = static_policy(curve, spec);
        } else {
            const double mm = std::max(2.0, double(spec.m));
            OfflineSpec off;
            off.beta = std::clamp(
                std::log(double(spec.n0_offline)) / std::log(mm), 0.0, 1.0);
            off.gamma = double(spec.n0_offline) / std::pow(mm, off.beta);
            PlanSpec sub = spec;
            sub.n0_offline = 0;
            anchor = offline_policy(curve, sub, off);
        }
    }

    Trajectory traj;
    traj.per_period.reserve(size_t(spec.T));
    long long accrued = spec.n0_offline;
    long long covered = 0;
    for (int t = 1; t <= spec.T; ++t) {
        const long long remaining = std::max<long long>(0, spec.m - covered);
        long long a = 0;
        if (remaining > 0) {
            if (t == spec.T) {
                a = last_period_exact(curve, remaining, accrued, spec.delta);
            } else if (adaptive) {
                a = replan_first_decision(curve, remaining, spec.T - t + 1,
                                          spec.delta, accrued);
            } else {
                a = anchor.openings[size_t(t - 1)];
            }
        }
        const double q = curve.success_prob(double(accrued));
        const long long b = binomial_draw(rng, a, q);
        covered += b;
        accrued += a;
        traj.total_opened += a;
        traj.per_period.push_back(
            {a, b, std::max<long long>(0, spec.m - covered), accrued});
    }
    traj.met_target = covered >= spec.m;
    return traj;
}

}  // namespace

Trajectory adaptive_run(const LearningCurve& curve, const PlanSpec& spec,
                        uint64_t seed) {
    return run_loop(curve, spec, seed, true);
}

Trajectory semi_adaptive_run(const LearningCurve& curve, const PlanSpec& spec,
                             uint64_t seed) {
    return run_loop(curve, spec, seed, false);
}

}  // namespace coverplan
