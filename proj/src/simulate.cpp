#include "coverplan/simulate.hpp"

#include <stdexcept>

#include "coverplan/core.hpp"
#include "coverplan/parallel.hpp"
#include "coverplan/rng.hpp"
#include "coverplan/stats.hpp"

namespace coverplan {

SimOutcome simulate_policy(const Policy& policy, const LearningCurve& curve,
                           const PlanSpec& spec, uint64_t seed) {
    curve.validate();
    spec.validate();
    if (int(policy.openings.size()) != spec.T)
        throw std::invalid_argument("simulate_policy: schedule length must equal T");

    Xoshiro256pp rng(seed);
    SimOutcome out;
    out.per_period_successes.reserve(policy.openings.size());
    long long accrued = spec.n0_offline;
    for (long long a : policy.openings) {
        const double q = curve.success_prob(double(accrued));
        const long long b = binomial_draw(rng, a, q);
        out.per_period_successes.push_back(b);
        out.total_opened += a;
        out.total_succeeded += b;
        accrued += a;
    }
    out.met_target = out.total_succeeded >= spec.m;
    return out;
}

SimReport estimate_feasibility(const Policy& policy, const LearningCurve& curve,
                               const PlanSpec& spec, long long replications,
                               uint64_t seed) {
    if (replications < 1)
        throw std::invalid_argument("estimate_feasibility: replications must be >= 1");

    std::vector<unsigned char> met(static_cast<size_t>(replications), 0);
    parallel_for(replications, [&](long long i) {
        const SimOutcome o =
            simulate_policy(policy, curve, spec, substream_seed(seed, uint64_t(i)));
        met[size_t(i)] = o.met_target ? 1 : 0;
    });

    long long hits = 0;
    for (unsigned char f : met) hits += f;

    SimReport rep;
    rep.replications = replications;
    rep.seed = seed;
    rep.feasibility_estimate = double(hits) / double(replications);
    const auto ci = wilson_interval(hits, replications);
    rep.feasibility_ci95_lo = ci.first;
    rep.feasibility_ci95_hi = ci.second;
    rep.mean_openings = double(policy.total());
    rep.mean_regret =
        rep.mean_openings - double(benchmarks(curve, spec).fully_learned);
    return rep;
}

}  // namespace coverplan
