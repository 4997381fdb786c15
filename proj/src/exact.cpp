#include "coverplan/exact.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <stdexcept>

#include "coverplan/core.hpp"
#include "coverplan/parallel.hpp"
#include "coverplan/stats.hpp"

namespace coverplan {

namespace {

// Convolve the cumulative-success distribution (truncated at m) with
// Binomial(a, q). dist has m + 1 slots; slot m is absorbing.
void convolve_period(const std::vector<double>& dist, long long a, double q,
                     long long m, std::vector<double>& out) {
    const size_t mm = static_cast<size_t>(m);
    out.assign(mm + 1, 0.0);
    out[mm] = dist[mm];
    if (a == 0) {
        for (size_t j = 0; j < mm; ++j) out[j] += dist[j];
        return;
    }
    const std::vector<double> pmf = binomial_pmf_row(a, q);
    // Suffix sums of the pmf for the absorbed mass.
    std::vector<double> suffix(pmf.size() + 1, 0.0);
    for (size_t k = pmf.size(); k-- > 0;) suffix[k] = suffix[k + 1] + pmf[k];
    for (size_t j = 0; j < mm; ++j) {
        const double dj = dist[j];
        if (dj == 0.0) continue;
        const size_t room = mm - 1 - j;
        const size_t kmax = std::min(static_cast<size_t>(a), room);
        for (size_t k = 0; k <= kmax; ++k) out[j + k] += dj * pmf[k];
        if (static_cast<size_t>(a) > room) out[mm] += dj * suffix[room + 1];
    }
}

double success_prob_at(const LearningCurve& curve, long long accrued) {
    return curve.success_prob(double(accrued));
}

// P(final total >= m) given the pre-final distribution and a final-period
// Binomial(aT, q).
double final_tail(const std::vector<double>& dist, long long m, long long aT,
                  double q) {
    const size_t mm = static_cast<size_t>(m);
    double total = dist[mm];
    if (aT <= 0) return total;
    const std::vector<double> pmf = binomial_pmf_row(aT, q);
    std::vector<double> suffix(pmf.size() + 1, 0.0);
    for (size_t k = pmf.size(); k-- > 0;) suffix[k] = suffix[k + 1] + pmf[k];
    for (size_t j = 0; j < mm; ++j) {
        if (dist[j] == 0.0) continue;
        const size_t need = mm - j;
        if (need < pmf.size()) total += dist[j] * suffix[need];
    }
    return total;
}

struct Candidate {
    long long total = -1;
    std::vector<long long> schedule;

    bool better_than(const Candidate& other) const {
        if (other.total < 0) return true;
        if (total != other.total) return total < other.total;
        return schedule < other.schedule;
    }
};

}  // namespace

double chance_prob(const std::vector<long long>& openings,
                   const LearningCurve& curve, const PlanSpec& spec) {
    curve.validate();
    spec.validate();
    if (int(openings.size()) != spec.T)
        throw std::invalid_argument("chance_prob: schedule length must equal T");
    for (long long a : openings)
        if (a < 0) throw std::invalid_argument("chance_prob: openings must be >= 0");

    std::vector<double> dist(static_cast<size_t>(spec.m) + 1, 0.0);
    std::vector<double> next(dist.size(), 0.0);
    dist[0] = 1.0;
    long long accrued = spec.n0_offline;
    for (long long a : openings) {
        convolve_period(dist, a, success_prob_at(curve, accrued), spec.m, next);
        dist.swap(next);
        accrued += a;
    }
    return dist[static_cast<size_t>(spec.m)];
}

Policy exact_policy(const LearningCurve& curve, const PlanSpec& spec,
                    const ExactOptions& opts) {
    curve.validate();
    spec.validate();
    if (spec.m > opts.m_cap)
        throw std::invalid_argument("exact_policy: m exceeds the configured cap");
    if (spec.T > 6)
        throw std::invalid_argument("exact_policy: T must be at most 6");

    const Policy anchor = static_policy(curve, spec);
    const int T = spec.T;

    std::vector<long long> lo(size_t(T - 1)), hi(size_t(T - 1));
    for (int t = 0; t < T - 1; ++t) {
        long long w = opts.window;
        if (w <= 0) w = T >= 5 ? 5 : std::max<long long>(10, 2 * anchor.openings[size_t(t)]);
        lo[size_t(t)] = std::max<long long>(0, anchor.openings[size_t(t)] - w);
        hi[size_t(t)] = anchor.openings[size_t(t)] + w;
    }

    // Minimal feasible final period for a given prefix distribution, found by
    // monotone binary search; the single-period quantile is a valid upper
    // bound since the final draw alone can reach m.
    auto best_final = [&](const std::vector<double>& dist, long long accrued,
                          long long* out) -> bool {
        const double q = success_prob_at(curve, accrued);
        if (dist[size_t(spec.m)] >= 1.0 - spec.delta) {
            *out = 0;
            return true;
        }
        if (!(q > 0.0)) return false;
        long long bhi = min_trials(q, spec.m, spec.delta);
        if (final_tail(dist, spec.m, bhi, q) < 1.0 - spec.delta) return false;
        long long blo = 0;
        while (bhi - blo > 1) {
            const long long mid = blo + (bhi - blo) / 2;
            if (final_tail(dist, spec.m, mid, q) >= 1.0 - spec.delta)
                bhi = mid;
            else
                blo = mid;
        }
        *out = bhi;
        return true;
    };

    // Depth-first over the leading coordinates with the prefix distribution
    // carried along; the outermost coordinate is parallelized.
    auto search_from = [&](long long a1, Candidate& best) {
        std::vector<std::vector<double>> stack(static_cast<size_t>(T));
        stack[0].assign(size_t(spec.m) + 1, 0.0);
        stack[0][0] = 1.0;
        std::vector<long long> prefix(static_cast<size_t>(T - 1), 0);

        auto rec = [&](auto&& self, int depth, long long accrued) -> void {
            if (depth == T - 1) {
                long long aT = 0;
                if (!best_final(stack[size_t(depth)], accrued, &aT)) return;
                long long total = aT;
                for (long long v : prefix) total += v;
                Candidate cand;
                cand.total = total;
                cand.schedule = prefix;
                cand.schedule.push_back(aT);
                if (cand.better_than(best)) best = std::move(cand);
                return;
            }
            const long long from = depth == 0 ? a1 : lo[size_t(depth)];
            const long long to = depth == 0 ? a1 : hi[size_t(depth)];
            for (long long a = from; a <= to; ++a) {
                prefix[size_t(depth)] = a;
                convolve_period(stack[size_t(depth)], a,
                                success_prob_at(curve, accrued), spec.m,
                                stack[size_t(depth) + 1]);
                self(self, depth + 1, accrued + a);
            }
        };
        rec(rec, 0, spec.n0_offline);
    };

    const long long span = hi[0] - lo[0] + 1;
    std::vector<Candidate> per_a1(static_cast<size_t>(span));
    parallel_for(
        span, [&](long long i) { search_from(lo[0] + i, per_a1[size_t(i)]); },
        opts.threads);

    Candidate best;
    for (const auto& c : per_a1)
        if (c.total >= 0 && c.better_than(best)) best = c;
    if (best.total < 0)
        throw Infeasible("exact_policy: no feasible point in the search box");

    Policy pol;
    pol.provenance = Provenance::Exact;
    pol.openings = best.schedule;
    pol.values.assign(best.schedule.begin(), best.schedule.end());
    pol.ell = 0.0;
    return pol;
}

}  // namespace coverplan
