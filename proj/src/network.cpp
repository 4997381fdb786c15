#include "coverplan/network.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "coverplan/core.hpp"
#include "coverplan/parallel.hpp"
#include "coverplan/rng.hpp"
#include "coverplan/stats.hpp"

namespace coverplan {

void BipartiteGraph::validate() const {
    if (n_facilities < 0 || n_customers < 0 || d_star < 1)
        throw std::invalid_argument("BipartiteGraph: bad dimensions");
    if (static_cast<long long>(adjacency.size()) != n_facilities ||
        static_cast<long long>(reverse_adjacency.size()) != n_customers)
        throw std::invalid_argument("BipartiteGraph: adjacency size mismatch");
    for (long long j = 0; j < n_customers; ++j)
        if (static_cast<long long>(reverse_adjacency[size_t(j)].size()) > d_star)
            throw std::invalid_argument("BipartiteGraph: customer degree above d_star");
    // Mutual consistency of the two adjacency maps.
    long long edges_f = 0, edges_c = 0;
    for (const auto& c : adjacency) edges_f += static_cast<long long>(c.size());
    for (const auto& f : reverse_adjacency) edges_c += static_cast<long long>(f.size());
    if (edges_f != edges_c)
        throw std::invalid_argument("BipartiteGraph: edge count mismatch");
}

DegreeReport degree_report(const BipartiteGraph& graph, long long d, long long m,
                           double k_exponent) {
    DegreeReport rep;
    std::vector<char> central_cust(size_t(graph.n_customers), 0);
    for (long long i = 0; i < graph.n_facilities; ++i) {
        rep.max_facility_degree = std::max(rep.max_facility_degree, graph.degree(i));
        if (graph.degree(i) > d) {
            rep.central_facilities.push_back(i);
            for (long long j : graph.adjacency[size_t(i)]) central_cust[size_t(j)] = 1;
        }
    }
    for (long long j = 0; j < graph.n_customers; ++j)
        if (central_cust[size_t(j)]) rep.central_customers.push_back(j);

    const double cap = std::pow(double(m), k_exponent);
    bool ok = double(rep.central_customers.size()) <= cap;
    for (long long i : rep.central_facilities)
        ok = ok && double(graph.degree(i)) <= cap;
    for (long long j = 0; j < graph.n_customers; ++j)
        ok = ok && static_cast<long long>(graph.reverse_adjacency[size_t(j)].size()) <= d;
    rep.assumption_satisfied = ok;
    return rep;
}

double network_buffer(const LearningCurve& curve, long long m, double delta,
                      int d_star, int T) {
    curve.validate();
    if (m < 1 || d_star < 1 || T < 1 || !(delta > 0.0) || !(delta < 1.0))
        throw std::invalid_argument("network_buffer: bad arguments");
    const double z = -normal_quantile(delta / 2.0);
    const double d2 = double(d_star) * double(d_star);
    const double r = detail::effective_rate(curve.r);
    const double c0 = 1.0 / (1.0 - (1.0 - curve.p) * curve.epsilon);
    if (curve.p != 1.0) return z * d2 * std::sqrt(2.0 * curve.epsilon * c0 * double(m));
    const double aT = 1.0 / (1.0 - std::pow(r, T));
    const double zT = (1.0 / std::pow(r, T) - 1.0) / (1.0 - r) *
                      std::pow(1.0 / r, r / (1.0 - r) - double(T) * aT) *
                      std::pow(c0, aT * (1.0 - r));
    return z * d2 *
           std::sqrt(curve.epsilon * zT * std::pow(double(m), aT * (1.0 - r)));
}

double coverage_sum(const BipartiteGraph& graph, const NetworkPlan& plan,
                    const LearningCurve& curve) {
    const int T = plan.T;
    std::vector<long long> opened_in(size_t(T) + 1, 0);
    for (const auto& [i, t] : plan.selections) {
        if (t < 1 || t > T)
            throw std::invalid_argument("coverage_sum: period out of range");
        if (i < 0 || i >= graph.n_facilities)
            throw std::invalid_argument("coverage_sum: facility out of range");
        ++opened_in[size_t(t)];
    }
    std::vector<double> fail(size_t(T) + 1, 0.0);
    long long accrued = 0;
    for (int t = 1; t <= T; ++t) {
        fail[size_t(t)] = curve.failure_prob(double(accrued));
        accrued += opened_in[size_t(t)];
    }
    // Product of failures per customer over its incident selections.
    std::vector<double> miss(size_t(graph.n_customers), 1.0);
    std::vector<char> touched(size_t(graph.n_customers), 0);
    for (const auto& [i, t] : plan.selections) {
        for (long long j : graph.adjacency[size_t(i)]) {
            miss[size_t(j)] *= fail[size_t(t)];
            touched[size_t(j)] = 1;
        }
    }
    double total = 0.0;
    for (long long j = 0; j < graph.n_customers; ++j)
        if (touched[size_t(j)]) total += 1.0 - miss[size_t(j)];
    return total;
}

namespace detail {

namespace {

struct SortedDegrees {
    std::vector<double> deg;     // nondecreasing
    std::vector<long long> order;  // sorted position -> original index
    std::vector<double> prefix;  // prefix[k] = sum of first k sorted degrees
};

SortedDegrees sort_degrees(const std::vector<double>& degrees) {
    SortedDegrees s;
    const size_t n = degrees.size();
    s.order.resize(n);
    std::iota(s.order.begin(), s.order.end(), 0LL);
    std::sort(s.order.begin(), s.order.end(), [&](long long a, long long b) {
        if (degrees[size_t(a)] != degrees[size_t(b)])
            return degrees[size_t(a)] < degrees[size_t(b)];
        return a < b;
    });
    s.deg.resize(n);
    for (size_t k = 0; k < n; ++k) s.deg[k] = degrees[size_t(s.order[k])];
    s.prefix.assign(n + 1, 0.0);
    for (size_t k = 0; k < n; ++k) s.prefix[k + 1] = s.prefix[k] + s.deg[k];
    return s;
}

struct ThresholdSolution {
    double cost = 0.0;
    std::vector<long long> thresholds;  // n0..nT
};

// Minimal total expected-failure cost over threshold sequences with the given
// n0; one shortest-path layer per period boundary.
ThresholdSolution solve_thresholds(const SortedDegrees& s,
                                   const LearningCurve& curve, long long n0,
                                   int T) {
    const long long n = static_cast<long long>(s.deg.size());
    const double eps = curve.epsilon;
    const double miss_const = eps * (1.0 - curve.p);
    const double r = curve.r;
    auto arc = [&](long long k, long long k2) {
        return eps * (s.prefix[size_t(k2)] - s.prefix[size_t(k)]) /
                   std::pow(double(k2 - n0 + 1), r) +
               double(k2 - k) * miss_const;
    };

    const size_t width = size_t(n - n0 + 1);
    std::vector<double> f(width);
    std::vector<std::vector<int>> back(size_t(std::max(0, T - 2)),
                                       std::vector<int>(width, 0));
    for (size_t idx = 0; idx < width; ++idx)
        f[idx] = arc(n0, n0 + static_cast<long long>(idx));
    std::vector<double> g(width);
    for (int layer = 0; layer + 2 < T; ++layer) {
        for (size_t idx2 = 0; idx2 < width; ++idx2) {
            const long long k2 = n0 + static_cast<long long>(idx2);
            const double denom = std::pow(double(k2 - n0 + 1), r);
            double best = std::numeric_limits<double>::infinity();
            int arg = 0;
            for (size_t idx = 0; idx <= idx2; ++idx) {
                const long long k = n0 + static_cast<long long>(idx);
                const double c =
                    f[idx] + eps * (s.prefix[size_t(k2)] - s.prefix[size_t(k)]) / denom +
                    double(k2 - k) * miss_const;
                if (c < best) {
                    best = c;
                    arg = int(idx);
                }
            }
            g[idx2] = best;
            back[size_t(layer)][idx2] = arg;
        }
        f.swap(g);
    }
    // Final arc into n_T = n.
    double best = std::numeric_limits<double>::infinity();
    int arg = 0;
    for (size_t idx = 0; idx < width; ++idx) {
        const double c = f[idx] + arc(n0 + static_cast<long long>(idx), n);
        if (c < best) {
            best = c;
            arg = int(idx);
        }
    }

    ThresholdSolution sol;
    sol.cost = best;
    sol.thresholds.assign(size_t(T) + 1, n);
    sol.thresholds[0] = n0;
    sol.thresholds[size_t(T)] = n;
    if (T >= 2) {
        int idx = arg;
        sol.thresholds[size_t(T - 1)] = n0 + idx;
        for (int layer = T - 3; layer >= 0; --layer) {
            idx = back[size_t(layer)][size_t(idx)];
            sol.thresholds[size_t(layer) + 1] = n0 + idx;
        }
    }
    return sol;
}

double coverage_at(const SortedDegrees& s, const LearningCurve& curve,
                   long long n0, int T, ThresholdSolution* sol_out) {
    ThresholdSolution sol = solve_thresholds(s, curve, n0, T);
    const double total_deg = s.prefix.back() - s.prefix[size_t(n0)];
    if (sol_out) *sol_out = std::move(sol);
    return total_deg - (sol_out ? sol_out->cost : sol.cost);
}

}  // namespace

StarPlan star_solve_target(const std::vector<double>& degrees,
                           const LearningCurve& curve, double target, int T) {
    curve.validate();
    if (T < 1) throw std::invalid_argument("star_solve: T must be >= 1");
    const long long n = static_cast<long long>(degrees.size());
    const SortedDegrees s = sort_degrees(degrees);

    auto feasible = [&](long long n0, ThresholdSolution* sol) {
        return coverage_at(s, curve, n0, T, sol) >= target;
    };

    ThresholdSolution sol;
    if (!feasible(0, &sol))
        throw Infeasible("star_solve: infeasible even with every facility opened");
    // Coverage decreases in n0; bisect for the largest feasible value.
    long long lo = 0, hi = n + 1;
    while (hi - lo > 1) {
        const long long mid = lo + (hi - lo) / 2;
        if (mid <= n && feasible(mid, nullptr))
            lo = mid;
        else
            hi = mid;
    }
    feasible(lo, &sol);

    StarPlan plan;
    plan.thresholds = sol.thresholds;
    plan.order = s.order;
    plan.dp_cost = sol.cost;
    return plan;
}

}  // namespace detail

StarPlan star_solve(const std::vector<double>& degrees, const LearningCurve& curve,
                    long long m, double delta, int d_star, int T) {
    const double target = double(m) + network_buffer(curve, m, delta, d_star, T);
    return detail::star_solve_target(degrees, curve, target, T);
}

NetworkPlan star_to_plan(const StarPlan& star, int T) {
    NetworkPlan plan;
    plan.T = T;
    for (int t = 1; t <= T; ++t) {
        for (long long k = star.thresholds[size_t(t - 1)];
             k < star.thresholds[size_t(t)]; ++k)
            plan.selections.emplace_back(star.order[size_t(k)], t);
    }
    std::sort(plan.selections.begin(), plan.selections.end(),
              [](const auto& a, const auto& b) {
                  if (a.second != b.second) return a.second < b.second;
                  return a.first < b.first;
              });
    return plan;
}

NetworkPlan heuristic_solve(const BipartiteGraph& graph, const LearningCurve& curve,
                            long long m, double delta, int T,
                            const HeuristicOptions& opts) {
    graph.validate();
    curve.validate();
    const double target = double(m) + network_buffer(curve, m, delta, graph.d_star, T);

    std::vector<double> base_deg(size_t(graph.n_facilities));
    for (long long i = 0; i < graph.n_facilities; ++i)
        base_deg[size_t(i)] = double(graph.degree(i));

    const int grid = std::max(1, opts.weight_grid);
    const double w_lo = 1.0 / double(graph.d_star);
    std::vector<double> weights(static_cast<size_t>(grid));
    for (int g = 0; g < grid; ++g)
        weights[size_t(g)] =
            grid == 1 ? w_lo : w_lo + (1.0 - w_lo) * double(g) / double(grid - 1);

    struct GridResult {
        bool feasible = false;
        StarPlan plan;
    };
    std::vector<GridResult> results(static_cast<size_t>(grid));
    parallel_for(
        grid,
        [&](long long g) {
            std::vector<double> wd(base_deg);
            for (auto& d : wd) d *= weights[size_t(g)];
            try {
                results[size_t(g)].plan =
                    detail::star_solve_target(wd, curve, target, T);
                results[size_t(g)].feasible = true;
            } catch (const Infeasible&) {
                results[size_t(g)].feasible = false;
            }
        },
        opts.threads);

    // Line-search objective: keep the largest star objective (ties to the
    // smallest weight by scan order).
    int winner = -1;
    long long winner_openings = -1;
    for (int g = 0; g < grid; ++g) {
        if (!results[size_t(g)].feasible) continue;
        const long long op = results[size_t(g)].plan.openings();
        if (op > winner_openings) {
            winner_openings = op;
            winner = g;
        }
    }
    if (winner < 0)
        throw Infeasible("heuristic_solve: star relaxation infeasible for all weights");

    NetworkPlan plan = star_to_plan(results[size_t(winner)].plan, T);

    // The threshold model can sit marginally below the true constraint; open
    // the largest unopened facilities in the final period until it holds.
    if (coverage_sum(graph, plan, curve) < target) {
        std::vector<char> used(size_t(graph.n_facilities), 0);
        for (const auto& [i, t] : plan.selections) used[size_t(i)] = 1;
        std::vector<long long> spare;
        for (long long i = 0; i < graph.n_facilities; ++i)
            if (!used[size_t(i)]) spare.push_back(i);
        std::sort(spare.begin(), spare.end(), [&](long long a, long long b) {
            if (graph.degree(a) != graph.degree(b))
                return graph.degree(a) > graph.degree(b);
            return a < b;
        });
        size_t next = 0;
        while (coverage_sum(graph, plan, curve) < target) {
            if (next >= spare.size())
                throw Infeasible("heuristic_solve: cannot meet the coverage target");
            plan.selections.emplace_back(spare[next++], T);
        }
    }

    // Greedy pruning: latest period first, smallest degree first; stop at the
    // first removal that would break the constraint.
    std::vector<size_t> cand(plan.selections.size());
    std::iota(cand.begin(), cand.end(), size_t(0));
    std::sort(cand.begin(), cand.end(), [&](size_t a, size_t b) {
        const auto& sa = plan.selections[a];
        const auto& sb = plan.selections[b];
        if (sa.second != sb.second) return sa.second > sb.second;
        if (graph.degree(sa.first) != graph.degree(sb.first))
            return graph.degree(sa.first) < graph.degree(sb.first);
        return sa.first < sb.first;
    });
    std::vector<char> removed(plan.selections.size(), 0);
    for (size_t idx : cand) {
        NetworkPlan trial;
        trial.T = T;
        for (size_t k = 0; k < plan.selections.size(); ++k)
            if (!removed[k] && k != idx) trial.selections.push_back(plan.selections[k]);
        if (coverage_sum(graph, trial, curve) >= target)
            removed[idx] = 1;
        else
            break;
    }
    NetworkPlan pruned;
    pruned.T = T;
    for (size_t k = 0; k < plan.selections.size(); ++k)
        if (!removed[k]) pruned.selections.push_back(plan.selections[k]);
    std::sort(pruned.selections.begin(), pruned.selections.end(),
              [](const auto& a, const auto& b) {
                  if (a.second != b.second) return a.second < b.second;
                  return a.first < b.first;
              });
    return pruned;
}

namespace {

long long uniform_below(Xoshiro256pp& rng, long long n) {
    // Rejection below the largest multiple of n to avoid modulo bias.
    const uint64_t bound = uint64_t(n);
    const uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    uint64_t x;
    do {
        x = rng.next();
    } while (x >= limit);
    return static_cast<long long>(x % bound);
}

}  // namespace

BipartiteGraph gen_graph(long long m, double eta, double mu, int d_star,
                         uint64_t seed) {
    if (!(eta > 0.0) || !(mu > 0.0) || d_star < 1 || m < 1)
        throw std::invalid_argument("gen_graph: bad arguments");
    BipartiteGraph g;
    g.n_facilities = static_cast<long long>(std::ceil(eta * double(m)));
    g.n_customers = static_cast<long long>(std::ceil(mu * double(m)));
    g.d_star = d_star;
    if (g.n_facilities * d_star < g.n_customers)
        throw Infeasible("gen_graph: not enough facility capacity for one edge per customer");

    g.adjacency.assign(size_t(g.n_facilities), {});
    g.reverse_adjacency.assign(size_t(g.n_customers), {});
    std::vector<int> fac_deg(size_t(g.n_facilities), 0);

    Xoshiro256pp rng(seed);
    const long long attempt_cap = 100 * g.n_customers * d_star;
    long long attempts = 0;
    for (long long j = 0; j < g.n_customers; ++j) {
        const int dj = 1 + int(uniform_below(rng, d_star));
        for (int s = 0; s < dj; ++s) {
            long long chosen = -1;
            for (int tr = 0; tr < 100; ++tr) {
                ++attempts;
                const long long i = uniform_below(rng, g.n_facilities);
                if (fac_deg[size_t(i)] >= d_star) continue;
                bool dup = false;
                for (long long jj : g.adjacency[size_t(i)])
                    if (jj == j) {
                        dup = true;
                        break;
                    }
                if (!dup) {
                    chosen = i;
                    break;
                }
            }
            if (chosen < 0 && s == 0) {
                // First stub must land somewhere if capacity exists.
                const long long start = uniform_below(rng, g.n_facilities);
                for (long long off = 0; off < g.n_facilities; ++off) {
                    const long long i = (start + off) % g.n_facilities;
                    if (fac_deg[size_t(i)] >= d_star) continue;
                    bool dup = false;
                    for (long long jj : g.adjacency[size_t(i)])
                        if (jj == j) {
                            dup = true;
                            break;
                        }
                    if (!dup) {
                        chosen = i;
                        break;
                    }
                }
                if (chosen < 0)
                    throw Infeasible("gen_graph: could not place a required edge");
            }
            if (attempts > attempt_cap)
                throw NoConvergence("gen_graph: attempt cap exceeded");
            if (chosen >= 0) {
                g.adjacency[size_t(chosen)].push_back(j);
                g.reverse_adjacency[size_t(j)].push_back(chosen);
                ++fac_deg[size_t(chosen)];
            }
        }
    }
    for (auto& v : g.adjacency) std::sort(v.begin(), v.end());
    for (auto& v : g.reverse_adjacency) std::sort(v.begin(), v.end());
    return g;
}

SimReport simulate_network(const BipartiteGraph& graph, const NetworkPlan& plan,
                           const LearningCurve& curve, long long m,
                           long long replications, uint64_t seed) {
    graph.validate();
    curve.validate();
    if (replications < 1)
        throw std::invalid_argument("simulate_network: replications must be >= 1");

    std::vector<std::pair<long long, int>> sel = plan.selections;
    std::sort(sel.begin(), sel.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second < b.second;
        return a.first < b.first;
    });
    std::vector<long long> opened_in(size_t(plan.T) + 1, 0);
    for (const auto& [i, t] : sel) {
        (void)i;
        ++opened_in[size_t(t)];
    }
    std::vector<double> fail(size_t(plan.T) + 1, 0.0);
    long long accrued = 0;
    for (int t = 1; t <= plan.T; ++t) {
        fail[size_t(t)] = curve.failure_prob(double(accrued));
        accrued += opened_in[size_t(t)];
    }

    std::vector<unsigned char> hit(size_t(replications), 0);
    std::vector<long long> covered_count(size_t(replications), 0);
    parallel_for(replications, [&](long long rep) {
        Xoshiro256pp rng(substream_seed(seed, uint64_t(rep)));
        std::vector<char> covered(size_t(graph.n_customers), 0);
        for (const auto& [i, t] : sel) {
            const bool success = rng.uniform() >= fail[size_t(t)];
            if (success)
                for (long long j : graph.adjacency[size_t(i)]) covered[size_t(j)] = 1;
        }
        long long c = 0;
        for (char v : covered) c += v;
        covered_count[size_t(rep)] = c;
        hit[size_t(rep)] = c >= m ? 1 : 0;
    });

    long long hits = 0;
    long long covered_total = 0;
    for (long long rep = 0; rep < replications; ++rep) {
        hits += hit[size_t(rep)];
        covered_total += covered_count[size_t(rep)];
    }
    SimReport rep;
    rep.replications = replications;
    rep.seed = seed;
    rep.feasibility_estimate = double(hits) / double(replications);
    const auto ci = wilson_interval(hits, replications);
    rep.feasibility_ci95_lo = ci.first;
    rep.feasibility_ci95_hi = ci.second;
    rep.mean_openings = double(plan.total_openings());
    rep.mean_regret = double(covered_total) / double(replications) - double(m);
    return rep;
}

std::string graph_to_json(const BipartiteGraph& graph) {
    nlohmann::json j;
    j["n_facilities"] = graph.n_facilities;
    j["n_customers"] = graph.n_customers;
    j["d_star"] = graph.d_star;
    auto edges = nlohmann::json::array();
    for (long long i = 0; i < graph.n_facilities; ++i)
        for (long long c : graph.adjacency[size_t(i)])
            edges.push_back({i, c});
    j["edges"] = std::move(edges);
    return j.dump();
}

BipartiteGraph graph_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    BipartiteGraph g;
    g.n_facilities = j.at("n_facilities").get<long long>();
    g.n_customers = j.at("n_customers").get<long long>();
    g.d_star = j.at("d_star").get<int>();
    g.adjacency.assign(size_t(g.n_facilities), {});
    g.reverse_adjacency.assign(size_t(g.n_customers), {});
    for (const auto& e : j.at("edges")) {
        const long long i = e.at(0).get<long long>();
        const long long c = e.at(1).get<long long>();
        if (i < 0 || i >= g.n_facilities || c < 0 || c >= g.n_customers)
            throw std::invalid_argument("graph_from_json: edge out of range");
        g.adjacency[size_t(i)].push_back(c);
        g.reverse_adjacency[size_t(c)].push_back(i);
    }
    for (auto& v : g.adjacency) std::sort(v.begin(), v.end());
    for (auto& v : g.reverse_adjacency) std::sort(v.begin(), v.end());
    g.validate();
    return g;
}

std::string plan_to_json(const NetworkPlan& plan) {
    nlohmann::json j;
    j["T"] = plan.T;
    auto sel = nlohmann::json::array();
    for (const auto& [i, t] : plan.selections) sel.push_back({i, t});
    j["selections"] = std::move(sel);
    return j.dump();
}

NetworkPlan plan_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    NetworkPlan p;
    p.T = j.at("T").get<int>();
    for (const auto& e : j.at("selections"))
        p.selections.emplace_back(e.at(0).get<long long>(), e.at(1).get<int>());
    return p;
}

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << text;
}

}  // namespace

void save_graph(const BipartiteGraph& graph, const std::string& path) {
    write_file(path, graph_to_json(graph));
}

BipartiteGraph load_graph(const std::string& path) {
    return graph_from_json(read_file(path));
}

void save_plan(const NetworkPlan& plan, const std::string& path) {
    write_file(path, plan_to_json(plan));
}

NetworkPlan load_plan(const std::string& path) {
    return plan_from_json(read_file(path));
}

}  // namespace coverplan
