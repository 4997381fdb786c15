#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "coverplan/simulate.hpp"
#include "coverplan/types.hpp"

namespace coverplan {

/// Facility-customer bipartite graph. Customer degrees are capped by d_star;
/// facilities above d_star are the central set reported by degree_report.
struct BipartiteGraph {
    long long n_facilities = 0;
    long long n_customers = 0;
    int d_star = 1;
    std::vector<std::vector<long long>> adjacency;          // facility -> customers
    std::vector<std::vector<long long>> reverse_adjacency;  // customer -> facilities

    void validate() const;
    long long degree(long long facility) const {
        return static_cast<long long>(adjacency[size_t(facility)].size());
    }
};

struct DegreeReport {
    std::vector<long long> central_facilities;
    std::vector<long long> central_customers;
    long long max_facility_degree = 0;
    bool assumption_satisfied = false;
};

/// Central sets for cutoff d and the degree condition checked at target m
/// with exponent k.
DegreeReport degree_report(const BipartiteGraph& graph, long long d, long long m,
                           double k_exponent);

/// Binary facility-period selections, periods in 1..T.
struct NetworkPlan {
    int T = 1;
    std::vector<std::pair<long long, int>> selections;

    long long total_openings() const {
        return static_cast<long long>(selections.size());
    }
};

/// Threshold-form plan on facilities sorted by nondecreasing degree:
/// sorted position i is opened in period t iff thresholds[t-1] < i <=
/// thresholds[t]. `order` maps sorted positions back to input indices.
struct StarPlan {
    std::vector<long long> thresholds;  // n0 <= n1 <= ... <= nT = n
    std::vector<long long> order;
    double dp_cost = 0.0;

    long long openings() const { return thresholds.back() - thresholds.front(); }
};

/// Chance-constraint buffer for the networked model.
double network_buffer(const LearningCurve& curve, long long m, double delta,
                      int d_star, int T);

/// Deterministic coverage of a plan: sum over customers of one minus the
/// product of per-incident-selection failure probabilities, failures evaluated
/// at the count of tentative openings accrued before each period.
double coverage_sum(const BipartiteGraph& graph, const NetworkPlan& plan,
                    const LearningCurve& curve);

namespace detail {

/// Threshold solver against an explicit coverage requirement. Facilities are
/// sorted by (degree, index); for each candidate n0 the inner threshold
/// problem is a shortest path over period boundaries and the largest feasible
/// n0 is located by bisection (coverage is monotone decreasing in n0).
StarPlan star_solve_target(const std::vector<double>& degrees,
                           const LearningCurve& curve, double target, int T);

}  // namespace detail

/// detail::star_solve_target with the requirement m + network_buffer(m).
StarPlan star_solve(const std::vector<double>& degrees, const LearningCurve& curve,
                    long long m, double delta, int d_star, int T);

/// Threshold plan expanded to facility-period selections.
NetworkPlan star_to_plan(const StarPlan& star, int T);

struct HeuristicOptions {
    int weight_grid = 25;
    int threads = 0;
};

/**
 * General-graph solver: decompose to a weighted star (one artificial customer
 * per edge, weight w), line-search w over [1/d_star, 1] keeping the largest
 * star objective, map the winning threshold plan back to selections, and
 * greedily prune (latest period first, then smallest degree) while the
 * deterministic coverage constraint holds.
 */
NetworkPlan heuristic_solve(const BipartiteGraph& graph, const LearningCurve& curve,
                            long long m, double delta, int T,
                            const HeuristicOptions& opts = {});

/**
 * Synthetic instance with ceil(eta m) facilities and ceil(mu m) customers.
 * Customer degrees are uniform on 1..d_star; stubs are matched to uniformly
 * drawn facilities with capacity d_star, rejecting duplicates. Every customer
 * receives at least one edge when capacity permits.
 */
BipartiteGraph gen_graph(long long m, double eta, double mu, int d_star,
                         uint64_t seed);

/// Monte Carlo coverage of a plan; mean_regret reports mean covered customers
/// minus the target m.
SimReport simulate_network(const BipartiteGraph& graph, const NetworkPlan& plan,
                           const LearningCurve& curve, long long m,
                           long long replications, uint64_t seed);

// JSON serialization (schema documented in the README).
std::string graph_to_json(const BipartiteGraph& graph);
BipartiteGraph graph_from_json(const std::string& text);
std::string plan_to_json(const NetworkPlan& plan);
NetworkPlan plan_from_json(const std::string& text);
void save_graph(const BipartiteGraph& graph, const std::string& path);
BipartiteGraph load_graph(const std::string& path);
void save_plan(const NetworkPlan& plan, const std::string& path);
NetworkPlan load_plan(const std::string& path);

}  // namespace coverplan
