// Command-line front end: planning, exact solving, Monte Carlo validation,
// adaptive runs, networked instances, and the learning-process simulator.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "coverplan/adaptive.hpp"
#include "coverplan/core.hpp"
#include "coverplan/exact.hpp"
#include "coverplan/learnsim.hpp"
#include "coverplan/network.hpp"
#include "coverplan/parallel.hpp"
#include "coverplan/rng.hpp"
#include "coverplan/simulate.hpp"
#include "coverplan/stats.hpp"

namespace fs = std::filesystem;
using namespace coverplan;

namespace {

constexpr uint64_t kDefaultSeed = 0xC0FFEE;
constexpr const char* kCsvHeader = "# coverplan-csv v1\n";

std::string fmt(double x, int digits = 6) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, x);
    return buf;
}

struct Options {
    double epsilon = 0.4, p = 1.0, r = 0.5, delta = 0.01;
    long long m = -1;
    int T = 2;
    long long n0 = 0;
    uint64_t seed = kDefaultSeed;
    long long replications = 10000;
    long long window = 0;
    double eta = 3.0, mu = 1.5;
    int dstar = 3;
    int wgrid = 25;
    std::string out_dir;
    std::string format = "text";
    std::string config_path;
    bool dump = false;
    // learnsim
    long long facilities = 10000;
    int dim = 5;
    std::string model = "default";
    double scale = 4.0, gap = 0.5;
    double exploration = 0.05;
    std::string schedule = "40,60,90,135,200,300,450";
    // network
    std::string graph_path;
    std::string solver = "auto";
    bool save_graph_flag = false;
    // table1
    bool skip_exact = false;
};

LearningCurve make_curve(const Options& o) {
    LearningCurve c{o.epsilon, o.p, o.r};
    c.validate();
    return c;
}

PlanSpec make_spec(const Options& o) {
    if (o.m < 1) throw std::invalid_argument("--m is required and must be >= 1");
    PlanSpec s{o.m, o.T, o.delta, o.n0};
    s.validate();
    return s;
}

void write_artifact(const Options& o, const std::string& name,
                    const std::string& body) {
    if (o.out_dir.empty()) return;
    fs::create_directories(o.out_dir);
    std::ofstream f(fs::path(o.out_dir) / name, std::ios::binary);
    f << body;
}

std::vector<long long> parse_schedule(const std::string& text) {
    std::vector<long long> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (!tok.empty()) out.push_back(std::stoll(tok));
    }
    if (out.empty()) throw std::invalid_argument("empty --schedule");
    return out;
}

// Flags override values from the JSON config file.
void apply_config(CLI::App* cmd, const std::string& path) {
    if (path.empty()) return;
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file " + path);
    nlohmann::json j;
    in >> j;
    for (auto it = j.begin(); it != j.end(); ++it) {
        CLI::Option* opt = cmd->get_option_no_throw("--" + it.key());
        if (opt == nullptr || opt->count() > 0) continue;
        std::string value =
            it.value().is_string() ? it.value().get<std::string>() : it.value().dump();
        opt->clear();
        opt->add_result(value);
        opt->run_callback();
    }
}

void add_curve_opts(CLI::App* cmd, Options& o) {
    cmd->add_option("--epsilon", o.epsilon, "Initial error in (0, 1]");
    cmd->add_option("--p", o.p, "Learnable fraction in [0, 1]");
    cmd->add_option("--r", o.r, "Learning rate exponent (> 0)");
    cmd->add_option("--delta", o.delta, "Risk level in (0, 1)");
    cmd->add_option("--config", o.config_path, "JSON config file (flags override)");
    cmd->add_option("--out", o.out_dir, "Directory for CSV/JSON artifacts");
    cmd->add_option("--format", o.format, "Report format: text or json")
        ->check(CLI::IsMember({"text", "json", "csv"}));
}

void add_plan_opts(CLI::App* cmd, Options& o) {
    cmd->add_option("--m", o.m, "Coverage target (required)");
    cmd->add_option("--T", o.T, "Horizon, at least 2");
    cmd->add_option("--n0", o.n0, "Offline sample size");
}

struct MultiRunReport {
    double mean_regret = 0.0, regret_ci_lo = 0.0, regret_ci_hi = 0.0;
    double feasibility = 0.0, feas_lo = 0.0, feas_hi = 0.0;
    double mean_openings = 0.0;
    long long runs = 0;
};

template <class RunFn>
MultiRunReport run_many(const LearningCurve& curve, const PlanSpec& spec,
                        long long runs, uint64_t seed, RunFn run) {
    std::vector<long long> totals(size_t(runs), 0);
    std::vector<unsigned char> met(size_t(runs), 0);
    parallel_for(runs, [&](long long i) {
        const Trajectory t = run(curve, spec, substream_seed(seed, uint64_t(i)));
        totals[size_t(i)] = t.total_opened;
        met[size_t(i)] = t.met_target ? 1 : 0;
    });
    const long long fully = benchmarks(curve, spec).fully_learned;
    MultiRunReport rep;
    rep.runs = runs;
    long long hits = 0;
    double sum = 0.0;
    for (long long i = 0; i < runs; ++i) {
        hits += met[size_t(i)];
        sum += double(totals[size_t(i)]);
    }
    rep.mean_openings = sum / double(runs);
    rep.mean_regret = rep.mean_openings - double(fully);
    double var = 0.0;
    for (long long i = 0; i < runs; ++i) {
        const double d = double(totals[size_t(i)]) - rep.mean_openings;
        var += d * d;
    }
    var = runs > 1 ? var / double(runs - 1) : 0.0;
    const double half = 1.959963984540054 * std::sqrt(var / double(runs));
    rep.regret_ci_lo = rep.mean_regret - half;
    rep.regret_ci_hi = rep.mean_regret + half;
    rep.feasibility = double(hits) / double(runs);
    const auto ci = wilson_interval(hits, runs);
    rep.feas_lo = ci.first;
    rep.feas_hi = ci.second;
    return rep;
}

int cmd_plan(const Options& o) {
    const auto curve = make_curve(o);
    const auto spec = make_spec(o);
    const auto rc = regret_constants(curve, spec);
    const auto pol = static_policy(curve, spec);
    const auto det = deterministic_policy(curve, spec);
    const auto bench = benchmarks(curve, spec);
    const double r_eff = curve.r;
    const double theory_coef = rc.c0 * curve.epsilon * curve.p * rc.zeta_T;
    const double theory_term =
        theory_coef * std::pow(double(spec.m), rc.regret_exponent);

    if (o.format == "json") {
        nlohmann::json j;
        j["c0"] = rc.c0;
        j["alpha_T"] = rc.alpha_T;
        j["zeta_T"] = rc.zeta_T;
        j["buffer"] = rc.buffer;
        j["ell"] = pol.ell;
        j["openings"] = pol.openings;
        j["deterministic"] = det.openings;
        j["fully_learned"] = bench.fully_learned;
        j["no_learning"] = bench.no_learning;
        j["regret"] = pol.total() - bench.fully_learned;
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << "constants: c0=" << fmt(rc.c0, 6) << " alpha_T=" << fmt(rc.alpha_T, 6)
                  << " zeta_T=" << fmt(rc.zeta_T, 6) << " g(r)=" << fmt(rc.regret_exponent, 4)
                  << "\n";
        std::cout << "buffer=" << fmt(rc.buffer, 4) << " ell=" << fmt(pol.ell, 4)
                  << " (r=" << fmt(r_eff, 4) << ")\n";
        std::cout << "schedule:";
        for (long long a : pol.openings) std::cout << " " << a;
        std::cout << "  (total " << pol.total() << ")\n";
        std::cout << "deterministic:";
        for (long long a : det.openings) std::cout << " " << a;
        std::cout << "\n";
        std::cout << "benchmarks: fully_learned=" << bench.fully_learned
                  << " no_learning=" << bench.no_learning
                  << " nl_regret=" << bench.no_learning - bench.fully_learned << "\n";
        std::cout << "regret=" << pol.total() - bench.fully_learned
                  << " theory_term=" << fmt(theory_term, 3) << "\n";
    }

    std::ostringstream csv;
    csv << kCsvHeader << "period,openings,unrounded,deterministic\n";
    for (int t = 0; t < spec.T; ++t)
        csv << (t + 1) << ',' << pol.openings[size_t(t)] << ','
            << fmt(pol.values[size_t(t)], 6) << ',' << det.openings[size_t(t)] << "\n";
    write_artifact(o, "plan.csv", csv.str());
    return 0;
}

int cmd_exact(const Options& o) {
    const auto curve = make_curve(o);
    const auto spec = make_spec(o);
    ExactOptions eo;
    eo.window = o.window;
    const auto pol = exact_policy(curve, spec, eo);
    const auto bench = benchmarks(curve, spec);
    const double prob = chance_prob(pol.openings, curve, spec);
    if (o.format == "json") {
        nlohmann::json j;
        j["openings"] = pol.openings;
        j["total"] = pol.total();
        j["regret"] = pol.total() - bench.fully_learned;
        j["chance_prob"] = prob;
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << "exact schedule:";
        for (long long a : pol.openings) std::cout << " " << a;
        std::cout << "  total=" << pol.total()
                  << " regret=" << pol.total() - bench.fully_learned
                  << " P(cover)=" << fmt(prob, 6) << "\n";
    }
    std::ostringstream csv;
    csv << kCsvHeader << "period,openings\n";
    for (int t = 0; t < spec.T; ++t)
        csv << (t + 1) << ',' << pol.openings[size_t(t)] << "\n";
    write_artifact(o, "exact.csv", csv.str());
    return 0;
}

int cmd_simulate(const Options& o) {
    const auto curve = make_curve(o);
    const auto spec = make_spec(o);
    const auto pol = static_policy(curve, spec);

    std::vector<SimOutcome> outs(size_t(o.replications));
    parallel_for(o.replications, [&](long long i) {
        outs[size_t(i)] = simulate_policy(pol, curve, spec,
                                          substream_seed(o.seed, uint64_t(i)));
    });
    long long hits = 0;
    for (const auto& s : outs) hits += s.met_target ? 1 : 0;
    const auto ci = wilson_interval(hits, o.replications);
    const auto bench = benchmarks(curve, spec);

    if (o.format == "json") {
        nlohmann::json j;
        j["replications"] = o.replications;
        j["feasibility"] = double(hits) / double(o.replications);
        j["ci95"] = {ci.first, ci.second};
        j["openings"] = pol.total();
        j["regret"] = pol.total() - bench.fully_learned;
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << "schedule:";
        for (long long a : pol.openings) std::cout << " " << a;
        std::cout << "\nfeasibility=" << fmt(double(hits) / double(o.replications), 5)
                  << " ci95=[" << fmt(ci.first, 5) << ", " << fmt(ci.second, 5)
                  << "] over " << o.replications << " replications\n";
    }
    if (o.dump) {
        std::ostringstream csv;
        csv << kCsvHeader << "replication,total_succeeded,met_target\n";
        for (long long i = 0; i < o.replications; ++i)
            csv << i << ',' << outs[size_t(i)].total_succeeded << ','
                << int(outs[size_t(i)].met_target) << "\n";
        write_artifact(o, "simulate_replications.csv", csv.str());
    }
    std::ostringstream csv;
    csv << kCsvHeader
        << "replications,feasibility,ci_lo,ci_hi,openings,regret\n"
        << o.replications << ',' << fmt(double(hits) / double(o.replications), 6)
        << ',' << fmt(ci.first, 6) << ',' << fmt(ci.second, 6) << ',' << pol.total()
        << ',' << pol.total() - bench.fully_learned << "\n";
    write_artifact(o, "simulate.csv", csv.str());
    return 0;
}

int cmd_adaptive_like(const Options& o, bool adaptive) {
    const auto curve = make_curve(o);
    const auto spec = make_spec(o);
    const auto rep = run_many(curve, spec, o.replications, o.seed,
                              adaptive ? adaptive_run : semi_adaptive_run);
    const char* label = adaptive ? "adaptive" : "semi-adaptive";
    if (o.format == "json") {
        nlohmann::json j;
        j["policy"] = label;
        j["T"] = spec.T;
        j["runs"] = rep.runs;
        j["mean_regret"] = rep.mean_regret;
        j["regret_ci95"] = {rep.regret_ci_lo, rep.regret_ci_hi};
        j["feasibility"] = rep.feasibility;
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << label << ": T=" << spec.T << " m=" << spec.m
                  << " mean_regret=" << fmt(rep.mean_regret, 3) << " ci95=["
                  << fmt(rep.regret_ci_lo, 3) << ", " << fmt(rep.regret_ci_hi, 3)
                  << "] feasibility=" << fmt(rep.feasibility, 5) << " over "
                  << rep.runs << " runs\n";
    }
    std::ostringstream csv;
    csv << kCsvHeader
        << "policy,T,m,runs,mean_regret,regret_ci_lo,regret_ci_hi,feasibility\n"
        << label << ',' << spec.T << ',' << spec.m << ',' << rep.runs << ','
        << fmt(rep.mean_regret, 6) << ',' << fmt(rep.regret_ci_lo, 6) << ','
        << fmt(rep.regret_ci_hi, 6) << ',' << fmt(rep.feasibility, 6) << "\n";
    write_artifact(o, adaptive ? "adaptive.csv" : "semi.csv", csv.str());
    return 0;
}

int cmd_network(const Options& o) {
    const auto curve = make_curve(o);
    if (o.m < 1) throw std::invalid_argument("--m is required and must be >= 1");
    if (o.T < 1) throw std::invalid_argument("--T must be >= 1");

    BipartiteGraph graph;
    if (!o.graph_path.empty()) {
        graph = load_graph(o.graph_path);
    } else {
        graph = gen_graph(o.m, o.eta, o.mu, o.dstar, o.seed);
    }
    graph.validate();

    bool is_star = true;
    for (const auto& fs_ : graph.reverse_adjacency)
        if (fs_.size() != 1) {
            is_star = false;
            break;
        }
    const bool use_star =
        o.solver == "star" || (o.solver == "auto" && is_star);

    NetworkPlan plan;
    if (use_star) {
        std::vector<double> degs(size_t(graph.n_facilities));
        for (long long i = 0; i < graph.n_facilities; ++i)
            degs[size_t(i)] = double(graph.degree(i));
        plan = star_to_plan(
            star_solve(degs, curve, o.m, o.delta, graph.d_star, o.T), o.T);
    } else {
        HeuristicOptions ho;
        ho.weight_grid = o.wgrid;
        plan = heuristic_solve(graph, curve, o.m, o.delta, o.T, ho);
    }

    const double target = double(o.m) + network_buffer(curve, o.m, o.delta,
                                                       graph.d_star, o.T);
    const double cov = coverage_sum(graph, plan, curve);
    const auto rep =
        simulate_network(graph, plan, curve, o.m, o.replications, o.seed);

    if (o.format == "json") {
        nlohmann::json j;
        j["facilities"] = graph.n_facilities;
        j["customers"] = graph.n_customers;
        j["openings"] = plan.total_openings();
        j["coverage_det"] = cov;
        j["target"] = target;
        j["feasibility"] = rep.feasibility_estimate;
        j["mean_customer_regret"] = rep.mean_regret;
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << "graph: " << graph.n_facilities << " facilities, "
                  << graph.n_customers << " customers, d_star=" << graph.d_star
                  << (use_star ? " [star solver]\n" : " [heuristic]\n");
        std::cout << "openings=" << plan.total_openings()
                  << " deterministic coverage=" << fmt(cov, 2) << " target="
                  << fmt(target, 2) << "\n";
        std::cout << "feasibility=" << fmt(rep.feasibility_estimate, 5) << " ci95=["
                  << fmt(rep.feasibility_ci95_lo, 5) << ", "
                  << fmt(rep.feasibility_ci95_hi, 5)
                  << "] mean customer regret=" << fmt(rep.mean_regret, 3) << "\n";
    }
    if (o.save_graph_flag && !o.out_dir.empty()) {
        fs::create_directories(o.out_dir);
        save_graph(graph, (fs::path(o.out_dir) / "graph.json").string());
    }
    if (!o.out_dir.empty()) {
        fs::create_directories(o.out_dir);
        save_plan(plan, (fs::path(o.out_dir) / "plan.json").string());
    }
    std::ostringstream csv;
    csv << kCsvHeader
        << "m,T,openings,coverage_det,target,feasibility,mean_customer_regret\n"
        << o.m << ',' << o.T << ',' << plan.total_openings() << ',' << fmt(cov, 6)
        << ',' << fmt(target, 6) << ',' << fmt(rep.feasibility_estimate, 6) << ','
        << fmt(rep.mean_regret, 6) << "\n";
    write_artifact(o, "network.csv", csv.str());
    return 0;
}

int cmd_learnsim(const Options& o) {
    GenerativeModel model;
    if (o.model == "separated")
        model = make_separated_model(o.facilities, o.dim, o.scale, o.gap, o.seed);
    else
        model = make_default_model(o.facilities, o.dim, o.seed);
    const auto schedule = parse_schedule(o.schedule);
    const auto trace =
        run_learning_process(model, schedule, o.exploration, o.seed + 1);

    std::vector<std::pair<double, double>> pts;
    for (const auto& p : trace.points)
        pts.emplace_back(double(p.accrued_n), p.whitelist_error);
    ErrorCurveFit fit{};
    bool fitted = false;
    try {
        fit = fit_error_curve(pts);
        fitted = true;
    } catch (const std::invalid_argument&) {
    }

    if (o.format == "json") {
        nlohmann::json j;
        j["bayes_error"] = trace.bayes_error;
        if (fitted) {
            j["fit"] = {{"gamma", fit.gamma},
                        {"r", fit.r_hat},
                        {"beta", fit.beta},
                        {"rmse", fit.rmse}};
        }
        auto parr = nlohmann::json::array();
        for (const auto& p : trace.points)
            parr.push_back({{"n", p.accrued_n}, {"error", p.whitelist_error}});
        j["points"] = std::move(parr);
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << "bayes error=" << fmt(trace.bayes_error, 4) << "\n";
        for (const auto& p : trace.points)
            std::cout << "period " << p.period << ": n=" << p.accrued_n
                      << " whitelist=" << p.whitelist_size
                      << " error=" << fmt(p.whitelist_error, 4)
                      << " failures=" << p.realized_failures << "/" << p.selected
                      << "\n";
        if (fitted)
            std::cout << "fit: " << fmt(fit.gamma, 4) << "/n^" << fmt(fit.r_hat, 2)
                      << " + " << fmt(fit.beta, 4) << " (rmse " << fmt(fit.rmse, 5)
                      << ")\n";
    }
    std::ostringstream csv;
    {
        std::ostringstream body;
        write_trace_csv(trace, body);
        csv << body.str();
    }
    write_artifact(o, "trace.csv", csv.str());
    if (fitted) {
        std::ostringstream fcsv;
        fcsv << kCsvHeader << "gamma,r,beta,rmse\n"
             << fmt(fit.gamma, 6) << ',' << fmt(fit.r_hat, 2) << ','
             << fmt(fit.beta, 6) << ',' << fmt(fit.rmse, 8) << "\n";
        write_artifact(o, "fit.csv", fcsv.str());
    }
    return 0;
}

int cmd_table1(const Options& o) {
    Options base = o;
    std::ostringstream csv;
    csv << kCsvHeader
        << "m,T,coef,exponent,ell,schedule,total,regret,exact,exact_total,"
           "exact_regret,no_learning_regret\n";
    for (long long m : {100LL, 1000LL}) {
        std::cout << "m=" << m << "\n";
        for (int T = 2; T <= 6; ++T) {
            base.m = m;
            base.T = T;
            const auto curve = make_curve(base);
            const auto spec = make_spec(base);
            const auto rc = regret_constants(curve, spec);
            const auto pol = static_policy(curve, spec);
            const auto bench = benchmarks(curve, spec);
            const double coef = rc.c0 * curve.epsilon * curve.p * rc.zeta_T;

            std::string exact_str = "--";
            long long exact_total = -1;
            // The enumeration stays desk-sized for m=100 and for small T at
            // m=1000; larger boxes are opt-in through the exact subcommand.
            const bool run_exact =
                !o.skip_exact && (m == 100 || (m == 1000 && T <= 3));
            if (run_exact) {
                ExactOptions eo;
                if (m == 1000 && T == 3) eo.window = 60;
                const auto ex = exact_policy(curve, spec, eo);
                exact_total = ex.total();
                std::ostringstream es;
                for (size_t i = 0; i < ex.openings.size(); ++i)
                    es << (i ? " " : "") << ex.openings[i];
                exact_str = es.str();
            }

            std::cout << "  T=" << T << ": coef=" << fmt(coef, 2)
                      << " exp=" << fmt(rc.regret_exponent, 2) << " A=(";
            for (size_t i = 0; i < pol.openings.size(); ++i)
                std::cout << (i ? " " : "") << pol.openings[i];
            std::cout << ") regret=" << pol.total() - bench.fully_learned;
            if (exact_total >= 0)
                std::cout << " A*=(" << exact_str
                          << ") exact_regret=" << exact_total - bench.fully_learned;
            std::cout << " nl_regret=" << bench.no_learning - bench.fully_learned
                      << "\n";

            std::ostringstream sched;
            for (size_t i = 0; i < pol.openings.size(); ++i)
                sched << (i ? " " : "") << pol.openings[i];
            csv << m << ',' << T << ',' << fmt(coef, 4) << ','
                << fmt(rc.regret_exponent, 4) << ',' << fmt(pol.ell, 4) << ','
                << sched.str() << ',' << pol.total() << ','
                << pol.total() - bench.fully_learned << ',' << exact_str << ','
                << (exact_total >= 0 ? std::to_string(exact_total) : "--") << ','
                << (exact_total >= 0
                        ? std::to_string(exact_total - bench.fully_learned)
                        : "--")
                << ',' << bench.no_learning - bench.fully_learned << "\n";
        }
    }
    write_artifact(o, "table1.csv", csv.str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"coverplan: chance-constrained coverage planning with online learning"};
    app.require_subcommand(1);
    Options o;

    auto* plan = app.add_subcommand("plan", "Analytic schedule, constants, benchmarks");
    add_curve_opts(plan, o);
    add_plan_opts(plan, o);

    auto* exact = app.add_subcommand("exact", "Exact small-scale solution");
    add_curve_opts(exact, o);
    add_plan_opts(exact, o);
    exact->add_option("--window", o.window, "Search half-width (0 = default)");

    auto* sim = app.add_subcommand("simulate", "Monte Carlo feasibility of the schedule");
    add_curve_opts(sim, o);
    add_plan_opts(sim, o);
    sim->add_option("--replications", o.replications, "Monte Carlo replications");
    sim->add_option("--seed", o.seed, "RNG seed");
    sim->add_flag("--dump", o.dump, "Write one CSV row per replication");

    auto* adap = app.add_subcommand("adaptive", "Re-optimizing policy over many seeds");
    add_curve_opts(adap, o);
    add_plan_opts(adap, o);
    adap->add_option("--replications", o.replications, "Number of seeds");
    adap->add_option("--seed", o.seed, "RNG seed");

    auto* semi = app.add_subcommand("semi", "Semi-adaptive policy over many seeds");
    add_curve_opts(semi, o);
    add_plan_opts(semi, o);
    semi->add_option("--replications", o.replications, "Number of seeds");
    semi->add_option("--seed", o.seed, "RNG seed");

    auto* net = app.add_subcommand("network", "Bipartite coverage instance");
    add_curve_opts(net, o);
    net->add_option("--m", o.m, "Customer coverage target (required)");
    net->add_option("--T", o.T, "Horizon");
    net->add_option("--eta", o.eta, "Facilities per unit target");
    net->add_option("--mu", o.mu, "Customers per unit target");
    net->add_option("--dstar", o.dstar, "Degree cap");
    net->add_option("--wgrid", o.wgrid, "Line-search grid size");
    net->add_option("--graph", o.graph_path, "Load a graph JSON instead of generating");
    net->add_option("--solver", o.solver, "auto, star, or heuristic")
        ->check(CLI::IsMember({"auto", "star", "heuristic"}));
    net->add_option("--replications", o.replications, "Monte Carlo replications");
    net->add_option("--seed", o.seed, "RNG seed");
    net->add_flag("--save-graph", o.save_graph_flag, "Write graph.json to --out");

    auto* ls = app.add_subcommand("learnsim", "Learning-process simulation and curve fit");
    add_curve_opts(ls, o);
    ls->add_option("--facilities", o.facilities, "Pool size");
    ls->add_option("--dim", o.dim, "Feature dimension");
    ls->add_option("--model", o.model, "default or separated")
        ->check(CLI::IsMember({"default", "separated"}));
    ls->add_option("--scale", o.scale, "Separated model: slope scale");
    ls->add_option("--gap", o.gap, "Separated model: margin gap");
    ls->add_option("--exploration", o.exploration, "Exploration coefficient in [0, 0.2]");
    ls->add_option("--schedule", o.schedule, "Comma-separated per-period samples");
    ls->add_option("--seed", o.seed, "RNG seed");

    auto* t1 = app.add_subcommand("table1", "Reference table across m and T");
    add_curve_opts(t1, o);
    t1->add_flag("--skip-exact", o.skip_exact, "Skip the exact columns");

    try {
        app.parse(argc, argv);
        CLI::App* cmd = app.get_subcommands().front();
        apply_config(cmd, o.config_path);
        if (cmd == plan) return cmd_plan(o);
        if (cmd == exact) return cmd_exact(o);
        if (cmd == sim) return cmd_simulate(o);
        if (cmd == adap) return cmd_adaptive_like(o, true);
        if (cmd == semi) return cmd_adaptive_like(o, false);
        if (cmd == net) return cmd_network(o);
        if (cmd == ls) return cmd_learnsim(o);
        if (cmd == t1) return cmd_table1(o);
        return 2;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const Infeasible& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return 3;
    } catch (const NoConvergence& e) {
        std::cerr << "no convergence: " << e.what() << "\n";
        return 4;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid arguments: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
