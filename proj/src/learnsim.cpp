#include "coverplan/learnsim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include <Eigen/Dense>

#include "coverplan/rng.hpp"

namespace coverplan {

namespace {

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double standard_normal(Xoshiro256pp& rng) {
    // Box-Muller; u1 shifted away from zero.
    const double u1 = 1.0 - rng.uniform();
    const double u2 = rng.uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

long long uniform_below(Xoshiro256pp& rng, long long n) {
    const uint64_t bound = uint64_t(n);
    const uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    uint64_t x;
    do {
        x = rng.next();
    } while (x >= limit);
    return static_cast<long long>(x % bound);
}

struct NewtonResult {
    Eigen::VectorXd theta;
    bool converged = false;
};

NewtonResult newton_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                             double penalty) {
    const auto n = X.rows();
    const auto d = X.cols();
    NewtonResult res;
    res.theta = Eigen::VectorXd::Zero(d);

    auto log_lik = [&](const Eigen::VectorXd& th, Eigen::VectorXd* pi_out) {
        Eigen::VectorXd z = X * th;
        double ll = 0.0;
        Eigen::VectorXd pi(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double p = sigmoid(z[i]);
            pi[i] = p;
            ll += y[i] * std::log(p + 1e-300) + (1.0 - y[i]) * std::log(1.0 - p + 1e-300);
        }
        ll -= penalty * th.squaredNorm();
        if (pi_out) *pi_out = std::move(pi);
        return ll;
    };

    Eigen::VectorXd pi;
    double ll = log_lik(res.theta, &pi);
    for (int it = 0; it < 100; ++it) {
        Eigen::VectorXd grad = X.transpose() * (y - pi) - 2.0 * penalty * res.theta;
        if (grad.lpNorm<Eigen::Infinity>() < 1e-8) {
            res.converged = true;
            return res;
        }
        Eigen::VectorXd w = pi.array() * (1.0 - pi.array());
        w = w.cwiseMax(1e-12);
        Eigen::MatrixXd H = X.transpose() * w.asDiagonal() * X;
        H.diagonal().array() += 2.0 * penalty;
        Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
        if (ldlt.info() != Eigen::Success) return res;
        Eigen::VectorXd step = ldlt.solve(grad);
        if (!step.allFinite()) return res;
        // Backtracking keeps the likelihood from decreasing.
        double alpha = 1.0;
        for (int bt = 0; bt < 40; ++bt) {
            Eigen::VectorXd cand = res.theta + alpha * step;
            Eigen::VectorXd cand_pi;
            const double cand_ll = log_lik(cand, &cand_pi);
            if (cand_ll >= ll - 1e-12) {
                res.theta = std::move(cand);
                pi = std::move(cand_pi);
                ll = cand_ll;
                break;
            }
            alpha *= 0.5;
        }
    }
    return res;
}

}  // namespace

void GenerativeModel::validate() const {
    if (features.empty()) throw std::invalid_argument("GenerativeModel: empty pool");
    if (theta0.empty() || features.front().size() != theta0.size())
        throw std::invalid_argument("GenerativeModel: dimension mismatch");
    if (!(tau > 0.0) || !(tau < 1.0))
        throw std::invalid_argument("GenerativeModel: tau must be in (0, 1)");
}

std::vector<double> GenerativeModel::success_probs() const {
    std::vector<double> eta(features.size());
    for (size_t i = 0; i < features.size(); ++i) {
        double z = 0.0;
        for (size_t k = 0; k < theta0.size(); ++k) z += features[i][k] * theta0[k];
        eta[i] = sigmoid(z);
    }
    return eta;
}

double GenerativeModel::bayes_error() const {
    const auto eta = success_probs();
    double sum = 0.0;
    long long count = 0;
    for (double e : eta)
        if (e > tau) {
            sum += e;
            ++count;
        }
    if (count == 0)
        throw std::invalid_argument("GenerativeModel: no facility clears tau");
    return 1.0 - sum / double(count);
}

LogisticFit logistic_mle(const std::vector<std::vector<double>>& xs,
                         const std::vector<int>& ys) {
    if (xs.empty() || xs.size() != ys.size())
        throw std::invalid_argument("logistic_mle: empty or mismatched samples");
    const size_t d = xs.front().size();
    if (d == 0) throw std::invalid_argument("logistic_mle: empty feature vectors");

    Eigen::MatrixXd X(Eigen::Index(xs.size()), Eigen::Index(d));
    Eigen::VectorXd y(Eigen::Index(xs.size()));
    bool any_feature = false;
    for (size_t i = 0; i < xs.size(); ++i) {
        if (xs[i].size() != d)
            throw std::invalid_argument("logistic_mle: ragged feature vectors");
        for (size_t k = 0; k < d; ++k) {
            X(Eigen::Index(i), Eigen::Index(k)) = xs[i][k];
            any_feature = any_feature || xs[i][k] != 0.0;
        }
        y[Eigen::Index(i)] = double(ys[i]);
    }
    if (!any_feature)
        throw std::invalid_argument("logistic_mle: design matrix is identically zero");

    LogisticFit fit;
    NewtonResult res = newton_logistic(X, y, 0.0);
    if (!res.converged) {
        res = newton_logistic(X, y, 1e-6);
        fit.penalized = true;
    }
    if (!res.converged) {
        const bool all_same =
            std::all_of(ys.begin(), ys.end(), [&](int v) { return v == ys.front(); });
        if (all_same)
            throw std::invalid_argument(
                "logistic_mle: degenerate data (all outcomes identical)");
    }
    fit.converged = res.converged;
    fit.theta.assign(res.theta.data(), res.theta.data() + res.theta.size());
    return fit;
}

LearnTrace run_learning_process(const GenerativeModel& model,
                                const std::vector<long long>& schedule,
                                double exploration_fraction, uint64_t seed) {
    model.validate();
    if (schedule.empty())
        throw std::invalid_argument("run_learning_process: empty schedule");
    if (!(exploration_fraction >= 0.0) || !(exploration_fraction <= 0.2))
        throw std::invalid_argument(
            "run_learning_process: exploration_fraction must be in [0, 0.2]");
    long long total = 0;
    for (long long a : schedule) {
        if (a < 0)
            throw std::invalid_argument("run_learning_process: negative period size");
        total += a;
    }
    const long long M = static_cast<long long>(model.features.size());
    if (total > M)
        throw std::invalid_argument(
            "run_learning_process: schedule exceeds the facility pool");

    const auto eta = model.success_probs();
    Xoshiro256pp rng(seed);

    std::vector<char> unexplored(size_t(M), 1);
    std::vector<std::vector<double>> sample_x;
    std::vector<int> sample_y;
    sample_x.reserve(size_t(total));
    sample_y.reserve(size_t(total));

    LearnTrace trace;
    trace.bayes_error = model.bayes_error();
    long long accrued = 0;

    for (size_t t = 0; t < schedule.size(); ++t) {
        std::vector<long long> whitelist;
        if (t == 0) {
            for (long long i = 0; i < M; ++i)
                if (unexplored[size_t(i)]) whitelist.push_back(i);
        } else {
            const LogisticFit fit = logistic_mle(sample_x, sample_y);
            std::vector<char> in_wl(size_t(M), 0);
            for (long long i = 0; i < M; ++i) {
                if (!unexplored[size_t(i)]) continue;
                double z = 0.0;
                for (size_t k = 0; k < fit.theta.size(); ++k)
                    z += model.features[size_t(i)][k] * fit.theta[k];
                if (sigmoid(z) > model.tau) in_wl[size_t(i)] = 1;
            }
            if (exploration_fraction > 0.0) {
                std::vector<long long> pool;
                for (long long i = 0; i < M; ++i)
                    if (unexplored[size_t(i)]) pool.push_back(i);
                long long k = static_cast<long long>(
                    std::floor(exploration_fraction * double(M) /
                               std::sqrt(double(accrued) + 1.0)));
                k = std::min<long long>(k, static_cast<long long>(pool.size()));
                // Partial Fisher-Yates draw of k distinct unexplored facilities.
                for (long long s = 0; s < k; ++s) {
                    const long long pick =
                        s + uniform_below(rng, static_cast<long long>(pool.size()) - s);
                    std::swap(pool[size_t(s)], pool[size_t(pick)]);
                    in_wl[size_t(pool[size_t(s)])] = 1;
                }
            }
            for (long long i = 0; i < M; ++i)
                if (in_wl[size_t(i)]) whitelist.push_back(i);
        }
        if (whitelist.empty())
            throw Infeasible("run_learning_process: empty whitelist");

        double eta_sum = 0.0;
        for (long long i : whitelist) eta_sum += eta[size_t(i)];

        TracePoint pt;
        pt.period = int(t) + 1;
        pt.accrued_n = accrued;
        pt.whitelist_error = 1.0 - eta_sum / double(whitelist.size());
        pt.whitelist_size = static_cast<long long>(whitelist.size());
        pt.selected = schedule[t];

        for (long long s = 0; s < schedule[t]; ++s) {
            const long long i = whitelist[size_t(
                uniform_below(rng, static_cast<long long>(whitelist.size())))];
            const bool success = rng.uniform() < eta[size_t(i)];
            sample_x.push_back(model.features[size_t(i)]);
            sample_y.push_back(success ? 1 : 0);
            if (!success) ++pt.realized_failures;
            unexplored[size_t(i)] = 0;
        }
        accrued += schedule[t];
        trace.points.push_back(pt);
    }
    return trace;
}

ErrorCurveFit fit_error_curve(const std::vector<std::pair<double, double>>& points) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& p : points)
        if (p.first >= 1.0) pts.push_back(p);
    std::vector<double> distinct;
    for (const auto& p : pts) distinct.push_back(p.first);
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (distinct.size() < 3)
        throw std::invalid_argument("fit_error_curve: need >= 3 distinct n values");

    ErrorCurveFit best;
    bool have = false;
    for (int step = 1; step <= 40; ++step) {
        const double r = 0.05 * double(step);
        // Least squares of e ~ gamma * n^-r + beta.
        double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
        const double n = double(pts.size());
        for (const auto& [nn, e] : pts) {
            const double x = std::pow(nn, -r);
            sx += x;
            sy += e;
            sxx += x * x;
            sxy += x * e;
        }
        const double det = n * sxx - sx * sx;
        double gamma, beta;
        if (std::fabs(det) < 1e-14) {
            gamma = 0.0;
            beta = sy / n;
        } else {
            gamma = (n * sxy - sx * sy) / det;
            beta = (sy * sxx - sx * sxy) / det;
        }
        if (beta < 0.0) {
            beta = 0.0;
            gamma = sxx > 0.0 ? std::max(0.0, sxy / sxx) : 0.0;
        }
        if (gamma < 0.0) {
            gamma = 0.0;
            beta = std::max(0.0, sy / n);
        }
        double sse = 0.0;
        for (const auto& [nn, e] : pts) {
            const double resid = gamma * std::pow(nn, -r) + beta - e;
            sse += resid * resid;
        }
        const double rmse = std::sqrt(sse / n);
        if (!have || rmse < best.rmse - 1e-15) {
            best = {gamma, r, beta, rmse};
            have = true;
        }
    }
    return best;
}

GenerativeModel make_default_model(long long n_facilities, int dim, uint64_t seed) {
    if (n_facilities < 1 || dim < 2)
        throw std::invalid_argument("make_default_model: need M >= 1 and dim >= 2");
    Xoshiro256pp rng(seed);
    GenerativeModel model;
    model.tau = 0.5;
    model.features.resize(size_t(n_facilities));
    for (auto& row : model.features) {
        row.resize(size_t(dim));
        row[0] = 1.0;
        for (int k = 1; k < dim; ++k) row[size_t(k)] = standard_normal(rng);
    }
    // Slope scale 2, intercept placed so that P(eta > 1/2) is about 0.3.
    const double scale = 2.0;
    model.theta0.assign(size_t(dim), scale / std::sqrt(double(dim - 1)));
    model.theta0[0] = -0.5244 * scale;
    return model;
}

GenerativeModel make_separated_model(long long n_facilities, int dim, double scale,
                                     double margin_gap, uint64_t seed) {
    if (n_facilities < 1 || dim < 2)
        throw std::invalid_argument("make_separated_model: need M >= 1 and dim >= 2");
    if (!(scale > 0.0) || !(margin_gap >= 0.0))
        throw std::invalid_argument("make_separated_model: bad scale or gap");
    Xoshiro256pp rng(seed);
    GenerativeModel model;
    model.tau = 0.5;
    model.features.resize(size_t(n_facilities));
    for (auto& row : model.features) {
        row.resize(size_t(dim));
        row[0] = 1.0;
        const double v = standard_normal(rng) - 0.5244;
        row[1] = (v >= 0.0 ? 1.0 : -1.0) * (std::fabs(v) + margin_gap);
        for (int k = 2; k < dim; ++k) row[size_t(k)] = standard_normal(rng);
    }
    model.theta0.assign(size_t(dim), 0.0);
    model.theta0[1] = scale;
    return model;
}

void write_trace_csv(const LearnTrace& trace, std::ostream& out) {
    out << "# coverplan-csv v1\n";
    out << "period,accrued_n,whitelist_size,whitelist_error,realized_failures,selected\n";
    char buf[64];
    for (const auto& p : trace.points) {
        std::snprintf(buf, sizeof(buf), "%.9f", p.whitelist_error);
        out << p.period << ',' << p.accrued_n << ',' << p.whitelist_size << ','
            << buf << ',' << p.realized_failures << ',' << p.selected << '\n';
    }
}

}  // namespace coverplan
