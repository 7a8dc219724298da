#include "mldoa/montecarlo.hpp"

#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>

#include "mldoa/det_equiv.hpp"
#include "mldoa/errors.hpp"

namespace mldoa {

CandidateSet CandidateSet::build(const Manifold& man, const std::vector<DoaPoint>& points) {
    if (points.empty()) throw std::invalid_argument("CandidateSet: no points");
    CandidateSet out;
    out.points = points;
    out.projectors.reserve(points.size());
    for (const auto& p : points) out.projectors.push_back(Projectors::build(steering_matrix(man, p)));
    return out;
}

void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
    threads = std::max(1, std::min(threads, n));
    if (threads == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr first_error;
    std::mutex err_mutex;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mutex);
                    if (!first_error) first_error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

ResolutionEstimate wilson_interval(std::int64_t successes, std::int64_t n) {
    const double z = 1.959963984540054;  // 97.5% quantile
    const double p = static_cast<double>(successes) / static_cast<double>(n);
    const double z2n = z * z / static_cast<double>(n);
    const double center = (p + 0.5 * z2n) / (1.0 + z2n);
    const double half =
        z * std::sqrt(p * (1.0 - p) / static_cast<double>(n) + 0.25 * z2n / static_cast<double>(n)) /
        (1.0 + z2n);
    return {p, std::max(0.0, center - half), std::min(1.0, center + half)};
}

namespace {

// Sampled costs at every candidate for one snapshot draw.
VectorXd trial_costs(const TrialBatch& batch, Method method, int trial) {
    const MatrixXcd y =
        generate_snapshots(batch.scenario, batch.seed, static_cast<std::uint64_t>(trial));
    const SampleCovariance rhat = sample_covariance(y);
    const int pts = static_cast<int>(batch.candidates.points.size());
    VectorXd costs(pts);
    for (int p = 0; p < pts; ++p) {
        const Projectors& proj = batch.candidates.projectors[static_cast<std::size_t>(p)];
        costs[p] = (method == Method::cml) ? cml_cost(proj, rhat)
                                           : uml_cost(proj, rhat, &y).value;
    }
    return costs;
}

}  // namespace

ResolutionEstimate empirical_resolution(const TrialBatch& batch, Method method, int threads) {
    if (batch.candidates.extra_count() < 1)
        throw std::invalid_argument("empirical_resolution: need at least one extra candidate");
    std::vector<unsigned char> resolved(static_cast<std::size_t>(batch.n_trials), 0);
    parallel_for(batch.n_trials, threads, [&](int t) {
        const VectorXd costs = trial_costs(batch, method, t);
        bool ok = true;
        for (Eigen::Index p = 1; p < costs.size(); ++p)
            if (!(costs[p] > costs[0])) {
                ok = false;
                break;
            }
        resolved[static_cast<std::size_t>(t)] = ok ? 1 : 0;
    });
    std::int64_t hits = 0;
    for (unsigned char b : resolved) hits += b;
    return wilson_interval(hits, batch.n_trials);
}

MatrixXd fluctuation_samples(const TrialBatch& batch, Method method, int threads) {
    const int pts = static_cast<int>(batch.candidates.points.size());
    const int m = batch.scenario.manifold.elements;
    const HermitianMatrix r = build_covariance(batch.scenario);

    VectorXd etabar(pts);
    for (int p = 0; p < pts; ++p) {
        const Projectors& proj = batch.candidates.projectors[static_cast<std::size_t>(p)];
        etabar[p] = (method == Method::cml)
                        ? asymptotic_cml_cost(r, proj)
                        : asymptotic_uml_cost(r, proj, batch.scenario.snapshots);
    }

    MatrixXd samples(batch.n_trials, pts);
    parallel_for(batch.n_trials, threads, [&](int t) {
        samples.row(t) = (static_cast<double>(m) * (trial_costs(batch, method, t) - etabar)).transpose();
    });
    return samples;
}

CltStats fluctuation_stats(const TrialBatch& batch, Method method, int threads) {
    const MatrixXd samples = fluctuation_samples(batch, method, threads);
    const int n = static_cast<int>(samples.rows());
    const int pts = static_cast<int>(samples.cols());

    CltStats out;
    out.n_trials = n;
    out.sample_mean = samples.colwise().mean();
    const MatrixXd centered = samples.rowwise() - out.sample_mean.transpose();
    out.sample_cov = centered.transpose() * centered / static_cast<double>(n - 1);
    out.skewness.resize(pts);
    for (int p = 0; p < pts; ++p) {
        const double m2 = centered.col(p).squaredNorm() / n;
        const double m3 = centered.col(p).array().cube().sum() / n;
        out.skewness[p] = m3 / std::pow(m2, 1.5);
    }
    return out;
}

MseEstimate empirical_mse(const TrialBatch& batch, Method method, const SearchOptions& search,
                          int extra_starts, int threads) {
    const int k = static_cast<int>(batch.scenario.true_doas.size());
    const double eps = batch.scenario.true_doas.eps;
    const VectorXd truth = batch.scenario.true_doas.angles;

    std::vector<VectorXd> base_starts;
    for (const auto& p : batch.candidates.points) base_starts.push_back(p.angles);
    const auto extra = low_discrepancy_starts(k, eps, extra_starts, batch.seed ^ 0x9E3779B97F4A7C15ull);
    base_starts.insert(base_starts.end(), extra.begin(), extra.end());

    std::vector<double> sqerr(static_cast<std::size_t>(batch.n_trials), 0.0);
    std::vector<unsigned char> failed(static_cast<std::size_t>(batch.n_trials), 0);
    parallel_for(batch.n_trials, threads, [&](int t) {
        const MatrixXcd y =
            generate_snapshots(batch.scenario, batch.seed, static_cast<std::uint64_t>(t));
        const SampleCovariance rhat = sample_covariance(y);
        CostFn cost = [&](const VectorXd& theta) {
            const Projectors proj = Projectors::build(steering_matrix(batch.scenario.manifold, theta));
            return (method == Method::cml) ? cml_cost(proj, rhat) : uml_cost(proj, rhat, &y).value;
        };
        VectorXd est;
        double val;
        if (!minimize_multistart(cost, eps, base_starts, search, &est, &val)) {
            failed[static_cast<std::size_t>(t)] = 1;
            return;
        }
        sqerr[static_cast<std::size_t>(t)] = (est - truth).squaredNorm() / k;
    });

    double acc = 0.0;
    int used = 0, fails = 0;
    for (int t = 0; t < batch.n_trials; ++t) {
        if (failed[static_cast<std::size_t>(t)]) {
            ++fails;
            continue;
        }
        acc += sqerr[static_cast<std::size_t>(t)];
        ++used;
    }
    if (used == 0) throw NumericalError("empirical_mse: every trial failed to optimize");
    return {acc / used, static_cast<double>(fails) / batch.n_trials, used};
}

}  // namespace mldoa
