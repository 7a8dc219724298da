#include "mldoa/resolution.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mldoa/errors.hpp"
#include "mldoa/random.hpp"

namespace mldoa {

namespace {
constexpr double kPi = std::numbers::pi;
}

VectorXd project_feasible(const VectorXd& raw, double eps) {
    const int k = static_cast<int>(raw.size());
    if (k == 0) throw std::invalid_argument("project_feasible: empty input");
    if (!(eps > 0.0)) throw std::invalid_argument("project_feasible: eps must be positive");
    if (k * eps >= 2.0 * kPi - 2.0 * eps)
        throw std::invalid_argument("project_feasible: infeasible geometry (K eps too large)");

    // Shift away the gaps: u_i = theta_i - (i+1) eps turns the ordered-gap
    // constraints into plain monotonicity with box limits.
    VectorXd u(k);
    for (int i = 0; i < k; ++i) u[i] = raw[i] - (i + 1) * eps;
    const double lo = -kPi;
    const double hi = kPi - (k + 1) * eps;

    // Pool-adjacent-violators for nondecreasing least squares.
    std::vector<double> value(static_cast<std::size_t>(k));
    std::vector<int> weight(static_cast<std::size_t>(k));
    int blocks = 0;
    for (int i = 0; i < k; ++i) {
        value[static_cast<std::size_t>(blocks)] = u[i];
        weight[static_cast<std::size_t>(blocks)] = 1;
        ++blocks;
        while (blocks > 1 && value[static_cast<std::size_t>(blocks - 2)] >=
                                 value[static_cast<std::size_t>(blocks - 1)]) {
            const int w0 = weight[static_cast<std::size_t>(blocks - 2)];
            const int w1 = weight[static_cast<std::size_t>(blocks - 1)];
            value[static_cast<std::size_t>(blocks - 2)] =
                (value[static_cast<std::size_t>(blocks - 2)] * w0 +
                 value[static_cast<std::size_t>(blocks - 1)] * w1) /
                (w0 + w1);
            weight[static_cast<std::size_t>(blocks - 2)] = w0 + w1;
            --blocks;
        }
    }

    VectorXd out(k);
    int at = 0;
    for (int b = 0; b < blocks; ++b) {
        const double v = std::clamp(value[static_cast<std::size_t>(b)], lo, hi);
        for (int r = 0; r < weight[static_cast<std::size_t>(b)]; ++r, ++at)
            out[at] = v + (at + 1) * eps;
    }
    return out;
}

int default_start_count(int k) {
    return static_cast<int>(std::ceil(std::pow(331.0, static_cast<double>(k) / 4.0)));
}

namespace {

double halton(std::uint64_t index, int base) {
    double f = 1.0, r = 0.0;
    while (index > 0) {
        f /= base;
        r += f * static_cast<double>(index % static_cast<std::uint64_t>(base));
        index /= static_cast<std::uint64_t>(base);
    }
    return r;
}

}  // namespace

std::vector<VectorXd> low_discrepancy_starts(int k, double eps, int count, std::uint64_t seed) {
    static constexpr int primes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29,
                                     31, 37, 41, 43, 47, 53, 59, 61, 67, 71};
    if (k > static_cast<int>(std::size(primes)))
        throw std::invalid_argument("low_discrepancy_starts: dimension too large");
    Philox rng(seed, 0x10d5);
    VectorXd rotation(k);
    for (int j = 0; j < k; ++j) rotation[j] = rng.next_double();

    std::vector<VectorXd> out;
    out.reserve(static_cast<std::size_t>(count));
    const double lo = -kPi + eps, hi = kPi - eps;
    for (int i = 0; i < count; ++i) {
        VectorXd x(k);
        for (int j = 0; j < k; ++j) {
            double v = halton(static_cast<std::uint64_t>(i) + 1, primes[j]) + rotation[j];
            v -= std::floor(v);
            x[j] = lo + v * (hi - lo);
        }
        std::sort(x.data(), x.data() + k);
        out.push_back(project_feasible(x, eps));
    }
    return out;
}

namespace {

VectorXd central_gradient(const CostFn& cost, const VectorXd& x, double h) {
    VectorXd g(x.size());
    VectorXd probe = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        probe[i] = x[i] + h;
        const double fp = cost(probe);
        probe[i] = x[i] - h;
        const double fm = cost(probe);
        probe[i] = x[i];
        g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

struct DescentResult {
    VectorXd x;
    double f;
    bool ok;
};

// Accelerated projected gradient with momentum restart on objective
// increase and halving backtracking line search.
DescentResult apg_descend(const CostFn& cost, const VectorXd& start, double eps,
                          const SearchOptions& opts, int max_iter) {
    VectorXd x = project_feasible(start, eps);
    double fx = cost(x);
    if (!std::isfinite(fx)) return {x, fx, false};
    VectorXd x_prev = x;
    double t = 1.0;

    for (int iter = 0; iter < max_iter; ++iter) {
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        const double beta = (t - 1.0) / t_next;
        VectorXd v = project_feasible(x + beta * (x - x_prev), eps);
        double fv = cost(v);
        if (!std::isfinite(fv)) {  // momentum overshot into a bad region
            v = x;
            fv = fx;
        }
        const VectorXd g = central_gradient(cost, v, opts.grad_step);

        double step = opts.init_step;
        VectorXd cand;
        double fc = fv;
        bool moved = false;
        while (step > 1e-13) {
            cand = project_feasible(v - step * g, eps);
            fc = cost(cand);
            if (std::isfinite(fc) && fc <= fv - 1e-4 / step * (cand - v).squaredNorm()) {
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if (!moved) return {x, fx, true};  // stationary to line-search resolution

        if (fc > fx) {  // restart momentum from the best iterate
            t = 1.0;
            x_prev = x;
            const VectorXd gx = central_gradient(cost, x, opts.grad_step);
            double s = opts.init_step;
            bool ok = false;
            VectorXd cand2;
            double f2 = fx;
            while (s > 1e-13) {
                cand2 = project_feasible(x - s * gx, eps);
                f2 = cost(cand2);
                if (std::isfinite(f2) && f2 < fx) {
                    ok = true;
                    break;
                }
                s *= 0.5;
            }
            if (!ok) return {x, fx, true};
            const double movement = (cand2 - x).norm() / s;
            x_prev = x;
            x = cand2;
            fx = f2;
            if (movement <= opts.grad_tol) return {x, fx, true};
            continue;
        }

        const double movement = (cand - v).norm() / step;
        x_prev = x;
        x = cand;
        fx = fc;
        t = t_next;
        if (movement <= opts.grad_tol) return {x, fx, true};
    }
    return {x, fx, true};
}

VectorXd cluster_centroid(const std::vector<VectorXd>& pts, const std::vector<int>& members) {
    VectorXd c = VectorXd::Zero(pts.front().size());
    for (int idx : members) c += pts[static_cast<std::size_t>(idx)];
    return c / static_cast<double>(members.size());
}

double chebyshev(const VectorXd& a, const VectorXd& b) {
    return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace

std::vector<std::vector<int>> cluster_minima(const std::vector<VectorXd>& points, double threshold) {
    if (!(threshold > 0.0)) throw std::invalid_argument("cluster_minima: threshold must be positive");
    std::vector<std::vector<int>> clusters;
    for (int i = 0; i < static_cast<int>(points.size()); ++i) clusters.push_back({i});

    while (clusters.size() > 1) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t bi = 0, bj = 0;
        for (std::size_t i = 0; i < clusters.size(); ++i)
            for (std::size_t j = i + 1; j < clusters.size(); ++j) {
                double d = std::numeric_limits<double>::infinity();
                for (int a : clusters[i])
                    for (int b : clusters[j])
                        d = std::min(d, chebyshev(points[static_cast<std::size_t>(a)],
                                                  points[static_cast<std::size_t>(b)]));
                if (d < best) {
                    best = d;
                    bi = i;
                    bj = j;
                }
            }
        if (best >= threshold) break;
        clusters[bi].insert(clusters[bi].end(), clusters[bj].begin(), clusters[bj].end());
        clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(bj));
    }
    return clusters;
}

bool minimize_multistart(const CostFn& cost, double eps, const std::vector<VectorXd>& starts,
                         const SearchOptions& opts, VectorXd* argmin, double* minval) {
    bool any = false;
    double best = std::numeric_limits<double>::infinity();
    VectorXd best_x;
    for (const auto& s : starts) {
        const DescentResult r = apg_descend(cost, s, eps, opts, opts.max_iter);
        if (!r.ok || !std::isfinite(r.f)) continue;
        any = true;
        if (r.f < best) {
            best = r.f;
            best_x = r.x;
        }
    }
    if (any) {
        *argmin = best_x;
        *minval = best;
    }
    return any;
}

LocalMinimaSet find_local_minima(const CostFn& cost, int k, double eps, std::uint64_t seed,
                                 const SearchOptions& opts) {
    const int n_starts = (opts.n_starts > 0) ? opts.n_starts : default_start_count(k);
    const std::vector<VectorXd> starts = low_discrepancy_starts(k, eps, n_starts, seed);

    std::vector<VectorXd> converged;
    converged.reserve(starts.size());
    for (const auto& s : starts) {
        const DescentResult r = apg_descend(cost, s, eps, opts, opts.max_iter);
        if (r.ok && std::isfinite(r.f)) converged.push_back(r.x);
    }
    if (converged.empty()) throw NumericalError("find_local_minima: no start converged");

    const auto clusters = cluster_minima(converged, opts.cluster_threshold);

    std::vector<Minimum> minima;
    for (const auto& members : clusters) {
        const VectorXd centroid = project_feasible(cluster_centroid(converged, members), eps);
        const DescentResult polished = apg_descend(cost, centroid, eps, opts, opts.polish_iters);
        if (polished.ok && std::isfinite(polished.f)) minima.push_back({polished.x, polished.f});
    }
    if (minima.empty()) throw NumericalError("find_local_minima: polishing lost every cluster");

    // Polishing can merge neighbors; keep the best representative per site.
    std::sort(minima.begin(), minima.end(),
              [](const Minimum& a, const Minimum& b) { return a.cost < b.cost; });
    std::vector<Minimum> unique;
    for (const auto& m : minima) {
        bool dup = false;
        for (const auto& u : unique)
            if (chebyshev(m.theta, u.theta) < opts.cluster_threshold) {
                dup = true;
                break;
            }
        if (!dup) unique.push_back(m);
    }

    LocalMinimaSet out;
    out.minima = std::move(unique);
    out.global_index = 0;  // sorted by cost above
    out.starts_used = n_starts;
    out.clusters_formed = static_cast<int>(clusters.size());
    return out;
}

OrthantEstimate predict_resolution(const VectorXd& etabar, const MatrixXd& gamma, int m_dim,
                                   std::int64_t qmc_budget, std::uint64_t seed) {
    const Eigen::Index l1 = etabar.size();
    if (gamma.rows() != l1 || gamma.cols() != l1)
        throw std::invalid_argument("predict_resolution: dimension mismatch");
    const Eigen::Index l = l1 - 1;
    if (l == 0) return {1.0, 0.0};

    MatrixXd d = MatrixXd::Zero(l, l1);
    d.col(0).setConstant(-1.0);
    d.rightCols(l).setIdentity();

    const VectorXd mu = d * etabar;
    const MatrixXd cov = d * gamma * d.transpose() / (static_cast<double>(m_dim) * m_dim);
    return mvn_orthant(GaussianSpec(mu, cov), qmc_budget, seed);
}

double outlier_mse(const VectorXd& true_theta) {
    const int k = static_cast<int>(true_theta.size());
    for (int i = 0; i < k; ++i) {
        if (!(true_theta[i] > -kPi && true_theta[i] < kPi))
            throw std::invalid_argument("outlier_mse: angles must lie in (-pi, pi)");
        if (i > 0 && !(true_theta[i] > true_theta[i - 1]))
            throw std::invalid_argument("outlier_mse: angles must ascend");
    }
    double acc = static_cast<double>(k) / (6.0 * (k + 1));
    for (int m = 1; m <= k; ++m) {
        const double dev = static_cast<double>(m) / (k + 1) - (kPi + true_theta[m - 1]) / (2.0 * kPi);
        acc += dev * dev;
    }
    return 4.0 * kPi * kPi * acc;
}

double predict_mse(double p_res, double mse_small, double mse_large) {
    if (!(p_res >= 0.0 && p_res <= 1.0)) throw std::invalid_argument("predict_mse: p outside [0,1]");
    if (mse_small < 0.0 || mse_large < 0.0)
        throw std::invalid_argument("predict_mse: MSE terms must be nonnegative");
    return p_res * mse_small + (1.0 - p_res) * mse_large;
}

MatrixXd crb_stochastic(const Scenario& sc) {
    const int m = sc.manifold.elements;
    const int k = static_cast<int>(sc.true_doas.size());
    const MatrixXcd a = steering_matrix(sc.manifold, sc.true_doas);
    MatrixXcd d(m, k);
    for (int c = 0; c < k; ++c)
        for (int r = 0; r < m; ++r)
            d(r, c) = cxd(0.0, 2.0 * sc.manifold.spacing_wavelengths * r) * a(r, c);

    const HermitianMatrix r_full = build_covariance(sc);
    const Projectors proj = Projectors::build(a);
    const MatrixXcd r_inv = r_full.mat().ldlt().solve(MatrixXcd::Identity(m, m));
    const MatrixXcd inner = sc.source_cov * a.adjoint() * r_inv * a * sc.source_cov;
    const MatrixXcd dpd = d.adjoint() * proj.p_perp * d;
    const MatrixXd fim = (dpd.array() * inner.transpose().array()).real().matrix();
    const MatrixXd fim_sym = 0.5 * (fim + fim.transpose().eval());
    const double scale = sc.noise_power / (2.0 * sc.snapshots);
    return scale * fim_sym.ldlt().solve(MatrixXd::Identity(k, k));
}

}  // namespace mldoa
