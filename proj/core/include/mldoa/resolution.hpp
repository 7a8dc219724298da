#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "mldoa/array_model.hpp"
#include "mldoa/asy_cov.hpp"
#include "mldoa/mvn.hpp"

namespace mldoa {

/// Euclidean projection onto the ordered feasible set with gap eps: the
/// gap-shift substitution reduces it to box-constrained isotonic regression,
/// solved by pool-adjacent-violators. Idempotent and non-expansive.
VectorXd project_feasible(const VectorXd& raw, double eps);

using CostFn = std::function<double(const VectorXd&)>;

struct SearchOptions {
    int n_starts = 0;  // 0: ceil(331^(K/4)) low-discrepancy starts
    int max_iter = 500;
    double grad_step = 1e-5;
    double init_step = 0.1;
    double grad_tol = 1e-7;
    double cluster_threshold = 0.6;  // radians, per-coordinate max-metric
    int polish_iters = 50;
};

struct Minimum {
    VectorXd theta;
    double cost;
};

struct LocalMinimaSet {
    std::vector<Minimum> minima;
    int global_index = 0;
    int starts_used = 0;
    int clusters_formed = 0;
};

/// Multi-start accelerated projected gradient descent over the feasible set
/// followed by single-linkage clustering and per-cluster polishing.
/// Deterministic for fixed seed.
LocalMinimaSet find_local_minima(const CostFn& cost, int k, double eps, std::uint64_t seed,
                                 const SearchOptions& opts = {});

/// Best minimizer over an explicit start list (no clustering); shared by the
/// per-trial estimator searches. Returns false on total optimizer failure.
bool minimize_multistart(const CostFn& cost, double eps, const std::vector<VectorXd>& starts,
                         const SearchOptions& opts, VectorXd* argmin, double* minval);

/// Single-linkage agglomeration in the per-coordinate max-metric, halted
/// when all inter-cluster distances reach the threshold; returns member
/// index lists.
std::vector<std::vector<int>> cluster_minima(const std::vector<VectorXd>& points, double threshold);

/// Gaussian approximation of the probability that the sampled cost at every
/// extra minimum exceeds its value at the true point. etabar holds the
/// deterministic costs over the family (index 0 = true point) and gamma the
/// matching asymptotic covariance; the cost fluctuation scale is 1/m_dim.
OrthantEstimate predict_resolution(const VectorXd& etabar, const MatrixXd& gamma, int m_dim,
                                   std::int64_t qmc_budget, std::uint64_t seed);

/// Mean squared deviation of a uniformly drawn ordered point of the feasible
/// region from the true DoAs (vanishing-gap convention); summed over
/// coordinates.
double outlier_mse(const VectorXd& true_theta);

/// Interval-error MSE combination: p_res * mse_small + (1 - p_res) * mse_large.
double predict_mse(double p_res, double mse_small, double mse_large);

/// Stochastic (Gaussian-signal) Cramer-Rao bound on the electrical angles,
/// the default small-error MSE plug-in. K x K matrix in squared radians.
MatrixXd crb_stochastic(const Scenario& sc);

/// Low-discrepancy start points for a K-dimensional feasible-set search.
std::vector<VectorXd> low_discrepancy_starts(int k, double eps, int count, std::uint64_t seed);

/// Default multi-start count: ceil(331^(K/4)).
int default_start_count(int k);

}  // namespace mldoa
