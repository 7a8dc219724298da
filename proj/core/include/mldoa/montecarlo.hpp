#pragma once

#include <cstdint>
#include <vector>

#include "mldoa/array_model.hpp"
#include "mldoa/ml_costs.hpp"
#include "mldoa/resolution.hpp"

namespace mldoa {

/// Candidate evaluation points with their projectors cached; index 0 is the
/// true-DoA point.
struct CandidateSet {
    std::vector<DoaPoint> points;
    std::vector<Projectors> projectors;

    static CandidateSet build(const Manifold& man, const std::vector<DoaPoint>& points);
    int extra_count() const { return static_cast<int>(points.size()) - 1; }
};

struct TrialBatch {
    Scenario scenario;
    CandidateSet candidates;
    int n_trials;
    std::uint64_t seed;
};

struct ResolutionEstimate {
    double p_hat;
    double ci_lo, ci_hi;  // Wilson 95% interval
};

/// Fraction of trials where the sampled cost at every extra candidate
/// strictly exceeds its value at the true point. Per-trial snapshot streams
/// derive from (seed, trial), so results are reproducible under any thread
/// count.
ResolutionEstimate empirical_resolution(const TrialBatch& batch, Method method, int threads = 1);

struct CltStats {
    VectorXd sample_mean;
    MatrixXd sample_cov;
    VectorXd skewness;
    int n_trials;
};

/// Moments of the scaled cost fluctuations M * (sampled - deterministic)
/// across the candidate points.
CltStats fluctuation_stats(const TrialBatch& batch, Method method, int threads = 1);

/// Per-trial cost-fluctuation vectors (trials x points); the raw material
/// behind fluctuation_stats, exposed for bootstrap-style post-processing.
MatrixXd fluctuation_samples(const TrialBatch& batch, Method method, int threads = 1);

struct MseEstimate {
    double mse;
    double fail_fraction;
    int n_used;
};

/// Per-trial minimization of the sampled cost by the same multi-start
/// machinery as the deterministic search, seeded at the candidate points;
/// accumulates the per-coordinate squared DoA error.
MseEstimate empirical_mse(const TrialBatch& batch, Method method, const SearchOptions& search,
                          int extra_starts = 8, int threads = 1);

/// Wilson 95% confidence interval for a binomial proportion.
ResolutionEstimate wilson_interval(std::int64_t successes, std::int64_t n);

/// Run fn(i) for i in [0, n) on the given number of threads.
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

}  // namespace mldoa
