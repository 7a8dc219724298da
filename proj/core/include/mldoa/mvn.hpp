#pragma once

#include <cstdint>

#include "mldoa/linalg.hpp"

namespace mldoa {

/// Mean and covariance of a real Gaussian vector. The covariance must be
/// symmetric to 1e-12 relative; eigenvalues may dip to -1e-10 * trace from
/// round-off and are treated as zero.
struct GaussianSpec {
    VectorXd mean;
    MatrixXd cov;

    GaussianSpec(VectorXd mu, MatrixXd sigma);
    Eigen::Index dim() const { return mean.size(); }
};

struct OrthantEstimate {
    double probability = 1.0;   // in [0, 1]
    double err_estimate = 0.0;  // standard error over randomization batches
};

/// P[X > 0 componentwise] for X ~ N(mean, cov), by the Genz
/// sequential-conditioning transform over a randomized rank-1 lattice
/// (Richtmyer generators, 8 random shifts). Deterministic for fixed seed.
/// Singular covariances are handled by a rank-revealing pivoted Cholesky:
/// zero-variance directions degrade to deterministic constraint checks.
OrthantEstimate mvn_orthant(const GaussianSpec& spec, std::int64_t n_samples, std::uint64_t seed);

/// Standard normal CDF.
double normal_cdf(double x);
/// Standard normal quantile (Wichura's AS241, full double accuracy).
double normal_quantile(double p);

}  // namespace mldoa
