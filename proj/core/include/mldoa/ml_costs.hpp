#pragma once

#include <optional>

#include "mldoa/array_model.hpp"
#include "mldoa/linalg.hpp"

namespace mldoa {

enum class Method { cml, uml };
enum class Regime { oversampled, undersampled };

/// Orthogonal projectors onto the steering column space and its complement,
/// built by column orthonormalization (QR) for conditioning near closely
/// spaced DoAs. `basis` is an M x K matrix with orthonormal columns spanning
/// range(A); `r_factor` is the K x K triangular factor with A = basis * r_factor.
struct Projectors {
    MatrixXcd basis;
    MatrixXcd r_factor;
    MatrixXcd p;       // projector onto range(A)
    MatrixXcd p_perp;  // I - p

    static Projectors build(const MatrixXcd& a);
    Eigen::Index dim() const { return basis.rows(); }
    Eigen::Index rank() const { return basis.cols(); }
};

struct CostEvaluation {
    Method method;
    Regime regime;
    double value;
    /// Undersampled only: false when the smallest positive signal eigenvalue
    /// does not exceed the noise-power estimate (the cost stays well defined;
    /// the profile interpretation does not).
    bool profile_assumption_ok = true;
};

/// Exact profile solution of the unconditional likelihood at fixed DoAs:
/// retained signal rank, noise power, source covariance estimate and the
/// minimized negative log-likelihood.
struct UmlProfile {
    int rank;             // m*, in [0, K]
    double sigma2;        // noise power at the optimum
    MatrixXcd source_cov; // K x K PSD estimate (zero when rank == 0)
    double neg_loglik;
};

/// Average residual power outside the steering subspace: tr(P_perp R_hat)/M.
double cml_cost(const Projectors& p, const SampleCovariance& rhat);

/// tr(P_perp R_hat)/(M - k_tilde); the profile noise-power estimate with
/// k_tilde = min(K, N).
double noise_power_estimate(const Projectors& p, const SampleCovariance& rhat, int k_tilde);

/// Simplified UML objective. Oversampled (N > K): log-det of
/// [sigma2_hat P_perp + P R_hat P]/M computed from the eigenvalues of the
/// symmetrized argument. Undersampled (N < K): the snapshot Gram form when
/// y is provided, otherwise the pseudo-determinant fallback. N == K throws.
CostEvaluation uml_cost(const Projectors& p, const SampleCovariance& rhat,
                        const MatrixXcd* y = nullptr);

/// Exact UML profile over the retained-rank search.
UmlProfile uml_profile(const Projectors& p, const SampleCovariance& rhat);

}  // namespace mldoa
