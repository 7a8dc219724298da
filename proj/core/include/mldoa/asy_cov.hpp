#pragma once

#include <vector>

#include "mldoa/array_model.hpp"
#include "mldoa/det_equiv.hpp"
#include "mldoa/ml_costs.hpp"

namespace mldoa {

/// Per-point spectral data for the generic covariance contour oracle:
/// the projected covariance's clustered spectrum, its exact positive
/// eigenvalues, the weighted eigenvector block R^{1/2} V+ that carries the
/// cross-point coupling, and the nonpositive root of the trace equation.
struct SpectralPoint {
    ClusteredSpectrum spectrum;
    VectorXd gammas;  // exact positive eigenvalues, ascending
    MatrixXcd w;      // R^{1/2} V+ (M x #positive)
    NegativeRoot root;
};

/// Candidate point with everything Theorem-level covariance entries need.
struct FamilyPoint {
    DoaPoint theta;
    Projectors proj;
    double sigma2;            // tr(P_perp R)/(M - min(K, N))
    MatrixXcd weighted_perp;  // R^{1/2} P_perp R^{1/2}
    MatrixXcd coupling;       // the shifted signal-space coupling matrix
    SpectralPoint spectral;
};

/// Family of candidate DoA points (index 0 reserved for the true DoAs) over
/// one scenario covariance, with all per-point quantities cached once.
struct PointFamily {
    HermitianMatrix r;
    MatrixXcd r_sqrt;
    Manifold manifold;
    int snapshots;
    int sources;
    std::vector<FamilyPoint> points;

    static PointFamily build(const Manifold& man, const HermitianMatrix& r,
                             const std::vector<DoaPoint>& points, int snapshots);
    int extra_count() const { return static_cast<int>(points.size()) - 1; }
};

/// R^{1/2} A [A^H (R - phi0 I) A]^{-1} A^H R^{1/2}; Hermitian PSD, idempotent
/// when the shift vanishes.
MatrixXcd weighted_signal_projector(const HermitianMatrix& r, const MatrixXcd& r_sqrt,
                                    const MatrixXcd& a, double phi0);

/// Spectral point for the no-projection convention (the sample covariance
/// itself); used by the covariance oracle with index 0 semantics.
SpectralPoint identity_spectral_point(const HermitianMatrix& r, const MatrixXcd& r_sqrt, int n);
SpectralPoint projected_spectral_point(const HermitianMatrix& r, const MatrixXcd& r_sqrt,
                                       const Projectors& p, int n);

/// Asymptotic covariance of the scaled CML costs over the family.
MatrixXd cml_covariance(const PointFamily& pf);

/// Asymptotic covariance of the scaled UML costs; throws when a log argument
/// degenerates (conditioning assumption violated).
MatrixXd uml_covariance(const PointFamily& pf);

struct ConditioningDiagnostics {
    double min_eig_wp;
    double min_eig_wq;
    double min_eig_gamma_c;
    double min_eig_gamma_u;
};

struct GammaMatrices {
    MatrixXd cml;  // (L+1) x (L+1)
    MatrixXd uml;
    ConditioningDiagnostics diagnostics;
};

GammaMatrices build_gamma(const PointFamily& pf);

/// Minimum eigenvalues of the projector- and coupling-overlap matrices over
/// the candidate points 1..L (diagnostic; the caller judges admissibility).
struct FamilyConditioning {
    double min_eig_wp;
    double min_eig_wq;
};
FamilyConditioning conditioning_diagnostics(const PointFamily& pf);

/// Closed-form cross-covariance between the trace statistic at ell and the
/// log-pdet statistic at m: tr[R^{1/2} P_ell R^{1/2} Q_m]/N. Pass p_ell as
/// nullptr for the identity convention at index 0.
double cov_trace_vs_logdet(const MatrixXcd& r_sqrt, const MatrixXcd* p_ell, const MatrixXcd& q_m,
                           int n);

/// Closed-form covariance between two log-pdet statistics:
/// -log|1 - tr[Q_ell Q_m]/N|.
double cov_logdet_vs_logdet(const MatrixXcd& q_ell, const MatrixXcd& q_m, int n);

/// Generic double-contour covariance integral between two statistics, the
/// numeric oracle for all the closed forms above. f selects the integrand
/// (identity for trace statistics, log for log-pdet statistics).
double covariance_contour_oracle(const SpectralPoint& pr, const SpectralPoint& pm,
                                 TraceFunctional fr, TraceFunctional fm, int n);

}  // namespace mldoa
