#pragma once

#include "mldoa/linalg.hpp"
#include "mldoa/ml_costs.hpp"

namespace mldoa {

/// Spectrum of a Hermitian PSD matrix with numerically coincident
/// eigenvalues merged into distinct values with multiplicities. A leading
/// zero value (with its multiplicity) represents the nullspace.
struct ClusteredSpectrum {
    VectorXd values;  // distinct, ascending; values[0] == 0 when singular
    VectorXi mults;   // positive, sum == total_dim
    int total_dim;

    int distinct_count() const { return static_cast<int>(values.size()); }
    bool has_zero() const { return values.size() > 0 && values[0] == 0.0; }
    int positive_begin() const { return has_zero() ? 1 : 0; }
    /// Total multiplicity carried by strictly positive eigenvalues.
    int positive_mass() const;
    double max_value() const { return values[values.size() - 1]; }
};

/// Merge an ascending eigenvalue list into a clustered spectrum. Eigenvalues
/// below zero_tol * max magnitude collapse to an exact zero; neighbors closer
/// than rel_tol (relative) merge, since near-coincident values would give the
/// rational transforms spurious near-poles.
ClusteredSpectrum cluster_eigenvalues(const VectorXd& ascending, double rel_tol = 1e-8,
                                      double zero_tol = 1e-9);

/// Spectrum of P_A R P_A with the zero multiplicity forced to M - K.
/// Throws when fewer than K strictly positive eigenvalues survive.
ClusteredSpectrum projected_spectrum(const HermitianMatrix& r, const Projectors& p);

/// Spectrum of R itself (the no-projection convention of the family index 0).
ClusteredSpectrum full_spectrum(const HermitianMatrix& r);

/// The unique nonpositive solution of the normalized trace equation
///   (1/N) sum_m K_m gamma_m / (gamma_m - phi) = 1.
/// Zero when the positive spectral mass is below N (oversampled), strictly
/// negative when above (undersampled); the boundary case throws.
struct NegativeRoot {
    double value;
    Regime regime;
    double residual;  // |equation value - 1| at the root
};

NegativeRoot solve_negative_root(const ClusteredSpectrum& s, int n);

/// Deterministic equivalent of the CML objective: tr(P_perp R)/M.
double asymptotic_cml_cost(const HermitianMatrix& r, const Projectors& p);

/// Deterministic equivalent of the UML objective; regime chosen by K vs N.
double asymptotic_uml_cost(const HermitianMatrix& r, const Projectors& p, int n);

/// Resolvent trace (1/M) tr[(A - zI)^{-1}] from precomputed eigenvalues.
/// Throws when z sits within 1e-12 (relative) of the spectrum.
cxd stieltjes_transform(const VectorXd& eigenvalues, cxd z);
cxd stieltjes_transform(const HermitianMatrix& a, cxd z);

// Scalar building blocks of the deterministic equivalent. All sums run over
// the strictly positive part of the spectrum except resolvent_sum, which
// also carries the zero cluster.
cxd weighted_trace(const ClusteredSpectrum& s, int n, cxd omega);      // (1/N) sum K g/(g-w)
cxd weighted_trace_sq(const ClusteredSpectrum& s, int n, cxd omega);   // (1/N) sum K (g/(g-w))^2
cxd resolvent_sum(const ClusteredSpectrum& s, cxd omega);              // (1/M) sum K/(g-w)
cxd inverse_map(const ClusteredSpectrum& s, int n, cxd omega);         // z(w) = w (1 - weighted_trace)

/// Unique upper-half-plane solution of z = inverse_map(omega); extended to
/// real z outside the asymptotic support by analytic continuation. Newton
/// with half-plane reflection; bracketed bisection on the real axis.
cxd solve_omega(const ClusteredSpectrum& s, int n, cxd z);

/// d omega / d z evaluated at omega: 1 / (1 - weighted_trace_sq).
cxd omega_derivative(const ClusteredSpectrum& s, int n, cxd omega);

/// Deterministic equivalent of the resolvent trace at z.
cxd stieltjes_equivalent(const ClusteredSpectrum& s, int n, cxd z);

/// All roots of phi * (1 - weighted_trace(phi)) = 0, ascending. The first
/// entry is the nonpositive root; the remaining ones interlace the positive
/// eigenvalues. Computed by clearing to a polynomial and a companion-matrix
/// eigensolve.
VectorXd characteristic_roots(const ClusteredSpectrum& s, int n);

/// Endpoints of the asymptotic eigenvalue support: the critical points of
/// the inverse map bracketing the positive spectrum and their images.
struct SupportEdges {
    double omega_lo, omega_hi;
    double z_lo, z_hi;
};
SupportEdges support_edges(const ClusteredSpectrum& s, int n);

/// Closed-form limit of (1/M) log pdet of the sampled projected covariance.
double asymptotic_log_pdet_closed(const ClusteredSpectrum& s, int n);

/// Same quantity by numerical contour quadrature in the transformed plane;
/// the closed form's independent oracle.
double asymptotic_log_pdet_contour(const ClusteredSpectrum& s, int n);

enum class TraceFunctional { identity, log };

/// (1/2 pi j) * clockwise contour integral of f(z) * m_bar(z) around the
/// positive asymptotic support, evaluated in the z plane with solve_omega
/// continuation along the contour.
double deterministic_contour_functional(const ClusteredSpectrum& s, int n, TraceFunctional f);

}  // namespace mldoa
