#pragma once

#include <cstdint>

#include "mldoa/linalg.hpp"

namespace mldoa {

/// Uniform linear array: element count and spacing in wavelengths.
struct Manifold {
    int elements;                // M >= 2
    double spacing_wavelengths;  // d > 0

    Manifold(int m, double d);
};

/// Ordered vector of K electrical angles inside the feasible region:
/// ascending with pairwise gaps >= eps and end gaps of eps to +-pi.
struct DoaPoint {
    VectorXd angles;
    double eps;

    DoaPoint(VectorXd theta, double spacing_eps);
    Eigen::Index size() const { return angles.size(); }
};

/// Default feasibility margin (radians, electrical angle).
inline constexpr double kDefaultEps = 0.0262;

double electrical_from_physical_deg(double beta_deg);
double physical_deg_from_electrical(double theta);

/// Observation model: ULA geometry, true DoAs, source covariance, noise
/// power and snapshot count. Construction verifies that the resulting
/// covariance is positive definite and the manifold has full column rank
/// at the true DoAs.
struct Scenario {
    Manifold manifold;
    DoaPoint true_doas;
    MatrixXcd source_cov;  // K x K PSD
    double noise_power;    // sigma^2 > 0
    int snapshots;         // N >= 1

    Scenario(Manifold man, DoaPoint doas, MatrixXcd p_s, double sigma2, int n);
};

struct SampleCovariance {
    MatrixXcd matrix;  // Hermitian PSD by construction
    int snapshot_count;
};

/// M x K steering matrix; column k holds exp(j * m * 2 * d * theta_k) for
/// element index m = 0..M-1 (electrical-angle convention, element 0 as
/// phase reference).
MatrixXcd steering_matrix(const Manifold& man, const VectorXd& angles);
inline MatrixXcd steering_matrix(const Manifold& man, const DoaPoint& theta) {
    return steering_matrix(man, theta.angles);
}

/// R = A P_s A^H + sigma^2 I.
HermitianMatrix build_covariance(const Scenario& sc);

/// N snapshots Y = R^{1/2} X with X iid circular complex standard normal.
/// The PSD square root keeps singular (coherent) source covariances legal.
/// Deterministic for fixed (seed, stream).
MatrixXcd generate_snapshots(const Scenario& sc, std::uint64_t seed, std::uint64_t stream = 0);

/// R_hat = Y Y^H / N, exactly Hermitian by construction.
SampleCovariance sample_covariance(const MatrixXcd& y);

}  // namespace mldoa
