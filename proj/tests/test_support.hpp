#pragma once

// Shared generators for randomized tests. Everything is Philox-seeded so
// failures reproduce exactly.

#include <mldoa/array_model.hpp>
#include <mldoa/linalg.hpp>
#include <mldoa/random.hpp>
#include <mldoa/resolution.hpp>

namespace testsup {

using namespace mldoa;

inline MatrixXcd random_complex(int rows, int cols, Philox& rng) {
    MatrixXcd m(rows, cols);
    for (int c = 0; c < cols; ++c)
        for (int r = 0; r < rows; ++r) m(r, c) = cxd(rng.next_normal(), rng.next_normal());
    return m;
}

inline HermitianMatrix random_hermitian(int dim, Philox& rng) {
    const MatrixXcd g = random_complex(dim, dim, rng);
    return HermitianMatrix(MatrixXcd(0.5 * (g + g.adjoint())));
}

/// Random Hermitian positive definite matrix with eigenvalues in about
/// [0.5, 2.5]; well inside the compact-spectrum assumption.
inline HermitianMatrix random_spd(int dim, Philox& rng) {
    const MatrixXcd g = random_complex(dim, dim, rng);
    MatrixXcd m = g * g.adjoint() / static_cast<double>(dim);
    m += 0.5 * MatrixXcd::Identity(dim, dim);
    return HermitianMatrix(m);
}

/// Random PSD source covariance with unit-order powers.
inline MatrixXcd random_source_cov(int k, Philox& rng) {
    const MatrixXcd g = random_complex(k, k, rng);
    MatrixXcd p = g * g.adjoint() / static_cast<double>(k);
    p += 0.2 * MatrixXcd::Identity(k, k);
    return p;
}

/// Random well-separated feasible DoA point.
inline DoaPoint random_doas(int k, Philox& rng, double eps = 0.15) {
    VectorXd raw(k);
    for (int i = 0; i < k; ++i) raw[i] = (2.0 * rng.next_double() - 1.0) * 2.8;
    std::sort(raw.data(), raw.data() + k);
    return DoaPoint(project_feasible(raw, eps), eps);
}

inline Scenario random_scenario(int m, int k, int n, Philox& rng) {
    return Scenario(Manifold(m, 0.25), random_doas(k, rng), random_source_cov(k, rng),
                    0.3 + rng.next_double(), n);
}

}  // namespace testsup
