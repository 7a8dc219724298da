#include "mldoa/array_model.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "mldoa/errors.hpp"
#include "mldoa/random.hpp"

namespace mldoa {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kFeasSlack = 1e-9;  // tolerate round-off from projections
}

Manifold::Manifold(int m, double d) : elements(m), spacing_wavelengths(d) {
    if (m < 2) throw std::invalid_argument("Manifold: need at least 2 elements");
    if (!(d > 0.0)) throw std::invalid_argument("Manifold: spacing must be positive");
}

DoaPoint::DoaPoint(VectorXd theta, double spacing_eps) : angles(std::move(theta)), eps(spacing_eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("DoaPoint: eps must be positive");
    const Eigen::Index k = angles.size();
    if (k == 0) throw std::invalid_argument("DoaPoint: empty angle vector");
    if (angles[0] < -kPi + eps - kFeasSlack || angles[k - 1] > kPi - eps + kFeasSlack) {
        std::ostringstream os;
        os << "DoaPoint: angles outside [-pi+eps, pi-eps] (eps = " << eps << ")";
        throw std::invalid_argument(os.str());
    }
    for (Eigen::Index i = 1; i < k; ++i) {
        if (angles[i] < angles[i - 1] + eps - kFeasSlack) {
            std::ostringstream os;
            os << "DoaPoint: angles " << i - 1 << " and " << i << " closer than eps = " << eps;
            throw std::invalid_argument(os.str());
        }
    }
}

double electrical_from_physical_deg(double beta_deg) {
    return kPi * std::sin(beta_deg * kPi / 180.0);
}

double physical_deg_from_electrical(double theta) {
    return std::asin(theta / kPi) * 180.0 / kPi;
}

Scenario::Scenario(Manifold man, DoaPoint doas, MatrixXcd p_s, double sigma2, int n)
    : manifold(man), true_doas(std::move(doas)), source_cov(std::move(p_s)), noise_power(sigma2),
      snapshots(n) {
    const Eigen::Index k = true_doas.size();
    if (source_cov.rows() != k || source_cov.cols() != k)
        throw std::invalid_argument("Scenario: source covariance dimension mismatch");
    if (!(noise_power > 0.0)) throw std::invalid_argument("Scenario: noise power must be positive");
    if (snapshots < 1) throw std::invalid_argument("Scenario: need at least one snapshot");
    if (k >= manifold.elements)
        throw std::invalid_argument("Scenario: source count must be below element count");

    const HermitianMatrix ps(source_cov);  // validates hermiticity
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(ps.mat(), Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-10 * std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff()))
        throw std::invalid_argument("Scenario: source covariance is not PSD");

    const MatrixXcd a = steering_matrix(manifold, true_doas);
    Eigen::SelfAdjointEigenSolver<MatrixXcd> gram(MatrixXcd(a.adjoint() * a), Eigen::EigenvaluesOnly);
    if (gram.eigenvalues().minCoeff() <= 1e-8 * manifold.elements)
        throw std::invalid_argument("Scenario: steering matrix nearly rank deficient at true DoAs");
}

MatrixXcd steering_matrix(const Manifold& man, const VectorXd& angles) {
    const int m = man.elements;
    const Eigen::Index k = angles.size();
    MatrixXcd a(m, k);
    for (Eigen::Index c = 0; c < k; ++c) {
        const double phase_step = 2.0 * man.spacing_wavelengths * angles[c];
        for (int r = 0; r < m; ++r) a(r, c) = std::polar(1.0, phase_step * r);
    }
    return a;
}

HermitianMatrix build_covariance(const Scenario& sc) {
    const MatrixXcd a = steering_matrix(sc.manifold, sc.true_doas);
    MatrixXcd r = a * sc.source_cov * a.adjoint();
    r += sc.noise_power * MatrixXcd::Identity(r.rows(), r.cols());
    return HermitianMatrix(r);
}

MatrixXcd generate_snapshots(const Scenario& sc, std::uint64_t seed, std::uint64_t stream) {
    const HermitianMatrix r = build_covariance(sc);
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(r.mat());
    const VectorXd clamped = es.eigenvalues().cwiseMax(0.0);
    const MatrixXcd sqrt_r =
        es.eigenvectors() * clamped.cwiseSqrt().asDiagonal() * es.eigenvectors().adjoint();

    const int m = sc.manifold.elements;
    const int n = sc.snapshots;
    Philox rng(seed, stream);
    MatrixXcd x(m, n);
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (int col = 0; col < n; ++col)
        for (int row = 0; row < m; ++row)
            x(row, col) = cxd(rng.next_normal() * inv_sqrt2, rng.next_normal() * inv_sqrt2);
    return sqrt_r * x;
}

SampleCovariance sample_covariance(const MatrixXcd& y) {
    const int n = static_cast<int>(y.cols());
    MatrixXcd r = y * y.adjoint() / static_cast<double>(n);
    r = 0.5 * (r + r.adjoint().eval());
    return {std::move(r), n};
}

}  // namespace mldoa
