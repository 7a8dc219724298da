#include "mldoa/ml_costs.hpp"

#include <cmath>
#include <sstream>

#include "mldoa/errors.hpp"

namespace mldoa {

Projectors Projectors::build(const MatrixXcd& a) {
    const Eigen::Index m = a.rows(), k = a.cols();
    if (k == 0 || k >= m) throw std::invalid_argument("Projectors: need 1 <= K < M columns");
    const MatrixXcd gram = a.adjoint() * a;
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(gram, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() <= 1e-10 * gram.real().trace() / static_cast<double>(k)) {
        std::ostringstream os;
        os << "Projectors: manifold degenerate at theta (min Gram eigenvalue "
           << es.eigenvalues().minCoeff() << ")";
        throw NumericalError(os.str());
    }
    Eigen::HouseholderQR<MatrixXcd> qr(a);
    Projectors out;
    out.basis = qr.householderQ() * MatrixXcd::Identity(m, k);
    out.r_factor = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
    out.p = out.basis * out.basis.adjoint();
    out.p = 0.5 * (out.p + out.p.adjoint().eval());
    out.p_perp = MatrixXcd::Identity(m, m) - out.p;
    return out;
}

double cml_cost(const Projectors& p, const SampleCovariance& rhat) {
    const Eigen::Index m = p.dim();
    if (rhat.matrix.rows() != m) throw std::invalid_argument("cml_cost: dimension mismatch");
    const double total = rhat.matrix.real().trace();
    const double inside = (p.basis.adjoint() * rhat.matrix * p.basis).real().trace();
    return (total - inside) / static_cast<double>(m);
}

double noise_power_estimate(const Projectors& p, const SampleCovariance& rhat, int k_tilde) {
    const int m = static_cast<int>(p.dim());
    if (k_tilde >= m) throw std::invalid_argument("noise_power_estimate: k_tilde must be below M");
    return cml_cost(p, rhat) * static_cast<double>(m) / static_cast<double>(m - k_tilde);
}

namespace {

// log-det of the symmetrized matrix from its eigenvalues; eigenvalues below
// 1e-12 * max are rejected (the argument is positive definite almost surely).
double logdet_spd(const MatrixXcd& arg, const char* who) {
    const EigenSystem sys = herm_eig(HermitianMatrix(arg));
    const double lmax = sys.values.maxCoeff();
    double acc = 0.0;
    for (Eigen::Index i = 0; i < sys.values.size(); ++i) {
        if (!(sys.values[i] > 1e-12 * lmax)) {
            std::ostringstream os;
            os << who << ": log-det argument not positive definite (eigenvalue " << sys.values[i]
               << " vs max " << lmax << ")";
            throw NumericalError(os.str());
        }
        acc += std::log(sys.values[i]);
    }
    return acc;
}

}  // namespace

CostEvaluation uml_cost(const Projectors& p, const SampleCovariance& rhat, const MatrixXcd* y) {
    const int m = static_cast<int>(p.dim());
    const int k = static_cast<int>(p.rank());
    const int n = rhat.snapshot_count;
    if (n == k)
        throw std::invalid_argument("uml_cost: boundary regime N == K unsupported");

    if (n > k) {
        const double sigma2 = noise_power_estimate(p, rhat, k);
        const MatrixXcd arg = sigma2 * p.p_perp + p.p * rhat.matrix * p.p;
        const double value = logdet_spd(arg, "uml_cost") / static_cast<double>(m);
        return {Method::uml, Regime::oversampled, value, true};
    }

    // Undersampled: N < K.
    const double sigma2 = noise_power_estimate(p, rhat, n);
    double logdet_signal;
    double alpha_min;  // smallest positive signal eigenvalue
    if (y != nullptr) {
        if (y->cols() != n || y->rows() != m)
            throw std::invalid_argument("uml_cost: snapshot matrix dimension mismatch");
        const MatrixXcd gram = (y->adjoint() * p.p * (*y)) / static_cast<double>(n);
        const EigenSystem sys = herm_eig(HermitianMatrix(gram));
        const double lmax = sys.values.maxCoeff();
        if (!(sys.values.minCoeff() > 1e-12 * lmax)) {
            std::ostringstream os;
            os << "uml_cost: projected snapshot Gram matrix is singular (min eigenvalue "
               << sys.values.minCoeff() << ", max " << lmax << ")";
            throw NumericalError(os.str());
        }
        logdet_signal = sys.values.array().log().sum();
        alpha_min = sys.values.minCoeff();
    } else {
        const MatrixXcd r_a = p.p * rhat.matrix * p.p;
        const EigenSystem sys = herm_eig(HermitianMatrix(r_a));
        logdet_signal = log_pseudo_det(HermitianMatrix(r_a));
        alpha_min = std::numeric_limits<double>::infinity();
        const double thresh = 1e-10 * sys.values.maxCoeff();
        for (Eigen::Index i = 0; i < sys.values.size(); ++i)
            if (sys.values[i] > thresh) alpha_min = std::min(alpha_min, sys.values[i]);
    }
    const double value = (static_cast<double>(m - n) / m) * std::log(sigma2) +
                         logdet_signal / static_cast<double>(m);
    return {Method::uml, Regime::undersampled, value, alpha_min >= sigma2};
}

UmlProfile uml_profile(const Projectors& p, const SampleCovariance& rhat) {
    const int m = static_cast<int>(p.dim());
    const int k = static_cast<int>(p.rank());
    const MatrixXcd g = p.basis.adjoint() * rhat.matrix * p.basis;
    const EigenSystem sys = herm_eig(HermitianMatrix(g));  // ascending alpha_1..alpha_K
    const double total = rhat.matrix.real().trace();

    // sigma2_of(j): noise estimate with the top j signal eigenvalues removed.
    auto sigma2_of = [&](int j) {
        double top = 0.0;
        for (int i = 0; i < j; ++i) top += sys.values[k - 1 - i];
        return (total - top) / static_cast<double>(m - j);
    };

    int rank = 0;
    for (int j = k; j >= 1; --j) {
        if (sys.values[k - j] > sigma2_of(j)) {
            rank = j;
            break;
        }
    }

    UmlProfile out;
    out.rank = rank;
    if (rank == 0) {
        out.sigma2 = total / static_cast<double>(m);
        out.source_cov = MatrixXcd::Zero(k, k);
        out.neg_loglik = m * std::log(out.sigma2) + m;
        return out;
    }
    out.sigma2 = sigma2_of(rank);
    double logdet_top = 0.0;
    for (int i = 0; i < rank; ++i) logdet_top += std::log(sys.values[k - 1 - i]);
    out.neg_loglik = (m - rank) * std::log(out.sigma2) + logdet_top + m;

    // Source covariance through the pseudo-inverse of A; basis independent.
    const MatrixXcd q_top = sys.vectors.rightCols(rank);
    VectorXd excess(rank);
    for (int i = 0; i < rank; ++i) excess[i] = sys.values[k - rank + i] - out.sigma2;
    const MatrixXcd core = q_top * excess.asDiagonal() * q_top.adjoint();
    const MatrixXcd rinv_core =
        p.r_factor.triangularView<Eigen::Upper>().solve(core);
    out.source_cov =
        p.r_factor.triangularView<Eigen::Upper>().solve(rinv_core.adjoint()).adjoint();
    out.source_cov = 0.5 * (out.source_cov + out.source_cov.adjoint().eval());
    return out;
}

}  // namespace mldoa
