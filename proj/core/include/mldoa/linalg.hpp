#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>

namespace mldoa {

using cxd = std::complex<double>;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;
using Eigen::VectorXi;

/// Square complex matrix that is Hermitian by construction. The input is
/// validated against its conjugate transpose (1e-12 relative) and then
/// symmetrized, so downstream spectral routines see an exactly Hermitian
/// operand.
class HermitianMatrix {
public:
    explicit HermitianMatrix(const MatrixXcd& a);

    const MatrixXcd& mat() const { return m_; }
    Eigen::Index dim() const { return m_.rows(); }

private:
    MatrixXcd m_;
};

/// Ascending eigenvalues with a paired unitary eigenvector matrix.
struct EigenSystem {
    VectorXd values;    // ascending
    MatrixXcd vectors;  // column k pairs with values[k]
};

/// Full spectral decomposition of a Hermitian matrix. Eigenvalues ascend;
/// each eigenvector is rotated so its largest-magnitude component is real
/// and positive, making the output deterministic for identical input.
EigenSystem herm_eig(const HermitianMatrix& a);

/// Sum of log of eigenvalues above rank_tol * (largest eigenvalue).
/// Equals the ordinary log-determinant when nothing is truncated.
/// Throws NumericalError when no eigenvalue clears the threshold.
double log_pseudo_det(const HermitianMatrix& a, double rank_tol = 1e-10);

namespace detail {
double brent(const std::function<double(double)>& f, double lo, double hi, double tol);
}

/// Brent bracketed scalar root finder (inverse quadratic interpolation with
/// a bisection safeguard). Requires a sign change over [lo, hi]; returns x
/// with |f(x)| <= tol or bracket width <= tol * max(1, |x|).
template <typename F>
double find_root_bracketed(F&& f, double lo, double hi, double tol = 1e-13) {
    return detail::brent(std::function<double(double)>(std::forward<F>(f)), lo, hi, tol);
}

}  // namespace mldoa
