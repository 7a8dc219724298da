#include "mldoa/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mldoa/errors.hpp"

namespace mldoa {

HermitianMatrix::HermitianMatrix(const MatrixXcd& a) {
    if (a.rows() != a.cols() || a.rows() == 0)
        throw std::invalid_argument("HermitianMatrix: input must be square and non-empty");
    if (!a.allFinite()) throw std::invalid_argument("HermitianMatrix: non-finite entries");
    const double scale = a.norm();
    const double dev = (a - a.adjoint()).norm();
    if (dev > 1e-12 * std::max(1.0, scale)) {
        std::ostringstream os;
        os << "HermitianMatrix: input deviates from its conjugate transpose by " << dev
           << " (relative " << dev / std::max(scale, 1e-300) << ")";
        throw std::invalid_argument(os.str());
    }
    m_ = 0.5 * (a + a.adjoint().eval());
}

EigenSystem herm_eig(const HermitianMatrix& a) {
    Eigen::SelfAdjointEigenSolver<MatrixXcd> solver(a.mat());
    if (solver.info() != Eigen::Success) {
        std::ostringstream os;
        os << "herm_eig: eigen iteration did not converge (dim " << a.dim() << ", ||A|| "
           << a.mat().norm() << ", max|entry| " << a.mat().cwiseAbs().maxCoeff() << ")";
        throw NumericalError(os.str());
    }
    EigenSystem sys{solver.eigenvalues(), solver.eigenvectors()};
    // Phase convention: largest-magnitude component of each column real-positive.
    for (Eigen::Index k = 0; k < sys.vectors.cols(); ++k) {
        Eigen::Index imax = 0;
        double best = -1.0;
        for (Eigen::Index i = 0; i < sys.vectors.rows(); ++i) {
            const double m = std::abs(sys.vectors(i, k));
            if (m > best + 1e-14) {
                best = m;
                imax = i;
            }
        }
        const cxd pivot = sys.vectors(imax, k);
        if (std::abs(pivot) > 0) sys.vectors.col(k) *= std::conj(pivot) / std::abs(pivot);
    }
    return sys;
}

double log_pseudo_det(const HermitianMatrix& a, double rank_tol) {
    const EigenSystem sys = herm_eig(a);
    const double lmax = sys.values.maxCoeff();
    const double scale = sys.values.cwiseAbs().maxCoeff();
    if (lmax <= 0.0 || scale == 0.0)
        throw NumericalError("log_pseudo_det: zero matrix has no pseudo-determinant");
    if (sys.values.minCoeff() < -1e-8 * scale)
        throw NumericalError("log_pseudo_det: matrix is not positive semidefinite");
    const double thresh = rank_tol * lmax;
    double acc = 0.0;
    int kept = 0;
    for (Eigen::Index i = 0; i < sys.values.size(); ++i) {
        if (sys.values[i] > thresh) {
            acc += std::log(sys.values[i]);
            ++kept;
        }
    }
    if (kept == 0) throw NumericalError("log_pseudo_det: zero matrix has no pseudo-determinant");
    return acc;
}

namespace detail {

double brent(const std::function<double(double)>& f, double lo, double hi, double tol) {
    double a = lo, b = hi;
    double fa = f(a), fb = f(b);
    if (!(std::isfinite(fa) && std::isfinite(fb)))
        throw NumericalError("find_root_bracketed: non-finite endpoint value");
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if (fa * fb > 0.0) throw std::invalid_argument("find_root_bracketed: bracket invalid (no sign change)");

    double c = a, fc = fa;
    double d = b - a, e = d;
    for (int iter = 0; iter < 200; ++iter) {
        if (std::abs(fc) < std::abs(fb)) {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        const double tol1 = 2.0 * 1e-16 * std::abs(b) + 0.5 * tol;
        const double xm = 0.5 * (c - b);
        if (std::abs(xm) <= tol1 || fb == 0.0 || std::abs(fb) <= tol) return b;
        if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
            // inverse quadratic / secant step
            const double s = fb / fa;
            double p, q;
            if (a == c) {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                const double qq = fa / fc;
                const double r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0) q = -q;
            p = std::abs(p);
            if (2.0 * p < std::min(3.0 * xm * q - std::abs(tol1 * q), std::abs(e * q))) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += (std::abs(d) > tol1) ? d : (xm > 0 ? tol1 : -tol1);
        fb = f(b);
        if ((fb > 0) == (fc > 0)) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
    }
    throw NumericalError("find_root_bracketed: iteration cap reached without convergence");
}

}  // namespace detail

}  // namespace mldoa
