#include "mldoa/asy_cov.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "mldoa/contour.hpp"
#include "mldoa/errors.hpp"

namespace mldoa {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

MatrixXcd psd_sqrt(const HermitianMatrix& r) {
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(r.mat());
    const VectorXd clamped = es.eigenvalues().cwiseMax(0.0);
    return es.eigenvectors() * clamped.cwiseSqrt().asDiagonal() * es.eigenvectors().adjoint();
}

double real_trace_product(const MatrixXcd& a, const MatrixXcd& b) {
    // tr(AB) for Hermitian A, B is real.
    return (a * b).trace().real();
}

double min_eigenvalue(const MatrixXd& m) {
    if (m.rows() == 0) return std::numeric_limits<double>::infinity();
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

}  // namespace

MatrixXcd weighted_signal_projector(const HermitianMatrix& r, const MatrixXcd& r_sqrt,
                                    const MatrixXcd& a, double phi0) {
    MatrixXcd core = a.adjoint() * r.mat() * a;
    if (phi0 != 0.0) core -= phi0 * (a.adjoint() * a);
    const MatrixXcd rhs = a.adjoint() * r_sqrt;
    const MatrixXcd solved = core.ldlt().solve(rhs);
    MatrixXcd q = rhs.adjoint() * solved;
    return 0.5 * (q + q.adjoint().eval());
}

SpectralPoint projected_spectral_point(const HermitianMatrix& r, const MatrixXcd& r_sqrt,
                                       const Projectors& p, int n) {
    SpectralPoint out;
    out.spectrum = projected_spectrum(r, p);
    const MatrixXcd r_a = p.p * r.mat() * p.p;
    const EigenSystem sys = herm_eig(HermitianMatrix(r_a));
    const int k = static_cast<int>(p.rank());
    const Eigen::Index m = r.dim();
    out.gammas = sys.values.tail(k);
    out.w = r_sqrt * sys.vectors.rightCols(k);
    out.root = solve_negative_root(out.spectrum, n);
    (void)m;
    return out;
}

SpectralPoint identity_spectral_point(const HermitianMatrix& r, const MatrixXcd& r_sqrt, int n) {
    SpectralPoint out;
    out.spectrum = full_spectrum(r);
    const EigenSystem sys = herm_eig(r);
    out.gammas = sys.values;
    out.w = r_sqrt * sys.vectors;
    out.root = solve_negative_root(out.spectrum, n);
    return out;
}

PointFamily PointFamily::build(const Manifold& man, const HermitianMatrix& r,
                               const std::vector<DoaPoint>& points, int snapshots) {
    if (points.empty()) throw std::invalid_argument("PointFamily: need at least the true point");
    const int k = static_cast<int>(points.front().size());
    if (snapshots == k)
        throw std::invalid_argument("PointFamily: N == K unsupported");
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (points[i].size() != k)
            throw std::invalid_argument("PointFamily: inconsistent point dimensions");
        for (std::size_t j = i + 1; j < points.size(); ++j)
            if ((points[i].angles - points[j].angles).cwiseAbs().maxCoeff() < 1e-12)
                throw std::invalid_argument("PointFamily: duplicate candidate points");
    }

    PointFamily pf{r, psd_sqrt(r), man, snapshots, k, {}};
    const int k_tilde = std::min(k, snapshots);
    const int m = man.elements;
    pf.points.reserve(points.size());
    for (const auto& theta : points) {
        FamilyPoint fp{theta, Projectors::build(steering_matrix(man, theta)), 0.0, {}, {}, {}};
        const double perp_trace = static_cast<double>(m) * asymptotic_cml_cost(r, fp.proj);
        fp.sigma2 = perp_trace / static_cast<double>(m - k_tilde);
        if (!(fp.sigma2 > 0.0)) throw NumericalError("PointFamily: nonpositive noise trace");
        fp.weighted_perp = pf.r_sqrt * fp.proj.p_perp * pf.r_sqrt;
        fp.spectral = projected_spectral_point(r, pf.r_sqrt, fp.proj, snapshots);
        fp.coupling = weighted_signal_projector(r, pf.r_sqrt, steering_matrix(man, theta),
                                                fp.spectral.root.value);
        pf.points.push_back(std::move(fp));
    }
    return pf;
}

MatrixXd cml_covariance(const PointFamily& pf) {
    const int l1 = static_cast<int>(pf.points.size());
    MatrixXd g(l1, l1);
    for (int i = 0; i < l1; ++i)
        for (int j = i; j < l1; ++j) {
            g(i, j) = real_trace_product(pf.points[i].weighted_perp, pf.points[j].weighted_perp) /
                      pf.snapshots;
            g(j, i) = g(i, j);
        }
    return 0.5 * (g + g.transpose().eval());
}

MatrixXd uml_covariance(const PointFamily& pf) {
    const int l1 = static_cast<int>(pf.points.size());
    MatrixXd g(l1, l1);
    const double n = pf.snapshots;
    for (int i = 0; i < l1; ++i) {
        for (int j = i; j < l1; ++j) {
            const auto& a = pf.points[i];
            const auto& b = pf.points[j];
            const double perp_perp = real_trace_product(a.weighted_perp, b.weighted_perp) / n;
            const double perp_q_ab = real_trace_product(a.weighted_perp, b.coupling) / n;
            const double perp_q_ba = real_trace_product(b.weighted_perp, a.coupling) / n;
            const double qq = real_trace_product(a.coupling, b.coupling) / n;
            const double log_arg = 1.0 - qq;
            if (std::abs(log_arg) < 1e-10) {
                std::ostringstream os;
                os << "uml_covariance: coupling overlap degenerates at points (" << i << ", " << j
                   << "): 1 - tr[QQ]/N = " << log_arg;
                throw NumericalError(os.str());
            }
            if (log_arg < 0.0)
                throw NumericalError("uml_covariance: coupling overlap exceeds one (conditioning violated)");
            g(i, j) = perp_perp / (a.sigma2 * b.sigma2) + perp_q_ba / b.sigma2 +
                      perp_q_ab / a.sigma2 - std::log(log_arg);
            g(j, i) = g(i, j);
        }
    }
    return 0.5 * (g + g.transpose().eval());
}

FamilyConditioning conditioning_diagnostics(const PointFamily& pf) {
    const int l = pf.extra_count();
    MatrixXd wp(l, l), wq(l, l);
    for (int i = 0; i < l; ++i)
        for (int j = 0; j < l; ++j) {
            const auto& a = pf.points[i + 1];
            const auto& b = pf.points[j + 1];
            wp(i, j) = (a.proj.p_perp * b.proj.p_perp).trace().real() / pf.snapshots;
            wq(i, j) = real_trace_product(a.coupling, b.coupling) / pf.snapshots;
        }
    return {min_eigenvalue(0.5 * (wp + wp.transpose().eval())),
            min_eigenvalue(0.5 * (wq + wq.transpose().eval()))};
}

GammaMatrices build_gamma(const PointFamily& pf) {
    GammaMatrices out{cml_covariance(pf), uml_covariance(pf), {}};
    const FamilyConditioning fc = conditioning_diagnostics(pf);
    out.diagnostics = {fc.min_eig_wp, fc.min_eig_wq, min_eigenvalue(out.cml),
                       min_eigenvalue(out.uml)};
    return out;
}

double cov_trace_vs_logdet(const MatrixXcd& r_sqrt, const MatrixXcd* p_ell, const MatrixXcd& q_m,
                           int n) {
    const MatrixXcd weighted =
        (p_ell == nullptr) ? MatrixXcd(r_sqrt * r_sqrt) : MatrixXcd(r_sqrt * (*p_ell) * r_sqrt);
    return (weighted * q_m).trace().real() / n;
}

double cov_logdet_vs_logdet(const MatrixXcd& q_ell, const MatrixXcd& q_m, int n) {
    const double qq = (q_ell * q_m).trace().real() / n;
    const double log_arg = 1.0 - qq;
    if (std::abs(log_arg) < 1e-10)
        throw NumericalError("cov_logdet_vs_logdet: log argument degenerates");
    return -std::log(std::abs(log_arg));
}

namespace {

// Counterclockwise contour in the transformed plane for one spectral point.
Contour oracle_contour(const SpectralPoint& sp, int n, double margin_frac, int nodes) {
    const VectorXd roots = characteristic_roots(sp.spectrum, n);
    return [&] {
        const ClusteredSpectrum& s = sp.spectrum;
        std::vector<cxd> enclose;
        for (int i = s.positive_begin(); i < s.distinct_count(); ++i)
            enclose.emplace_back(s.values[i], 0.0);
        for (Eigen::Index i = 1; i < roots.size(); ++i) enclose.emplace_back(roots[i], 0.0);
        const double phi0 = roots[0];
        double lo = enclose.front().real(), hi = enclose.front().real();
        for (const auto& p : enclose) {
            lo = std::min(lo, p.real());
            hi = std::max(hi, p.real());
        }
        double span = hi - lo;
        if (span <= 0.1 * hi) span = 0.1 * hi;
        const double x_right = hi + margin_frac * span;
        const double x_left = std::max(lo - margin_frac * span, 0.5 * (phi0 + lo));
        const double radius = 0.5 * (x_right - x_left);
        return Contour(cxd(0.5 * (x_left + x_right), 0.0), radius, radius, nodes,
                       Orientation::counterclockwise, enclose, {cxd(phi0, 0.0)});
    }();
}

struct OracleAxis {
    std::vector<cxd> u;      // flattened per-node resolvent weights (nodes x K)
    std::vector<cxd> usq;    // squared weights
    std::vector<cxd> g_dz;   // f(z(w)) * dz/dt * dt weight
    int nodes;
    int k;
};

OracleAxis build_axis(const SpectralPoint& sp, int n, TraceFunctional f, const Contour& c) {
    OracleAxis ax;
    ax.nodes = c.node_count();
    ax.k = static_cast<int>(sp.gammas.size());
    ax.u.resize(static_cast<std::size_t>(ax.nodes) * ax.k);
    ax.usq.resize(ax.u.size());
    ax.g_dz.resize(static_cast<std::size_t>(ax.nodes));
    const double scale = sp.spectrum.max_value();
    for (int t = 0; t < ax.nodes; ++t) {
        const cxd w = c.node(t);
        cxd phi = 0.0;
        for (int i = 0; i < ax.k; ++i) {
            const cxd res = 1.0 / (sp.gammas[i] - w);
            ax.u[static_cast<std::size_t>(t) * ax.k + i] = res;
            ax.usq[static_cast<std::size_t>(t) * ax.k + i] = res * res;
            phi += sp.gammas[i] * res;
        }
        phi /= static_cast<double>(n);
        const cxd z = w * (1.0 - phi);
        if (f == TraceFunctional::log && z.real() <= 0.0 && std::abs(z.imag()) <= 1e-12 * scale)
            throw NumericalError("covariance_contour_oracle: contour image touches the log branch cut");
        const cxd g = (f == TraceFunctional::identity) ? z : std::log(z);
        ax.g_dz[static_cast<std::size_t>(t)] = g * c.node_derivative(t) * (kTwoPi / ax.nodes);
    }
    return ax;
}

cxd oracle_pass(const SpectralPoint& pr, const SpectralPoint& pm, TraceFunctional fr,
                TraceFunctional fm, int n, int nodes, double margin) {
    const Contour c1 = oracle_contour(pr, n, margin, nodes);
    const Contour c2 = oracle_contour(pm, n, margin, nodes);
    const OracleAxis a1 = build_axis(pr, n, fr, c1);
    const OracleAxis a2 = build_axis(pm, n, fm, c2);

    // Coupling weights |w_r^H w_m|^2 / N.
    const MatrixXcd cross = pr.w.adjoint() * pm.w;
    const MatrixXd wgt = cross.cwiseAbs2() / static_cast<double>(n);

    using RowMat = Eigen::Matrix<cxd, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    const Eigen::Map<const RowMat> u2(a2.u.data(), a2.nodes, a2.k);
    const Eigen::Map<const RowMat> u2sq(a2.usq.data(), a2.nodes, a2.k);
    const MatrixXcd wgt_c = wgt.cast<cxd>();

    cxd acc = 0.0;
    for (int t1 = 0; t1 < a1.nodes; ++t1) {
        const Eigen::Map<const VectorXcd> u1(a1.u.data() + static_cast<std::size_t>(t1) * a1.k, a1.k);
        const Eigen::Map<const VectorXcd> u1sq(a1.usq.data() + static_cast<std::size_t>(t1) * a1.k,
                                               a1.k);
        const VectorXcd row_psi = wgt_c.transpose() * u1;      // per gamma_m column
        const VectorXcd row_psi_d1 = wgt_c.transpose() * u1sq;
        const VectorXcd psi = u2 * row_psi;        // Psi(w1, w2_j)
        const VectorXcd psi_d1 = u2 * row_psi_d1;  // dPsi/dw1
        const VectorXcd psi_d2 = u2sq * row_psi;   // dPsi/dw2
        const VectorXcd psi_d12 = u2sq * row_psi_d1;

        cxd inner = 0.0;
        for (int t2 = 0; t2 < a2.nodes; ++t2) {
            const cxd one_minus = 1.0 - psi[t2];
            if (std::abs(one_minus) < 1e-6)
                throw NumericalError("covariance_contour_oracle: 1 - Psi degenerates on the grid");
            const cxd phi_mixed =
                psi_d12[t2] / one_minus + psi_d1[t2] * psi_d2[t2] / (one_minus * one_minus);
            inner += a2.g_dz[static_cast<std::size_t>(t2)] * phi_mixed;
        }
        acc += a1.g_dz[static_cast<std::size_t>(t1)] * inner;
    }
    // Two factors of 1/(2 pi j).
    return acc / (kTwoPi * cxd(0.0, 1.0)) / (kTwoPi * cxd(0.0, 1.0));
}

}  // namespace

double covariance_contour_oracle(const SpectralPoint& pr, const SpectralPoint& pm,
                                 TraceFunctional fr, TraceFunctional fm, int n) {
    const double margins[] = {1.2, 1.1, 1.05};
    std::string last_err;
    for (double margin : margins) {
        try {
            int nodes = 256;
            cxd prev = oracle_pass(pr, pm, fr, fm, n, nodes, margin);
            for (int it = 0; it < 4; ++it) {
                nodes *= 2;
                const cxd cur = oracle_pass(pr, pm, fr, fm, n, nodes, margin);
                if (std::abs(cur - prev) <= 5e-8 * (1.0 + std::abs(cur))) {
                    if (std::abs(cur.imag()) > 1e-6 * (1.0 + std::abs(cur.real())))
                        throw NumericalError("covariance_contour_oracle: non-real result");
                    return cur.real();
                }
                prev = cur;
            }
            throw NumericalError("covariance_contour_oracle: node doubling failed to converge");
        } catch (const std::exception& e) {
            last_err = e.what();
        }
    }
    throw NumericalError("covariance_contour_oracle: all contour margins failed: " + last_err);
}

}  // namespace mldoa
