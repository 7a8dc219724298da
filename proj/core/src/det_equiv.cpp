#include "mldoa/det_equiv.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "mldoa/contour.hpp"
#include "mldoa/errors.hpp"

namespace mldoa {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr cxd kImag{0.0, 1.0};
}

int ClusteredSpectrum::positive_mass() const {
    int acc = 0;
    for (int i = positive_begin(); i < distinct_count(); ++i) acc += mults[i];
    return acc;
}

ClusteredSpectrum cluster_eigenvalues(const VectorXd& ascending, double rel_tol, double zero_tol) {
    const Eigen::Index m = ascending.size();
    if (m == 0) throw std::invalid_argument("cluster_eigenvalues: empty spectrum");
    const double scale = ascending.cwiseAbs().maxCoeff();
    const double zcut = zero_tol * std::max(scale, 1e-300);

    std::vector<double> values;
    std::vector<int> mults;
    int zeros = 0;
    for (Eigen::Index i = 0; i < m; ++i) {
        const double v = ascending[i];
        if (std::abs(v) <= zcut) {
            ++zeros;
            continue;
        }
        if (v < 0.0) {
            std::ostringstream os;
            os << "cluster_eigenvalues: significantly negative eigenvalue " << v;
            throw NumericalError(os.str());
        }
        if (!values.empty() && v - values.back() <= rel_tol * v) {
            // merge into the running cluster, tracking its mean
            values.back() = (values.back() * mults.back() + v) / (mults.back() + 1);
            ++mults.back();
        } else {
            values.push_back(v);
            mults.push_back(1);
        }
    }

    ClusteredSpectrum out;
    const int distinct = static_cast<int>(values.size()) + (zeros > 0 ? 1 : 0);
    out.values.resize(distinct);
    out.mults.resize(distinct);
    int at = 0;
    if (zeros > 0) {
        out.values[at] = 0.0;
        out.mults[at] = zeros;
        ++at;
    }
    for (std::size_t i = 0; i < values.size(); ++i, ++at) {
        out.values[at] = values[i];
        out.mults[at] = mults[i];
    }
    out.total_dim = static_cast<int>(m);
    return out;
}

ClusteredSpectrum projected_spectrum(const HermitianMatrix& r, const Projectors& p) {
    const MatrixXcd r_a = p.p * r.mat() * p.p;
    const EigenSystem sys = herm_eig(HermitianMatrix(r_a));
    ClusteredSpectrum s = cluster_eigenvalues(sys.values);
    const int k = static_cast<int>(p.rank());
    if (s.positive_mass() != k) {
        std::ostringstream os;
        os << "projected_spectrum: expected " << k << " positive eigenvalues, found "
           << s.positive_mass() << " (manifold rank condition violated numerically)";
        throw NumericalError(os.str());
    }
    // Force the exact nullspace multiplicity.
    if (!s.has_zero()) {
        ClusteredSpectrum with_zero;
        with_zero.values.resize(s.distinct_count() + 1);
        with_zero.mults.resize(s.distinct_count() + 1);
        with_zero.values[0] = 0.0;
        with_zero.mults[0] = 0;
        with_zero.values.tail(s.distinct_count()) = s.values;
        with_zero.mults.tail(s.distinct_count()) = s.mults;
        with_zero.total_dim = s.total_dim;
        s = with_zero;
    }
    s.mults[0] = s.total_dim - k;
    return s;
}

ClusteredSpectrum full_spectrum(const HermitianMatrix& r) {
    const EigenSystem sys = herm_eig(r);
    ClusteredSpectrum s = cluster_eigenvalues(sys.values);
    if (s.has_zero())
        throw NumericalError("full_spectrum: covariance is singular; expected positive definite");
    return s;
}

cxd weighted_trace(const ClusteredSpectrum& s, int n, cxd omega) {
    cxd acc = 0.0;
    for (int i = s.positive_begin(); i < s.distinct_count(); ++i)
        acc += static_cast<double>(s.mults[i]) * s.values[i] / (s.values[i] - omega);
    return acc / static_cast<double>(n);
}

cxd weighted_trace_sq(const ClusteredSpectrum& s, int n, cxd omega) {
    cxd acc = 0.0;
    for (int i = s.positive_begin(); i < s.distinct_count(); ++i) {
        const cxd t = s.values[i] / (s.values[i] - omega);
        acc += static_cast<double>(s.mults[i]) * t * t;
    }
    return acc / static_cast<double>(n);
}

cxd resolvent_sum(const ClusteredSpectrum& s, cxd omega) {
    cxd acc = 0.0;
    for (int i = 0; i < s.distinct_count(); ++i)
        acc += static_cast<double>(s.mults[i]) / (s.values[i] - omega);
    return acc / static_cast<double>(s.total_dim);
}

cxd inverse_map(const ClusteredSpectrum& s, int n, cxd omega) {
    return omega * (1.0 - weighted_trace(s, n, omega));
}

cxd omega_derivative(const ClusteredSpectrum& s, int n, cxd omega) {
    return 1.0 / (1.0 - weighted_trace_sq(s, n, omega));
}

NegativeRoot solve_negative_root(const ClusteredSpectrum& s, int n) {
    const int mass = s.positive_mass();
    if (mass < n) return {0.0, Regime::oversampled, 0.0};
    if (mass == n)
        throw std::invalid_argument(
            "solve_negative_root: positive spectral mass equals snapshot count (excluded regime)");

    // Undersampled: the root obeys |phi0| >= lower_bound, which seeds the bracket.
    double inv_weight = 0.0;
    for (int i = s.positive_begin(); i < s.distinct_count(); ++i)
        inv_weight += static_cast<double>(s.mults[i]) / s.values[i];
    inv_weight /= static_cast<double>(n);
    const double lower_bound = (static_cast<double>(mass) / n - 1.0) / inv_weight;

    auto eqn = [&](double phi) { return weighted_trace(s, n, cxd(phi, 0.0)).real() - 1.0; };
    double hi = -lower_bound;
    while (eqn(hi) < 0.0) hi *= 0.5;  // round-off guard; the bound is mathematically valid
    double lo = 2.0 * std::min(hi, -lower_bound);
    for (int i = 0; i < 200 && eqn(lo) > 0.0; ++i) lo *= 2.0;
    double root = find_root_bracketed(eqn, lo, hi, 1e-13);
    for (int i = 0; i < 3; ++i) {  // Newton polish
        const double f = eqn(root);
        double deriv = 0.0;  // d/dphi of the trace equation
        for (int j = s.positive_begin(); j < s.distinct_count(); ++j)
            deriv += s.mults[j] * s.values[j] / ((s.values[j] - root) * (s.values[j] - root));
        deriv /= n;
        if (deriv != 0.0) root -= f / deriv;
    }
    return {root, Regime::undersampled, std::abs(eqn(root))};
}

double asymptotic_cml_cost(const HermitianMatrix& r, const Projectors& p) {
    const double total = r.mat().real().trace();
    const double inside = (p.basis.adjoint() * r.mat() * p.basis).real().trace();
    return (total - inside) / static_cast<double>(r.dim());
}

double asymptotic_uml_cost(const HermitianMatrix& r, const Projectors& p, int n) {
    const int m = static_cast<int>(r.dim());
    const int k = static_cast<int>(p.rank());
    if (n == k) throw std::invalid_argument("asymptotic_uml_cost: N == K unsupported");
    const ClusteredSpectrum s = projected_spectrum(r, p);
    const double perp_trace = static_cast<double>(m) * asymptotic_cml_cost(r, p);

    double log_pos = 0.0;
    if (n > k) {
        const double sigma2 = perp_trace / static_cast<double>(m - k);
        for (int i = s.positive_begin(); i < s.distinct_count(); ++i)
            log_pos += s.mults[i] * std::log(s.values[i]);
        return ((m - k) * std::log(sigma2) + log_pos) / m +
               (static_cast<double>(n - k) / m) * std::log(static_cast<double>(n) / (n - k)) -
               static_cast<double>(k) / m;
    }
    const NegativeRoot root = solve_negative_root(s, n);
    const double abs_phi = -root.value;
    const double sigma2 = perp_trace / static_cast<double>(m - n);
    for (int i = s.positive_begin(); i < s.distinct_count(); ++i)
        log_pos += s.mults[i] * std::log(s.values[i] - root.value);
    return ((m - k) * std::log(abs_phi) + log_pos) / m +
           (static_cast<double>(m - n) / m) * std::log(sigma2) -
           (static_cast<double>(m - n) / m) * std::log(abs_phi) - static_cast<double>(n) / m;
}

cxd stieltjes_transform(const VectorXd& eigenvalues, cxd z) {
    const double scale = std::max(eigenvalues.cwiseAbs().maxCoeff(), std::abs(z));
    cxd acc = 0.0;
    for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
        const cxd d = eigenvalues[i] - z;
        if (std::abs(d) <= 1e-12 * scale)
            throw NumericalError("stieltjes_transform: z too close to the spectrum");
        acc += 1.0 / d;
    }
    return acc / static_cast<double>(eigenvalues.size());
}

cxd stieltjes_transform(const HermitianMatrix& a, cxd z) {
    return stieltjes_transform(herm_eig(a).values, z);
}

SupportEdges support_edges(const ClusteredSpectrum& s, int n) {
    const int pb = s.positive_begin();
    const double g_min = s.values[pb];
    const double g_max = s.max_value();
    auto crit = [&](double w) { return weighted_trace_sq(s, n, cxd(w, 0.0)).real() - 1.0; };

    double hi = g_min * (1.0 - 1e-10);
    while (crit(hi) < 0.0) hi = g_min - 0.5 * (g_min - hi);
    double lo = g_min - g_max;
    for (int i = 0; i < 200 && crit(lo) > 0.0; ++i) lo = g_min - 2.0 * (g_min - lo);
    const double omega_lo = find_root_bracketed(crit, lo, hi, 1e-13);

    double lo2 = g_max * (1.0 + 1e-10);
    while (crit(lo2) < 0.0) lo2 = g_max + 0.5 * (lo2 - g_max);
    double hi2 = 2.0 * g_max;
    for (int i = 0; i < 200 && crit(hi2) > 0.0; ++i) hi2 = g_max + 2.0 * (hi2 - g_max);
    const double omega_hi = find_root_bracketed(crit, lo2, hi2, 1e-13);

    return {omega_lo, omega_hi, inverse_map(s, n, cxd(omega_lo, 0.0)).real(),
            inverse_map(s, n, cxd(omega_hi, 0.0)).real()};
}

VectorXd characteristic_roots(const ClusteredSpectrum& s, int n) {
    const int pb = s.positive_begin();
    const int mbar = s.distinct_count() - pb;  // distinct positive eigenvalues
    const double scale = s.max_value();

    // Clear (1/N) sum K g/(g - phi) = 1 to a degree-mbar polynomial.
    std::vector<double> full{1.0};  // product of (g_m - phi), ascending coeffs
    auto multiply = [](const std::vector<double>& poly, double g) {
        std::vector<double> out(poly.size() + 1, 0.0);
        for (std::size_t i = 0; i < poly.size(); ++i) {
            out[i] += poly[i] * g;       // constant term of (g - phi)
            out[i + 1] -= poly[i];       // -phi term
        }
        return out;
    };
    for (int i = pb; i < s.distinct_count(); ++i) full = multiply(full, s.values[i]);

    std::vector<double> poly = full;
    for (int m = pb; m < s.distinct_count(); ++m) {
        std::vector<double> part{1.0};
        for (int j = pb; j < s.distinct_count(); ++j)
            if (j != m) part = multiply(part, s.values[j]);
        const double w = static_cast<double>(s.mults[m]) * s.values[m] / static_cast<double>(n);
        for (std::size_t i = 0; i < part.size(); ++i) poly[i] -= w * part[i];
    }

    // Monic companion matrix eigensolve.
    const double lead = poly.back();
    MatrixXd comp = MatrixXd::Zero(mbar, mbar);
    for (int i = 0; i < mbar; ++i) {
        if (i + 1 < mbar) comp(i + 1, i) = 1.0;
        comp(i, mbar - 1) = -poly[static_cast<std::size_t>(i)] / lead;
    }
    std::vector<double> real_roots;
    if (mbar == 1) {
        real_roots.push_back(-poly[0] / lead);
    } else {
        Eigen::EigenSolver<MatrixXd> es(comp);
        if (es.info() != Eigen::Success)
            throw NumericalError("characteristic_roots: companion eigensolve failed");
        for (int i = 0; i < mbar; ++i) {
            const cxd r = es.eigenvalues()[i];
            if (std::abs(r.imag()) <= 1e-8 * scale) real_roots.push_back(r.real());
        }
    }
    if (static_cast<int>(real_roots.size()) != mbar) {
        std::ostringstream os;
        os << "characteristic_roots: expected " << mbar << " real roots, found "
           << real_roots.size();
        throw NumericalError(os.str());
    }
    real_roots.push_back(0.0);
    std::sort(real_roots.begin(), real_roots.end());
    return Eigen::Map<VectorXd>(real_roots.data(), static_cast<Eigen::Index>(real_roots.size()));
}

namespace {

cxd newton_omega(const ClusteredSpectrum& s, int n, cxd z, cxd start, bool reflect_upper) {
    cxd w = start;
    const double target = 1e-13 * std::max(1.0, std::abs(z)) * std::max(1.0, s.max_value());
    cxd f = inverse_map(s, n, w) - z;
    for (int it = 0; it < 100; ++it) {
        if (std::abs(f) <= target) return w;
        const cxd deriv = 1.0 - weighted_trace_sq(s, n, w);
        if (std::abs(deriv) < 1e-300) break;
        cxd step = f / deriv;
        for (int h = 0; h < 30; ++h) {
            cxd cand = w - step;
            if (reflect_upper && cand.imag() < 0.0) cand = std::conj(cand);
            const cxd fc = inverse_map(s, n, cand) - z;
            if (std::abs(fc) < std::abs(f)) {
                w = cand;
                f = fc;
                break;
            }
            step *= 0.5;
            if (h == 29) return cxd(std::nan(""), 0.0);
        }
    }
    return (std::abs(f) <= target) ? w : cxd(std::nan(""), 0.0);
}

bool is_bad(cxd w) { return std::isnan(w.real()) || std::isnan(w.imag()); }

}  // namespace

cxd solve_omega(const ClusteredSpectrum& s, int n, cxd z) {
    const double scale = s.max_value();
    if (z.imag() < 0.0) return std::conj(solve_omega(s, n, std::conj(z)));

    if (z.imag() > 1e-14 * std::max(1.0, std::abs(z))) {
        const cxd starts[] = {z, z + cxd(0.0, scale), cxd(0.0, scale)};
        for (const cxd& s0 : starts) {
            const cxd w = newton_omega(s, n, z, s0, true);
            if (!is_bad(w) && w.imag() >= -1e-9 * scale) return w;
        }
        std::ostringstream os;
        os << "solve_omega: Newton failed at z = " << z.real() << " + " << z.imag() << "j"
           << " (residuals above tolerance from all starts)";
        throw NumericalError(os.str());
    }

    // Real axis: analytic continuation outside the support via brackets.
    const double x = z.real();
    if (x == 0.0) throw std::invalid_argument("solve_omega: z = 0 is a support point");
    const SupportEdges edges = support_edges(s, n);
    auto f = [&](double w) { return inverse_map(s, n, cxd(w, 0.0)).real() - x; };
    if (x > 0.0 && x < edges.z_lo) {
        const double phi0 = solve_negative_root(s, n).value;
        return cxd(find_root_bracketed(f, phi0, edges.omega_lo, 1e-14 * std::max(1.0, scale)), 0.0);
    }
    if (x > edges.z_hi) {
        double hi = edges.omega_hi + scale;
        for (int i = 0; i < 200 && f(hi) < 0.0; ++i) hi = edges.omega_hi + 2.0 * (hi - edges.omega_hi);
        return cxd(
            find_root_bracketed(f, edges.omega_hi * (1.0 + 1e-12) + 1e-300, hi,
                                1e-14 * std::max(1.0, scale)),
            0.0);
    }
    if (x < 0.0) {
        const double phi0 = solve_negative_root(s, n).value;
        double lo = phi0 - scale;
        for (int i = 0; i < 200 && f(lo) > 0.0; ++i) lo = phi0 - 2.0 * (phi0 - lo);
        return cxd(find_root_bracketed(f, lo, phi0, 1e-14 * std::max(1.0, scale)), 0.0);
    }
    std::ostringstream os;
    os << "solve_omega: real z = " << x << " lies inside the asymptotic support [" << edges.z_lo
       << ", " << edges.z_hi << "]";
    throw NumericalError(os.str());
}

cxd stieltjes_equivalent(const ClusteredSpectrum& s, int n, cxd z) {
    const cxd w = solve_omega(s, n, z);
    return (w / z) * resolvent_sum(s, w);
}

double asymptotic_log_pdet_closed(const ClusteredSpectrum& s, int n) {
    const int m = s.total_dim;
    const int mass = s.positive_mass();
    const NegativeRoot root = solve_negative_root(s, n);
    double acc = 0.0;
    if (root.regime == Regime::oversampled) {
        for (int i = s.positive_begin(); i < s.distinct_count(); ++i)
            acc += s.mults[i] * std::log(s.values[i]);
        return acc / m +
               (static_cast<double>(n - mass) / m) * std::log(static_cast<double>(n) / (n - mass)) -
               static_cast<double>(mass) / m;
    }
    for (int i = s.positive_begin(); i < s.distinct_count(); ++i)
        acc += s.mults[i] * std::log(s.values[i] - root.value);
    return acc / m + (static_cast<double>(n - mass) / m) * std::log(-root.value) -
           static_cast<double>(n) / m;
}

namespace {

// Circle around the positive eigenvalues and the interlaced roots, keeping
// the nonpositive root outside. The left crossing is pinched between the
// excluded root and the enclosed hull when the radial margin would swallow it.
Contour transformed_plane_contour(const ClusteredSpectrum& s, const VectorXd& roots,
                                  double margin_frac, Orientation orient, int nodes) {
    std::vector<cxd> enclose;
    for (int i = s.positive_begin(); i < s.distinct_count(); ++i) enclose.emplace_back(s.values[i], 0.0);
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
    const cxd center(0.5 * (x_left + x_right), 0.0);
    return Contour(center, radius, radius, nodes, orient, enclose, {cxd(phi0, 0.0)});
}

}  // namespace

double asymptotic_log_pdet_contour(const ClusteredSpectrum& s, int n) {
    const VectorXd roots = characteristic_roots(s, n);
    const int m = s.total_dim;
    const int pb = s.positive_begin();
    const double scale = s.max_value();

    auto integrand = [&](cxd w) -> cxd {
        const cxd z = inverse_map(s, n, w);
        if (z.real() <= 0.0 && std::abs(z.imag()) <= 1e-12 * scale)
            throw NumericalError("asymptotic_log_pdet_contour: contour image touches the log branch cut");
        cxd pos_res = 0.0;
        for (int i = pb; i < s.distinct_count(); ++i)
            pos_res += static_cast<double>(s.mults[i]) / (s.values[i] - w);
        pos_res /= static_cast<double>(m);
        const cxd phi = weighted_trace(s, n, w);
        const cxd dz = 1.0 - weighted_trace_sq(s, n, w);
        return std::log(z) * pos_res * dz / (1.0 - phi);
    };

    const double margins[] = {1.2, 1.1, 1.05};
    std::string last_err;
    for (double mf : margins) {
        try {
            const Contour c = transformed_plane_contour(s, roots, mf, Orientation::clockwise, 256);
            const cxd val = contour_integral_adaptive(c, integrand, 1e-11) / (kTwoPi * kImag);
            if (std::abs(val.imag()) > 1e-7 * (1.0 + std::abs(val.real())))
                throw NumericalError("asymptotic_log_pdet_contour: non-real integral");
            return val.real();
        } catch (const std::exception& e) {
            last_err = e.what();
        }
    }
    throw NumericalError("asymptotic_log_pdet_contour: all contour margins failed: " + last_err);
}

double deterministic_contour_functional(const ClusteredSpectrum& s, int n, TraceFunctional f) {
    const SupportEdges edges = support_edges(s, n);
    const double x_left = 0.5 * edges.z_lo;
    const double x_right = 1.4 * edges.z_hi;
    const double a = 0.5 * (x_right - x_left);
    const double b = 0.5 * a;
    const double cx = 0.5 * (x_left + x_right);

    // One clockwise pass with omega continued node-to-node from the real
    // crossing right of the support.
    auto pass = [&](int nodes) -> cxd {
        cxd acc = 0.0;
        cxd w_prev = solve_omega(s, n, cxd(x_right, 0.0));
        for (int k = 0; k < nodes; ++k) {
            const double t = kTwoPi * k / nodes;
            const cxd z(cx + a * std::cos(t), -b * std::sin(t));  // clockwise
            const cxd deriv(-a * std::sin(t), -b * std::cos(t));
            cxd w = (k == 0) ? w_prev : newton_omega(s, n, z, w_prev, false);
            if (is_bad(w)) {
                std::ostringstream os;
                os << "deterministic_contour_functional: continuation stalled at node " << k;
                throw NumericalError(os.str());
            }
            w_prev = w;
            const cxd mbar = (w / z) * resolvent_sum(s, w);
            const cxd g = (f == TraceFunctional::identity) ? z : std::log(z);
            acc += g * mbar * deriv;
        }
        return acc * (kTwoPi / nodes) / (kTwoPi * kImag);
    };

    int nodes = 512;
    cxd prev = pass(nodes);
    for (int it = 0; it < 7; ++it) {
        nodes *= 2;
        const cxd cur = pass(nodes);
        if (std::abs(cur - prev) <= 1e-10 * (1.0 + std::abs(cur))) {
            if (std::abs(cur.imag()) > 1e-7 * (1.0 + std::abs(cur.real())))
                throw NumericalError("deterministic_contour_functional: non-real integral");
            return cur.real();
        }
        prev = cur;
    }
    throw NumericalError("deterministic_contour_functional: node doubling failed to converge");
}

}  // namespace mldoa
