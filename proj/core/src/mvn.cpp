#include "mldoa/mvn.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "mldoa/errors.hpp"
#include "mldoa/random.hpp"

namespace mldoa {

GaussianSpec::GaussianSpec(VectorXd mu, MatrixXd sigma) : mean(std::move(mu)), cov(std::move(sigma)) {
    if (cov.rows() != cov.cols() || cov.rows() != mean.size())
        throw std::invalid_argument("GaussianSpec: dimension mismatch");
    if (mean.size() == 0) return;
    const double scale = std::max(1.0, cov.norm());
    if ((cov - cov.transpose()).norm() > 1e-12 * scale)
        throw std::invalid_argument("GaussianSpec: covariance not symmetric");
    cov = 0.5 * (cov + cov.transpose().eval());
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(cov, Eigen::EigenvaluesOnly);
    const double floor = -1e-10 * std::max(cov.trace(), 1.0);
    if (es.eigenvalues().minCoeff() < floor)
        throw std::invalid_argument("GaussianSpec: covariance has a significantly negative eigenvalue");
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// AS241 (PPND16).
double normal_quantile(double p) {
    if (!(p > 0.0) || !(p < 1.0)) {
        if (p == 0.0) return -std::numeric_limits<double>::infinity();
        if (p == 1.0) return std::numeric_limits<double>::infinity();
        throw std::invalid_argument("normal_quantile: p outside [0, 1]");
    }
    const double q = p - 0.5;
    double r;
    if (std::abs(q) <= 0.425) {
        r = 0.180625 - q * q;
        return q *
               (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                     6.7265770927008700853e4) * r +
                    4.5921953931549871457e4) * r +
                   1.3731693765509461125e4) * r +
                  1.9715909503065514427e3) * r +
                 1.3314166789178437745e2) * r +
                3.3871328727963666080e0) /
               (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                     3.9307895800092710610e4) * r +
                    2.1213794301586595867e4) * r +
                   5.3941960214247511077e3) * r +
                  6.8718700749205790830e2) * r +
                 4.2313330701600911252e1) * r +
                1.0);
    }
    r = (q < 0.0) ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double val;
    if (r <= 5.0) {
        r -= 1.6;
        val = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                    2.41780725177450611770e-1) * r +
                   1.27045825245236838258e0) * r +
                  3.64784832476320460504e0) * r +
                 5.76949722146069140550e0) * r +
                4.63033784615654529590e0) * r +
               1.42343711074968357734e0) /
              (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                    1.51986665636164571966e-2) * r +
                   1.48103976427480074590e-1) * r +
                  6.89767334985100004550e-1) * r +
                 1.67638483018380384940e0) * r +
                2.05319162663775882187e0) * r +
               1.0);
    } else {
        r -= 5.0;
        val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                    1.24266094738807843860e-3) * r +
                   2.65321895265761230930e-2) * r +
                  2.96560571828504891230e-1) * r +
                 1.78482653991729133580e0) * r +
                5.46378491116411436990e0) * r +
               6.65790464350110377720e0) /
              (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                    1.84631831751005468180e-5) * r +
                   7.86869131145613259100e-4) * r +
                  1.48753612908506148525e-2) * r +
                 1.36929880922735805310e-1) * r +
                5.99832206555887937690e-1) * r +
               1.0);
    }
    return (q < 0.0) ? -val : val;
}

namespace {

// Pivoted Cholesky with the Genz variable-reordering heuristic: at each
// stage pick the variable whose conditional constraint is tightest, tracking
// expected values of the conditioned coordinates. Zero pivots (singular
// covariance) leave an all-zero row that becomes a deterministic check.
struct GenzFactorization {
    MatrixXd l;           // lower trapezoidal, reordered
    VectorXd a;           // reordered lower limits
    std::vector<bool> degenerate;
};

GenzFactorization genz_factor(const GaussianSpec& spec) {
    const Eigen::Index d = spec.dim();
    MatrixXd v = spec.cov;
    VectorXd a = -spec.mean;  // X > 0  <=>  Z > -mean
    MatrixXd l = MatrixXd::Zero(d, d);
    VectorXd expct = VectorXd::Zero(d);
    std::vector<bool> degen(static_cast<std::size_t>(d), false);
    const double pivot_tol = 1e-12 * std::max(1.0, v.diagonal().maxCoeff());

    for (Eigen::Index j = 0; j < d; ++j) {
        // Choose the remaining variable with the smallest conditional
        // probability of satisfying its constraint.
        Eigen::Index best = j;
        double best_p = std::numeric_limits<double>::infinity();
        for (Eigen::Index i = j; i < d; ++i) {
            double s2 = v(i, i);
            double shift = 0.0;
            for (Eigen::Index k = 0; k < j; ++k) {
                s2 -= l(i, k) * l(i, k);
                shift += l(i, k) * expct(k);
            }
            if (s2 < pivot_tol) continue;  // defer degenerate rows
            const double p = 1.0 - normal_cdf((a(i) - shift) / std::sqrt(s2));
            if (p < best_p) {
                best_p = p;
                best = i;
            }
        }
        if (best != j) {
            v.row(j).swap(v.row(best));
            v.col(j).swap(v.col(best));
            l.row(j).swap(l.row(best));
            std::swap(a(j), a(best));
        }
        double s2 = v(j, j);
        for (Eigen::Index k = 0; k < j; ++k) s2 -= l(j, k) * l(j, k);
        if (s2 < pivot_tol) {
            degen[static_cast<std::size_t>(j)] = true;
            continue;  // row of l stays as computed so far; no new pivot
        }
        l(j, j) = std::sqrt(s2);
        for (Eigen::Index i = j + 1; i < d; ++i) {
            double dot = v(i, j);
            for (Eigen::Index k = 0; k < j; ++k) dot -= l(i, k) * l(j, k);
            l(i, j) = dot / l(j, j);
        }
        double shift = 0.0;
        for (Eigen::Index k = 0; k < j; ++k) shift += l(j, k) * expct(k);
        const double alpha = (a(j) - shift) / l(j, j);
        const double tail = 1.0 - normal_cdf(alpha);
        // Mean of the upper-truncated standard normal; saturates gracefully.
        const double phi = std::exp(-0.5 * alpha * alpha) / std::sqrt(2.0 * M_PI);
        expct(j) = (tail > 1e-300) ? phi / tail : alpha;
    }
    return {std::move(l), std::move(a), std::move(degen)};
}

double sample_value(const GenzFactorization& f, const double* w) {
    const Eigen::Index d = f.a.size();
    double prob = 1.0;
    thread_local std::vector<double> y;
    y.assign(static_cast<std::size_t>(d), 0.0);
    int wi = 0;
    for (Eigen::Index j = 0; j < d; ++j) {
        double t = f.a(j);
        for (Eigen::Index k = 0; k < j; ++k) t -= f.l(j, k) * y[static_cast<std::size_t>(k)];
        if (f.degenerate[static_cast<std::size_t>(j)]) {
            if (t > 1e-12) return 0.0;  // deterministic constraint violated
            continue;
        }
        const double dj = normal_cdf(t / f.l(j, j));
        const double tail = 1.0 - dj;
        if (tail <= 0.0) return 0.0;
        prob *= tail;
        double u = dj + w[wi++] * tail;
        u = std::min(std::max(u, 1e-16), 1.0 - 1e-16);
        y[static_cast<std::size_t>(j)] = normal_quantile(u);
    }
    return prob;
}

std::vector<double> richtmyer_generators(int dim) {
    std::vector<double> g;
    g.reserve(static_cast<std::size_t>(dim));
    int candidate = 1;
    while (static_cast<int>(g.size()) < dim) {
        ++candidate;
        bool prime = candidate >= 2;
        for (int q = 2; q * q <= candidate; ++q)
            if (candidate % q == 0) {
                prime = false;
                break;
            }
        if (prime) g.push_back(std::sqrt(static_cast<double>(candidate)));
    }
    return g;
}

}  // namespace

OrthantEstimate mvn_orthant(const GaussianSpec& spec, std::int64_t n_samples, std::uint64_t seed) {
    const Eigen::Index d = spec.dim();
    if (d == 0) return {1.0, 0.0};
    if (n_samples < 1000) throw std::invalid_argument("mvn_orthant: n_samples must be >= 1000");

    const GenzFactorization f = genz_factor(spec);

    constexpr int kShifts = 8;
    const std::int64_t per_batch = (n_samples + kShifts - 1) / kShifts;
    const std::vector<double> gen = richtmyer_generators(static_cast<int>(d));

    double mean_acc = 0.0, sq_acc = 0.0;
    std::vector<double> w(static_cast<std::size_t>(d));
    for (int b = 0; b < kShifts; ++b) {
        Philox rng(seed, static_cast<std::uint64_t>(b) + 1);
        std::vector<double> shift(static_cast<std::size_t>(d));
        for (auto& s : shift) s = rng.next_double();
        double batch = 0.0;
        for (std::int64_t k = 0; k < per_batch; ++k) {
            for (Eigen::Index j = 0; j < d; ++j) {
                const double x = static_cast<double>(k + 1) * gen[static_cast<std::size_t>(j)] +
                                 shift[static_cast<std::size_t>(j)];
                w[static_cast<std::size_t>(j)] = x - std::floor(x);
            }
            batch += sample_value(f, w.data());
        }
        batch /= static_cast<double>(per_batch);
        mean_acc += batch;
        sq_acc += batch * batch;
    }
    const double p = mean_acc / kShifts;
    const double var = std::max(0.0, sq_acc / kShifts - p * p);
    const double err = std::sqrt(var / (kShifts - 1));
    return {std::clamp(p, 0.0, 1.0), err};
}

}  // namespace mldoa
