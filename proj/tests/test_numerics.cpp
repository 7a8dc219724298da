#include <doctest.h>

#include <mldoa/contour.hpp>
#include <mldoa/errors.hpp>
#include <mldoa/linalg.hpp>

#include <cmath>
#include <numbers>

#include "test_support.hpp"

using namespace mldoa;
using testsup::random_complex;
using testsup::random_hermitian;

namespace {

// Determinant by own complex LU with partial pivoting; independent of any
// eigensolver path.
cxd det_lu(MatrixXcd a) {
    const int n = static_cast<int>(a.rows());
    cxd det = 1.0;
    for (int c = 0; c < n; ++c) {
        int piv = c;
        for (int r = c + 1; r < n; ++r)
            if (std::abs(a(r, c)) > std::abs(a(piv, c))) piv = r;
        if (std::abs(a(piv, c)) == 0.0) return 0.0;
        if (piv != c) {
            a.row(piv).swap(a.row(c));
            det = -det;
        }
        det *= a(c, c);
        for (int r = c + 1; r < n; ++r) {
            const cxd f = a(r, c) / a(c, c);
            a.row(r).tail(n - c) -= f * a.row(c).tail(n - c);
        }
    }
    return det;
}

// All real roots of det(A - x I) for Hermitian A by sign-change scan plus
// bisection refinement over the Gershgorin interval.
std::vector<double> charpoly_roots(const MatrixXcd& a) {
    const int n = static_cast<int>(a.rows());
    double radius = 0.0;
    for (int r = 0; r < n; ++r) {
        double row = 0.0;
        for (int c = 0; c < n; ++c) row += std::abs(a(r, c));
        radius = std::max(radius, row);
    }
    radius += 1.0;
    auto p = [&](double x) {
        return det_lu(a - x * MatrixXcd::Identity(n, n)).real();
    };
    std::vector<double> roots;
    const int grid = 20000;
    double prev_x = -radius, prev_f = p(prev_x);
    for (int i = 1; i <= grid; ++i) {
        const double x = -radius + 2.0 * radius * i / grid;
        const double f = p(x);
        if (prev_f == 0.0) roots.push_back(prev_x);
        else if (prev_f * f < 0.0) roots.push_back(find_root_bracketed(p, prev_x, x, 1e-14));
        prev_x = x;
        prev_f = f;
    }
    return roots;
}

}  // namespace

TEST_CASE("herm_eig: identity and diagonal cases") {
    const EigenSystem id = herm_eig(HermitianMatrix(MatrixXcd::Identity(3, 3)));
    for (int i = 0; i < 3; ++i) CHECK(id.values[i] == doctest::Approx(1.0).epsilon(1e-14));

    MatrixXcd d = MatrixXcd::Zero(3, 3);
    d(0, 0) = 3.0;
    d(1, 1) = 1.0;
    d(2, 2) = 2.0;
    const EigenSystem sys = herm_eig(HermitianMatrix(d));
    CHECK(sys.values[0] == doctest::Approx(1.0));
    CHECK(sys.values[1] == doctest::Approx(2.0));
    CHECK(sys.values[2] == doctest::Approx(3.0));
}

TEST_CASE("herm_eig: eigenvalues match independent characteristic-polynomial roots") {
    Philox rng(2024, 1);
    const HermitianMatrix a = random_hermitian(6, rng);
    const EigenSystem sys = herm_eig(a);
    const std::vector<double> roots = charpoly_roots(a.mat());
    REQUIRE(roots.size() == 6);
    for (int i = 0; i < 6; ++i)
        CHECK(std::abs(sys.values[i] - roots[static_cast<std::size_t>(i)]) <=
              1e-8 * std::max(1.0, std::abs(roots[static_cast<std::size_t>(i)])));
}

TEST_CASE("herm_eig: reconstruction and unitarity up to dim 200") {
    Philox rng(2024, 2);
    for (int dim : {5, 40, 200}) {
        const HermitianMatrix a = random_hermitian(dim, rng);
        const EigenSystem sys = herm_eig(a);
        const MatrixXcd rebuilt =
            sys.vectors * sys.values.asDiagonal() * sys.vectors.adjoint();
        CHECK((rebuilt - a.mat()).norm() <= 1e-10 * a.mat().norm());
        CHECK((sys.vectors.adjoint() * sys.vectors - MatrixXcd::Identity(dim, dim)).norm() <= 1e-10 * dim);
    }
}

TEST_CASE("herm_eig: deterministic output for identical input") {
    Philox rng(2024, 3);
    const HermitianMatrix a = random_hermitian(12, rng);
    const EigenSystem s1 = herm_eig(a);
    const EigenSystem s2 = herm_eig(a);
    CHECK((s1.vectors - s2.vectors).norm() == 0.0);
    CHECK((s1.values - s2.values).norm() == 0.0);
}

TEST_CASE("log_pseudo_det: exact cases") {
    CHECK(log_pseudo_det(HermitianMatrix(MatrixXcd::Identity(4, 4))) ==
          doctest::Approx(0.0).epsilon(1e-14));

    MatrixXcd d = MatrixXcd::Zero(3, 3);
    d(0, 0) = 2.0;
    d(1, 1) = 2.0;
    CHECK(log_pseudo_det(HermitianMatrix(d), 1e-12) == doctest::Approx(2.0 * std::log(2.0)));
}

TEST_CASE("log_pseudo_det: rank-deficient PSD matches eigen-sum oracle") {
    Philox rng(2024, 4);
    const int m = 8, r = 3;
    VectorXd evals = VectorXd::Zero(m);
    for (int i = 0; i < r; ++i) evals[m - 1 - i] = 0.5 + 2.0 * rng.next_double();
    const MatrixXcd g = random_complex(m, m, rng);
    const Eigen::HouseholderQR<MatrixXcd> qr(g);
    const MatrixXcd v = qr.householderQ();
    const MatrixXcd a = v * evals.asDiagonal() * v.adjoint();

    double expected = 0.0;
    for (int i = 0; i < r; ++i) expected += std::log(evals[m - 1 - i]);
    CHECK(log_pseudo_det(HermitianMatrix(a)) == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("log_pseudo_det: zero matrix rejected") {
    CHECK_THROWS_AS(log_pseudo_det(HermitianMatrix(MatrixXcd::Zero(3, 3))), NumericalError);
}

TEST_CASE("find_root_bracketed: basic roots") {
    CHECK(find_root_bracketed([](double x) { return x - 2.0; }, 0.0, 5.0) == doctest::Approx(2.0));
    CHECK(find_root_bracketed([](double x) { return x * x - 2.0; }, 0.0, 2.0) ==
          doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    CHECK_THROWS_AS(find_root_bracketed([](double x) { return x * x + 1.0; }, -1.0, 1.0),
                    std::invalid_argument);
}

TEST_CASE("find_root_bracketed: single-eigenvalue trace equation") {
    // One positive eigenvalue gamma = 1 with multiplicity 4, two snapshots:
    // (1/2) * 4 / (1 - phi) = 1 has the closed-form root gamma (1 - K/N) = -1.
    auto f = [](double phi) { return 4.0 / 2.0 * 1.0 / (1.0 - phi) - 1.0; };
    CHECK(find_root_bracketed(f, -10.0, -1e-12) == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("contour_integral: residue cases") {
    const cxd a(0.4, 0.1);
    const Contour inside(cxd(0, 0), 1.0, 1.0, 128, Orientation::counterclockwise, {a});
    const cxd one = contour_integral(inside, [&](cxd z) { return 1.0 / (z - a); }) /
                    cxd(0.0, 2.0 * std::numbers::pi);
    CHECK(std::abs(one - 1.0) <= 1e-12);

    const cxd outside_pt(3.0, 0.0);
    const Contour without(cxd(0, 0), 1.0, 1.0, 128, Orientation::counterclockwise, {}, {outside_pt});
    const cxd zero = contour_integral(without, [&](cxd z) { return 1.0 / (z - outside_pt); }) /
                     cxd(0.0, 2.0 * std::numbers::pi);
    CHECK(std::abs(zero) <= 1e-12);
}

TEST_CASE("contour_integral: clockwise trace functional equals eigen-sum") {
    // (1/2 pi j) of z * stieltjes over a clockwise contour around the
    // spectrum gives +trace/M under the resolvent convention (A - z)^-1.
    Philox rng(2024, 5);
    const MatrixXcd g = random_complex(5, 5, rng);
    const HermitianMatrix a(MatrixXcd(g * g.adjoint() / 5.0 + MatrixXcd::Identity(5, 5)));
    const EigenSystem sys = herm_eig(a);
    std::vector<cxd> musts;
    for (int i = 0; i < 5; ++i) musts.emplace_back(sys.values[i], 0.0);
    const double lo = sys.values.minCoeff(), hi = sys.values.maxCoeff();
    const Contour c(cxd(0.5 * (lo + hi), 0.0), (hi - lo) * 0.75 + 0.5, (hi - lo) * 0.75 + 0.5, 256,
                    Orientation::clockwise, musts, {cxd(0.0, 0.0)});
    auto resolvent_trace = [&](cxd z) {
        cxd acc = 0.0;
        for (int i = 0; i < 5; ++i) acc += 1.0 / (sys.values[i] - z);
        return acc / 5.0;
    };
    const cxd val = contour_integral(c, [&](cxd z) { return z * resolvent_trace(z); });
    const cxd scaled = val / cxd(0.0, 2.0 * std::numbers::pi);
    CHECK(std::abs(scaled - sys.values.sum() / 5.0) <= 1e-9);
}

TEST_CASE("contour_integral: geometric convergence for analytic integrands") {
    const cxd a(0.2, -0.3);
    const cxd exact = std::exp(a);  // residue of exp(z)/(z-a)
    double prev_err = -1.0;
    for (int n : {64, 128, 256, 512}) {
        const Contour c(cxd(0, 0), 1.2, 0.9, n, Orientation::counterclockwise, {a});
        const cxd val = contour_integral(c, [&](cxd z) { return std::exp(z) / (z - a); }) /
                        cxd(0.0, 2.0 * std::numbers::pi);
        const double err = std::abs(val - exact);
        if (prev_err > 1e-12) CHECK(err <= 0.5 * prev_err);
        prev_err = err;
    }
}

TEST_CASE("Contour: constructor guards") {
    CHECK_THROWS_AS(Contour(cxd(0, 0), 1.0, 1.0, 32, Orientation::clockwise), std::invalid_argument);
    CHECK_THROWS_AS(Contour(cxd(0, 0), 1.0, 1.0, 128, Orientation::clockwise, {cxd(2.0, 0.0)}),
                    std::invalid_argument);
    CHECK_THROWS_AS(Contour(cxd(0, 0), 1.0, 1.0, 128, Orientation::clockwise, {}, {cxd(0.5, 0.0)}),
                    std::invalid_argument);
}

TEST_CASE("contour_integral: non-finite integrand names the node") {
    const Contour c(cxd(0, 0), 1.0, 1.0, 64, Orientation::counterclockwise);
    CHECK_THROWS_AS(contour_integral(c, [](cxd) { return cxd(std::nan(""), 0.0); }), NumericalError);
}
