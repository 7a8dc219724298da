#include <doctest.h>

#include <mldoa/mvn.hpp>
#include <mldoa/random.hpp>

#include <cmath>
#include <numbers>

using namespace mldoa;

TEST_CASE("mvn_orthant: dimension zero and univariate reduction") {
    const OrthantEstimate empty = mvn_orthant(GaussianSpec(VectorXd(0), MatrixXd(0, 0)), 2000, 7);
    CHECK(empty.probability == 1.0);
    CHECK(empty.err_estimate == 0.0);

    VectorXd mu(1);
    mu << 1.3;
    MatrixXd cov(1, 1);
    cov << 4.0;
    const OrthantEstimate uni = mvn_orthant(GaussianSpec(mu, cov), 4000, 7);
    CHECK(uni.probability == doctest::Approx(normal_cdf(1.3 / 2.0)).epsilon(1e-12));

    mu << 0.0;
    CHECK(mvn_orthant(GaussianSpec(mu, cov), 4000, 7).probability == doctest::Approx(0.5));
}

TEST_CASE("mvn_orthant: independence product in three dimensions") {
    const OrthantEstimate e =
        mvn_orthant(GaussianSpec(VectorXd::Zero(3), MatrixXd::Identity(3, 3)), 50000, 11);
    CHECK(std::abs(e.probability - 0.125) <= std::max(3.0 * e.err_estimate, 1e-6));
}

TEST_CASE("mvn_orthant: bivariate arcsine law") {
    for (double rho : {-0.9, -0.5, 0.0, 0.5, 0.9}) {
        MatrixXd cov(2, 2);
        cov << 1.0, rho, rho, 1.0;
        const double expected = 0.25 + std::asin(rho) / (2.0 * std::numbers::pi);
        const OrthantEstimate e = mvn_orthant(GaussianSpec(VectorXd::Zero(2), cov), 100000, 3);
        CHECK(std::abs(e.probability - expected) <= 1e-4);
    }
}

TEST_CASE("mvn_orthant: diagonal covariance matches product of tails") {
    Philox rng(99, 0);
    for (int dim = 2; dim <= 6; ++dim) {
        VectorXd mu(dim);
        VectorXd var(dim);
        double expected = 1.0;
        for (int i = 0; i < dim; ++i) {
            mu[i] = 2.0 * rng.next_double() - 1.0;
            var[i] = 0.5 + rng.next_double();
            expected *= normal_cdf(mu[i] / std::sqrt(var[i]));
        }
        const OrthantEstimate e =
            mvn_orthant(GaussianSpec(mu, MatrixXd(var.asDiagonal())), 20000, 5);
        CHECK(std::abs(e.probability - expected) <= 1e-6);
    }
}

TEST_CASE("mvn_orthant: monotone in each mean component") {
    MatrixXd cov(3, 3);
    cov << 1.0, 0.3, 0.1, 0.3, 1.0, 0.2, 0.1, 0.2, 1.0;
    VectorXd mu(3);
    mu << 0.2, -0.1, 0.4;
    const OrthantEstimate base = mvn_orthant(GaussianSpec(mu, cov), 200000, 21);
    for (int i = 0; i < 3; ++i) {
        VectorXd bumped = mu;
        bumped[i] += 0.5;
        const OrthantEstimate up = mvn_orthant(GaussianSpec(bumped, cov), 200000, 21);
        CHECK(up.probability >=
              base.probability - 3.0 * (up.err_estimate + base.err_estimate));
    }
}

TEST_CASE("mvn_orthant: deterministic for fixed seed") {
    MatrixXd cov(2, 2);
    cov << 1.0, 0.4, 0.4, 2.0;
    VectorXd mu(2);
    mu << 0.3, -0.2;
    const OrthantEstimate a = mvn_orthant(GaussianSpec(mu, cov), 30000, 77);
    const OrthantEstimate b = mvn_orthant(GaussianSpec(mu, cov), 30000, 77);
    CHECK(a.probability == b.probability);
    CHECK(a.err_estimate == b.err_estimate);
}

TEST_CASE("mvn_orthant: singular covariance via rank-revealing factorization") {
    // X = mu + v t with t standard normal: componentwise positivity reduces
    // to an interval condition on t.
    VectorXd v(2);
    v << 1.0, -0.5;
    VectorXd mu(2);
    mu << 0.4, 0.3;
    const MatrixXd cov = v * v.transpose();
    // X1 > 0: t > -0.4; X2 > 0: -0.5 t > -0.3 -> t < 0.6.
    const double expected = normal_cdf(0.6) - normal_cdf(-0.4);
    const OrthantEstimate e = mvn_orthant(GaussianSpec(mu, cov), 100000, 13);
    CHECK(std::abs(e.probability - expected) <= std::max(5.0 * e.err_estimate, 2e-4));
}

TEST_CASE("mvn_orthant: input guards") {
    CHECK_THROWS_AS(mvn_orthant(GaussianSpec(VectorXd::Zero(2), MatrixXd::Identity(2, 2)), 10, 1),
                    std::invalid_argument);
    MatrixXd asym(2, 2);
    asym << 1.0, 0.5, -0.5, 1.0;
    CHECK_THROWS_AS(GaussianSpec(VectorXd::Zero(2), asym), std::invalid_argument);
}

TEST_CASE("normal_quantile: inverse of normal_cdf") {
    for (double p : {1e-12, 1e-6, 0.01, 0.3, 0.5, 0.7, 0.99, 1.0 - 1e-9}) {
        CHECK(normal_cdf(normal_quantile(p)) == doctest::Approx(p).epsilon(1e-10));
    }
}
