#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "blhedge/gaussian.hpp"

using namespace blhedge;

TEST_CASE("normal cdf and tail agree with reference values") {
    CHECK(norm_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
    // scipy.stats.norm reference values
    CHECK(norm_cdf(1.2) == doctest::Approx(0.88493032977829178).epsilon(1e-13));
    CHECK(norm_tail(1.0) == doctest::Approx(0.15865525393145707).epsilon(1e-13));
    CHECK(norm_tail(3.0) == doctest::Approx(0.0013498980316300933).epsilon(1e-12));
    // deep tail must be computed without cancellation
    CHECK(norm_tail(8.0) == doctest::Approx(6.2209605742717405e-16).epsilon(1e-10));
    for (double x : {-3.0, -0.7, 0.0, 0.4, 2.5})
        CHECK(norm_cdf(x) + norm_tail(x) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("normal pdf matches the closed form") {
    for (double x : {-2.0, 0.0, 0.31, 1.7}) {
        const double ref = std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
        CHECK(norm_pdf(x) == doctest::Approx(ref).epsilon(1e-15));
    }
}

TEST_CASE("inverse cdf reproduces reference quantiles") {
    // scipy.stats.norm.ppf
    CHECK(norm_inv(0.5) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(norm_inv(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-14));
    CHECK(norm_inv(0.2) == doctest::Approx(-0.84162123357291418).epsilon(1e-14));
    CHECK(norm_inv(0.84) == doctest::Approx(0.99445788320975304).epsilon(1e-14));
    CHECK(norm_inv(1e-10) == doctest::Approx(-6.3613409024040557).epsilon(1e-13));
}

TEST_CASE("inverse cdf round-trips through the cdf") {
    for (double p = 1e-8; p < 1.0; p = p * 1.9 + 1e-4) {
        CHECK(norm_cdf(norm_inv(p)) == doctest::Approx(p).epsilon(1e-12));
    }
    for (double x : {-5.0, -1.3, 0.0, 0.9, 4.2})
        CHECK(norm_inv(norm_cdf(x)) == doctest::Approx(x).epsilon(1e-11));
}

TEST_CASE("bivariate orthant probability matches reference values") {
    // scipy.stats.multivariate_normal.cdf reference values
    CHECK(orthant2(0.0, 0.0, 0.5) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(orthant2(0.0, 0.0, 0.0) == doctest::Approx(0.25).epsilon(1e-13));
    CHECK(orthant2(0.3, -0.7, 0.25) == doctest::Approx(0.31874152813384959).epsilon(1e-11));
    CHECK(orthant2(1.0, 1.5, -0.4) == doctest::Approx(0.0018621856148442976).epsilon(1e-9));
    CHECK(orthant2(-2.0, 0.5, 0.9) == doctest::Approx(0.30853753846527582).epsilon(1e-11));
}

TEST_CASE("bivariate orthant probability basic identities") {
    CHECK(orthant2(0.4, -0.8, 0.35) == doctest::Approx(orthant2(-0.8, 0.4, 0.35)).epsilon(1e-13));
    // independence factorizes
    CHECK(orthant2(0.6, 1.1, 0.0) ==
          doctest::Approx(norm_tail(0.6) * norm_tail(1.1)).epsilon(1e-12));
    // marginalizing one coordinate away
    CHECK(orthant2(0.37, -30.0, 0.6) == doctest::Approx(norm_tail(0.37)).epsilon(1e-12));
    // perfectly correlated pair collapses to the larger threshold
    CHECK(orthant2(0.2, 0.9, 0.999999) == doctest::Approx(norm_tail(0.9)).epsilon(1e-4));
}

TEST_CASE("trivariate orthant probability") {
    Eigen::Matrix3d corr;
    corr << 1.0, 0.3, 0.2, 0.3, 1.0, -0.1, 0.2, -0.1, 1.0;
    Eigen::Vector3d a(0.4, -0.2, 0.7);
    // mpmath nested-quadrature reference value (scipy's QMC cdf is only ~1e-6)
    CHECK(orthant3(a, corr) == doctest::Approx(0.068998689128279437).epsilon(1e-8));

    Eigen::Matrix3d id = Eigen::Matrix3d::Identity();
    Eigen::Vector3d b(0.1, 0.5, -0.3);
    const double prod = norm_tail(0.1) * norm_tail(0.5) * norm_tail(-0.3);
    CHECK(orthant3(b, id) == doctest::Approx(prod).epsilon(1e-9));
}

TEST_CASE("general orthant dispatcher") {
    Eigen::VectorXd a1(1);
    a1 << 0.8;
    Eigen::MatrixXd c1 = Eigen::MatrixXd::Identity(1, 1);
    CHECK(orthant_mvn(a1, c1) == doctest::Approx(norm_tail(0.8)).epsilon(1e-13));

    Eigen::VectorXd a2(2);
    a2 << 0.3, -0.7;
    Eigen::MatrixXd c2(2, 2);
    c2 << 1.0, 0.25, 0.25, 1.0;
    CHECK(orthant_mvn(a2, c2) == doctest::Approx(orthant2(0.3, -0.7, 0.25)).epsilon(1e-12));

    Eigen::VectorXd a4(4);
    a4 << 0.1, 0.2, 0.3, 0.4;
    Eigen::MatrixXd c4 = Eigen::MatrixXd::Identity(4, 4);
    double err = 0.0;
    const double got = orthant_mvn(a4, c4, &err);
    // independent product reference: 0.025490970622208571
    CHECK(got == doctest::Approx(0.025490970622208571).epsilon(5e-4));
    CHECK(std::abs(got - 0.025490970622208571) <= 10.0 * err + 1e-6);
}
