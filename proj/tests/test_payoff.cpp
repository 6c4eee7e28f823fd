#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "blhedge/payoff.hpp"

using namespace blhedge;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> xs) {
    Eigen::VectorXd v((Eigen::Index)xs.size());
    Eigen::Index i = 0;
    for (double x : xs) v(i++) = x;
    return v;
}

PricingMeasure one_asset() {
    return make_lognormal(vec({100.0}), vec({0.2}), 1.0, Eigen::MatrixXd::Identity(1, 1));
}

}  // namespace

TEST_CASE("call payoff values, slopes and continuity") {
    PiecewisePayoff1D c = pw_call(100.0);
    CHECK(c(80.0) == 0.0);
    CHECK(c(100.0) == 0.0);
    CHECK(c(130.0) == doctest::Approx(30.0));
    CHECK(c.derivative(80.0) == 0.0);
    CHECK(c.derivative(130.0) == 1.0);
    REQUIRE(c.breakpoints().size() == 1);
    CHECK(c.breakpoints()[0] == 100.0);
    CHECK(c.left_jump(0) == 0.0);
    CHECK(c.right_jump(0) == 0.0);
    CHECK_FALSE(c.has_jumps());
    CHECK(c.value_at_zero() == 0.0);
}

TEST_CASE("put payoff") {
    PiecewisePayoff1D p = pw_put(90.0);
    CHECK(p(0.0) == doctest::Approx(90.0));
    CHECK(p(50.0) == doctest::Approx(40.0));
    CHECK(p(90.0) == 0.0);
    CHECK(p(120.0) == 0.0);
    CHECK(p.derivative(50.0) == -1.0);
    CHECK(p.derivative(120.0) == 0.0);
    CHECK(p.value_at_zero() == doctest::Approx(90.0));
}

TEST_CASE("digital payoffs carry their jumps explicitly") {
    PiecewisePayoff1D ge = pw_digital_ge(100.0);
    CHECK(ge(99.999) == 0.0);
    CHECK(ge(100.0) == 1.0);  // >= includes the strike
    CHECK(ge(101.0) == 1.0);
    REQUIRE(ge.breakpoints().size() == 1);
    CHECK(ge.left_jump(0) == 1.0);   // f(s) - f(s-)
    CHECK(ge.right_jump(0) == 0.0);  // f(s+) - f(s)
    CHECK(ge.has_jumps());

    PiecewisePayoff1D gt = pw_digital_gt(100.0);
    CHECK(gt(100.0) == 0.0);  // > excludes the strike
    CHECK(gt(100.0001) == 1.0);
    CHECK(gt.left_jump(0) == 0.0);
    CHECK(gt.right_jump(0) == 1.0);
}

TEST_CASE("jump at zero is suppressed by convention") {
    // a >= digital at 0 pays 1 everywhere on the state space; there is no
    // mass to the left of 0 so its left jump must report 0
    PiecewisePayoff1D d0 = pw_digital_ge(0.0);
    CHECK(d0(0.0) == 1.0);
    if (!d0.breakpoints().empty() && d0.breakpoints()[0] == 0.0) CHECK(d0.left_jump(0) == 0.0);
}

TEST_CASE("power, affine, constant, identity, scale") {
    PiecewisePayoff1D sq = pw_power(2.0);
    CHECK(sq(7.0) == doctest::Approx(49.0));
    CHECK(sq.derivative(7.0) == doctest::Approx(14.0));

    PiecewisePayoff1D af = pw_affine(3.0, -0.5);
    CHECK(af(10.0) == doctest::Approx(-2.0));
    CHECK(af.derivative(10.0) == doctest::Approx(-0.5));
    CHECK(af.value_at_zero() == doctest::Approx(3.0));

    CHECK(pw_constant(4.2)(123.0) == doctest::Approx(4.2));
    CHECK(pw_constant(4.2).derivative(123.0) == 0.0);
    CHECK(pw_identity()(123.0) == doctest::Approx(123.0));

    PiecewisePayoff1D sc = pw_scale(pw_call(100.0), -2.0);
    CHECK(sc(130.0) == doctest::Approx(-60.0));
    CHECK(sc.derivative(130.0) == doctest::Approx(-2.0));
}

TEST_CASE("smooth wrapper") {
    PiecewisePayoff1D f = pw_smooth([](double x) { return std::sin(x); },
                                    [](double x) { return std::cos(x); });
    CHECK(f(1.0) == doctest::Approx(std::sin(1.0)));
    CHECK(f.derivative(1.0) == doctest::Approx(std::cos(1.0)));
    CHECK_FALSE(f.has_jumps());
}

TEST_CASE("piecewise-linear payoff from segments") {
    // butterfly-like shape with a held value at the middle breakpoint
    PiecewisePayoff1D f = pw_from_segments({90.0, 100.0, 110.0},
                                           {0.0, -90.0, 110.0, 0.0},   // intercepts
                                           {0.0, 1.0, -1.0, 0.0},      // slopes
                                           {0.0, 10.0, 0.0});          // values at breakpoints
    CHECK(f(80.0) == 0.0);
    CHECK(f(95.0) == doctest::Approx(5.0));
    CHECK(f(100.0) == doctest::Approx(10.0));
    CHECK(f(105.0) == doctest::Approx(5.0));
    CHECK(f(120.0) == 0.0);
    CHECK(f.derivative(95.0) == doctest::Approx(1.0));
    CHECK(f.derivative(105.0) == doctest::Approx(-1.0));
    CHECK_FALSE(f.has_jumps());

    // a held value that disagrees with both one-sided limits creates jumps
    PiecewisePayoff1D g = pw_from_segments({100.0}, {0.0, 5.0}, {0.0, 0.0}, {2.0});
    CHECK(g(99.0) == 0.0);
    CHECK(g(100.0) == doctest::Approx(2.0));
    CHECK(g(101.0) == doctest::Approx(5.0));
    CHECK(g.left_jump(0) == doctest::Approx(2.0));
    CHECK(g.right_jump(0) == doctest::Approx(3.0));
}

TEST_CASE("derivative on a breakpoint takes the right-piece limit") {
    PiecewisePayoff1D c = pw_call(100.0);
    CHECK(c.derivative(100.0) == 1.0);
}

TEST_CASE("product payoffs evaluate as sums of factor products") {
    ProductPayoff h = make_product(2, {{0, pw_call(90.0)}, {1, pw_digital_gt(100.0)}});
    Eigen::VectorXd x(2);
    x << 120.0, 101.0;
    CHECK(h(x) == doctest::Approx(30.0));
    x << 120.0, 99.0;
    CHECK(h(x) == doctest::Approx(0.0));

    ProductPayoff s = payoff_sum(h, make_single(2, 1, pw_constant(1.5)));
    x << 120.0, 101.0;
    CHECK(s(x) == doctest::Approx(31.5));
    CHECK(payoff_scale(s, 2.0)(x) == doctest::Approx(63.0));

    ProductPayoff single = make_single(3, 2, pw_put(50.0));
    Eigen::VectorXd y(3);
    y << 0.0, 0.0, 30.0;
    CHECK(single(y) == doctest::Approx(20.0));
}

TEST_CASE("class membership accepts payoffs with polynomial growth") {
    PricingMeasure m = one_asset();
    PiQReport call_rep = check_pi_q_membership(pw_call(100.0), m);
    CHECK(call_rep.member());
    CHECK(call_rep.integrable);
    CHECK(call_rep.tail_limit_ok);
    CHECK(call_rep.derivative_integral_finite);
    // E|f| for the ATM call equals the call price
    CHECK(call_rep.expectation_abs == doctest::Approx(7.9655674554058038).epsilon(1e-4));

    CHECK(check_pi_q_membership(pw_digital_ge(110.0), m).member());
    CHECK(check_pi_q_membership(pw_power(3.0), m).member());
}

TEST_CASE("class membership rejects exponential growth against a lognormal tail") {
    PricingMeasure m = one_asset();
    PiecewisePayoff1D f = pw_smooth([](double x) { return std::exp(x / 10.0); },
                                    [](double x) { return std::exp(x / 10.0) / 10.0; });
    PiQReport rep = check_pi_q_membership(f, m);
    CHECK_FALSE(rep.member());
}

TEST_CASE("product membership certificate") {
    PricingMeasure m2 = make_lognormal(vec({100.0, 90.0}), vec({0.2, 0.25}), 1.0,
                                       Eigen::MatrixXd::Identity(2, 2));
    ProductPayoff ok = make_product(2, {{0, pw_call(100.0)}, {1, pw_identity()}});
    ProductMembershipReport rep = check_product_membership(ok, m2, 20000, 3u);
    CHECK(rep.member());

    // a heavy-tailed empirical law with a cubic payoff has no third moment
    const int rows = 2000;
    Eigen::MatrixXd samples(rows, 1);
    for (int i = 0; i < rows; ++i) {
        const double u = (i + 0.5) / rows;          // deterministic inverse-cdf draws
        samples(i, 0) = std::pow(1.0 - u, -1.0 / 1.5);  // Pareto alpha = 1.5
    }
    PricingMeasure heavy = make_empirical(samples);
    ProductPayoff cube = make_single(1, 0, pw_power(3.0));
    ProductMembershipReport bad = check_product_membership(cube, heavy, 20000, 3u);
    CHECK_FALSE(bad.member());
    CHECK_FALSE(bad.detail.empty());
}

TEST_CASE("payoff construction rejects inconsistent inputs") {
    CHECK_THROWS(pw_from_segments({100.0}, {0.0}, {0.0, 0.0}, {0.0}));   // intercepts too short
    CHECK_THROWS(pw_from_segments({110.0, 90.0}, {0.0, 0.0, 0.0}, {0.0, 0.0, 0.0},
                                  {0.0, 0.0}));                          // unsorted breakpoints
    CHECK_THROWS(make_product(2, {{0, pw_call(1.0)}, {2, pw_call(1.0)}}));  // coord out of range
    CHECK_THROWS(make_product(2, {{0, pw_call(1.0)}, {0, pw_call(2.0)}}));  // duplicate coord
}
