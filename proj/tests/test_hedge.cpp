#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "blhedge/engine.hpp"
#include "blhedge/hedge.hpp"

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

PricingMeasure binomial_fixture() {
    const int steps = 6;
    const double u = 1.07, d = 1.0 / u, p = 0.52;
    Eigen::MatrixXd atoms(steps + 1, 1);
    Eigen::VectorXd w(steps + 1);
    double binom = 1.0;
    for (int k = 0; k <= steps; ++k) {
        atoms(k, 0) = 100.0 * std::pow(u, k) * std::pow(d, steps - k);
        w(k) = binom * std::pow(p, k) * std::pow(1.0 - p, steps - k);
        binom = binom * (steps - k) / (k + 1.0);
    }
    return make_discrete(atoms, w);
}

std::vector<double> uniform_partition(double a, double b, int cells) {
    std::vector<double> p;
    for (int i = 0; i <= cells; ++i) p.push_back(a + (b - a) * i / cells);
    return p;
}

}  // namespace

TEST_CASE("call portfolio reproduces a call exactly") {
    PiecewisePayoff1D f = pw_call(100.0);
    // the strike is a partition node, so the interpolant is the payoff itself
    HedgePortfolio hp = build_call_portfolio(f, {0.0, 50.0, 100.0, 150.0, 200.0});
    CHECK(hp.bond_units == doctest::Approx(0.0));
    CHECK(hp.digitals.empty());
    for (double x : {0.0, 30.0, 99.0, 100.0, 101.0, 170.0, 250.0})
        CHECK(hp.value(x) == doctest::Approx(f(x)).epsilon(1e-12));
    // net long exactly one unit of optionality
    double net = 0.0;
    for (const auto& c : hp.calls) net += c.weight;
    CHECK(net == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("call portfolio interpolates smooth payoffs at the nodes") {
    PiecewisePayoff1D f = pw_power(2.0);
    auto part = uniform_partition(0.0, 300.0, 60);
    HedgePortfolio hp = build_call_portfolio(f, part);
    for (double node : part) CHECK(hp.value(node) == doctest::Approx(f(node)).epsilon(1e-9));
    // between nodes the chord overshoots a convex payoff, but not by much
    CHECK(hp.value(102.5) >= f(102.5));
    CHECK(hp.value(102.5) - f(102.5) < 10.0);
}

TEST_CASE("level pin at a positive left endpoint uses a digital, not a bond") {
    PiecewisePayoff1D f = pw_affine(2.0, 0.1);  // 2 + 0.1 x
    HedgePortfolio hp = build_call_portfolio(f, uniform_partition(50.0, 150.0, 10));
    CHECK(hp.alpha == doctest::Approx(50.0));
    CHECK(hp.bond_units == doctest::Approx(0.0));
    REQUIRE(hp.digitals.size() == 1);
    CHECK(hp.digitals[0].strike == doctest::Approx(50.0));
    CHECK(hp.digitals[0].weight == doctest::Approx(f(50.0)).epsilon(1e-12));
    CHECK(hp.digitals[0].strict == Strictness::GE);
    // below the interval the replication is worthless by construction
    CHECK(hp.value(30.0) == doctest::Approx(0.0));
    CHECK(hp.value(100.0) == doctest::Approx(12.0).epsilon(1e-12));
}

TEST_CASE("portfolio construction rejects jumps inside the interval") {
    PiecewisePayoff1D dig = pw_digital_ge(100.0);
    CHECK_THROWS(build_call_portfolio(dig, uniform_partition(0.0, 200.0, 20)));
    // but a jump outside [alpha, beta] is irrelevant
    CHECK_NOTHROW(build_call_portfolio(dig, uniform_partition(110.0, 200.0, 9)));
    CHECK_THROWS(build_call_portfolio(pw_call(100.0), {100.0}));          // too short
    CHECK_THROWS(build_call_portfolio(pw_call(100.0), {0.0, 50.0, 50.0}));  // duplicate node
}

TEST_CASE("call portfolio replication metrics on a lognormal measure") {
    PricingMeasure m = one_asset();
    QuadratureSpec q;
    PiecewisePayoff1D f = pw_call(100.0);
    HedgePortfolio hp = build_call_portfolio(f, uniform_partition(0.0, 400.0, 80));
    ReplicationReport rep = replication_report(hp, f, m, 50000, 7u, q);
    CHECK(rep.sup_error < 1e-10);
    CHECK(rep.l1_error < 1e-10);
    CHECK(rep.price_gap < 1e-8);

    const double direct = expectation_with_weight(f, 0, TailEvent::unconstrained(1), m, q);
    CHECK(price_portfolio(hp, m, q) == doctest::Approx(direct).epsilon(1e-8));
}

TEST_CASE("digital decomposition prices exactly like the derivative integral") {
    PricingMeasure m = one_asset();
    QuadratureSpec q;
    for (const PiecewisePayoff1D& f :
         {pw_call(100.0), pw_put(90.0), pw_power(2.0), pw_affine(3.0, 0.5)}) {
        HedgePortfolio hp = build_digital_decomposition(f, m, q);
        CHECK(hp.bond_units == doctest::Approx(f(0.0)));
        const double via_portfolio = price_portfolio(hp, m, q);
        const double direct = expectation_with_weight(f, 0, TailEvent::unconstrained(1), m, q);
        // shared quadrature layout: the two must agree to near round-off
        CHECK(via_portfolio == doctest::Approx(direct).epsilon(1e-10));
    }
}

TEST_CASE("digital decomposition carries explicit jump digitals") {
    PricingMeasure m = one_asset();
    QuadratureSpec q;
    // payoff with one held (left) jump and one open (right) jump
    PiecewisePayoff1D f = pw_from_segments({90.0, 120.0}, {0.0, 10.0, 4.0}, {0.0, 0.0, 0.0},
                                           {10.0, 10.0});
    HedgePortfolio hp = build_digital_decomposition(f, m, q);
    REQUIRE(hp.digitals.size() == 2);
    bool saw_ge = false, saw_gt = false;
    for (const auto& d : hp.digitals) {
        if (d.strict == Strictness::GE) {
            saw_ge = true;
            CHECK(d.strike == doctest::Approx(90.0));
            CHECK(d.weight == doctest::Approx(10.0));
        } else {
            saw_gt = true;
            CHECK(d.strike == doctest::Approx(120.0));
            CHECK(d.weight == doctest::Approx(-6.0));
        }
    }
    CHECK(saw_ge);
    CHECK(saw_gt);
    // flat pieces contribute no strip cells
    for (const auto& cell : hp.strip) CHECK(cell.weight == doctest::Approx(0.0));

    const double direct = expectation_with_weight(f, 0, TailEvent::unconstrained(1), m, q);
    CHECK(price_portfolio(hp, m, q) == doctest::Approx(direct).epsilon(1e-10));
}

TEST_CASE("digital decomposition on a discrete law is an exact atom sum") {
    PricingMeasure m = binomial_fixture();
    QuadratureSpec q;
    PiecewisePayoff1D f = pw_call(100.0);
    HedgePortfolio hp = build_digital_decomposition(f, m, q);
    // exact reference: weighted payoff sum over the atoms
    CHECK(price_portfolio(hp, m, q) == doctest::Approx(8.0546223573503664).epsilon(1e-9));
}

TEST_CASE("decomposition refuses payoffs outside the admissible class") {
    PricingMeasure m = one_asset();
    PiecewisePayoff1D f = pw_smooth([](double x) { return std::exp(x / 10.0); },
                                    [](double x) { return std::exp(x / 10.0) / 10.0; });
    CHECK_THROWS_AS(build_digital_decomposition(f, m), MembershipError);
    try {
        build_digital_decomposition(f, m);
    } catch (const MembershipError& e) {
        CHECK(std::string(e.what()).find("tail") != std::string::npos);
    }
}

TEST_CASE("strip cells mirror the engine quadrature layout") {
    PricingMeasure m = one_asset();
    QuadratureSpec q;
    PiecewisePayoff1D f = pw_call(100.0);
    HedgePortfolio hp = build_digital_decomposition(f, m, q);
    REQUIRE_FALSE(hp.strip.empty());
    const double hi = truncation_bound(m, 0);
    auto nodes = segmented_nodes(0.0, hi, {100.0}, q.nodes);
    REQUIRE(hp.strip.size() == nodes.size());
    for (size_t i = 0; i < nodes.size(); ++i) {
        CHECK(hp.strip[i].node == doctest::Approx(nodes[i].node).epsilon(1e-14));
        CHECK(hp.strip[i].weight ==
              doctest::Approx(f.derivative(nodes[i].node) * nodes[i].weight).epsilon(1e-14));
    }
}
