#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "blhedge/measure.hpp"

using namespace blhedge;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> xs) {
    Eigen::VectorXd v((Eigen::Index)xs.size());
    Eigen::Index i = 0;
    for (double x : xs) v(i++) = x;
    return v;
}

Eigen::MatrixXd corr2(double rho) {
    Eigen::MatrixXd c(2, 2);
    c << 1.0, rho, rho, 1.0;
    return c;
}

PricingMeasure one_asset() {
    return make_lognormal(vec({100.0}), vec({0.2}), 1.0, Eigen::MatrixXd::Identity(1, 1));
}

PricingMeasure binomial_fixture() {
    // 6-step recombining binomial marginal: s0=100, u=1.07, p=0.52.
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

}  // namespace

TEST_CASE("tail events") {
    // unconstrained == {X_i >= 0 for all i} on the nonnegative state space
    TailEvent e = TailEvent::unconstrained(3);
    CHECK(e.dim() == 3);
    Eigen::VectorXd x(3);
    x << 5.0, 0.0, 1e9;
    CHECK(e.contains(x));
    x << -1.0, 0.0, 1.0;
    CHECK_FALSE(e.contains(x));

    TailEvent s = TailEvent::unconstrained(2);
    s.set(0, 1.0, Strictness::GT);
    s.set(1, 2.0, Strictness::GE);
    Eigen::VectorXd y(2);
    y << 1.0, 2.0;
    CHECK_FALSE(s.contains(y));  // coordinate 0 is strict
    y << 1.0 + 1e-12, 2.0;
    CHECK(s.contains(y));
}

TEST_CASE("lognormal marginal tail matches reference digitals") {
    PricingMeasure m = one_asset();
    // scipy reference: Q(S_T > K) for S0=100, vol=0.2, T=1
    CHECK(marginal_tail(m, 0, 80.0, Strictness::GT) ==
          doctest::Approx(0.84511809506438818).epsilon(1e-12));
    CHECK(marginal_tail(m, 0, 100.0, Strictness::GT) ==
          doctest::Approx(0.46017216272297101).epsilon(1e-12));
    CHECK(marginal_tail(m, 0, 120.0, Strictness::GT) ==
          doctest::Approx(0.15586281131519453).epsilon(1e-12));
    // the law is atomless, so >= and > coincide
    CHECK(marginal_tail(m, 0, 100.0, Strictness::GE) ==
          doctest::Approx(0.46017216272297101).epsilon(1e-12));
    CHECK(marginal_tail(m, 0, 0.0, Strictness::GT) == doctest::Approx(1.0));
    CHECK(marginal_tail(m, 0, -3.0, Strictness::GE) == doctest::Approx(1.0));
}

TEST_CASE("lognormal marginal pdf matches reference values") {
    PricingMeasure m = one_asset();
    CHECK(marginal_pdf(m, 0, 80.0) == doctest::Approx(0.014885487470343302).epsilon(1e-12));
    CHECK(marginal_pdf(m, 0, 100.0) == doctest::Approx(0.019847627373850596).epsilon(1e-12));
    CHECK(marginal_pdf(m, 0, 120.0) == doctest::Approx(0.0099650877668315142).epsilon(1e-12));
}

TEST_CASE("lognormal joint tail uses the correlation") {
    PricingMeasure m = make_lognormal(vec({100.0, 100.0}), vec({0.2, 0.2}), 1.0, corr2(0.5));
    // thresholds at the log-median standardize to (0,0); rho=0.5 gives 1/3
    const double k_med = 100.0 * std::exp(-0.5 * 0.2 * 0.2);
    TailEvent e = TailEvent::unconstrained(2);
    e.set(0, k_med, Strictness::GT);
    e.set(1, k_med, Strictness::GE);
    CHECK(joint_tail_prob(m, e) == doctest::Approx(1.0 / 3.0).epsilon(1e-10));

    // leaving one coordinate unconstrained reduces to the marginal tail
    TailEvent e1 = TailEvent::unconstrained(2);
    e1.set(0, 120.0, Strictness::GT);
    CHECK(joint_tail_prob(m, e1) == doctest::Approx(0.15586281131519453).epsilon(1e-10));
    CHECK(joint_tail_prob(m, TailEvent::unconstrained(2)) == doctest::Approx(1.0));
}

TEST_CASE("discrete measure tails are exact sums with strictness honored") {
    PricingMeasure m = binomial_fixture();
    // reference values from the binomial mass function
    const double atom = 100.00000000000001;
    CHECK(marginal_tail(m, 0, atom, Strictness::GE) ==
          doctest::Approx(0.69296121856).epsilon(1e-13));
    CHECK(marginal_tail(m, 0, atom, Strictness::GT) ==
          doctest::Approx(0.38195881984).epsilon(1e-13));
    // the gap between >= and > is exactly the atom weight
    const double gap = marginal_tail(m, 0, atom, Strictness::GE) -
                       marginal_tail(m, 0, atom, Strictness::GT);
    CHECK(gap == doctest::Approx(0.31100239872).epsilon(1e-13));

    auto at = marginal_atoms(m, 0);
    CHECK(at.size() == 7);

    // E[X] agrees with the exact weighted sum over the atoms
    const DiscreteMeasure& d = m.discrete();
    double mean = 0.0;
    for (Eigen::Index r = 0; r < d.atoms.rows(); ++r) mean += d.weights(r) * d.atoms(r, 0);
    CHECK(marginal_expectation(m, 0) == doctest::Approx(mean).epsilon(1e-14));
}

TEST_CASE("lognormal marginal expectation is the spot") {
    CHECK(marginal_expectation(one_asset(), 0) == doctest::Approx(100.0).epsilon(1e-9));
}

TEST_CASE("empirical measure tail counts") {
    Eigen::MatrixXd s(5, 1);
    s << 1.0, 2.0, 2.0, 3.0, 10.0;
    PricingMeasure m = make_empirical(s);
    CHECK(marginal_tail(m, 0, 2.0, Strictness::GE) == doctest::Approx(0.8));
    CHECK(marginal_tail(m, 0, 2.0, Strictness::GT) == doctest::Approx(0.4));
    CHECK(marginal_tail(m, 0, 11.0, Strictness::GE) == doctest::Approx(0.0));
}

TEST_CASE("terminal sampling is reproducible and unbiased") {
    PricingMeasure m = make_lognormal(vec({100.0, 50.0}), vec({0.2, 0.3}), 1.0, corr2(0.4));
    Eigen::MatrixXd a = sample_terminal(m, 40000, 11u);
    Eigen::MatrixXd b = sample_terminal(m, 40000, 11u);
    CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);  // bit-identical repeat
    Eigen::MatrixXd c = sample_terminal(m, 40000, 12u);
    CHECK((a - c).cwiseAbs().maxCoeff() > 0.0);

    // martingale property: columns average to the spots
    const double se0 = 100.0 * 0.2 / std::sqrt(40000.0);
    const double se1 = 50.0 * 0.3 / std::sqrt(40000.0);
    CHECK(std::abs(a.col(0).mean() - 100.0) < 4.0 * se0);
    CHECK(std::abs(a.col(1).mean() - 50.0) < 4.0 * se1);

    // sample correlation of the log-returns is close to the model value
    Eigen::ArrayXd l0 = a.col(0).array().log(), l1 = a.col(1).array().log();
    l0 -= l0.mean();
    l1 -= l1.mean();
    const double corr = (l0 * l1).sum() / std::sqrt((l0 * l0).sum() * (l1 * l1).sum());
    CHECK(corr == doctest::Approx(0.4).epsilon(0.05));
}

TEST_CASE("sampling a discrete law reproduces its weights") {
    PricingMeasure m = binomial_fixture();
    Eigen::MatrixXd s = sample_terminal(m, 60000, 5u);
    double at_top = 0.0;
    for (Eigen::Index r = 0; r < s.rows(); ++r)
        if (s(r, 0) > 150.0) at_top += 1.0;
    at_top /= (double)s.rows();
    const double p = 0.019770609664000006;  // weight of the top atom
    CHECK(std::abs(at_top - p) < 4.0 * std::sqrt(p * (1 - p) / 60000.0));
}

TEST_CASE("truncation bound really covers the tail") {
    PricingMeasure m = one_asset();
    const double hi = truncation_bound(m, 0);
    CHECK(hi > 200.0);
    CHECK(marginal_tail(m, 0, hi, Strictness::GT) < 1e-9);

    PricingMeasure d = binomial_fixture();
    CHECK(truncation_bound(d, 0) >= 150.07303518490005);
}

TEST_CASE("correlation factor reproduces the matrix") {
    Eigen::MatrixXd c = corr2(-0.35);
    bool fallback = true;
    Eigen::MatrixXd f = correlation_factor(c, &fallback);
    CHECK_FALSE(fallback);
    CHECK((f * f.transpose() - c).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("discount factors") {
    Discount d;
    CHECK(d.factor() == doctest::Approx(1.0));
    Discount d2{1.05};
    CHECK(d2.factor() == doctest::Approx(1.0 / 1.05).epsilon(1e-15));
}

TEST_CASE("measure validation rejects bad inputs") {
    CHECK_THROWS(make_lognormal(vec({100.0}), vec({-0.2}), 1.0, Eigen::MatrixXd::Identity(1, 1)));
    CHECK_THROWS(make_lognormal(vec({-1.0}), vec({0.2}), 1.0, Eigen::MatrixXd::Identity(1, 1)));
    CHECK_THROWS(make_lognormal(vec({100.0, 100.0}), vec({0.2}), 1.0, corr2(0.0)));
    Eigen::MatrixXd atoms(2, 1);
    atoms << 1.0, 2.0;
    Eigen::VectorXd w(2);
    w << 0.5, -0.5;
    CHECK_THROWS(make_discrete(atoms, w));
}
