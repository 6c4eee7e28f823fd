#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "blhedge/mc.hpp"
#include "blhedge/parallel.hpp"

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

double atm_call(const Eigen::VectorXd& x) { return std::max(x(0) - 100.0, 0.0); }

}  // namespace

TEST_CASE("sample summaries") {
    Eigen::VectorXd v(4);
    v << 1.0, 3.0, 5.0, 7.0;
    MCResult plain = summarize_samples(v, false);
    CHECK(plain.estimate == doctest::Approx(4.0));
    CHECK(plain.paths_used == 4);
    // sample sd of {1,3,5,7} is sqrt(20/3); SE divides by sqrt(4)
    CHECK(plain.standard_error == doctest::Approx(std::sqrt(20.0 / 3.0) / 2.0).epsilon(1e-12));

    MCResult anti = summarize_samples(v, true);
    CHECK(anti.estimate == doctest::Approx(4.0));
    CHECK(anti.paths_used == 4);
    // independent units are the pair means {2, 6}
    CHECK(anti.standard_error == doctest::Approx(std::sqrt(8.0) / std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("terminal pricing is unbiased and reproducible") {
    PricingMeasure m = one_asset();
    MCSpec spec;
    spec.paths = 200000;
    spec.seed = 42;
    MCResult a = mc_price_terminal(m, atm_call, spec);
    CHECK(a.paths_used == 200000);
    CHECK(a.standard_error > 0.0);
    CHECK(a.standard_error < 0.05);
    // Black-Scholes reference
    CHECK(std::abs(a.estimate - 7.9655674554058038) < 3.5 * a.standard_error);

    MCResult b = mc_price_terminal(m, atm_call, spec);
    CHECK(a.estimate == b.estimate);  // bit-identical repeat
    CHECK(a.standard_error == b.standard_error);

    spec.seed = 43;
    MCResult c = mc_price_terminal(m, atm_call, spec);
    CHECK(c.estimate != a.estimate);
}

TEST_CASE("estimates do not depend on the worker-thread count") {
    PricingMeasure m = one_asset();
    MCSpec spec;
    spec.paths = 50000;
    spec.seed = 7;
    const int saved = max_threads();
    set_max_threads(1);
    MCResult t1 = mc_price_terminal(m, atm_call, spec);
    set_max_threads(4);
    MCResult t4 = mc_price_terminal(m, atm_call, spec);
    set_max_threads(saved);
    CHECK(t1.estimate == t4.estimate);
    CHECK(t1.standard_error == t4.standard_error);
}

TEST_CASE("antithetic sampling mirrors draws and reduces variance here") {
    PricingMeasure m = one_asset();
    MCSpec plain;
    plain.paths = 100000;
    plain.seed = 9;
    MCSpec anti = plain;
    anti.antithetic = true;

    // payoff linear in the underlying: antithetic pairs cancel most noise
    auto fwd = [](const Eigen::VectorXd& x) { return x(0); };
    MCResult p = mc_price_terminal(m, fwd, plain);
    MCResult a = mc_price_terminal(m, fwd, anti);
    CHECK(std::abs(a.estimate - 100.0) < 4.0 * a.standard_error + 1e-9);
    CHECK(a.standard_error < 0.5 * p.standard_error);

    // mirrored rows really are the reflected quantiles
    Eigen::MatrixXd s = terminal_samples(m, anti);
    REQUIRE(s.rows() == 100000);
    const double mu = std::log(100.0) - 0.5 * 0.2 * 0.2;
    const double z0 = (std::log(s(0, 0)) - mu) / 0.2;
    const double z1 = (std::log(s(1, 0)) - mu) / 0.2;
    CHECK(z0 == doctest::Approx(-z1).epsilon(1e-9));
}

TEST_CASE("discounting applies to the estimate and its error") {
    PricingMeasure m = one_asset();
    MCSpec spec;
    spec.paths = 20000;
    MCResult undisc = mc_price_terminal(m, atm_call, spec);
    MCResult disc = mc_price_terminal(m, atm_call, spec, Discount{1.05});
    CHECK(disc.estimate == doctest::Approx(undisc.estimate / 1.05).epsilon(1e-14));
    CHECK(disc.standard_error == doctest::Approx(undisc.standard_error / 1.05).epsilon(1e-14));
}

TEST_CASE("non-finite payoffs are reported, not averaged") {
    PricingMeasure m = one_asset();
    MCSpec spec;
    spec.paths = 1000;
    auto bad = [](const Eigen::VectorXd& x) { return std::log(100.0 - x(0)); };
    CHECK_THROWS_AS(mc_price_terminal(m, bad, spec), std::runtime_error);
}

TEST_CASE("common-random-number derivative of a call matches the digital") {
    PricingMeasure m = one_asset();
    const std::int64_t n = 400000;
    Eigen::MatrixXd s = sample_terminal(m, n, 1234u);
    auto sampler = [&](double k) {
        Eigen::VectorXd v(n);
        for (std::int64_t i = 0; i < n; ++i) v(i) = std::max(s(i, 0) - k, 0.0);
        return v;
    };
    DerivativeEstimate d = crn_derivative(sampler, 100.0, {4.0, 2.0, 1.0}, true);
    CHECK_FALSE(d.inconclusive);
    CHECK(d.steps.size() == 3);
    CHECK(d.step_values.size() == 3);
    // dC/dK = -Q(S_T > K) = -0.46017216272297101
    CHECK(std::abs(d.value - (-0.46017216272297101)) < 3.5 * d.standard_error + 2e-4);
    CHECK(d.standard_error < 0.01);
}

TEST_CASE("derivative probe flags non-monotone step convergence") {
    // deterministic sampler rigged so the forward quotients are {0, 10, 1}:
    // the middle estimate swings away from the extrapolated limit
    auto sampler = [](double p) {
        double g = 0.0;
        if (p > 0.05)
            g = 0.0;
        else if (p > 0.005)
            g = 0.1;
        else if (p > 0.0)
            g = 0.001;
        Eigen::VectorXd v(16);
        v.setConstant(g);
        return v;
    };
    DerivativeEstimate d = crn_derivative(sampler, 0.0, {0.1, 0.01, 0.001}, false);
    CHECK(d.inconclusive);

    // a clean linear sampler is conclusive with zero error
    auto lin = [](double p) {
        Eigen::VectorXd v(16);
        v.setConstant(3.0 * p);
        return v;
    };
    DerivativeEstimate ok = crn_derivative(lin, 1.0, {0.1, 0.01}, true);
    CHECK_FALSE(ok.inconclusive);
    CHECK(ok.value == doctest::Approx(3.0).epsilon(1e-10));
}
