#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "blhedge/gaussian.hpp"
#include "blhedge/quadrature.hpp"
#include "blhedge/spd.hpp"

using namespace blhedge;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> xs) {
    Eigen::VectorXd v((Eigen::Index)xs.size());
    Eigen::Index i = 0;
    for (double x : xs) v(i++) = x;
    return v;
}

double bs_call(double s0, double vol, double t, double k) {
    const double sd = vol * std::sqrt(t);
    const double d1 = (std::log(s0 / k) + 0.5 * sd * sd) / sd;
    return s0 * norm_cdf(d1) - k * norm_cdf(d1 - sd);
}

double logn_pdf(double s0, double vol, double t, double x) {
    const double sd = vol * std::sqrt(t);
    const double mu = std::log(s0) - 0.5 * sd * sd;
    const double z = (std::log(x) - mu) / sd;
    return std::exp(-0.5 * z * z) / (x * sd * std::sqrt(2.0 * M_PI));
}

double logn_tail(double s0, double vol, double t, double x) {
    if (x <= 0.0) return 1.0;
    const double sd = vol * std::sqrt(t);
    const double mu = std::log(s0) - 0.5 * sd * sd;
    return norm_tail((std::log(x) - mu) / sd);
}

CallSurface bs_surface(double lo, double hi, double step) {
    const int n = (int)std::lround((hi - lo) / step) + 1;
    Eigen::VectorXd k(n), c(n);
    for (int i = 0; i < n; ++i) {
        k(i) = lo + i * step;
        c(i) = bs_call(100.0, 0.2, 1.0, k(i));
    }
    return make_surface_1d(k, c);
}

}  // namespace

TEST_CASE("surface construction and flattening") {
    CallSurface s = bs_surface(60.0, 160.0, 10.0);
    CHECK(s.n == 1);
    CHECK(s.strikes[0].size() == 11);
    CHECK(s.at({0}) == doctest::Approx(bs_call(100.0, 0.2, 1.0, 60.0)));
    CHECK_THROWS(make_surface_1d(vec({100.0, 100.0}), vec({1.0, 1.0})));   // duplicate strikes
    CHECK_THROWS(make_surface_1d(vec({100.0}), vec({1.0})));               // too few points
    CHECK_THROWS(make_surface_1d(vec({90.0, 100.0}), vec({-1.0, 0.5})));   // negative price
}

TEST_CASE("arbitrage diagnostics accept a clean surface and localize damage") {
    CallSurface s = bs_surface(40.0, 250.0, 1.0);
    ArbitrageDiagnostics d = check_call_surface(s);
    CHECK(d.monotonicity_violations == 0);
    CHECK(d.convexity_violations == 0);

    CallSurface bad = s;
    bad.values(60) += 0.05;  // bump one quote: convexity breaks around it
    ArbitrageDiagnostics db = check_call_surface(bad);
    CHECK(db.convexity_violations > 0);
    CHECK(db.worst_convexity < -1e-8);
}

TEST_CASE("second strike derivative recovers the lognormal density") {
    CallSurface s = bs_surface(40.0, 250.0, 1.0);
    DensityGrid g = bl_density_1d(s);
    REQUIRE(g.coords.size() == 1);
    REQUIRE(g.density.size() == s.strikes[0].size());
    CHECK(g.warnings.empty());
    CHECK(g.negative_cells == 0);
    CHECK(g.mass == doctest::Approx(1.0).epsilon(1e-3));

    auto density_at = [&](double strike) {
        const Eigen::VectorXd& k = g.coords[0];
        for (Eigen::Index i = 0; i < k.size(); ++i)
            if (std::abs(k(i) - strike) < 1e-9) return g.density(i);
        FAIL("strike not on grid");
        return 0.0;
    };
    // scipy lognormal pdf references
    CHECK(std::abs(density_at(80.0) - 0.014885487470343302) < 2e-5);
    CHECK(std::abs(density_at(100.0) - 0.019847627373850596) < 2e-5);
    CHECK(std::abs(density_at(120.0) - 0.0099650877668315142) < 2e-5);
}

TEST_CASE("density from a damaged surface reports, never repairs") {
    CallSurface s = bs_surface(60.0, 160.0, 2.0);
    s.values(25) += 0.05;
    DensityGrid g = bl_density_1d(s);
    CHECK(g.negative_cells > 0);
    CHECK(g.negative_mass_fraction > 0.0);
    CHECK_FALSE(g.warnings.empty());
}

TEST_CASE("digital recovery by left call spreads") {
    CallSurface s = bs_surface(40.0, 250.0, 0.5);
    DigitalEstimate d = digital_from_call_spread(s, 100.0, {4.0, 2.0, 1.0});
    CHECK(d.warnings.empty());
    REQUIRE(d.estimates.size() == 3);
    // left spreads over-estimate the tail and shrink monotonically
    CHECK(d.estimates[0] > d.estimates[1]);
    CHECK(d.estimates[1] > d.estimates[2]);
    CHECK(d.estimates[2] > 0.46017216272297101);
    // Richardson level lands within 1e-4 of Q(S >= 100)
    CHECK(std::abs(d.probability - 0.46017216272297101) < 1e-4);

    // a spread narrower than the local grid spacing is flagged
    CallSurface coarse = bs_surface(40.0, 250.0, 3.0);
    DigitalEstimate w = digital_from_call_spread(coarse, 100.0, {2.0, 1.0});
    CHECK_FALSE(w.warnings.empty());

    // stepping off the tabulated grid is an error
    CHECK_THROWS(digital_from_call_spread(s, 41.0, {4.0, 2.0}));
}

TEST_CASE("joint density from a best-of-call surface, independent pair") {
    // W(x1, x2) = E max((S1-x1)+, (S2-x2)+) = C1(x1) + C2(x2) - E min(...)
    // with E min = int_0^inf T1(x1+u) T2(x2+u) du under independence.
    const double s1 = 100.0, v1 = 0.2, s2 = 90.0, v2 = 0.25;
    const int n = 41;
    Eigen::VectorXd ax1(n), ax2(n);
    for (int i = 0; i < n; ++i) {
        ax1(i) = 60.0 + 2.5 * i;
        ax2(i) = 50.0 + 2.5 * i;
    }
    Eigen::VectorXd w(n * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            auto integrand = [&](double u) {
                return logn_tail(s1, v1, 1.0, ax1(i) + u) * logn_tail(s2, v2, 1.0, ax2(j) + u);
            };
            const double emin = integrate_adaptive(integrand, 0.0, 900.0, 1e-11);
            w(i * n + j) = bs_call(s1, v1, 1.0, ax1(i)) + bs_call(s2, v2, 1.0, ax2(j)) - emin;
        }
    CallSurface s = make_surface_nd({ax1, ax2}, w, SurfaceKind::multi_lookback);
    DensityGrid g = joint_density_nd(s);
    REQUIRE(g.coords.size() == 2);

    // compare against the product of the marginal densities on the interior
    const int i0 = 16, j0 = 16;  // x1 = 100, x2 = 90
    const Eigen::Index rows = g.coords[1].size();
    const double got = g.density(i0 * rows + j0);
    const double ref = logn_pdf(s1, v1, 1.0, g.coords[0](i0)) * logn_pdf(s2, v2, 1.0, g.coords[1](j0));
    CHECK(got == doctest::Approx(ref).epsilon(0.01));
    CHECK(g.mass > 0.5);
    CHECK(g.mass < 1.05);
    CHECK(g.negative_mass_fraction < 0.05);
}

TEST_CASE("layered basket call pricing") {
    PricingMeasure m = make_lognormal(vec({100.0, 100.0}), vec({0.2, 0.2}), 1.0,
                                      Eigen::MatrixXd::Identity(2, 2));
    MCSpec mc;
    mc.paths = 150000;
    mc.seed = 3;
    // zero layer strike: the payoff is exactly the sum of two vanilla calls
    MCResult base = pyramid_price(m, vec({100.0, 120.0}), 0.0, mc);
    const double ref = 7.9655674554058038 + 2.1472988105781461;
    CHECK(std::abs(base.estimate - ref) < 3.5 * base.standard_error);

    MCResult again = pyramid_price(m, vec({100.0, 120.0}), 0.0, mc);
    CHECK(base.estimate == again.estimate);  // reproducible

    MCResult layered = pyramid_price(m, vec({100.0, 120.0}), 5.0, mc);
    CHECK(layered.estimate < base.estimate);
    CHECK(layered.estimate > 0.0);
}

TEST_CASE("rectangle probabilities from product calls on a finite law") {
    Eigen::MatrixXd atoms(4, 2);
    atoms << 1.0, 1.0, 1.0, 2.0, 2.0, 1.0, 2.0, 2.0;
    Eigen::VectorXd wts(4);
    wts << 0.1, 0.2, 0.3, 0.4;
    DiscreteMeasure dm = make_discrete(atoms, wts);
    std::vector<std::function<double(const Eigen::VectorXd&)>> fs = {
        [](const Eigen::VectorXd& x) { return x(0); },
        [](const Eigen::VectorXd& x) { return x(1); }};

    RectangleRecovery r1 = rectangle_prob_recovery(dm, fs, vec({1.0, 1.0}), vec({2.0, 2.0}), 0.25);
    CHECK(r1.exact);
    CHECK(r1.min_gap == doctest::Approx(1.0));
    CHECK(r1.probability == doctest::Approx(0.1).epsilon(1e-13));

    RectangleRecovery r2 = rectangle_prob_recovery(dm, fs, vec({1.0, 2.0}), vec({2.0, 3.0}), 0.25);
    CHECK(r2.exact);
    CHECK(r2.probability == doctest::Approx(0.2).epsilon(1e-13));

    // off-grid corners are fine while the ramp windows stay value-free
    RectangleRecovery r3 = rectangle_prob_recovery(dm, fs, vec({1.3, 0.5}), vec({2.5, 3.0}), 0.25);
    CHECK(r3.exact);
    CHECK(r3.probability == doctest::Approx(0.7).epsilon(1e-13));

    // a payoff value inside a ramp window kills exactness and is reported
    RectangleRecovery r4 = rectangle_prob_recovery(dm, fs, vec({1.1, 1.0}), vec({2.5, 3.0}), 0.25);
    CHECK_FALSE(r4.exact);
    CHECK_FALSE(r4.warnings.empty());

    // eps beyond half the minimum gap is flagged
    RectangleRecovery r5 = rectangle_prob_recovery(dm, fs, vec({1.0, 1.0}), vec({2.0, 2.0}), 0.6);
    CHECK_FALSE(r5.exact);
    CHECK_FALSE(r5.warnings.empty());
}
