#include "blhedge/pathdep.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "blhedge/gaussian.hpp"
#include "blhedge/parallel.hpp"
#include "blhedge/rng.hpp"

namespace blhedge {

namespace {

void require(bool cond, const char* msg) {
    if (!cond) throw std::invalid_argument(msg);
}

double pos(double x) { return x > 0.0 ? x : 0.0; }

// Trapezoid average of one column over the uniform grid (rows 0..upto).
double trapezoid_average(const Eigen::MatrixXd& path, int col, int upto) {
    double acc = 0.5 * (path(0, col) + path(upto, col));
    for (int j = 1; j < upto; ++j) acc += path(j, col);
    return acc / upto;
}

// Runs every simulated path through `sink`. sink(row, path, stream, local)
// may draw additional per-path randomness at offsets >= steps * dim.
void run_paths(const PathModel& pm, const MCSpec& mc,
               const std::function<void(std::int64_t, const Eigen::MatrixXd&, RngStream&,
                                        std::int64_t)>& sink) {
    const int n = pm.dim();
    const int m = pm.steps;
    require(mc.paths >= 1, "paths must be >= 1");
    require(mc.chunk >= 2, "chunk must be >= 2");
    if (mc.antithetic) require(mc.paths % 2 == 0, "antithetic sampling needs an even path count");
    const std::int64_t logical = mc.antithetic ? mc.paths / 2 : mc.paths;
    const std::int64_t chunk = mc.chunk;
    const std::int64_t chunks = (logical + chunk - 1) / chunk;

    const double sdt = std::sqrt(pm.dt());
    Eigen::VectorXd sig(n), drift(n);
    for (int i = 0; i < n; ++i) {
        sig(i) = pm.vol(i) * sdt;
        drift(i) = -0.5 * sig(i) * sig(i);
    }

    parallel_for(chunks, [&](std::int64_t c) {
        RngStream stream{mc.seed, (std::uint64_t)c};
        const std::int64_t lo = c * chunk, hi = std::min(logical, lo + chunk);
        Eigen::MatrixXd path(m + 1, n);
        Eigen::VectorXd z(n), w(n);
        for (std::int64_t k = lo; k < hi; ++k) {
            const std::int64_t local = k - lo;
            const int passes = mc.antithetic ? 2 : 1;
            for (int a = 0; a < passes; ++a) {
                const double sign = (a == 0) ? 1.0 : -1.0;
                for (int i = 0; i < n; ++i) path(0, i) = pm.spot(i);
                for (int j = 0; j < m; ++j) {
                    for (int i = 0; i < n; ++i) z(i) = stream.normal(draw_index(local, j * n + i));
                    w.noalias() = pm.factor * z;
                    for (int i = 0; i < n; ++i)
                        path(j + 1, i) = path(j, i) * std::exp(drift(i) + sign * sig(i) * w(i));
                }
                const std::int64_t row = mc.antithetic ? 2 * k + a : k;
                sink(row, path, stream, local);
            }
        }
    });
}

}  // namespace

PathModel make_path_model(const Eigen::VectorXd& spot, const Eigen::VectorXd& vol, double maturity,
                          int steps, const Eigen::MatrixXd& corr) {
    const int n = (int)spot.size();
    require(n >= 1, "path model: empty spot vector");
    require(vol.size() == n, "path model: vol size mismatch");
    require(corr.rows() == n && corr.cols() == n, "path model: correlation size mismatch");
    require(maturity > 0.0, "path model: maturity must be positive");
    require(steps >= 1, "path model: steps must be >= 1");
    for (int i = 0; i < n; ++i) {
        require(spot(i) > 0.0, "path model: spot must be positive");
        require(vol(i) > 0.0, "path model: vol must be positive");
    }
    PathModel pm;
    pm.spot = spot;
    pm.vol = vol;
    pm.corr = corr;
    pm.factor = correlation_factor(corr);
    pm.maturity = maturity;
    pm.steps = steps;
    return pm;
}

PathModel make_path_model(double spot, double vol, double maturity, int steps) {
    return make_path_model(Eigen::VectorXd::Constant(1, spot), Eigen::VectorXd::Constant(1, vol),
                           maturity, steps, Eigen::MatrixXd::Identity(1, 1));
}

double path_option_value(const PathOption& opt, const PathModel& pm, const Eigen::MatrixXd& path) {
    const int m = (int)path.rows() - 1;
    const double dtv = pm.dt();
    switch (opt.kind) {
        case PathOptionKind::call:
            return pos(path(m, 0) - opt.strike);
        case PathOptionKind::barrier_up_in: {
            const double payoff = pos(path(m, 0) - opt.strike);
            return (path.col(0).maxCoeff() >= opt.barrier) ? payoff : 0.0;
        }
        case PathOptionKind::asian:
            return pos(trapezoid_average(path, 0, m) - opt.strike);
        case PathOptionKind::lookback:
            return pos(path.col(0).maxCoeff() - opt.strike);
        case PathOptionKind::cum_parisian: {
            double occ = 0.0;
            for (int j = 0; j < m; ++j)
                if (path(j, 0) <= opt.barrier) occ += dtv;
            return (occ >= opt.occupation) ? pos(path(m, 0) - opt.strike) : 0.0;
        }
        case PathOptionKind::multi_lookback: {
            const double t1 = opt.window_t1 < 0.0 ? pm.maturity : opt.window_t1;
            double best = 0.0;
            for (int j = 0; j <= m; ++j) {
                const double t = j * dtv;
                if (t < opt.window_t0 - 1e-12 || t > t1 + 1e-12) continue;
                for (int i = 0; i < path.cols(); ++i)
                    best = std::max(best, path(j, i) - opt.strikes(i));
            }
            return pos(best);
        }
        case PathOptionKind::asian_basket: {
            auto basket = [&](int j) {
                double g = 0.0;
                for (int i = 0; i < path.cols(); ++i) g += pos(path(j, i) - opt.strikes(i));
                return g;
            };
            double acc = 0.5 * (basket(0) + basket(m));
            for (int j = 1; j < m; ++j) acc += basket(j);
            return acc * dtv;
        }
    }
    throw std::logic_error("unknown path option kind");
}

Eigen::VectorXd path_functionals(const PathModel& pm, const MCSpec& mc,
                                 const std::function<double(const Eigen::MatrixXd&)>& f) {
    Eigen::VectorXd out(mc.paths);
    run_paths(pm, mc,
              [&](std::int64_t row, const Eigen::MatrixXd& path, RngStream&, std::int64_t) {
                  out(row) = f(path);
              });
    return out;
}

Eigen::MatrixXd path_summaries(const PathModel& pm, const MCSpec& mc,
                               const std::vector<std::function<double(const Eigen::MatrixXd&)>>& fs) {
    Eigen::MatrixXd out(mc.paths, (Eigen::Index)fs.size());
    run_paths(pm, mc,
              [&](std::int64_t row, const Eigen::MatrixXd& path, RngStream&, std::int64_t) {
                  for (size_t k = 0; k < fs.size(); ++k) out(row, (Eigen::Index)k) = fs[k](path);
              });
    return out;
}

namespace {

void validate_option(const PathModel& pm, const PathOption& opt) {
    const bool multi = opt.kind == PathOptionKind::multi_lookback ||
                       opt.kind == PathOptionKind::asian_basket;
    if (multi) {
        require(opt.strikes.size() == pm.dim(), "path option: strike vector size mismatch");
        require(opt.strikes.minCoeff() >= 0.0, "path option: strikes must be nonnegative");
        const double t1 = opt.window_t1 < 0.0 ? pm.maturity : opt.window_t1;
        require(opt.window_t0 >= 0.0 && opt.window_t0 <= t1 && t1 <= pm.maturity + 1e-12,
                "path option: bad observation window");
    } else {
        require(pm.dim() == 1, "path option: single-asset payoff needs a one-asset model");
        require(opt.strike >= 0.0, "path option: strike must be nonnegative");
        require(opt.barrier >= 0.0, "path option: barrier must be nonnegative");
        require(opt.occupation >= 0.0, "path option: occupation threshold must be nonnegative");
    }
}

}  // namespace

MCResult price_path_option(const PathModel& pm, const PathOption& opt, const MCSpec& mc) {
    validate_option(pm, opt);
    const Eigen::VectorXd values =
        path_functionals(pm, mc, [&](const Eigen::MatrixXd& p) { return path_option_value(opt, pm, p); });
    return summarize_samples(values, mc.antithetic);
}

MCResult mc_price_path(const PathModel& pm, const PathOption& opt, const MCSpec& mc) {
    return price_path_option(pm, opt, mc);
}

IdentityReport make_identity_report(std::string label, double lhs, double rhs, double lhs_se,
                                    double rhs_se, double allowance) {
    IdentityReport r;
    r.label = std::move(label);
    r.lhs = lhs;
    r.rhs = rhs;
    r.lhs_se = lhs_se;
    r.rhs_se = rhs_se;
    r.combined_se = std::sqrt(lhs_se * lhs_se + rhs_se * rhs_se);
    r.allowance = allowance;
    r.pass = std::abs(lhs - rhs) <= 3.0 * r.combined_se + allowance;
    return r;
}

IdentityReport verify_barrier_lookback_strike(const PathModel& pm, double barrier,
                                              const MCSpec& mc) {
    require(pm.dim() == 1, "barrier/lookback identity needs a one-asset model");
    require(barrier >= 0.0, "barrier must be nonnegative");
    const Eigen::MatrixXd stats = path_summaries(
        pm, mc,
        {[](const Eigen::MatrixXd& p) { return p.col(0).maxCoeff(); },
         [](const Eigen::MatrixXd& p) { return p(p.rows() - 1, 0); }});
    const Eigen::VectorXd maxima = stats.col(0);
    const Eigen::VectorXd terminal = stats.col(1);
    const std::int64_t N = mc.paths;

    auto barrier_leg = [&](double k) {
        Eigen::VectorXd v(N);
        for (std::int64_t r = 0; r < N; ++r)
            v(r) = (maxima(r) >= barrier) ? pos(terminal(r) - k) : 0.0;
        return v;
    };
    auto lookback_leg = [&](double k) {
        Eigen::VectorXd v(N);
        for (std::int64_t r = 0; r < N; ++r) v(r) = pos(maxima(r) - k);
        return v;
    };

    const double h0 = 0.04 * pm.spot(0);
    const std::vector<double> hs = {h0, 0.5 * h0, 0.25 * h0};
    const DerivativeEstimate lhs = crn_derivative(barrier_leg, 0.0, hs, /*central=*/false);
    const DerivativeEstimate rhs = crn_derivative(lookback_leg, barrier, hs, /*central=*/true);

    IdentityReport rep = make_identity_report("barrier vs lookback strike slope", lhs.value,
                                              rhs.value, lhs.standard_error, rhs.standard_error);
    const double price_se = summarize_samples(barrier_leg(0.0), false).standard_error;
    if (lhs.standard_error > 10.0 * std::max(price_se, 1e-300) ||
        rhs.standard_error > 10.0 * std::max(price_se, 1e-300))
        rep.inconclusive = true;
    if (lhs.inconclusive || rhs.inconclusive) rep.inconclusive = true;
    return rep;
}

IdentityReport lookback_from_barrier_integral(const PathModel& pm, double strike,
                                              const MCSpec& mc, const QuadratureSpec&) {
    require(pm.dim() == 1, "lookback integral identity needs a one-asset model");
    require(strike >= 0.0, "strike must be nonnegative");
    const Eigen::VectorXd maxima =
        path_functionals(pm, mc, [](const Eigen::MatrixXd& p) { return p.col(0).maxCoeff(); });
    const std::int64_t N = mc.paths;

    Eigen::VectorXd payoff(N);
    for (std::int64_t r = 0; r < N; ++r) payoff(r) = pos(maxima(r) - strike);
    const MCResult lhs = summarize_samples(payoff, false);

    // Exact integral of the empirical tail of the maxima, from the strike up
    // to the largest simulated maximum (the tail is zero beyond it).
    std::vector<double> sorted(maxima.data(), maxima.data() + N);
    std::sort(sorted.begin(), sorted.end());
    double prev = strike, integral = 0.0;
    for (std::int64_t i = 0; i < N; ++i) {
        if (sorted[i] <= prev) continue;
        integral += (sorted[i] - prev) * (double)(N - i) / (double)N;
        prev = sorted[i];
    }

    IdentityReport rep = make_identity_report("lookback price vs barrier tail integral",
                                              lhs.estimate, integral, lhs.standard_error,
                                              lhs.standard_error);
    rep.notes = "empirical maximum tail integrated exactly; remainder beyond the largest "
                "simulated maximum is zero by construction";
    return rep;
}

double terminal_max_joint_tail(double spot, double vol, double maturity, double y, double h) {
    require(spot > 0.0 && vol > 0.0 && maturity > 0.0, "joint tail: bad model parameters");
    const double s = vol * std::sqrt(maturity);
    const double mu_t = -0.5 * s * s;  // log-drift over the full horizon
    auto tail_x = [&](double x) { return norm_tail((x - mu_t) / s); };
    if (h <= spot) {
        // The running maximum starts at the spot, so the barrier is hit at t=0.
        if (y <= 0.0) return 1.0;
        return tail_x(std::log(y / spot));
    }
    const double b = std::log(h / spot);
    const double refl = std::exp(2.0 * mu_t * b / (s * s));
    const double p_hit = norm_tail((b - mu_t) / s) + refl * norm_cdf((-b - mu_t) / s);
    if (y <= 0.0) return p_hit;
    const double x = std::log(y / spot);
    if (x >= b) return tail_x(x);
    return p_hit - refl * norm_cdf((x - 2.0 * b - mu_t) / s);
}

double barrier_price_closed_form(double spot, double vol, double maturity, double barrier,
                                 double strike, const QuadratureSpec& q) {
    const double s = vol * std::sqrt(maturity);
    const double hi = spot * std::exp(-0.5 * s * s + 10.0 * s);
    if (strike >= hi) return 0.0;
    return integrate_segmented(
        [&](double y) { return terminal_max_joint_tail(spot, vol, maturity, y, barrier); }, strike,
        hi, {barrier}, q.nodes);
}

namespace {

struct TerminalMaxDensity {
    std::vector<double> k_axis, h_axis;      // interior grid coordinates
    Eigen::MatrixXd density;                 // rows: h index, cols: k index
    double dk = 0.0, dh = 0.0;
    double mass = 0.0;
};

TerminalMaxDensity build_terminal_max_density(double spot, double vol, double maturity,
                                              double width, int grid_points) {
    const double s = vol * std::sqrt(maturity);
    const double mu_t = -0.5 * s * s;
    const int nk = grid_points, nh = grid_points;
    const double klo = spot * std::exp(mu_t - width * s);
    const double khi = spot * std::exp(mu_t + width * s);
    const double hmax = khi;
    // Three rows below the spot so the density onset at the spot sits strictly
    // inside the differencing stencil.
    const double dh = (hmax - spot) / (nh - 5);
    const double hlo = spot - 3.0 * dh;
    const double dk = (khi - klo) / (nk - 1);

    Eigen::MatrixXd V(nh, nk);
    const GlRule& rule = gl_rule(7);
    parallel_for(nh, [&](std::int64_t i) {
        const double h = hlo + i * dh;
        auto tail = [&](double y) { return terminal_max_joint_tail(spot, vol, maturity, y, h); };
        // Top cell: integral of the joint tail beyond the last strike.
        double acc = integrate_adaptive(tail, khi, spot * std::exp(mu_t + 10.0 * s), 1e-12);
        V(i, nk - 1) = acc;
        for (int j = nk - 2; j >= 0; --j) {
            const double a = klo + j * dk, b = a + dk;
            double cell = 0.0;
            for (int g = 0; g < 7; ++g)
                cell += rule.weights[g] * tail(0.5 * (a + b) + 0.5 * dk * rule.nodes[g]);
            acc += 0.5 * dk * cell;
            V(i, j) = acc;
        }
    });

    TerminalMaxDensity out;
    out.dk = dk;
    out.dh = dh;
    out.k_axis.resize(nk - 2);
    out.h_axis.resize(nh - 2);
    for (int j = 1; j < nk - 1; ++j) out.k_axis[j - 1] = klo + j * dk;
    for (int i = 1; i < nh - 1; ++i) out.h_axis[i - 1] = hlo + i * dh;
    Eigen::MatrixXd d2k(nh, nk - 2);
    for (int i = 0; i < nh; ++i)
        for (int j = 1; j < nk - 1; ++j)
            d2k(i, j - 1) = (V(i, j - 1) - 2.0 * V(i, j) + V(i, j + 1)) / (dk * dk);
    out.density.resize(nh - 2, nk - 2);
    for (int i = 1; i < nh - 1; ++i)
        for (int j = 0; j < nk - 2; ++j)
            out.density(i - 1, j) = -(d2k(i + 1, j) - d2k(i - 1, j)) / (2.0 * dh);
    out.mass = out.density.sum() * dk * dh;
    return out;
}

}  // namespace

TerminalMaxReport price_h_of_terminal_and_max(const PathModel& pm, const BlackBoxPayoff& h,
                                              int grid_points, const MCSpec& mc) {
    require(pm.dim() == 1, "terminal/max recovery needs a one-asset model");
    require(h.n == 2, "payoff must take (terminal, running max)");
    require(grid_points >= 40, "terminal/max recovery needs at least 40 grid points");

    TerminalMaxReport rep;
    TerminalMaxDensity dens =
        build_terminal_max_density(pm.spot(0), pm.vol(0), pm.maturity, 5.5, grid_points);
    if (dens.mass < 0.98) {
        rep.widened = true;
        dens = build_terminal_max_density(pm.spot(0), pm.vol(0), pm.maturity, 6.5,
                                          grid_points + grid_points / 2);
        if (dens.mass < 0.98)
            throw std::runtime_error("terminal/max density grid too coarse: mass deficit persists");
    }
    rep.density_mass = dens.mass;

    double analytic = 0.0;
    Eigen::VectorXd point(2);
    {
        std::vector<double> rows(dens.h_axis.size(), 0.0);
        for (size_t i = 0; i < dens.h_axis.size(); ++i) {
            double acc = 0.0;
            for (size_t j = 0; j < dens.k_axis.size(); ++j) {
                point(0) = dens.k_axis[j];
                point(1) = dens.h_axis[i];
                acc += dens.density((Eigen::Index)i, (Eigen::Index)j) * h.value(point);
            }
            rows[i] = acc;
        }
        analytic = pairwise_sum(rows) * dens.dk * dens.dh;
    }

    // Monte Carlo side with exact continuous maxima: the within-step maximum
    // of the log price is drawn from the Brownian-bridge maximum law.
    const int m = pm.steps;
    const double var_step = pm.vol(0) * pm.vol(0) * pm.dt();
    Eigen::VectorXd values(mc.paths);
    MCSpec plain = mc;
    plain.antithetic = false;  // bridge draws pair badly with mirrored increments
    run_paths(pm, plain,
              [&](std::int64_t row, const Eigen::MatrixXd& path, RngStream& stream,
                  std::int64_t local) {
                  double log_max = std::log(path(0, 0));
                  for (int j = 0; j < m; ++j) {
                      const double a = std::log(path(j, 0));
                      const double b = std::log(path(j + 1, 0));
                      const double u = stream.uniform(draw_index(local, m + j));
                      const double seg =
                          0.5 * (a + b + std::sqrt((b - a) * (b - a) - 2.0 * var_step * std::log(u)));
                      log_max = std::max(log_max, seg);
                  }
                  Eigen::VectorXd x(2);
                  x(0) = path(m, 0);
                  x(1) = std::exp(log_max);
                  values(row) = h.value(x);
              });
    const MCResult mcres = summarize_samples(values, false);

    rep.identity = make_identity_report("terminal/max density functional", analytic,
                                        mcres.estimate, 0.0, mcres.standard_error);
    return rep;
}

AsianSensitivityReport asian_sensitivities(const PathModel& pm, double strike, const MCSpec& mc) {
    require(pm.dim() == 1, "asian sensitivities need a one-asset model");
    require(strike >= 0.0, "strike must be nonnegative");
    const int m = pm.steps;
    const double dtv = pm.dt();
    const double T = pm.maturity;

    // One simulation on a grid extended by two steps: the extension supplies
    // the right maturity derivative with shared driving noise.
    PathModel ext = pm;
    ext.steps = m + 2;
    ext.maturity = T + 2.0 * dtv;

    // Columns: base integral, +1-step integral, +2-step integral, terminal.
    auto integral_upto = [&](const Eigen::MatrixXd& p, int upto) {
        double acc = 0.5 * (p(0, 0) + p(upto, 0));
        for (int j = 1; j < upto; ++j) acc += p(j, 0);
        return acc * dtv;
    };
    const Eigen::MatrixXd stats = path_summaries(
        ext, mc,
        {[&](const Eigen::MatrixXd& p) { return integral_upto(p, m); },
         [&](const Eigen::MatrixXd& p) { return integral_upto(p, m + 1); },
         [&](const Eigen::MatrixXd& p) { return integral_upto(p, m + 2); },
         [&](const Eigen::MatrixXd& p) { return p(m, 0); }});
    const std::int64_t N = mc.paths;

    AsianSensitivityReport rep;

    // Identity 1: strike derivative of the Asian price vs -Q(payoff > 0).
    auto asian_leg = [&](double k) {
        Eigen::VectorXd v(N);
        for (std::int64_t r = 0; r < N; ++r) v(r) = pos(stats(r, 0) / T - k);
        return v;
    };
    const double h0 = 0.02 * pm.spot(0);
    const DerivativeEstimate dK =
        crn_derivative(asian_leg, strike, {h0, 0.5 * h0}, /*central=*/true);
    std::int64_t positive = 0;
    for (std::int64_t r = 0; r < N; ++r)
        if (stats(r, 0) / T - strike > 0.0) ++positive;
    const double freq = (double)positive / (double)N;
    const double freq_se = std::sqrt(std::max(0.0, freq * (1.0 - freq) / (double)N));
    rep.positive_frequency = freq;
    rep.strike_derivative = make_identity_report("asian strike slope vs -Q(payoff > 0)", dK.value,
                                                 -freq, dK.standard_error, freq_se);
    rep.strike_derivative.inconclusive = dK.inconclusive;

    // Identity 2: right maturity derivative of T * price vs the expectation of
    // the indicator-weighted (S_T - K).
    Eigen::VectorXd dT(N), rhs2(N);
    for (std::int64_t r = 0; r < N; ++r) {
        const double g0 = pos(stats(r, 0) - strike * T);
        const double g1 = pos(stats(r, 1) - strike * (T + dtv));
        const double g2 = pos(stats(r, 2) - strike * (T + 2.0 * dtv));
        const double d1 = (g1 - g0) / dtv;
        const double d2 = (g2 - g0) / (2.0 * dtv);
        dT(r) = 2.0 * d1 - d2;  // one forward-difference Richardson level
        rhs2(r) = (g0 > 0.0) ? (stats(r, 3) - strike) : 0.0;
    }
    const MCResult lhs2 = summarize_samples(dT, false);
    const MCResult rhs2r = summarize_samples(rhs2, false);
    rep.maturity_derivative =
        make_identity_report("maturity slope of T*price vs indicator-weighted terminal", lhs2.estimate,
                             rhs2r.estimate, lhs2.standard_error, rhs2r.standard_error);

    // Identity 3: the same in conditional form given a positive payoff.
    if (positive >= 2) {
        std::vector<double> clhs, crhs;
        clhs.reserve(positive);
        crhs.reserve(positive);
        for (std::int64_t r = 0; r < N; ++r) {
            if (!(pos(stats(r, 0) - strike * T) > 0.0)) continue;
            clhs.push_back(dT(r));
            crhs.push_back(stats(r, 3) - strike);
        }
        const MCResult l3 = summarize_samples(
            Eigen::Map<const Eigen::VectorXd>(clhs.data(), (Eigen::Index)clhs.size()), false);
        const MCResult r3 = summarize_samples(
            Eigen::Map<const Eigen::VectorXd>(crhs.data(), (Eigen::Index)crhs.size()), false);
        rep.conditional_maturity =
            make_identity_report("conditional maturity slope vs conditional terminal minus strike",
                                 l3.estimate, r3.estimate, l3.standard_error, r3.standard_error);
    } else {
        rep.conditional_maturity.label =
            "conditional maturity slope vs conditional terminal minus strike";
        rep.conditional_maturity.inconclusive = true;
    }
    if (freq < 0.01) {
        rep.inconclusive = true;
        rep.conditional_maturity.inconclusive = true;
    }
    return rep;
}

ParisianGridResult asian_from_parisian_grid(const PathModel& pm, double strike, int levels,
                                            const MCSpec& mc, double level_scale) {
    require(pm.dim() == 1, "level grid lower bound needs a one-asset model");
    require(levels >= 1 && levels <= 20, "level count must lie in 1..20");
    require(strike >= 0.0, "strike must be nonnegative");
    const double scale = level_scale > 0.0 ? level_scale : pm.spot(0);
    const double band = scale / levels;
    const std::int64_t top = (std::int64_t)levels * levels - 1;
    const int m = pm.steps;

    Eigen::VectorXd grid_pay(mc.paths), asian_pay(mc.paths), trap_pay(mc.paths);
    std::vector<std::int64_t> viol(mc.paths, 0);
    run_paths(pm, mc,
              [&](std::int64_t row, const Eigen::MatrixXd& p, RngStream&, std::int64_t) {
                  double grid_sum = 0.0, asian_sum = 0.0;
                  for (int j = 0; j < m; ++j) {
                      const double sj = p(j, 0);
                      std::int64_t k = (std::int64_t)std::floor(sj / band);
                      if (k > top) k = top;
                      double lev = (double)k * band;
                      while (lev > sj && k > 0) {
                          --k;
                          lev = (double)k * band;
                      }
                      // Same accumulation order on both sides: floating-point
                      // rounding is monotone, so grid_sum <= asian_sum holds
                      // path by path.
                      grid_sum += lev;
                      asian_sum += sj;
                  }
                  grid_pay(row) = pos(grid_sum / m - strike);
                  asian_pay(row) = pos(asian_sum / m - strike);
                  trap_pay(row) = pos(trapezoid_average(p, 0, m) - strike);
                  if (grid_pay(row) > asian_pay(row)) viol[row] = 1;
              });

    ParisianGridResult out;
    out.levels = levels;
    out.level_scale = scale;
    const MCResult lower = summarize_samples(grid_pay, mc.antithetic);
    const MCResult upper = summarize_samples(asian_pay, mc.antithetic);
    const MCResult trap = summarize_samples(trap_pay, mc.antithetic);
    out.lower_bound = lower.estimate;
    out.lower_bound_se = lower.standard_error;
    out.asian = upper.estimate;
    out.asian_se = upper.standard_error;
    out.asian_trapezoid = trap.estimate;
    out.gap = out.asian - out.lower_bound;
    out.violations = std::accumulate(viol.begin(), viol.end(), (std::int64_t)0);
    return out;
}

namespace {

// W(x1, x2) = E max_i (S_i(t) - x_i)^+ for the correlated two-asset lognormal
// law at horizon t, via E max = E c1 + E c2 - E min and the tail-integral
// representation of E min.
struct SliceLaw {
    double s1, s2, v1, v2, rho, t;

    double call(double spot, double vol, double x) const {
        const double sv = vol * std::sqrt(t);
        if (x <= 0.0) return spot - x;
        const double d1 = (std::log(spot / x) + 0.5 * sv * sv) / sv;
        return spot * norm_cdf(d1) - x * norm_cdf(d1 - sv);
    }
    double z1(double x) const {
        const double sv = v1 * std::sqrt(t);
        return (std::log(x / s1) + 0.5 * sv * sv) / sv;
    }
    double z2(double x) const {
        const double sv = v2 * std::sqrt(t);
        return (std::log(x / s2) + 0.5 * sv * sv) / sv;
    }
    double joint_tail(double x1, double x2) const {
        if (x1 <= 0.0 && x2 <= 0.0) return 1.0;
        if (x1 <= 0.0) return norm_tail(z2(x2));
        if (x2 <= 0.0) return norm_tail(z1(x1));
        return orthant2(z1(x1), z2(x2), rho);
    }
    double w(double x1, double x2) const {
        const double u1 = s1 * std::exp(-0.5 * v1 * v1 * t + 9.0 * v1 * std::sqrt(t));
        const double u2 = s2 * std::exp(-0.5 * v2 * v2 * t + 9.0 * v2 * std::sqrt(t));
        const double umax = std::max(u1 - x1, u2 - x2);
        double emin = 0.0;
        if (umax > 0.0)
            emin = integrate_adaptive(
                [&](double u) { return joint_tail(x1 + u, x2 + u); }, 0.0, umax, 1e-9);
        return call(s1, v1, x1) + call(s2, v2, x2) - emin;
    }
};

struct SliceDensityResult {
    std::vector<double> x1, x2;  // interior coordinates
    Eigen::MatrixXd density;
    double d1 = 0.0, d2 = 0.0;
    double mass = 0.0;
};

SliceDensityResult build_slice_density(const SliceLaw& law, double width, int grid_points) {
    const int ng = grid_points + 4;  // margin for the differencing stencil
    const double sv1 = law.v1 * std::sqrt(law.t), sv2 = law.v2 * std::sqrt(law.t);
    const double lo1 = law.s1 * std::exp(-0.5 * sv1 * sv1 - width * sv1);
    const double hi1 = law.s1 * std::exp(-0.5 * sv1 * sv1 + width * sv1);
    const double lo2 = law.s2 * std::exp(-0.5 * sv2 * sv2 - width * sv2);
    const double hi2 = law.s2 * std::exp(-0.5 * sv2 * sv2 + width * sv2);
    const double d1 = (hi1 - lo1) / (ng - 1), d2 = (hi2 - lo2) / (ng - 1);

    Eigen::MatrixXd W(ng, ng);
    parallel_for(ng, [&](std::int64_t a) {
        for (int b = 0; b < ng; ++b) W(a, b) = law.w(lo1 + a * d1, lo2 + b * d2);
    });

    // Mixed-derivative recovery: d^2/dx1 dx2 of (d/dx1 + d/dx2) W.
    Eigen::MatrixXd C(ng, ng);
    C.setZero();
    for (int a = 1; a < ng - 1; ++a)
        for (int b = 1; b < ng - 1; ++b)
            C(a, b) = (W(a + 1, b) - W(a - 1, b)) / (2.0 * d1) +
                      (W(a, b + 1) - W(a, b - 1)) / (2.0 * d2);
    SliceDensityResult out;
    out.d1 = d1;
    out.d2 = d2;
    const int inner = ng - 4;
    out.density.resize(inner, inner);
    out.x1.resize(inner);
    out.x2.resize(inner);
    for (int a = 0; a < inner; ++a) out.x1[a] = lo1 + (a + 2) * d1;
    for (int b = 0; b < inner; ++b) out.x2[b] = lo2 + (b + 2) * d2;
    for (int a = 0; a < inner; ++a)
        for (int b = 0; b < inner; ++b) {
            const int i = a + 2, j = b + 2;
            out.density(a, b) = (C(i + 1, j + 1) - C(i + 1, j - 1) - C(i - 1, j + 1) +
                                 C(i - 1, j - 1)) /
                                (4.0 * d1 * d2);
        }
    out.mass = out.density.sum() * d1 * d2;
    return out;
}

}  // namespace

AsianBasketReport asian_basket_from_multi_lookback(const PathModel& pm,
                                                   const Eigen::VectorXd& strikes, int slices,
                                                   int grid_points, const QuadratureSpec& q,
                                                   const MCSpec& mc) {
    require(pm.dim() == 2, "asian basket recovery is implemented for two assets");
    require(strikes.size() == 2, "asian basket recovery needs two strikes");
    require(slices >= 1 && slices <= 20, "slice count must lie in 1..20");
    require(grid_points >= 20, "slice grid needs at least 20 points per axis");
    (void)q;

    AsianBasketReport rep;
    const double T = pm.maturity;
    std::vector<double> slice_values(slices + 1, 0.0);
    for (int s = 0; s <= slices; ++s) {
        const double t = T * s / slices;
        if (s == 0) {
            slice_values[0] = pos(pm.spot(0) - strikes(0)) + pos(pm.spot(1) - strikes(1));
            rep.slices.push_back({0.0, 1.0});
            continue;
        }
        SliceLaw law{pm.spot(0), pm.spot(1), pm.vol(0), pm.vol(1), pm.corr(0, 1), t};
        SliceDensityResult d = build_slice_density(law, 5.0, grid_points);
        if (d.mass < 0.98) {
            rep.widened = true;
            d = build_slice_density(law, 6.0, grid_points + grid_points / 3);
            if (d.mass < 0.98)
                throw std::runtime_error("asian basket: slice density mass deficit persists");
        }
        double acc = 0.0;
        for (size_t a = 0; a < d.x1.size(); ++a)
            for (size_t b = 0; b < d.x2.size(); ++b)
                acc += d.density((Eigen::Index)a, (Eigen::Index)b) *
                       (pos(d.x1[a] - strikes(0)) + pos(d.x2[b] - strikes(1)));
        slice_values[s] = acc * d.d1 * d.d2;
        rep.slices.push_back({t, d.mass});
    }
    double analytic = 0.5 * (slice_values.front() + slice_values.back());
    for (int s = 1; s < slices; ++s) analytic += slice_values[s];
    analytic *= T / slices;

    PathOption opt;
    opt.kind = PathOptionKind::asian_basket;
    opt.strikes = strikes;
    const MCResult mcres = price_path_option(pm, opt, mc);

    const double allowance = 0.02 * std::max(std::abs(analytic), std::abs(mcres.estimate));
    rep.identity = make_identity_report("asian basket vs sliced lookback-surface recovery",
                                        analytic, mcres.estimate, 0.0, mcres.standard_error,
                                        allowance);
    return rep;
}

ConditionalResult conditional_price(const PathModel& pm, const PathOption& opt,
                                    const PathCondition& cond, const MCSpec& mc) {
    validate_option(pm, opt);
    const int m = pm.steps;
    const double dtv = pm.dt();
    Eigen::VectorXd values(mc.paths);
    Eigen::VectorXd keep(mc.paths);
    run_paths(pm, mc,
              [&](std::int64_t row, const Eigen::MatrixXd& p, RngStream&, std::int64_t) {
                  values(row) = path_option_value(opt, pm, p);
                  bool in = true;
                  switch (cond.kind) {
                      case PathCondition::Kind::always: break;
                      case PathCondition::Kind::asian_positive:
                          in = trapezoid_average(p, 0, m) > cond.strike;
                          break;
                      case PathCondition::Kind::max_at_least:
                          in = p.col(0).maxCoeff() >= cond.level;
                          break;
                      case PathCondition::Kind::occupation_at_least: {
                          double occ = 0.0;
                          for (int j = 0; j < m; ++j)
                              if (p(j, 0) <= cond.level) occ += dtv;
                          in = occ >= cond.occupation;
                          break;
                      }
                  }
                  keep(row) = in ? 1.0 : 0.0;
              });

    ConditionalResult out;
    std::vector<double> sel;
    for (std::int64_t r = 0; r < mc.paths; ++r)
        if (keep(r) > 0.5) sel.push_back(values(r));
    out.frequency = (double)sel.size() / (double)mc.paths;
    if (sel.size() < 2) {
        out.inconclusive = true;
        return out;
    }
    out.price = summarize_samples(
        Eigen::Map<const Eigen::VectorXd>(sel.data(), (Eigen::Index)sel.size()), false);
    out.inconclusive = out.frequency < 0.01;
    return out;
}

}  // namespace blhedge
