#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "blhedge/mc.hpp"
#include "blhedge/payoff.hpp"
#include "blhedge/quadrature.hpp"

namespace blhedge {

// Zero-rate correlated geometric Brownian motion on a uniform time grid.
// Log-space stepping is exact in distribution at the grid times; only the
// path functionals (max, averages, occupation) carry grid bias.
struct PathModel {
    Eigen::VectorXd spot;
    Eigen::VectorXd vol;
    Eigen::MatrixXd corr;
    Eigen::MatrixXd factor;  // factor * factor^T == corr
    double maturity = 1.0;
    int steps = 1;

    int dim() const { return (int)spot.size(); }
    double dt() const { return maturity / steps; }
};

PathModel make_path_model(const Eigen::VectorXd& spot, const Eigen::VectorXd& vol, double maturity,
                          int steps, const Eigen::MatrixXd& corr);
PathModel make_path_model(double spot, double vol, double maturity, int steps);

enum class PathOptionKind {
    call,            // (S_T - K)^+
    barrier_up_in,   // 1{max S >= H} (S_T - K)^+
    asian,           // (avg S - K)^+, trapezoid time average
    lookback,        // (max S - K)^+
    cum_parisian,    // 1{time below H >= L} (S_T - K)^+, left-endpoint occupation
    multi_lookback,  // max over window and assets of (S_i(t) - K_i)^+
    asian_basket     // integral over time of sum_i (S_i(t) - K_i)^+, trapezoid
};

struct PathOption {
    PathOptionKind kind = PathOptionKind::call;
    double strike = 0.0;       // K
    double barrier = 0.0;      // H (barrier_up_in and cum_parisian level)
    double occupation = 0.0;   // L (cum_parisian)
    Eigen::VectorXd strikes;   // per-asset strikes (multi_lookback, asian_basket)
    double window_t0 = 0.0;    // multi_lookback observation window
    double window_t1 = -1.0;   // negative means "to maturity"
};

// Payoff of one simulated path: rows are grid times 0..steps, columns assets.
double path_option_value(const PathOption& opt, const PathModel& pm, const Eigen::MatrixXd& path);

// Per-path values of f over mc.paths simulated paths; f receives the
// (steps+1) x n grid matrix. Chunk-deterministic, thread-count independent.
Eigen::VectorXd path_functionals(const PathModel& pm, const MCSpec& mc,
                                 const std::function<double(const Eigen::MatrixXd&)>& f);

// Several functionals of one simulated path set (column k holds fs[k]).
Eigen::MatrixXd path_summaries(const PathModel& pm, const MCSpec& mc,
                               const std::vector<std::function<double(const Eigen::MatrixXd&)>>& fs);

MCResult price_path_option(const PathModel& pm, const PathOption& opt, const MCSpec& mc);
// Brute-force oracle entry point; identical contract.
MCResult mc_price_path(const PathModel& pm, const PathOption& opt, const MCSpec& mc);

struct IdentityReport {
    std::string label;
    double lhs = 0.0, rhs = 0.0;
    double lhs_se = 0.0, rhs_se = 0.0, combined_se = 0.0;
    bool pass = false;          // |lhs - rhs| <= 3 * combined_se (+ stated allowance)
    bool inconclusive = false;  // estimator failed its own health check
    double allowance = 0.0;     // extra absolute slack granted beyond 3 SE
    std::string notes;
};

IdentityReport make_identity_report(std::string label, double lhs, double rhs, double lhs_se,
                                    double rhs_se, double allowance = 0.0);

// Strike-derivative identity linking barrier and lookback prices: the K->0+
// slope of the barrier price at barrier H equals the lookback strike slope at
// K = H. Both sides estimated on one path set with common random numbers.
IdentityReport verify_barrier_lookback_strike(const PathModel& pm, double barrier,
                                              const MCSpec& mc);

// Lookback price as the integral over H of the empirical tail of the path
// maximum, truncated at the largest simulated maximum.
IdentityReport lookback_from_barrier_integral(const PathModel& pm, double strike,
                                              const MCSpec& mc, const QuadratureSpec& q);

// Closed-form Q(S_T > y AND max_{0<=t<=T} S_t >= h) for single-asset zero-rate
// GBM (reflection principle).
double terminal_max_joint_tail(double spot, double vol, double maturity, double y, double h);

// Analytic up-and-in barrier price: integral over y in [strike, inf) of the
// joint tail above.
double barrier_price_closed_form(double spot, double vol, double maturity, double barrier,
                                 double strike, const QuadratureSpec& q);

// Prices f = h(S_T, max S) through the mixed third strike/barrier derivative
// of the analytic barrier surface, and checks it against Monte Carlo with
// exact (Brownian-bridge) continuous maxima. h takes (terminal, running max).
struct TerminalMaxReport {
    IdentityReport identity;
    double density_mass = 0.0;
    bool widened = false;  // grid was widened once after a mass deficit
};

TerminalMaxReport price_h_of_terminal_and_max(const PathModel& pm, const BlackBoxPayoff& h,
                                              int grid_points, const MCSpec& mc);

// The three Asian sensitivity identities: strike slope vs. -Q(positive
// payoff), the right maturity derivative of T times the price vs. the
// expectation of the indicator-weighted (S_T - K), and the same conditioned
// on a positive payoff.
struct AsianSensitivityReport {
    IdentityReport strike_derivative;
    IdentityReport maturity_derivative;
    IdentityReport conditional_maturity;
    double positive_frequency = 0.0;
    bool inconclusive = false;  // conditioning event below 1% frequency
};

AsianSensitivityReport asian_sensitivities(const PathModel& pm, double strike, const MCSpec& mc);

// Level-grid lower bound for the Asian price built from cumulative-Parisian
// style occupation vectors: per path, each left-endpoint observation is
// floored to the band grid {k/levels * level_scale, k = 0..levels^2-1}. The
// construction guarantees grid payoff <= left-endpoint Asian payoff path by
// path (in floating point), so `violations` must be zero.
struct ParisianGridResult {
    double lower_bound = 0.0;
    double lower_bound_se = 0.0;
    double asian = 0.0;  // left-endpoint average Asian, the comparison side
    double asian_se = 0.0;
    double asian_trapezoid = 0.0;  // standard trapezoid Asian, reported alongside
    double gap = 0.0;              // asian - lower_bound
    std::int64_t violations = 0;
    int levels = 0;
    double level_scale = 0.0;
};

ParisianGridResult asian_from_parisian_grid(const PathModel& pm, double strike, int levels,
                                            const MCSpec& mc, double level_scale = 0.0);

// Asian-basket price recovered from short-window two-asset lookback surfaces:
// per time slice, the joint density is extracted from the analytic
// E max_i (S_i(t) - x_i)^+ surface by the mixed-derivative recovery, the
// basket integrand is integrated against it, and slices are combined by the
// trapezoid rule. Compared against the path Monte Carlo price.
struct SliceDiagnostic {
    double time = 0.0;
    double mass = 0.0;
};

struct AsianBasketReport {
    IdentityReport identity;
    std::vector<SliceDiagnostic> slices;
    bool widened = false;
};

AsianBasketReport asian_basket_from_multi_lookback(const PathModel& pm,
                                                   const Eigen::VectorXd& strikes, int slices,
                                                   int grid_points, const QuadratureSpec& q,
                                                   const MCSpec& mc);

// Conditioning events derived from path functionals.
struct PathCondition {
    enum class Kind { always, asian_positive, max_at_least, occupation_at_least } kind = Kind::always;
    double strike = 0.0;     // asian_positive: average > strike
    double level = 0.0;      // max_at_least threshold; occupation band level H
    double occupation = 0.0; // occupation_at_least threshold L
};

struct ConditionalResult {
    MCResult price;
    double frequency = 0.0;
    bool inconclusive = false;  // conditioning event below 1% frequency
};

ConditionalResult conditional_price(const PathModel& pm, const PathOption& opt,
                                    const PathCondition& cond, const MCSpec& mc);

}  // namespace blhedge
