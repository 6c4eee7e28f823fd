#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "blhedge/mc.hpp"
#include "blhedge/measure.hpp"
#include "blhedge/quadrature.hpp"

namespace blhedge {

// What kind of option price surface a CallSurface carries: 1-D vanilla calls,
// the n-D best-of-call surface E max_i (S_i - k_i)^+, or the layered basket
// call E (sum_i (S_i - k_i)^+ - K)^+.
enum class SurfaceKind { call_1d, multi_lookback, pyramid };

// Option prices tabulated on a tensor grid of strikes; coordinate 0 varies
// slowest in the flattened value vector.
struct CallSurface {
    int n = 1;
    SurfaceKind kind = SurfaceKind::call_1d;
    std::vector<Eigen::VectorXd> strikes;  // per-coordinate, strictly increasing
    Eigen::VectorXd values;

    Eigen::Index flat_index(const std::vector<int>& idx) const;
    double at(const std::vector<int>& idx) const { return values(flat_index(idx)); }
};

CallSurface make_surface_1d(const Eigen::VectorXd& strikes, const Eigen::VectorXd& prices);
CallSurface make_surface_nd(std::vector<Eigen::VectorXd> strikes, const Eigen::VectorXd& values,
                            SurfaceKind kind);

// No-arbitrage shape diagnostics for a 1-D call surface: prices should be
// non-increasing and convex in strike up to the noise tolerance.
struct ArbitrageDiagnostics {
    int monotonicity_violations = 0;
    int convexity_violations = 0;
    double worst_monotonicity = 0.0;  // largest positive forward difference
    double worst_convexity = 0.0;     // most negative discrete curvature
    static constexpr double tolerance = 1e-8;
};

ArbitrageDiagnostics check_call_surface(const CallSurface& s);

// A density tabulated on a tensor grid (same flattening convention as
// CallSurface), with its integrated mass and negativity diagnostics.
struct DensityGrid {
    std::vector<Eigen::VectorXd> coords;
    Eigen::VectorXd density;
    double mass = 0.0;
    int negative_cells = 0;
    double negative_mass_fraction = 0.0;
    std::vector<std::string> warnings;
};

// Second strike derivative of a 1-D call surface (state-price density):
// three-point differences on the possibly non-uniform interior grid, one-sided
// quadratic fits at the endpoints, trapezoid mass. No smoothing is applied;
// arbitrage violations and negative cells are reported, never repaired.
DensityGrid bl_density_1d(const CallSurface& s);

// Left call-spread estimate of the non-strict tail Q(X >= K):
// (C(K - dK) - C(K)) / dK per step, then one Richardson level on the two
// smallest steps. The surface is interpolated linearly between strikes.
struct DigitalEstimate {
    double probability = 0.0;           // extrapolated estimate, clamped to [0, 1]
    std::vector<double> steps;          // the dK sequence actually used
    std::vector<double> estimates;      // raw spread quotient per dK
    std::vector<std::string> warnings;  // e.g. spread narrower than the grid
};

DigitalEstimate digital_from_call_spread(const CallSurface& s, double strike,
                                         const std::vector<double>& dk_sequence);

// Joint density recovery from a best-of-call surface: applies the mixed
// strike derivative of order n to (sum_i d/dk_i) V by iterated central
// differences. Valid on the grid interior (margin 2 per axis). Negative-mass
// fraction above 5% raises a warning; nothing is smoothed silently.
DensityGrid joint_density_nd(const CallSurface& s);

// Monte Carlo price of the layered basket call (sum_i (x_i - K_i)^+ - K)^+.
// This payoff is not a sum of coordinate products, so the decomposition
// engine does not apply; the plain sampler is the reference here.
MCResult pyramid_price(const PricingMeasure& m, const Eigen::VectorXd& k_vector, double k,
                       const MCSpec& mc, const Discount& disc = {});

// Recovers Q(M_i <= f_i(X) < K_i for all i) on a finite-state law using only
// product-call expectations E prod_i (f_i - c_i)^+, via the telescoping
// product of call spreads with half-gap eps. Exact when eps is smaller than
// half the minimum gap between distinct values of every f_i on the atoms.
struct RectangleRecovery {
    double probability = 0.0;
    double min_gap = 0.0;  // smallest gap between distinct f_i values
    bool exact = false;    // eps precondition satisfied
    std::vector<std::string> warnings;
};

RectangleRecovery rectangle_prob_recovery(
    const DiscreteMeasure& dm,
    const std::vector<std::function<double(const Eigen::VectorXd&)>>& fs,
    const Eigen::VectorXd& m_vector, const Eigen::VectorXd& k_vector, double eps);

}  // namespace blhedge
