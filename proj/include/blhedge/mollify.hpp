#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "blhedge/mc.hpp"
#include "blhedge/measure.hpp"
#include "blhedge/payoff.hpp"

namespace blhedge {

// The compactly supported smoothing kernel c * exp(-1/(1-|x|^2)) on the open
// unit ball, normalized to unit mass, scaled to radius eps when convolving.
struct MollifierSpec {
    int n = 1;
    double eps = 1.0;
    double c = 0.0;  // normalization constant, set by make_mollifier
};

// Computes the normalization constant by radial quadrature (n <= 3).
MollifierSpec make_mollifier(int n, double eps);

// Kernel value at x (on the unit-radius scale; the eps scaling happens inside
// the convolution).
double rho_eval(const MollifierSpec& spec, const Eigen::VectorXd& x);

// Smoothed payoff h_eps(x) = integral of rho(y) h(x - eps y) over the unit
// ball, by a tensor Gauss-Legendre rule renormalized against the kernel mass
// on the same nodes (so constants are reproduced exactly). Arguments falling
// outside the nonnegative orthant are clamped to its boundary.
BlackBoxPayoff mollify_payoff(const BlackBoxPayoff& h, const MollifierSpec& spec,
                              int nodes_per_axis = 21);

// One smoothing radius of the convergence study: the pricing gap, the L1 gap,
// and the tail expectation outside a 6-SD box, all from shared samples.
struct MollifyRow {
    double eps = 0.0;
    double price_gap = 0.0;
    double price_gap_se = 0.0;
    double l1_gap = 0.0;
    double l1_gap_se = 0.0;
    double tail = 0.0;  // |E[h_eps ; outside the box]|
    double tail_se = 0.0;
};

struct MollifyReport {
    std::vector<MollifyRow> rows;
    double sup_tail = 0.0;   // max of the tail column over the eps schedule
    bool l1_plateau = false; // smallest-eps L1 gap significant and not shrinking
    std::vector<std::string> notes;
};

// Empirical check of the smoothing-convergence conditions along a decreasing
// eps schedule, with every radius evaluated on the same sample set.
MollifyReport convergence_check(const BlackBoxPayoff& h, const PricingMeasure& m,
                                const std::vector<double>& eps_sequence, const MCSpec& mc);

}  // namespace blhedge
