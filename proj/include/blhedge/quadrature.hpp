#pragma once

#include <functional>
#include <vector>

namespace blhedge {

// Gauss-Legendre rule on [-1, 1].
struct GlRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// Cached rule of the given order (order >= 1).
const GlRule& gl_rule(int order);

// Single GL panel over [a, b].
double integrate_gl(const std::function<double(double)>& f, double a, double b, int order);

// Integration settings shared by all engine-side quadratures.
//
// `nodes` is the per-coordinate node budget. Integrands are piecewise smooth
// with known singular points (payoff breakpoints, atom locations), so the
// budget is spread over smooth segments as composite Gauss-Legendre panels.
// Panel nodes are interior points: the integrand is never evaluated exactly
// on a breakpoint or atom, where one-sided limits would be ambiguous.
struct QuadratureSpec {
    int nodes = 401;
    double abs_tol = 1e-7;
    // Optional per-coordinate truncation upper bounds. When empty the bounds
    // are derived from the measure (tail mass below 1e-10 beyond them).
    std::vector<double> truncation;
};

// Composite GL over [a, b] with the integrand assumed smooth between
// consecutive cut points. Cuts outside (a, b) are ignored.
double integrate_segmented(const std::function<double(double)>& f, double a, double b,
                           const std::vector<double>& cuts, int node_budget);

// One interior node of the composite layout used by integrate_segmented,
// with its panel bounds and scaled weight (integral = sum of weight * f(node)).
struct PanelNode {
    double lo = 0.0;
    double hi = 0.0;
    double node = 0.0;
    double weight = 0.0;
};

// The exact node layout integrate_segmented uses for the same arguments.
std::vector<PanelNode> segmented_nodes(double a, double b, const std::vector<double>& cuts,
                                       int node_budget);

// Adaptive GL (panel halving) to absolute tolerance. Deterministic.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double abs_tol, int max_depth = 48);

// Fixed-order pairwise reduction; deterministic and independent of how the
// values were produced (thread-count stable given identical inputs).
double pairwise_sum(const std::vector<double>& values);

}  // namespace blhedge
