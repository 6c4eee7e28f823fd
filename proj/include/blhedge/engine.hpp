#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "blhedge/measure.hpp"
#include "blhedge/payoff.hpp"
#include "blhedge/quadrature.hpp"

namespace blhedge {

// Assignment of every coordinate to exactly one leg of the pricing
// decomposition:
//   z - payoff evaluated at zero in this coordinate
//   d - differentiated and integrated against the joint tail
//   r - right-jump counting leg (strict tail X > s)
//   l - left-jump counting leg (non-strict tail X >= s)
// Coordinate i belongs to a leg when bit i of the corresponding mask is set.
struct Split {
    std::uint32_t z = 0, d = 0, r = 0, l = 0;
    bool operator==(const Split& o) const { return z == o.z && d == o.d && r == o.r && l == o.l; }
};

// All 4^n assignments in a fixed deterministic order (coordinate 0 cycles
// slowest through z, d, r, l). Dimensions above 6 are rejected.
std::vector<Split> enumerate_splits(int n);

struct SplitContribution {
    Split split;
    double value = 0.0;
    bool skipped = false;  // structurally zero (empty jump leg), not evaluated
};

struct PriceBreakdown {
    double total = 0.0;     // discounted price
    double discount = 1.0;  // multiplier applied to the expectation
    std::vector<SplitContribution> splits;
    std::vector<std::string> warnings;

    double undiscounted() const {
        double s = 0.0;
        for (const auto& c : splits) s += c.value;
        return s;
    }
};

// Contribution of one split: the payoff (differentiated on d, at zero on z)
// integrated against the joint tail, with jump-weighted counting sums over
// the r (strict) and l (non-strict) coordinates.
double eval_a_functional(const ProductPayoff& h, const Split& split, const PricingMeasure& m,
                         const QuadratureSpec& q);

// Same with every payoff factor contribution in absolute value; a finite
// result certifies absolute convergence of the decomposition.
double eval_abs_a_functional(const ProductPayoff& h, const Split& split, const PricingMeasure& m,
                             const QuadratureSpec& q);

// Full decomposition price: discount * sum of all 4^n split contributions.
PriceBreakdown price_product(const ProductPayoff& h, const PricingMeasure& m,
                             const QuadratureSpec& q, const Discount& disc = {});

// E[f(X_coord) 1_event] via the 1-D tail decomposition
//   f(0) E[Y] + int f'(a) E[1{X>a} Y] da + right/left jump sums.
// The event must leave `coord` unconstrained.
double expectation_with_weight(const PiecewisePayoff1D& f, int coord, const TailEvent& event,
                               const PricingMeasure& m, const QuadratureSpec& q);

// Price of a continuous payoff through the z/d splits only (no jump legs).
// Mixed partials come from h.partial when provided, otherwise from iterated
// central differences with step equal to the quadrature grid spacing.
PriceBreakdown price_continuous(const BlackBoxPayoff& h, const PricingMeasure& m,
                                const QuadratureSpec& q, const Discount& disc = {});

// Closed-form reductions for two-asset payoffs.
double price_rainbow_p1(const PricingMeasure& m, double k1, double k2, double k,
                        const QuadratureSpec& q, const Discount& disc = {});
double price_spread(const PricingMeasure& m, const QuadratureSpec& q, const Discount& disc = {});

// Q-price of 1{X1 >= X2}: epsilon-quotient of shifted joint-tail integrals,
// Richardson-extrapolated, plus the boundary mass term [1 - Q(X2 > 0)].
double price_indicator_ge(const PricingMeasure& m, const QuadratureSpec& q);

}  // namespace blhedge
