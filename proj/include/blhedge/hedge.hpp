#pragma once

#include <cstdint>
#include <vector>

#include "blhedge/measure.hpp"
#include "blhedge/payoff.hpp"
#include "blhedge/quadrature.hpp"

namespace blhedge {

struct HedgeCall {
    double strike = 0.0;
    double weight = 0.0;
};

struct HedgeDigital {
    double strike = 0.0;
    double weight = 0.0;
    Strictness strict = Strictness::GE;  // GE pays on x >= K, GT on x > K
};

// One cell of the discretized continuum-digital leg: the quadrature node of
// a panel [lo, hi] carrying weight f'(node) * (scaled GL weight), so that the
// strip prices term-by-term exactly like the engine's derivative integral.
struct StripCell {
    double lo = 0.0;
    double hi = 0.0;
    double node = 0.0;
    double weight = 0.0;
};

// A static portfolio of bonds, calls and digitals whose value function
// replicates a 1-D payoff.
struct HedgePortfolio {
    double bond_units = 0.0;
    std::vector<HedgeCall> calls;
    std::vector<HedgeDigital> digitals;
    std::vector<StripCell> strip;
    double alpha = 0.0;  // left end of the replication interval
    double beta = 0.0;   // right end (value extends linearly beyond it)

    // Pointwise portfolio value: bond + digital indicators + call intrinsics
    // + strict digitals of the strip cells.
    double value(double x) const;
};

// Piecewise-linear interpolation portfolio on a partition of [alpha, beta]:
// one bond position pinning the level at alpha (a non-strict digital at alpha
// when alpha > 0, so the value vanishes below the interval) plus call spreads
// whose weights are the slope increments. Exact at partition nodes.
HedgePortfolio build_call_portfolio(const PiecewisePayoff1D& f,
                                    const std::vector<double>& partition);

// Digital decomposition of the expectation: bond f(0), the derivative leg
// discretized on the engine quadrature layout as strict digitals, one strict
// digital per right jump and one non-strict digital per left jump. Refuses
// payoffs that fail the integrability probe.
HedgePortfolio build_digital_decomposition(const PiecewisePayoff1D& f, const PricingMeasure& m,
                                           const QuadratureSpec& q = {});

// Portfolio price under the measure (undiscounted Q-expectation).
double price_portfolio(const HedgePortfolio& hp, const PricingMeasure& m,
                       const QuadratureSpec& q = {});

struct ReplicationReport {
    double sup_error = 0.0;    // max |portfolio - f| on a dense grid in [alpha, beta]
    double l1_error = 0.0;     // sample-average |portfolio - f| under the measure
    double price_gap = 0.0;    // |portfolio price - direct price of f|
};

ReplicationReport replication_report(const HedgePortfolio& hp, const PiecewisePayoff1D& f,
                                     const PricingMeasure& m, std::int64_t samples,
                                     std::uint64_t seed = 7u, const QuadratureSpec& q = {});

}  // namespace blhedge
