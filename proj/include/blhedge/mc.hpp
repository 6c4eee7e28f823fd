#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "blhedge/measure.hpp"

namespace blhedge {

// Simulation request. Identical MCSpec values produce bit-identical estimates
// regardless of the worker-thread count (chunked counter RNG plus fixed-order
// reduction).
struct MCSpec {
    std::int64_t paths = 100000;
    int steps = 1;  // time steps for path simulation; unused for terminal draws
    std::uint64_t seed = 1;
    bool antithetic = false;
    int chunk = 4096;
};

struct MCResult {
    double estimate = 0.0;
    double standard_error = 0.0;
    std::int64_t paths_used = 0;
    double elapsed_seconds = 0.0;
};

// Mean and standard error of a per-sample value vector. With antithetic
// sampling the independent units are consecutive pair means.
MCResult summarize_samples(const Eigen::VectorXd& values, bool antithetic);

// Terminal draws honoring spec.antithetic: logical draw k yields sample rows
// 2k (plain) and 2k+1 (mirrored). Without the flag this matches
// sample_terminal(m, paths, seed) exactly.
Eigen::MatrixXd terminal_samples(const PricingMeasure& m, const MCSpec& spec);

// Discounted sample mean of payoff(row) with standard error. Throws when the
// payoff evaluates non-finite, naming the offending sample point.
MCResult mc_price_terminal(const PricingMeasure& m,
                           const std::function<double(const Eigen::VectorXd&)>& payoff,
                           const MCSpec& spec, const Discount& disc = {});

// Finite-difference derivative where every evaluation shares the driving
// noise: sampler(p) must return per-path values built from one fixed sample
// set. step_sequence is decreasing; the last two steps feed one Richardson
// extrapolation level.
struct DerivativeEstimate {
    double value = 0.0;          // extrapolated derivative
    double standard_error = 0.0; // SE of the extrapolated pathwise difference
    std::vector<double> step_values;
    std::vector<double> steps;
    bool inconclusive = false;   // non-monotone convergence across steps
};

DerivativeEstimate crn_derivative(const std::function<Eigen::VectorXd(double)>& sampler,
                                  double param, const std::vector<double>& step_sequence,
                                  bool central);

}  // namespace blhedge
