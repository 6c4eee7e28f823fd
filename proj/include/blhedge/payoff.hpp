#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "blhedge/measure.hpp"

namespace blhedge {

// One smooth piece of a 1-D payoff; defined on the open interval between
// consecutive breakpoints.
struct PayoffPiece {
    std::function<double(double)> value;
    std::function<double(double)> deriv;
};

// Piecewise-C1 payoff on R_+ with finitely many (possible) discontinuities.
// Pointwise values at breakpoints and their one-sided limits are stored
// explicitly, so the left/right jumps used by the jump legs of the pricing
// decomposition are exact rather than numerically probed.
class PiecewisePayoff1D {
public:
    PiecewisePayoff1D(std::vector<double> breakpoints, std::vector<PayoffPiece> pieces,
                      std::vector<double> value_at, std::vector<double> left_limit,
                      std::vector<double> right_limit, std::string label = "");

    double operator()(double x) const;
    // d/dx away from breakpoints (right-piece limit when queried exactly on one).
    double derivative(double x) const;

    const std::vector<double>& breakpoints() const { return breakpoints_; }
    double value_at(int k) const { return value_at_[k]; }
    double left_limit(int k) const { return left_limit_[k]; }
    double right_limit(int k) const { return right_limit_[k]; }
    // f(s_k) - f(s_k-); by convention 0 at s_k == 0 (there is nothing left of 0).
    double left_jump(int k) const;
    // f(s_k+) - f(s_k).
    double right_jump(int k) const;
    bool has_jumps() const;
    double value_at_zero() const;
    const std::string& label() const { return label_; }

private:
    int piece_index(double x) const;

    std::vector<double> breakpoints_;
    std::vector<PayoffPiece> pieces_;  // breakpoints_.size() + 1 entries
    std::vector<double> value_at_, left_limit_, right_limit_;
    std::string label_;
};

// ---- builders ---------------------------------------------------------------
PiecewisePayoff1D pw_call(double strike);
PiecewisePayoff1D pw_put(double strike);
PiecewisePayoff1D pw_digital_ge(double strike);  // 1{x >= K}
PiecewisePayoff1D pw_digital_gt(double strike);  // 1{x > K}
PiecewisePayoff1D pw_power(double p);            // x^p
PiecewisePayoff1D pw_affine(double a, double b); // a + b*x
PiecewisePayoff1D pw_constant(double c);
PiecewisePayoff1D pw_identity();
PiecewisePayoff1D pw_smooth(std::function<double(double)> value,
                            std::function<double(double)> deriv, std::string label = "smooth");
PiecewisePayoff1D pw_scale(const PiecewisePayoff1D& f, double alpha);
// Piecewise-affine payoff: segment k carries a_k + b_k * x; jumps allowed.
PiecewisePayoff1D pw_from_segments(const std::vector<double>& breakpoints,
                                   const std::vector<double>& seg_a,
                                   const std::vector<double>& seg_b,
                                   const std::vector<double>& value_at);

// ---- multi-asset payoffs ----------------------------------------------------

struct ProductFactor {
    int coord;
    PiecewisePayoff1D f;
};

struct ProductTerm {
    std::vector<ProductFactor> factors;  // distinct coordinates
};

// h(x) = sum_k prod_j f_{k,j}(x_{c(k,j)}) on R_+^n.
struct ProductPayoff {
    int n = 0;
    std::vector<ProductTerm> terms;

    double operator()(const Eigen::VectorXd& x) const;
};

ProductPayoff make_single(int n, int coord, PiecewisePayoff1D f);
ProductPayoff make_product(int n, std::vector<ProductFactor> factors);
ProductPayoff payoff_sum(const ProductPayoff& a, const ProductPayoff& b);
ProductPayoff payoff_scale(const ProductPayoff& a, double alpha);

// Payoff with no algebraic structure; optional analytic mixed partials keyed
// by a coordinate-subset bitmask (bit i set = one derivative in coordinate i).
struct BlackBoxPayoff {
    int n = 0;
    std::function<double(const Eigen::VectorXd&)> value;
    std::function<double(std::uint32_t, const Eigen::VectorXd&)> partial;  // optional
};

// ---- membership probes --------------------------------------------------------

// Checks for the 1-D payoff class the pricing decomposition is valid on:
// integrability, vanishing tail product |f(x-)| Q(X >= x), and a finite
// derivative-against-tail integral. Divergence is detected by comparing the
// integral's increments on nested truncations.
struct PiQReport {
    bool integrable = false;
    bool tail_limit_ok = false;
    bool derivative_integral_finite = false;
    double expectation_abs = 0.0;
    double derivative_integral = 0.0;
    double tail_product_at_truncation = 0.0;
    bool member() const { return integrable && tail_limit_ok && derivative_integral_finite; }
};

PiQReport check_pi_q_membership(const PiecewisePayoff1D& f, const PricingMeasure& m,
                                int coord = 0, double truncation = 0.0 /* 0 = derive */);

// Sampled certificate for sum-of-product payoffs: every permutation-ordered
// prefix of absolute factor moments must be finite and the mixed tail
// products must decay across growing thresholds.
struct ProductMembershipReport {
    bool finite_moments = false;
    bool decay_ok = false;
    std::string detail;
    bool member() const { return finite_moments && decay_ok; }
};

ProductMembershipReport check_product_membership(const ProductPayoff& h, const PricingMeasure& m,
                                                 std::int64_t samples = 100000,
                                                 std::uint64_t seed = 20260825ull);

// Raised when a payoff fails the membership probe and the caller refuses to
// price or decompose it; the message names the failing condition.
class MembershipError : public std::runtime_error {
public:
    explicit MembershipError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace blhedge
