#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <variant>
#include <vector>

namespace blhedge {

enum class Strictness { GT, GE };

// Conjunction of per-coordinate tail conditions (X_i > t_i or X_i >= t_i).
// A coordinate with threshold 0 and GE is unconstrained on the nonnegative
// state space.
struct TailEvent {
    Eigen::VectorXd thresholds;
    std::vector<Strictness> strict;

    static TailEvent unconstrained(int n) {
        TailEvent e;
        e.thresholds = Eigen::VectorXd::Zero(n);
        e.strict.assign(n, Strictness::GE);
        return e;
    }
    TailEvent& set(int coord, double threshold, Strictness s) {
        thresholds(coord) = threshold;
        strict[coord] = s;
        return *this;
    }
    int dim() const { return (int)thresholds.size(); }
    bool contains(const Eigen::VectorXd& x) const {
        for (int i = 0; i < dim(); ++i) {
            if (strict[i] == Strictness::GT ? !(x(i) > thresholds(i)) : !(x(i) >= thresholds(i)))
                return false;
        }
        return true;
    }
};

// Deterministic bond maturing at T; prices are bond-discounted expectations.
struct Discount {
    double bond = 1.0;
    double factor() const { return 1.0 / bond; }
};

// Correlated lognormal terminal law (martingale normalization: E X_i = spot_i).
struct LognormalMeasure {
    Eigen::VectorXd spot;
    Eigen::VectorXd vol;
    double maturity = 1.0;
    Eigen::MatrixXd corr;
    Eigen::MatrixXd factor;      // factor * factor^T == corr
    bool eigen_fallback = false; // semidefinite corr handled by clipped eigen factorization
};

LognormalMeasure make_lognormal(const Eigen::VectorXd& spot, const Eigen::VectorXd& vol,
                                double maturity, const Eigen::MatrixXd& corr);

// Finitely supported measure on R_+^n.
struct DiscreteMeasure {
    Eigen::MatrixXd atoms;    // rows are support points
    Eigen::VectorXd weights;  // nonnegative, sums to 1
};

DiscreteMeasure make_discrete(const Eigen::MatrixXd& atoms, const Eigen::VectorXd& weights);

// Uniform weights on observed sample rows.
struct EmpiricalMeasure {
    Eigen::MatrixXd samples;
    std::vector<Eigen::VectorXd> sorted_cols;  // per-coordinate sorted copies
};

EmpiricalMeasure make_empirical(const Eigen::MatrixXd& samples);

struct PricingMeasure {
    std::variant<LognormalMeasure, DiscreteMeasure, EmpiricalMeasure> law;

    PricingMeasure() = default;
    PricingMeasure(LognormalMeasure m) : law(std::move(m)) {}
    PricingMeasure(DiscreteMeasure m) : law(std::move(m)) {}
    PricingMeasure(EmpiricalMeasure m) : law(std::move(m)) {}

    int dim() const;
    bool is_lognormal() const { return std::holds_alternative<LognormalMeasure>(law); }
    bool is_discrete() const { return std::holds_alternative<DiscreteMeasure>(law); }
    bool is_empirical() const { return std::holds_alternative<EmpiricalMeasure>(law); }
    const LognormalMeasure& lognormal() const { return std::get<LognormalMeasure>(law); }
    const DiscreteMeasure& discrete() const { return std::get<DiscreteMeasure>(law); }
    const EmpiricalMeasure& empirical() const { return std::get<EmpiricalMeasure>(law); }
};

// Q(AND_i X_i > / >= t_i). Exact for discrete/empirical laws; quadrature
// orthant probabilities for the lognormal family.
double joint_tail_prob(const PricingMeasure& m, const TailEvent& event);

// Single-coordinate tail Q(X_i > a) or Q(X_i >= a).
double marginal_tail(const PricingMeasure& m, int coord, double a, Strictness s);

// iid draws from the terminal law; row i is sample i. Chunked counter-based
// RNG: the matrix depends only on (m, count, seed, chunk), never on threads.
Eigen::MatrixXd sample_terminal(const PricingMeasure& m, std::int64_t count, std::uint64_t seed,
                                std::int64_t chunk = 4096);

double marginal_expectation(const PricingMeasure& m, int coord);

// Lognormal marginal density (throws for purely atomic families).
double marginal_pdf(const PricingMeasure& m, int coord, double x);

// Upper truncation with tail mass below ~1e-12 (10-SD log quantile for the
// lognormal family, largest support point plus margin otherwise).
double truncation_bound(const PricingMeasure& m, int coord);

// Locations where the marginal law carries atoms (quadrature cut points).
// For large empirical samples a quantile-spaced subset is returned.
std::vector<double> marginal_atoms(const PricingMeasure& m, int coord);

// Square factor F with F F^T = corr: Cholesky when positive definite, else a
// clipped-eigenvalue factor (reported through eigen_fallback when non-null).
Eigen::MatrixXd correlation_factor(const Eigen::MatrixXd& corr, bool* eigen_fallback = nullptr);

}  // namespace blhedge
