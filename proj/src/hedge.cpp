#include "blhedge/hedge.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "blhedge/engine.hpp"

namespace blhedge {

namespace {

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

double pos(double x) { return x > 0.0 ? x : 0.0; }

double coord_truncation(const QuadratureSpec& q, const PricingMeasure& m) {
    if (!q.truncation.empty() && q.truncation[0] > 0.0) return q.truncation[0];
    return truncation_bound(m, 0);
}

}  // namespace

double HedgePortfolio::value(double x) const {
    double acc = bond_units;
    for (const auto& d : digitals) {
        const bool in = d.strict == Strictness::GE ? x >= d.strike : x > d.strike;
        if (in) acc += d.weight;
    }
    for (const auto& c : calls) acc += c.weight * pos(x - c.strike);
    for (const auto& s : strip)
        if (x > s.node) acc += s.weight;
    return acc;
}

HedgePortfolio build_call_portfolio(const PiecewisePayoff1D& f,
                                    const std::vector<double>& partition) {
    require(partition.size() >= 2, "partition needs at least two points");
    for (size_t k = 0; k + 1 < partition.size(); ++k) {
        require(partition[k] != partition[k + 1], "partition contains duplicate points");
        require(partition[k] < partition[k + 1], "partition must be increasing");
    }
    const double alpha = partition.front(), beta = partition.back();
    require(alpha >= 0.0, "partition must lie in the nonnegative half-line");

    // The interpolant replicates only continuous payoffs: reject any jump of
    // f inside [alpha, beta].
    const auto& bps = f.breakpoints();
    for (size_t k = 0; k < bps.size(); ++k) {
        const double s = bps[k];
        if (s < alpha - 1e-14 || s > beta + 1e-14) continue;
        const double scale = 1.0 + std::abs(f.value_at((int)k));
        const bool left_in = s > alpha + 1e-14;   // left limit matters inside only
        const bool right_in = s < beta - 1e-14;
        if ((left_in && std::abs(f.left_jump((int)k)) > 1e-12 * scale) ||
            (right_in && std::abs(f.right_jump((int)k)) > 1e-12 * scale))
            throw std::invalid_argument("payoff is discontinuous at " + std::to_string(s) +
                                        " inside the replication interval");
    }

    HedgePortfolio hp;
    hp.alpha = alpha;
    hp.beta = beta;
    const double f_alpha = f(alpha);
    if (alpha <= 0.0)
        hp.bond_units = f_alpha;  // 1{x >= 0} is identically one on the state space
    else if (f_alpha != 0.0)
        hp.digitals.push_back({alpha, f_alpha, Strictness::GE});

    std::vector<double> slopes(partition.size() - 1);
    double slope_scale = 1.0;
    for (size_t k = 0; k + 1 < partition.size(); ++k) {
        slopes[k] = (f(partition[k + 1]) - f(partition[k])) / (partition[k + 1] - partition[k]);
        slope_scale = std::max(slope_scale, std::abs(slopes[k]));
    }
    for (size_t k = 0; k < slopes.size(); ++k) {
        const double w = k == 0 ? slopes[0] : slopes[k] - slopes[k - 1];
        if (std::abs(w) > 1e-13 * slope_scale) hp.calls.push_back({partition[k], w});
    }
    return hp;
}

HedgePortfolio build_digital_decomposition(const PiecewisePayoff1D& f, const PricingMeasure& m,
                                           const QuadratureSpec& q) {
    const PiQReport probe = check_pi_q_membership(f, m, 0);
    if (!probe.member()) {
        std::string why = "payoff rejected by the integrability probe:";
        if (!probe.integrable) why += " E|f(X)| diverges on nested truncations;";
        if (!probe.tail_limit_ok) why += " |f(x)| Q(X >= x) does not vanish at the truncation;";
        if (!probe.derivative_integral_finite) why += " the derivative-tail integral diverges;";
        throw MembershipError(why);
    }

    const double hi = coord_truncation(q, m);
    std::vector<double> cuts = f.breakpoints();
    for (double a : marginal_atoms(m, 0)) cuts.push_back(a);

    HedgePortfolio hp;
    hp.alpha = 0.0;
    hp.beta = hi;
    hp.bond_units = f.value_at_zero();
    for (const PanelNode& pn : segmented_nodes(0.0, hi, cuts, q.nodes))
        hp.strip.push_back({pn.lo, pn.hi, pn.node, f.derivative(pn.node) * pn.weight});
    const auto& bps = f.breakpoints();
    for (size_t k = 0; k < bps.size(); ++k) {
        const double rj = f.right_jump((int)k);
        const double lj = f.left_jump((int)k);
        if (rj != 0.0) hp.digitals.push_back({bps[k], rj, Strictness::GT});
        if (lj != 0.0) hp.digitals.push_back({bps[k], lj, Strictness::GE});
    }
    return hp;
}

double price_portfolio(const HedgePortfolio& hp, const PricingMeasure& m,
                       const QuadratureSpec& q) {
    const double hi = coord_truncation(q, m);
    const std::vector<double> atom_cuts = marginal_atoms(m, 0);
    double acc = hp.bond_units;
    for (const auto& d : hp.digitals)
        acc += d.weight * marginal_tail(m, 0, d.strike,
                                        d.strict == Strictness::GE ? Strictness::GE
                                                                   : Strictness::GT);
    for (const auto& c : hp.calls) {
        if (c.strike < hi)
            acc += c.weight * integrate_segmented(
                                  [&](double a) { return marginal_tail(m, 0, a, Strictness::GT); },
                                  c.strike, hi, atom_cuts, q.nodes);
    }
    for (const auto& s : hp.strip) acc += s.weight * marginal_tail(m, 0, s.node, Strictness::GT);
    return acc;
}

ReplicationReport replication_report(const HedgePortfolio& hp, const PiecewisePayoff1D& f,
                                     const PricingMeasure& m, std::int64_t samples,
                                     std::uint64_t seed, const QuadratureSpec& q) {
    ReplicationReport rep;

    // Sup error over a dense grid of [alpha, beta] joined with every special
    // point of the payoff and the portfolio.
    std::vector<double> grid;
    const int dense = 4096;
    for (int i = 0; i <= dense; ++i)
        grid.push_back(hp.alpha + (hp.beta - hp.alpha) * i / dense);
    for (double s : f.breakpoints()) grid.push_back(s);
    for (const auto& c : hp.calls) grid.push_back(c.strike);
    for (const auto& d : hp.digitals) grid.push_back(d.strike);
    for (double x : grid) {
        if (x < hp.alpha || x > hp.beta) continue;
        rep.sup_error = std::max(rep.sup_error, std::abs(hp.value(x) - f(x)));
    }

    const Eigen::MatrixXd draws = sample_terminal(m, samples, seed);
    double acc = 0.0;
    for (Eigen::Index r = 0; r < draws.rows(); ++r)
        acc += std::abs(hp.value(draws(r, 0)) - f(draws(r, 0)));
    rep.l1_error = acc / (double)draws.rows();

    const double direct =
        expectation_with_weight(f, 0, TailEvent::unconstrained(m.dim()), m, q);
    rep.price_gap = std::abs(price_portfolio(hp, m, q) - direct);
    return rep;
}

}  // namespace blhedge
