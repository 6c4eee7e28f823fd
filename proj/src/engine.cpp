#include "blhedge/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "blhedge/parallel.hpp"

namespace blhedge {

namespace {

constexpr double kJumpEps = 1e-14;

struct JumpEntry {
    double location;
    double weight;
};

std::vector<JumpEntry> right_jumps(const PiecewisePayoff1D& f) {
    std::vector<JumpEntry> out;
    const auto& bps = f.breakpoints();
    for (size_t k = 0; k < bps.size(); ++k) {
        const double j = f.right_jump((int)k);
        if (std::abs(j) > kJumpEps * (1.0 + std::abs(f.value_at((int)k)))) out.push_back({bps[k], j});
    }
    return out;
}

std::vector<JumpEntry> left_jumps(const PiecewisePayoff1D& f) {
    std::vector<JumpEntry> out;
    const auto& bps = f.breakpoints();
    for (size_t k = 0; k < bps.size(); ++k) {
        const double j = f.left_jump((int)k);
        if (std::abs(j) > kJumpEps * (1.0 + std::abs(f.value_at((int)k)))) out.push_back({bps[k], j});
    }
    return out;
}

double coord_truncation(const PricingMeasure& m, const QuadratureSpec& q, int coord) {
    if ((int)q.truncation.size() > coord && q.truncation[coord] > 0.0) return q.truncation[coord];
    return truncation_bound(m, coord);
}

// Nested integration over the d-coordinates of one term. `fixed` carries the
// tail thresholds already chosen for r/l coordinates (and outer d levels).
double nested_d_integral(const std::vector<const ProductFactor*>& dfac, size_t level,
                         TailEvent& event, const PricingMeasure& m, const QuadratureSpec& q,
                         bool absolute) {
    if (level == dfac.size()) return joint_tail_prob(m, event);
    const ProductFactor& fac = *dfac[level];
    const double hi = coord_truncation(m, q, fac.coord);
    std::vector<double> cuts = fac.f.breakpoints();
    const auto atoms = marginal_atoms(m, fac.coord);
    cuts.insert(cuts.end(), atoms.begin(), atoms.end());
    auto integrand = [&](double y) {
        double dv = fac.f.derivative(y);
        if (absolute) dv = std::abs(dv);
        if (dv == 0.0) return 0.0;
        event.set(fac.coord, y, Strictness::GT);
        const double inner = nested_d_integral(dfac, level + 1, event, m, q, absolute);
        event.set(fac.coord, 0.0, Strictness::GE);
        return dv * inner;
    };
    return integrate_segmented(integrand, 0.0, hi, cuts, q.nodes);
}

// One term of a sum-of-products payoff against one split. Returns 0 when the
// split is structurally incompatible with the term (see
// term_structurally_zero).
double term_contribution(const ProductTerm& term, int n, const Split& split,
                         const PricingMeasure& m, const QuadratureSpec& q, bool absolute) {
    std::vector<const ProductFactor*> by_coord(n, nullptr);
    for (const auto& fac : term.factors) by_coord[fac.coord] = &fac;

    double zfac = 1.0;
    std::vector<const ProductFactor*> dfac;
    std::vector<std::pair<int, std::vector<JumpEntry>>> jump_axes;  // (coord, entries), r then l
    for (int i = 0; i < n; ++i) {
        const std::uint32_t bit = 1u << i;
        const bool in_z = split.z & bit, in_d = split.d & bit, in_r = split.r & bit,
                   in_l = split.l & bit;
        if (by_coord[i] == nullptr) {
            // No factor touches this coordinate: the implicit constant-1
            // factor has zero derivative and no jumps.
            if (!in_z) return 0.0;
            continue;
        }
        const PiecewisePayoff1D& f = by_coord[i]->f;
        if (in_z) {
            double v = f(0.0);
            if (absolute) v = std::abs(v);
            zfac *= v;
        } else if (in_d) {
            dfac.push_back(by_coord[i]);
        } else if (in_r) {
            auto js = right_jumps(f);
            if (js.empty()) return 0.0;
            jump_axes.emplace_back(i, std::move(js));
        } else if (in_l) {
            auto js = left_jumps(f);
            if (js.empty()) return 0.0;
            jump_axes.emplace_back(i, std::move(js));
        }
    }
    if (zfac == 0.0) return 0.0;

    // Walk the cartesian product of jump choices across r/l coordinates.
    std::vector<size_t> idx(jump_axes.size(), 0);
    double acc = 0.0;
    for (;;) {
        TailEvent event = TailEvent::unconstrained(n);
        double w = 1.0;
        for (size_t a = 0; a < jump_axes.size(); ++a) {
            const int coord = jump_axes[a].first;
            const JumpEntry& je = jump_axes[a].second[idx[a]];
            const bool is_right = (split.r >> coord) & 1u;
            event.set(coord, je.location, is_right ? Strictness::GT : Strictness::GE);
            w *= absolute ? std::abs(je.weight) : je.weight;
        }
        acc += w * nested_d_integral(dfac, 0, event, m, q, absolute);
        // advance multi-index
        size_t a = 0;
        for (; a < jump_axes.size(); ++a) {
            if (++idx[a] < jump_axes[a].second.size()) break;
            idx[a] = 0;
        }
        if (a == jump_axes.size()) break;
    }
    return zfac * acc;
}

bool term_structurally_zero(const ProductTerm& term, int n, const Split& split) {
    std::vector<const ProductFactor*> by_coord(n, nullptr);
    for (const auto& fac : term.factors) by_coord[fac.coord] = &fac;
    for (int i = 0; i < n; ++i) {
        const std::uint32_t bit = 1u << i;
        if (by_coord[i] == nullptr) {
            if (!(split.z & bit)) return true;
            continue;
        }
        if ((split.r & bit) && right_jumps(by_coord[i]->f).empty()) return true;
        if ((split.l & bit) && left_jumps(by_coord[i]->f).empty()) return true;
    }
    return false;
}

}  // namespace

std::vector<Split> enumerate_splits(int n) {
    if (n < 1 || n > 6) throw std::invalid_argument("enumerate_splits: dimension must be in 1..6");
    std::vector<Split> out;
    const std::int64_t total = (std::int64_t)1 << (2 * n);  // 4^n
    out.reserve(total);
    for (std::int64_t code = 0; code < total; ++code) {
        Split s;
        std::int64_t c = code;
        for (int i = n - 1; i >= 0; --i) {
            const int role = (int)(c & 3);
            c >>= 2;
            const std::uint32_t bit = 1u << i;
            switch (role) {
                case 0: s.z |= bit; break;
                case 1: s.d |= bit; break;
                case 2: s.r |= bit; break;
                default: s.l |= bit; break;
            }
        }
        out.push_back(s);
    }
    return out;
}

double eval_a_functional(const ProductPayoff& h, const Split& split, const PricingMeasure& m,
                         const QuadratureSpec& q) {
    double acc = 0.0;
    for (const auto& term : h.terms) acc += term_contribution(term, h.n, split, m, q, false);
    return acc;
}

double eval_abs_a_functional(const ProductPayoff& h, const Split& split, const PricingMeasure& m,
                             const QuadratureSpec& q) {
    double acc = 0.0;
    for (const auto& term : h.terms) acc += term_contribution(term, h.n, split, m, q, true);
    return acc;
}

PriceBreakdown price_product(const ProductPayoff& h, const PricingMeasure& m,
                             const QuadratureSpec& q, const Discount& disc) {
    if (h.n != m.dim()) throw std::invalid_argument("price_product: payoff/measure dimension mismatch");
    const auto splits = enumerate_splits(h.n);
    PriceBreakdown out;
    out.discount = disc.factor();
    out.splits.resize(splits.size());
    parallel_for((std::int64_t)splits.size(), [&](std::int64_t i) {
        const Split& s = splits[i];
        SplitContribution c;
        c.split = s;
        bool all_zero = true;
        for (const auto& term : h.terms)
            if (!term_structurally_zero(term, h.n, s)) all_zero = false;
        if (all_zero) {
            c.skipped = true;
            c.value = 0.0;
        } else {
            c.value = eval_a_functional(h, s, m, q);
        }
        out.splits[i] = c;
    });
    std::vector<double> vals;
    vals.reserve(out.splits.size());
    for (const auto& c : out.splits) vals.push_back(c.value);
    out.total = out.discount * pairwise_sum(vals);
    return out;
}

double expectation_with_weight(const PiecewisePayoff1D& f, int coord, const TailEvent& event,
                               const PricingMeasure& m, const QuadratureSpec& q) {
    const int n = m.dim();
    if (event.dim() != n) throw std::invalid_argument("expectation_with_weight: event dimension mismatch");
    if (event.thresholds(coord) != 0.0 || event.strict[coord] != Strictness::GE)
        throw std::invalid_argument("expectation_with_weight: event must leave the payoff coordinate free");

    TailEvent ev = event;
    double acc = f(0.0) * joint_tail_prob(m, ev);

    const double hi = coord_truncation(m, q, coord);
    std::vector<double> cuts = f.breakpoints();
    const auto atoms = marginal_atoms(m, coord);
    cuts.insert(cuts.end(), atoms.begin(), atoms.end());
    auto integrand = [&](double a) {
        const double dv = f.derivative(a);
        if (dv == 0.0) return 0.0;
        ev.set(coord, a, Strictness::GT);
        const double p = joint_tail_prob(m, ev);
        ev.set(coord, 0.0, Strictness::GE);
        return dv * p;
    };
    acc += integrate_segmented(integrand, 0.0, hi, cuts, q.nodes);

    for (const auto& je : right_jumps(f)) {
        ev.set(coord, je.location, Strictness::GT);
        acc += je.weight * joint_tail_prob(m, ev);
        ev.set(coord, 0.0, Strictness::GE);
    }
    for (const auto& je : left_jumps(f)) {
        ev.set(coord, je.location, Strictness::GE);
        acc += je.weight * joint_tail_prob(m, ev);
        ev.set(coord, 0.0, Strictness::GE);
    }
    return acc;
}

namespace {

// Iterated difference quotient of h over the coordinate set `mask` at
// `point`, 2^|mask| evaluations. Central stencils in the interior; where a
// minus-node would leave the nonnegative domain the stencil shifts to a
// one-sided pair so no evaluation point needs clamping (clamping would bias
// the quotient near the boundary).
double mixed_partial_fd(const BlackBoxPayoff& h, std::uint32_t mask, const Eigen::VectorXd& point,
                        const Eigen::VectorXd& steps) {
    std::vector<int> coords;
    for (int i = 0; i < h.n; ++i)
        if (mask & (1u << i)) coords.push_back(i);
    const int k = (int)coords.size();
    std::vector<double> node_lo(k), node_hi(k);
    double denom = 1.0;
    for (int j = 0; j < k; ++j) {
        const double p = point(coords[j]);
        const double s = steps(coords[j]);
        node_lo[j] = p - s;
        node_hi[j] = p + s;
        if (node_lo[j] < 0.0) {
            node_lo[j] = p;
            node_hi[j] = p + 2.0 * s;
        }
        denom *= node_hi[j] - node_lo[j];
    }
    double acc = 0.0;
    Eigen::VectorXd x = point;
    for (int t = 0; t < (1 << k); ++t) {
        x = point;
        int sign = 1;
        for (int j = 0; j < k; ++j) {
            if (t & (1 << j)) {
                x(coords[j]) = node_hi[j];
            } else {
                x(coords[j]) = node_lo[j];
                sign = -sign;
            }
        }
        acc += sign * h.value(x);
    }
    return acc / denom;
}

struct FdDiagnostics {
    std::int64_t evals = 0;
    std::int64_t sign_changes = 0;
    double prev = 0.0;
    bool have_prev = false;
    void observe(double v) {
        if (have_prev && ((prev > 0 && v < 0) || (prev < 0 && v > 0))) ++sign_changes;
        prev = v;
        have_prev = true;
        ++evals;
    }
};

double nested_continuous(const BlackBoxPayoff& h, std::uint32_t dmask,
                         const std::vector<int>& coords, size_t level, Eigen::VectorXd& point,
                         TailEvent& event, const PricingMeasure& m, const QuadratureSpec& q,
                         const Eigen::VectorXd& steps, FdDiagnostics* diag) {
    if (level == coords.size()) {
        const double tail = joint_tail_prob(m, event);
        if (tail == 0.0) return 0.0;
        const double part = h.partial ? h.partial(dmask, point) : mixed_partial_fd(h, dmask, point, steps);
        if (diag) diag->observe(part);
        return part * tail;
    }
    const int coord = coords[level];
    const double hi = coord_truncation(m, q, coord);
    const auto atoms = marginal_atoms(m, coord);
    auto integrand = [&](double y) {
        point(coord) = y;
        event.set(coord, y, Strictness::GT);
        const double v = nested_continuous(h, dmask, coords, level + 1, point, event, m, q, steps, diag);
        event.set(coord, 0.0, Strictness::GE);
        point(coord) = 0.0;
        return v;
    };
    return integrate_segmented(integrand, 0.0, hi, atoms, q.nodes);
}

}  // namespace

PriceBreakdown price_continuous(const BlackBoxPayoff& h, const PricingMeasure& m,
                                const QuadratureSpec& q, const Discount& disc) {
    const int n = h.n;
    if (n != m.dim()) throw std::invalid_argument("price_continuous: dimension mismatch");
    if (n > 6) throw std::invalid_argument("price_continuous: dimension must be in 1..6");
    PriceBreakdown out;
    out.discount = disc.factor();
    Eigen::VectorXd steps(n);
    for (int i = 0; i < n; ++i) steps(i) = coord_truncation(m, q, i) / std::max(2, q.nodes - 1);

    const std::int64_t subsets = (std::int64_t)1 << n;
    out.splits.resize(subsets);
    std::vector<std::string> warn(subsets);
    parallel_for(subsets, [&](std::int64_t mask) {
        SplitContribution c;
        c.split.d = (std::uint32_t)mask;
        c.split.z = (std::uint32_t)((subsets - 1) & ~mask);
        std::vector<int> coords;
        for (int i = 0; i < n; ++i)
            if (mask & (1 << i)) coords.push_back(i);
        Eigen::VectorXd point = Eigen::VectorXd::Zero(n);
        TailEvent event = TailEvent::unconstrained(n);
        FdDiagnostics diag;
        if (coords.empty()) {
            c.value = h.value(point);
        } else {
            c.value = nested_continuous(h, (std::uint32_t)mask, coords, 0, point, event, m, q, steps,
                                        h.partial ? nullptr : &diag);
        }
        if (!h.partial && diag.evals > 16 && diag.sign_changes * 2 > diag.evals) {
            warn[mask] = "oscillatory finite-difference partials on derivative set mask " +
                         std::to_string(mask);
        }
        out.splits[mask] = c;
    });
    for (auto& w : warn)
        if (!w.empty()) out.warnings.push_back(w);
    std::vector<double> vals;
    for (const auto& c : out.splits) vals.push_back(c.value);
    out.total = out.discount * pairwise_sum(vals);
    return out;
}

double price_rainbow_p1(const PricingMeasure& m, double k1, double k2, double k,
                        const QuadratureSpec& q, const Discount& disc) {
    if (m.dim() != 2) throw std::invalid_argument("price_rainbow_p1: needs a two-asset measure");
    const double u1 = coord_truncation(m, q, 0);
    const double u2 = coord_truncation(m, q, 1);
    const auto atoms1 = marginal_atoms(m, 0);
    const auto atoms2 = marginal_atoms(m, 1);

    const double leg1 = integrate_segmented(
        [&](double z) { return marginal_tail(m, 0, z, Strictness::GT); }, k1 + k, u1, atoms1, q.nodes);
    const double leg2 = integrate_segmented(
        [&](double z) { return marginal_tail(m, 1, z, Strictness::GT); }, k2 + k, u2, atoms2, q.nodes);
    TailEvent ev = TailEvent::unconstrained(2);
    const double cross = integrate_segmented(
        [&](double z) {
            ev.set(1, z, Strictness::GT);
            ev.set(0, k1 + k2 + k - z, Strictness::GT);
            return joint_tail_prob(m, ev);
        },
        k2, k2 + k, atoms2, q.nodes);
    return disc.factor() * (leg1 + leg2 + cross);
}

double price_spread(const PricingMeasure& m, const QuadratureSpec& q, const Discount& disc) {
    if (m.dim() != 2) throw std::invalid_argument("price_spread: needs a two-asset measure");
    const double u = std::max(coord_truncation(m, q, 0), coord_truncation(m, q, 1));
    std::vector<double> cuts = marginal_atoms(m, 0);
    const auto atoms2 = marginal_atoms(m, 1);
    cuts.insert(cuts.end(), atoms2.begin(), atoms2.end());
    TailEvent ev = TailEvent::unconstrained(2);
    const double joint = integrate_segmented(
        [&](double y) {
            ev.set(0, y, Strictness::GT);
            ev.set(1, y, Strictness::GT);
            return joint_tail_prob(m, ev);
        },
        0.0, u, cuts, q.nodes);
    return disc.factor() * (marginal_expectation(m, 0) - joint);
}

double price_indicator_ge(const PricingMeasure& m, const QuadratureSpec& q) {
    if (m.dim() != 2) throw std::invalid_argument("price_indicator_ge: needs a two-asset measure");
    const double u = std::max(coord_truncation(m, q, 0), coord_truncation(m, q, 1));
    std::vector<double> cuts = marginal_atoms(m, 0);
    const auto atoms2 = marginal_atoms(m, 1);
    cuts.insert(cuts.end(), atoms2.begin(), atoms2.end());

    TailEvent ev = TailEvent::unconstrained(2);
    auto shifted_integral = [&](double eps) {
        return integrate_segmented(
            [&](double y) {
                ev.set(0, y, Strictness::GT);
                ev.set(1, y + eps, Strictness::GT);
                return joint_tail_prob(m, ev);
            },
            0.0, u, cuts, q.nodes);
    };
    const double base = shifted_integral(0.0);

    // Scale-aware dyadic epsilon ladder; for purely atomic laws the quotient
    // is exactly linear once eps clears every support point of X1 lying just
    // below a support point of X2, so start below half that minimal gap.
    double scale = std::max(1e-8, 0.01 * (marginal_expectation(m, 0) + marginal_expectation(m, 1)));
    if (!atoms2.empty()) {
        std::vector<double> below = marginal_atoms(m, 0);
        below.push_back(0.0);
        double gap = std::numeric_limits<double>::infinity();
        for (double s : atoms2) {
            if (s <= 0.0) continue;
            for (double a : below)
                if (a < s) gap = std::min(gap, s - a);
        }
        if (std::isfinite(gap)) scale = std::min(scale, 0.5 * gap);
    }
    double prev = 0.0, extrap = 0.0;
    bool have_prev = false;
    for (int k = 0; k < 4; ++k) {
        const double eps = scale / (1 << (2 * k));  // scale, scale/4, scale/16, ...
        const double quotient = -(shifted_integral(eps) - base) / eps;
        if (have_prev) {
            // One Richardson level for the 4x step reduction.
            extrap = quotient + (quotient - prev) / 3.0;
        } else {
            extrap = quotient;
        }
        prev = quotient;
        have_prev = true;
    }

    // Mass of {X2 == 0}: the quotient construction only sees X2 > 0.
    const double boundary = 1.0 - marginal_tail(m, 1, 0.0, Strictness::GT);
    return std::min(1.0, std::max(0.0, boundary + extrap));
}

}  // namespace blhedge
