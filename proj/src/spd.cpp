#include "blhedge/spd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace blhedge {

namespace {

void require(bool cond, const char* msg) {
    if (!cond) throw std::invalid_argument(msg);
}

double pos(double x) { return x > 0.0 ? x : 0.0; }

}  // namespace

Eigen::Index CallSurface::flat_index(const std::vector<int>& idx) const {
    require((int)idx.size() == n, "surface index arity mismatch");
    Eigen::Index flat = 0;
    for (int i = 0; i < n; ++i) {
        require(idx[i] >= 0 && idx[i] < strikes[i].size(), "surface index out of range");
        flat = flat * strikes[i].size() + idx[i];
    }
    return flat;
}

CallSurface make_surface_1d(const Eigen::VectorXd& strikes, const Eigen::VectorXd& prices) {
    return make_surface_nd({strikes}, prices, SurfaceKind::call_1d);
}

CallSurface make_surface_nd(std::vector<Eigen::VectorXd> strikes, const Eigen::VectorXd& values,
                            SurfaceKind kind) {
    CallSurface s;
    s.n = (int)strikes.size();
    require(s.n >= 1, "surface needs at least one strike axis");
    s.kind = kind;
    Eigen::Index expected = 1;
    for (const auto& g : strikes) {
        require(g.size() >= 2, "each strike axis needs at least two points");
        for (Eigen::Index i = 0; i + 1 < g.size(); ++i)
            require(g(i) < g(i + 1), "strikes must be strictly increasing");
        expected *= g.size();
    }
    require(values.size() == expected, "surface value count does not match the strike grid");
    require(values.minCoeff() >= 0.0, "surface prices must be non-negative");
    s.strikes = std::move(strikes);
    s.values = values;
    return s;
}

ArbitrageDiagnostics check_call_surface(const CallSurface& s) {
    require(s.n == 1 && s.kind == SurfaceKind::call_1d, "shape diagnostics apply to 1-D call surfaces");
    const Eigen::VectorXd& k = s.strikes[0];
    const Eigen::VectorXd& c = s.values;
    ArbitrageDiagnostics d;
    for (Eigen::Index i = 0; i + 1 < k.size(); ++i) {
        const double fwd = c(i + 1) - c(i);
        if (fwd > ArbitrageDiagnostics::tolerance) {
            ++d.monotonicity_violations;
            d.worst_monotonicity = std::max(d.worst_monotonicity, fwd);
        }
    }
    for (Eigen::Index i = 1; i + 1 < k.size(); ++i) {
        const double sl = (c(i) - c(i - 1)) / (k(i) - k(i - 1));
        const double sr = (c(i + 1) - c(i)) / (k(i + 1) - k(i));
        const double curv = sr - sl;
        if (curv < -ArbitrageDiagnostics::tolerance) {
            ++d.convexity_violations;
            d.worst_convexity = std::min(d.worst_convexity, curv);
        }
    }
    return d;
}

DensityGrid bl_density_1d(const CallSurface& s) {
    require(s.n == 1 && s.kind == SurfaceKind::call_1d, "density inversion needs a 1-D call surface");
    const Eigen::VectorXd& k = s.strikes[0];
    const Eigen::VectorXd& c = s.values;
    const Eigen::Index N = k.size();
    require(N >= 5, "density inversion needs at least 5 strikes");

    DensityGrid g;
    g.coords = {k};
    g.density.resize(N);

    auto second_dd = [&](Eigen::Index i0, Eigen::Index i1, Eigen::Index i2) {
        // Twice the second divided difference: the curvature of the quadratic
        // through the three points.
        const double s01 = (c(i1) - c(i0)) / (k(i1) - k(i0));
        const double s12 = (c(i2) - c(i1)) / (k(i2) - k(i1));
        return 2.0 * (s12 - s01) / (k(i2) - k(i0));
    };
    for (Eigen::Index i = 1; i + 1 < N; ++i) g.density(i) = second_dd(i - 1, i, i + 1);
    g.density(0) = second_dd(0, 1, 2);
    g.density(N - 1) = second_dd(N - 3, N - 2, N - 1);

    double mass = 0.0, neg = 0.0, tot = 0.0;
    for (Eigen::Index i = 0; i + 1 < N; ++i)
        mass += 0.5 * (g.density(i) + g.density(i + 1)) * (k(i + 1) - k(i));
    for (Eigen::Index i = 0; i < N; ++i) {
        const double w = (i == 0       ? 0.5 * (k(1) - k(0))
                          : i == N - 1 ? 0.5 * (k(N - 1) - k(N - 2))
                                       : 0.5 * (k(i + 1) - k(i - 1)));
        tot += std::abs(g.density(i)) * w;
        if (g.density(i) < -1e-12) {
            ++g.negative_cells;
            neg += -g.density(i) * w;
        }
    }
    g.mass = mass;
    g.negative_mass_fraction = tot > 0.0 ? neg / tot : 0.0;

    const ArbitrageDiagnostics d = check_call_surface(s);
    if (d.monotonicity_violations > 0)
        g.warnings.push_back("surface not non-increasing in strike at " +
                             std::to_string(d.monotonicity_violations) + " point(s); worst " +
                             std::to_string(d.worst_monotonicity));
    if (d.convexity_violations > 0)
        g.warnings.push_back("surface not convex in strike at " +
                             std::to_string(d.convexity_violations) + " point(s); worst " +
                             std::to_string(d.worst_convexity));
    if (g.negative_cells > 0)
        g.warnings.push_back(std::to_string(g.negative_cells) +
                             " negative density cell(s); no smoothing applied");
    return g;
}

namespace {

double interp_price(const Eigen::VectorXd& k, const Eigen::VectorXd& c, double x) {
    require(x >= k(0) && x <= k(k.size() - 1), "spread strike outside the tabulated grid");
    const Eigen::Index j =
        std::min<Eigen::Index>(k.size() - 2, std::upper_bound(k.data(), k.data() + k.size(), x) -
                                                 k.data() - 1);
    const Eigen::Index i = std::max<Eigen::Index>(0, j);
    const double t = (x - k(i)) / (k(i + 1) - k(i));
    return c(i) + t * (c(i + 1) - c(i));
}

double local_spacing(const Eigen::VectorXd& k, double x) {
    const Eigen::Index j = std::min<Eigen::Index>(
        k.size() - 2,
        std::max<Eigen::Index>(0, std::upper_bound(k.data(), k.data() + k.size(), x) - k.data() - 1));
    return k(j + 1) - k(j);
}

}  // namespace

DigitalEstimate digital_from_call_spread(const CallSurface& s, double strike,
                                         const std::vector<double>& dk_sequence) {
    require(s.n == 1 && s.kind == SurfaceKind::call_1d, "digital recovery needs a 1-D call surface");
    require(!dk_sequence.empty(), "empty spread-width sequence");
    const Eigen::VectorXd& k = s.strikes[0];
    const Eigen::VectorXd& c = s.values;

    DigitalEstimate out;
    out.steps = dk_sequence;
    std::sort(out.steps.begin(), out.steps.end(), std::greater<double>());
    for (double dk : out.steps) {
        require(dk > 0.0, "spread widths must be positive");
        const double est = (interp_price(k, c, strike - dk) - interp_price(k, c, strike)) / dk;
        out.estimates.push_back(est);
        if (dk < local_spacing(k, strike - dk) - 1e-14)
            out.warnings.push_back("spread width " + std::to_string(dk) +
                                   " below the local strike spacing; estimate limited by "
                                   "linear interpolation until the grid is refined");
    }

    double value = out.estimates.back();
    if (out.estimates.size() >= 2) {
        // The backward spread has an O(dK) bias for smooth surfaces; one
        // Richardson level on the two smallest widths removes it.
        const size_t last = out.estimates.size() - 1;
        const double r = out.steps[last] / out.steps[last - 1];
        value = (out.estimates[last] - r * out.estimates[last - 1]) / (1.0 - r);
    }
    out.probability = std::min(1.0, std::max(0.0, value));
    return out;
}

namespace {

// First-derivative central difference along one axis of a flattened tensor,
// supporting non-uniform grids. Boundary entries are left untouched; callers
// track the valid margin.
void axis_first_derivative(const std::vector<Eigen::VectorXd>& grids, int axis,
                           const Eigen::VectorXd& in, Eigen::VectorXd& out) {
    const int n = (int)grids.size();
    std::vector<Eigen::Index> dims(n);
    Eigen::Index total = 1;
    for (int i = 0; i < n; ++i) {
        dims[i] = grids[i].size();
        total *= dims[i];
    }
    Eigen::Index stride = 1;
    for (int i = axis + 1; i < n; ++i) stride *= dims[i];
    out.setZero(total);
    const Eigen::VectorXd& g = grids[axis];
    for (Eigen::Index flat = 0; flat < total; ++flat) {
        const Eigen::Index pos = (flat / stride) % dims[axis];
        if (pos == 0 || pos == dims[axis] - 1) continue;
        const double hm = g(pos) - g(pos - 1);
        const double hp = g(pos + 1) - g(pos);
        const double fm = in(flat - stride), f0 = in(flat), fp = in(flat + stride);
        out(flat) = (fp * hm * hm - fm * hp * hp + f0 * (hp * hp - hm * hm)) /
                    (hm * hp * (hm + hp));
    }
}

}  // namespace

DensityGrid joint_density_nd(const CallSurface& s) {
    require(s.kind == SurfaceKind::multi_lookback, "joint density recovery needs a best-of-call surface");
    require(s.n == 2 || s.n == 3, "joint density recovery supports 2 or 3 assets");
    const int n = s.n;
    for (const auto& g : s.strikes)
        require(g.size() >= 6, "each strike axis needs at least 6 points for the interior stencil");

    // (sum_i d/dk_i) V, then one mixed derivative per axis.
    Eigen::VectorXd sum_first = Eigen::VectorXd::Zero(s.values.size());
    Eigen::VectorXd tmp;
    for (int axis = 0; axis < n; ++axis) {
        axis_first_derivative(s.strikes, axis, s.values, tmp);
        sum_first += tmp;
    }
    Eigen::VectorXd cur = sum_first;
    for (int axis = 0; axis < n; ++axis) {
        axis_first_derivative(s.strikes, axis, cur, tmp);
        cur.swap(tmp);
    }

    // Two differencing passes per axis: margin 2 on each side.
    DensityGrid g;
    std::vector<Eigen::Index> dims(n), inner(n);
    for (int i = 0; i < n; ++i) {
        dims[i] = s.strikes[i].size();
        inner[i] = dims[i] - 4;
        g.coords.push_back(s.strikes[i].segment(2, inner[i]));
    }
    Eigen::Index total_inner = 1;
    for (int i = 0; i < n; ++i) total_inner *= inner[i];
    g.density.resize(total_inner);

    std::vector<int> idx(n, 0);
    double neg = 0.0, tot = 0.0;
    for (Eigen::Index flat = 0; flat < total_inner; ++flat) {
        Eigen::Index src = 0, rem = flat;
        double cellw = 1.0;
        for (int i = n - 1; i >= 0; --i) {
            idx[i] = (int)(rem % inner[i]) + 2;
            rem /= inner[i];
        }
        for (int i = 0; i < n; ++i) {
            src = src * dims[i] + idx[i];
            const Eigen::VectorXd& ax = s.strikes[i];
            const Eigen::Index p = idx[i];
            // Trapezoid weight of the interior sub-grid.
            const double w = (p == 2             ? 0.5 * (ax(3) - ax(2))
                              : p == dims[i] - 3 ? 0.5 * (ax(p) - ax(p - 1))
                                                 : 0.5 * (ax(p + 1) - ax(p - 1)));
            cellw *= w;
        }
        const double d = cur(src);
        g.density(flat) = d;
        g.mass += d * cellw;
        tot += std::abs(d) * cellw;
        if (d < -1e-12) {
            ++g.negative_cells;
            neg += -d * cellw;
        }
    }
    g.negative_mass_fraction = tot > 0.0 ? neg / tot : 0.0;
    if (g.negative_mass_fraction > 0.05)
        g.warnings.push_back(
            "negative mass fraction " + std::to_string(g.negative_mass_fraction) +
            " exceeds 5%: differencing is amplifying surface noise; refine or pre-smooth the "
            "input surface externally (nothing is smoothed here)");
    return g;
}

MCResult pyramid_price(const PricingMeasure& m, const Eigen::VectorXd& k_vector, double k,
                       const MCSpec& mc, const Discount& disc) {
    require(k_vector.size() == m.dim(), "layered basket strike vector size mismatch");
    require(k >= 0.0 && k_vector.minCoeff() >= 0.0, "strikes must be non-negative");
    auto payoff = [&](const Eigen::VectorXd& x) {
        double acc = 0.0;
        for (Eigen::Index i = 0; i < x.size(); ++i) acc += pos(x(i) - k_vector(i));
        return pos(acc - k);
    };
    return mc_price_terminal(m, payoff, mc, disc);
}

RectangleRecovery rectangle_prob_recovery(
    const DiscreteMeasure& dm, const std::vector<std::function<double(const Eigen::VectorXd&)>>& fs,
    const Eigen::VectorXd& m_vector, const Eigen::VectorXd& k_vector, double eps) {
    const int n = (int)fs.size();
    require(n >= 1, "rectangle recovery needs at least one payoff function");
    require(m_vector.size() == n && k_vector.size() == n, "rectangle bound arity mismatch");
    require(eps > 0.0, "eps must be positive");
    for (int i = 0; i < n; ++i)
        require(m_vector(i) < k_vector(i), "rectangle bounds must satisfy M_i < K_i");
    const Eigen::Index atoms = dm.weights.size();

    // Values of each f_i on the atoms, and the smallest gap between distinct
    // values (the exactness threshold for eps).
    Eigen::MatrixXd fv(atoms, n);
    double min_gap = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        std::vector<double> vals(atoms);
        for (Eigen::Index a = 0; a < atoms; ++a) {
            fv(a, i) = fs[i](dm.atoms.row(a).transpose());
            vals[a] = fv(a, i);
        }
        std::sort(vals.begin(), vals.end());
        for (Eigen::Index a = 0; a + 1 < atoms; ++a) {
            const double gap = vals[a + 1] - vals[a];
            if (gap > 1e-13 && gap < min_gap) min_gap = gap;
        }
    }

    RectangleRecovery out;
    out.min_gap = std::isfinite(min_gap) ? min_gap : 0.0;
    out.exact = std::isfinite(min_gap) ? (eps < 0.5 * min_gap) : true;
    if (!out.exact)
        out.warnings.push_back("eps " + std::to_string(eps) + " is not below half the minimum "
                               "value gap " + std::to_string(out.min_gap) +
                               "; the recovered probability may smear across atoms");
    // The spreads ramp on (c - eps, c); any payoff value inside such a window
    // is weighted fractionally, so the recovery is only exact when the
    // rectangle corners keep those windows value-free (corners on the value
    // grid always do).
    for (int i = 0; i < n && out.exact; ++i)
        for (Eigen::Index a = 0; a < atoms && out.exact; ++a)
            for (double corner : {m_vector(i), k_vector(i)})
                if (fv(a, i) > corner - eps && fv(a, i) < corner) {
                    out.exact = false;
                    out.warnings.push_back(
                        "a payoff value falls inside the ramp window (corner-eps, corner) at "
                        "corner " + std::to_string(corner) + "; result is a smeared average");
                }

    // E prod_i (f_i - c_i)^+ from atoms and weights only: the single
    // primitive the recovery is allowed to use.
    auto product_call = [&](const Eigen::VectorXd& c) {
        double acc = 0.0;
        for (Eigen::Index a = 0; a < atoms; ++a) {
            double p = dm.weights(a);
            for (int i = 0; i < n; ++i) p *= pos(fv(a, i) - c(i));
            acc += p;
        }
        return acc;
    };

    // Expand prod_i [(f-M+e)^+ - (f-M)^+ - (f-K+e)^+ + (f-K)^+] / eps^n into
    // 4^n signed product-call expectations.
    double total = 0.0;
    Eigen::VectorXd c(n);
    std::vector<int> pick(n, 0);
    const Eigen::Index combos = (Eigen::Index)std::llround(std::pow(4.0, n));
    for (Eigen::Index code = 0; code < combos; ++code) {
        Eigen::Index rem = code;
        double sign = 1.0;
        for (int i = n - 1; i >= 0; --i) {
            pick[i] = (int)(rem % 4);
            rem /= 4;
        }
        for (int i = 0; i < n; ++i) {
            switch (pick[i]) {
                case 0: c(i) = m_vector(i) - eps; break;             // +
                case 1: c(i) = m_vector(i); sign = -sign; break;     // -
                case 2: c(i) = k_vector(i) - eps; sign = -sign; break;  // -
                case 3: c(i) = k_vector(i); break;                   // +
            }
        }
        total += sign * product_call(c);
    }
    total /= std::pow(eps, n);
    out.probability = total;
    return out;
}

}  // namespace blhedge
