#include "blhedge/mc.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "blhedge/parallel.hpp"
#include "blhedge/quadrature.hpp"
#include "blhedge/rng.hpp"

namespace blhedge {

namespace {

void require(bool cond, const char* msg) {
    if (!cond) throw std::invalid_argument(msg);
}

void validate(const MCSpec& spec) {
    require(spec.paths >= 1, "mc: paths must be >= 1");
    require(spec.steps >= 1, "mc: steps must be >= 1");
    require(spec.chunk >= 2, "mc: chunk must be >= 2");
}

}  // namespace

MCResult summarize_samples(const Eigen::VectorXd& values, bool antithetic) {
    MCResult res;
    res.paths_used = values.size();
    std::vector<double> units;
    if (antithetic) {
        units.resize(values.size() / 2);
        for (size_t k = 0; k < units.size(); ++k)
            units[k] = 0.5 * (values(2 * k) + values(2 * k + 1));
    } else {
        units.assign(values.data(), values.data() + values.size());
    }
    const std::int64_t n = (std::int64_t)units.size();
    const double mean = pairwise_sum(units) / (double)n;
    std::vector<double> sq(units.size());
    for (size_t k = 0; k < units.size(); ++k) sq[k] = (units[k] - mean) * (units[k] - mean);
    const double var = n > 1 ? pairwise_sum(sq) / (double)(n - 1) : 0.0;
    res.estimate = mean;
    res.standard_error = std::sqrt(std::max(0.0, var) / (double)n);
    return res;
}

Eigen::MatrixXd terminal_samples(const PricingMeasure& m, const MCSpec& spec) {
    validate(spec);
    if (!spec.antithetic) return sample_terminal(m, spec.paths, spec.seed, spec.chunk);
    require(spec.paths % 2 == 0, "mc: antithetic sampling needs an even path count");

    const int n = m.dim();
    const std::int64_t logical = spec.paths / 2;
    const std::int64_t chunk = spec.chunk;
    const std::int64_t chunks = (logical + chunk - 1) / chunk;
    Eigen::MatrixXd out(spec.paths, n);

    if (m.is_lognormal()) {
        const auto& ln = m.lognormal();
        Eigen::VectorXd drift(n), sig(n);
        for (int i = 0; i < n; ++i) {
            const double sv = ln.vol(i) * std::sqrt(ln.maturity);
            drift(i) = -0.5 * sv * sv;
            sig(i) = sv;
        }
        parallel_for(chunks, [&](std::int64_t c) {
            RngStream stream{spec.seed, (std::uint64_t)c};
            const std::int64_t lo = c * chunk, hi = std::min(logical, lo + chunk);
            Eigen::VectorXd z(n), w(n);
            for (std::int64_t k = lo; k < hi; ++k) {
                const std::int64_t local = k - lo;
                for (int j = 0; j < n; ++j) z(j) = stream.normal(draw_index(local, j));
                w = ln.factor * z;
                for (int j = 0; j < n; ++j) {
                    out(2 * k, j) = ln.spot(j) * std::exp(drift(j) + sig(j) * w(j));
                    out(2 * k + 1, j) = ln.spot(j) * std::exp(drift(j) - sig(j) * w(j));
                }
            }
        });
        return out;
    }

    // Atomic laws: mirror the inverse-transform uniform, u -> 1-u.
    const bool discrete = m.is_discrete();
    Eigen::VectorXd cum;
    if (discrete) {
        const auto& dm = m.discrete();
        cum.resize(dm.weights.size());
        double acc = 0.0;
        for (Eigen::Index i = 0; i < dm.weights.size(); ++i) {
            acc += dm.weights(i);
            cum(i) = acc;
        }
    }
    parallel_for(chunks, [&](std::int64_t c) {
        RngStream stream{spec.seed, (std::uint64_t)c};
        const std::int64_t lo = c * chunk, hi = std::min(logical, lo + chunk);
        for (std::int64_t k = lo; k < hi; ++k) {
            const double u = stream.uniform(draw_index(k - lo, 0));
            const double us[2] = {u, 1.0 - u};
            for (int a = 0; a < 2; ++a) {
                if (discrete) {
                    const double* it = std::lower_bound(cum.data(), cum.data() + cum.size(), us[a]);
                    Eigen::Index idx = std::min<Eigen::Index>(it - cum.data(), cum.size() - 1);
                    out.row(2 * k + a) = m.discrete().atoms.row(idx);
                } else {
                    const Eigen::Index rows = m.empirical().samples.rows();
                    Eigen::Index idx = std::min<Eigen::Index>((Eigen::Index)(us[a] * rows), rows - 1);
                    out.row(2 * k + a) = m.empirical().samples.row(idx);
                }
            }
        }
    });
    return out;
}

MCResult mc_price_terminal(const PricingMeasure& m,
                           const std::function<double(const Eigen::VectorXd&)>& payoff,
                           const MCSpec& spec, const Discount& disc) {
    const auto start = std::chrono::steady_clock::now();
    const Eigen::MatrixXd x = terminal_samples(m, spec);
    Eigen::VectorXd values(x.rows());
    std::int64_t bad_row = -1;
    const std::int64_t row_chunks = (x.rows() + spec.chunk - 1) / spec.chunk;
    std::vector<std::int64_t> bad(row_chunks, -1);
    parallel_for(row_chunks, [&](std::int64_t c) {
        const std::int64_t lo = c * spec.chunk, hi = std::min<std::int64_t>(x.rows(), lo + spec.chunk);
        for (std::int64_t r = lo; r < hi; ++r) {
            const double v = payoff(x.row(r));
            if (!std::isfinite(v) && bad[c] < 0) bad[c] = r;
            values(r) = v;
        }
    });
    for (auto b : bad)
        if (b >= 0) {
            bad_row = b;
            break;
        }
    if (bad_row >= 0) {
        std::ostringstream os;
        os << "mc: payoff is non-finite at sample (";
        for (int j = 0; j < x.cols(); ++j) os << (j ? ", " : "") << x(bad_row, j);
        os << ")";
        throw std::runtime_error(os.str());
    }
    MCResult res = summarize_samples(values, spec.antithetic);
    res.estimate *= disc.factor();
    res.standard_error *= disc.factor();
    res.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return res;
}

DerivativeEstimate crn_derivative(const std::function<Eigen::VectorXd(double)>& sampler,
                                  double param, const std::vector<double>& step_sequence,
                                  bool central) {
    require(!step_sequence.empty(), "crn_derivative: empty step sequence");
    for (size_t i = 1; i < step_sequence.size(); ++i)
        require(step_sequence[i] < step_sequence[i - 1] && step_sequence[i] > 0.0,
                "crn_derivative: steps must be positive and decreasing");

    DerivativeEstimate out;
    out.steps = step_sequence;
    const Eigen::VectorXd base = central ? Eigen::VectorXd() : sampler(param);
    Eigen::VectorXd prev_diff, last_diff;
    for (double h : step_sequence) {
        Eigen::VectorXd diff;
        if (central) {
            diff = (sampler(param + h) - sampler(param - h)) / (2.0 * h);
        } else {
            diff = (sampler(param + h) - base) / h;
        }
        out.step_values.push_back(diff.mean());
        prev_diff.swap(last_diff);
        last_diff.swap(diff);
    }

    const int p = central ? 2 : 1;  // leading error order in the step size
    if (out.step_values.size() == 1) {
        const MCResult r = summarize_samples(last_diff, false);
        out.value = r.estimate;
        out.standard_error = r.standard_error;
        return out;
    }
    const size_t m = out.step_values.size();
    const double ratio = step_sequence[m - 2] / step_sequence[m - 1];
    const double denom = std::pow(ratio, p) - 1.0;
    Eigen::VectorXd extrap_samples =
        last_diff + (last_diff - prev_diff) / denom;
    const MCResult r = summarize_samples(extrap_samples, false);
    out.value = r.estimate;
    out.standard_error = r.standard_error;

    // Convergence should look monotone: successive estimates approach the
    // extrapolated value with non-increasing gaps (3 SE slack).
    double prev_gap = -1.0;
    for (size_t i = 0; i < m; ++i) {
        const double gap = std::abs(out.step_values[i] - out.value);
        if (i > 0 && gap > prev_gap + 3.0 * r.standard_error) out.inconclusive = true;
        prev_gap = gap;
    }
    return out;
}

}  // namespace blhedge
