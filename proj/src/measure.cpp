#include "blhedge/measure.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "blhedge/gaussian.hpp"
#include "blhedge/parallel.hpp"
#include "blhedge/rng.hpp"

namespace blhedge {

namespace {

void require(bool cond, const char* msg) {
    if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

Eigen::MatrixXd correlation_factor(const Eigen::MatrixXd& corr, bool* eigen_fallback) {
    const int n = (int)corr.rows();
    require(corr.cols() == n, "correlation matrix must be square");
    for (int i = 0; i < n; ++i) {
        require(std::abs(corr(i, i) - 1.0) < 1e-12, "correlation diagonal must be 1");
        for (int j = 0; j < n; ++j) {
            require(std::abs(corr(i, j) - corr(j, i)) < 1e-12, "correlation not symmetric");
            require(std::abs(corr(i, j)) <= 1.0 + 1e-12, "correlation entry out of range");
        }
    }
    Eigen::LLT<Eigen::MatrixXd> llt(corr);
    if (llt.info() == Eigen::Success) {
        if (eigen_fallback) *eigen_fallback = false;
        return llt.matrixL();
    }
    // Semidefinite (or numerically indefinite) correlation: clip negative
    // eigenvalues at zero and keep a square factor.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(corr);
    require(es.info() == Eigen::Success, "correlation eigendecomposition failed");
    Eigen::VectorXd ev = es.eigenvalues();
    require(ev.minCoeff() > -1e-8, "correlation matrix is not positive semidefinite");
    for (int i = 0; i < n; ++i) ev(i) = std::max(0.0, ev(i));
    if (eigen_fallback) *eigen_fallback = true;
    return es.eigenvectors() * ev.cwiseSqrt().asDiagonal();
}

LognormalMeasure make_lognormal(const Eigen::VectorXd& spot, const Eigen::VectorXd& vol,
                                double maturity, const Eigen::MatrixXd& corr) {
    const int n = (int)spot.size();
    require(n >= 1, "lognormal: empty spot vector");
    require(vol.size() == n, "lognormal: vol size mismatch");
    require(corr.rows() == n && corr.cols() == n, "lognormal: correlation size mismatch");
    require(maturity > 0.0, "lognormal: maturity must be positive");
    for (int i = 0; i < n; ++i) {
        require(spot(i) > 0.0, "lognormal: spot must be positive");
        require(vol(i) > 0.0, "lognormal: vol must be positive");
        require(std::abs(corr(i, i) - 1.0) < 1e-12, "lognormal: correlation diagonal must be 1");
        for (int j = 0; j < n; ++j) {
            require(std::abs(corr(i, j) - corr(j, i)) < 1e-12, "lognormal: correlation not symmetric");
            require(std::abs(corr(i, j)) <= 1.0 + 1e-12, "lognormal: correlation entry out of range");
        }
    }
    LognormalMeasure m;
    m.spot = spot;
    m.vol = vol;
    m.maturity = maturity;
    m.corr = corr;
    m.factor = correlation_factor(corr, &m.eigen_fallback);
    return m;
}

DiscreteMeasure make_discrete(const Eigen::MatrixXd& atoms, const Eigen::VectorXd& weights) {
    require(atoms.rows() == weights.size(), "discrete: atom/weight count mismatch");
    require(atoms.rows() >= 1, "discrete: empty support");
    require(atoms.minCoeff() >= 0.0, "discrete: atoms must lie in the nonnegative orthant");
    require(weights.minCoeff() >= 0.0, "discrete: weights must be nonnegative");
    const double total = weights.sum();
    require(std::abs(total - 1.0) < 1e-9, "discrete: weights must sum to 1");
    DiscreteMeasure m;
    m.atoms = atoms;
    m.weights = weights / total;
    return m;
}

EmpiricalMeasure make_empirical(const Eigen::MatrixXd& samples) {
    require(samples.rows() >= 1, "empirical: no samples");
    require(samples.minCoeff() >= 0.0, "empirical: samples must lie in the nonnegative orthant");
    EmpiricalMeasure m;
    m.samples = samples;
    m.sorted_cols.resize(samples.cols());
    for (int j = 0; j < samples.cols(); ++j) {
        Eigen::VectorXd c = samples.col(j);
        std::sort(c.data(), c.data() + c.size());
        m.sorted_cols[j] = std::move(c);
    }
    return m;
}

int PricingMeasure::dim() const {
    if (is_lognormal()) return (int)lognormal().spot.size();
    if (is_discrete()) return (int)discrete().atoms.cols();
    return (int)empirical().samples.cols();
}

namespace {

double lognormal_z(const LognormalMeasure& m, int coord, double y) {
    // Threshold y > 0 mapped to the standard normal scale.
    const double sv = m.vol(coord) * std::sqrt(m.maturity);
    return (std::log(y / m.spot(coord)) + 0.5 * sv * sv) / sv;
}

double tail_discrete_like(const Eigen::MatrixXd& pts, const Eigen::VectorXd& w,
                          const TailEvent& event) {
    double acc = 0.0;
    const int n = (int)pts.cols();
    for (Eigen::Index r = 0; r < pts.rows(); ++r) {
        bool in = true;
        for (int j = 0; j < n && in; ++j) {
            const double x = pts(r, j), t = event.thresholds(j);
            in = (event.strict[j] == Strictness::GT) ? (x > t) : (x >= t);
        }
        if (in) acc += w(r);
    }
    return acc;
}

}  // namespace

double joint_tail_prob(const PricingMeasure& m, const TailEvent& event) {
    const int n = m.dim();
    if (event.dim() != n) throw std::invalid_argument("joint_tail_prob: event dimension mismatch");
    if (m.is_lognormal()) {
        const auto& ln = m.lognormal();
        std::vector<int> active;
        for (int i = 0; i < n; ++i)
            if (event.thresholds(i) > 0.0) active.push_back(i);
        if (active.empty()) return 1.0;
        Eigen::VectorXd a((int)active.size());
        Eigen::MatrixXd sub((int)active.size(), (int)active.size());
        for (size_t i = 0; i < active.size(); ++i) {
            a((int)i) = lognormal_z(ln, active[i], event.thresholds(active[i]));
            for (size_t j = 0; j < active.size(); ++j) sub((int)i, (int)j) = ln.corr(active[i], active[j]);
        }
        return orthant_mvn(a, sub);
    }
    if (m.is_discrete()) return tail_discrete_like(m.discrete().atoms, m.discrete().weights, event);
    const auto& em = m.empirical();
    const Eigen::Index rows = em.samples.rows();
    if (n == 1) return marginal_tail(m, 0, event.thresholds(0), event.strict[0]);
    Eigen::VectorXd w = Eigen::VectorXd::Constant(rows, 1.0 / (double)rows);
    return tail_discrete_like(em.samples, w, event);
}

double marginal_tail(const PricingMeasure& m, int coord, double a, Strictness s) {
    if (m.is_lognormal()) {
        if (a <= 0.0) return 1.0;
        return norm_tail(lognormal_z(m.lognormal(), coord, a));
    }
    if (m.is_empirical()) {
        const Eigen::VectorXd& col = m.empirical().sorted_cols[coord];
        const double* begin = col.data();
        const double* end = col.data() + col.size();
        const double* it = (s == Strictness::GT) ? std::upper_bound(begin, end, a)
                                                 : std::lower_bound(begin, end, a);
        return (double)(end - it) / (double)col.size();
    }
    TailEvent e = TailEvent::unconstrained(m.dim());
    e.set(coord, a, s);
    return joint_tail_prob(m, e);
}

Eigen::MatrixXd sample_terminal(const PricingMeasure& m, std::int64_t count, std::uint64_t seed,
                                std::int64_t chunk) {
    const int n = m.dim();
    require(chunk >= 1, "sample_terminal: chunk must be positive");
    Eigen::MatrixXd out(count, n);
    const std::int64_t chunks = (count + chunk - 1) / chunk;
    if (m.is_lognormal()) {
        const auto& ln = m.lognormal();
        Eigen::VectorXd drift(n), sig(n);
        for (int i = 0; i < n; ++i) {
            const double sv = ln.vol(i) * std::sqrt(ln.maturity);
            drift(i) = -0.5 * sv * sv;
            sig(i) = sv;
        }
        parallel_for(chunks, [&](std::int64_t c) {
            RngStream stream{seed, (std::uint64_t)c};
            const std::int64_t lo = c * chunk, hi = std::min(count, lo + chunk);
            Eigen::VectorXd z(n);
            for (std::int64_t r = lo; r < hi; ++r) {
                const std::int64_t local = r - lo;
                for (int j = 0; j < n; ++j) z(j) = stream.normal(draw_index(local, j));
                const Eigen::VectorXd w = ln.factor * z;
                for (int j = 0; j < n; ++j)
                    out(r, j) = ln.spot(j) * std::exp(drift(j) + sig(j) * w(j));
            }
        });
        return out;
    }
    if (m.is_discrete()) {
        const auto& dm = m.discrete();
        Eigen::VectorXd cum(dm.weights.size());
        double acc = 0.0;
        for (Eigen::Index i = 0; i < dm.weights.size(); ++i) {
            acc += dm.weights(i);
            cum(i) = acc;
        }
        parallel_for(chunks, [&](std::int64_t c) {
            RngStream stream{seed, (std::uint64_t)c};
            const std::int64_t lo = c * chunk, hi = std::min(count, lo + chunk);
            for (std::int64_t r = lo; r < hi; ++r) {
                const double u = stream.uniform(draw_index(r - lo, 0));
                const double* it = std::lower_bound(cum.data(), cum.data() + cum.size(), u);
                Eigen::Index idx = std::min<Eigen::Index>(it - cum.data(), cum.size() - 1);
                out.row(r) = dm.atoms.row(idx);
            }
        });
        return out;
    }
    const auto& em = m.empirical();
    const Eigen::Index rows = em.samples.rows();
    parallel_for(chunks, [&](std::int64_t c) {
        RngStream stream{seed, (std::uint64_t)c};
        const std::int64_t lo = c * chunk, hi = std::min(count, lo + chunk);
        for (std::int64_t r = lo; r < hi; ++r) {
            const double u = stream.uniform(draw_index(r - lo, 0));
            Eigen::Index idx = std::min<Eigen::Index>((Eigen::Index)(u * rows), rows - 1);
            out.row(r) = em.samples.row(idx);
        }
    });
    return out;
}

double marginal_expectation(const PricingMeasure& m, int coord) {
    if (m.is_lognormal()) return m.lognormal().spot(coord);
    if (m.is_discrete()) return m.discrete().weights.dot(m.discrete().atoms.col(coord));
    return m.empirical().samples.col(coord).mean();
}

double marginal_pdf(const PricingMeasure& m, int coord, double x) {
    if (!m.is_lognormal())
        throw std::invalid_argument("marginal_pdf: density defined for the lognormal family only");
    if (x <= 0.0) return 0.0;
    const auto& ln = m.lognormal();
    const double sv = ln.vol(coord) * std::sqrt(ln.maturity);
    return norm_pdf(lognormal_z(ln, coord, x)) / (x * sv);
}

double truncation_bound(const PricingMeasure& m, int coord) {
    if (m.is_lognormal()) {
        const auto& ln = m.lognormal();
        const double sv = ln.vol(coord) * std::sqrt(ln.maturity);
        return ln.spot(coord) * std::exp(-0.5 * sv * sv + 10.0 * sv);
    }
    if (m.is_discrete()) return m.discrete().atoms.col(coord).maxCoeff() + 1.0;
    return m.empirical().samples.col(coord).maxCoeff() + 1.0;
}

std::vector<double> marginal_atoms(const PricingMeasure& m, int coord) {
    std::vector<double> pts;
    if (m.is_lognormal()) return pts;
    if (m.is_discrete()) {
        const auto& col = m.discrete().atoms.col(coord);
        pts.assign(col.data(), col.data() + col.size());
    } else {
        const auto& col = m.empirical().sorted_cols[coord];
        const Eigen::Index cap = 4096;
        if (col.size() <= cap) {
            pts.assign(col.data(), col.data() + col.size());
        } else {
            const Eigen::Index stride = (col.size() + cap - 1) / cap;
            for (Eigen::Index i = 0; i < col.size(); i += stride) pts.push_back(col(i));
            pts.push_back(col(col.size() - 1));
        }
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
}

}  // namespace blhedge
