#include "blhedge/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace blhedge {

namespace {

GlRule make_rule(int order) {
    GlRule r;
    r.nodes.resize(order);
    r.weights.resize(order);
    const int half = (order + 1) / 2;
    for (int i = 0; i < half; ++i) {
        // Chebyshev-based initial guess, then Newton on P_n.
        double x = std::cos(M_PI * (i + 0.75) / (order + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= order; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            pp = order * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        r.nodes[i] = -x;
        r.nodes[order - 1 - i] = x;
        double w = 2.0 / ((1.0 - x * x) * pp * pp);
        r.weights[i] = w;
        r.weights[order - 1 - i] = w;
    }
    if (order == 1) {
        r.nodes[0] = 0.0;
        r.weights[0] = 2.0;
    }
    return r;
}

std::mutex rule_mutex;
std::map<int, GlRule> rule_cache;

}  // namespace

const GlRule& gl_rule(int order) {
    if (order < 1) throw std::invalid_argument("gl_rule: order must be >= 1");
    std::lock_guard<std::mutex> lock(rule_mutex);
    auto it = rule_cache.find(order);
    if (it == rule_cache.end()) it = rule_cache.emplace(order, make_rule(order)).first;
    return it->second;
}

double integrate_gl(const std::function<double(double)>& f, double a, double b, int order) {
    const GlRule& r = gl_rule(order);
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    double acc = 0.0;
    for (int i = 0; i < order; ++i) acc += r.weights[i] * f(c + h * r.nodes[i]);
    return acc * h;
}

namespace {

constexpr int kSegmentOrder = 7;

std::vector<double> segment_points(double a, double b, const std::vector<double>& cuts) {
    std::vector<double> seg;
    seg.push_back(a);
    for (double c : cuts)
        if (c > a && c < b) seg.push_back(c);
    seg.push_back(b);
    std::sort(seg.begin(), seg.end());
    seg.erase(std::unique(seg.begin(), seg.end(),
                          [](double x, double y) { return std::abs(x - y) < 1e-14 * (1.0 + std::abs(x)); }),
              seg.end());
    return seg;
}

// Calls `panel(lo, hi)` for every panel of the composite layout, in order.
void for_each_panel(double a, double b, const std::vector<double>& cuts, int node_budget,
                    const std::function<void(double, double)>& panel) {
    const std::vector<double> seg = segment_points(a, b, cuts);
    const double span = b - a;
    const int total_panels = std::max<int>(1, node_budget / kSegmentOrder);
    for (size_t s = 0; s + 1 < seg.size(); ++s) {
        const double lo = seg[s], hi = seg[s + 1];
        const double len = hi - lo;
        int panels = std::max<int>(1, (int)std::llround((double)total_panels * len / span));
        const double h = len / panels;
        for (int p = 0; p < panels; ++p) panel(lo + p * h, lo + (p + 1) * h);
    }
}

}  // namespace

double integrate_segmented(const std::function<double(double)>& f, double a, double b,
                           const std::vector<double>& cuts, int node_budget) {
    if (!(b > a)) return 0.0;
    double acc = 0.0;
    for_each_panel(a, b, cuts, node_budget,
                   [&](double lo, double hi) { acc += integrate_gl(f, lo, hi, kSegmentOrder); });
    return acc;
}

std::vector<PanelNode> segmented_nodes(double a, double b, const std::vector<double>& cuts,
                                       int node_budget) {
    std::vector<PanelNode> out;
    if (!(b > a)) return out;
    const GlRule& r = gl_rule(kSegmentOrder);
    for_each_panel(a, b, cuts, node_budget, [&](double lo, double hi) {
        const double c = 0.5 * (lo + hi);
        const double h = 0.5 * (hi - lo);
        for (int i = 0; i < kSegmentOrder; ++i)
            out.push_back({lo, hi, c + h * r.nodes[i], r.weights[i] * h});
    });
    return out;
}

namespace {

double adaptive_rec(const std::function<double(double)>& f, double a, double b, double whole,
                    double tol, int depth) {
    const double mid = 0.5 * (a + b);
    const double left = integrate_gl(f, a, mid, 15);
    const double right = integrate_gl(f, mid, b, 15);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= tol) return left + right + delta / 1023.0;
    return adaptive_rec(f, a, mid, left, 0.5 * tol, depth - 1) +
           adaptive_rec(f, mid, b, right, 0.5 * tol, depth - 1);
}

}  // namespace

double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double abs_tol, int max_depth) {
    if (!(b > a)) return 0.0;
    return adaptive_rec(f, a, b, integrate_gl(f, a, b, 15), abs_tol, max_depth);
}

double pairwise_sum(const std::vector<double>& values) {
    if (values.empty()) return 0.0;
    std::vector<double> buf(values);
    size_t n = buf.size();
    while (n > 1) {
        size_t half = n / 2;
        for (size_t i = 0; i < half; ++i) buf[i] = buf[2 * i] + buf[2 * i + 1];
        if (n % 2) {
            buf[half] = buf[n - 1];
            n = half + 1;
        } else {
            n = half;
        }
    }
    return buf[0];
}

}  // namespace blhedge
