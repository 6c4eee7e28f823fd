#include "blhedge/gaussian.hpp"

#include <cmath>
#include <stdexcept>

#include "blhedge/quadrature.hpp"

namespace blhedge {

double norm_pdf(double x) { return 0.3989422804014326779 * std::exp(-0.5 * x * x); }

double norm_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

double norm_tail(double x) { return 0.5 * std::erfc(x * M_SQRT1_2); }

// Wichura's AS241 rational approximations (double precision branch).
double norm_inv(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        if (p == 0.0) return -INFINITY;
        if (p == 1.0) return INFINITY;
        throw std::invalid_argument("norm_inv: p outside [0,1]");
    }
    const double q = p - 0.5;
    if (std::abs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        const double num =
            (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                  6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
                1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
              1.3314166789178437745e2) * r + 3.3871328727963666080e0);
        const double den =
            (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                  3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
                5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
              4.2313330701600911252e1) * r + 1.0);
        return q * num / den;
    }
    double r = (q < 0.0) ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double val;
    if (r <= 5.0) {
        r -= 1.6;
        const double num =
            (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                  2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
                3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
              4.63033784615654529590e0) * r + 1.42343711074968357734e0);
        const double den =
            (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                  1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
              2.05319162663775882187e0) * r + 1.0);
        val = num / den;
    } else {
        r -= 5.0;
        const double num =
            (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                  1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
              5.46378491116411436990e0) * r + 6.65790464350110377720e0);
        const double den =
            (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                  1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
              5.99832206555887937690e-1) * r + 1.0);
        val = num / den;
    }
    return (q < 0.0) ? -val : val;
}

double orthant2(double a, double b, double rho) {
    if (std::isinf(a) && a < 0 && std::isinf(b) && b < 0) return 1.0;
    if (std::isinf(a)) return (a < 0) ? norm_tail(b) : 0.0;
    if (std::isinf(b)) return (b < 0) ? norm_tail(a) : 0.0;
    rho = std::min(1.0, std::max(-1.0, rho));
    if (rho > 1.0 - 1e-13) return norm_tail(std::max(a, b));
    if (rho < -1.0 + 1e-13) return std::max(0.0, 1.0 - norm_cdf(a) - norm_cdf(b));
    const double base = norm_tail(a) * norm_tail(b);
    if (rho == 0.0) return base;
    // Single-integral reduction over the correlation parameter.
    auto integrand = [a, b](double r) {
        const double om = 1.0 - r * r;
        return std::exp(-(a * a - 2.0 * r * a * b + b * b) / (2.0 * om)) / std::sqrt(om);
    };
    const double lo = std::min(0.0, rho), hi = std::max(0.0, rho);
    double integral = integrate_adaptive(integrand, lo, hi, 1e-13);
    if (rho < 0.0) integral = -integral;
    double p = base + integral / (2.0 * M_PI);
    return std::min(1.0, std::max(0.0, p));
}

double orthant3(const Eigen::Vector3d& a, const Eigen::Matrix3d& corr) {
    const double r12 = corr(0, 1), r13 = corr(0, 2), r23 = corr(1, 2);
    // Degenerate pairings collapse to a 2-D problem.
    if (std::abs(r12) > 1.0 - 1e-12) {
        const double a2 = (r12 > 0) ? std::max(a(0), a(1)) : a(0);
        if (r12 < 0 && a(0) > -a(1)) return 0.0;  // Z2 = -Z1 cannot satisfy both unless band
        if (r12 < 0) {
            // a(0) < Z1 < -a(1): integrate the band against coordinate 3.
            auto f = [&](double z) {
                const double s3 = std::sqrt(std::max(1e-300, 1.0 - r13 * r13));
                return norm_pdf(z) * norm_tail((a(2) - r13 * z) / s3);
            };
            return integrate_adaptive(f, a(0), -a(1), 1e-12);
        }
        return orthant2(a2, a(2), r13);
    }
    if (std::abs(r13) > 1.0 - 1e-12 || std::abs(r23) > 1.0 - 1e-12) {
        // Symmetric reductions via reordering.
        Eigen::Vector3d ap(a(1), a(0), a(2));
        Eigen::Matrix3d cp;
        cp << 1, r12, r23, r12, 1, r13, r23, r13, 1;
        if (std::abs(r23) > 1.0 - 1e-12) return orthant3(ap, cp);
        Eigen::Vector3d aq(a(2), a(1), a(0));
        Eigen::Matrix3d cq;
        cq << 1, r23, r13, r23, 1, r12, r13, r12, 1;
        return orthant3(aq, cq);
    }
    const double s2 = std::sqrt(1.0 - r12 * r12);
    const double s3 = std::sqrt(1.0 - r13 * r13);
    double rc = (r23 - r12 * r13) / (s2 * s3);
    rc = std::min(1.0, std::max(-1.0, rc));
    auto f = [&](double z) {
        return norm_pdf(z) * orthant2((a(1) - r12 * z) / s2, (a(2) - r13 * z) / s3, rc);
    };
    const double lo = std::max(a(0), -40.0);
    if (lo >= 40.0) return 0.0;
    return integrate_adaptive(f, lo, 40.0, 1e-11);
}

namespace {

// Sequential-conditioning transform evaluated on a Richtmyer lattice with
// random shifts; used only for dimensions above three.
double genz_qmc(const Eigen::VectorXd& a, const Eigen::MatrixXd& corr, double* err) {
    const int n = (int)a.size();
    Eigen::MatrixXd sig = corr;
    Eigen::LLT<Eigen::MatrixXd> llt(sig);
    if (llt.info() != Eigen::Success) {
        sig.diagonal().array() += 1e-10;
        llt.compute(sig);
        if (llt.info() != Eigen::Success)
            throw std::runtime_error("orthant_mvn: correlation matrix not factorizable");
    }
    Eigen::MatrixXd L = llt.matrixL();

    static const double primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
    const int shifts = 12;
    const int points = 8192;
    std::vector<double> shift_means(shifts, 0.0);
    // Deterministic shift grid (fixed internal constants).
    for (int s = 0; s < shifts; ++s) {
        double acc = 0.0;
        std::vector<double> delta(n);
        for (int j = 0; j < n; ++j)
            delta[j] = std::fmod(0.5 * (s + 1) * std::sqrt(primes[(j + s) % 12]), 1.0);
        std::vector<double> y(n);
        for (int k = 1; k <= points; ++k) {
            double f = 1.0;
            for (int j = 0; j < n && f > 0.0; ++j) {
                double mean = 0.0;
                for (int t = 0; t < j; ++t) mean += L(j, t) * y[t];
                const double d = norm_cdf((a(j) - mean) / L(j, j));
                const double e = 1.0;
                const double w = e - d;
                f *= w;
                if (j + 1 < n) {
                    double u = std::fmod(k * std::sqrt(primes[j % 12]) + delta[j], 1.0);
                    u = std::min(1.0 - 1e-15, std::max(1e-15, d + u * w));
                    y[j] = norm_inv(u);
                }
            }
            acc += (f - acc) / k;
        }
        shift_means[s] = acc;
    }
    double mean = 0.0;
    for (double v : shift_means) mean += v;
    mean /= shifts;
    double var = 0.0;
    for (double v : shift_means) var += (v - mean) * (v - mean);
    var /= (shifts - 1.0);
    if (err) *err = 3.0 * std::sqrt(var / shifts);
    return std::min(1.0, std::max(0.0, mean));
}

}  // namespace

double orthant_mvn(const Eigen::VectorXd& a, const Eigen::MatrixXd& corr, double* err) {
    const int n = (int)a.size();
    if (err) *err = 0.0;
    if (n == 0) return 1.0;
    if (n == 1) return norm_tail(a(0));
    if (n == 2) return orthant2(a(0), a(1), corr(0, 1));
    if (n == 3) {
        Eigen::Vector3d a3 = a.head<3>();
        Eigen::Matrix3d c3 = corr.topLeftCorner<3, 3>();
        if (err) *err = 1e-10;
        return orthant3(a3, c3);
    }
    return genz_qmc(a, corr, err);
}

}  // namespace blhedge
