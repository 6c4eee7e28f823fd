#pragma once

#include <Eigen/Dense>

namespace blhedge {

double norm_pdf(double x);
double norm_cdf(double x);
// Upper tail P(Z > x).
double norm_tail(double x);
// Inverse CDF (Wichura's AS241, double precision).
double norm_inv(double p);

// P(Z1 > a, Z2 > b) for standard bivariate normal with correlation rho.
// Absolute accuracy ~1e-12 (single-integral reduction + adaptive GL).
double orthant2(double a, double b, double rho);

// P(Z1 > a1, Z2 > a2, Z3 > a3) via conditioning on Z1; accuracy ~1e-10.
double orthant3(const Eigen::Vector3d& a, const Eigen::Matrix3d& corr);

// General upper-orthant probability P(Z_i > a_i for all i) for a standard
// normal vector with the given correlation matrix. Dimensions 1..3 use the
// deterministic quadratures above; higher dimensions fall back to a
// randomized-shift lattice rule on the sequential-conditioning transform
// (deterministic for a fixed internal seed). `err` (optional) receives an
// error estimate.
double orthant_mvn(const Eigen::VectorXd& a, const Eigen::MatrixXd& corr, double* err = nullptr);

}  // namespace blhedge
