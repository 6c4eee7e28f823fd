#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

#include "blhedge/hedge.hpp"
#include "blhedge/spd.hpp"

namespace blhedge {

// Raised for unreadable files, malformed CSV, and incomplete tensor grids.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// Shortest round-trip decimal representation (printf %.17g).
std::string format_g17(double x);

// Stderr logging gated by the BLHEDGE_LOG environment variable
// (error < warn < info < debug; default warn).
enum class LogLevel { error = 0, warn = 1, info = 2, debug = 3 };
LogLevel log_level();
void log_line(LogLevel level, const std::string& msg);

// Call surfaces. 1-D files carry a `strike,price` header; tensor files carry
// `k1,...,kn,price`. Tensor rows may appear in any order but must cover the
// full grid; missing lattice points are named in the error.
CallSurface read_surface_csv(const std::string& path, SurfaceKind kind);
void write_surface_csv(const std::string& path, const CallSurface& s);

// Density grids: `k1,...,kn,density` rows in flattened grid order.
void write_density_csv(const std::string& path, const DensityGrid& g);

// Empirical sample files: header `x1,...,xn`, one sample per row.
Eigen::MatrixXd read_empirical_csv(const std::string& path);

// Portfolios: `instrument,strike,strictness,weight` with instrument in
// {bond, call, digital, digital_strip}; strictness is `ge`/`gt` for digitals
// and empty otherwise.
void write_portfolio_csv(const std::string& path, const HedgePortfolio& hp);

}  // namespace blhedge
