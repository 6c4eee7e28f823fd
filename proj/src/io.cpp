#include "blhedge/io.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <vector>

namespace blhedge {

std::string format_g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

LogLevel log_level() {
    static const LogLevel level = [] {
        const char* env = std::getenv("BLHEDGE_LOG");
        if (!env) return LogLevel::warn;
        const std::string v(env);
        if (v == "error") return LogLevel::error;
        if (v == "warn") return LogLevel::warn;
        if (v == "info") return LogLevel::info;
        if (v == "debug") return LogLevel::debug;
        return LogLevel::warn;
    }();
    return level;
}

void log_line(LogLevel level, const std::string& msg) {
    if ((int)level > (int)log_level()) return;
    static std::mutex mu;
    static const char* names[] = {"error", "warn", "info", "debug"};
    std::lock_guard<std::mutex> lock(mu);
    std::cerr << "[" << names[(int)level] << "] " << msg << "\n";
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

double parse_double(const std::string& s, const std::string& path, int lineno) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0')
        throw IoError(path + ":" + std::to_string(lineno) + ": not a number: '" + s + "'");
    return v;
}

std::vector<std::vector<std::string>> read_rows(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        rows.push_back(split_line(line));
    }
    if (rows.empty()) throw IoError(path + ": empty file");
    return rows;
}

}  // namespace

CallSurface read_surface_csv(const std::string& path, SurfaceKind kind) {
    const auto rows = read_rows(path);
    const auto& header = rows[0];
    int n = 0;
    if (header.size() == 2 && header[0] == "strike" && header[1] == "price") {
        n = 1;
    } else if (header.size() >= 3 && header.back() == "price") {
        n = (int)header.size() - 1;
        for (int i = 0; i < n; ++i)
            if (header[i] != "k" + std::to_string(i + 1))
                throw IoError(path + ": expected header k1,...,k" + std::to_string(n) + ",price");
    } else {
        throw IoError(path + ": expected header 'strike,price' or 'k1,...,kn,price'");
    }

    std::map<std::vector<double>, double> table;
    std::vector<std::vector<double>> axis_values(n);
    for (size_t r = 1; r < rows.size(); ++r) {
        if ((int)rows[r].size() != n + 1)
            throw IoError(path + ":" + std::to_string(r + 1) + ": expected " +
                          std::to_string(n + 1) + " columns");
        std::vector<double> key(n);
        for (int i = 0; i < n; ++i) {
            key[i] = parse_double(rows[r][i], path, (int)r + 1);
            axis_values[i].push_back(key[i]);
        }
        const double price = parse_double(rows[r][n], path, (int)r + 1);
        if (!table.emplace(key, price).second)
            throw IoError(path + ":" + std::to_string(r + 1) + ": duplicate grid point");
    }

    std::vector<Eigen::VectorXd> grids(n);
    Eigen::Index total = 1;
    for (int i = 0; i < n; ++i) {
        auto& vals = axis_values[i];
        std::sort(vals.begin(), vals.end());
        vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
        grids[i] = Eigen::Map<const Eigen::VectorXd>(vals.data(), (Eigen::Index)vals.size());
        total *= grids[i].size();
    }
    Eigen::VectorXd values(total);
    std::vector<int> idx(n, 0);
    std::vector<std::string> missing;
    for (Eigen::Index flat = 0; flat < total; ++flat) {
        Eigen::Index rem = flat;
        std::vector<double> key(n);
        for (int i = n - 1; i >= 0; --i) {
            key[i] = grids[i]((Eigen::Index)(rem % grids[i].size()));
            rem /= grids[i].size();
        }
        const auto it = table.find(key);
        if (it == table.end()) {
            if (missing.size() < 5) {
                std::string pt;
                for (int i = 0; i < n; ++i)
                    pt += (i ? "," : "") + ("k" + std::to_string(i + 1) + "=") + format_g17(key[i]);
                missing.push_back(pt);
            }
        } else {
            values(flat) = it->second;
        }
    }
    if (!missing.empty()) {
        std::string msg = path + ": tensor grid incomplete; missing point(s):";
        for (const auto& pt : missing) msg += " [" + pt + "]";
        if ((Eigen::Index)table.size() < total)
            msg += " (" + std::to_string(total - (Eigen::Index)table.size()) + " missing in total)";
        throw IoError(msg);
    }
    return make_surface_nd(std::move(grids), values, kind);
}

void write_surface_csv(const std::string& path, const CallSurface& s) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    if (s.n == 1) {
        out << "strike,price\n";
        for (Eigen::Index i = 0; i < s.strikes[0].size(); ++i)
            out << format_g17(s.strikes[0](i)) << "," << format_g17(s.values(i)) << "\n";
        return;
    }
    for (int i = 0; i < s.n; ++i) out << "k" << (i + 1) << ",";
    out << "price\n";
    for (Eigen::Index flat = 0; flat < s.values.size(); ++flat) {
        Eigen::Index rem = flat;
        std::vector<double> key(s.n);
        for (int i = s.n - 1; i >= 0; --i) {
            key[i] = s.strikes[i]((Eigen::Index)(rem % s.strikes[i].size()));
            rem /= s.strikes[i].size();
        }
        for (int i = 0; i < s.n; ++i) out << format_g17(key[i]) << ",";
        out << format_g17(s.values(flat)) << "\n";
    }
}

void write_density_csv(const std::string& path, const DensityGrid& g) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    const int n = (int)g.coords.size();
    for (int i = 0; i < n; ++i) out << "k" << (i + 1) << ",";
    out << "density\n";
    for (Eigen::Index flat = 0; flat < g.density.size(); ++flat) {
        Eigen::Index rem = flat;
        std::vector<double> key(n);
        for (int i = n - 1; i >= 0; --i) {
            key[i] = g.coords[i]((Eigen::Index)(rem % g.coords[i].size()));
            rem /= g.coords[i].size();
        }
        for (int i = 0; i < n; ++i) out << format_g17(key[i]) << ",";
        out << format_g17(g.density(flat)) << "\n";
    }
}

Eigen::MatrixXd read_empirical_csv(const std::string& path) {
    const auto rows = read_rows(path);
    const auto& header = rows[0];
    const int n = (int)header.size();
    for (int i = 0; i < n; ++i)
        if (header[i] != "x" + std::to_string(i + 1))
            throw IoError(path + ": expected header x1,...,xn");
    Eigen::MatrixXd samples((Eigen::Index)rows.size() - 1, n);
    for (size_t r = 1; r < rows.size(); ++r) {
        if ((int)rows[r].size() != n)
            throw IoError(path + ":" + std::to_string(r + 1) + ": expected " + std::to_string(n) +
                          " columns");
        for (int i = 0; i < n; ++i)
            samples((Eigen::Index)r - 1, i) = parse_double(rows[r][i], path, (int)r + 1);
    }
    return samples;
}

void write_portfolio_csv(const std::string& path, const HedgePortfolio& hp) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "instrument,strike,strictness,weight\n";
    out << "bond,0,," << format_g17(hp.bond_units) << "\n";
    for (const auto& c : hp.calls)
        out << "call," << format_g17(c.strike) << ",," << format_g17(c.weight) << "\n";
    for (const auto& d : hp.digitals)
        out << "digital," << format_g17(d.strike) << ","
            << (d.strict == Strictness::GE ? "ge" : "gt") << "," << format_g17(d.weight) << "\n";
    for (const auto& s : hp.strip)
        out << "digital_strip," << format_g17(s.node) << ",gt," << format_g17(s.weight) << "\n";
}

}  // namespace blhedge
