// Command-line surface for the pricing and hedging library: pricing via the
// 4^n decomposition or Monte Carlo, density extraction from call surfaces,
// static hedge construction, identity verification, and mollification
// studies. Machine output (JSON / JSON-lines) goes to stdout or --out;
// diagnostics go to stderr.

#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "blhedge/config.hpp"
#include "blhedge/engine.hpp"
#include "blhedge/hedge.hpp"
#include "blhedge/io.hpp"
#include "blhedge/mc.hpp"
#include "blhedge/mollify.hpp"
#include "blhedge/parallel.hpp"
#include "blhedge/pathdep.hpp"
#include "blhedge/rng.hpp"
#include "blhedge/spd.hpp"

namespace {

using json = nlohmann::ordered_json;
using namespace blhedge;

std::vector<int> mask_coords(std::uint32_t mask, int n) {
    std::vector<int> out;
    for (int i = 0; i < n; ++i)
        if (mask & (1u << i)) out.push_back(i + 1);  // 1-based in machine output
    return out;
}

json breakdown_to_json(const PriceBreakdown& pb, int n) {
    json out;
    out["schema"] = 1;
    out["total"] = pb.total;
    out["discount"] = pb.discount;
    json splits = json::array();
    for (const auto& c : pb.splits) {
        json s;
        s["z"] = mask_coords(c.split.z, n);
        s["d"] = mask_coords(c.split.d, n);
        s["r"] = mask_coords(c.split.r, n);
        s["l"] = mask_coords(c.split.l, n);
        s["value"] = c.value;
        s["skipped"] = c.skipped;
        splits.push_back(s);
    }
    out["splits"] = splits;
    out["warnings"] = pb.warnings;
    return out;
}

json mc_to_json(const MCResult& r) {
    json out;
    out["estimate"] = r.estimate;
    out["standard_error"] = r.standard_error;
    out["paths"] = r.paths_used;
    return out;
}

json report_to_json(const IdentityReport& r) {
    json out;
    out["label"] = r.label;
    out["lhs"] = r.lhs;
    out["rhs"] = r.rhs;
    out["lhs_se"] = r.lhs_se;
    out["rhs_se"] = r.rhs_se;
    out["combined_se"] = r.combined_se;
    out["allowance"] = r.allowance;
    out["pass"] = r.pass;
    out["inconclusive"] = r.inconclusive;
    out["notes"] = r.notes;
    return out;
}

std::function<double(const Eigen::VectorXd&)> payoff_evaluator(const RunConfig& cfg) {
    switch (cfg.payoff_type) {
        case RunConfig::PayoffType::product: {
            const ProductPayoff h = cfg.payoff;
            return [h](const Eigen::VectorXd& x) { return h(x); };
        }
        case RunConfig::PayoffType::spread:
            return [](const Eigen::VectorXd& x) { return std::max(0.0, x(0) - x(1)); };
        case RunConfig::PayoffType::rainbow: {
            const double k1 = cfg.rainbow_k1, k2 = cfg.rainbow_k2, k = cfg.rainbow_k;
            return [k1, k2, k](const Eigen::VectorXd& x) {
                return std::max(0.0, std::max(0.0, x(0) - k1) + std::max(0.0, x(1) - k2) - k);
            };
        }
        case RunConfig::PayoffType::indicator_ge:
            return [](const Eigen::VectorXd& x) { return x(0) >= x(1) ? 1.0 : 0.0; };
        default:
            throw ConfigError("this command needs a payoff block");
    }
}

int cmd_price(const RunConfig& cfg, std::ostream& out) {
    if (cfg.payoff_type == RunConfig::PayoffType::none)
        throw ConfigError("price: config has no payoff block");
    const std::string method =
        cfg.price_block.is_null() ? "engine" : cfg.price_block.at("method").get<std::string>();
    const bool force = cfg.price_block.is_null() ? false : cfg.price_block.at("force").get<bool>();

    json j;
    if (method == "mc") {
        const MCResult r = mc_price_terminal(cfg.measure, payoff_evaluator(cfg), cfg.mc,
                                             cfg.discount);
        j["schema"] = 1;
        j["command"] = "price";
        j["method"] = "mc";
        j["total"] = r.estimate;
        j["mc"] = mc_to_json(r);
    } else if (cfg.payoff_type == RunConfig::PayoffType::product) {
        if (!force) {
            const ProductMembershipReport probe =
                check_product_membership(cfg.payoff, cfg.measure);
            if (!probe.member())
                throw MembershipError("payoff rejected by the integrability probe: " +
                                      probe.detail);
        }
        const PriceBreakdown pb = price_product(cfg.payoff, cfg.measure, cfg.quad, cfg.discount);
        j = breakdown_to_json(pb, cfg.measure.dim());
        j["command"] = "price";
        j["method"] = "engine";
    } else {
        double total = 0.0;
        std::string form;
        if (cfg.payoff_type == RunConfig::PayoffType::spread) {
            total = price_spread(cfg.measure, cfg.quad, cfg.discount);
            form = "spread";
        } else if (cfg.payoff_type == RunConfig::PayoffType::rainbow) {
            total = price_rainbow_p1(cfg.measure, cfg.rainbow_k1, cfg.rainbow_k2, cfg.rainbow_k,
                                     cfg.quad, cfg.discount);
            form = "rainbow";
        } else {
            total = price_indicator_ge(cfg.measure, cfg.quad);
            form = "indicator_ge";
        }
        j["schema"] = 1;
        j["command"] = "price";
        j["method"] = "closed_form";
        j["form"] = form;
        j["total"] = total;
    }
    out << j.dump(2) << "\n";
    return 0;
}

int cmd_density(const RunConfig& cfg, std::ostream& out, const std::string& out_override) {
    if (cfg.density_block.is_null()) throw ConfigError("density: config has no density block");
    const std::string kind = cfg.density_block.at("kind").get<std::string>();
    std::string surface_path = cfg.density_block.at("surface_csv").get<std::string>();
    if (!surface_path.empty() && surface_path[0] != '/')
        surface_path = cfg.base_dir + "/" + surface_path;

    const CallSurface s = read_surface_csv(
        surface_path, kind == "call_1d" ? SurfaceKind::call_1d : SurfaceKind::multi_lookback);
    const DensityGrid g = kind == "call_1d" ? bl_density_1d(s) : joint_density_nd(s);

    json j;
    j["schema"] = 1;
    j["command"] = "density";
    j["kind"] = kind;
    j["mass"] = g.mass;
    j["negative_cells"] = g.negative_cells;
    j["negative_mass_fraction"] = g.negative_mass_fraction;
    j["warnings"] = g.warnings;

    std::string out_csv = out_override;
    if (out_csv.empty() && cfg.density_block.contains("out_csv"))
        out_csv = cfg.base_dir + "/" + cfg.density_block.at("out_csv").get<std::string>();
    if (!out_csv.empty()) {
        write_density_csv(out_csv, g);
        j["out_csv"] = out_csv;
    }

    if (cfg.density_block.contains("digital")) {
        if (kind != "call_1d") throw ConfigError("density.digital: needs a call_1d surface");
        const double strike = cfg.density_block.at("digital").at("strike").get<double>();
        const std::vector<double> dks =
            cfg.density_block.at("digital").at("dk").get<std::vector<double>>();
        const DigitalEstimate d = digital_from_call_spread(s, strike, dks);
        json dj;
        dj["strike"] = strike;
        dj["probability"] = d.probability;
        dj["estimates"] = d.estimates;
        dj["steps"] = d.steps;
        dj["warnings"] = d.warnings;
        j["digital"] = dj;
    }
    out << j.dump(2) << "\n";
    return 0;
}

// The portfolio builders take the 1-D payoff; a single-factor payoff block is
// required here.
const PiecewisePayoff1D& single_factor(const RunConfig& cfg) {
    if (cfg.payoff_type != RunConfig::PayoffType::product || cfg.payoff.terms.size() != 1 ||
        cfg.payoff.terms[0].factors.size() != 1 || cfg.payoff.terms[0].factors[0].coord != 0)
        throw ConfigError("hedge/mollify: needs a payoff of type 'single' on coordinate 1");
    return cfg.payoff.terms[0].factors[0].f;
}

int cmd_hedge(const RunConfig& cfg, std::ostream& out, const std::string& out_override) {
    if (cfg.hedge_block.is_null()) throw ConfigError("hedge: config has no hedge block");
    const PiecewisePayoff1D& f = single_factor(cfg);
    const std::string type = cfg.hedge_block.at("type").get<std::string>();

    HedgePortfolio hp;
    if (type == "calls") {
        hp = build_call_portfolio(f, cfg.hedge_block.at("partition").get<std::vector<double>>());
    } else {
        hp = build_digital_decomposition(f, cfg.measure, cfg.quad);
    }
    const ReplicationReport rep = replication_report(
        hp, f, cfg.measure, cfg.hedge_block.at("samples").get<std::int64_t>(), cfg.mc.seed,
        cfg.quad);

    json j;
    j["schema"] = 1;
    j["command"] = "hedge";
    j["type"] = type;
    j["bond_units"] = hp.bond_units;
    j["calls"] = hp.calls.size();
    j["digitals"] = hp.digitals.size();
    j["strip_cells"] = hp.strip.size();
    j["portfolio_price"] = price_portfolio(hp, cfg.measure, cfg.quad);
    j["sup_error"] = rep.sup_error;
    j["l1_error"] = rep.l1_error;
    j["price_gap"] = rep.price_gap;

    std::string out_csv = out_override;
    if (out_csv.empty() && cfg.hedge_block.contains("out_csv"))
        out_csv = cfg.base_dir + "/" + cfg.hedge_block.at("out_csv").get<std::string>();
    if (!out_csv.empty()) {
        write_portfolio_csv(out_csv, hp);
        j["out_csv"] = out_csv;
    }
    out << j.dump(2) << "\n";
    return 0;
}

int cmd_mollify(const RunConfig& cfg, std::ostream& out) {
    if (cfg.mollify_block.is_null()) throw ConfigError("mollify: config has no mollify block");
    if (cfg.payoff_type == RunConfig::PayoffType::none)
        throw ConfigError("mollify: config has no payoff block");
    BlackBoxPayoff h;
    h.n = cfg.measure.dim();
    h.value = payoff_evaluator(cfg);
    const std::vector<double> eps = cfg.mollify_block.at("eps").get<std::vector<double>>();
    const MollifyReport rep = convergence_check(h, cfg.measure, eps, cfg.mc);

    json j;
    j["schema"] = 1;
    j["command"] = "mollify";
    json rows = json::array();
    for (const auto& r : rep.rows) {
        json row;
        row["eps"] = r.eps;
        row["price_gap"] = r.price_gap;
        row["price_gap_se"] = r.price_gap_se;
        row["l1_gap"] = r.l1_gap;
        row["l1_gap_se"] = r.l1_gap_se;
        row["tail"] = r.tail;
        row["tail_se"] = r.tail_se;
        rows.push_back(row);
    }
    j["rows"] = rows;
    j["sup_tail"] = rep.sup_tail;
    j["l1_plateau"] = rep.l1_plateau;
    j["notes"] = rep.notes;
    out << j.dump(2) << "\n";
    return 0;
}

// ---- verify -------------------------------------------------------------------

double verify_number(const RunConfig& cfg, const char* key, double fallback) {
    if (!cfg.verify_block.is_null() && cfg.verify_block.contains(key))
        return cfg.verify_block.at(key).get<double>();
    return fallback;
}

std::int64_t verify_integer(const RunConfig& cfg, const char* key, std::int64_t fallback) {
    if (!cfg.verify_block.is_null() && cfg.verify_block.contains(key))
        return cfg.verify_block.at(key).get<std::int64_t>();
    return fallback;
}

PathModel path_model_from(const RunConfig& cfg, int want_dim) {
    if (!cfg.measure.is_lognormal())
        throw ConfigError("verify: this identity needs a lognormal measure");
    const LognormalMeasure& ln = cfg.measure.lognormal();
    if (ln.spot.size() != want_dim)
        throw ConfigError("verify: this identity needs a " + std::to_string(want_dim) +
                          "-asset lognormal measure");
    return make_path_model(ln.spot, ln.vol, ln.maturity, cfg.mc.steps, ln.corr);
}

// Two independent recombining binomial marginals as a 2-asset finite-state
// fixture (49 atoms): the exact playground for the rectangle recovery.
DiscreteMeasure binomial_two_asset_fixture() {
    const int steps = 6;
    const double s0 = 100.0, u = 1.07, d = 1.0 / u, p = 0.52;
    Eigen::VectorXd lev(steps + 1), w(steps + 1);
    for (int k = 0; k <= steps; ++k) {
        lev(k) = s0 * std::pow(u, k) * std::pow(d, steps - k);
        double binom = 1.0;
        for (int j = 0; j < k; ++j) binom = binom * (steps - j) / (j + 1);
        w(k) = binom * std::pow(p, k) * std::pow(1.0 - p, steps - k);
    }
    Eigen::MatrixXd atoms((steps + 1) * (steps + 1), 2);
    Eigen::VectorXd weights((steps + 1) * (steps + 1));
    int r = 0;
    for (int i = 0; i <= steps; ++i)
        for (int j = 0; j <= steps; ++j, ++r) {
            atoms(r, 0) = lev(i);
            atoms(r, 1) = lev(j);
            weights(r) = w(i) * w(j);
        }
    return make_discrete(atoms, weights);
}

int cmd_verify(const RunConfig& cfg, std::ostream& out) {
    if (cfg.verify_block.is_null()) throw ConfigError("verify: config has no verify block");
    const std::string id = cfg.verify_block.at("identity").get<std::string>();
    std::vector<IdentityReport> reports;

    if (id == "thm21") {
        const PathModel pm = path_model_from(cfg, 1);
        const double barrier = verify_number(cfg, "barrier", 1.2 * pm.spot(0));
        reports.push_back(verify_barrier_lookback_strike(pm, barrier, cfg.mc));
    } else if (id == "thm22") {
        const PathModel pm = path_model_from(cfg, 1);
        const double strike = verify_number(cfg, "strike", pm.spot(0));
        reports.push_back(lookback_from_barrier_integral(pm, strike, cfg.mc, cfg.quad));
    } else if (id == "thm23") {
        const PathModel pm = path_model_from(cfg, 1);
        const int grid = (int)verify_integer(cfg, "grid_points", 300);
        BlackBoxPayoff h_max, h_prod;
        h_max.n = 2;
        h_max.value = [](const Eigen::VectorXd& x) { return x(1); };
        h_prod.n = 2;
        h_prod.value = [](const Eigen::VectorXd& x) { return x(0) * x(1); };
        const TerminalMaxReport r1 = price_h_of_terminal_and_max(pm, h_max, grid, cfg.mc);
        const TerminalMaxReport r2 = price_h_of_terminal_and_max(pm, h_prod, grid, cfg.mc);
        IdentityReport mass = make_identity_report("terminal/max density mass", r1.density_mass,
                                                   1.0, 0.0, 0.0, 0.01);
        mass.notes = r1.widened ? "grid widened once" : "";
        reports.push_back(mass);
        IdentityReport a = r1.identity;
        a.label = "expected running maximum via recovered density";
        reports.push_back(a);
        IdentityReport b = r2.identity;
        b.label = "expected terminal*maximum via recovered density";
        reports.push_back(b);
    } else if (id == "prop_fA") {
        const PathModel pm = path_model_from(cfg, 1);
        const double strike = verify_number(cfg, "strike", pm.spot(0));
        const AsianSensitivityReport rep = asian_sensitivities(pm, strike, cfg.mc);
        reports.push_back(rep.strike_derivative);
        reports.push_back(rep.maturity_derivative);
        reports.push_back(rep.conditional_maturity);
    } else if (id == "parisian") {
        const PathModel pm = path_model_from(cfg, 1);
        const double strike = verify_number(cfg, "strike", pm.spot(0));
        std::vector<double> levels = {5, 10, 20};
        if (cfg.verify_block.contains("levels"))
            levels = cfg.verify_block.at("levels").get<std::vector<double>>();
        std::vector<ParisianGridResult> rs;
        for (double lv : levels)
            rs.push_back(asian_from_parisian_grid(pm, strike, (int)lv, cfg.mc));
        for (size_t i = 0; i < rs.size(); ++i) {
            IdentityReport r;
            r.label = "grid payoff below the time-average payoff on every path (n=" +
                      std::to_string((int)levels[i]) + ")";
            r.lhs = (double)rs[i].violations;
            r.rhs = 0.0;
            r.pass = rs[i].violations == 0;
            r.notes = "lower bound " + format_g17(rs[i].lower_bound) + ", time-average price " +
                      format_g17(rs[i].asian);
            reports.push_back(r);
        }
        for (size_t i = 0; i + 1 < rs.size(); ++i) {
            IdentityReport r;
            r.label = "lower-bound gap shrinks from n=" + std::to_string((int)levels[i]) +
                      " to n=" + std::to_string((int)levels[i + 1]);
            r.lhs = rs[i + 1].gap;
            r.rhs = rs[i].gap;
            r.lhs_se = rs[i + 1].lower_bound_se;
            r.rhs_se = rs[i].lower_bound_se;
            r.combined_se = std::sqrt(r.lhs_se * r.lhs_se + r.rhs_se * r.rhs_se);
            r.pass = rs[i + 1].gap <= rs[i].gap + r.combined_se;
            reports.push_back(r);
        }
    } else if (id == "thmAB") {
        const PathModel pm = path_model_from(cfg, 2);
        Eigen::VectorXd strikes(2);
        strikes(0) = verify_number(cfg, "k1", pm.spot(0));
        strikes(1) = verify_number(cfg, "k2", pm.spot(1));
        const int slices = (int)verify_integer(cfg, "slices", 12);
        const int grid = (int)verify_integer(cfg, "grid_points", 60);
        const AsianBasketReport rep =
            asian_basket_from_multi_lookback(pm, strikes, slices, grid, cfg.quad, cfg.mc);
        IdentityReport r = rep.identity;
        double min_mass = 1.0;
        for (const auto& s : rep.slices) min_mass = std::min(min_mass, s.mass);
        r.notes = "minimum slice density mass " + format_g17(min_mass) +
                  (rep.widened ? "; grid widened once" : "");
        reports.push_back(r);
    } else if (id == "rectangle") {
        DiscreteMeasure dm;
        if (cfg.measure.is_discrete())
            dm = cfg.measure.discrete();
        else
            dm = binomial_two_asset_fixture();
        const int n = (int)dm.atoms.cols();
        std::vector<std::function<double(const Eigen::VectorXd&)>> fs;
        for (int i = 0; i < n; ++i)
            fs.push_back([i](const Eigen::VectorXd& x) { return x(i); });
        const int count = (int)verify_integer(cfg, "rectangles", 20);

        // Seeded random rectangles whose corners sit on the payoff value grid:
        // the product-call spreads then reproduce the probability exactly.
        std::vector<std::vector<double>> values(n);
        double min_gap = std::numeric_limits<double>::infinity();
        for (int i = 0; i < n; ++i) {
            std::vector<double> v(dm.atoms.rows());
            for (Eigen::Index a = 0; a < dm.atoms.rows(); ++a) v[a] = dm.atoms(a, i);
            std::sort(v.begin(), v.end());
            for (double x : v)
                if (values[i].empty() || x - values[i].back() > 1e-13) values[i].push_back(x);
            for (size_t a = 0; a + 1 < values[i].size(); ++a)
                min_gap = std::min(min_gap, values[i][a + 1] - values[i][a]);
        }
        const double eps = verify_number(cfg, "eps", 0.25 * min_gap);
        RngStream stream{cfg.mc.seed, 0};
        for (int t = 0; t < count; ++t) {
            Eigen::VectorXd mv(n), kv(n);
            for (int i = 0; i < n; ++i) {
                const auto levels = (int)values[i].size();
                int i1 = (int)(stream.uniform(draw_index(t, 2 * i)) * levels) % levels;
                int i2 = (int)(stream.uniform(draw_index(t, 2 * i + 1)) * levels) % levels;
                if (i1 == i2) i2 = (i1 + 1) % levels;
                mv(i) = values[i][std::min(i1, i2)];
                kv(i) = values[i][std::max(i1, i2)];
            }
            const RectangleRecovery rec = rectangle_prob_recovery(dm, fs, mv, kv, eps);
            double direct = 0.0;
            for (Eigen::Index a = 0; a < dm.atoms.rows(); ++a) {
                bool in = true;
                for (int i = 0; i < n; ++i) {
                    const double v = fs[i](dm.atoms.row(a).transpose());
                    if (!(mv(i) <= v && v < kv(i))) in = false;
                }
                if (in) direct += dm.weights(a);
            }
            IdentityReport r;
            r.label = "rectangle probability from product calls, case " + std::to_string(t + 1);
            r.lhs = rec.probability;
            r.rhs = direct;
            r.allowance = 1e-12;
            r.pass = std::abs(rec.probability - direct) <= 1e-12;
            r.inconclusive = !rec.exact;
            reports.push_back(r);
        }
    } else {
        throw ConfigError("verify.identity: unknown identity '" + id + "'");
    }

    int passed = 0, failed = 0, inconclusive = 0;
    for (const auto& r : reports) {
        json line = report_to_json(r);
        line["identity"] = id;
        out << line.dump() << "\n";
        if (r.inconclusive)
            ++inconclusive;
        else if (r.pass)
            ++passed;
        else
            ++failed;
    }
    json summary;
    summary["summary"] = true;
    summary["identity"] = id;
    summary["passed"] = passed;
    summary["failed"] = failed;
    summary["inconclusive"] = inconclusive;
    out << summary.dump() << "\n";
    return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"state-price pricing, hedging and verification toolkit"};
    app.require_subcommand(0, 1);
    app.fallthrough();  // accept global flags after the subcommand name

    std::string config_path, out_path, identity_flag;
    std::int64_t seed = -1;
    int threads = 0;
    bool dump_config = false;
    app.add_option("--config", config_path, "JSON run configuration");
    app.add_option("--seed", seed, "override mc.seed");
    app.add_option("--threads", threads, "worker thread cap (default: logical cores)");
    app.add_option("--out", out_path, "write machine output to this file instead of stdout");
    app.add_flag("--dump-config", dump_config, "print the normalized config and exit");

    CLI::App* price = app.add_subcommand("price", "price the configured payoff");
    CLI::App* density = app.add_subcommand("density", "invert a call surface into a density");
    CLI::App* hedge = app.add_subcommand("hedge", "build a static replication portfolio");
    CLI::App* verify = app.add_subcommand("verify", "check one of the pricing identities");
    CLI::App* mollify = app.add_subcommand("mollify", "payoff smoothing convergence study");
    verify->add_option("--identity", identity_flag,
                       "identity to check (overrides the config's verify.identity)");

    CLI11_PARSE(app, argc, argv);

    try {
        blhedge::RunConfig cfg;
        if (!config_path.empty()) {
            cfg = blhedge::load_config_file(config_path);
        } else if (verify->parsed() && !identity_flag.empty()) {
            // Bare "verify --identity X" runs against a stock one-asset model.
            json doc = {{"schema", 1},
                        {"measure", {{"type", "lognormal"},
                                     {"spot", 100.0},
                                     {"vol", 0.2},
                                     {"maturity", 1.0}}},
                        {"mc", {{"steps", 256}}},
                        {"verify", {{"identity", identity_flag}}}};
            cfg = blhedge::parse_config(doc, ".");
        } else {
            throw blhedge::ConfigError("--config is required");
        }
        if (!identity_flag.empty()) {
            cfg.verify_block["identity"] = identity_flag;
            cfg.normalized["verify"]["identity"] = identity_flag;
        }
        if (seed >= 0) cfg.mc.seed = (std::uint64_t)seed;
        if (threads > 0) blhedge::set_max_threads(threads);

        std::ofstream out_file;
        std::ostream* out = &std::cout;
        if (!out_path.empty()) {
            out_file.open(out_path);
            if (!out_file) throw blhedge::IoError("cannot write " + out_path);
            out = &out_file;
        }

        if (dump_config) {
            if (seed >= 0) cfg.normalized["mc"]["seed"] = (std::uint64_t)seed;
            *out << cfg.normalized.dump(2) << "\n";
            return 0;
        }
        if (price->parsed()) return cmd_price(cfg, *out);
        if (density->parsed()) return cmd_density(cfg, *out, "");
        if (hedge->parsed()) return cmd_hedge(cfg, *out, "");
        if (verify->parsed()) return cmd_verify(cfg, *out);
        if (mollify->parsed()) return cmd_mollify(cfg, *out);
        throw blhedge::ConfigError("no subcommand given");
    } catch (const blhedge::MembershipError& e) {
        blhedge::log_line(blhedge::LogLevel::error, e.what());
        return 2;
    } catch (const blhedge::ConfigError& e) {
        blhedge::log_line(blhedge::LogLevel::error, e.what());
        return 3;
    } catch (const blhedge::IoError& e) {
        blhedge::log_line(blhedge::LogLevel::error, e.what());
        return 3;
    } catch (const std::exception& e) {
        blhedge::log_line(blhedge::LogLevel::error, e.what());
        return 1;
    }
}
