#include "blhedge/config.hpp"

#include <fstream>
#include <initializer_list>
#include <string>
#include <vector>

#include "blhedge/io.hpp"

namespace blhedge {

namespace {

using json = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& msg) { throw ConfigError(msg); }

void check_keys(const json& j, const std::string& ctx,
                std::initializer_list<const char*> allowed) {
    if (!j.is_object()) fail(ctx + ": expected an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* a : allowed)
            if (it.key() == a) {
                ok = true;
                break;
            }
        if (!ok) fail(ctx + ": unknown key '" + it.key() + "'");
    }
}

const json& get_required(const json& j, const std::string& ctx, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) fail(ctx + ": missing required key '" + std::string(key) + "'");
    return *it;
}

double get_number(const json& j, const std::string& ctx) {
    if (!j.is_number()) fail(ctx + ": expected a number");
    return j.get<double>();
}

std::int64_t get_integer(const json& j, const std::string& ctx) {
    if (!j.is_number_integer()) fail(ctx + ": expected an integer");
    return j.get<std::int64_t>();
}

bool get_bool(const json& j, const std::string& ctx) {
    if (!j.is_boolean()) fail(ctx + ": expected a boolean");
    return j.get<bool>();
}

std::string get_string(const json& j, const std::string& ctx) {
    if (!j.is_string()) fail(ctx + ": expected a string");
    return j.get<std::string>();
}

Eigen::VectorXd get_vector(const json& j, const std::string& ctx) {
    if (j.is_number()) return Eigen::VectorXd::Constant(1, j.get<double>());
    if (!j.is_array() || j.empty()) fail(ctx + ": expected a number or a non-empty array");
    Eigen::VectorXd v(j.size());
    for (size_t i = 0; i < j.size(); ++i) v((Eigen::Index)i) = get_number(j[i], ctx);
    return v;
}

Eigen::MatrixXd get_matrix(const json& j, const std::string& ctx) {
    if (!j.is_array() || j.empty()) fail(ctx + ": expected an array of rows");
    const size_t cols = j[0].is_array() ? j[0].size() : 0;
    if (cols == 0) fail(ctx + ": expected an array of non-empty rows");
    Eigen::MatrixXd m((Eigen::Index)j.size(), (Eigen::Index)cols);
    for (size_t r = 0; r < j.size(); ++r) {
        if (!j[r].is_array() || j[r].size() != cols) fail(ctx + ": ragged rows");
        for (size_t c = 0; c < cols; ++c) m((Eigen::Index)r, (Eigen::Index)c) = get_number(j[r][c], ctx);
    }
    return m;
}

json vector_to_json(const Eigen::VectorXd& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(row);
    }
    return rows;
}

std::vector<double> get_double_list(const json& j, const std::string& ctx) {
    if (!j.is_array() || j.empty()) fail(ctx + ": expected a non-empty array");
    std::vector<double> out;
    for (size_t i = 0; i < j.size(); ++i) out.push_back(get_number(j[i], ctx));
    return out;
}

}  // namespace

PiecewisePayoff1D payoff_fn_from_json(const json& fn) {
    const std::string ctx = "payoff.fn";
    if (!fn.is_object()) fail(ctx + ": expected an object");
    const std::string kind = get_string(get_required(fn, ctx, "kind"), ctx + ".kind");
    if (kind == "call" || kind == "put" || kind == "digital_ge" || kind == "digital_gt") {
        check_keys(fn, ctx, {"kind", "strike"});
        const double k = get_number(get_required(fn, ctx, "strike"), ctx + ".strike");
        if (k < 0.0) fail(ctx + ": strike must be non-negative");
        if (kind == "call") return pw_call(k);
        if (kind == "put") return pw_put(k);
        if (kind == "digital_ge") return pw_digital_ge(k);
        return pw_digital_gt(k);
    }
    if (kind == "power") {
        check_keys(fn, ctx, {"kind", "p"});
        const double p = get_number(get_required(fn, ctx, "p"), ctx + ".p");
        if (!(p > 0.0)) fail(ctx + ": power exponent must be positive");
        return pw_power(p);
    }
    if (kind == "affine") {
        check_keys(fn, ctx, {"kind", "intercept", "slope"});
        return pw_affine(get_number(get_required(fn, ctx, "intercept"), ctx + ".intercept"),
                         get_number(get_required(fn, ctx, "slope"), ctx + ".slope"));
    }
    if (kind == "constant") {
        check_keys(fn, ctx, {"kind", "value"});
        return pw_constant(get_number(get_required(fn, ctx, "value"), ctx + ".value"));
    }
    if (kind == "identity") {
        check_keys(fn, ctx, {"kind"});
        return pw_identity();
    }
    if (kind == "pieces") {
        check_keys(fn, ctx, {"kind", "breakpoints", "intercepts", "slopes", "value_at"});
        const auto bp = get_double_list(get_required(fn, ctx, "breakpoints"), ctx + ".breakpoints");
        const auto a = get_double_list(get_required(fn, ctx, "intercepts"), ctx + ".intercepts");
        const auto b = get_double_list(get_required(fn, ctx, "slopes"), ctx + ".slopes");
        const auto va = get_double_list(get_required(fn, ctx, "value_at"), ctx + ".value_at");
        if (a.size() != bp.size() + 1 || b.size() != bp.size() + 1 || va.size() != bp.size())
            fail(ctx + ": pieces need breakpoints.size()+1 intercepts/slopes and one value per "
                       "breakpoint");
        try {
            return pw_from_segments(bp, a, b, va);
        } catch (const std::invalid_argument& e) {
            fail(ctx + ": " + e.what());
        }
    }
    fail(ctx + ": unknown kind '" + kind + "'");
}

namespace {

json normalize_fn(const json& fn) {
    // payoff_fn_from_json already validated; re-emit canonical field order.
    json out;
    const std::string kind = fn.at("kind").get<std::string>();
    out["kind"] = kind;
    if (kind == "call" || kind == "put" || kind == "digital_ge" || kind == "digital_gt")
        out["strike"] = fn.at("strike");
    else if (kind == "power")
        out["p"] = fn.at("p");
    else if (kind == "affine") {
        out["intercept"] = fn.at("intercept");
        out["slope"] = fn.at("slope");
    } else if (kind == "constant")
        out["value"] = fn.at("value");
    else if (kind == "pieces") {
        out["breakpoints"] = fn.at("breakpoints");
        out["intercepts"] = fn.at("intercepts");
        out["slopes"] = fn.at("slopes");
        out["value_at"] = fn.at("value_at");
    }
    return out;
}

void parse_payoff(const json& p, int n, RunConfig& cfg, json& norm) {
    const std::string ctx = "payoff";
    if (!p.is_object()) fail(ctx + ": expected an object");
    const std::string type = get_string(get_required(p, ctx, "type"), ctx + ".type");
    if (type == "spread" || type == "indicator_ge") {
        check_keys(p, ctx, {"type"});
        if (n != 2) fail(ctx + ": '" + type + "' needs a two-asset measure");
        cfg.payoff_type =
            type == "spread" ? RunConfig::PayoffType::spread : RunConfig::PayoffType::indicator_ge;
        norm = json{{"type", type}};
        return;
    }
    if (type == "rainbow") {
        check_keys(p, ctx, {"type", "k1", "k2", "k"});
        if (n != 2) fail(ctx + ": 'rainbow' needs a two-asset measure");
        cfg.payoff_type = RunConfig::PayoffType::rainbow;
        cfg.rainbow_k1 = get_number(get_required(p, ctx, "k1"), ctx + ".k1");
        cfg.rainbow_k2 = get_number(get_required(p, ctx, "k2"), ctx + ".k2");
        cfg.rainbow_k = get_number(get_required(p, ctx, "k"), ctx + ".k");
        if (cfg.rainbow_k1 < 0 || cfg.rainbow_k2 < 0 || cfg.rainbow_k < 0)
            fail(ctx + ": rainbow strikes must be non-negative");
        norm = json{{"type", "rainbow"}, {"k1", p.at("k1")}, {"k2", p.at("k2")}, {"k", p.at("k")}};
        return;
    }
    if (type == "single") {
        check_keys(p, ctx, {"type", "coord", "fn"});
        const std::int64_t coord = get_integer(get_required(p, ctx, "coord"), ctx + ".coord");
        if (coord < 1 || coord > n) fail(ctx + ": coord out of range (1-based)");
        const json& fn = get_required(p, ctx, "fn");
        cfg.payoff_type = RunConfig::PayoffType::product;
        cfg.payoff = make_single(n, (int)coord - 1, payoff_fn_from_json(fn));
        norm = json{{"type", "single"}, {"coord", p.at("coord")}, {"fn", normalize_fn(fn)}};
        return;
    }
    if (type == "product") {
        check_keys(p, ctx, {"type", "terms"});
        const json& terms = get_required(p, ctx, "terms");
        if (!terms.is_array() || terms.empty()) fail(ctx + ".terms: expected a non-empty array");
        ProductPayoff pp;
        pp.n = n;
        json nterms = json::array();
        for (size_t t = 0; t < terms.size(); ++t) {
            const std::string tctx = ctx + ".terms[" + std::to_string(t) + "]";
            check_keys(terms[t], tctx, {"factors"});
            const json& factors = get_required(terms[t], tctx, "factors");
            if (!factors.is_array() || factors.empty())
                fail(tctx + ".factors: expected a non-empty array");
            ProductTerm term;
            json nfactors = json::array();
            std::vector<bool> seen(n, false);
            for (size_t f = 0; f < factors.size(); ++f) {
                const std::string fctx = tctx + ".factors[" + std::to_string(f) + "]";
                check_keys(factors[f], fctx, {"coord", "fn"});
                const std::int64_t coord =
                    get_integer(get_required(factors[f], fctx, "coord"), fctx + ".coord");
                if (coord < 1 || coord > n) fail(fctx + ": coord out of range (1-based)");
                if (seen[coord - 1]) fail(fctx + ": duplicate coord within a term");
                seen[coord - 1] = true;
                const json& fn = get_required(factors[f], fctx, "fn");
                term.factors.push_back({(int)coord - 1, payoff_fn_from_json(fn)});
                nfactors.push_back(json{{"coord", factors[f].at("coord")}, {"fn", normalize_fn(fn)}});
            }
            pp.terms.push_back(std::move(term));
            nterms.push_back(json{{"factors", nfactors}});
        }
        cfg.payoff_type = RunConfig::PayoffType::product;
        cfg.payoff = std::move(pp);
        norm = json{{"type", "product"}, {"terms", nterms}};
        return;
    }
    fail(ctx + ": unknown type '" + type + "'");
}

std::string dir_of(const std::string& path) {
    const size_t slash = path.find_last_of('/');
    return slash == std::string::npos ? std::string(".") : path.substr(0, slash);
}

std::string resolve(const std::string& base_dir, const std::string& path) {
    if (!path.empty() && path[0] == '/') return path;
    return base_dir + "/" + path;
}

}  // namespace

RunConfig parse_config(const json& doc, const std::string& base_dir) {
    RunConfig cfg;
    cfg.base_dir = base_dir;
    check_keys(doc, "config",
               {"schema", "measure", "discount", "quadrature", "mc", "payoff", "price", "density",
                "hedge", "verify", "mollify"});
    const std::int64_t schema = get_integer(get_required(doc, "config", "schema"), "config.schema");
    if (schema != 1) fail("config.schema: unsupported schema version");

    json norm;
    norm["schema"] = 1;

    // ---- measure -------------------------------------------------------------
    const json& jm = get_required(doc, "config", "measure");
    const std::string mtype = get_string(get_required(jm, "measure", "type"), "measure.type");
    json nmeasure;
    nmeasure["type"] = mtype;
    if (mtype == "lognormal") {
        check_keys(jm, "measure", {"type", "spot", "vol", "maturity", "corr"});
        const Eigen::VectorXd spot = get_vector(get_required(jm, "measure", "spot"), "measure.spot");
        const Eigen::VectorXd vol = get_vector(get_required(jm, "measure", "vol"), "measure.vol");
        const double maturity =
            get_number(get_required(jm, "measure", "maturity"), "measure.maturity");
        if (vol.size() != spot.size()) fail("measure: spot and vol sizes differ");
        Eigen::MatrixXd corr = Eigen::MatrixXd::Identity(spot.size(), spot.size());
        if (jm.contains("corr")) {
            corr = get_matrix(jm.at("corr"), "measure.corr");
            if (corr.rows() != spot.size() || corr.cols() != spot.size())
                fail("measure.corr: size does not match spot");
        }
        try {
            cfg.measure = make_lognormal(spot, vol, maturity, corr);
        } catch (const std::invalid_argument& e) {
            fail(std::string("measure: ") + e.what());
        }
        nmeasure["spot"] = vector_to_json(spot);
        nmeasure["vol"] = vector_to_json(vol);
        nmeasure["maturity"] = jm.at("maturity");
        nmeasure["corr"] = matrix_to_json(corr);
    } else if (mtype == "discrete") {
        check_keys(jm, "measure", {"type", "atoms", "weights"});
        const Eigen::MatrixXd atoms = get_matrix(get_required(jm, "measure", "atoms"), "measure.atoms");
        const Eigen::VectorXd weights =
            get_vector(get_required(jm, "measure", "weights"), "measure.weights");
        try {
            cfg.measure = make_discrete(atoms, weights);
        } catch (const std::invalid_argument& e) {
            fail(std::string("measure: ") + e.what());
        }
        nmeasure["atoms"] = jm.at("atoms");
        nmeasure["weights"] = jm.at("weights");
    } else if (mtype == "empirical") {
        check_keys(jm, "measure", {"type", "csv", "samples"});
        const bool has_csv = jm.contains("csv"), has_inline = jm.contains("samples");
        if (has_csv == has_inline) fail("measure: provide exactly one of 'csv' or 'samples'");
        Eigen::MatrixXd samples;
        if (has_csv) {
            const std::string path = get_string(jm.at("csv"), "measure.csv");
            try {
                samples = read_empirical_csv(resolve(base_dir, path));
            } catch (const IoError& e) {
                fail(std::string("measure.csv: ") + e.what());
            }
            nmeasure["csv"] = path;
        } else {
            samples = get_matrix(jm.at("samples"), "measure.samples");
            nmeasure["samples"] = jm.at("samples");
        }
        try {
            cfg.measure = make_empirical(samples);
        } catch (const std::invalid_argument& e) {
            fail(std::string("measure: ") + e.what());
        }
    } else {
        fail("measure.type: unknown type '" + mtype + "'");
    }
    norm["measure"] = nmeasure;
    const int n = cfg.measure.dim();

    // ---- discount ------------------------------------------------------------
    if (doc.contains("discount")) {
        const json& jd = doc.at("discount");
        check_keys(jd, "discount", {"bond"});
        cfg.discount.bond = get_number(get_required(jd, "discount", "bond"), "discount.bond");
        if (!(cfg.discount.bond > 0.0)) fail("discount.bond: must be positive");
    }
    norm["discount"] = json{{"bond", cfg.discount.bond}};

    // ---- quadrature ----------------------------------------------------------
    if (doc.contains("quadrature")) {
        const json& jq = doc.at("quadrature");
        check_keys(jq, "quadrature", {"nodes", "abs_tol", "truncation"});
        if (jq.contains("nodes")) {
            cfg.quad.nodes = (int)get_integer(jq.at("nodes"), "quadrature.nodes");
            if (cfg.quad.nodes < 7) fail("quadrature.nodes: too few nodes");
        }
        if (jq.contains("abs_tol")) {
            cfg.quad.abs_tol = get_number(jq.at("abs_tol"), "quadrature.abs_tol");
            if (!(cfg.quad.abs_tol > 0.0)) fail("quadrature.abs_tol: must be positive");
        }
        if (jq.contains("truncation")) {
            cfg.quad.truncation = get_double_list(jq.at("truncation"), "quadrature.truncation");
            if ((int)cfg.quad.truncation.size() != n)
                fail("quadrature.truncation: one bound per coordinate required");
        }
    }
    {
        json jq;
        jq["nodes"] = cfg.quad.nodes;
        jq["abs_tol"] = cfg.quad.abs_tol;
        if (!cfg.quad.truncation.empty()) jq["truncation"] = cfg.quad.truncation;
        norm["quadrature"] = jq;
    }

    // ---- mc --------------------------------------------------------------------
    if (doc.contains("mc")) {
        const json& jmc = doc.at("mc");
        check_keys(jmc, "mc", {"paths", "steps", "seed", "antithetic", "chunk"});
        if (jmc.contains("paths")) cfg.mc.paths = get_integer(jmc.at("paths"), "mc.paths");
        if (jmc.contains("steps")) cfg.mc.steps = (int)get_integer(jmc.at("steps"), "mc.steps");
        if (jmc.contains("seed")) {
            if (!jmc.at("seed").is_number_integer()) fail("mc.seed: expected an integer");
            cfg.mc.seed = jmc.at("seed").get<std::uint64_t>();
        }
        if (jmc.contains("antithetic"))
            cfg.mc.antithetic = get_bool(jmc.at("antithetic"), "mc.antithetic");
        if (jmc.contains("chunk")) cfg.mc.chunk = get_integer(jmc.at("chunk"), "mc.chunk");
        if (cfg.mc.paths < 1) fail("mc.paths: must be at least 1");
        if (cfg.mc.steps < 1) fail("mc.steps: must be at least 1");
        if (cfg.mc.chunk < 2) fail("mc.chunk: must be at least 2");
    }
    norm["mc"] = json{{"paths", cfg.mc.paths},
                      {"steps", cfg.mc.steps},
                      {"seed", cfg.mc.seed},
                      {"antithetic", cfg.mc.antithetic},
                      {"chunk", cfg.mc.chunk}};

    // ---- payoff ----------------------------------------------------------------
    if (doc.contains("payoff")) {
        json npayoff;
        parse_payoff(doc.at("payoff"), n, cfg, npayoff);
        norm["payoff"] = npayoff;
    }

    // ---- command blocks --------------------------------------------------------
    if (doc.contains("price")) {
        const json& jp = doc.at("price");
        check_keys(jp, "price", {"method", "force"});
        json np;
        np["method"] = jp.contains("method") ? get_string(jp.at("method"), "price.method")
                                             : std::string("engine");
        const std::string method = np["method"].get<std::string>();
        if (method != "engine" && method != "mc") fail("price.method: expected 'engine' or 'mc'");
        np["force"] = jp.contains("force") ? get_bool(jp.at("force"), "price.force") : false;
        cfg.price_block = np;
        norm["price"] = np;
    }
    if (doc.contains("density")) {
        const json& jd = doc.at("density");
        check_keys(jd, "density", {"surface_csv", "kind", "out_csv", "digital"});
        json nd;
        nd["surface_csv"] = get_string(get_required(jd, "density", "surface_csv"),
                                       "density.surface_csv");
        nd["kind"] = jd.contains("kind") ? get_string(jd.at("kind"), "density.kind")
                                         : std::string("call_1d");
        const std::string kind = nd["kind"].get<std::string>();
        if (kind != "call_1d" && kind != "multi_lookback")
            fail("density.kind: expected 'call_1d' or 'multi_lookback'");
        if (jd.contains("out_csv")) nd["out_csv"] = get_string(jd.at("out_csv"), "density.out_csv");
        if (jd.contains("digital")) {
            const json& dg = jd.at("digital");
            check_keys(dg, "density.digital", {"strike", "dk"});
            json ndg;
            ndg["strike"] = get_number(get_required(dg, "density.digital", "strike"),
                                       "density.digital.strike");
            ndg["dk"] = get_double_list(get_required(dg, "density.digital", "dk"),
                                        "density.digital.dk");
            nd["digital"] = ndg;
        }
        cfg.density_block = nd;
        norm["density"] = nd;
    }
    if (doc.contains("hedge")) {
        const json& jh = doc.at("hedge");
        check_keys(jh, "hedge", {"type", "partition", "out_csv", "samples"});
        json nh;
        nh["type"] = get_string(get_required(jh, "hedge", "type"), "hedge.type");
        const std::string type = nh["type"].get<std::string>();
        if (type != "calls" && type != "digitals")
            fail("hedge.type: expected 'calls' or 'digitals'");
        if (type == "calls")
            nh["partition"] = get_double_list(get_required(jh, "hedge", "partition"),
                                              "hedge.partition");
        else if (jh.contains("partition"))
            fail("hedge.partition: only valid for type 'calls'");
        if (jh.contains("out_csv")) nh["out_csv"] = get_string(jh.at("out_csv"), "hedge.out_csv");
        nh["samples"] = jh.contains("samples")
                            ? get_integer(jh.at("samples"), "hedge.samples")
                            : (std::int64_t)100000;
        if (nh["samples"].get<std::int64_t>() < 2) fail("hedge.samples: too few samples");
        cfg.hedge_block = nh;
        norm["hedge"] = nh;
    }
    if (doc.contains("verify")) {
        const json& jv = doc.at("verify");
        check_keys(jv, "verify",
                   {"identity", "barrier", "strike", "levels", "slices", "grid_points",
                    "rectangles", "eps", "k1", "k2", "k"});
        json nv;
        nv["identity"] = get_string(get_required(jv, "verify", "identity"), "verify.identity");
        const std::string id = nv["identity"].get<std::string>();
        const char* known[] = {"thm21", "thm22", "thm23", "prop_fA", "parisian", "thmAB",
                               "rectangle"};
        bool ok = false;
        for (const char* k : known)
            if (id == k) ok = true;
        if (!ok) fail("verify.identity: unknown identity '" + id + "'");
        for (const char* key : {"barrier", "strike", "eps", "k1", "k2", "k"})
            if (jv.contains(key)) nv[key] = get_number(jv.at(key), std::string("verify.") + key);
        for (const char* key : {"slices", "grid_points", "rectangles"})
            if (jv.contains(key)) nv[key] = get_integer(jv.at(key), std::string("verify.") + key);
        if (jv.contains("levels"))
            nv["levels"] = get_double_list(jv.at("levels"), "verify.levels");
        cfg.verify_block = nv;
        norm["verify"] = nv;
    }
    if (doc.contains("mollify")) {
        const json& jmo = doc.at("mollify");
        check_keys(jmo, "mollify", {"eps", "nodes"});
        json nm;
        nm["eps"] = get_double_list(get_required(jmo, "mollify", "eps"), "mollify.eps");
        nm["nodes"] = jmo.contains("nodes")
                          ? get_integer(jmo.at("nodes"), "mollify.nodes")
                          : (std::int64_t)21;
        cfg.mollify_block = nm;
        norm["mollify"] = nm;
    }

    cfg.normalized = norm;
    return cfg;
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("malformed JSON: ") + e.what());
    }
    return parse_config(doc, dir_of(path));
}

}  // namespace blhedge
