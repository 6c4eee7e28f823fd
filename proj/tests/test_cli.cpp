#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>
#include <sys/wait.h>

using json = nlohmann::json;

namespace {

struct CliResult {
    int code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

CliResult run_cli(const std::string& args) {
    const std::string so = "/tmp/blhedge_cli_stdout.txt";
    const std::string se = "/tmp/blhedge_cli_stderr.txt";
    const std::string cmd = std::string(BLHEDGE_BIN) + " " + args + " > " + so + " 2> " + se;
    const int status = std::system(cmd.c_str());
    CliResult r;
    if (status >= 0 && WIFEXITED(status)) r.code = WEXITSTATUS(status);
    r.out = slurp(so);
    r.err = slurp(se);
    return r;
}

std::string fixture(const std::string& name) {
    return std::string(BLHEDGE_FIXTURES) + "/" + name;
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream ss(text);
    std::string line;
    while (std::getline(ss, line))
        if (!line.empty()) out.push_back(line);
    return out;
}

const double kCall100 = 7.9655674554058038;
const double kDigital100 = 0.46017216272297101;

}  // namespace

TEST_CASE("engine pricing matches the closed form and reports the split breakdown") {
    const CliResult r = run_cli("price --config " + fixture("price_call_engine.json"));
    REQUIRE(r.code == 0);
    const json j = json::parse(r.out);
    CHECK(j.at("schema").get<int>() == 1);
    CHECK(j.at("command").get<std::string>() == "price");
    CHECK(j.at("method").get<std::string>() == "engine");
    CHECK(j.at("total").get<double>() == doctest::Approx(kCall100).epsilon(1e-8));
    CHECK(j.at("discount").get<double>() == doctest::Approx(1.0));
    CHECK(j.at("splits").size() == 4);  // one asset: 4 coordinate-role splits
    for (const auto& s : j.at("splits")) {
        CHECK(s.contains("z"));
        CHECK(s.contains("d"));
        CHECK(s.contains("r"));
        CHECK(s.contains("l"));
        CHECK(s.contains("value"));
    }
}

TEST_CASE("monte carlo output is byte-identical across repeats and thread caps") {
    const std::string args = "price --config " + fixture("price_call_mc.json");
    const CliResult a = run_cli(args);
    const CliResult b = run_cli(args);
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);

    const CliResult t1 = run_cli(args + " --threads 1");
    const CliResult t2 = run_cli(args + " --threads 2");
    REQUIRE(t1.code == 0);
    REQUIRE(t2.code == 0);
    CHECK(t1.out == t2.out);
    CHECK(t1.out == a.out);

    const json j = json::parse(a.out);
    CHECK(j.at("method").get<std::string>() == "mc");
    const double est = j.at("mc").at("estimate").get<double>();
    const double se = j.at("mc").at("standard_error").get<double>();
    CHECK(se > 0.0);
    CHECK(std::abs(est - kCall100) <= 3.5 * se);

    const CliResult reseeded = run_cli(args + " --seed 123");
    REQUIRE(reseeded.code == 0);
    CHECK(reseeded.out != a.out);
}

TEST_CASE("the rainbow contract prices through the closed-form path") {
    const CliResult r = run_cli("price --config " + fixture("price_rainbow.json"));
    REQUIRE(r.code == 0);
    const json j = json::parse(r.out);
    CHECK(j.at("method").get<std::string>() == "closed_form");
    CHECK(j.at("form").get<std::string>() == "rainbow");
    CHECK(j.at("total").get<double>() == doctest::Approx(8.1990463025082452).epsilon(1e-6));
}

TEST_CASE("density inversion recovers mass and the digital from a call surface") {
    const CliResult r = run_cli("density --config " + fixture("density_call1d.json"));
    REQUIRE(r.code == 0);
    const json j = json::parse(r.out);
    CHECK(j.at("command").get<std::string>() == "density");
    CHECK(j.at("mass").get<double>() == doctest::Approx(1.0).epsilon(2e-3));
    CHECK(j.at("negative_cells").get<int>() == 0);
    const json& d = j.at("digital");
    CHECK(d.at("strike").get<double>() == doctest::Approx(100.0));
    // Richardson over spreads at dk = 8, 4, 2 on a unit-spaced surface.
    CHECK(d.at("probability").get<double>() == doctest::Approx(kDigital100).epsilon(1e-3));
    CHECK(d.at("estimates").size() == 3);
}

TEST_CASE("hedge portfolios replicate their payoffs") {
    const CliResult calls = run_cli("hedge --config " + fixture("hedge_calls.json"));
    REQUIRE(calls.code == 0);
    const json jc = json::parse(calls.out);
    CHECK(jc.at("type").get<std::string>() == "calls");
    // The straddle is piecewise linear with its kink on the partition, so the
    // call portfolio replicates it exactly.
    CHECK(jc.at("bond_units").get<double>() == doctest::Approx(100.0));
    CHECK(jc.at("sup_error").get<double>() <= 1e-10);
    CHECK(jc.at("l1_error").get<double>() <= 1e-10);
    CHECK(std::abs(jc.at("price_gap").get<double>()) <= 1e-8);
    CHECK(jc.at("calls").get<int>() == 2);

    const CliResult digs = run_cli("hedge --config " + fixture("hedge_digitals.json"));
    REQUIRE(digs.code == 0);
    const json jd = json::parse(digs.out);
    CHECK(jd.at("type").get<std::string>() == "digitals");
    CHECK(jd.at("strip_cells").get<int>() > 0);
    CHECK(std::abs(jd.at("price_gap").get<double>()) <= 1e-8);
    CHECK(jd.at("portfolio_price").get<double>() ==
          doctest::Approx(kCall100).epsilon(1e-6));
}

TEST_CASE("the smoothing study reports a convergence table") {
    const CliResult r = run_cli("mollify --config " + fixture("mollify_call.json"));
    REQUIRE(r.code == 0);
    const json j = json::parse(r.out);
    REQUIRE(j.at("rows").size() == 2);
    CHECK(j.at("rows")[0].at("eps").get<double>() == doctest::Approx(1.0));
    CHECK(j.at("rows")[1].at("eps").get<double>() == doctest::Approx(0.5));
    CHECK(j.at("sup_tail").get<double>() <= 1e-6);
    CHECK_FALSE(j.at("l1_plateau").get<bool>());
}

TEST_CASE("verify runs identities from a config and from bare flags") {
    const CliResult rect = run_cli("verify --config " + fixture("verify_rectangle.json"));
    REQUIRE(rect.code == 0);
    const std::vector<std::string> rlines = lines_of(rect.out);
    REQUIRE(rlines.size() == 6);  // five rectangles plus the summary
    for (size_t i = 0; i + 1 < rlines.size(); ++i) {
        const json line = json::parse(rlines[i]);
        CHECK(line.at("pass").get<bool>());
        CHECK_FALSE(line.at("inconclusive").get<bool>());
    }
    const json summary = json::parse(rlines.back());
    CHECK(summary.at("summary").get<bool>());
    CHECK(summary.at("passed").get<int>() == 5);
    CHECK(summary.at("failed").get<int>() == 0);

    // Without a config the stock one-asset model is used.
    const CliResult bare = run_cli("verify --identity thm22 --seed 7");
    REQUIRE(bare.code == 0);
    const std::vector<std::string> blines = lines_of(bare.out);
    REQUIRE(blines.size() >= 2);
    const json bsummary = json::parse(blines.back());
    CHECK(bsummary.at("identity").get<std::string>() == "thm22");
    CHECK(bsummary.at("failed").get<int>() == 0);
    CHECK(bsummary.at("passed").get<int>() >= 1);
}

TEST_CASE("configuration problems exit with the configuration status") {
    CHECK(run_cli("price --config " + fixture("malformed.json")).code == 3);
    CHECK(run_cli("price --config " + fixture("unknown_key.json")).code == 3);
    CHECK(run_cli("price --config " + fixture("bad_schema.json")).code == 3);
    CHECK(run_cli("price --config " + fixture("no_such_file.json")).code == 3);
    CHECK(run_cli("price").code == 3);  // --config is required
    // A config without the block the subcommand needs is a config error too.
    CHECK(run_cli("verify --config " + fixture("price_call_engine.json")).code == 3);

    const CliResult r = run_cli("price --config " + fixture("unknown_key.json"));
    CHECK(r.err.find("unknown key") != std::string::npos);
}

TEST_CASE("payoffs rejected by the integrability probe exit with the membership status") {
    const CliResult r = run_cli("price --config " + fixture("membership_reject.json"));
    CHECK(r.code == 2);
    CHECK(r.err.find("integrability probe") != std::string::npos);
    CHECK(r.out.empty());
}

TEST_CASE("dump-config emits a normalized fixed point") {
    const CliResult first =
        run_cli("price --dump-config --config " + fixture("price_call_engine.json"));
    REQUIRE(first.code == 0);
    const json j = json::parse(first.out);
    CHECK(j.at("schema").get<int>() == 1);
    CHECK(j.at("measure").at("corr").size() == 1);  // defaults are materialized

    const std::string round_trip = "/tmp/blhedge_cli_roundtrip.json";
    {
        std::ofstream f(round_trip);
        f << first.out;
    }
    const CliResult second = run_cli("price --dump-config --config " + round_trip);
    REQUIRE(second.code == 0);
    CHECK(second.out == first.out);
}

TEST_CASE("machine output can be redirected to a file") {
    const std::string out_path = "/tmp/blhedge_cli_redirect.json";
    std::remove(out_path.c_str());
    const CliResult r = run_cli("price --config " + fixture("price_call_engine.json") + " --out " +
                                out_path);
    REQUIRE(r.code == 0);
    CHECK(r.out.empty());
    const json j = json::parse(slurp(out_path));
    CHECK(j.at("total").get<double>() == doctest::Approx(kCall100).epsilon(1e-8));
}
