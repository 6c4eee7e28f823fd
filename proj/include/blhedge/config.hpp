#pragma once

#include <stdexcept>
#include <string>

#include <json.hpp>

#include "blhedge/engine.hpp"
#include "blhedge/mc.hpp"
#include "blhedge/measure.hpp"
#include "blhedge/payoff.hpp"

namespace blhedge {

// Raised for schema violations: wrong types, unknown keys, missing blocks,
// out-of-range values. The CLI maps this to exit code 3.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// A fully validated run configuration. `normalized` is the canonical JSON
// form with every default filled in; re-parsing it yields an identical run.
struct RunConfig {
    nlohmann::ordered_json normalized;
    std::string base_dir = ".";  // directory of the config file; resolves CSV paths

    PricingMeasure measure;
    Discount discount;
    QuadratureSpec quad;
    MCSpec mc;

    enum class PayoffType { none, product, spread, rainbow, indicator_ge };
    PayoffType payoff_type = PayoffType::none;
    ProductPayoff payoff;  // for PayoffType::product
    double rainbow_k1 = 0.0, rainbow_k2 = 0.0, rainbow_k = 0.0;

    // Raw command blocks, already key-checked; handlers read them directly.
    nlohmann::ordered_json price_block, density_block, hedge_block, verify_block, mollify_block;
};

// Parses and validates a config document ("schema": 1). Unknown keys are
// rejected everywhere. Relative CSV paths resolve against `base_dir`.
RunConfig parse_config(const nlohmann::ordered_json& doc, const std::string& base_dir = ".");

// Reads and parses a config file; malformed JSON raises ConfigError.
RunConfig load_config_file(const std::string& path);

// Builds a 1-D payoff from its mini-language object, e.g.
// {"kind":"call","strike":100}.
PiecewisePayoff1D payoff_fn_from_json(const nlohmann::ordered_json& fn);

}  // namespace blhedge
