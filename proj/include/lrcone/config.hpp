#pragma once

// Plain key-value experiment configuration.
//
//   # comment
//   field.kind = sturmian
//   field.lambda = 12
//   field.pattern = [0.25, -0.25]
//   t.min = 10
//   t.max = 500
//   t.count = 16
//   t.spacing = log
//   oracle.times = [0.5, 1, 2]
//
// Values are numbers, strings (bare words or double-quoted) or bracketed lists of either.
// Keys are dotted paths; every key must appear in the schema (see config_schema()).

#include <cstddef>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "lrcone/lrbounds.hpp"
#include "lrcone/potentials.hpp"
#include "lrcone/transport.hpp"

namespace lrcone {

using ConfigValue = std::variant<double, std::string, std::vector<double>, std::vector<std::string>>;

struct ConfigError : InvalidArgument {
    using InvalidArgument::InvalidArgument;
};

/// Ordered key -> value map; ordering makes serialization canonical.
struct Config {
    std::map<std::string, ConfigValue> entries;

    bool contains(const std::string& key) const { return entries.count(key) != 0; }
    bool operator==(const Config&) const = default;
};

/// Throws ConfigError with the line number and offending key on malformed input.
Config parse_config(const std::string& text);
Config load_config(const std::string& path);
std::string serialize_config(const Config& config);
std::string format_value(const ConfigValue& value);

/// `rotation` is a number or the word "golden".
enum class ValueType { number, integer, string, number_list, rotation, grid };

struct SchemaEntry {
    std::string key;
    ValueType type;
    ConfigValue fallback;
    std::string doc;
    /// grids only: default range used when `fallback` is an empty list
    double range_min = 0.0, range_max = 0.0;
    std::size_t range_count = 0;
    std::string range_spacing = "linear";
};

/// All accepted keys. Grid keys `g` accept either `g = [..]` or `g.min`, `g.max`, `g.count`,
/// `g.spacing` (linear | log).
const std::vector<SchemaEntry>& config_schema();

struct GridSpec {
    std::vector<double> values;
    bool explicit_list = false;
    double min = 0.0, max = 0.0;
    std::size_t count = 0;
    std::string spacing = "linear";

    std::vector<double> points() const;
};

struct OracleSettings {
    std::size_t sites = 6;
    std::vector<double> lambdas;
    std::vector<double> times;
    double tolerance = 1e-8;
    std::uint64_t seed = 7;
};

struct DimerSettings {
    double lambda = 0.5;
    std::vector<double> seeds;
    double reference_lambda = 12.0;
};

/// Typed view of a validated config with every default filled in.
struct ExperimentConfig {
    Config resolved;  // embedded in every output; excludes out_dir and workers
    FieldSpec field;
    Probe probe = Probe::outside_probability;
    ConeQuantity quantity = ConeQuantity::fermion_tail;
    GridSpec t, delta, beta, p, moments_horizon, energy, sweep_lambda;
    double epsilon = kDefaultFrontEpsilon;
    double r_max = 2.0;
    std::size_t margin = kDefaultSafetyMargin;
    int trace_kmax = 60;
    ConeFitOptions fit;
    double c_factor = 2.0;
    std::string holdout = "checkerboard";
    OracleSettings oracle;
    DimerSettings dimer;
    std::string out_dir = "lrcone_out";
    unsigned workers = 1;
};

/// Validates keys and types against the schema and fills defaults.
ExperimentConfig resolve_config(const Config& raw);

/// Output directory and worker count from LRCONE_OUT / LRCONE_WORKERS when set.
void apply_environment(ExperimentConfig& config);

/// Smallest chain length that keeps a front started at site 1 clear of site N up to
/// t_max: ceil(2 s t_max + 10 (s t_max)^(1/3)) + margin + 1, from the maximal group
/// velocity 2 of the hopping part.
std::size_t minimum_safe_length(double t_max, Scale scale, std::size_t margin);

/// Throws ConfigError naming the required minimum N when the field is too short.
void check_reflection_plan(std::size_t length, double t_max, Scale scale, std::size_t margin);

}  // namespace lrcone
