#include "lrcone/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace lrcone {

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

bool parse_number(std::string_view text, double& out) {
    if (text.empty()) return false;
    const char* begin = text.data();
    const char* end = begin + text.size();
    if (*begin == '+') ++begin;
    const auto [ptr, ec] = std::from_chars(begin, end, out);
    return ec == std::errc{} && ptr == end && std::isfinite(out);
}

bool bare_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
           c == '.' || c == '-' || c == '+' || c == '/';
}

bool valid_key(std::string_view key) {
    if (key.empty() || key.front() == '.' || key.back() == '.') return false;
    bool segment_start = true;
    for (char c : key) {
        if (c == '.') {
            if (segment_start) return false;
            segment_start = true;
            continue;
        }
        const bool alpha = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
        const bool digit = c >= '0' && c <= '9';
        if (segment_start && !alpha) return false;
        if (!alpha && !digit) return false;
        segment_start = false;
    }
    return true;
}

std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string format_string(const std::string& s) {
    double ignored;
    const bool bare = !s.empty() && std::all_of(s.begin(), s.end(), bare_char) && !parse_number(s, ignored);
    if (bare) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out + '"';
}

struct Scalar {
    bool is_number = false;
    double number = 0.0;
    std::string text;
};

class ValueParser {
public:
    ValueParser(std::string_view text, std::string key) : text_(text), key_(std::move(key)) {}

    ConfigValue parse() {
        skip_space();
        ConfigValue value;
        if (peek() == '[') {
            ++pos_;
            std::vector<Scalar> items;
            skip_space();
            if (peek() == ']') {
                ++pos_;
            } else {
                while (true) {
                    items.push_back(scalar(true));
                    skip_space();
                    if (peek() == ',') { ++pos_; continue; }
                    if (peek() == ']') { ++pos_; break; }
                    fail("expected ',' or ']' in list");
                }
            }
            const bool numbers = std::all_of(items.begin(), items.end(), [](const Scalar& s) { return s.is_number; });
            const bool strings = std::none_of(items.begin(), items.end(), [](const Scalar& s) { return s.is_number; });
            if (numbers) {
                std::vector<double> list;
                for (const auto& s : items) list.push_back(s.number);
                value = list;
            } else if (strings) {
                std::vector<std::string> list;
                for (const auto& s : items) list.push_back(s.text);
                value = list;
            } else {
                fail("list mixes numbers and strings");
            }
        } else {
            const Scalar s = scalar(false);
            if (s.is_number) value = s.number;
            else value = s.text;
        }
        skip_space();
        if (pos_ != text_.size()) fail("trailing characters after value");
        return value;
    }

private:
    char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }
    void skip_space() {
        while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) ++pos_;
    }
    [[noreturn]] void fail(const std::string& what) const {
        throw ConfigError("config key '" + key_ + "': " + what);
    }

    Scalar scalar(bool in_list) {
        skip_space();
        Scalar s;
        if (peek() == '"') {
            ++pos_;
            while (true) {
                if (pos_ >= text_.size()) fail("unterminated string");
                char c = text_[pos_++];
                if (c == '"') break;
                if (c == '\\') {
                    if (pos_ >= text_.size()) fail("unterminated string");
                    c = text_[pos_++];
                }
                s.text += c;
            }
            return s;
        }
        const std::size_t start = pos_;
        while (pos_ < text_.size() && bare_char(text_[pos_])) ++pos_;
        const std::string_view word = text_.substr(start, pos_ - start);
        if (word.empty()) fail(in_list ? "empty list element" : "missing value");
        if (parse_number(word, s.number)) {
            s.is_number = true;
        } else {
            s.text = std::string(word);
        }
        return s;
    }

    std::string_view text_;
    std::string key_;
    std::size_t pos_ = 0;
};

std::string strip_comment(const std::string& line) {
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted && c == '\\') { ++i; continue; }
        if (c == '"') quoted = !quoted;
        if (c == '#' && !quoted) return line.substr(0, i);
    }
    return line;
}

SchemaEntry scalar_entry(std::string key, ValueType type, ConfigValue fallback, std::string doc) {
    SchemaEntry e;
    e.key = std::move(key);
    e.type = type;
    e.fallback = std::move(fallback);
    e.doc = std::move(doc);
    return e;
}

SchemaEntry list_grid(std::string key, std::vector<double> fallback, std::string doc) {
    return scalar_entry(std::move(key), ValueType::grid, std::move(fallback), std::move(doc));
}

SchemaEntry range_grid(std::string key, double lo, double hi, std::size_t count, std::string spacing,
                       std::string doc) {
    SchemaEntry e = scalar_entry(std::move(key), ValueType::grid, std::vector<double>{}, std::move(doc));
    e.range_min = lo;
    e.range_max = hi;
    e.range_count = count;
    e.range_spacing = std::move(spacing);
    return e;
}

const char* const kGridParts[] = {"min", "max", "count", "spacing"};

const SchemaEntry* find_entry(const std::string& key) {
    for (const auto& e : config_schema())
        if (e.key == key) return &e;
    return nullptr;
}

// Grid key owning a sub-key such as "t.min", or nullptr.
const SchemaEntry* grid_owner(const std::string& key) {
    const auto dot = key.rfind('.');
    if (dot == std::string::npos) return nullptr;
    const std::string part = key.substr(dot + 1);
    if (std::find(std::begin(kGridParts), std::end(kGridParts), part) == std::end(kGridParts)) return nullptr;
    const SchemaEntry* e = find_entry(key.substr(0, dot));
    return e && e->type == ValueType::grid ? e : nullptr;
}

[[noreturn]] void bad_type(const std::string& key, const char* expected) {
    throw ConfigError("config key '" + key + "': expected " + expected);
}

double as_number(const std::string& key, const ConfigValue& v) {
    if (const auto* d = std::get_if<double>(&v)) return *d;
    bad_type(key, "a number");
}

std::uint64_t as_integer(const std::string& key, const ConfigValue& v) {
    const double d = as_number(key, v);
    if (d < 0 || d != std::floor(d) || d > 9007199254740992.0) bad_type(key, "a non-negative integer (at most 2^53)");
    return static_cast<std::uint64_t>(d);
}

const std::string& as_string(const std::string& key, const ConfigValue& v) {
    if (const auto* s = std::get_if<std::string>(&v)) return *s;
    bad_type(key, "a string");
}

std::vector<double> as_number_list(const std::string& key, const ConfigValue& v) {
    if (const auto* l = std::get_if<std::vector<double>>(&v)) return *l;
    bad_type(key, "a list of numbers");
}

void check_type(const SchemaEntry& e, const std::string& key, const ConfigValue& v) {
    switch (e.type) {
        case ValueType::number: as_number(key, v); break;
        case ValueType::integer: as_integer(key, v); break;
        case ValueType::string: as_string(key, v); break;
        case ValueType::number_list: as_number_list(key, v); break;
        case ValueType::rotation:
            if (const auto* s = std::get_if<std::string>(&v)) {
                if (*s != "golden") bad_type(key, "a number or 'golden'");
            } else {
                as_number(key, v);
            }
            break;
        case ValueType::grid: as_number_list(key, v); break;
    }
}

GridSpec resolve_grid(const SchemaEntry& e, const Config& raw, Config& resolved) {
    GridSpec g;
    const bool has_list = raw.contains(e.key);
    bool has_range = false;
    for (const char* part : kGridParts) has_range |= raw.contains(e.key + "." + part);
    if (has_list && has_range)
        throw ConfigError("config key '" + e.key + "': given both as a list and as a range");

    const auto& fallback_list = std::get<std::vector<double>>(e.fallback);
    const bool use_list = has_list || (!has_range && !fallback_list.empty());
    if (use_list) {
        g.explicit_list = true;
        g.values = has_list ? as_number_list(e.key, raw.entries.at(e.key)) : fallback_list;
        if (g.values.empty()) throw ConfigError("config key '" + e.key + "': grid list is empty");
        resolved.entries[e.key] = g.values;
        return g;
    }
    const auto get = [&](const char* part, ConfigValue fallback) {
        const std::string key = e.key + "." + part;
        const auto it = raw.entries.find(key);
        ConfigValue v = it != raw.entries.end() ? it->second : std::move(fallback);
        resolved.entries[key] = v;
        return std::pair{key, v};
    };
    {
        const auto [key, v] = get("min", e.range_min);
        g.min = as_number(key, v);
    }
    {
        const auto [key, v] = get("max", e.range_max);
        g.max = as_number(key, v);
    }
    {
        const auto [key, v] = get("count", static_cast<double>(e.range_count));
        g.count = as_integer(key, v);
        if (g.count < 1) throw ConfigError("config key '" + key + "': count must be >= 1");
    }
    {
        const auto [key, v] = get("spacing", e.range_spacing);
        g.spacing = as_string(key, v);
        if (g.spacing != "linear" && g.spacing != "log")
            throw ConfigError("config key '" + key + "': spacing must be 'linear' or 'log'");
    }
    if (!(g.max >= g.min)) throw ConfigError("config key '" + e.key + ".max': must be >= " + e.key + ".min");
    if (g.spacing == "log" && !(g.min > 0.0))
        throw ConfigError("config key '" + e.key + ".min': log spacing needs a positive minimum");
    if (g.count == 1 && g.max != g.min)
        throw ConfigError("config key '" + e.key + ".count': a single point needs min == max");
    g.values = g.points();
    return g;
}

}  // namespace

std::string format_value(const ConfigValue& value) {
    return std::visit(
        [](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>) {
                return format_number(v);
            } else if constexpr (std::is_same_v<T, std::string>) {
                return format_string(v);
            } else {
                std::string out = "[";
                for (std::size_t i = 0; i < v.size(); ++i) {
                    if (i) out += ", ";
                    if constexpr (std::is_same_v<T, std::vector<double>>) out += format_number(v[i]);
                    else out += format_string(v[i]);
                }
                return out + "]";
            }
        },
        value);
}

Config parse_config(const std::string& text) {
    Config config;
    std::istringstream in(text);
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        const std::string body = trim(strip_comment(line));
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(number) + ": expected 'key = value'");
        const std::string key = trim(std::string_view(body).substr(0, eq));
        if (!valid_key(key))
            throw ConfigError("config line " + std::to_string(number) + ": malformed key '" + key + "'");
        if (config.contains(key)) throw ConfigError("config key '" + key + "': given twice");
        const std::string value_text = trim(std::string_view(body).substr(eq + 1));
        config.entries[key] = ValueParser(value_text, key).parse();
    }
    return config;
}

Config load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string serialize_config(const Config& config) {
    std::string out;
    for (const auto& [key, value] : config.entries) out += key + " = " + format_value(value) + "\n";
    return out;
}

std::vector<double> GridSpec::points() const {
    if (explicit_list) return values;
    if (count == 1) return {min};
    return spacing == "log" ? log_grid(min, max, count) : linear_grid(min, max, count);
}

const std::vector<SchemaEntry>& config_schema() {
    static const std::vector<SchemaEntry> schema = [] {
        using V = ValueType;
        std::vector<SchemaEntry> s;
        s.push_back(scalar_entry("field.kind", V::string, "sturmian", "sturmian | dimer | periodic | constant"));
        s.push_back(scalar_entry("field.lambda", V::number, 1.0, "coupling lambda"));
        s.push_back(scalar_entry("field.rotation", V::rotation, "golden", "rotation theta, or 'golden'"));
        s.push_back(scalar_entry("field.omega", V::number, 0.0, "phase offset omega"));
        s.push_back(scalar_entry("field.pattern", V::number_list, std::vector<double>{}, "periodic cell"));
        s.push_back(scalar_entry("field.seed", V::integer, 1.0, "dimer realization seed"));
        s.push_back(scalar_entry("field.length", V::integer, 2200.0, "chain length N"));
        s.push_back(scalar_entry("probe", V::string, "outside_probability",
                                 "outside_probability | tail_sum_from_source"));
        s.push_back(scalar_entry("quantity", V::string, "fermion_tail", "exact_sigma3 | fermion_tail | spin_jw"));
        s.push_back(scalar_entry("epsilon", V::number, kDefaultFrontEpsilon, "front threshold"));
        s.push_back(scalar_entry("margin", V::integer, static_cast<double>(kDefaultSafetyMargin),
                                 "reflection safety margin in sites"));
        s.push_back(scalar_entry("r_max", V::number, 2.0, "finiteness cutoff for R+(beta)"));
        s.push_back(range_grid("t", 10.0, 500.0, 16, "log", "time grid"));
        s.push_back(range_grid("delta", 1.0, 200.0, 200, "linear", "cone separations"));
        s.push_back(range_grid("beta", 0.05, 1.2, 24, "linear", "R+ exponents"));
        s.push_back(list_grid("p", {1.0, 2.0}, "moment orders"));
        s.push_back(list_grid("moments.horizon", {10.0, 30.0, 100.0}, "Cesaro horizons T"));
        s.push_back(range_grid("energy", 0.0, 0.0, 2001, "linear",
                               "trace-map energies; default range is the spectrum hull"));
        s.push_back(list_grid("sweep.lambda", {4.0, 8.0, 12.0, 24.0, 48.0}, "couplings for sweep"));
        s.push_back(scalar_entry("trace.kmax", V::integer, 60.0, "trace-map iterations"));
        s.push_back(scalar_entry("fit.tail_low", V::number, 1e-14, "lower tail-regime bound"));
        s.push_back(scalar_entry("fit.tail_high", V::number, 1e-2, "upper tail-regime bound"));
        s.push_back(scalar_entry("fit.alpha_max", V::number, 1.2, "alpha search limit"));
        s.push_back(scalar_entry("fit.min_cells", V::integer, 20.0, "minimum tail cells"));
        s.push_back(scalar_entry("fit.front_epsilon", V::number, 1e-12, "front-collapse threshold"));
        s.push_back(scalar_entry("cone.c_factor", V::number, 2.0, "prefactor multiplier for coverage"));
        s.push_back(scalar_entry("cone.holdout", V::string, "checkerboard", "checkerboard | none"));
        s.push_back(scalar_entry("oracle.sites", V::integer, 6.0, "dense chain length (<= 8)"));
        s.push_back(scalar_entry("oracle.lambdas", V::number_list, std::vector<double>{0.0, 1.0, 4.0},
                                 "sturmian couplings"));
        s.push_back(scalar_entry("oracle.times", V::number_list, std::vector<double>{0.5, 1.0, 2.0}, "times"));
        s.push_back(scalar_entry("oracle.tolerance", V::number, 1e-8, "absolute tolerance"));
        s.push_back(scalar_entry("oracle.seed", V::integer, 7.0, "seed for random observables"));
        s.push_back(scalar_entry("dimer.lambda", V::number, 0.5, "dimer coupling"));
        s.push_back(scalar_entry("dimer.seeds", V::number_list,
                                 std::vector<double>{1, 2, 3, 4, 5, 6, 7, 8}, "disorder seeds"));
        s.push_back(scalar_entry("dimer.reference_lambda", V::number, 12.0, "sturmian comparison coupling"));
        s.push_back(scalar_entry("out", V::string, "lrcone_out", "output directory"));
        s.push_back(scalar_entry("workers", V::integer, 1.0, "worker threads"));
        return s;
    }();
    return schema;
}

ExperimentConfig resolve_config(const Config& raw) {
    for (const auto& [key, value] : raw.entries) {
        if (const SchemaEntry* e = find_entry(key)) {
            check_type(*e, key, value);
        } else if (!grid_owner(key)) {
            throw ConfigError("unknown config key '" + key + "'");
        }
    }

    Config resolved;
    const auto value_of = [&](const std::string& key) -> ConfigValue {
        const SchemaEntry* e = find_entry(key);
        const auto it = raw.entries.find(key);
        ConfigValue v = it != raw.entries.end() ? it->second : e->fallback;
        resolved.entries[key] = v;
        return v;
    };
    const auto number = [&](const std::string& key) { return as_number(key, value_of(key)); };
    const auto integer = [&](const std::string& key) { return as_integer(key, value_of(key)); };
    const auto string = [&](const std::string& key) { return as_string(key, value_of(key)); };
    const auto list = [&](const std::string& key) { return as_number_list(key, value_of(key)); };
    const auto grid = [&](const std::string& key) { return resolve_grid(*find_entry(key), raw, resolved); };

    ExperimentConfig c;
    try {
        c.field.kind = parse_field_kind(string("field.kind"));
    } catch (const InvalidArgument& e) {
        throw ConfigError("config key 'field.kind': " + std::string(e.what()));
    }
    c.field.lambda = number("field.lambda");
    {
        const ConfigValue rot = value_of("field.rotation");
        c.field.rotation = std::holds_alternative<std::string>(rot) ? kGoldenRotation
                                                                    : static_cast<long double>(std::get<double>(rot));
    }
    c.field.omega = number("field.omega");
    c.field.pattern = list("field.pattern");
    c.field.seed = integer("field.seed");
    c.field.length = integer("field.length");
    try {
        c.field.validate();
    } catch (const InvalidArgument& e) {
        throw ConfigError("config key 'field': " + std::string(e.what()));
    }

    try {
        c.probe = parse_probe(string("probe"));
    } catch (const InvalidArgument& e) {
        throw ConfigError("config key 'probe': " + std::string(e.what()));
    }
    try {
        c.quantity = parse_cone_quantity(string("quantity"));
    } catch (const InvalidArgument& e) {
        throw ConfigError("config key 'quantity': " + std::string(e.what()));
    }
    c.epsilon = number("epsilon");
    if (!(c.epsilon > 0.0 && c.epsilon < 1.0)) throw ConfigError("config key 'epsilon': must lie in (0, 1)");
    c.margin = integer("margin");
    c.r_max = number("r_max");
    if (!(c.r_max > 0.0)) throw ConfigError("config key 'r_max': must be positive");

    c.t = grid("t");
    for (double t : c.t.values)
        if (!(t >= 0.0)) throw ConfigError("config key 't': times must be >= 0");
    c.delta = grid("delta");
    for (double d : c.delta.values)
        if (!(d >= 0.0 && d == std::floor(d))) throw ConfigError("config key 'delta': separations must be integers >= 0");
    c.beta = grid("beta");
    c.p = grid("p");
    for (double p : c.p.values)
        if (!(p > 0.0)) throw ConfigError("config key 'p': moment orders must be positive");
    c.moments_horizon = grid("moments.horizon");
    for (double h : c.moments_horizon.values)
        if (!(h > 0.0)) throw ConfigError("config key 'moments.horizon': horizons must be positive");

    {
        // the energy range defaults to the hull [min h - 2, max h + 2] of the configured field
        const SchemaEntry& e = *find_entry("energy");
        SchemaEntry hull = e;
        if (!raw.contains("energy.min") || !raw.contains("energy.max")) {
            const Field f = make_field(c.field);
            const auto v = f.values();
            const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
            hull.range_min = *lo - 2.0;
            hull.range_max = *hi + 2.0;
        }
        c.energy = resolve_grid(hull, raw, resolved);
    }
    c.sweep_lambda = grid("sweep.lambda");

    const auto kmax = integer("trace.kmax");
    if (kmax < 1 || kmax > 200) throw ConfigError("config key 'trace.kmax': must lie in [1, 200]");
    c.trace_kmax = static_cast<int>(kmax);

    c.fit.tail_low = number("fit.tail_low");
    c.fit.tail_high = number("fit.tail_high");
    if (!(c.fit.tail_low > 0.0 && c.fit.tail_low < c.fit.tail_high))
        throw ConfigError("config key 'fit.tail_low': need 0 < fit.tail_low < fit.tail_high");
    c.fit.alpha_max = number("fit.alpha_max");
    if (!(c.fit.alpha_max > 0.0)) throw ConfigError("config key 'fit.alpha_max': must be positive");
    c.fit.min_cells = integer("fit.min_cells");
    c.fit.front_epsilon = number("fit.front_epsilon");
    c.c_factor = number("cone.c_factor");
    if (!(c.c_factor > 0.0)) throw ConfigError("config key 'cone.c_factor': must be positive");
    c.holdout = string("cone.holdout");
    if (c.holdout != "checkerboard" && c.holdout != "none")
        throw ConfigError("config key 'cone.holdout': must be 'checkerboard' or 'none'");

    c.oracle.sites = integer("oracle.sites");
    if (c.oracle.sites < 2 || c.oracle.sites > 8) throw ConfigError("config key 'oracle.sites': must lie in [2, 8]");
    c.oracle.lambdas = list("oracle.lambdas");
    c.oracle.times = list("oracle.times");
    if (c.oracle.lambdas.empty() || c.oracle.times.empty())
        throw ConfigError("config key 'oracle.lambdas': oracle grids must be nonempty");
    c.oracle.tolerance = number("oracle.tolerance");
    c.oracle.seed = integer("oracle.seed");

    c.dimer.lambda = number("dimer.lambda");
    c.dimer.seeds = list("dimer.seeds");
    if (c.dimer.seeds.empty()) throw ConfigError("config key 'dimer.seeds': must be nonempty");
    for (double s : c.dimer.seeds)
        if (!(s >= 0.0 && s == std::floor(s))) throw ConfigError("config key 'dimer.seeds': seeds must be integers >= 0");
    c.dimer.reference_lambda = number("dimer.reference_lambda");

    c.out_dir = string("out");
    const auto workers = integer("workers");
    if (workers < 1 || workers > 1024) throw ConfigError("config key 'workers': must lie in [1, 1024]");
    c.workers = static_cast<unsigned>(workers);
    // run settings do not affect results and stay out of embedded metadata
    resolved.entries.erase("out");
    resolved.entries.erase("workers");
    c.resolved = std::move(resolved);
    return c;
}

void apply_environment(ExperimentConfig& config) {
    if (const char* out = std::getenv("LRCONE_OUT"); out && *out) config.out_dir = out;
    if (const char* w = std::getenv("LRCONE_WORKERS"); w && *w) {
        double v;
        if (!parse_number(w, v) || v < 1 || v > 1024 || v != std::floor(v))
            throw ConfigError("environment LRCONE_WORKERS: expected an integer in [1, 1024]");
        config.workers = static_cast<unsigned>(v);
    }
}

std::size_t minimum_safe_length(double t_max, Scale scale, std::size_t margin) {
    const double st = scale_factor(scale) * std::max(t_max, 0.0);
    return static_cast<std::size_t>(std::ceil(2.0 * st + 10.0 * std::cbrt(st))) + margin + 1;
}

void check_reflection_plan(std::size_t length, double t_max, Scale scale, std::size_t margin) {
    const std::size_t need = minimum_safe_length(t_max, scale, margin);
    if (length < need)
        throw ConfigError("config key 'field.length': N = " + std::to_string(length) +
                          " is reflection-unsafe up to t = " + format_number(t_max) +
                          "; minimum N = " + std::to_string(need));
}

}  // namespace lrcone
