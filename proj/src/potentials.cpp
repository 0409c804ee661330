#include "lrcone/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

namespace lrcone {

std::string_view to_string(FieldKind kind) {
    switch (kind) {
        case FieldKind::sturmian: return "sturmian";
        case FieldKind::dimer: return "dimer";
        case FieldKind::periodic: return "periodic";
        case FieldKind::constant: return "constant";
    }
    return "unknown";
}

FieldKind parse_field_kind(std::string_view text) {
    if (text == "sturmian" || text == "fibonacci") return FieldKind::sturmian;
    if (text == "dimer") return FieldKind::dimer;
    if (text == "periodic") return FieldKind::periodic;
    if (text == "constant") return FieldKind::constant;
    throw InvalidArgument("unknown field kind '" + std::string(text) + "'");
}

void FieldSpec::validate() const {
    if (!(lambda >= 0.0) || !std::isfinite(lambda))
        throw InvalidArgument("field.lambda must be finite and >= 0");
    if (length < 1) throw InvalidArgument("field.length must be >= 1");
    if (kind == FieldKind::sturmian) {
        if (!(rotation > 0.0L && rotation < 1.0L))
            throw InvalidArgument("field.rotation must lie in (0, 1)");
        if (!(omega >= 0.0 && omega < 1.0))
            throw InvalidArgument("field.omega must lie in [0, 1)");
    }
    if (kind == FieldKind::periodic) {
        if (pattern.empty()) throw InvalidArgument("field.pattern must be nonempty");
        for (double v : pattern)
            if (!std::isfinite(v)) throw InvalidArgument("field.pattern has a non-finite entry");
    }
}

Field::Field(FieldSpec spec, std::vector<double> values)
    : spec_(std::move(spec)), values_(std::move(values)) {
    if (values_.empty()) throw InvalidArgument("field must have at least one site");
}

double Field::at(std::size_t site) const {
    if (site < 1 || site > values_.size())
        throw std::out_of_range("field site " + std::to_string(site) + " outside [1, N]");
    return values_[site - 1];
}

double Field::max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

Field sturmian_field(const FieldSpec& spec) {
    if (spec.kind != FieldKind::sturmian) throw InvalidArgument("sturmian_field needs kind=sturmian");
    spec.validate();
    std::vector<double> values(spec.length);
    const long double theta = spec.rotation;
    const long double window = 1.0L - theta;
    const long double omega = spec.omega;
    for (std::size_t x = 1; x <= spec.length; ++x) {
        // fmal keeps x*theta + omega in a single rounding at 64-bit mantissa
        long double phase = std::fmal(static_cast<long double>(x), theta, omega);
        phase -= std::floor(phase);
        values[x - 1] = (phase >= window) ? spec.lambda : 0.0;
    }
    return Field(spec, std::move(values));
}

Field dimer_field(const FieldSpec& spec) {
    if (spec.kind != FieldKind::dimer) throw InvalidArgument("dimer_field needs kind=dimer");
    spec.validate();
    std::mt19937_64 rng(spec.seed);
    std::vector<double> values(spec.length);
    // top bit of each draw; distribution objects are not portable across standard libraries
    for (std::size_t i = 0; i < spec.length; i += 2) {
        const double v = (rng() >> 63) ? spec.lambda : -spec.lambda;
        values[i] = v;
        if (i + 1 < spec.length) values[i + 1] = v;
    }
    return Field(spec, std::move(values));
}

Field periodic_field(const FieldSpec& spec) {
    if (spec.kind != FieldKind::periodic) throw InvalidArgument("periodic_field needs kind=periodic");
    spec.validate();
    std::vector<double> values(spec.length);
    for (std::size_t i = 0; i < spec.length; ++i) values[i] = spec.pattern[i % spec.pattern.size()];
    return Field(spec, std::move(values));
}

Field constant_field(const FieldSpec& spec) {
    if (spec.kind != FieldKind::constant) throw InvalidArgument("constant_field needs kind=constant");
    spec.validate();
    return Field(spec, std::vector<double>(spec.length, spec.lambda));
}

Field make_field(const FieldSpec& spec) {
    switch (spec.kind) {
        case FieldKind::sturmian: return sturmian_field(spec);
        case FieldKind::dimer: return dimer_field(spec);
        case FieldKind::periodic: return periodic_field(spec);
        case FieldKind::constant: return constant_field(spec);
    }
    throw InvalidArgument("unknown field kind");
}

std::size_t fibonacci_length(int generation) {
    if (generation < 0) throw InvalidArgument("Fibonacci generation must be >= 0");
    std::size_t prev = 0, cur = 1;  // F_{-1}, F_0
    for (int k = 0; k < generation; ++k) {
        const std::size_t next = cur + prev;
        if (next < cur) throw InvalidArgument("Fibonacci length overflow");
        prev = cur;
        cur = next;
    }
    return cur;
}

std::vector<int> fibonacci_word(int generation, std::size_t cap) {
    if (generation < 1) throw InvalidArgument("Fibonacci word generation must be >= 1");
    if (generation > 90 || fibonacci_length(generation) > cap)
        throw InvalidArgument("Fibonacci word of generation " + std::to_string(generation) +
                              " exceeds the length cap " + std::to_string(cap));
    // word(k+1) = word(k) word(k-1), starting from word(0) = "b", word(1) = "a"
    std::vector<int> older{0};
    std::vector<int> word{1};
    for (int k = 1; k < generation; ++k) {
        std::vector<int> next;
        next.reserve(word.size() + older.size());
        next.insert(next.end(), word.begin(), word.end());
        next.insert(next.end(), older.begin(), older.end());
        older = std::move(word);
        word = std::move(next);
    }
    return word;
}

std::size_t factor_complexity(std::span<const int> word, std::size_t n) {
    if (n < 1 || n > word.size())
        throw InvalidArgument("factor length " + std::to_string(n) + " outside [1, " +
                              std::to_string(word.size()) + "]");
    std::set<std::vector<int>> factors;
    for (std::size_t i = 0; i + n <= word.size(); ++i)
        factors.emplace(word.begin() + i, word.begin() + i + n);
    return factors.size();
}

}  // namespace lrcone
