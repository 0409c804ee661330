#pragma once

// Transverse-field sequences h_1..h_N for the XY chain and its one-body operator.

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace lrcone {

struct InvalidArgument : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

enum class FieldKind { sturmian, dimer, periodic, constant };

std::string_view to_string(FieldKind kind);
FieldKind parse_field_kind(std::string_view text);

/// Inverse golden mean (sqrt(5)-1)/2 at long double precision.
inline constexpr long double kGoldenRotation = 0.618033988749894848204586834365638118L;

struct FieldSpec {
    FieldKind kind = FieldKind::sturmian;
    double lambda = 1.0;
    /// Irrational rotation. An irrational is represented by its nearest long double;
    /// rational inputs are accepted but lie outside the quasi-periodic model.
    long double rotation = kGoldenRotation;
    double omega = 0.0;
    std::vector<double> pattern;
    std::uint64_t seed = 0;
    std::size_t length = 1;

    /// Throws InvalidArgument naming the first violated constraint.
    void validate() const;

    bool operator==(const FieldSpec&) const = default;
};

/// Realized field. Sites are 1-based in `at`, 0-based in `values`.
class Field {
public:
    Field(FieldSpec spec, std::vector<double> values);

    const FieldSpec& spec() const { return spec_; }
    std::span<const double> values() const { return values_; }
    std::size_t size() const { return values_.size(); }
    double at(std::size_t site) const;
    double max_abs() const;

private:
    FieldSpec spec_;
    std::vector<double> values_;
};

/// h_x = lambda * chi_[1-theta,1)((x*theta + omega) mod 1), x = 1..N.
/// x*theta + omega is accumulated in long double before the mod-1 reduction.
Field sturmian_field(const FieldSpec& spec);

/// Random dimer: pairs (h_{2k-1}, h_{2k}) i.i.d. uniform on {+lambda, -lambda}.
/// An odd trailing site gets its own draw.
Field dimer_field(const FieldSpec& spec);

Field periodic_field(const FieldSpec& spec);
Field constant_field(const FieldSpec& spec);

/// Dispatches on spec.kind.
Field make_field(const FieldSpec& spec);

inline constexpr std::size_t kWordLengthCap = std::size_t{1} << 24;

/// Fibonacci word of generation k >= 1, i.e. s^{k-1}(a) for the substitution
/// a -> ab, b -> a, with letters mapped a -> 1 and b -> 0. Its length is F_k
/// (F_1 = 1, F_2 = 2, ...) and it coincides with sturmian_field(lambda=1,
/// theta=golden, omega=0) over its full length.
std::vector<int> fibonacci_word(int generation, std::size_t cap = kWordLengthCap);

/// Length F_k of fibonacci_word(k); F_0 = 1 counts the single letter "b".
std::size_t fibonacci_length(int generation);

/// Number of distinct length-n factors (contiguous subwords) of `word`.
std::size_t factor_complexity(std::span<const int> word, std::size_t n);

}  // namespace lrcone
