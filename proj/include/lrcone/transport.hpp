#pragma once

// Finite-time transport exponents from one-body dynamics: wavepacket fronts, log-log
// exponent fits, outside-probability decay rates and position moments.

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "lrcone/onebody.hpp"

namespace lrcone {

inline constexpr double kDefaultFrontEpsilon = 1e-12;
inline constexpr std::size_t kDefaultSafetyMargin = 32;

enum class Probe {
    outside_probability,   // P(x, t) from delta_1, s = 1
    tail_sum_from_source,  // sum_{y > x} |K_{1,y}(2t)|, s = 2
};

std::string_view to_string(Probe probe);
Probe parse_probe(std::string_view text);

Scale probe_scale(Probe probe);

/// probe(x, t) for x = 0..N (entry N is 0); non-increasing in x.
std::vector<double> probe_profile(const EigenSystem& eig, double t, Probe probe);

struct FrontResult {
    std::size_t front = 0;
    bool reflection_safe = true;
};

/// Largest x with probe(x, t) > epsilon (0 if none). A front closer than `margin` to the
/// far end N is flagged unsafe.
FrontResult front_position(const EigenSystem& eig, double t, double epsilon, Probe probe,
                           std::size_t margin = kDefaultSafetyMargin);

/// Same, on a precomputed probe profile.
FrontResult front_from_profile(std::span<const double> profile, double epsilon,
                               std::size_t margin = kDefaultSafetyMargin);

struct FrontSample {
    double time = 0.0;
    std::size_t front = 0;
    bool reflection_safe = true;
};

struct TransportProfile {
    std::vector<FrontSample> samples;
    double epsilon = kDefaultFrontEpsilon;
    Probe probe = Probe::outside_probability;
    std::size_t length = 0;
};

/// Fronts on a time grid; cells are independent and may be spread over `workers` threads.
TransportProfile transport_profile(const EigenSystem& eig, std::span<const double> times,
                                   double epsilon, Probe probe,
                                   std::size_t margin = kDefaultSafetyMargin,
                                   unsigned workers = 1);

/// n log-spaced values on [lo, hi] inclusive.
std::vector<double> log_grid(double lo, double hi, std::size_t n);
std::vector<double> linear_grid(double lo, double hi, std::size_t n);

struct ExponentEstimate {
    double alpha_hat = 0.0;
    double prefactor = 0.0;  // exp(intercept) in front ~ prefactor * t^alpha
    double stderr_ = 0.0;
    double r_squared = 0.0;
    double t_min = 0.0;
    double t_max = 0.0;
    std::size_t samples = 0;
};

/// Least-squares slope of log front against log t over reflection-safe samples with a
/// positive front. Needs at least 5 such samples spanning 1.5 decades.
ExponentEstimate fit_alpha(const TransportProfile& profile);

/// Plain log-log regression, shared with the light-cone front collapse.
ExponentEstimate fit_power_law(std::span<const double> times, std::span<const double> values);

struct DisorderAverage {
    ExponentEstimate averaged;  // fit of the geometric-mean front over realizations
    std::vector<ExponentEstimate> per_realization;
    double spread = 0.0;  // sample standard deviation of per-realization slopes
};

/// Averages fronts over disorder realizations sharing one time grid.
DisorderAverage disorder_averaged_fit(std::span<const TransportProfile> profiles);

struct RPlusSample {
    double time = 0.0;
    std::size_t distance = 0;  // floor(t^beta)
    double value = 0.0;        // -log P(t^beta, t) / log t, +inf when P underflows to 0
    bool reflection_safe = true;
};

std::vector<RPlusSample> r_plus_profile(const EigenSystem& eig, double beta,
                                        std::span<const double> times,
                                        std::size_t margin = kDefaultSafetyMargin);

struct AlphaUEstimate {
    double beta = 0.0;
    double resolution = 0.0;  // grid spacing around the estimate
    bool window_limited = false;
    bool none_bounded = false;    // every beta exceeded R_max
    bool none_diverged = false;   // no beta exceeded R_max
    bool reflection_safe = true;
};

/// Largest beta on the grid whose finite-time R+ values stay <= r_max over the time window.
AlphaUEstimate alpha_u_estimate(const EigenSystem& eig, std::span<const double> betas,
                                std::span<const double> times, double r_max,
                                std::size_t margin = kDefaultSafetyMargin);

struct MomentResult {
    double value = 0.0;
    bool reflection_safe = true;
};

/// sum_x x^p |K_{1,x}(t)|^2 with s = 1.
MomentResult position_moment(const EigenSystem& eig, double p, double t,
                             std::size_t margin = kDefaultSafetyMargin);

inline constexpr int kCesaroPoints = 64;

/// (1/T) int_0^T moment dt by the midpoint rule on `points` uniform cells.
MomentResult time_averaged_moment(const EigenSystem& eig, double p, double horizon,
                                  int points = kCesaroPoints,
                                  std::size_t margin = kDefaultSafetyMargin);

}  // namespace lrcone
