#include "lrcone/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "lrcone/parallel.hpp"

namespace lrcone {

std::string_view to_string(Probe probe) {
    switch (probe) {
        case Probe::outside_probability: return "outside_probability";
        case Probe::tail_sum_from_source: return "tail_sum_from_source";
    }
    return "unknown";
}

Probe parse_probe(std::string_view text) {
    if (text == "outside_probability") return Probe::outside_probability;
    if (text == "tail_sum_from_source") return Probe::tail_sum_from_source;
    throw InvalidArgument("unknown probe '" + std::string(text) + "'");
}

Scale probe_scale(Probe probe) {
    return probe == Probe::outside_probability ? Scale::transport : Scale::fermion;
}

std::vector<double> probe_profile(const EigenSystem& eig, double t, Probe probe) {
    const auto row = amplitude_row(eig, 1, t, probe_scale(probe));
    return probe == Probe::outside_probability ? outside_profile(row) : tail_profile(row);
}

FrontResult front_from_profile(std::span<const double> profile, double epsilon,
                               std::size_t margin) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw InvalidArgument("front threshold must lie in (0, 1)");
    if (profile.empty()) throw InvalidArgument("empty probe profile");
    const std::size_t n = profile.size() - 1;
    std::size_t front = 0;
    for (std::size_t x = n; x-- > 0;) {
        if (profile[x] > epsilon) {
            front = x;
            break;
        }
    }
    return {front, front + margin < n};
}

FrontResult front_position(const EigenSystem& eig, double t, double epsilon, Probe probe,
                           std::size_t margin) {
    return front_from_profile(probe_profile(eig, t, probe), epsilon, margin);
}

TransportProfile transport_profile(const EigenSystem& eig, std::span<const double> times,
                                   double epsilon, Probe probe, std::size_t margin,
                                   unsigned workers) {
    TransportProfile profile;
    profile.epsilon = epsilon;
    profile.probe = probe;
    profile.length = eig.size();
    profile.samples.resize(times.size());
    parallel_for(times.size(), workers, [&](std::size_t i) {
        const auto f = front_position(eig, times[i], epsilon, probe, margin);
        profile.samples[i] = {times[i], f.front, f.reflection_safe};
    });
    return profile;
}

std::vector<double> log_grid(double lo, double hi, std::size_t n) {
    if (!(lo > 0.0 && hi >= lo) || n < 1) throw InvalidArgument("log grid needs 0 < lo <= hi, n >= 1");
    if (n == 1) return {lo};
    std::vector<double> g(n);
    const double a = std::log(lo), b = std::log(hi);
    for (std::size_t i = 0; i < n; ++i)
        g[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
    g.front() = lo;
    g.back() = hi;
    return g;
}

std::vector<double> linear_grid(double lo, double hi, std::size_t n) {
    if (!(hi >= lo) || n < 1) throw InvalidArgument("linear grid needs lo <= hi, n >= 1");
    if (n == 1) return {lo};
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i)
        g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    g.back() = hi;
    return g;
}

ExponentEstimate fit_power_law(std::span<const double> times, std::span<const double> values) {
    if (times.size() != values.size()) throw InvalidArgument("fit needs matching sample lists");
    const std::size_t n = times.size();
    if (n < 2) throw InvalidArgument("fit needs at least two samples");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!(times[i] > 0.0 && values[i] > 0.0)) throw InvalidArgument("log-log fit needs positive data");
        mx += std::log(times[i]);
        my += std::log(values[i]);
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = std::log(times[i]) - mx, dy = std::log(values[i]) - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx <= 0.0) throw InvalidArgument("fit needs at least two distinct times");
    ExponentEstimate e;
    e.alpha_hat = sxy / sxx;
    const double intercept = my - e.alpha_hat * mx;
    e.prefactor = std::exp(intercept);
    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = std::log(values[i]) - intercept - e.alpha_hat * std::log(times[i]);
        sse += r * r;
    }
    e.stderr_ = n > 2 ? std::sqrt(sse / static_cast<double>(n - 2) / sxx) : 0.0;
    e.r_squared = syy > 0.0 ? 1.0 - sse / syy : 1.0;
    e.t_min = *std::min_element(times.begin(), times.end());
    e.t_max = *std::max_element(times.begin(), times.end());
    e.samples = n;
    return e;
}

ExponentEstimate fit_alpha(const TransportProfile& profile) {
    std::vector<double> t, x;
    for (const auto& s : profile.samples) {
        if (s.reflection_safe && s.front > 0) {
            t.push_back(s.time);
            x.push_back(static_cast<double>(s.front));
        }
    }
    if (t.size() < 5)
        throw InvalidArgument("fit_alpha needs >= 5 reflection-safe samples, got " + std::to_string(t.size()));
    const double lo = *std::min_element(t.begin(), t.end());
    const double hi = *std::max_element(t.begin(), t.end());
    if (std::log10(hi / lo) < 1.5 - 1e-12)
        throw InvalidArgument("fit_alpha needs samples spanning >= 1.5 decades in t");
    return fit_power_law(t, x);
}

DisorderAverage disorder_averaged_fit(std::span<const TransportProfile> profiles) {
    if (profiles.empty()) throw InvalidArgument("disorder average needs at least one realization");
    DisorderAverage out;
    const std::size_t m = profiles.front().samples.size();
    for (const auto& p : profiles) {
        if (p.samples.size() != m) throw InvalidArgument("realizations must share one time grid");
        out.per_realization.push_back(fit_alpha(p));
    }
    // geometric mean of the fronts at each time where every realization is usable
    std::vector<double> t, x;
    for (std::size_t j = 0; j < m; ++j) {
        double log_sum = 0.0;
        bool usable = true;
        for (const auto& p : profiles) {
            const auto& s = p.samples[j];
            usable = usable && s.reflection_safe && s.front > 0;
            if (s.front > 0) log_sum += std::log(static_cast<double>(s.front));
        }
        if (!usable) continue;
        t.push_back(profiles.front().samples[j].time);
        x.push_back(std::exp(log_sum / static_cast<double>(profiles.size())));
    }
    if (t.size() < 5) throw InvalidArgument("disorder average has < 5 reflection-safe samples");
    out.averaged = fit_power_law(t, x);
    double mu = 0.0;
    for (const auto& e : out.per_realization) mu += e.alpha_hat;
    mu /= static_cast<double>(out.per_realization.size());
    double var = 0.0;
    for (const auto& e : out.per_realization) var += (e.alpha_hat - mu) * (e.alpha_hat - mu);
    out.spread = out.per_realization.size() > 1
                     ? std::sqrt(var / static_cast<double>(out.per_realization.size() - 1))
                     : 0.0;
    return out;
}

std::vector<RPlusSample> r_plus_profile(const EigenSystem& eig, double beta,
                                        std::span<const double> times, std::size_t margin) {
    if (!(beta >= 0.0)) throw InvalidArgument("beta must be >= 0");
    std::vector<RPlusSample> out;
    out.reserve(times.size());
    const std::size_t n = eig.size();
    for (double t : times) {
        if (!(t > 1.0)) throw InvalidArgument("R+ profile needs times > 1");
        const auto profile = probe_profile(eig, t, Probe::outside_probability);
        const auto front = front_from_profile(profile, kDefaultFrontEpsilon, margin);
        const double reach = std::floor(std::pow(t, beta));
        const std::size_t x = static_cast<std::size_t>(std::min(reach, static_cast<double>(n)));
        RPlusSample s;
        s.time = t;
        s.distance = x;
        s.reflection_safe = front.reflection_safe && reach + static_cast<double>(margin) < static_cast<double>(n);
        const double p = std::min(1.0, profile[std::min(x, n)]);
        s.value = p > 0.0 ? -std::log(p) / std::log(t) : std::numeric_limits<double>::infinity();
        out.push_back(s);
    }
    return out;
}

AlphaUEstimate alpha_u_estimate(const EigenSystem& eig, std::span<const double> betas,
                                std::span<const double> times, double r_max, std::size_t margin) {
    if (betas.empty() || times.empty()) throw InvalidArgument("alpha_u estimate needs nonempty grids");
    if (!std::is_sorted(betas.begin(), betas.end())) throw InvalidArgument("beta grid must be ascending");
    AlphaUEstimate est;
    std::optional<std::size_t> best;
    bool any_diverged = false;
    for (std::size_t i = 0; i < betas.size(); ++i) {
        const auto profile = r_plus_profile(eig, betas[i], times, margin);
        bool bounded = true;
        for (const auto& s : profile) {
            if (!s.reflection_safe) {
                est.reflection_safe = false;
                continue;
            }
            if (!(s.value <= r_max)) bounded = false;
        }
        if (bounded) best = i;
        else any_diverged = true;
    }
    est.none_diverged = !any_diverged;
    est.none_bounded = !best.has_value();
    est.window_limited = est.none_diverged || est.none_bounded;
    const std::size_t k = best.value_or(0);
    est.beta = best ? betas[k] : betas.front();
    if (betas.size() > 1) {
        const std::size_t j = k + 1 < betas.size() ? k + 1 : k - 1;
        est.resolution = std::abs(betas[j] - betas[k]);
    }
    return est;
}

MomentResult position_moment(const EigenSystem& eig, double p, double t, std::size_t margin) {
    if (!(p >= 0.0)) throw InvalidArgument("moment order must be >= 0");
    const auto row = amplitude_row(eig, 1, t, Scale::transport);
    double m = 0.0;
    for (std::size_t y = 0; y < row.amplitudes.size(); ++y)
        m += std::pow(static_cast<double>(y + 1), p) * std::norm(row.amplitudes[y]);
    const auto front = front_from_profile(outside_profile(row), kDefaultFrontEpsilon, margin);
    return {m, front.reflection_safe};
}

MomentResult time_averaged_moment(const EigenSystem& eig, double p, double horizon, int points,
                                  std::size_t margin) {
    if (!(horizon > 0.0)) throw InvalidArgument("averaging horizon must be positive");
    if (points < 1) throw InvalidArgument("averaging needs at least one grid point");
    MomentResult out;
    for (int j = 0; j < points; ++j) {
        const double t = (j + 0.5) * horizon / points;
        const auto m = position_moment(eig, p, t, margin);
        out.value += m.value;
        out.reflection_safe = out.reflection_safe && m.reflection_safe;
    }
    out.value /= points;
    return out;
}

}  // namespace lrcone
