#include "lrcone/tracemap.hpp"

#include <cmath>

#include "lrcone/onebody.hpp"
#include "lrcone/potentials.hpp"

namespace lrcone {

TraceState initial_traces(double lambda, double energy) {
    TraceState s;
    s.x = {1.0, 0.5 * energy, 0.5 * (energy - lambda)};
    s.generation = 0;
    s.energy = energy;
    s.lambda = lambda;
    return s;
}

TraceState iterate(const TraceState& state) {
    if (state.overflow) return state;
    TraceState next = state;
    const double x = 2.0 * state.x[2] * state.x[1] - state.x[0];
    if (!(std::abs(x) <= kTraceOverflow)) {
        next.overflow = true;
        return next;
    }
    next.x = {state.x[1], state.x[2], x};
    next.generation = state.generation + 1;
    return next;
}

double invariant(double x, double y, double z) {
    return x * x + y * y + z * z - 2.0 * x * y * z - 1.0;
}

double invariant(const TraceState& state) { return invariant(state.x[0], state.x[1], state.x[2]); }

double invariant_scale(const TraceState& state) {
    const auto& [x, y, z] = state.x;
    return 1.0 + x * x + y * y + z * z + 2.0 * std::abs(x * y * z);
}

EscapeResult escape_time(double lambda, double energy, int k_max) {
    if (k_max < 0 || k_max > 200) throw InvalidArgument("escape_time needs 0 <= k_max <= 200");
    TraceState s = initial_traces(lambda, energy);
    // pair (x_{k-1}, x_k) sits at s.x[0], s.x[1] for k = s.generation, then s.x[1], s.x[2]
    if (std::abs(s.x[0]) > 1.0 && std::abs(s.x[1]) > 1.0) return {true, 0};
    for (int k = 1; k <= k_max; ++k) {
        if (std::abs(s.x[1]) > 1.0 && std::abs(s.x[2]) > 1.0) return {true, k};
        s = iterate(s);
        if (s.overflow) return {true, k + 1};
    }
    return {false, k_max};
}

std::vector<EscapeSample> escape_scan(double lambda, std::span<const double> energies, int k_max) {
    std::vector<EscapeSample> out;
    out.reserve(energies.size());
    for (double e : energies) out.push_back({e, escape_time(lambda, e, k_max)});
    return out;
}

TraceCheck trace_check(double lambda, double energy, int generation) {
    if (generation < 1) throw InvalidArgument("trace_check needs generation >= 1");
    const auto word = fibonacci_word(generation);
    std::vector<double> field(word.size());
    for (std::size_t i = 0; i < word.size(); ++i) field[i] = lambda * word[i];
    const auto transfer = transfer_matrix(field, energy, 1, field.size());

    TraceState s = initial_traces(lambda, energy);
    for (int k = 1; k < generation; ++k) s = iterate(s);
    if (s.overflow) throw NumericalError("trace map overflowed before the requested generation");
    return {s.x[2], transfer.half_trace()};
}

}  // namespace lrcone
