#pragma once

// Fibonacci trace map on half-traces x_k = tr(M_k)/2 of the transfer matrices over
// Fibonacci blocks:
//   x_{k+1} = 2 x_k x_{k-1} - x_{k-2},
//   I(x, y, z) = x^2 + y^2 + z^2 - 2xyz - 1 (conserved),
//   (x_{-1}, x_0, x_1) = (1, E/2, (E - lambda)/2).

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace lrcone {

inline constexpr double kTraceOverflow = 1e150;

struct TraceState {
    /// (x_{k-1}, x_k, x_{k+1})
    std::array<double, 3> x{1.0, 1.0, 1.0};
    int generation = 0;
    double energy = 0.0;
    double lambda = 0.0;
    bool overflow = false;
};

TraceState initial_traces(double lambda, double energy);

/// One step of the recursion. Sets `overflow` (and leaves the triple unchanged) once the new
/// half-trace exceeds 1e150 in modulus; iterating an overflowed state is a no-op.
TraceState iterate(const TraceState& state);

double invariant(const TraceState& state);
double invariant(double x, double y, double z);

/// 1 + x^2 + y^2 + z^2 + 2|xyz|, the size of the terms that cancel in I. Roundoff in I grows
/// with it, so conservation is measured relative to this rather than to |I|.
double invariant_scale(const TraceState& state);

struct EscapeResult {
    bool escaped = false;
    /// first k with |x_{k-1}| > 1 and |x_k| > 1 when escaped, else the last generation checked
    int step = 0;
};

/// Escape test through generation k_max (k_max <= 200).
EscapeResult escape_time(double lambda, double energy, int k_max);

struct EscapeSample {
    double energy;
    EscapeResult result;
};

std::vector<EscapeSample> escape_scan(double lambda, std::span<const double> energies, int k_max);

struct TraceCheck {
    double trace_map = 0.0;  // x_k from the recursion
    double transfer = 0.0;   // half-trace of the transfer matrix over the length-F_k prefix
};

/// Compares x_k with the half-trace of A_{F_k} ... A_1 over lambda * fibonacci_word(k).
TraceCheck trace_check(double lambda, double energy, int generation);

}  // namespace lrcone
