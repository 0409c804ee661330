#pragma once

// Lieb-Robinson quantities built from one-body amplitudes K_{x,y}(2t) = <x|e^{-2iht}|y>,
// and fits of the light-cone forms
//   Q <= C exp(-xi (Delta - v t^alpha))        (exponential tails)
//   Q <= C (t^gamma / Delta)^p                  (power-law tails)

#include <cstddef>
#include <string_view>
#include <vector>

#include "lrcone/onebody.hpp"
#include "lrcone/potentials.hpp"
#include "lrcone/transport.hpp"

namespace lrcone {

/// ||[c_x(t), s3_x']|| = 2 |K_{x,x'}(2t)|.
double exact_fermion_commutator_sigma3(const EigenSystem& eig, std::size_t x, std::size_t x_prime,
                                       double t);

/// sum_{y >= x'} |K_{x,y}(2t)|, requires x < x'.
double fermion_tail_bound(const EigenSystem& eig, std::size_t x, std::size_t x_prime, double t);

/// 2 sum_{y <= x} (tail(y) + tail(y)) = 4 sum_{y <= x} tail_sum(y, x', t), requires x < x'.
/// The c and c^dag tails coincide in magnitude because the dynamics conserves particle number.
double spin_bound_jw(const EigenSystem& eig, std::size_t x, std::size_t x_prime, double t);

enum class ConeQuantity { exact_sigma3, fermion_tail, spin_jw };

std::string_view to_string(ConeQuantity q);
ConeQuantity parse_cone_quantity(std::string_view text);

inline constexpr double kConeFloor = 1e-20;
/// Roundoff level of one eigendecomposition amplitude (64 machine epsilons, a few tens
/// above what is observed). A cell summing m amplitudes is treated as noise below m times this.
inline constexpr double kAmplitudeNoise = 64.0 * 2.220446049250313e-16;

/// Q(Delta, t) with source x = 1 and x' = 1 + Delta. Cells are row-major over times:
/// value(i_t, i_delta).
struct ConeGrid {
    std::vector<std::size_t> separations;
    std::vector<double> times;
    std::vector<double> values;
    std::vector<bool> reflection_safe;
    /// value was below max(kConeFloor, roundoff floor of the cell) and replaced by 0
    std::vector<bool> clamped;
    ConeQuantity quantity = ConeQuantity::fermion_tail;
    FieldSpec field;

    std::size_t index(std::size_t it, std::size_t id) const { return it * separations.size() + id; }
    double value(std::size_t it, std::size_t id) const { return values[index(it, id)]; }
    std::size_t cells() const { return values.size(); }
};

/// Fills the grid from a prepared eigensystem of the field's operator. A time column is
/// flagged unsafe when the fermion tail front (epsilon 1e-12) comes within `margin` of N;
/// separations with 1 + Delta > N are rejected.
ConeGrid cone_grid(const Field& field, const EigenSystem& eig, const std::vector<std::size_t>& separations,
                   const std::vector<double>& times, ConeQuantity quantity,
                   std::size_t margin = kDefaultSafetyMargin, unsigned workers = 1);

ConeGrid cone_grid(const Field& field, const std::vector<std::size_t>& separations,
                   const std::vector<double>& times, ConeQuantity quantity,
                   std::size_t margin = kDefaultSafetyMargin, unsigned workers = 1);

struct ConeFitOptions {
    double tail_low = 1e-14;
    double tail_high = 1e-2;
    std::size_t min_cells = 20;
    double alpha_max = 1.2;
    /// threshold for the per-time front collapse Delta_eps(t) ~ v t^alpha
    double front_epsilon = 1e-12;
};

struct ConeFit {
    double alpha = 0.0;
    double v = 0.0;
    double xi = 0.0;
    double C = 0.0;
    double loss = 0.0;  // mean squared residual of log Q
    std::size_t cells = 0;
    double t_min = 0.0, t_max = 0.0;
    std::size_t delta_min = 0, delta_max = 0;
    /// front collapse: Delta_eps(t) regressed as front_v * t^front_alpha
    bool front_fitted = false;
    double front_alpha = 0.0;
    double front_v = 0.0;
    double front_r_squared = 0.0;
};

/// Least squares of log Q = log C - xi (Delta - v t^alpha) over safe, unclamped tail-regime
/// cells (and, when `mask` is nonempty, only cells with mask[i] set). For fixed alpha the
/// model is linear in (log C, xi, xi v); alpha is found by a grid scan on (0, alpha_max]
/// refined with Brent's method.
ConeFit fit_lightcone(const ConeGrid& grid, const std::vector<bool>& mask = {},
                      const ConeFitOptions& options = {});

/// Fraction of cells (safe, unclamped, selected by `mask` when nonempty) satisfying
/// Q <= c_factor * C exp(-xi (Delta - v t^alpha)).
double bound_coverage(const ConeGrid& grid, const ConeFit& fit, double c_factor,
                      const std::vector<bool>& mask = {});

struct PowerLawFit {
    double gamma = 0.0;
    double stderr_ = 0.0;
    double log_c = 0.0;
    double p = 0.0;
    std::size_t cells = 0;
};

/// Fits log Q + p log Delta = log C + p gamma log t on tail-regime cells; p must be > 0.
PowerLawFit fit_powerlaw(const ConeGrid& grid, double p, const ConeFitOptions& options = {});

}  // namespace lrcone
