#include "lrcone/lrbounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <boost/math/tools/minima.hpp>

#include "lrcone/parallel.hpp"

namespace lrcone {

namespace {

void check_pair(const EigenSystem& eig, std::size_t x, std::size_t x_prime) {
    const std::size_t n = eig.size();
    if (x < 1 || x_prime < 1 || x > n || x_prime > n)
        throw std::out_of_range("site pair outside [1, N]");
}

void require_ordered(std::size_t x, std::size_t x_prime) {
    if (!(x < x_prime)) throw InvalidArgument("bound requires x < x'");
}

struct TailCell {
    double delta;
    double time;
    double log_q;
};

std::vector<TailCell> tail_cells(const ConeGrid& grid, const std::vector<bool>& mask,
                                 const ConeFitOptions& options) {
    if (!mask.empty() && mask.size() != grid.cells())
        throw InvalidArgument("cell mask size does not match the grid");
    std::vector<TailCell> cells;
    for (std::size_t it = 0; it < grid.times.size(); ++it) {
        for (std::size_t id = 0; id < grid.separations.size(); ++id) {
            const std::size_t i = grid.index(it, id);
            if (!grid.reflection_safe[i] || grid.clamped[i]) continue;
            if (!mask.empty() && !mask[i]) continue;
            const double q = grid.values[i];
            if (!(q > options.tail_low && q < options.tail_high)) continue;
            cells.push_back({static_cast<double>(grid.separations[id]), grid.times[it], std::log(q)});
        }
    }
    return cells;
}

struct LinearSolution {
    Eigen::Vector3d coef;  // (log C, xi, xi * v)
    double sse;
};

LinearSolution solve_for_alpha(const std::vector<TailCell>& cells, double alpha) {
    const Eigen::Index m = static_cast<Eigen::Index>(cells.size());
    Eigen::MatrixXd design(m, 3);
    Eigen::VectorXd target(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const auto& c = cells[static_cast<std::size_t>(i)];
        design(i, 0) = 1.0;
        design(i, 1) = -c.delta;
        design(i, 2) = std::pow(c.time, alpha);
        target(i) = c.log_q;
    }
    LinearSolution s;
    s.coef = design.colPivHouseholderQr().solve(target);
    s.sse = (design * s.coef - target).squaredNorm();
    return s;
}

}  // namespace

double exact_fermion_commutator_sigma3(const EigenSystem& eig, std::size_t x, std::size_t x_prime,
                                       double t) {
    check_pair(eig, x, x_prime);
    const auto row = amplitude_row(eig, x, t, Scale::fermion);
    return 2.0 * std::abs(row.amplitudes[x_prime - 1]);
}

double fermion_tail_bound(const EigenSystem& eig, std::size_t x, std::size_t x_prime, double t) {
    check_pair(eig, x, x_prime);
    require_ordered(x, x_prime);
    return tail_sum(eig, x, x_prime, t);
}

double spin_bound_jw(const EigenSystem& eig, std::size_t x, std::size_t x_prime, double t) {
    check_pair(eig, x, x_prime);
    require_ordered(x, x_prime);
    double sum = 0.0;
    for (std::size_t y = 1; y <= x; ++y) {
        const double tail = tail_sum(eig, y, x_prime, t);
        sum += tail + tail;
    }
    return 2.0 * sum;
}

std::string_view to_string(ConeQuantity q) {
    switch (q) {
        case ConeQuantity::exact_sigma3: return "exact_sigma3";
        case ConeQuantity::fermion_tail: return "fermion_tail";
        case ConeQuantity::spin_jw: return "spin_jw";
    }
    return "unknown";
}

ConeQuantity parse_cone_quantity(std::string_view text) {
    if (text == "exact_sigma3") return ConeQuantity::exact_sigma3;
    if (text == "fermion_tail") return ConeQuantity::fermion_tail;
    if (text == "spin_jw") return ConeQuantity::spin_jw;
    throw InvalidArgument("unknown cone quantity '" + std::string(text) + "'");
}

ConeGrid cone_grid(const Field& field, const EigenSystem& eig,
                   const std::vector<std::size_t>& separations, const std::vector<double>& times,
                   ConeQuantity quantity, std::size_t margin, unsigned workers) {
    const std::size_t n = eig.size();
    if (field.size() != n) throw InvalidArgument("eigensystem does not belong to this field");
    for (std::size_t d : separations) {
        if (d + 1 > n) throw InvalidArgument("separation " + std::to_string(d) + " reaches past site N");
        if (d == 0 && quantity != ConeQuantity::exact_sigma3)
            throw InvalidArgument("tail quantities need separations >= 1");
    }
    ConeGrid grid;
    grid.separations = separations;
    grid.times = times;
    grid.quantity = quantity;
    grid.field = field.spec();
    grid.values.assign(separations.size() * times.size(), 0.0);
    grid.reflection_safe.assign(grid.values.size(), true);
    grid.clamped.assign(grid.values.size(), false);

    // vector<bool> is not safe for concurrent writes; collect per column first
    std::vector<std::vector<double>> columns(times.size());
    std::vector<char> safe(times.size(), 1);
    parallel_for(times.size(), workers, [&](std::size_t it) {
        const auto row = amplitude_row(eig, 1, times[it], Scale::fermion);
        const auto tails = tail_profile(row);
        safe[it] = front_from_profile(tails, kDefaultFrontEpsilon, margin).reflection_safe ? 1 : 0;
        auto& col = columns[it];
        col.resize(separations.size());
        for (std::size_t id = 0; id < separations.size(); ++id) {
            const std::size_t xp = 1 + separations[id];
            switch (quantity) {
                case ConeQuantity::exact_sigma3: col[id] = 2.0 * std::abs(row.amplitudes[xp - 1]); break;
                case ConeQuantity::fermion_tail: col[id] = tails[xp - 1]; break;
                case ConeQuantity::spin_jw: col[id] = 4.0 * tails[xp - 1]; break;
            }
        }
    });
    for (std::size_t it = 0; it < times.size(); ++it) {
        for (std::size_t id = 0; id < separations.size(); ++id) {
            const std::size_t i = grid.index(it, id);
            const double v = columns[it][id];
            const double summed = static_cast<double>(n - separations[id]);
            double noise = kAmplitudeNoise;
            switch (quantity) {
                case ConeQuantity::exact_sigma3: noise *= 2.0; break;
                case ConeQuantity::fermion_tail: noise *= summed; break;
                case ConeQuantity::spin_jw: noise *= 4.0 * summed; break;
            }
            grid.clamped[i] = v < std::max(kConeFloor, noise);
            grid.values[i] = grid.clamped[i] ? 0.0 : v;
            grid.reflection_safe[i] = safe[it] != 0;
        }
    }
    return grid;
}

ConeGrid cone_grid(const Field& field, const std::vector<std::size_t>& separations,
                   const std::vector<double>& times, ConeQuantity quantity, std::size_t margin,
                   unsigned workers) {
    const auto eig = eigensystem(build_operator(field));
    return cone_grid(field, eig, separations, times, quantity, margin, workers);
}

ConeFit fit_lightcone(const ConeGrid& grid, const std::vector<bool>& mask,
                      const ConeFitOptions& options) {
    const auto cells = tail_cells(grid, mask, options);
    if (cells.size() < options.min_cells)
        throw InvalidArgument("light-cone fit needs >= " + std::to_string(options.min_cells) +
                              " tail-regime cells, found " + std::to_string(cells.size()));

    const auto sse = [&](double alpha) { return solve_for_alpha(cells, alpha).sse; };
    constexpr int scan = 240;
    double best_alpha = options.alpha_max, best_sse = std::numeric_limits<double>::infinity();
    for (int i = 1; i <= scan; ++i) {
        const double a = options.alpha_max * i / scan;
        const double s = sse(a);
        if (s < best_sse) {
            best_sse = s;
            best_alpha = a;
        }
    }
    const double step = options.alpha_max / scan;
    const double lo = std::max(step * 1e-3, best_alpha - step);
    const double hi = std::min(options.alpha_max, best_alpha + step);
    const auto refined = boost::math::tools::brent_find_minima(sse, lo, hi, std::numeric_limits<double>::digits);
    const double alpha = refined.second <= best_sse ? refined.first : best_alpha;
    const auto sol = solve_for_alpha(cells, alpha);

    ConeFit fit;
    fit.alpha = alpha;
    fit.xi = sol.coef(1);
    if (!(fit.xi > 0.0)) throw NumericalError("light-cone fit produced xi <= 0");
    fit.v = sol.coef(2) / fit.xi;
    if (!(fit.v > 0.0)) throw NumericalError("light-cone fit produced v <= 0");
    fit.C = std::exp(sol.coef(0));
    fit.cells = cells.size();
    fit.loss = sol.sse / static_cast<double>(cells.size());
    fit.t_min = fit.t_max = cells.front().time;
    fit.delta_min = fit.delta_max = static_cast<std::size_t>(cells.front().delta);
    for (const auto& c : cells) {
        fit.t_min = std::min(fit.t_min, c.time);
        fit.t_max = std::max(fit.t_max, c.time);
        fit.delta_min = std::min(fit.delta_min, static_cast<std::size_t>(c.delta));
        fit.delta_max = std::max(fit.delta_max, static_cast<std::size_t>(c.delta));
    }

    std::vector<double> ft, fd;
    for (std::size_t it = 0; it < grid.times.size(); ++it) {
        std::size_t front = 0;
        bool safe = true;
        for (std::size_t id = 0; id < grid.separations.size(); ++id) {
            const std::size_t i = grid.index(it, id);
            safe = safe && grid.reflection_safe[i];
            if (!grid.clamped[i] && grid.values[i] > options.front_epsilon)
                front = std::max(front, grid.separations[id]);
        }
        if (safe && front > 0 && grid.times[it] > 0.0) {
            ft.push_back(grid.times[it]);
            fd.push_back(static_cast<double>(front));
        }
    }
    if (ft.size() >= 3) {
        try {
            const auto e = fit_power_law(ft, fd);
            fit.front_fitted = true;
            fit.front_alpha = e.alpha_hat;
            fit.front_v = e.prefactor;
            fit.front_r_squared = e.r_squared;
        } catch (const InvalidArgument&) {
            fit.front_fitted = false;
        }
    }
    return fit;
}

double bound_coverage(const ConeGrid& grid, const ConeFit& fit, double c_factor,
                      const std::vector<bool>& mask) {
    if (!mask.empty() && mask.size() != grid.cells())
        throw InvalidArgument("cell mask size does not match the grid");
    std::size_t total = 0, held = 0;
    for (std::size_t it = 0; it < grid.times.size(); ++it) {
        for (std::size_t id = 0; id < grid.separations.size(); ++id) {
            const std::size_t i = grid.index(it, id);
            if (!grid.reflection_safe[i] || grid.clamped[i]) continue;
            if (!mask.empty() && !mask[i]) continue;
            const double delta = static_cast<double>(grid.separations[id]);
            const double bound = c_factor * fit.C *
                                 std::exp(-fit.xi * (delta - fit.v * std::pow(grid.times[it], fit.alpha)));
            ++total;
            if (grid.values[i] <= bound) ++held;
        }
    }
    if (total == 0) throw InvalidArgument("no cells to evaluate the bound on");
    return static_cast<double>(held) / static_cast<double>(total);
}

PowerLawFit fit_powerlaw(const ConeGrid& grid, double p, const ConeFitOptions& options) {
    if (!(p > 0.0)) throw InvalidArgument("power-law fit needs p > 0 (p = 0 carries no Delta, t dependence)");
    std::vector<TailCell> cells;
    for (const auto& c : tail_cells(grid, {}, options))
        if (c.time > 0.0) cells.push_back(c);
    if (cells.size() < 3) throw InvalidArgument("power-law fit needs >= 3 tail-regime cells");
    double mx = 0.0, my = 0.0;
    for (const auto& c : cells) {
        mx += std::log(c.time);
        my += c.log_q + p * std::log(c.delta);
    }
    const double m = static_cast<double>(cells.size());
    mx /= m;
    my /= m;
    double sxx = 0.0, sxy = 0.0;
    for (const auto& c : cells) {
        const double dx = std::log(c.time) - mx;
        sxx += dx * dx;
        sxy += dx * (c.log_q + p * std::log(c.delta) - my);
    }
    if (sxx <= 0.0) throw InvalidArgument("power-law fit needs at least two distinct times");
    const double slope = sxy / sxx;
    const double intercept = my - slope * mx;
    double sse = 0.0;
    for (const auto& c : cells) {
        const double r = c.log_q + p * std::log(c.delta) - intercept - slope * std::log(c.time);
        sse += r * r;
    }
    PowerLawFit fit;
    fit.p = p;
    fit.gamma = slope / p;
    fit.log_c = intercept;
    fit.cells = cells.size();
    fit.stderr_ = cells.size() > 2 ? std::sqrt(sse / (m - 2.0) / sxx) / p : 0.0;
    return fit;
}

}  // namespace lrcone
