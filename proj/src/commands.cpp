#include "lrcone/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <numeric>
#include <optional>

#include <json.hpp>

#include "lrcone/lrbounds.hpp"
#include "lrcone/manybody.hpp"
#include "lrcone/onebody.hpp"
#include "lrcone/output.hpp"
#include "lrcone/tracemap.hpp"
#include "lrcone/transport.hpp"

namespace lrcone {

namespace {

using nlohmann::json;

std::string path_in(const ExperimentConfig& c, const std::string& name) {
    return (std::filesystem::path(c.out_dir) / name).string();
}

OutputMeta meta_for(const std::string& command, const ExperimentConfig& c) {
    OutputMeta m;
    m.command = command;
    m.config = &c.resolved;
    return m;
}

void emit_csv(CommandOutcome& out, const ExperimentConfig& c, const std::string& name, const Table& table,
              const OutputMeta& meta) {
    const std::string path = path_in(c, name);
    write_file_atomic(path, render_csv(table, meta));
    out.files.push_back(path);
}

void emit_json(CommandOutcome& out, const ExperimentConfig& c, const std::string& name, const json& result,
               const OutputMeta& meta) {
    const std::string path = path_in(c, name);
    write_file_atomic(path, render_json(result, meta));
    out.files.push_back(path);
}

void fail(CommandOutcome& out, OutputMeta& meta, const std::string& why) {
    out.exit_code = 1;
    out.messages.push_back(why);
    if (meta.ok) {
        meta.ok = false;
        meta.status_detail = why;
    }
}

json spec_json(const FieldSpec& s) {
    return {{"kind", std::string(to_string(s.kind))},
            {"lambda", s.lambda},
            {"rotation", static_cast<double>(s.rotation)},
            {"omega", s.omega},
            {"pattern", s.pattern},
            {"seed", s.seed},
            {"length", s.length}};
}

json estimate_json(const ExponentEstimate& e) {
    return {{"alpha_hat", e.alpha_hat}, {"prefactor", e.prefactor}, {"stderr", e.stderr_},
            {"r_squared", e.r_squared}, {"t_min", e.t_min},         {"t_max", e.t_max},
            {"samples", e.samples}};
}

double max_of(const std::vector<double>& v) { return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end()); }

std::string flag(bool safe) { return safe ? "safe" : "unsafe"; }

EigenSystem solve(const Field& field) { return eigensystem(build_operator(field)); }

FieldSpec with_lambda(FieldSpec spec, double lambda) {
    spec.lambda = lambda;
    return spec;
}

}  // namespace

double asymptotic_exponent(double lambda) {
    if (!(lambda > 1.0)) return std::numeric_limits<double>::quiet_NaN();
    return 2.0 * std::log(1.0 + static_cast<double>(kGoldenRotation)) / std::log(lambda);
}

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names = {"field", "spectrum",      "front",  "fit_alpha",
                                                   "cone",  "dimer_compare", "oracle", "sweep"};
    return names;
}

CommandOutcome run_command(std::string_view name, const ExperimentConfig& config) {
    if (name == "field") return cmd_field(config);
    if (name == "spectrum") return cmd_spectrum(config);
    if (name == "front") return cmd_front(config);
    if (name == "fit_alpha") return cmd_fit_alpha(config);
    if (name == "cone") return cmd_cone(config);
    if (name == "dimer_compare") return cmd_dimer_compare(config);
    if (name == "oracle") return cmd_oracle(config);
    if (name == "sweep") return cmd_sweep(config);
    throw ConfigError("unknown command '" + std::string(name) + "'");
}

CommandOutcome cmd_field(const ExperimentConfig& c) {
    CommandOutcome out;
    const Field field = make_field(c.field);
    const OutputMeta meta = meta_for("field", c);
    Table table({"x", "h_x"});
    for (std::size_t x = 1; x <= field.size(); ++x) table.add_row({std::to_string(x), format_double(field.at(x))});
    emit_csv(out, c, "field.csv", table, meta);
    const auto v = field.values();
    emit_json(out, c, "field.json", {{"spec", spec_json(field.spec())}, {"values", std::vector<double>(v.begin(), v.end())}},
              meta);
    return out;
}

CommandOutcome cmd_spectrum(const ExperimentConfig& c) {
    CommandOutcome out;
    const Field field = make_field(c.field);
    const EigenSystem eig = solve(field);
    const OutputMeta meta = meta_for("spectrum", c);

    Table values({"k", "E"});
    for (Eigen::Index k = 0; k < eig.values.size(); ++k)
        values.add_row({std::to_string(k + 1), format_double(eig.values(k))});
    emit_csv(out, c, "eigenvalues.csv", values, meta);

    if (c.field.kind != FieldKind::sturmian || c.field.rotation != kGoldenRotation) {
        out.messages.push_back("trace-map scan skipped: it describes the golden-rotation sturmian field only");
        return out;
    }
    const auto energies = c.energy.points();
    const auto scan = escape_scan(c.field.lambda, energies, c.trace_kmax);
    Table traces({"E", "bounded", "escape_step"});
    for (const auto& s : scan)
        traces.add_row({format_double(s.energy), s.result.escaped ? "0" : "1",
                        s.result.escaped ? std::to_string(s.result.step) : "-1"});
    emit_csv(out, c, "trace_scan.csv", traces, meta);
    return out;
}

CommandOutcome cmd_front(const ExperimentConfig& c) {
    const auto times = c.t.points();
    check_reflection_plan(c.field.length, max_of(times), probe_scale(c.probe), c.margin);
    CommandOutcome out;
    const EigenSystem eig = solve(make_field(c.field));
    const auto profile = transport_profile(eig, times, c.epsilon, c.probe, c.margin, c.workers);
    Table table({"t", "front", "flag"});
    for (const auto& s : profile.samples)
        table.add_row({format_double(s.time), std::to_string(s.front), flag(s.reflection_safe)});
    emit_csv(out, c, "front.csv", table, meta_for("front", c));
    return out;
}

CommandOutcome cmd_fit_alpha(const ExperimentConfig& c) {
    const auto times = c.t.points();
    check_reflection_plan(c.field.length, max_of(times), probe_scale(c.probe), c.margin);
    CommandOutcome out;
    OutputMeta meta = meta_for("fit_alpha", c);
    const EigenSystem eig = solve(make_field(c.field));
    const auto profile = transport_profile(eig, times, c.epsilon, c.probe, c.margin, c.workers);

    json result;
    result["probe"] = std::string(to_string(c.probe));
    result["epsilon"] = c.epsilon;
    json fronts = json::array();
    for (const auto& s : profile.samples)
        fronts.push_back({{"t", s.time}, {"front", s.front}, {"reflection_safe", s.reflection_safe}});
    result["fronts"] = fronts;
    try {
        result["estimate"] = estimate_json(fit_alpha(profile));
    } catch (const InvalidArgument& e) {
        result["estimate"] = nullptr;
        fail(out, meta, std::string("fit precondition: ") + e.what());
    }

    const auto betas = c.beta.points();
    Table rplus({"beta", "t", "distance", "R", "flag"});
    try {
        for (double beta : betas) {
            for (const auto& s : r_plus_profile(eig, beta, times, c.margin))
                rplus.add_row({format_double(beta), format_double(s.time), std::to_string(s.distance),
                               format_double(s.value), flag(s.reflection_safe)});
        }
        const auto u = alpha_u_estimate(eig, betas, times, c.r_max, c.margin);
        result["alpha_u"] = {{"beta", u.beta},
                             {"resolution", u.resolution},
                             {"r_max", c.r_max},
                             {"window_limited", u.window_limited},
                             {"none_bounded", u.none_bounded},
                             {"none_diverged", u.none_diverged},
                             {"reflection_safe", u.reflection_safe}};
    } catch (const InvalidArgument& e) {
        result["alpha_u"] = nullptr;
        fail(out, meta, std::string("R+ precondition: ") + e.what());
    }
    emit_csv(out, c, "rplus.csv", rplus, meta);
    emit_json(out, c, "fit_alpha.json", result, meta);
    return out;
}

CommandOutcome cmd_cone(const ExperimentConfig& c) {
    const auto times = c.t.points();
    check_reflection_plan(c.field.length, max_of(times), Scale::fermion, c.margin);
    std::vector<std::size_t> separations;
    for (double d : c.delta.points()) separations.push_back(static_cast<std::size_t>(d));
    CommandOutcome out;
    OutputMeta meta = meta_for("cone", c);
    const Field field = make_field(c.field);
    const ConeGrid grid = cone_grid(field, solve(field), separations, times, c.quantity, c.margin, c.workers);

    Table table({"delta", "t", "value", "flag"});
    for (std::size_t it = 0; it < grid.times.size(); ++it) {
        for (std::size_t id = 0; id < grid.separations.size(); ++id) {
            const std::size_t i = grid.index(it, id);
            const std::string f = !grid.reflection_safe[i] ? "unsafe" : grid.clamped[i] ? "clamped" : "ok";
            table.add_row({std::to_string(grid.separations[id]), format_double(grid.times[it]),
                           format_double(grid.values[i]), f});
        }
    }

    std::vector<bool> fit_mask, test_mask;
    if (c.holdout == "checkerboard") {
        fit_mask.resize(grid.cells());
        test_mask.resize(grid.cells());
        for (std::size_t it = 0; it < grid.times.size(); ++it)
            for (std::size_t id = 0; id < grid.separations.size(); ++id) {
                const bool even = (it + id) % 2 == 0;
                fit_mask[grid.index(it, id)] = even;
                test_mask[grid.index(it, id)] = !even;
            }
    }

    json result;
    result["quantity"] = std::string(to_string(c.quantity));
    result["holdout"] = c.holdout;
    result["c_factor"] = c.c_factor;
    try {
        const ConeFit fit = fit_lightcone(grid, fit_mask, c.fit);
        double max_residual = 0.0;
        for (std::size_t it = 0; it < grid.times.size(); ++it)
            for (std::size_t id = 0; id < grid.separations.size(); ++id) {
                const std::size_t i = grid.index(it, id);
                if (!grid.reflection_safe[i] || grid.clamped[i]) continue;
                if (!fit_mask.empty() && !fit_mask[i]) continue;
                const double q = grid.values[i];
                if (!(q > c.fit.tail_low && q < c.fit.tail_high)) continue;
                const double model = std::log(fit.C) -
                                     fit.xi * (static_cast<double>(grid.separations[id]) -
                                               fit.v * std::pow(grid.times[it], fit.alpha));
                max_residual = std::max(max_residual, std::abs(std::log(q) - model));
            }
        result["fit"] = {{"alpha", fit.alpha}, {"v", fit.v}, {"xi", fit.xi}, {"C", fit.C}, {"cells", fit.cells}};
        result["residuals"] = {{"mean_squared_log", fit.loss},
                               {"rms_log", std::sqrt(fit.loss)},
                               {"max_abs_log", max_residual}};
        result["window"] = {{"t_min", fit.t_min},
                            {"t_max", fit.t_max},
                            {"delta_min", fit.delta_min},
                            {"delta_max", fit.delta_max},
                            {"tail_low", c.fit.tail_low},
                            {"tail_high", c.fit.tail_high}};
        result["front_collapse"] = fit.front_fitted
                                       ? json{{"alpha", fit.front_alpha},
                                              {"v", fit.front_v},
                                              {"r_squared", fit.front_r_squared},
                                              {"epsilon", c.fit.front_epsilon}}
                                       : json(nullptr);
        result["coverage"] = bound_coverage(grid, fit, c.c_factor, test_mask);
    } catch (const InvalidArgument& e) {
        result["fit"] = nullptr;
        fail(out, meta, std::string("fit precondition: ") + e.what());
    }
    emit_csv(out, c, "cone.csv", table, meta);
    emit_json(out, c, "cone_fit.json", result, meta);
    return out;
}

CommandOutcome cmd_dimer_compare(const ExperimentConfig& c) {
    const auto times = c.t.points();
    const auto horizons = c.moments_horizon.points();
    check_reflection_plan(c.field.length, std::max(max_of(times), max_of(horizons)), probe_scale(c.probe),
                          c.margin);
    CommandOutcome out;
    OutputMeta meta = meta_for("dimer_compare", c);
    const auto orders = c.p.points();

    FieldSpec reference = c.field;
    reference.kind = FieldKind::sturmian;
    reference.lambda = c.dimer.reference_lambda;
    std::vector<FieldSpec> dimers;
    for (double seed : c.dimer.seeds) {
        FieldSpec s;
        s.kind = FieldKind::dimer;
        s.lambda = c.dimer.lambda;
        s.seed = static_cast<std::uint64_t>(seed);
        s.length = c.field.length;
        dimers.push_back(s);
    }

    // moments[i][j][k]: order i, horizon j, model k (0 = reference, 1.. = dimer seeds)
    const std::size_t models = dimers.size() + 1;
    std::vector<std::vector<std::vector<MomentResult>>> moments(
        orders.size(), std::vector<std::vector<MomentResult>>(horizons.size(), std::vector<MomentResult>(models)));
    std::vector<TransportProfile> dimer_profiles;
    TransportProfile reference_profile;
    for (std::size_t k = 0; k < models; ++k) {
        const EigenSystem eig = solve(make_field(k == 0 ? reference : dimers[k - 1]));
        auto profile = transport_profile(eig, times, c.epsilon, c.probe, c.margin, c.workers);
        if (k == 0) reference_profile = std::move(profile);
        else dimer_profiles.push_back(std::move(profile));
        for (std::size_t i = 0; i < orders.size(); ++i)
            for (std::size_t j = 0; j < horizons.size(); ++j)
                moments[i][j][k] = time_averaged_moment(eig, orders[i], horizons[j], kCesaroPoints, c.margin);
    }

    json result;
    result["probe"] = std::string(to_string(c.probe));
    result["epsilon"] = c.epsilon;
    std::optional<double> ref_alpha, dimer_alpha;
    try {
        const auto e = fit_alpha(reference_profile);
        result["reference"] = {{"lambda", reference.lambda}, {"estimate", estimate_json(e)}};
        ref_alpha = e.alpha_hat;
    } catch (const InvalidArgument& e) {
        result["reference"] = {{"lambda", reference.lambda}, {"estimate", nullptr}};
        fail(out, meta, std::string("reference fit precondition: ") + e.what());
    }
    try {
        const auto avg = disorder_averaged_fit(dimer_profiles);
        json per_seed = json::array();
        for (std::size_t k = 0; k < avg.per_realization.size(); ++k)
            per_seed.push_back({{"seed", dimers[k].seed}, {"estimate", estimate_json(avg.per_realization[k])}});
        result["dimer"] = {{"lambda", c.dimer.lambda},
                           {"averaged", estimate_json(avg.averaged)},
                           {"spread", avg.spread},
                           {"per_seed", per_seed}};
        dimer_alpha = avg.averaged.alpha_hat;
    } catch (const InvalidArgument& e) {
        result["dimer"] = {{"lambda", c.dimer.lambda}, {"averaged", nullptr}};
        fail(out, meta, std::string("dimer fit precondition: ") + e.what());
    }
    result["difference"] = ref_alpha && dimer_alpha ? json(*dimer_alpha - *ref_alpha) : json(nullptr);

    Table table({"model", "p", "T", "moment", "flag"});
    for (std::size_t i = 0; i < orders.size(); ++i) {
        for (std::size_t j = 0; j < horizons.size(); ++j) {
            const auto& row = moments[i][j];
            table.add_row({"reference", format_double(orders[i]), format_double(horizons[j]),
                           format_double(row[0].value), flag(row[0].reflection_safe)});
            double sum = 0.0;
            bool safe = true;
            for (std::size_t k = 1; k < models; ++k) {
                sum += row[k].value;
                safe = safe && row[k].reflection_safe;
            }
            table.add_row({"dimer_mean", format_double(orders[i]), format_double(horizons[j]),
                           format_double(sum / static_cast<double>(models - 1)), flag(safe)});
        }
    }
    emit_csv(out, c, "moments.csv", table, meta);
    emit_json(out, c, "dimer_compare.json", result, meta);
    return out;
}

CommandOutcome cmd_oracle(const ExperimentConfig& c) {
    CommandOutcome out;
    OutputMeta meta = meta_for("oracle", c);
    const double tol = c.oracle.tolerance;
    json checks = json::array();
    json info = json::array();
    const auto check = [&](const std::string& name, double lambda, double t, double value, double limit, bool passed) {
        checks.push_back({{"check", name}, {"lambda", lambda}, {"t", t}, {"value", value}, {"limit", limit},
                          {"passed", passed}});
        if (!passed) fail(out, meta, "check " + name + " failed at lambda=" + format_double(lambda) +
                                         " t=" + format_double(t));
    };

    const double car = car_deviation(c.oracle.sites);
    check("anticommutation", 0.0, 0.0, car, tol, car <= tol);
    for (double lambda : c.oracle.lambdas) {
        FieldSpec spec = c.field;
        spec.kind = FieldKind::sturmian;
        spec.lambda = lambda;
        spec.length = c.oracle.sites;
        const Field field = make_field(spec);
        for (double t : c.oracle.times) {
            const auto r = bound_chain(field, t, tol, c.oracle.seed);
            check("commutator_identity", lambda, t, r.identity_deviation, tol, r.identity_deviation <= tol);
            check("entrywise_dynamics", lambda, t, r.entrywise_deviation, tol, r.entrywise_deviation <= tol);
            check("coefficient_tail", lambda, t, r.tail_deviation, tol, r.tail_deviation <= tol);
            check("spin_bound", lambda, t, static_cast<double>(r.spin.violations), 0.0, r.spin.violations == 0);
            check("fermion_bound_doubled", lambda, t, static_cast<double>(r.fermion_doubled.violations), 0.0,
                  r.fermion_doubled.violations == 0);
            check("trial_lower_bound", lambda, t, static_cast<double>(r.lower.violations), 0.0,
                  r.lower.violations == 0);
            info.push_back({{"quantity", "fermion_bound_single"},
                            {"lambda", lambda},
                            {"t", t},
                            {"violations", r.fermion.violations},
                            {"checks", r.fermion.checks},
                            {"worst_ratio", r.fermion.worst_ratio}});
        }
    }
    json result;
    result["sites"] = c.oracle.sites;
    result["tolerance"] = tol;
    result["checks"] = checks;
    result["informational"] = info;
    result["all_passed"] = meta.ok;
    emit_json(out, c, "oracle.json", result, meta);
    return out;
}

CommandOutcome cmd_sweep(const ExperimentConfig& c) {
    const auto times = c.t.points();
    check_reflection_plan(c.field.length, max_of(times), probe_scale(c.probe), c.margin);
    CommandOutcome out;
    OutputMeta meta = meta_for("sweep", c);
    Table table({"lambda", "alpha_hat", "stderr", "r_squared", "samples", "asymptotic", "status"});
    for (double lambda : c.sweep_lambda.points()) {
        const EigenSystem eig = solve(make_field(with_lambda(c.field, lambda)));
        const auto profile = transport_profile(eig, times, c.epsilon, c.probe, c.margin, c.workers);
        const std::string asym = format_double(asymptotic_exponent(lambda));
        try {
            const auto e = fit_alpha(profile);
            table.add_row({format_double(lambda), format_double(e.alpha_hat), format_double(e.stderr_),
                           format_double(e.r_squared), std::to_string(e.samples), asym, "ok"});
        } catch (const InvalidArgument& e) {
            table.add_row({format_double(lambda), "nan", "nan", "nan", "0", asym, "fit_failed"});
            fail(out, meta, "fit precondition at lambda=" + format_double(lambda) + ": " + e.what());
        }
    }
    emit_csv(out, c, "sweep.csv", table, meta);
    return out;
}

}  // namespace lrcone
