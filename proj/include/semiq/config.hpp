// config.hpp: JSON run configurations, sweep specifications and the
// figure presets.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "json.hpp"

#include "semiq/analysis.hpp"
#include "semiq/errors.hpp"
#include "semiq/integrator.hpp"
#include "semiq/model.hpp"
#include "semiq/sweep.hpp"

namespace semiq {

using json = nlohmann::json;

struct RunConfig {
    ModelParams params;
    InitialRecipe initial{SystemState{2.0, 0.0, 0.0, 1.0, 0.0, 0.0}};
    std::optional<std::pair<double, double>> ominus0_grid;  // family range, constraint mode only
    IntegratorSettings integrator;
    double t_end{1000.0};
    double sample_interval{0.1};
    AnalysisBudget analysis;
    double n1_cutoff{1e6};  // oracle comparisons stop once the reference n1 exceeds this
};

enum class PresetId { fig1a, fig1b, fig1c, fig2a, fig2b, fig2c, fig2d, fig3a, fig3b, fig4 };

inline constexpr std::array<std::pair<PresetId, std::string_view>, 10> kPresetNames{{
    {PresetId::fig1a, "fig1a"}, {PresetId::fig1b, "fig1b"}, {PresetId::fig1c, "fig1c"},
    {PresetId::fig2a, "fig2a"}, {PresetId::fig2b, "fig2b"}, {PresetId::fig2c, "fig2c"},
    {PresetId::fig2d, "fig2d"}, {PresetId::fig3a, "fig3a"}, {PresetId::fig3b, "fig3b"},
    {PresetId::fig4, "fig4"},
}};

inline PresetId parse_preset(std::string_view name) {
    for (const auto& [id, n] : kPresetNames)
        if (n == name) return id;
    throw ConfigError("unknown preset '" + std::string(name) + "'");
}

inline std::string_view to_string(PresetId id) {
    for (const auto& [i, n] : kPresetNames)
        if (i == id) return n;
    return "?";
}

// Initial data of the fig1* and fig4 presets: <N>0 = 1, <O+->0 = 0, X0 = 1.
inline constexpr double kFig1P0 = -2.54950976;
// Representative member of the fixed-(E_eff = 4.8, I = 4) family used for the
// fig2* and fig3* presets; it lies in the chaotic layer at eps = 1.05, alpha = 0.015.
inline constexpr double kFamilyOminus0 = -2.52;

inline json preset_json(PresetId id) {
    const json fig1_initial = {{"n0", 1.0}, {"ominus0", 0.0}, {"oplus0", 0.0},
                               {"x0", 1.0}, {"p0", kFig1P0},  {"dn0", 0.0}};
    const json family = {{"e_eff", 4.8},  {"i_inv", 4.0},           {"ominus0", kFamilyOminus0},
                         {"oplus0", 0.0}, {"x0", 1.0},              {"dn0", 0.0},
                         {"momentum_sign", -1.0}};
    auto params = [](double eps, double alpha, double delta = 1.0) {
        return json{{"eps", eps}, {"gamma", 0.0}, {"delta", delta}, {"alpha", alpha}, {"omega", 1.0}};
    };
    auto fig1 = [&](double eps, double alpha) {
        return json{{"params", params(eps, alpha)},
                    {"initial", fig1_initial},
                    {"run", {{"t_end", 1000.0}, {"sample_interval", 0.1}}}};
    };
    auto fig23 = [&](double eps, double alpha) {
        return json{{"params", params(eps, alpha)},
                    {"constraint", family},
                    {"run", {{"t_end", 5000.0}, {"sample_interval", 0.5}}}};
    };
    switch (id) {
    case PresetId::fig1a: return fig1(1.05, 0.0001);
    case PresetId::fig1b: return fig1(1.05, 0.015);
    case PresetId::fig1c: return fig1(2.0, 1.1);
    case PresetId::fig2a: return fig23(1.5, 0.015);
    case PresetId::fig2b: return fig23(1.075, 0.015);
    case PresetId::fig2c: return fig23(1.065, 0.015);
    case PresetId::fig2d: return fig23(1.05, 0.015);
    case PresetId::fig3a: return fig23(1.05, 0.0001);
    case PresetId::fig3b: return fig23(1.05, 0.01);
    case PresetId::fig4:
        return json{{"params", params(1.0, 1e-6)},
                    {"initial", fig1_initial},
                    {"run", {{"t_end", 20.0}, {"sample_interval", 0.01}}}};
    }
    throw ConfigError("unknown preset");
}

namespace detail {

inline void check_keys(const json& obj, std::string_view where,
                       std::initializer_list<std::string_view> allowed) {
    if (!obj.is_object()) throw ConfigError(std::string(where) + ": expected an object");
    for (const auto& [k, v] : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), k) == allowed.end())
            throw ConfigError(std::string(where) + ": unknown key '" + k + "'");
    }
}

inline double get_number(const json& obj, std::string_view where, const char* key, double fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number()) throw ConfigError(std::string(where) + "." + key + ": expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(std::string(where) + "." + key + ": not finite");
    return d;
}

inline double require_number(const json& obj, std::string_view where, const char* key) {
    if (!obj.contains(key)) throw ConfigError(std::string(where) + ": missing '" + key + "'");
    return get_number(obj, where, key, 0.0);
}

inline ModelParams parse_params(const json& j) {
    check_keys(j, "params", {"eps", "gamma", "delta", "alpha", "omega"});
    ModelParams p;
    p.eps = get_number(j, "params", "eps", p.eps);
    p.gamma = get_number(j, "params", "gamma", p.gamma);
    p.delta = get_number(j, "params", "delta", p.delta);
    p.alpha = get_number(j, "params", "alpha", p.alpha);
    p.omega = get_number(j, "params", "omega", p.omega);
    try {
        check_params(p);
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
    return p;
}

inline SystemState parse_initial(const json& j) {
    check_keys(j, "initial", {"n0", "ominus0", "oplus0", "x0", "p0", "dn0"});
    SystemState s;
    s.n1 = require_number(j, "initial", "n0") + 1.0;
    s.om = get_number(j, "initial", "ominus0", 0.0);
    s.op = get_number(j, "initial", "oplus0", 0.0);
    s.x = get_number(j, "initial", "x0", 0.0);
    s.p = get_number(j, "initial", "p0", 0.0);
    s.dn = get_number(j, "initial", "dn0", 0.0);
    return s;
}

inline ConstrainedInitial parse_constraint(const json& j,
                                           std::optional<std::pair<double, double>>* grid) {
    check_keys(j, "constraint",
               {"e_eff", "i_inv", "ominus0", "oplus0", "x0", "dn0", "momentum_sign", "ominus0_grid"});
    ConstrainedInitial c;
    c.e_eff = require_number(j, "constraint", "e_eff");
    c.i_inv = require_number(j, "constraint", "i_inv");
    c.om0 = get_number(j, "constraint", "ominus0", 0.0);
    c.op0 = get_number(j, "constraint", "oplus0", 0.0);
    c.x0 = get_number(j, "constraint", "x0", 0.0);
    c.dn0 = get_number(j, "constraint", "dn0", 0.0);
    c.momentum_sign = get_number(j, "constraint", "momentum_sign", -1.0);
    if (j.contains("ominus0_grid")) {
        const json& g = j.at("ominus0_grid");
        if (!g.is_array() || g.size() != 2 || !g[0].is_number() || !g[1].is_number())
            throw ConfigError("constraint.ominus0_grid: expected [min, max]");
        if (grid) *grid = std::pair{g[0].get<double>(), g[1].get<double>()};
    }
    return c;
}

inline IntegratorSettings parse_integrator(const json& j) {
    check_keys(j, "integrator",
               {"abs_tol", "rel_tol", "h_init", "h_max", "divergence_norm", "max_steps"});
    IntegratorSettings s;
    s.abs_tol = get_number(j, "integrator", "abs_tol", s.abs_tol);
    s.rel_tol = get_number(j, "integrator", "rel_tol", s.rel_tol);
    s.h_init = get_number(j, "integrator", "h_init", s.h_init);
    s.h_max = get_number(j, "integrator", "h_max", s.h_max);
    s.divergence_norm = get_number(j, "integrator", "divergence_norm", s.divergence_norm);
    const double steps = get_number(j, "integrator", "max_steps", static_cast<double>(s.max_steps));
    if (!(steps >= 1.0)) throw ConfigError("integrator.max_steps must be >= 1");
    s.max_steps = static_cast<std::size_t>(steps);
    s.validate();
    return s;
}

inline AnalysisBudget parse_analysis(const json& j) {
    check_keys(j, "analysis", {"transient", "total", "renorm_interval", "chaos_threshold"});
    AnalysisBudget b;
    b.transient = get_number(j, "analysis", "transient", b.transient);
    b.total = get_number(j, "analysis", "total", b.total);
    b.renorm_interval = get_number(j, "analysis", "renorm_interval", b.renorm_interval);
    b.chaos_threshold = get_number(j, "analysis", "chaos_threshold", b.chaos_threshold);
    b.validate();
    return b;
}

inline InitialRecipe parse_recipe(const json& j, std::optional<std::pair<double, double>>* grid) {
    const bool has_initial = j.contains("initial");
    const bool has_constraint = j.contains("constraint");
    if (has_initial == has_constraint)
        throw ConfigError("config: exactly one of 'initial' or 'constraint' is required");
    if (has_initial) return parse_initial(j.at("initial"));
    return parse_constraint(j.at("constraint"), grid);
}

} // namespace detail

/// Validates a run configuration document and converts it to RunConfig.
inline RunConfig parse_run_config(const json& j) {
    detail::check_keys(j, "config",
                       {"params", "initial", "constraint", "integrator", "run", "analysis", "oracle"});
    RunConfig cfg;
    if (!j.contains("params")) throw ConfigError("config: missing 'params'");
    cfg.params = detail::parse_params(j.at("params"));
    cfg.initial = detail::parse_recipe(j, &cfg.ominus0_grid);
    if (j.contains("integrator")) cfg.integrator = detail::parse_integrator(j.at("integrator"));
    if (j.contains("analysis")) cfg.analysis = detail::parse_analysis(j.at("analysis"));
    if (j.contains("run")) {
        const json& r = j.at("run");
        detail::check_keys(r, "run", {"t_end", "sample_interval"});
        cfg.t_end = detail::get_number(r, "run", "t_end", cfg.t_end);
        cfg.sample_interval = detail::get_number(r, "run", "sample_interval", cfg.sample_interval);
    }
    if (!(cfg.t_end > 0.0)) throw ConfigError("run.t_end must be > 0");
    if (!(cfg.sample_interval > 0.0)) throw ConfigError("run.sample_interval must be > 0");
    if (j.contains("oracle")) {
        const json& o = j.at("oracle");
        detail::check_keys(o, "oracle", {"n1_cutoff"});
        cfg.n1_cutoff = detail::get_number(o, "oracle", "n1_cutoff", cfg.n1_cutoff);
    }
    return cfg;
}

/// Preset document with `overrides` merged on top (RFC 7386 merge patch).
/// An override that brings its own initial-condition block replaces the
/// preset's block of the other kind.
inline json merge_config(json base, const json& overrides) {
    if (overrides.contains("initial")) base.erase("constraint");
    if (overrides.contains("constraint")) base.erase("initial");
    base.merge_patch(overrides);
    return base;
}

inline SweepAxis parse_axis(const json& j, std::string_view where) {
    detail::check_keys(j, where, {"name", "values", "min", "max", "steps"});
    if (!j.contains("name") || !j.at("name").is_string())
        throw ConfigError(std::string(where) + ": missing 'name'");
    const std::string name = j.at("name").get<std::string>();
    if (j.contains("values")) {
        if (j.contains("min") || j.contains("max") || j.contains("steps"))
            throw ConfigError(std::string(where) + ": give either 'values' or min/max/steps");
        const json& v = j.at("values");
        if (!v.is_array() || v.empty()) throw ConfigError(std::string(where) + ".values: expected a non-empty array");
        SweepAxis a{name, {}};
        for (const json& e : v) {
            if (!e.is_number()) throw ConfigError(std::string(where) + ".values: expected numbers");
            a.values.push_back(e.get<double>());
        }
        return a;
    }
    const double lo = detail::require_number(j, where, "min");
    const double hi = detail::require_number(j, where, "max");
    const double steps = detail::require_number(j, where, "steps");
    if (steps != std::floor(steps) || steps < 2)
        throw ConfigError(std::string(where) + ".steps: must be an integer >= 2");
    return SweepAxis::linspace(name, lo, hi, static_cast<std::size_t>(steps));
}

inline SweepSpec parse_sweep_spec(const json& j) {
    detail::check_keys(j, "sweep", {"axis1", "axis2", "params", "initial", "constraint", "integrator",
                                    "analysis", "output", "workers"});
    SweepSpec spec;
    if (!j.contains("axis1") || !j.contains("axis2")) throw ConfigError("sweep: both 'axis1' and 'axis2' are required");
    spec.axis1 = parse_axis(j.at("axis1"), "axis1");
    spec.axis2 = parse_axis(j.at("axis2"), "axis2");
    if (j.contains("params")) {
        // Axis parameters may make the fixed block incomplete; validate per cell.
        const json& pj = j.at("params");
        detail::check_keys(pj, "params", {"eps", "gamma", "delta", "alpha", "omega"});
        spec.fixed.eps = detail::get_number(pj, "params", "eps", spec.fixed.eps);
        spec.fixed.gamma = detail::get_number(pj, "params", "gamma", spec.fixed.gamma);
        spec.fixed.delta = detail::get_number(pj, "params", "delta", spec.fixed.delta);
        spec.fixed.alpha = detail::get_number(pj, "params", "alpha", spec.fixed.alpha);
        spec.fixed.omega = detail::get_number(pj, "params", "omega", spec.fixed.omega);
    }
    if (j.contains("initial") || j.contains("constraint")) spec.initial = detail::parse_recipe(j, nullptr);
    if (j.contains("integrator")) spec.settings = detail::parse_integrator(j.at("integrator"));
    if (j.contains("analysis")) spec.budget = detail::parse_analysis(j.at("analysis"));
    if (j.contains("output")) {
        if (!j.at("output").is_string()) throw ConfigError("sweep.output: expected a string");
        spec.output_path = j.at("output").get<std::string>();
    }
    if (j.contains("workers")) {
        const double w = detail::get_number(j, "sweep", "workers", 0.0);
        if (w < 0 || w != std::floor(w)) throw ConfigError("sweep.workers: expected a non-negative integer");
        spec.workers = static_cast<unsigned>(w);
    }
    spec.validate();
    return spec;
}

inline json to_json(const ModelParams& p) {
    return {{"eps", p.eps}, {"gamma", p.gamma}, {"delta", p.delta}, {"alpha", p.alpha}, {"omega", p.omega}};
}

inline json to_json(const SystemState& s) {
    return {{"n1", s.n1}, {"ominus", s.om}, {"oplus", s.op}, {"x", s.x}, {"p", s.p}, {"dn", s.dn}};
}

inline json to_json(const IntegratorSettings& s) {
    return {{"abs_tol", s.abs_tol},         {"rel_tol", s.rel_tol},
            {"h_init", s.h_init},           {"h_max", s.h_max},
            {"divergence_norm", s.divergence_norm}, {"max_steps", s.max_steps}};
}

inline json to_json(const AnalysisBudget& b) {
    return {{"transient", b.transient}, {"total", b.total}, {"renorm_interval", b.renorm_interval},
            {"chaos_threshold", b.chaos_threshold}};
}

} // namespace semiq
