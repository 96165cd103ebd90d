// cli.hpp: the `semiq` command-line driver.
//
// Exit codes: 0 success, 1 configuration error, 2 numerical failure,
// 3 unexpected divergence.

#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "semiq/analysis.hpp"
#include "semiq/config.hpp"
#include "semiq/errors.hpp"
#include "semiq/integrator.hpp"
#include "semiq/io.hpp"
#include "semiq/linear_oracle.hpp"
#include "semiq/model.hpp"
#include "semiq/svg.hpp"
#include "semiq/sweep.hpp"

namespace semiq::cli {

enum ExitCode : int { kOk = 0, kConfigError = 1, kNumericalFailure = 2, kUnexpectedDivergence = 3 };

struct Options {
    std::string command;
    std::string config_path;
    std::string preset;
    std::string out_dir{"."};
    bool out_given{false};
    bool plot{false};
    bool expect_divergence{false};
    int families{0};
    std::string direction;  // empty: not given
    std::string mode{"classify"};
};

namespace detail {

using Clock = std::chrono::steady_clock;

inline double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

inline json read_json_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open config '" + path + "'");
    try {
        return json::parse(is);
    } catch (const json::parse_error& e) {
        throw ConfigError("config '" + path + "': " + e.what());
    }
}

inline json load_document(const Options& o) {
    json doc = json::object();
    if (!o.preset.empty()) doc = preset_json(parse_preset(o.preset));
    if (!o.config_path.empty()) doc = merge_config(std::move(doc), read_json_file(o.config_path));
    else if (o.preset.empty()) throw ConfigError("one of --config or --preset is required");
    return doc;
}

inline std::filesystem::path prepare_out(const Options& o) {
    std::filesystem::path dir(o.out_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir))
        throw IoError("cannot create output directory '" + o.out_dir + "'");
    return dir;
}

inline void write_json(const std::filesystem::path& path, const json& j) {
    std::ofstream os = io::open_for_write(path.string());
    os << j.dump(2) << '\n';
    if (!os) throw IoError("failed writing '" + path.string() + "'");
}

template <class Fn>
void write_file(const std::filesystem::path& path, Fn&& fn) {
    std::ofstream os = io::open_for_write(path.string());
    fn(os);
    if (!os) throw IoError("failed writing '" + path.string() + "'");
}

inline std::optional<Direction> parse_direction(const std::string& s) {
    if (s.empty()) return std::nullopt;
    if (s == "+1" || s == "1") return Direction::Positive;
    if (s == "-1") return Direction::Negative;
    if (s == "both") return Direction::Both;
    throw ConfigError("--direction must be one of +1, -1, both");
}

inline json complex_json(std::complex<double> z) { return json::array({z.real(), z.imag()}); }

inline json regime_json(const ModelParams& p) {
    const QuantumRegime r = classify(p);
    json j = {{"label", to_string(r.label)},
              {"eta", complex_json(r.eta)},
              {"lambda_plus", complex_json(r.lambda_plus)},
              {"lambda_minus", complex_json(r.lambda_minus)}};
    if (r.label != RegimeKind::Critical) {
        const auto [u, v] = bogoliubov_uv(p);
        j["u"] = complex_json(u);
        j["v"] = complex_json(v);
    }
    return j;
}

inline json metadata(const Options& o, const RunConfig& cfg, const SystemState& s0) {
    return {{"command", o.command},
            {"preset", o.preset.empty() ? json(nullptr) : json(o.preset)},
            {"params", to_json(cfg.params)},
            {"initial_state", to_json(s0)},
            {"invariants", {{"e_eff", effective_energy(s0, cfg.params)}, {"i_inv", invariant_I(s0)}}},
            {"integrator", to_json(cfg.integrator)},
            {"t_end", cfg.t_end}};
}

inline const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                       "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

inline int divergence_exit(const Options& o) {
    return o.expect_divergence ? kOk : kUnexpectedDivergence;
}

} // namespace detail

inline int cmd_simulate(const Options& o, std::ostream& log) {
    const auto t0 = detail::Clock::now();
    const RunConfig cfg = parse_run_config(detail::load_document(o));
    const auto dir = detail::prepare_out(o);
    const SystemState s0 = build_initial(cfg.initial, cfg.params);
    const Trajectory traj = integrate(s0, cfg.params, cfg.t_end, cfg.integrator, cfg.sample_interval);

    detail::write_file(dir / "trajectory.csv",
                       [&](std::ostream& os) { io::write_trajectory_csv(os, traj, cfg.params); });

    const InvariantPair inv0 = invariants(s0, cfg.params);
    double de = 0.0, di = 0.0;
    for (const Sample& s : traj.samples) {
        const InvariantPair inv = invariants(s.s, cfg.params);
        de = std::max(de, std::abs(inv.e_eff - inv0.e_eff));
        di = std::max(di, std::abs(inv.i_inv - inv0.i_inv));
    }
    json summary = detail::metadata(o, cfg, s0);
    summary["sample_interval"] = cfg.sample_interval;
    summary["status"] = to_string(traj.status);
    summary["t_div"] = traj.status == RunStatus::Diverged ? json(traj.t_div) : json(nullptr);
    summary["t_final"] = traj.t_final;
    summary["samples"] = traj.samples.size();
    summary["steps"] = {{"accepted", traj.stats.accepted}, {"rejected", traj.stats.rejected},
                        {"h_min", traj.stats.h_min}, {"h_max", traj.stats.h_max}};
    summary["invariant_drift"] = {{"e_eff_max_abs", de}, {"i_inv_max_abs", di}};
    summary["wall_time_s"] = detail::seconds_since(t0);
    detail::write_json(dir / "summary.json", summary);

    if (o.plot) {
        svg::Plot plot{"trajectory", "t", "value", {}};
        svg::Series n{"<N>", {}, {}, detail::kPalette[0]}, e{"E_eff", {}, {}, detail::kPalette[1]},
            i{"I", {}, {}, detail::kPalette[2]};
        for (const Sample& s : traj.samples) {
            n.xs.push_back(s.t), n.ys.push_back(s.s.n1 - 1.0);
            e.xs.push_back(s.t), e.ys.push_back(effective_energy(s.s, cfg.params));
            i.xs.push_back(s.t), i.ys.push_back(invariant_I(s.s));
        }
        plot.series = {n, e, i};
        detail::write_file(dir / "trajectory.svg", [&](std::ostream& os) { svg::write(os, plot); });
    }

    switch (traj.status) {
    case RunStatus::Completed: return kOk;
    case RunStatus::Diverged:
        log << "simulate: trajectory diverged at t=" << traj.t_div << '\n';
        return detail::divergence_exit(o);
    case RunStatus::StepBudgetExhausted:
        log << "simulate: step budget exhausted at t=" << traj.t_final << '\n';
        return kNumericalFailure;
    }
    return kNumericalFailure;
}

inline int cmd_oracle(const Options& o, std::ostream& log) {
    const auto t0 = detail::Clock::now();
    const RunConfig cfg = parse_run_config(detail::load_document(o));
    const auto dir = detail::prepare_out(o);
    const ModelParams& p = cfg.params;

    json report = {{"mode", o.mode}, {"params", to_json(p)}, {"regime", detail::regime_json(p)}};
    if (o.mode == "classify") {
        detail::write_json(dir / "oracle.json", report);
        return kOk;
    }
    if (o.mode != "linear" && o.mode != "critical")
        throw ConfigError("--mode must be one of linear, critical, classify");
    if (p.alpha != 0.0)
        throw ConfigError("oracle: evolution comparisons need alpha = 0 (got " + io::fmt17(p.alpha) + ")");
    const bool critical = classify(p).label == RegimeKind::Critical;
    if (o.mode == "critical" && std::abs(p.delta) != p.eps)
        throw ConfigError("oracle --mode critical needs |delta| == eps");
    if (o.mode == "linear" && critical)
        throw CriticalityError("oracle --mode linear: |delta| == eps, use --mode critical");

    const SystemState s0 = build_initial(cfg.initial, p);
    const Trajectory traj = integrate(s0, p, cfg.t_end, cfg.integrator, cfg.sample_interval);
    const QuantumTriple q0 = quantum_part(s0);

    double max_abs = 0.0, max_rel = 0.0, t_last = 0.0;
    std::size_t compared = 0;
    for (const Sample& s : traj.samples) {
        const QuantumTriple q = o.mode == "critical"
                                    ? evolve_critical(q0, p.eps, s.t, p.delta >= 0.0 ? 1 : -1)
                                    : evolve_linear(q0, p.eps, p.delta, s.t);
        if (q.n1 > cfg.n1_cutoff) break;
        const auto [x, pp] = evolve_classical(s0.x, s0.p, p.omega, s.t);
        const double ref[5] = {q.n1, q.om, q.op, x, pp};
        const double num[5] = {s.s.n1, s.s.om, s.s.op, s.s.x, s.s.p};
        double dev = 0.0, scale = 0.0;
        for (int k = 0; k < 5; ++k) {
            dev = std::max(dev, std::abs(num[k] - ref[k]));
            scale = std::max(scale, std::abs(ref[k]));
        }
        max_abs = std::max(max_abs, dev);
        if (scale > 0.0) max_rel = std::max(max_rel, dev / scale);
        t_last = s.t;
        ++compared;
    }
    report["initial_state"] = to_json(s0);
    report["integrator"] = to_json(cfg.integrator);
    report["t_end"] = cfg.t_end;
    report["n1_cutoff"] = cfg.n1_cutoff;
    report["samples_compared"] = compared;
    report["t_compared_max"] = t_last;
    report["max_abs"] = max_abs;
    report["max_rel"] = max_rel;
    report["status"] = to_string(traj.status);
    report["wall_time_s"] = detail::seconds_since(t0);
    detail::write_json(dir / "oracle.json", report);
    log << "oracle: max_abs=" << max_abs << " max_rel=" << max_rel << " over " << compared << " samples\n";
    return kOk;
}

inline int cmd_poincare(const Options& o, std::ostream& log) {
    const auto t0 = detail::Clock::now();
    const RunConfig cfg = parse_run_config(detail::load_document(o));
    const auto dir = detail::prepare_out(o);
    const std::optional<Direction> given = detail::parse_direction(o.direction);
    const Direction filter = given.value_or(Direction::Both);
    const int plot_dir = given ? static_cast<int>(*given) : +1;  // 0 keeps both

    struct Member {
        std::string file;
        std::optional<double> om0;
        PoincareSection sec;
        std::string skipped;
    };
    std::vector<Member> members;

    if (o.families < 0) throw ConfigError("--families must be >= 0");
    if (o.families > 0) {
        const auto* c = std::get_if<ConstrainedInitial>(&cfg.initial);
        if (!c) throw ConfigError("--families needs a 'constraint' initial condition block");
        std::pair<double, double> grid;
        if (cfg.ominus0_grid) {
            grid = *cfg.ominus0_grid;
        } else {
            // Feasible band for the held (op0, x0): n1 <= n1_max from the energy budget.
            const ModelParams& p = cfg.params;
            const double n1_max =
                1.0 + (c->e_eff - 0.5 * p.omega * c->x0 * c->x0 - (p.delta + p.alpha * c->x0) * c->op0) / p.eps;
            const double om_sq = n1_max * n1_max - c->i_inv - c->op0 * c->op0;
            if (!(om_sq > 0.0)) throw InfeasibleConstraint("E_eff", "family: no feasible <O->0 range");
            const double om_max = 0.98 * std::sqrt(om_sq);
            grid = {-om_max, om_max};
        }
        const int n = o.families;
        for (int k = 0; k < n; ++k) {
            ConstrainedInitial ck = *c;
            if (n > 1) ck.om0 = grid.first + (grid.second - grid.first) * k / (n - 1);
            char name[48];
            std::snprintf(name, sizeof name, "section_family_%02d.csv", k);
            Member m{name, ck.om0, {}, {}};
            try {
                m.sec = poincare(ck.build(cfg.params), cfg.params, cfg.t_end, cfg.integrator, filter);
            } catch (const InfeasibleConstraint& e) {
                m.skipped = e.what();
            } catch (const DomainError& e) {
                m.skipped = e.what();
            }
            members.push_back(std::move(m));
        }
    } else {
        const SystemState s0 = build_initial(cfg.initial, cfg.params);
        members.push_back({"section.csv", std::nullopt,
                           poincare(s0, cfg.params, cfg.t_end, cfg.integrator, filter), {}});
    }

    json summary = detail::metadata(o, cfg, members.front().skipped.empty()
                                               ? members.front().sec.initial
                                               : build_initial(cfg.initial, cfg.params));
    summary["direction"] = static_cast<int>(filter);
    json list = json::array();
    bool any_empty = false;
    for (const Member& m : members) {
        json mj = {{"file", m.file}};
        if (m.om0) mj["ominus0"] = *m.om0;
        if (!m.skipped.empty()) {
            mj["status"] = "Skipped";
            mj["message"] = m.skipped;
            list.push_back(mj);
            continue;
        }
        detail::write_file(dir / m.file, [&](std::ostream& os) { io::write_section_csv(os, m.sec); });
        mj["initial_state"] = to_json(m.sec.initial);
        mj["crossings"] = m.sec.points.size();
        mj["status"] = to_string(m.sec.status);
        mj["t_div"] = m.sec.status == RunStatus::Diverged ? json(m.sec.t_div) : json(nullptr);
        mj["t_final"] = m.sec.t_final;
        any_empty = any_empty || m.sec.points.empty();
        list.push_back(mj);
    }
    summary["members"] = list;
    if (any_empty) summary["warning"] = "empty section: no X=0 crossings within t_end";
    summary["wall_time_s"] = detail::seconds_since(t0);
    detail::write_json(dir / "summary.json", summary);

    if (o.plot) {
        svg::Plot plot{"Poincare section X=0", "<O->", "<O+>", {}};
        std::size_t k = 0;
        for (const Member& m : members) {
            svg::Series s{m.file, {}, {}, detail::kPalette[k++ % std::size(detail::kPalette)], true};
            for (const SectionPoint& q : m.sec.points)
                if (plot_dir == 0 || q.direction == plot_dir) s.xs.push_back(q.om), s.ys.push_back(q.op);
            plot.series.push_back(std::move(s));
        }
        detail::write_file(dir / "section.svg", [&](std::ostream& os) { svg::write(os, plot); });
    }

    if (any_empty) log << "poincare: warning: empty section\n";
    // Family members that escape are part of the family's phenomenology and
    // are reported per member; only a single requested orbit maps to exit 3.
    if (o.families == 0) {
        const PoincareSection& sec = members.front().sec;
        if (sec.status == RunStatus::Diverged) {
            log << "poincare: trajectory diverged at t=" << sec.t_div << '\n';
            return detail::divergence_exit(o);
        }
        if (sec.status == RunStatus::StepBudgetExhausted) return kNumericalFailure;
    }
    return kOk;
}

inline int cmd_lyapunov(const Options& o, std::ostream& log) {
    const auto t0 = detail::Clock::now();
    const RunConfig cfg = parse_run_config(detail::load_document(o));
    const auto dir = detail::prepare_out(o);
    const SystemState s0 = build_initial(cfg.initial, cfg.params);
    const AnalysisBudget& b = cfg.analysis;

    json report = detail::metadata(o, cfg, s0);
    report["transient"] = b.transient;
    report["total"] = b.total;
    report["renorm_interval"] = b.renorm_interval;
    LyapunovEstimate est;
    try {
        est = largest_lyapunov(s0, cfg.params, cfg.integrator, b.transient, b.total, b.renorm_interval);
    } catch (const DivergentTrajectory& e) {
        report["status"] = "Diverged";
        report["t_div"] = e.divergence_time();
        report["lambda_max"] = nullptr;
        report["standard_error"] = nullptr;
        report["message"] = e.what();
        report["wall_time_s"] = detail::seconds_since(t0);
        detail::write_json(dir / "lyapunov.json", report);
        log << "lyapunov: " << e.what() << '\n';
        return kUnexpectedDivergence;
    }
    report["lambda_max"] = est.lambda_max;
    report["standard_error"] = est.standard_error;
    report["transient"] = est.transient_discarded;
    report["averaged_until"] = est.total_time;
    report["renorm_count"] = est.renorm_count;
    report["status"] = to_string(est.status);
    report["t_div"] = est.status == RunStatus::Diverged ? json(est.t_div) : json(nullptr);
    report["wall_time_s"] = detail::seconds_since(t0);
    detail::write_json(dir / "lyapunov.json", report);
    log << "lyapunov: lambda_max=" << est.lambda_max << " +- " << est.standard_error << '\n';
    return est.status == RunStatus::StepBudgetExhausted ? kNumericalFailure : kOk;
}

inline int cmd_sweep(const Options& o, std::ostream& log) {
    const auto t0 = detail::Clock::now();
    if (o.config_path.empty()) throw ConfigError("sweep needs --config SPEC");
    SweepSpec spec = parse_sweep_spec(detail::read_json_file(o.config_path));
    const auto dir = detail::prepare_out(o);
    if (o.out_given || spec.output_path.empty()) spec.output_path = (dir / "regimes.csv").string();
    const RegimeMap map = run_sweep(spec);

    json counts = json::object();
    for (const CellRecord& c : map.cells) {
        const std::string key = c.regime ? std::string(to_string(*c.regime)) : std::string(to_string(c.status));
        counts[key] = counts.value(key, 0) + 1;
    }
    json summary = {{"command", "sweep"},
                    {"axis1", {{"name", map.axis1_name}, {"values", spec.axis1.values}}},
                    {"axis2", {{"name", map.axis2_name}, {"values", spec.axis2.values}}},
                    {"fixed", to_json(spec.fixed)},
                    {"integrator", to_json(spec.settings)},
                    {"analysis", to_json(spec.budget)},
                    {"output", spec.output_path},
                    {"counts", counts},
                    {"wall_time_s", detail::seconds_since(t0)}};
    detail::write_json(dir / "summary.json", summary);
    log << "sweep: " << map.cells.size() << " cells written to " << spec.output_path << '\n';
    return kOk;
}

/// Parses argv, dispatches and maps every failure onto the exit-code contract.
inline int run(int argc, const char* const* argv, std::ostream& log = std::cerr) {
    Options o;
    CLI::App app{"semiq: semiquantum boson/oscillator dynamics"};
    app.require_subcommand(1);
    app.add_option("--config", o.config_path, "JSON configuration (sweep: sweep specification)");
    app.add_option("--preset", o.preset, "figure preset: fig1a..fig1c, fig2a..fig2d, fig3a, fig3b, fig4");
    CLI::Option* out_opt = app.add_option("--out", o.out_dir, "output directory");
    app.add_flag("--plot", o.plot, "also write SVG plots");
    app.add_flag("--expect-divergence", o.expect_divergence, "treat divergence as success");
    app.add_option("--families", o.families, "poincare: N initial conditions at fixed (E_eff, I)");
    app.add_option("--direction", o.direction, "poincare crossing filter: +1, -1 or both");

    for (const char* name : {"simulate", "oracle", "poincare", "lyapunov", "sweep"}) {
        CLI::App* sub = app.add_subcommand(name);
        sub->fallthrough();
        if (std::string_view(name) == "oracle")
            sub->add_option("--mode", o.mode, "linear, critical or classify");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        log << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        log << "semiq: " << e.what() << '\n';
        return kConfigError;
    }
    o.command = app.get_subcommands().front()->get_name();
    o.out_given = out_opt->count() > 0;

    try {
        if (o.command == "simulate") return cmd_simulate(o, log);
        if (o.command == "oracle") return cmd_oracle(o, log);
        if (o.command == "poincare") return cmd_poincare(o, log);
        if (o.command == "lyapunov") return cmd_lyapunov(o, log);
        return cmd_sweep(o, log);
    } catch (const DivergentTrajectory& e) {
        log << "semiq: " << e.what() << '\n';
        return kUnexpectedDivergence;
    } catch (const NumericalFailure& e) {
        log << "semiq: numerical failure: " << e.what() << '\n';
        return kNumericalFailure;
    } catch (const Error& e) {
        log << "semiq: " << e.what() << '\n';
        return kConfigError;
    } catch (const json::exception& e) {
        log << "semiq: config: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        log << "semiq: " << e.what() << '\n';
        return kNumericalFailure;
    }
}

} // namespace semiq::cli
