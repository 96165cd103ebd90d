// sweep.hpp: regime maps over a two-parameter grid.

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "semiq/analysis.hpp"
#include "semiq/errors.hpp"
#include "semiq/integrator.hpp"
#include "semiq/io.hpp"
#include "semiq/model.hpp"

namespace semiq {

inline double& param_ref(ModelParams& p, std::string_view name) {
    if (name == "eps") return p.eps;
    if (name == "gamma") return p.gamma;
    if (name == "delta") return p.delta;
    if (name == "alpha") return p.alpha;
    if (name == "omega") return p.omega;
    throw ConfigError("unknown parameter name '" + std::string(name) + "'");
}

struct SweepAxis {
    std::string name;
    std::vector<double> values;

    /// `steps` evenly spaced values from lo to hi inclusive; steps >= 2.
    static SweepAxis linspace(std::string name, double lo, double hi, std::size_t steps) {
        if (steps < 2) throw ConfigError("sweep axis '" + name + "': step count must be >= 2");
        if (!std::isfinite(lo) || !std::isfinite(hi)) throw ConfigError("sweep axis '" + name + "': non-finite bounds");
        SweepAxis a{std::move(name), {}};
        a.values.reserve(steps);
        for (std::size_t i = 0; i < steps; ++i)
            a.values.push_back(i + 1 == steps ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(steps - 1));
        return a;
    }
};

/// Re-derives the initial state per cell from fixed (E_eff, I).
struct ConstrainedInitial {
    double e_eff{4.8};
    double i_inv{4.0};
    double om0{0.0};
    double op0{0.0};
    double x0{1.0};
    double dn0{0.0};
    double momentum_sign{-1.0};

    SystemState build(const ModelParams& p) const {
        return make_initial(e_eff, i_inv, om0, op0, x0, dn0, p, momentum_sign);
    }
};

using InitialRecipe = std::variant<SystemState, ConstrainedInitial>;

inline SystemState build_initial(const InitialRecipe& r, const ModelParams& p) {
    if (const auto* s = std::get_if<SystemState>(&r)) return *s;
    return std::get<ConstrainedInitial>(r).build(p);
}

struct SweepSpec {
    SweepAxis axis1;
    SweepAxis axis2;
    ModelParams fixed;
    InitialRecipe initial{ConstrainedInitial{}};
    IntegratorSettings settings;
    AnalysisBudget budget;
    std::string output_path;  // empty: do not write
    unsigned workers{0};      // 0: hardware concurrency

    void validate() const {
        for (const SweepAxis* a : {&axis1, &axis2}) {
            ModelParams probe;
            param_ref(probe, a->name);
            if (a->values.empty()) throw ConfigError("sweep axis '" + a->name + "' has no values");
            for (double v : a->values)
                if (!std::isfinite(v)) throw ConfigError("sweep axis '" + a->name + "': non-finite value");
        }
        if (axis1.name == axis2.name) throw ConfigError("sweep axes must name distinct parameters");
        settings.validate();
        budget.validate();
    }
};

enum class CellStatus { Ok, Skipped, Failed };

inline std::string_view to_string(CellStatus s) {
    switch (s) {
    case CellStatus::Ok: return "ok";
    case CellStatus::Skipped: return "skipped";
    case CellStatus::Failed: return "failed";
    }
    return "?";
}

struct CellRecord {
    std::size_t i1{}, i2{};
    double v1{}, v2{};
    CellStatus status{CellStatus::Ok};
    std::string message;  // reason for skip/failure
    std::optional<RegimeClass> regime;
    double lambda_max{std::numeric_limits<double>::quiet_NaN()};
    double standard_error{std::numeric_limits<double>::quiet_NaN()};
    double divergence_time{std::numeric_limits<double>::quiet_NaN()};
};

struct RegimeMap {
    std::string axis1_name, axis2_name;
    std::size_t n1{0}, n2{0};
    std::vector<CellRecord> cells;  // row-major in (axis1 index, axis2 index)

    const CellRecord& at(std::size_t i1, std::size_t i2) const { return cells[i1 * n2 + i2]; }
};

inline CellRecord run_cell(const SweepSpec& spec, std::size_t i1, std::size_t i2) {
    CellRecord rec;
    rec.i1 = i1;
    rec.i2 = i2;
    rec.v1 = spec.axis1.values[i1];
    rec.v2 = spec.axis2.values[i2];

    ModelParams p = spec.fixed;
    param_ref(p, spec.axis1.name) = rec.v1;
    param_ref(p, spec.axis2.name) = rec.v2;

    SystemState s0;
    try {
        check_params(p);
        s0 = build_initial(spec.initial, p);
    } catch (const Error& e) {
        rec.status = CellStatus::Skipped;
        rec.message = e.what();
        return rec;
    }
    try {
        const RegimeLabel lab = classify_regime(s0, p, spec.settings, spec.budget);
        rec.regime = lab.label;
        if (lab.evidence.lyapunov) {
            rec.lambda_max = lab.evidence.lyapunov->lambda_max;
            rec.standard_error = lab.evidence.lyapunov->standard_error;
        }
        if (lab.evidence.divergence_time) rec.divergence_time = *lab.evidence.divergence_time;
    } catch (const Error& e) {
        rec.status = CellStatus::Failed;
        rec.message = e.what();
    }
    return rec;
}

namespace detail {

inline std::string csv_safe(std::string s) {
    std::replace(s.begin(), s.end(), ',', ';');
    std::replace(s.begin(), s.end(), '\n', ' ');
    return s;
}

} // namespace detail

inline constexpr std::string_view kRegimeHeader =
    "axis1_name,axis1_value,axis2_name,axis2_value,regime,lambda_max,stderr,divergence_time,status";

inline void write_regime_csv(std::ostream& os, const RegimeMap& map) {
    os << kRegimeHeader << '\n';
    for (const CellRecord& c : map.cells) {
        std::string status(to_string(c.status));
        if (!c.message.empty()) status += ": " + detail::csv_safe(c.message);
        os << map.axis1_name << ',' << io::fmt17(c.v1) << ',' << map.axis2_name << ','
           << io::fmt17(c.v2) << ',' << (c.regime ? to_string(*c.regime) : "None") << ','
           << io::fmt17(c.lambda_max) << ',' << io::fmt17(c.standard_error) << ','
           << io::fmt17(c.divergence_time) << ',' << status << '\n';
    }
}

/// Rebuilds the map from its CSV form (grid indices are recovered from the
/// order of distinct axis values).
inline RegimeMap read_regime_csv(std::istream& is) {
    const auto lines = io::read_lines(is);
    if (lines.empty() || lines.front() != kRegimeHeader) throw IoError("regime csv: bad header");
    RegimeMap map;
    std::vector<double> seen1, seen2;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        const auto f = io::split_csv(lines[i]);
        if (f.size() != 9) throw IoError("regime csv: expected 9 fields on line " + std::to_string(i + 1));
        CellRecord c;
        map.axis1_name = std::string(f[0]);
        map.axis2_name = std::string(f[2]);
        c.v1 = io::parse_double(f[1]);
        c.v2 = io::parse_double(f[3]);
        const std::string_view reg = f[4];
        for (RegimeClass rc : {RegimeClass::Periodic, RegimeClass::Quasiperiodic, RegimeClass::Chaotic,
                               RegimeClass::Divergent, RegimeClass::Inconclusive})
            if (reg == to_string(rc)) c.regime = rc;
        c.lambda_max = io::parse_double(f[5]);
        c.standard_error = io::parse_double(f[6]);
        c.divergence_time = io::parse_double(f[7]);
        const std::string_view st = f[8];
        const std::string_view head = st.substr(0, st.find(':'));
        c.status = head == "ok" ? CellStatus::Ok : head == "skipped" ? CellStatus::Skipped : CellStatus::Failed;
        if (const auto colon = st.find(": "); colon != std::string_view::npos)
            c.message = std::string(st.substr(colon + 2));
        auto index_of = [](std::vector<double>& seen, double v) {
            const auto it = std::find(seen.begin(), seen.end(), v);
            if (it != seen.end()) return static_cast<std::size_t>(it - seen.begin());
            seen.push_back(v);
            return seen.size() - 1;
        };
        c.i1 = index_of(seen1, c.v1);
        c.i2 = index_of(seen2, c.v2);
        map.cells.push_back(std::move(c));
    }
    map.n1 = seen1.size();
    map.n2 = seen2.size();
    return map;
}

/// Classifies every grid cell. Cells run on a pool of `spec.workers` threads;
/// each writes only its own slot, so the map does not depend on scheduling.
inline RegimeMap run_sweep(const SweepSpec& spec) {
    spec.validate();

    std::ofstream out;
    if (!spec.output_path.empty()) out = io::open_for_write(spec.output_path);

    RegimeMap map;
    map.axis1_name = spec.axis1.name;
    map.axis2_name = spec.axis2.name;
    map.n1 = spec.axis1.values.size();
    map.n2 = spec.axis2.values.size();
    const std::size_t n = map.n1 * map.n2;
    map.cells.resize(n);

    unsigned workers = spec.workers ? spec.workers : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));

    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t k = next++; k < n; k = next++)
            map.cells[k] = run_cell(spec, k / map.n2, k % map.n2);
    };
    {
        std::vector<std::jthread> pool;
        for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
        work();
    }

    if (out.is_open()) {
        write_regime_csv(out, map);
        if (!out) throw IoError("failed writing '" + spec.output_path + "'");
    }
    return map;
}

} // namespace semiq
