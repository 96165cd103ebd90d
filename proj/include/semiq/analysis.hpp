// analysis.hpp: Poincaré sections at X = 0, largest Lyapunov exponent by
// the Benettin method, and regime labelling built on both.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "semiq/errors.hpp"
#include "semiq/integrator.hpp"
#include "semiq/model.hpp"

namespace semiq {

struct SectionPoint {
    double t_cross{};
    double om{};
    double op{};
    double n1{};
    double p{};
    double x{};  // residual of the plane equation, |x| <= 1e-12 (1 + |state|)
    int direction{};
};

struct PoincareSection {
    std::vector<SectionPoint> points;
    Direction filter{Direction::Both};
    ModelParams params;
    SystemState initial;
    RunStatus status{RunStatus::Completed};
    double t_div{std::numeric_limits<double>::quiet_NaN()};
    double t_final{0.0};
};

inline PoincareSection poincare(const SystemState& s0, const ModelParams& p, double t_end,
                                const IntegratorSettings& settings,
                                Direction filter = Direction::Both) {
    const ValidityReport vr = validate_state(s0);
    if (!vr.ok())
        throw DomainError("poincare: initial state violates " + vr.violations.front().quantity +
                          " bound");
    auto [traj, events] = integrate_with_events(s0, p, t_end, settings, filter);
    PoincareSection sec;
    sec.filter = filter;
    sec.params = p;
    sec.initial = s0;
    sec.status = traj.status;
    sec.t_div = traj.t_div;
    sec.t_final = traj.t_final;
    sec.points.reserve(events.size());
    for (const CrossingEvent& ev : events)
        sec.points.push_back({ev.t_cross, ev.s_cross.om, ev.s_cross.op, ev.s_cross.n1,
                              ev.s_cross.p, ev.s_cross.x, ev.direction});
    return sec;
}

struct LyapunovEstimate {
    double lambda_max{};
    double standard_error{};
    double transient_discarded{};
    double total_time{};  // end of the averaging window (< requested total if Diverged)
    std::size_t renorm_count{};
    RunStatus status{RunStatus::Completed};
    double t_div{std::numeric_limits<double>::quiet_NaN()};
};

namespace detail {

inline Vec5 default_tangent() {
    const double c = 1.0 / std::sqrt(5.0);
    return {c, c, c, c, c};
}

} // namespace detail

/// Benettin estimate of the largest exponent over (transient, total].
///
/// The standard error comes from batch means: the per-interval rates are
/// grouped into ~sqrt(n) consecutive blocks whose averaged rates are treated
/// as independent samples. Single renormalization intervals are strongly
/// anti-correlated (the tangent norm oscillates with the orbit), so their raw
/// dispersion says nothing about the uncertainty of the mean.
inline LyapunovEstimate largest_lyapunov(const SystemState& s0, const ModelParams& p,
                                         const IntegratorSettings& settings, double transient,
                                         double total, double renorm_interval,
                                         const Vec5& tangent0 = detail::default_tangent()) {
    if (!std::isfinite(transient) || !std::isfinite(total) || !(transient >= 0.0) ||
        !(total > transient))
        throw ConfigError("largest_lyapunov: need 0 <= transient < total");
    if (!std::isfinite(renorm_interval) || !(renorm_interval > 0.0))
        throw ConfigError("largest_lyapunov: renorm_interval must be > 0");

    const GrowthLog log =
        integrate_augmented(s0, std::span<const Vec5>(&tangent0, 1), p, total, settings,
                            renorm_interval);
    if (log.status == RunStatus::Diverged && !(log.t_div > transient))
        throw DivergentTrajectory(log.t_div, "largest_lyapunov: trajectory diverged at t=" +
                                                 std::to_string(log.t_div) +
                                                 " before the transient ended");

    std::vector<double> logs, spans;
    double t_last = transient;
    for (const GrowthRecord& r : log.records) {
        if (r.t <= transient) continue;
        logs.push_back(r.log_norms[0]);
        spans.push_back(r.dt);
        t_last = r.t;
    }
    if (logs.size() < 10)
        throw ConfigError("largest_lyapunov: fewer than 10 renormalizations after the transient");

    // The first kept interval may straddle the transient boundary; weight by
    // the actual span so the sum stays a pure log-growth over (t0, t_last].
    const double t0 = t_last - std::accumulate(spans.begin(), spans.end(), 0.0);
    const double sum = std::accumulate(logs.begin(), logs.end(), 0.0);

    LyapunovEstimate est;
    est.lambda_max = sum / (t_last - t0);
    est.transient_discarded = transient;
    est.total_time = t_last;
    est.renorm_count = logs.size();
    est.status = log.status;
    est.t_div = log.t_div;

    const std::size_t n = logs.size();
    const std::size_t batches = std::max<std::size_t>(
        std::min<std::size_t>(n, 10), static_cast<std::size_t>(std::sqrt(static_cast<double>(n))));
    const std::size_t per = n / batches;
    std::vector<double> rates;
    rates.reserve(batches);
    for (std::size_t b = 0; b < batches; ++b) {
        const std::size_t lo = b * per;
        const std::size_t hi = b + 1 == batches ? n : lo + per;
        double l = 0.0, d = 0.0;
        for (std::size_t i = lo; i < hi; ++i) {
            l += logs[i];
            d += spans[i];
        }
        rates.push_back(l / d);
    }
    const double mean = std::accumulate(rates.begin(), rates.end(), 0.0) / rates.size();
    double var = 0.0;
    for (double r : rates) var += (r - mean) * (r - mean);
    var /= static_cast<double>(rates.size() - 1);
    est.standard_error = std::sqrt(var / static_cast<double>(rates.size()));
    return est;
}

enum class RegimeClass { Periodic, Quasiperiodic, Chaotic, Divergent, Inconclusive };

inline std::string_view to_string(RegimeClass c) {
    switch (c) {
    case RegimeClass::Periodic: return "Periodic";
    case RegimeClass::Quasiperiodic: return "Quasiperiodic";
    case RegimeClass::Chaotic: return "Chaotic";
    case RegimeClass::Divergent: return "Divergent";
    case RegimeClass::Inconclusive: return "Inconclusive";
    }
    return "?";
}

struct AnalysisBudget {
    double transient{200.0};
    double total{5000.0};
    double renorm_interval{1.0};
    double chaos_threshold{5e-3};
    double significance{3.0};        // lambda must exceed this many standard errors
    std::size_t min_crossings{50};
    std::size_t max_clusters{64};
    double cluster_radius{1e-3};     // relative to the section's extent

    void validate() const {
        if (!(total > transient) || !(transient >= 0.0) || !std::isfinite(total))
            throw ConfigError("AnalysisBudget: need 0 <= transient < total");
        if (!(renorm_interval > 0.0)) throw ConfigError("AnalysisBudget: renorm_interval must be > 0");
        if (!(chaos_threshold >= 0.0)) throw ConfigError("AnalysisBudget: chaos_threshold must be >= 0");
        if (!(cluster_radius > 0.0)) throw ConfigError("AnalysisBudget: cluster_radius must be > 0");
    }
};

struct RegimeEvidence {
    std::optional<LyapunovEstimate> lyapunov;
    std::optional<double> divergence_time;
    std::size_t crossings{0};
    std::size_t clusters_half{0};
    std::size_t clusters_full{0};
    double section_scale{0.0};
    std::string note;
};

struct RegimeLabel {
    RegimeClass label{RegimeClass::Inconclusive};
    RegimeEvidence evidence;
};

/// Greedy count of radius-r clusters in the (om, op) plane, stopping once
/// `cap` is exceeded.
inline std::size_t count_clusters(std::span<const SectionPoint> pts, double radius, std::size_t cap) {
    std::vector<std::pair<double, double>> centers;
    const double r2 = radius * radius;
    for (const SectionPoint& q : pts) {
        bool found = false;
        for (const auto& [cx, cy] : centers) {
            const double dx = q.om - cx, dy = q.op - cy;
            if (dx * dx + dy * dy <= r2) {
                found = true;
                break;
            }
        }
        if (!found) {
            centers.emplace_back(q.om, q.op);
            if (centers.size() > cap) break;
        }
    }
    return centers.size();
}

/// Diagonal of the (om, op) bounding box.
inline double section_extent(std::span<const SectionPoint> pts) {
    if (pts.empty()) return 0.0;
    double x0 = pts[0].om, x1 = x0, y0 = pts[0].op, y1 = y0;
    for (const SectionPoint& q : pts) {
        x0 = std::min(x0, q.om);
        x1 = std::max(x1, q.om);
        y0 = std::min(y0, q.op);
        y1 = std::max(y1, q.op);
    }
    return std::hypot(x1 - x0, y1 - y0);
}

struct ConicFit {
    std::array<double, 6> coeffs{};  // a x^2 + b xy + c y^2 + d x + e y + f, on normalized coordinates
    double max_residual{};           // max first-order distance to the conic, relative to extent
};

/// Least-squares conic through the (om, op) section points.
inline ConicFit fit_conic(std::span<const SectionPoint> pts) {
    if (pts.size() < 6) throw DomainError("fit_conic: need at least 6 points");
    double mx = 0.0, my = 0.0;
    for (const SectionPoint& q : pts) {
        mx += q.om;
        my += q.op;
    }
    mx /= pts.size();
    my /= pts.size();
    const double scale = section_extent(pts);
    if (!(scale > 0.0)) throw DomainError("fit_conic: degenerate point set");

    Eigen::Matrix<double, 6, 6> scatter = Eigen::Matrix<double, 6, 6>::Zero();
    auto row = [&](const SectionPoint& q) {
        const double x = (q.om - mx) / scale, y = (q.op - my) / scale;
        Eigen::Matrix<double, 6, 1> r;
        r << x * x, x * y, y * y, x, y, 1.0;
        return r;
    };
    for (const SectionPoint& q : pts) {
        const auto r = row(q);
        scatter += r * r.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 6, 6>> es(scatter);
    const Eigen::Matrix<double, 6, 1> c = es.eigenvectors().col(0);

    ConicFit fit;
    for (int i = 0; i < 6; ++i) fit.coeffs[i] = c(i);
    for (const SectionPoint& q : pts) {
        const double x = (q.om - mx) / scale, y = (q.op - my) / scale;
        const double val = c(0) * x * x + c(1) * x * y + c(2) * y * y + c(3) * x + c(4) * y + c(5);
        const double gx = 2.0 * c(0) * x + c(1) * y + c(3);
        const double gy = c(1) * x + 2.0 * c(2) * y + c(4);
        const double g = std::hypot(gx, gy);
        const double dist = g > 0.0 ? std::abs(val) / g : std::abs(val);
        fit.max_residual = std::max(fit.max_residual, dist);
    }
    return fit;
}

/// Labels one trajectory as Divergent, Chaotic, Periodic or Quasiperiodic.
///
/// Divergence anywhere within the budget wins. Otherwise a significant
/// positive exponent means Chaotic. Otherwise the X = 0 section (upward
/// crossings) decides: a small cluster count that does not grow between the
/// first half and the whole section is Periodic, anything else is
/// Quasiperiodic. Fewer than min_crossings section points is Inconclusive.
inline RegimeLabel classify_regime(const SystemState& s0, const ModelParams& p,
                                   const IntegratorSettings& settings,
                                   const AnalysisBudget& budget = {}) {
    budget.validate();
    RegimeLabel out;
    LyapunovEstimate est;
    try {
        est = largest_lyapunov(s0, p, settings, budget.transient, budget.total,
                               budget.renorm_interval);
    } catch (const DivergentTrajectory& e) {
        out.label = RegimeClass::Divergent;
        out.evidence.divergence_time = e.divergence_time();
        out.evidence.note = "diverged before the transient ended";
        return out;
    }
    out.evidence.lyapunov = est;
    if (est.status == RunStatus::Diverged) {
        out.label = RegimeClass::Divergent;
        out.evidence.divergence_time = est.t_div;
        return out;
    }
    if (est.lambda_max > budget.chaos_threshold &&
        est.lambda_max > budget.significance * est.standard_error) {
        out.label = RegimeClass::Chaotic;
        return out;
    }

    const PoincareSection sec = poincare(s0, p, budget.total, settings, Direction::Positive);
    out.evidence.crossings = sec.points.size();
    if (sec.points.size() < budget.min_crossings) {
        out.label = RegimeClass::Inconclusive;
        out.evidence.note = "too few section crossings";
        return out;
    }
    const std::span<const SectionPoint> all(sec.points);
    const double scale = section_extent(all);
    out.evidence.section_scale = scale;
    const double radius = budget.cluster_radius * std::max(scale, 1e-300);
    out.evidence.clusters_full = count_clusters(all, radius, budget.max_clusters);
    out.evidence.clusters_half =
        count_clusters(all.first(all.size() / 2), radius, budget.max_clusters);
    out.label = out.evidence.clusters_full <= budget.max_clusters &&
                        out.evidence.clusters_half == out.evidence.clusters_full
                    ? RegimeClass::Periodic
                    : RegimeClass::Quasiperiodic;
    return out;
}

} // namespace semiq
