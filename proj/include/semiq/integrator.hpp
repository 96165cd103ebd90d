// integrator.hpp: adaptive Dormand–Prince 5(4) integration of the
// semiquantum system with dense output, X = 0 plane crossings and
// co-integrated tangent vectors for Lyapunov analysis.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "semiq/errors.hpp"
#include "semiq/model.hpp"

namespace semiq {

struct IntegratorSettings {
    double abs_tol{1e-14};
    double rel_tol{1e-14};
    double h_init{1e-3};
    double h_max{0.5};
    double divergence_norm{1e8};
    std::size_t max_steps{100'000'000};

    void validate() const {
        auto bad = [](double v) { return !std::isfinite(v) || !(v > 0.0); };
        if (bad(abs_tol) || bad(rel_tol)) throw ConfigError("IntegratorSettings: tolerances must be > 0");
        if (bad(h_init)) throw ConfigError("IntegratorSettings: h_init must be > 0");
        if (bad(h_max)) throw ConfigError("IntegratorSettings: h_max must be > 0");
        if (!(divergence_norm > 0.0)) throw ConfigError("IntegratorSettings: divergence_norm must be > 0");
        if (max_steps < 1) throw ConfigError("IntegratorSettings: max_steps must be >= 1");
    }
};

enum class RunStatus { Completed, Diverged, StepBudgetExhausted };

inline std::string_view to_string(RunStatus s) {
    switch (s) {
    case RunStatus::Completed: return "Completed";
    case RunStatus::Diverged: return "Diverged";
    case RunStatus::StepBudgetExhausted: return "StepBudgetExhausted";
    }
    return "?";
}

struct StepStats {
    std::size_t accepted{0};
    std::size_t rejected{0};
    double h_min{std::numeric_limits<double>::infinity()};
    double h_max{0.0};
};

struct Sample {
    double t{};
    SystemState s;
};

struct Trajectory {
    std::vector<Sample> samples;
    RunStatus status{RunStatus::Completed};
    double t_div{std::numeric_limits<double>::quiet_NaN()};  // set when Diverged
    double t_final{0.0};                                      // last integrated time
    StepStats stats;
};

/// Crossing direction filter; the numeric value is the sign of dX/dt kept.
enum class Direction : int { Negative = -1, Both = 0, Positive = +1 };

struct CrossingEvent {
    double t_cross{};
    SystemState s_cross;
    int direction{};  // sign of dX/dt at the crossing
};

namespace detail {

template <std::size_t N>
using VecN = std::array<double, N>;

// Dormand–Prince 5(4) tableau with Hairer's 4th-order continuous extension.
namespace dp {
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
inline constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                        a75 = -2187.0 / 6784, a76 = 11.0 / 84;
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
inline constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                        d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                        d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;
} // namespace dp

/// Adaptive stepper over an N-dimensional autonomous system. Only the first
/// ErrDim components enter the error norm and the divergence test.
template <std::size_t N, std::size_t ErrDim, class F>
class Dopri5 {
public:
    using State = VecN<N>;

    Dopri5(F f, const State& y0, double t0, const IntegratorSettings& cfg)
        : f_(std::move(f)), cfg_(cfg), t_(t0), y_(y0), h_(std::min(cfg.h_init, cfg.h_max)) {
        f_(y_, k1_);
    }

    double t() const { return t_; }
    double t_old() const { return t_old_; }
    const State& y() const { return y_; }
    const State& y_old() const { return y_old_; }
    State& mutable_y() { return y_; }
    const StepStats& stats() const { return stats_; }
    std::size_t attempts() const { return stats_.accepted + stats_.rejected; }

    /// Call after editing mutable_y() so the FSAL stage matches the new state.
    void refresh() { f_(y_, k1_); }

    double max_norm() const {
        double m = 0.0;
        for (std::size_t i = 0; i < ErrDim; ++i) m = std::max(m, std::abs(y_[i]));
        return m;
    }

    /// Advances by one accepted step not beyond t_stop. Returns false when
    /// the attempt budget ran out first.
    bool step(double t_stop) {
        using namespace dp;
        for (;;) {
            if (attempts() >= cfg_.max_steps) return false;

            double h = std::min(h_, cfg_.h_max);
            bool clamped = false;
            if (t_ + h >= t_stop) {
                h = t_stop - t_;
                clamped = true;
            }
            if (!(h > 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t_))))
                throw NumericalFailure(t_, "integrator: step size underflow at t=" + std::to_string(t_));

            State tmp;
            for (std::size_t i = 0; i < N; ++i) tmp[i] = y_[i] + h * a21 * k1_[i];
            f_(tmp, k2_);
            for (std::size_t i = 0; i < N; ++i) tmp[i] = y_[i] + h * (a31 * k1_[i] + a32 * k2_[i]);
            f_(tmp, k3_);
            for (std::size_t i = 0; i < N; ++i)
                tmp[i] = y_[i] + h * (a41 * k1_[i] + a42 * k2_[i] + a43 * k3_[i]);
            f_(tmp, k4_);
            for (std::size_t i = 0; i < N; ++i)
                tmp[i] = y_[i] + h * (a51 * k1_[i] + a52 * k2_[i] + a53 * k3_[i] + a54 * k4_[i]);
            f_(tmp, k5_);
            for (std::size_t i = 0; i < N; ++i)
                tmp[i] = y_[i] + h * (a61 * k1_[i] + a62 * k2_[i] + a63 * k3_[i] + a64 * k4_[i] +
                                      a65 * k5_[i]);
            f_(tmp, k6_);
            State y_new;
            for (std::size_t i = 0; i < N; ++i)
                y_new[i] = y_[i] + h * (a71 * k1_[i] + a73 * k3_[i] + a74 * k4_[i] + a75 * k5_[i] +
                                        a76 * k6_[i]);
            f_(y_new, k7_);

            double acc = 0.0;
            for (std::size_t i = 0; i < ErrDim; ++i) {
                const double e = h * (e1 * k1_[i] + e3 * k3_[i] + e4 * k4_[i] + e5 * k5_[i] +
                                      e6 * k6_[i] + e7 * k7_[i]);
                const double sk =
                    cfg_.abs_tol + cfg_.rel_tol * std::max(std::abs(y_[i]), std::abs(y_new[i]));
                acc += (e / sk) * (e / sk);
            }
            const double err = std::sqrt(acc / static_cast<double>(ErrDim));

            if (!std::isfinite(err)) {
                ++stats_.rejected;
                h_ = 0.2 * h;
                last_rejected_ = true;
                continue;
            }

            if (err <= 1.0) {
                double fac = kSafe * std::pow(err, -kExpo1) * std::pow(err_old_, kBeta);
                if (err == 0.0) fac = kFacMax;
                fac = std::clamp(fac, kFacMin, kFacMax);
                if (last_rejected_) fac = std::min(fac, 1.0);
                err_old_ = std::max(err, 1e-4);
                last_rejected_ = false;

                // Remember the coefficients for dense output on [t_old, t].
                y_old_ = y_;
                t_old_ = t_;
                h_last_ = h;
                for (std::size_t i = 0; i < N; ++i) {
                    const double ydiff = y_new[i] - y_[i];
                    const double bspl = h * k1_[i] - ydiff;
                    r2_[i] = ydiff;
                    r3_[i] = bspl;
                    r4_[i] = ydiff - h * k7_[i] - bspl;
                    r5_[i] = h * (d1 * k1_[i] + d3 * k3_[i] + d4 * k4_[i] + d5 * k5_[i] +
                                  d6 * k6_[i] + d7 * k7_[i]);
                }

                y_ = y_new;
                k1_ = k7_;
                t_ = clamped ? t_stop : t_ + h;
                ++stats_.accepted;
                stats_.h_min = std::min(stats_.h_min, h);
                stats_.h_max = std::max(stats_.h_max, h);

                const double proposal = h * fac;
                // A step shortened to hit t_stop must not shrink the next one.
                h_ = clamped ? std::max(proposal, h_) : proposal;
                for (std::size_t i = 0; i < N; ++i)
                    if (!std::isfinite(y_[i]))
                        throw NumericalFailure(t_old_, "integrator: non-finite state after t=" +
                                                           std::to_string(t_old_));
                return true;
            }

            ++stats_.rejected;
            last_rejected_ = true;
            h_ = h * std::max(kFacMin, kSafe * std::pow(err, -0.2));
        }
    }

    /// Continuous extension on the last accepted step, theta in [0, 1].
    State dense(double theta) const {
        const double theta1 = 1.0 - theta;
        State out;
        for (std::size_t i = 0; i < N; ++i)
            out[i] = y_old_[i] +
                     theta * (r2_[i] + theta1 * (r3_[i] + theta * (r4_[i] + theta1 * r5_[i])));
        return out;
    }

    State dense_at(double t) const {
        if (h_last_ == 0.0) return y_;
        return dense((t - t_old_) / h_last_);
    }

private:
    static constexpr double kSafe = 0.9;
    static constexpr double kBeta = 0.04;
    static constexpr double kExpo1 = 0.2 - kBeta * 0.75;
    static constexpr double kFacMin = 0.2;
    static constexpr double kFacMax = 10.0;

    F f_;
    IntegratorSettings cfg_;
    double t_;
    State y_;
    double h_;
    double t_old_{0.0};
    State y_old_{};
    double h_last_{0.0};
    double err_old_{1e-4};
    bool last_rejected_{false};
    State k1_{}, k2_{}, k3_{}, k4_{}, k5_{}, k6_{}, k7_{};
    State r2_{}, r3_{}, r4_{}, r5_{};
    StepStats stats_;
};

struct BaseSystem {
    ModelParams p;
    void operator()(const Vec5& y, Vec5& out) const { out = rhs(y, p); }
};

inline void check_run_inputs(const SystemState& s0, const ModelParams& p, double t_end,
                             const IntegratorSettings& cfg) {
    cfg.validate();
    require_finite(s0, "integrate");
    require_finite(p, "integrate");
    if (!std::isfinite(t_end) || !(t_end > 0.0)) throw ConfigError("integrate: t_end must be > 0");
}

// Shared driver: steps the base system to t_end, invoking on_step after each
// accepted step. Returns the terminal status and fills stats/t_final/t_div.
template <class OnStep>
RunStatus drive(const SystemState& s0, const ModelParams& p, double t_end,
                const IntegratorSettings& cfg, Trajectory& traj, OnStep&& on_step) {
    Dopri5<kDim, kDim, BaseSystem> st(BaseSystem{p}, s0.dynamical(), 0.0, cfg);
    RunStatus status = RunStatus::Completed;
    while (st.t() < t_end) {
        if (!st.step(t_end)) {
            status = RunStatus::StepBudgetExhausted;
            break;
        }
        on_step(st);
        if (st.max_norm() > cfg.divergence_norm) {
            status = RunStatus::Diverged;
            traj.t_div = st.t();
            break;
        }
    }
    traj.stats = st.stats();
    traj.t_final = st.t();
    return status;
}

} // namespace detail

/// Integrates from t = 0 to t_end, sampling the dense output at multiples of
/// sample_interval. A Diverged run also records the state at the divergence
/// time as its last sample.
inline Trajectory integrate(const SystemState& s0, const ModelParams& p, double t_end,
                            const IntegratorSettings& settings, double sample_interval) {
    detail::check_run_inputs(s0, p, t_end, settings);
    if (!std::isfinite(sample_interval) || !(sample_interval > 0.0))
        throw ConfigError("integrate: sample_interval must be > 0");

    Trajectory traj;
    traj.samples.push_back({0.0, s0});
    std::size_t k = 1;
    auto next_time = [&] { return std::min(static_cast<double>(k) * sample_interval, t_end); };
    const auto n_samples = static_cast<std::size_t>(std::floor(t_end / sample_interval * (1.0 + 1e-12)));

    traj.status = detail::drive(s0, p, t_end, settings, traj, [&](const auto& st) {
        while (k <= n_samples && next_time() <= st.t()) {
            const double ts = next_time();
            const Vec5 y = ts == st.t() ? st.y() : st.dense_at(ts);
            traj.samples.push_back({ts, SystemState::from_dynamical(y, s0.dn)});
            ++k;
        }
        if (st.max_norm() > settings.divergence_norm && traj.samples.back().t < st.t())
            traj.samples.push_back({st.t(), SystemState::from_dynamical(st.y(), s0.dn)});
    });
    return traj;
}

namespace detail {

// Locates x = 0 on the dense interpolant of the last step (Illinois method).
template <class Stepper>
CrossingEvent refine_crossing(const Stepper& st, const ModelParams& p, double dn) {
    const double span = st.t() - st.t_old();
    double a = 0.0, b = 1.0;
    double fa = st.y_old()[3], fb = st.dense(1.0)[3];
    if (st.y()[3] == 0.0) {
        fb = 0.0;
    }
    auto finish = [&](double theta, const Vec5& y) {
        CrossingEvent ev;
        ev.t_cross = st.t_old() + theta * span;
        ev.s_cross = SystemState::from_dynamical(y, dn);
        const double vx = p.omega * y[4];
        ev.direction = vx > 0.0 ? 1 : (vx < 0.0 ? -1 : (st.y()[3] > st.y_old()[3] ? 1 : -1));
        return ev;
    };
    auto tolerance = [](const Vec5& y) {
        double m = 0.0;
        for (double v : y) m = std::max(m, std::abs(v));
        return 1e-12 * (1.0 + m);
    };
    if (fb == 0.0) return finish(1.0, st.y());
    if ((fa < 0.0) == (fb < 0.0)) {
        // Interpolant lost the bracket by rounding; take the closer endpoint.
        return std::abs(fa) < std::abs(fb) ? finish(0.0, st.y_old()) : finish(1.0, st.dense(1.0));
    }
    int side = 0;
    for (int it = 0; it < 100; ++it) {
        double c = (a * fb - b * fa) / (fb - fa);
        if (!(c > a && c < b)) c = 0.5 * (a + b);
        const Vec5 yc = st.dense(c);
        const double fc = yc[3];
        if (std::abs(fc) <= tolerance(yc) || (b - a) * span <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, st.t()))
            return finish(c, yc);
        if ((fc < 0.0) == (fb < 0.0)) {
            b = c;
            fb = fc;
            if (side == -1) fa *= 0.5;
            side = -1;
        } else {
            a = c;
            fa = fc;
            if (side == +1) fb *= 0.5;
            side = +1;
        }
    }
    throw NumericalFailure(st.t_old(), "integrate_with_events: crossing refinement did not converge");
}

} // namespace detail

/// As integrate(), additionally reporting every sign change of X across an
/// accepted step. A start exactly on the plane is not a crossing.
inline std::pair<Trajectory, std::vector<CrossingEvent>>
integrate_with_events(const SystemState& s0, const ModelParams& p, double t_end,
                      const IntegratorSettings& settings, Direction filter = Direction::Both,
                      double sample_interval = 0.0) {
    detail::check_run_inputs(s0, p, t_end, settings);
    Trajectory traj;
    std::vector<CrossingEvent> events;

    traj.samples.push_back({0.0, s0});
    std::size_t k = 1;
    const auto n_samples =
        sample_interval > 0.0 ? static_cast<std::size_t>(std::floor(t_end / sample_interval * (1.0 + 1e-12))) : 0;

    traj.status = detail::drive(s0, p, t_end, settings, traj, [&](const auto& st) {
        const double xa = st.y_old()[3];
        const double xb = st.y()[3];
        if ((xa < 0.0 && xb >= 0.0) || (xa > 0.0 && xb <= 0.0)) {
            CrossingEvent ev = detail::refine_crossing(st, p, s0.dn);
            if (filter == Direction::Both || ev.direction == static_cast<int>(filter))
                events.push_back(ev);
        }
        while (k <= n_samples && std::min(k * sample_interval, t_end) <= st.t()) {
            const double ts = std::min(k * sample_interval, t_end);
            traj.samples.push_back({ts, SystemState::from_dynamical(st.dense_at(ts), s0.dn)});
            ++k;
        }
        if (st.max_norm() > settings.divergence_norm && traj.samples.back().t < st.t())
            traj.samples.push_back({st.t(), SystemState::from_dynamical(st.y(), s0.dn)});
    });
    return {std::move(traj), std::move(events)};
}

struct GrowthRecord {
    double t{};
    double dt{};                    // time since the previous renormalization
    std::vector<double> log_norms;  // one per tangent vector, before normalization
};

struct GrowthLog {
    std::vector<GrowthRecord> records;
    RunStatus status{RunStatus::Completed};
    double t_div{std::numeric_limits<double>::quiet_NaN()};
    double t_final{0.0};
    StepStats stats;
    SystemState final_state;
};

/// Called after every renormalization with the base state and the record.
using GrowthObserver = std::function<void(const SystemState&, const GrowthRecord&)>;

namespace detail {

template <std::size_t K>
struct AugmentedSystem {
    ModelParams p;
    void operator()(const VecN<kDim * (K + 1)>& y, VecN<kDim * (K + 1)>& out) const {
        Vec5 base;
        std::copy_n(y.begin(), kDim, base.begin());
        const Vec5 f = rhs(base, p);
        std::copy(f.begin(), f.end(), out.begin());
        const Mat5 j = rhs_jacobian(base, p);
        for (std::size_t v = 0; v < K; ++v) {
            const std::size_t off = kDim * (v + 1);
            for (std::size_t r = 0; r < kDim; ++r) {
                double acc = 0.0;
                for (std::size_t c = 0; c < kDim; ++c) acc += j[r][c] * y[off + c];
                out[off + r] = acc;
            }
        }
    }
};

// Modified Gram–Schmidt on the K tangent blocks; returns log of each norm.
template <std::size_t K>
std::vector<double> orthonormalize(VecN<kDim * (K + 1)>& y) {
    std::vector<double> logs(K);
    for (std::size_t v = 0; v < K; ++v) {
        const std::size_t off = kDim * (v + 1);
        for (std::size_t u = 0; u < v; ++u) {
            const std::size_t ou = kDim * (u + 1);
            double dot = 0.0;
            for (std::size_t i = 0; i < kDim; ++i) dot += y[off + i] * y[ou + i];
            for (std::size_t i = 0; i < kDim; ++i) y[off + i] -= dot * y[ou + i];
        }
        double nrm = 0.0;
        for (std::size_t i = 0; i < kDim; ++i) nrm += y[off + i] * y[off + i];
        nrm = std::sqrt(nrm);
        if (!(nrm > 0.0) || !std::isfinite(nrm))
            throw NumericalFailure(0.0, "integrate_augmented: degenerate tangent vector");
        for (std::size_t i = 0; i < kDim; ++i) y[off + i] /= nrm;
        logs[v] = std::log(nrm);
    }
    return logs;
}

template <std::size_t K>
GrowthLog run_augmented(const SystemState& s0, std::span<const Vec5> tangents,
                        const ModelParams& p, double t_end, const IntegratorSettings& cfg,
                        double renorm_interval, const GrowthObserver& observer) {
    constexpr std::size_t n = kDim * (K + 1);
    VecN<n> y0{};
    const Vec5 base = s0.dynamical();
    std::copy(base.begin(), base.end(), y0.begin());
    for (std::size_t v = 0; v < K; ++v)
        std::copy(tangents[v].begin(), tangents[v].end(), y0.begin() + kDim * (v + 1));
    try {
        orthonormalize<K>(y0);
    } catch (const NumericalFailure&) {
        throw ConfigError("integrate_augmented: initial tangent vectors are linearly dependent");
    }

    Dopri5<n, kDim, AugmentedSystem<K>> st(AugmentedSystem<K>{p}, y0, 0.0, cfg);
    GrowthLog log;
    std::size_t k = 1;
    double t_prev = 0.0;
    while (st.t() < t_end) {
        if (!st.step(t_end)) {
            log.status = RunStatus::StepBudgetExhausted;
            break;
        }
        if (st.max_norm() > cfg.divergence_norm) {
            log.status = RunStatus::Diverged;
            log.t_div = st.t();
            break;
        }
        if (st.t() >= static_cast<double>(k) * renorm_interval || st.t() == t_end) {
            GrowthRecord rec;
            rec.t = st.t();
            rec.dt = st.t() - t_prev;
            rec.log_norms = orthonormalize<K>(st.mutable_y());
            st.refresh();
            if (observer) {
                Vec5 b;
                std::copy_n(st.y().begin(), kDim, b.begin());
                observer(SystemState::from_dynamical(b, s0.dn), rec);
            }
            log.records.push_back(std::move(rec));
            t_prev = st.t();
            while (static_cast<double>(k) * renorm_interval <= st.t()) ++k;
        }
    }
    Vec5 b;
    std::copy_n(st.y().begin(), kDim, b.begin());
    log.final_state = SystemState::from_dynamical(b, s0.dn);
    log.stats = st.stats();
    log.t_final = st.t();
    return log;
}

} // namespace detail

/// Co-integrates the base flow with 1..5 tangent vectors under the Jacobian.
/// The initial vectors are orthonormalized first, then re-orthonormalized at the first accepted step boundary at or past
/// each multiple of renorm_interval (and at t_end). Step control sees only
/// the base-state error, so the base orbit is step-for-step the one
/// integrate() produces.
inline GrowthLog integrate_augmented(const SystemState& s0, std::span<const Vec5> tangents,
                                     const ModelParams& p, double t_end,
                                     const IntegratorSettings& settings, double renorm_interval,
                                     const GrowthObserver& observer = {}) {
    detail::check_run_inputs(s0, p, t_end, settings);
    if (!std::isfinite(renorm_interval) || !(renorm_interval > 0.0))
        throw ConfigError("integrate_augmented: renorm_interval must be > 0");
    if (tangents.empty() || tangents.size() > kDim)
        throw ConfigError("integrate_augmented: between 1 and 5 tangent vectors required");
    for (const Vec5& v : tangents) {
        double nrm = 0.0;
        for (double c : v) {
            if (!std::isfinite(c)) throw ConfigError("integrate_augmented: non-finite tangent vector");
            nrm += c * c;
        }
        if (nrm == 0.0) throw ConfigError("integrate_augmented: zero tangent vector");
    }
    switch (tangents.size()) {
    case 1: return detail::run_augmented<1>(s0, tangents, p, t_end, settings, renorm_interval, observer);
    case 2: return detail::run_augmented<2>(s0, tangents, p, t_end, settings, renorm_interval, observer);
    case 3: return detail::run_augmented<3>(s0, tangents, p, t_end, settings, renorm_interval, observer);
    case 4: return detail::run_augmented<4>(s0, tangents, p, t_end, settings, renorm_interval, observer);
    default: return detail::run_augmented<5>(s0, tangents, p, t_end, settings, renorm_interval, observer);
    }
}

} // namespace semiq
