// oracles.hpp: reference computations that do not go through the library's
// own closed forms or stepper.

#pragma once

#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "semiq/model.hpp"

namespace oracle {

// The alpha = 0 quantum triple obeys q' = M q; exp(M t) via Pade scaling and
// squaring, in long double.
inline std::array<double, 3> expm_triple(const std::array<double, 3>& q0, double eps, double delta,
                                         double t) {
    using M3 = Eigen::Matrix<long double, 3, 3>;
    M3 m;
    m << 0, 2 * (long double)delta, 0,
         2 * (long double)delta, 0, 2 * (long double)eps,
         0, -2 * (long double)eps, 0;
    const M3 e = (m * (long double)t).exp();
    Eigen::Matrix<long double, 3, 1> v(q0[0], q0[1], q0[2]);
    const auto r = e * v;
    return {(double)r(0), (double)r(1), (double)r(2)};
}

// Right-hand side written out independently of the library.
inline std::array<long double, 5> field(const std::array<long double, 5>& y, const semiq::ModelParams& p) {
    const long double n1 = y[0], om = y[1], op = y[2], x = y[3], pp = y[4];
    const long double g = (long double)p.delta + (long double)p.alpha * x;
    return {2 * g * om, 2 * g * n1 + 2 * (long double)p.eps * op, -2 * (long double)p.eps * om,
            (long double)p.omega * pp, -((long double)p.omega * x + (long double)p.alpha * op)};
}

// Classical RK4 with a fixed step in long double.
inline semiq::SystemState rk4(const semiq::SystemState& s0, const semiq::ModelParams& p, double t_end,
                              long double h) {
    std::array<long double, 5> y{s0.n1, s0.om, s0.op, s0.x, s0.p};
    const long long n = std::llround(t_end / h);
    h = (long double)t_end / n;
    for (long long i = 0; i < n; ++i) {
        auto add = [](const std::array<long double, 5>& a, const std::array<long double, 5>& b, long double c) {
            std::array<long double, 5> r;
            for (int k = 0; k < 5; ++k) r[k] = a[k] + c * b[k];
            return r;
        };
        const auto k1 = field(y, p);
        const auto k2 = field(add(y, k1, h / 2), p);
        const auto k3 = field(add(y, k2, h / 2), p);
        const auto k4 = field(add(y, k3, h), p);
        for (int k = 0; k < 5; ++k) y[k] += h / 6 * (k1[k] + 2 * k2[k] + 2 * k3[k] + k4[k]);
    }
    return {(double)y[0], (double)y[1], (double)y[2], (double)y[3], (double)y[4], s0.dn};
}

// Random state with n1 >= 1 and I >= 0.
inline semiq::SystemState random_valid_state(std::mt19937_64& rng, double scale = 3.0) {
    std::uniform_real_distribution<double> u(-scale, scale);
    const double om = u(rng), op = u(rng);
    std::uniform_real_distribution<double> extra(0.0, scale);
    const double n1 = std::max(1.0, std::sqrt(om * om + op * op)) + extra(rng);
    return {n1, om, op, u(rng), u(rng), u(rng)};
}

inline semiq::ModelParams random_params(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    std::uniform_real_distribution<double> pos(0.2, 2.0);
    const double eps = pos(rng);
    std::uniform_real_distribution<double> g(-0.99 * eps, 0.99 * eps);
    return {eps, g(rng), u(rng), u(rng), pos(rng)};
}

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("semiq_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace oracle
