#pragma once

// Adaptive Dormand-Prince 5(4) integrator for small fixed-size systems.
// The state type is any Eigen column vector; the right-hand side is a callable
// (double x, const State& y) -> State.

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <sstream>
#include <vector>

#include "wvn/errors.hpp"

namespace wvn::ode {

struct Options {
    double rtol = 1e-10;
    double atol = 1e-12;
    double initial_step = 0.0;  // 0: automatic
    double max_step = 0.0;      // 0: unbounded
    long max_steps = 50'000'000;
};

struct Stats {
    long accepted = 0;
    long rejected = 0;
    long evaluations = 0;
};

namespace detail {

template <class State>
double error_norm(const State& err, const State& y0, const State& y1, const Options& opt) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < err.size(); ++i) {
        const double scale = opt.atol + opt.rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
        const double r = err[i] / scale;
        acc += r * r;
    }
    return std::sqrt(acc / static_cast<double>(err.size()));
}

}  // namespace detail

/// Integrates y' = f(x, y) from x0 through every point of `grid` (monotone in the
/// direction of travel, first point may equal x0) and calls `observer(x, y)` at
/// each grid point. Works forward or backward.
template <class State, class Rhs, class Observer>
Stats integrate_grid(Rhs&& f, double x0, State y, std::span<const double> grid, Observer&& observer,
                     const Options& opt = {}) {
    // Dormand-Prince coefficients.
    constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                     a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                     a65 = -5103.0 / 18656;
    constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                     b6 = 11.0 / 84;
    constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                     e6 = 22.0 / 525, e7 = -1.0 / 40;

    Stats stats;
    if (grid.empty()) return stats;
    const double x_final = grid.back();
    const double dir = (x_final >= x0) ? 1.0 : -1.0;

    double x = x0;
    State k1 = f(x, y);
    ++stats.evaluations;

    double h = opt.initial_step;
    if (h <= 0.0) {
        const double span = std::abs(x_final - x0);
        const double ynorm = std::max(y.norm(), 1e-5);
        const double fnorm = std::max(k1.norm(), 1e-5);
        h = std::min(0.01 * ynorm / fnorm, 0.01);
        if (span > 0.0) h = std::min(h, span);
        h = std::max(h, 1e-6);
    }
    if (opt.max_step > 0.0) h = std::min(h, opt.max_step);

    std::size_t next = 0;
    while (next < grid.size() && dir * (grid[next] - x) <= 0.0) {
        observer(grid[next], y);
        ++next;
    }

    const double tiny = 16.0 * std::numeric_limits<double>::epsilon();
    long steps = 0;
    while (next < grid.size()) {
        const double target = grid[next];
        if (std::abs(target - x) <= tiny * std::max(1.0, std::abs(x))) {
            x = target;
            while (next < grid.size() && dir * (grid[next] - x) <= 0.0) {
                observer(grid[next], y);
                ++next;
            }
            continue;
        }
        const double step = std::min(h, std::abs(target - x));
        bool clipped = step < h;
        if (++steps > opt.max_steps) {
            std::ostringstream os;
            os << "ode: step budget exhausted at x = " << x;
            throw IntegratorError(os.str(), x);
        }
        const double hs = dir * step;

        const State k2 = f(x + c2 * hs, State(y + hs * (a21 * k1)));
        const State k3 = f(x + c3 * hs, State(y + hs * (a31 * k1 + a32 * k2)));
        const State k4 = f(x + c4 * hs, State(y + hs * (a41 * k1 + a42 * k2 + a43 * k3)));
        const State k5 = f(x + c5 * hs, State(y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4)));
        const State k6 =
            f(x + hs, State(y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5)));
        const State y1 = y + hs * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        const State k7 = f(x + hs, y1);
        stats.evaluations += 6;

        const State err = hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
        const double en = detail::error_norm(err, y, y1, opt);

        if (!std::isfinite(en)) {
            h = 0.25 * step;
            clipped = false;
            ++stats.rejected;
        } else if (en <= 1.0) {
            x = (step >= std::abs(target - x)) ? target : x + hs;
            y = y1;
            k1 = k7;
            ++stats.accepted;
            const double fac = en == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 5.0);
            // A clipped step says nothing about the attainable step size.
            h = clipped ? std::max(h, step * fac) : step * fac;
            while (next < grid.size() && dir * (grid[next] - x) <= 0.0) {
                observer(grid[next], y);
                ++next;
            }
        } else {
            h = step * std::clamp(0.9 * std::pow(en, -0.2), 0.1, 0.9);
            ++stats.rejected;
        }
        if (opt.max_step > 0.0) h = std::min(h, opt.max_step);
        if (h < tiny * std::max(1.0, std::abs(x))) {
            std::ostringstream os;
            os << "ode: step size underflow at x = " << x;
            throw IntegratorError(os.str(), x);
        }
    }
    return stats;
}

/// Integrates from x0 to x1 and returns the final state.
template <class State, class Rhs>
State integrate_to(Rhs&& f, double x0, const State& y0, double x1, const Options& opt = {}) {
    State out = y0;
    const double grid[1] = {x1};
    integrate_grid(f, x0, y0, std::span<const double>(grid, 1),
                   [&](double, const State& y) { out = y; }, opt);
    return out;
}

/// Uniform grid of `count` points on [a, b] including both ends.
inline std::vector<double> linspace(double a, double b, std::size_t count) {
    std::vector<double> g(count);
    if (count == 1) {
        g[0] = b;
        return g;
    }
    for (std::size_t i = 0; i < count; ++i)
        g[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1);
    g.back() = b;
    return g;
}

}  // namespace wvn::ode
