#pragma once

#include <cmath>
#include <limits>

namespace wvn::quad {

struct Result {
    double value = 0.0;
    double error = 0.0;  // Richardson estimate of the absolute error
};

namespace detail {

template <class F>
Result simpson(const F& f, double a, double fa, double b, double fb, double m, double fm, double whole, double tol,
               int depth) {
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    const double floor = 64.0 * std::numeric_limits<double>::epsilon() * (std::abs(left) + std::abs(right));
    if (depth <= 0 || std::abs(delta) <= std::max(15.0 * tol, floor)) return {left + right + delta / 15.0, std::abs(delta) / 15.0};
    const Result l = simpson(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1);
    const Result r = simpson(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
    return {l.value + r.value, l.error + r.error};
}

}  // namespace detail

/// Adaptive Simpson rule on [a, b], split into `panels` equal panels first.
template <class F>
Result adaptive_simpson(const F& f, double a, double b, double tol = 1e-12, int panels = 16, int max_depth = 30) {
    Result total;
    const double h = (b - a) / panels;
    for (int i = 0; i < panels; ++i) {
        const double lo = a + i * h, hi = (i + 1 == panels) ? b : a + (i + 1) * h, mid = 0.5 * (lo + hi);
        const double flo = f(lo), fhi = f(hi), fmid = f(mid);
        const double whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
        const Result r = detail::simpson(f, lo, flo, hi, fhi, mid, fmid, whole, tol / panels, max_depth);
        total.value += r.value;
        total.error += r.error;
    }
    return total;
}

/// Integral over [a, inf) of a function decaying at least like a power, via x = a e^s.
/// `decay` is a lower bound on the exponent q in |f| <= C x^{-q}, q > 1; it fixes the cut.
template <class F>
Result semi_infinite(const F& f, double a, double decay, double tol = 1e-12) {
    const double rate = decay - 1.0;
    const double s_max = std::min(745.0, 40.0 / rate);
    auto g = [&](double s) {
        const double x = a * std::exp(s);
        return f(x) * x;
    };
    Result r = adaptive_simpson(g, 0.0, s_max, tol, 64);
    // Remainder beyond the cut under the assumed envelope.
    const double x_cut = a * std::exp(s_max);
    r.error += std::abs(f(x_cut)) * x_cut / rate;
    return r;
}

}  // namespace wvn::quad
