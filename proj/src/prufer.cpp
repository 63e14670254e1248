#include "wvn/prufer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "wvn/errors.hpp"
#include "wvn/ode.hpp"

namespace wvn {

namespace {

constexpr double kPi = std::numbers::pi;

std::complex<double> solve_rho(const FloquetData& F, double x, double u, double du, double* condition = nullptr) {
    const std::complex<double> phi = F.phi(x), dphi = F.dphi(x);
    const double half = 0.5 * F.omega();
    if (condition) *condition = std::abs(phi) * std::abs(dphi) / half;
    const double a = (du * phi.real() - u * dphi.real()) / half;
    const double b = (u * dphi.imag() - du * phi.imag()) / half;
    return {a, b};
}

RealFunction as_function(const GBVPerturbation& V) {
    return [&V](double x) { return V(x); };
}

void check_grid(std::span<const double> grid, double x0, const char* who) {
    if (grid.empty()) throw DomainError(std::string(who) + ": empty output grid");
    const double dir = grid.back() >= x0 ? 1.0 : -1.0;
    double prev = x0;
    for (double x : grid) {
        if (!std::isfinite(x) || dir * (x - prev) < 0.0)
            throw DomainError(std::string(who) + ": grid must be monotone in the direction of integration");
        prev = x;
    }
}

double oscillation(const std::vector<PruferSample>& s, double lo, double hi) {
    double mn = std::numeric_limits<double>::infinity(), mx = -mn;
    for (const auto& p : s)
        if (p.x >= lo && p.x <= hi) mn = std::min(mn, p.logR), mx = std::max(mx, p.logR);
    return mx >= mn ? mx - mn : 0.0;
}

}  // namespace

std::vector<SolutionSample> direct_solve(const PeriodicPotential& V0, const RealFunction& V, double E, double u0,
                                         double du0, double x0, std::span<const double> grid,
                                         const ode::Options& opt) {
    if (!std::isfinite(E) || !std::isfinite(u0) || !std::isfinite(du0)) throw DomainError("direct_solve: non-finite input");
    check_grid(grid, x0, "direct_solve");
    std::vector<SolutionSample> out;
    out.reserve(grid.size());
    auto rhs = [&](double x, const Eigen::Vector2d& y) {
        return Eigen::Vector2d(y[1], (V(x) + V0(x) - E) * y[0]);
    };
    ode::integrate_grid(rhs, x0, Eigen::Vector2d(u0, du0), grid,
                        [&](double x, const Eigen::Vector2d& y) { out.push_back({x, y[0], y[1]}); }, opt);
    return out;
}

std::vector<SolutionSample> direct_solve(const PeriodicPotential& V0, const GBVPerturbation& V, double E, double u0,
                                         double du0, double x0, std::span<const double> grid,
                                         const ode::Options& opt) {
    return direct_solve(V0, as_function(V), E, u0, du0, x0, grid, opt);
}

PruferTrajectory::PruferTrajectory(std::shared_ptr<const FloquetData> context, TrajectorySource source,
                                   std::vector<PruferSample> samples)
    : context_(std::move(context)), source_(source), samples_(std::move(samples)) {
    if (!context_) throw DomainError("PruferTrajectory: missing Floquet context");
}

double PruferTrajectory::theta(std::size_t i) const {
    const auto& s = samples_.at(i);
    return context_->kappa() * s.x + context_->varpi(s.x) + s.eta;
}

std::pair<double, double> PruferTrajectory::solution(std::size_t i) const {
    const auto& s = samples_.at(i);
    const std::complex<double> rho = std::polar(std::exp(s.logR), s.eta);
    return {std::imag(rho * context_->phi(s.x)), std::imag(rho * context_->dphi(s.x))};
}

std::pair<double, double> prufer_initial(const FloquetData& F, double x, double u, double du) {
    const std::complex<double> rho = solve_rho(F, x, u, du);
    if (rho == 0.0) throw DomainError("prufer_initial: zero solution");
    double eta = std::arg(rho);
    if (eta <= -kPi) eta = kPi;
    return {std::log(std::abs(rho)), eta};
}

PruferTrajectory decompose(std::span<const SolutionSample> u, std::shared_ptr<const FloquetData> F,
                           double max_condition) {
    if (!F) throw DomainError("decompose: missing Floquet context");
    if (u.empty()) throw DomainError("decompose: no samples");
    std::vector<PruferSample> out;
    out.reserve(u.size());
    double residual = 0.0;
    for (const auto& s : u) {
        double cond = 0.0;
        const std::complex<double> rho = solve_rho(*F, s.x, s.u, s.du, &cond);
        if (!(cond <= max_condition)) {
            std::ostringstream os;
            os << "decompose: condition number " << cond << " at x = " << s.x << " (energy near a band edge)";
            throw DegenerateFloquetError(os.str());
        }
        if (rho == 0.0) throw DomainError("decompose: zero solution");
        double eta = std::arg(rho);
        if (out.empty()) {
            if (eta <= -kPi) eta = kPi;
        } else {
            const double prev = out.back().eta;
            eta += 2.0 * kPi * std::round((prev - eta) / (2.0 * kPi));
            if (std::abs(eta - prev) > 0.5 * kPi) {
                std::ostringstream os;
                os << "decompose: eta jumps by " << std::abs(eta - prev) << " between x = " << out.back().x
                   << " and x = " << s.x << "; sampling too coarse";
                throw DomainError(os.str());
            }
        }
        const double ur = std::imag(rho * F->phi(s.x)), dur = std::imag(rho * F->dphi(s.x));
        residual = std::max({residual, std::abs(ur - s.u), std::abs(dur - s.du)});
        out.push_back({s.x, std::log(std::abs(rho)), eta});
    }
    PruferTrajectory T(std::move(F), TrajectorySource::decomposed, std::move(out));
    T.set_reconstruction_residual(residual);
    return T;
}

PruferTrajectory decompose_direct(const PeriodicPotential& V0, const RealFunction& V,
                                  std::shared_ptr<const FloquetData> F, double u0, double du0, double x0,
                                  std::span<const double> grid, const ode::Options& opt, int max_refinements) {
    if (!F) throw DomainError("decompose_direct: missing Floquet context");
    check_grid(grid, x0, "decompose_direct");
    for (int r = 0;; ++r) {
        const std::size_t factor = std::size_t{1} << r;
        std::vector<double> fine;
        fine.reserve(grid.size() * factor);
        fine.push_back(grid[0]);
        for (std::size_t i = 1; i < grid.size(); ++i)
            for (std::size_t j = 1; j <= factor; ++j)
                fine.push_back(j == factor ? grid[i]
                                           : grid[i - 1] + (grid[i] - grid[i - 1]) * static_cast<double>(j) /
                                                               static_cast<double>(factor));
        const auto sol = direct_solve(V0, V, F->energy(), u0, du0, x0, fine, opt);
        try {
            const PruferTrajectory full = decompose(sol, F);
            std::vector<PruferSample> thin;
            thin.reserve(grid.size());
            for (std::size_t i = 0; i < full.samples().size(); i += factor) thin.push_back(full.samples()[i]);
            PruferTrajectory T(F, TrajectorySource::decomposed, std::move(thin));
            T.set_reconstruction_residual(full.reconstruction_residual());
            return T;
        } catch (const DegenerateFloquetError&) {
            throw;
        } catch (const DomainError&) {
            if (r >= max_refinements) throw;
        }
    }
}

std::pair<double, double> flow_rhs(const FloquetData& F, double x, double V, double eta) {
    if (V == 0.0) return {0.0, 0.0};
    const std::complex<double> p = F.p(x);
    const double a = std::norm(p);
    const double phi0 = a / F.omega();
    // e^{2 i theta} = (p/|p|)^2 e^{2 i (kappa x + eta)}
    const std::complex<double> e = (p * p / a) * std::polar(1.0, 2.0 * (F.kappa() * x + eta));
    return {phi0 * V * e.imag(), phi0 * V * (-1.0 + e.real())};
}

PruferTrajectory flow(const RealFunction& V, std::shared_ptr<const FloquetData> F, double logR0, double eta0,
                      double x0, std::span<const double> grid, const ode::Options& opt) {
    if (!F) throw DomainError("flow: missing Floquet context");
    if (!std::isfinite(logR0) || !std::isfinite(eta0)) throw DomainError("flow: non-finite initial data");
    check_grid(grid, x0, "flow");
    const FloquetData& ctx = *F;
    std::vector<PruferSample> out;
    out.reserve(grid.size());
    auto rhs = [&](double x, const Eigen::Vector2d& y) {
        const auto [dl, de] = flow_rhs(ctx, x, V(x), y[1]);
        return Eigen::Vector2d(dl, de);
    };
    ode::integrate_grid(rhs, x0, Eigen::Vector2d(logR0, eta0), grid,
                        [&](double x, const Eigen::Vector2d& y) { out.push_back({x, y[0], y[1]}); }, opt);
    return PruferTrajectory(std::move(F), TrajectorySource::flow, std::move(out));
}

PruferTrajectory flow(const GBVPerturbation& V, std::shared_ptr<const FloquetData> F, double logR0, double eta0,
                      double x0, std::span<const double> grid, const ode::Options& opt) {
    return flow(as_function(V), std::move(F), logR0, eta0, x0, grid, opt);
}

std::string to_string(VerdictKind v) {
    switch (v) {
        case VerdictKind::bounded: return "bounded";
        case VerdictKind::decaying: return "decaying";
        case VerdictKind::growing: return "growing";
        case VerdictKind::inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

Verdict classify(const PruferTrajectory& T, double gamma, int p, const ClassifyOptions& opt) {
    if (p < 2) throw DomainError("classify: p must be at least 2");
    const double top = 1.0 / (p - 1), bottom = 1.0 / p;
    const bool power = std::abs(gamma - top) <= 1e-12;
    if (!power && !(gamma > bottom && gamma < top)) {
        std::ostringstream os;
        os << "classify: gamma = " << gamma << " outside (1/p, 1/(p-1)]";
        throw DomainError(os.str());
    }
    const auto& s = T.samples();
    if (s.empty()) throw DomainError("classify: empty trajectory");
    double xmin = s.front().x, xmax = s.front().x;
    for (const auto& q : s) xmin = std::min(xmin, q.x), xmax = std::max(xmax, q.x);
    Verdict v;
    v.window_start = std::max(opt.window_start, xmin);
    v.window_end = std::min(opt.window_end.value_or(xmax), xmax);
    if (!(v.window_start > 0.0) || v.window_end < 100.0 * v.window_start) {
        std::ostringstream os;
        os << "classify: window [" << v.window_start << ", " << v.window_end << "] spans less than two decades";
        throw DomainError(os.str());
    }
    const double e = 1.0 - (p - 1) * gamma;
    v.model = power ? "power" : "stretched";
    auto g = [&](double x) { return power ? std::log(x) : std::pow(x, e) / e; };

    // Least squares log R = C - B g(x).
    double n = 0, sg = 0, sl = 0, sgg = 0, sgl = 0;
    for (const auto& q : s) {
        if (q.x < v.window_start || q.x > v.window_end) continue;
        const double gx = g(q.x);
        n += 1, sg += gx, sl += q.logR, sgg += gx * gx, sgl += gx * q.logR;
    }
    if (n < 3) throw DomainError("classify: fewer than three samples in the window");
    const double mg = sg / n, ml = sl / n;
    const double Sgg = sgg - n * mg * mg, Sgl = sgl - n * mg * ml;
    if (!(Sgg > 0.0)) throw DomainError("classify: degenerate window");
    const double slope = Sgl / Sgg;
    v.B = -slope;
    v.intercept = ml - slope * mg;
    double ssr = 0.0;
    for (const auto& q : s) {
        if (q.x < v.window_start || q.x > v.window_end) continue;
        const double r = q.logR - (v.intercept + slope * g(q.x));
        ssr += r * r;
    }
    v.B_stderr = std::sqrt(ssr / std::max(1.0, n - 2) / Sgg);

    v.oscillation_half = oscillation(s, v.window_start, 0.5 * v.window_end);
    v.oscillation_full = oscillation(s, v.window_start, v.window_end);
    const double last = oscillation(s, 0.5 * v.window_end, v.window_end);
    const double increase = v.oscillation_full - v.oscillation_half;
    if (increase <= opt.stabilization * last + 1e-12) v.kind = VerdictKind::bounded;
    else if (std::abs(v.B) > opt.significance * v.B_stderr) v.kind = v.B > 0 ? VerdictKind::decaying : VerdictKind::growing;
    else v.kind = VerdictKind::inconclusive;
    return v;
}

TwoSolutionReport two_solution_check(const PruferTrajectory& A, const PruferTrajectory& B, double tolerance) {
    if (A.context_ptr() != B.context_ptr() &&
        std::abs(A.energy() - B.energy()) > 1e-12 * std::max(1.0, std::abs(A.energy())))
        throw DomainError("two_solution_check: trajectories from different contexts");
    const auto& a = A.samples();
    const auto& b = B.samples();
    if (a.size() != b.size() || a.empty()) throw DomainError("two_solution_check: sample counts differ");
    TwoSolutionReport rep;
    rep.invariant.reserve(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::abs(a[i].x - b[i].x) > 1e-12 * std::max(1.0, std::abs(a[i].x)))
            throw DomainError("two_solution_check: sample abscissae differ");
        rep.invariant.push_back(std::exp(a[i].logR + b[i].logR) * std::sin(a[i].eta - b[i].eta));
    }
    rep.initial = rep.invariant.front();
    if (rep.initial == 0.0) throw DomainError("two_solution_check: solutions are linearly dependent");
    for (double q : rep.invariant)
        rep.max_relative_drift = std::max(rep.max_relative_drift, std::abs(q - rep.initial) / std::abs(rep.initial));
    rep.wronskian = 0.5 * A.context().omega() * rep.initial;
    rep.pass = rep.max_relative_drift <= tolerance;
    return rep;
}

}  // namespace wvn
