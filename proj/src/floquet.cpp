#include "wvn/floquet.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>

#include "wvn/errors.hpp"

namespace wvn {

namespace {

using Vec4 = Eigen::Vector4d;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Fundamental solutions (u1, u1', u2, u2') with (1, 0), (0, 1) at x = 0, evaluated at the
/// sorted points `xs` in [0, 1]. Integration restarts at the potential's breakpoints.
std::vector<Vec4> fundamental(const PeriodicPotential& V0, double E, std::span<const double> xs,
                              const ode::Options& opt) {
    auto rhs = [&](double x, const Vec4& y) {
        const double q = V0(x) - E;
        return Vec4(y[1], q * y[0], y[3], q * y[2]);
    };
    std::vector<double> cuts;
    for (double b : V0.breakpoints())
        if (b > 0.0 && b < 1.0) cuts.push_back(b);
    cuts.push_back(1.0);

    std::vector<Vec4> out(xs.size());
    Vec4 y(1.0, 0.0, 0.0, 1.0);
    double x0 = 0.0;
    std::size_t i = 0;
    while (i < xs.size() && xs[i] <= 0.0) out[i++] = y;
    for (double cut : cuts) {
        std::vector<double> grid;
        const std::size_t first = i;
        while (i < xs.size() && xs[i] <= cut) grid.push_back(xs[i++]);
        if (grid.empty() || grid.back() < cut) grid.push_back(cut);
        std::size_t w = first;
        Vec4 last = y;
        // Evaluate strictly inside the segment so a piecewise V0 never sees its neighbour's value.
        const double lo = x0 + 1e-13, hi = cut - 1e-13;
        ode::integrate_grid(
            [&](double x, const Vec4& s) { return rhs(std::clamp(x, lo, hi), s); }, x0, y,
            std::span<const double>(grid),
            [&](double x, const Vec4& s) {
                if (w < i && x == xs[w]) out[w++] = s;
                last = s;
            },
            opt);
        y = last;
        x0 = cut;
    }
    return out;
}

double golden_max_abs(const std::function<double(double)>& f, double a, double b, double& arg) {
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = std::abs(f(c)), fd = std::abs(f(d));
    for (int it = 0; it < 80 && (b - a) > 1e-13 * std::max(1.0, std::abs(a)); ++it) {
        if (fc > fd) {
            b = d; d = c; fd = fc; c = b - g * (b - a); fc = std::abs(f(c));
        } else {
            a = c; c = d; fc = fd; d = a + g * (b - a); fd = std::abs(f(d));
        }
    }
    arg = fc > fd ? c : d;
    return std::max(fc, fd);
}

/// Root of |Delta| - 2 between a and b, given opposite signs at the ends.
double bisect_edge(const std::function<double(double)>& delta, double a, double b, double tol) {
    double ga = std::abs(delta(a)) - 2.0;
    for (int it = 0; it < 200 && std::abs(b - a) > tol; ++it) {
        const double m = 0.5 * (a + b);
        const double gm = std::abs(delta(m)) - 2.0;
        if ((gm <= 0.0) == (ga <= 0.0)) {
            a = m;
            ga = gm;
        } else {
            b = m;
        }
    }
    return 0.5 * (a + b);
}

}  // namespace

Monodromy integrate_cell(const PeriodicPotential& V0, double E, const ode::Options& opt) {
    if (!std::isfinite(E)) throw DomainError("integrate_cell: energy must be finite");
    const double one[1] = {1.0};
    const auto y = fundamental(V0, E, std::span<const double>(one, 1), opt).front();
    Monodromy m;
    m.energy = E;
    m.matrix << y[0], y[2], y[1], y[3];
    return m;
}

double discriminant(const PeriodicPotential& V0, double E, const ode::Options& opt) {
    return integrate_cell(V0, E, opt).discriminant();
}

std::vector<std::pair<double, double>> BandStructure::spectrum() const {
    std::vector<std::pair<double, double>> out;
    bool merge = false;
    for (const auto& b : bands) {
        if (merge && !out.empty()) out.back().second = b.upper;
        else out.emplace_back(b.lower, b.upper);
        merge = b.touches_next;
    }
    return out;
}

std::optional<std::size_t> BandStructure::find(double E, double margin) const {
    for (std::size_t i = 0; i < bands.size(); ++i)
        if (bands[i].contains_interior(E, margin * bands[i].width())) return i;
    return std::nullopt;
}

BandStructure band_structure(const PeriodicPotential& V0, double E_min, double E_max, double resolution,
                             const BandOptions& opt) {
    BandStructure bs;
    if (!(E_max > E_min)) return bs;
    if (!(resolution > 0.0)) throw DomainError("band_structure: resolution must be positive");
    const auto n = static_cast<std::size_t>(std::ceil((E_max - E_min) / resolution)) + 1;
    const auto Es = ode::linspace(E_min, E_max, std::max<std::size_t>(n, 3));
    std::function<double(double)> delta = [&](double E) { return discriminant(V0, E, opt.ode); };
    std::vector<double> D(Es.size());
    for (std::size_t i = 0; i < Es.size(); ++i) D[i] = delta(Es[i]);
    auto inband = [&](std::size_t i) { return std::abs(D[i]) <= 2.0; };

    std::optional<Band> open;
    auto start = [&](double E, bool truncated) {
        open = Band{};
        open->lower = E;
        open->lower_truncated = truncated;
    };
    auto close = [&](double E, bool truncated, bool touches) {
        open->upper = E;
        open->upper_truncated = truncated;
        open->touches_next = touches;
        bs.bands.push_back(*open);
        open.reset();
    };

    if (inband(0)) start(Es[0], true);
    for (std::size_t i = 1; i < Es.size(); ++i) {
        if (!inband(i - 1) && inband(i)) start(bisect_edge(delta, Es[i - 1], Es[i], opt.edge_tolerance), false);
        else if (inband(i - 1) && !inband(i)) close(bisect_edge(delta, Es[i - 1], Es[i], opt.edge_tolerance), false, false);

        // Interior extremum of |Delta| close to 2: closed gap or a gap narrower than the grid.
        if (i + 1 < Es.size() && open && inband(i - 1) && inband(i) && inband(i + 1) &&
            std::abs(D[i]) > 1.9 && std::abs(D[i]) > std::abs(D[i - 1]) && std::abs(D[i]) >= std::abs(D[i + 1])) {
            double Estar = Es[i];
            const double peak = golden_max_abs(delta, Es[i - 1], Es[i + 1], Estar);
            if (std::abs(peak - 2.0) <= opt.touch_tolerance) {
                close(Estar, false, true);
                start(Estar, false);
            } else if (peak > 2.0) {
                const double lo = bisect_edge(delta, Es[i - 1], Estar, opt.edge_tolerance);
                const double hi = bisect_edge(delta, Estar, Es[i + 1], opt.edge_tolerance);
                close(lo, false, false);
                start(hi, false);
                std::ostringstream os;
                os << "gap narrower than the scan resolution near E = " << Estar;
                bs.warnings.push_back({Es[i - 1], Es[i + 1], os.str()});
            }
        }
    }
    if (open) close(Es.back(), true, false);

    for (auto& b : bs.bands) {
        const double ka = std::acos(std::clamp(delta(b.lower + 0.25 * b.width()) / 2.0, -1.0, 1.0));
        const double kb = std::acos(std::clamp(delta(b.lower + 0.75 * b.width()) / 2.0, -1.0, 1.0));
        b.branch = kb >= ka ? 1 : -1;
    }
    return bs;
}

double quasimomentum(const PeriodicPotential& V0, double E, const BandStructure& bands, const ode::Options& opt) {
    if (!bands.find(E)) {
        std::ostringstream os;
        os << "quasimomentum: E = " << E << " is not inside any band";
        double best = std::numeric_limits<double>::infinity();
        const Band* nearest = nullptr;
        for (const auto& b : bands.bands) {
            const double d = std::min(std::abs(E - b.lower), std::abs(E - b.upper));
            if (d < best) { best = d; nearest = &b; }
        }
        if (nearest) os << "; nearest band [" << nearest->lower << ", " << nearest->upper << "]";
        throw DomainError(os.str());
    }
    return std::acos(std::clamp(discriminant(V0, E, opt) / 2.0, -1.0, 1.0));
}

std::pair<std::complex<double>, std::complex<double>> FloquetData::cell_solution(double f) const {
    using cd = std::complex<double>;
    const int M = static_cast<int>(node_phi_.size()) - 1;
    const int j = std::clamp(static_cast<int>(std::lround(f * M)), 0, M);
    const double a = static_cast<double>(j) / M;
    cd u = node_phi_[static_cast<std::size_t>(j)], du = node_dphi_[static_cast<std::size_t>(j)];
    if (f == a) return {u, du};
    std::vector<double> pts{a};
    for (double b : V0_->breakpoints())
        if (b > std::min(a, f) && b < std::max(a, f)) pts.push_back(b);
    pts.push_back(f);
    if (f > a) std::sort(pts.begin(), pts.end());
    else std::sort(pts.begin(), pts.end(), std::greater<>());
    // Two RK4 steps per smooth piece; pieces are at most half a grid cell long.
    for (std::size_t s = 0; s + 1 < pts.size(); ++s) {
        const double lo = std::min(pts[s], pts[s + 1]), hi = std::max(pts[s], pts[s + 1]);
        const double d = std::min(1e-13, 0.25 * (hi - lo));
        auto q = [&](double x) { return (*V0_)(std::clamp(x, lo + d, hi - d)) - energy_; };
        const double h = 0.5 * (pts[s + 1] - pts[s]);
        double x = pts[s];
        for (int k = 0; k < 2; ++k) {
            const cd k1u = du, k1d = q(x) * u;
            const cd k2u = du + 0.5 * h * k1d, k2d = q(x + 0.5 * h) * (u + 0.5 * h * k1u);
            const cd k3u = du + 0.5 * h * k2d, k3d = q(x + 0.5 * h) * (u + 0.5 * h * k2u);
            const cd k4u = du + h * k3d, k4d = q(x + h) * (u + h * k3u);
            u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
            du += h / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d);
            x += h;
        }
    }
    return {u, du};
}

std::complex<double> FloquetData::phi(double x) const {
    if (!V0_) return p_(x) * std::polar(1.0, kappa_ * x);
    const double fl = std::floor(x);
    return std::polar(1.0, kappa_ * fl) * cell_solution(x - fl).first;
}

std::complex<double> FloquetData::dphi(double x) const {
    if (!V0_) return (dp_(x) + std::complex<double>(0.0, kappa_) * p_(x)) * std::polar(1.0, kappa_ * x);
    const double fl = std::floor(x);
    return std::polar(1.0, kappa_ * fl) * cell_solution(x - fl).second;
}

double FloquetData::varpi(double x) const {
    const double M = static_cast<double>(varpi_samples_.size());
    const double fl = std::floor(x);
    const double frac = x - fl;
    const auto j = std::min(static_cast<std::size_t>(frac * M), varpi_samples_.size() - 1);
    const double base = varpi_samples_[j] + kTwoPi * winding_ * fl;
    double v = std::arg(p_(x));
    v += kTwoPi * std::round((base - v) / kTwoPi);
    return v;
}

const FourierSeries& FloquetData::unimodular(int K) const {
    const auto it = unimodular_.find(K);
    if (it == unimodular_.end()) {
        std::ostringstream os;
        os << "FloquetData: exp(2iK varpi) not precomputed for K = " << K;
        throw DomainError(os.str());
    }
    return it->second;
}

void FloquetData::finish(int max_harmonic) {
    const int M = static_cast<int>(p_samples_.size());
    const int order = p_.order();
    p_ = FourierSeries::from_samples(p_samples_, order);
    dp_ = p_.derivative();
    std::vector<std::complex<double>> rho(p_samples_.size());
    for (std::size_t j = 0; j < rho.size(); ++j) rho[j] = std::norm(p_samples_[j]) / omega_;
    phi0_ = FourierSeries::from_samples(rho, order);

    varpi_samples_.assign(p_samples_.size(), 0.0);
    double prev = std::arg(p_samples_[0]);
    varpi_samples_[0] = prev;
    for (int j = 1; j < M; ++j) {
        double v = std::arg(p_samples_[static_cast<std::size_t>(j)]);
        v += kTwoPi * std::round((prev - v) / kTwoPi);
        if (std::abs(v - prev) > std::numbers::pi / 2) throw DomainError("FloquetData: phase unwrap guard violated");
        varpi_samples_[static_cast<std::size_t>(j)] = v;
        prev = v;
    }
    {
        double v = std::arg(p_samples_[0]);
        v += kTwoPi * std::round((prev - v) / kTwoPi);
        winding_ = static_cast<int>(std::lround((v - varpi_samples_[0]) / kTwoPi));
    }

    std::vector<std::complex<double>> u(p_samples_.size());
    for (int K = -max_harmonic; K <= max_harmonic; ++K) {
        for (std::size_t j = 0; j < u.size(); ++j) {
            const auto z = p_samples_[j] / std::abs(p_samples_[j]);
            u[j] = std::pow(z, 2 * K);
        }
        unimodular_.emplace(K, FourierSeries::from_samples(u, order));
    }
}

FloquetData FloquetData::from_periodic_factor(double energy, double kappa, const FourierSeries& p, double omega,
                                              int grid, int max_harmonic) {
    if (!(omega > 0.0)) throw DomainError("FloquetData: omega must be positive");
    FloquetData F;
    F.energy_ = energy;
    F.kappa_ = kappa;
    F.omega_ = omega;
    F.p_ = FourierSeries(std::max(p.order(), 16));
    for (int attempt = 0;; ++attempt) {
        F.p_samples_ = p.samples(grid);
        for (const auto& z : F.p_samples_)
            if (std::abs(z) < 1e-12) throw DegenerateFloquetError("FloquetData: periodic factor vanishes");
        try {
            F.unimodular_.clear();
            F.finish(max_harmonic);
            return F;
        } catch (const DegenerateFloquetError&) {
            throw;
        } catch (const DomainError&) {
            if (attempt >= 4) throw;
            grid *= 2;
        }
    }
}

FloquetData floquet_solution(const PeriodicPotential& V0, double E, const FloquetOptions& opt) {
    int M = opt.grid;
    for (int attempt = 0;; ++attempt) {
        std::vector<double> xs(static_cast<std::size_t>(M) + 1);
        for (int j = 0; j <= M; ++j) xs[static_cast<std::size_t>(j)] = static_cast<double>(j) / M;
        const auto Y = fundamental(V0, E, xs, opt.ode);
        Eigen::Matrix2d mono;
        mono << Y.back()[0], Y.back()[2], Y.back()[1], Y.back()[3];
        const double D = mono.trace();
        if (2.0 - std::abs(D) < opt.edge_tolerance) {
            std::ostringstream os;
            os << "floquet_solution: E = " << E << " is at or outside a band edge (Delta = " << D << ")";
            throw DegenerateFloquetError(os.str());
        }
        const double k = std::acos(D / 2.0);
        const std::complex<double> mu = std::polar(1.0, k);
        Eigen::Vector2cd va(mono(0, 1), mu - mono(0, 0));
        Eigen::Vector2cd vb(mu - mono(1, 1), mono(1, 0));
        const Eigen::Vector2cd v = va.norm() >= vb.norm() ? va : vb;

        std::vector<std::complex<double>> phi(static_cast<std::size_t>(M) + 1), dphi(static_cast<std::size_t>(M) + 1);
        for (int j = 0; j <= M; ++j) {
            const auto& y = Y[static_cast<std::size_t>(j)];
            phi[static_cast<std::size_t>(j)] = v[0] * y[0] + v[1] * y[2];
            dphi[static_cast<std::size_t>(j)] = v[0] * y[1] + v[1] * y[3];
        }
        double omega = 2.0 * std::imag(dphi[0] * std::conj(phi[0]));
        double kappa = k;
        if (omega < 0.0) {
            for (auto& z : phi) z = std::conj(z);
            for (auto& z : dphi) z = std::conj(z);
            omega = -omega;
            kappa = -k;
        }

        FloquetData F;
        F.energy_ = E;
        F.kappa_ = kappa;
        F.p_samples_.resize(static_cast<std::size_t>(M));
        double sup = 0.0;
        for (int j = 0; j < M; ++j) {
            const double x = xs[static_cast<std::size_t>(j)];
            F.p_samples_[static_cast<std::size_t>(j)] = phi[static_cast<std::size_t>(j)] * std::polar(1.0, -kappa * x);
            sup = std::max(sup, std::abs(F.p_samples_[static_cast<std::size_t>(j)]));
        }
        // Normalization: p(0) real positive, sup |p| = 1.
        const std::complex<double> c = std::conj(F.p_samples_[0]) / std::abs(F.p_samples_[0]) / sup;
        for (auto& z : F.p_samples_) z *= c;
        F.omega_ = omega * std::norm(c);
        F.p_ = FourierSeries(opt.order);
        F.V0_ = std::make_shared<const PeriodicPotential>(V0);
        F.node_phi_.resize(phi.size());
        F.node_dphi_.resize(dphi.size());
        for (std::size_t j = 0; j < phi.size(); ++j) {
            F.node_phi_[j] = c * phi[j];
            F.node_dphi_[j] = c * dphi[j];
        }
        try {
            F.finish(opt.max_harmonic);
            return F;
        } catch (const DomainError&) {
            if (attempt >= 4) throw;
            M *= 2;
        }
    }
}

double floquet_residual(const PeriodicPotential& V0, const FloquetData& F, int samples) {
    const auto d2 = F.dp_fourier().derivative();
    const double kap = F.kappa();
    double worst = 0.0;
    for (int j = 0; j < samples; ++j) {
        const double x = static_cast<double>(j) / samples;
        const auto p = F.p(x);
        const auto dp = F.dp(x);
        const auto pp = d2(x);
        // phi'' = (p'' + 2 i kappa p' - kappa^2 p) e^{i kappa x}; the phase factor has modulus one.
        const auto lhs = -(pp + std::complex<double>(0.0, 2.0 * kap) * dp - kap * kap * p) + (V0(x) - F.energy()) * p;
        worst = std::max(worst, std::abs(lhs));
    }
    return worst;
}

PFourier fourier_of_p(const FloquetData& F, int order) {
    if (order < 0) throw DomainError("fourier_of_p: negative order");
    const int M = F.grid();
    const int ref = std::min((M - 1) / 2, std::max(2 * order, order + 32));
    const auto full = FourierSeries::from_samples(F.p_samples(), std::max(ref, order));
    PFourier out;
    out.series = full.resized(order);
    out.series = FourierSeries(order, out.series.coefficients());
    for (int n = -full.order(); n <= full.order(); ++n)
        if (std::abs(n) > order) out.tail_mass += std::abs(full.coeff(n));
    for (int j = 0; j < M; ++j) {
        const double x = static_cast<double>(j) / M;
        out.reconstruction_error =
            std::max(out.reconstruction_error, std::abs(F.p_samples()[static_cast<std::size_t>(j)] - out.series(x)));
    }
    out.below_decay_floor = out.tail_mass > 1e-8;
    return out;
}

}  // namespace wvn
