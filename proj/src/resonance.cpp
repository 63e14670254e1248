#include "wvn/resonance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "wvn/errors.hpp"
#include "wvn/harmonics.hpp"

namespace wvn {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double reduce_mod_2pi(double s, double tol) {
    double v = std::fmod(s, kTwoPi);
    if (v < 0) v += kTwoPi;
    if (v > kTwoPi - tol || v < tol) v = 0.0;
    return v;
}

double catalan(int n) {
    double c = 1.0;
    for (int i = 0; i < n; ++i) c = c * 2.0 * (2 * i + 1) / (i + 2);
    return c;
}

struct Target {
    double t;
    std::size_t sum;
    int sign;
};

}  // namespace

std::vector<PhaseSum> phase_sums(std::span<const double> A, int p, double merge_tolerance) {
    for (double a : A)
        if (!std::isfinite(a)) throw DomainError("phase_sums: non-finite phase");
    std::vector<PhaseSum> raw;
    const int P = static_cast<int>(A.size());
    for (int l = 1; l <= p - 1; ++l) {
        for (const Multiset& M : multisets(P, l)) {
            double s = 0.0;
            for (int i : M) s += A[static_cast<std::size_t>(i)];
            raw.push_back({reduce_mod_2pi(s, merge_tolerance), {{l, M}}});
        }
    }
    std::sort(raw.begin(), raw.end(), [](const PhaseSum& a, const PhaseSum& b) { return a.value < b.value; });
    std::vector<PhaseSum> out;
    for (auto& r : raw) {
        if (!out.empty() && r.value - out.back().value <= merge_tolerance) {
            auto& prov = out.back().provenance;
            prov.insert(prov.end(), r.provenance.begin(), r.provenance.end());
        } else {
            out.push_back(std::move(r));
        }
    }
    return out;
}

std::size_t ResonanceSet::count() const {
    std::size_t n = 0;
    for (const auto& e : energies) n += e.size();
    return n;
}

double band_k(const PeriodicPotential& V0, double E, const ode::Options& opt) {
    const double half = std::clamp(0.5 * discriminant(V0, E, opt), -1.0, 1.0);
    return std::acos(half);
}

ResonanceSet resonant_energies(const PeriodicPotential& V0, const BandStructure& bands, std::vector<PhaseSum> sums,
                               const ResonanceOptions& opt) {
    ResonanceSet out;
    out.sums = std::move(sums);
    out.bands = bands.bands;
    out.tolerance = opt.tolerance;
    out.energies.resize(out.bands.size());

    std::vector<Target> targets;
    for (std::size_t i = 0; i < out.sums.size(); ++i) {
        const double s = out.sums[i].value;
        targets.push_back({0.5 * s, i, +1});
        targets.push_back({kPi - 0.5 * s, i, -1});
    }
    std::sort(targets.begin(), targets.end(), [](const Target& a, const Target& b) { return a.t < b.t; });

    for (std::size_t b = 0; b < out.bands.size(); ++b) {
        const Band& band = out.bands[b];
        if (band.width() <= 1e-12 * std::max(1.0, std::abs(band.upper))) {
            out.flagged.push_back({b, "band too narrow for bisection resolution"});
            continue;
        }
        const double k_lo = band_k(V0, band.lower, opt.ode), k_hi = band_k(V0, band.upper, opt.ode);
        const double kmin = std::min(k_lo, k_hi), kmax = std::max(k_lo, k_hi);
        const bool increasing = k_hi > k_lo;

        for (std::size_t g = 0; g < targets.size();) {
            std::size_t h = g;
            while (h < targets.size() && targets[h].t - targets[g].t <= 1e-13) ++h;
            const double t = targets[g].t;
            std::vector<std::pair<std::size_t, int>> provenance;
            for (std::size_t i = g; i < h; ++i) provenance.emplace_back(targets[i].sum, targets[i].sign);
            g = h;

            if (t < opt.tolerance || t > kPi - opt.tolerance) {
                if (t >= kmin - opt.tolerance && t <= kmax + opt.tolerance) {
                    std::ostringstream os;
                    os << "target k = " << t << " is a band edge; excluded";
                    out.boundary.push_back({b, os.str()});
                }
                continue;
            }
            if (!(t > kmin && t < kmax)) continue;
            ++out.targets_hit;

            double lo = band.lower, hi = band.upper;
            const double resolution = 2.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(hi));
            for (int it = 0; it < 200 && hi - lo > resolution; ++it) {
                const double mid = 0.5 * (lo + hi);
                const bool below = (band_k(V0, mid, opt.ode) - t) * (increasing ? 1.0 : -1.0) < 0.0;
                (below ? lo : hi) = mid;
            }
            const double r_lo = std::abs(band_k(V0, lo, opt.ode) - t), r_hi = std::abs(band_k(V0, hi, opt.ode) - t);
            const double E = r_lo <= r_hi ? lo : hi;
            const double residual = std::min(r_lo, r_hi);
            if (residual >= opt.residual_limit) {
                std::ostringstream os;
                os << "bisection for k = " << t << " stalled at E = " << E << " with residual " << residual;
                out.flagged.push_back({b, os.str()});
                continue;
            }
            out.energies[b].push_back({E, band_k(V0, E, opt.ode), t, residual, std::move(provenance)});
        }
        auto& list = out.energies[b];
        std::sort(list.begin(), list.end(),
                  [](const ResonantEnergy& a, const ResonantEnergy& c) { return a.energy < c.energy; });
    }
    return out;
}

SmallDivisorSum smalldivisor_sum(std::span<const std::complex<double>> c, std::span<const double> phases, double k,
                                 int j, int L_max, double floor, double extra_tail) {
    if (c.size() != phases.size()) throw DomainError("smalldivisor_sum: amplitude and phase lists differ in length");
    if (j < 1) throw DomainError("smalldivisor_sum: j must be at least 1");
    if (L_max < 0) throw DomainError("smalldivisor_sum: negative L_max");
    const int L = std::min<int>(L_max, static_cast<int>(c.size()));
    SmallDivisorSum out;
    out.min_divisor = std::numeric_limits<double>::infinity();
    double S = 0.0, T = extra_tail;
    for (int l = 0; l < static_cast<int>(c.size()); ++l) (l < L ? S : T) += std::abs(c[static_cast<std::size_t>(l)]);
    const int n = static_cast<int>(c.size());
    double d_full = std::numeric_limits<double>::infinity();
    if (n > 0) {
        // Ordered tuples over the whole list; those with every index below L enter the sum.
        std::vector<int> idx(static_cast<std::size_t>(j), 0);
        std::vector<double> ph(static_cast<std::size_t>(j));
        while (true) {
            bool inside = true;
            double w = 1.0;
            for (int i = 0; i < j; ++i) {
                const auto l = static_cast<std::size_t>(idx[static_cast<std::size_t>(i)]);
                inside = inside && idx[static_cast<std::size_t>(i)] < L;
                w *= std::abs(c[l]);
                ph[static_cast<std::size_t>(i)] = phases[l];
            }
            // Every contiguous block sum is a potential divisor of the recursion.
            double d = std::numeric_limits<double>::infinity();
            for (int a = 0; a < j; ++a) {
                double s = 0.0;
                for (int e = a; e < j; ++e) {
                    s += ph[static_cast<std::size_t>(e)];
                    d = std::min(d, std::abs(2.0 * std::sin(0.5 * (2.0 * k - s))));
                }
            }
            if (w > 0.0) d_full = std::min(d_full, d);
            if (inside && w > 0.0) {
                out.min_divisor = std::min(out.min_divisor, d);
                out.value += w * h_value(ph, k, floor);
            }
            int pos = j - 1;
            while (pos >= 0 && idx[static_cast<std::size_t>(pos)] == n - 1) idx[static_cast<std::size_t>(pos--)] = 0;
            if (pos < 0) break;
            ++idx[static_cast<std::size_t>(pos)];
        }
    }
    // h_j <= Catalan(j) d^{-j}; mass beyond the supplied list is assumed to meet no smaller divisor.
    const double d = std::max(std::isfinite(d_full) ? d_full : 1.0, floor);
    out.tail_bound = (std::pow(S + T, j) - std::pow(S, j)) * catalan(j) / std::pow(d, j);
    return out;
}

double hausdorff_bound(int p, double frak_a) {
    if (p < 2) throw DomainError("hausdorff_bound: p must be at least 2");
    if (!(frak_a > 0.0 && frak_a < 1.0 / (p - 1))) {
        std::ostringstream os;
        os << "hausdorff_bound: frak_a = " << frak_a << " outside (0, 1/(p-1))";
        throw DomainError(os.str());
    }
    return (p - 1) * frak_a;
}

}  // namespace wvn
