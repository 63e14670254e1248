#pragma once

// Floquet theory for -u'' + V0 u = E u with 1-periodic V0: monodromy,
// discriminant, bands, quasimomentum and the Floquet solution p(x) exp(i k x).

#include <Eigen/Core>
#include <Eigen/LU>

#include <complex>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "wvn/fourier.hpp"
#include "wvn/ode.hpp"
#include "wvn/periodic_potential.hpp"

namespace wvn {

/// Transfer matrix of (u, u') across one period.
struct Monodromy {
    Eigen::Matrix2d matrix;
    double energy = 0.0;

    double discriminant() const { return matrix.trace(); }
    double determinant() const { return matrix.determinant(); }
};

Monodromy integrate_cell(const PeriodicPotential& V0, double E, const ode::Options& opt = {});
double discriminant(const PeriodicPotential& V0, double E, const ode::Options& opt = {});

struct Band {
    double lower = 0.0;
    double upper = 0.0;
    /// +1 if the quasimomentum increases with E on this band, -1 otherwise.
    int branch = 1;
    /// The band edge coincides with the energy-range boundary rather than |Delta| = 2.
    bool lower_truncated = false;
    bool upper_truncated = false;
    /// A closed gap: the neighbouring band starts exactly here.
    bool touches_next = false;

    double width() const { return upper - lower; }
    bool contains_interior(double E, double margin = 0.0) const { return E > lower + margin && E < upper - margin; }
};

struct BandWarning {
    double lower;
    double upper;
    std::string message;
};

struct BandStructure {
    std::vector<Band> bands;
    std::vector<BandWarning> warnings;

    /// Union of bands with touching neighbours merged (closed gaps removed).
    std::vector<std::pair<double, double>> spectrum() const;
    /// Index of the band whose interior contains E.
    std::optional<std::size_t> find(double E, double margin = 0.0) const;
};

struct BandOptions {
    ode::Options ode{};
    /// Edges are refined until the bracket is below this width.
    double edge_tolerance = 1e-12;
    /// A local maximum of |Delta| within this distance of 2 counts as a closed gap.
    double touch_tolerance = 1e-7;
};

BandStructure band_structure(const PeriodicPotential& V0, double E_min, double E_max, double resolution,
                             const BandOptions& opt = {});

/// k = arccos(Delta / 2) in (0, pi); throws DomainError if E is not inside a band.
double quasimomentum(const PeriodicPotential& V0, double E, const BandStructure& bands, const ode::Options& opt = {});

struct FloquetOptions {
    ode::Options ode{};
    int grid = 2048;
    int order = 64;
    /// Minimum of 2 - |Delta| accepted as the band interior.
    double edge_tolerance = 1e-9;
    /// Largest K for which Fourier data of exp(2 i K varpi) is precomputed.
    int max_harmonic = 8;
};

/// Per-energy Floquet bundle. phi(x) = p(x) exp(i kappa x) with omega = 2 Im(phi' conj(phi)) > 0.
/// `k` is the quasimomentum in (0, pi); `kappa` = orientation * k is the exponent that makes
/// the Wronskian positive.
class FloquetData {
public:
    /// Assemble from a periodic factor sampled on a uniform grid (used for synthetic
    /// contexts); `omega` is supplied by the caller.
    static FloquetData from_periodic_factor(double energy, double kappa, const FourierSeries& p, double omega,
                                            int grid = 2048, int max_harmonic = 8);

    double energy() const noexcept { return energy_; }
    double k() const noexcept { return std::abs(kappa_); }
    double kappa() const noexcept { return kappa_; }
    int orientation() const noexcept { return kappa_ >= 0 ? 1 : -1; }
    double omega() const noexcept { return omega_; }

    const FourierSeries& p_fourier() const noexcept { return p_; }
    const FourierSeries& dp_fourier() const noexcept { return dp_; }
    const FourierSeries& phi0_fourier() const noexcept { return phi0_; }
    const std::vector<std::complex<double>>& p_samples() const noexcept { return p_samples_; }
    const std::vector<double>& varpi_samples() const noexcept { return varpi_samples_; }
    int grid() const noexcept { return static_cast<int>(p_samples_.size()); }
    int order() const noexcept { return p_.order(); }

    std::complex<double> p(double x) const { return p_(x); }
    std::complex<double> dp(double x) const { return dp_(x); }
    /// phi and phi' at x. Contexts built from a periodic potential step the cell ODE from the
    /// nearest stored node (exact through breakpoints); synthetic ones use the Fourier form.
    std::complex<double> phi(double x) const;
    std::complex<double> dphi(double x) const;
    double phi0(double x) const { return std::norm(p_(x)) / omega_; }
    /// Continuous branch of Arg p(x) matching the unwrapped grid samples.
    double varpi(double x) const;

    /// Fourier series of exp(2 i K varpi(x)) = (p / |p|)^(2K).
    const FourierSeries& unimodular(int K) const;

    /// Winding number of p around the origin over one period.
    int winding() const noexcept { return winding_; }

private:
    friend FloquetData floquet_solution(const PeriodicPotential&, double, const FloquetOptions&);
    FloquetData() = default;
    void finish(int max_harmonic);
    std::pair<std::complex<double>, std::complex<double>> cell_solution(double x) const;

    double energy_ = 0.0;
    double kappa_ = 0.0;
    double omega_ = 0.0;
    FourierSeries p_, dp_, phi0_;
    std::vector<std::complex<double>> p_samples_;
    std::vector<double> varpi_samples_;
    std::map<int, FourierSeries> unimodular_;
    int winding_ = 0;
    // (phi, phi') on the closed cell grid j / M, j = 0..M, when built from a potential.
    std::shared_ptr<const PeriodicPotential> V0_;
    std::vector<std::complex<double>> node_phi_, node_dphi_;
};

FloquetData floquet_solution(const PeriodicPotential& V0, double E, const FloquetOptions& opt = {});

/// sup over one period of |-phi'' + (V0 - E) phi|, computed from the Fourier form of p.
double floquet_residual(const PeriodicPotential& V0, const FloquetData& F, int samples = 512);

struct PFourier {
    FourierSeries series;
    double reconstruction_error = 0.0;  // sup |p - truncated series| on the sample grid
    double tail_mass = 0.0;             // sum of |c(n)| beyond the requested order
    bool below_decay_floor = false;     // tail mass larger than 1e-8
};

PFourier fourier_of_p(const FloquetData& F, int order);

}  // namespace wvn
