#pragma once

// Construction of perturbations sum_j L_j x^{-gamma} cos(phi_j x + c_j xi(x)) + beta0(x) with a
// decaying solution at a resonant energy, by feedback steering of xi.
//
// Conventions: the cosine for tuple phase phi_j contributes the resonant half
// (L_j / 2) x^{-gamma} e^{-i(phi_j x + xi_j)}, so the averaged flow reads
//   [log R]' ~ Im(Lambda e^{i psi}) x^{-(p-1) gamma},  psi = 2 eta - xi,
// and decay at rate |Lambda| needs psi -> t_star = -Arg(Lambda) - pi/2.

#include <complex>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wvn/floquet.hpp"
#include "wvn/gbv.hpp"
#include "wvn/harmonics.hpp"
#include "wvn/prufer.hpp"

namespace wvn {

struct EmbeddingPlan {
    std::shared_ptr<const FloquetData> context;
    double energy = 0.0;
    double k = 0.0;
    double kappa = 0.0;
    int p = 2;
    double gamma = 1.0;
    /// Resonant tuple (length p - 1) with 2 kappa = sum mod 2 pi.
    std::vector<double> phases;
    /// Distinct tuple phases, one cosine term each, with multiplicity and amplitude.
    std::vector<double> term_phases;
    std::vector<int> multiplicity;
    std::vector<double> L;
    /// xi_j = xi_split[j] * xi with sum_j multiplicity[j] * xi_split[j] = 1.
    std::vector<double> xi_split;
    /// Distinct orderings of the tuple.
    int C1 = 1;
    /// Mean of f_{p-1,1} e^{2 i varpi} against the resonant Fourier mode.
    std::complex<double> mean_criterion;
    /// C1 * mean_criterion * prod (L_j / 2)^{multiplicity_j}.
    std::complex<double> Lambda_mean;
    double t_star = 0.0;
    double predicted_B = 0.0;
    /// dist(2 kappa - sum, 2 pi Z).
    double resonance_residual = 0.0;
    /// True when the tuple was given with the opposite orientation and negated.
    bool negated = false;
};

struct PlanOptions {
    double resonance_tolerance = 1e-6;
    /// |mean criterion| at or below this counts as zero.
    double mean_floor = 1e-10;
};

/// Assembles a plan. Throws DomainError when gamma is outside (1/p, 1/(p-1)], the tuple is not
/// resonant, 2 kappa is a sum of fewer table phases, or the mean criterion vanishes.
EmbeddingPlan plan_embedding(std::shared_ptr<const FloquetData> F, const HarmonicTable& T,
                             std::vector<double> phases, double gamma, std::vector<double> L,
                             const PlanOptions& opt = {});

/// The plan's potential with the given phase functions (one per term, or empty for xi = 0).
GBVPerturbation plan_potential(const EmbeddingPlan& plan, std::vector<PhaseFunction> xi = {},
                               std::optional<Envelope> beta0 = std::nullopt, double x0 = 1.0);

struct SteeringOptions {
    /// xi' = clamp(gain * wrap(psi - target), +-clamp_factor * predicted_B * x^{-(p-1) gamma}).
    double gain = 1.0;
    double clamp_factor = 4.0;
    std::optional<double> target;  // default t_star
    double x_start = 1.0;
    double logR0 = 0.0;
    /// Initial eta; default puts psi(x_start) on the target.
    std::optional<double> eta0;
    double samples_per_unit = 8.0;
    double tolerance = 0.05;
    std::optional<Envelope> beta0;
    ode::Options ode{};
};

struct SteeringResult {
    PruferTrajectory trajectory;
    std::vector<double> xi;
    std::vector<double> dxi;
    std::vector<double> psi;
    double target = 0.0;
    /// |wrap(psi(X) - target)|.
    double final_error = 0.0;
    bool converged = false;
    /// tolerance - final_error.
    double margin = 0.0;
    /// max |xi'(x)| x^{(p-1) gamma} over the run.
    double max_scaled_dxi = 0.0;
};

/// Co-integrates (log R, eta, xi) from x_start to X with the feedback law above. Does not throw
/// on non-convergence; `converged` and `margin` report it.
SteeringResult steer_xi(const EmbeddingPlan& plan, double X, const SteeringOptions& opt = {});

/// Potential with xi frozen to the steered profile (linear interpolation, constant beyond).
GBVPerturbation realized_potential(const EmbeddingPlan& plan, const SteeringResult& run,
                                   std::optional<Envelope> beta0 = std::nullopt, double x0 = 1.0);

struct Beta0Check {
    bool pass = false;
    double value_ratio = 0.0;       // growth ratio of x^{gamma} |beta0|
    double derivative_ratio = 0.0;  // growth ratio of x^{p gamma} |beta0'|
    std::string detail;
};

/// beta0 = O(x^{-gamma}) and beta0' = O(x^{-p gamma}), tested by ratio on [x0, X].
Beta0Check check_beta0(const Envelope& beta0, int p, double gamma, double x0 = 1.0, double X = 1e6);

struct Beta0Choice {
    Envelope beta0;
    /// beta0(x) = sum_I coefficients[I-1] x^{-I gamma} for x >= x0.
    std::vector<double> coefficients;
    /// Averaged eta drift rate per order, sum over zero-sum ordered tuples of f_{I,0} prod c.
    std::vector<std::complex<double>> drift;
    bool zero = true;
    Beta0Check check;
};

/// Cancels the averaged eta drift of the zero-phase-sum combinations of the plan's cosine halves.
/// Throws DomainError if a needed table entry is missing or the result fails check_beta0.
Beta0Choice choose_beta0(const EmbeddingPlan& plan, const HarmonicTable& T, double x0 = 1.0);

struct DriftMeasurement {
    double x_start = 0.0;
    double X = 0.0;
    /// eta drift between the first and last 5% of [x_start, X], averaged over initial phases.
    double drift = 0.0;
    double drift_doubled = 0.0;  // same on [x_start, 2X]
};

/// Numerical eta drift with xi = 0, averaged over `phases` equally spaced initial eta.
DriftMeasurement measure_drift(const EmbeddingPlan& plan, std::optional<Envelope> beta0, double x_start, double X,
                               int phases = 8, const ode::Options& opt = {});

struct DemoOptions {
    SteeringOptions steering{};
    double window_start = 1e2;
    double B_tolerance = 0.15;
};

struct DemoReport {
    EmbeddingPlan plan;
    SteeringResult steering;
    Verdict verdict;
    double relative_error = 0.0;  // |B_fit - predicted_B| / predicted_B
    /// Integrals of R^2 over [2^j a, 2^{j+1} a] and their successive ratios.
    std::vector<double> tail_integrals;
    std::vector<double> tail_ratios;
    bool ratios_below_one = false;
    bool ratios_decreasing = false;
    /// gamma = 1/(p-1): polynomial decay, square integrable iff B > 1/2 (reported only).
    bool endpoint = false;
    bool l2 = false;
    bool success = false;
    std::string message;
};

/// Steers, classifies and checks the tail. Throws ConvergenceError when psi does not converge.
DemoReport demo_embedded(const EmbeddingPlan& plan, double X, const DemoOptions& opt = {});

struct GenericityOptions {
    int trials = 200;
    double epsilon = 1e-3;
    double floor = 1e-9;
    std::uint64_t seed = 1;
    double divisor_floor = 1e-6;
    int grid = 512;
};

struct GenericityStats {
    int trials = 0;
    int nonzero = 0;
    double fraction = 0.0;
    std::complex<double> base_value;
    double min_abs = 0.0;
    double max_abs = 0.0;
    std::vector<double> values;
};

/// Synthetic context phi = p e^{i kappa x} with omega = 2 sum_n (2 pi n + kappa) |p_n|^2.
std::shared_ptr<const FloquetData> synthetic_context(const FourierSeries& p, double kappa, int grid = 512);

/// Mean criterion of the tuple on a synthetic context.
std::complex<double> synthetic_mean_criterion(const FourierSeries& p, double kappa, std::span<const double> tuple,
                                              double divisor_floor = 1e-6, int grid = 512);

/// Fraction of complex Gaussian perturbations of size epsilon of the Fourier coefficients of
/// `base` (same order) for which |mean criterion| > floor.
GenericityStats genericity_scan(const FourierSeries& base, double kappa, std::span<const double> tuple,
                                const GenericityOptions& opt = {});

}  // namespace wvn
