#pragma once

// Modified Pruefer variables (log R, eta) relative to a Floquet solution phi:
// (u', u) = Im[rho (phi', phi)], rho = R e^{i eta}, theta = kappa x + varpi + eta.

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wvn/floquet.hpp"
#include "wvn/gbv.hpp"

namespace wvn {

using RealFunction = std::function<double(double)>;

struct SolutionSample {
    double x;
    double u;
    double du;
};

/// Solves -u'' + (V + V0) u = E u from (u, u')(x0) through every point of `grid`
/// (monotone, forward or backward from x0).
std::vector<SolutionSample> direct_solve(const PeriodicPotential& V0, const RealFunction& V, double E, double u0,
                                         double du0, double x0, std::span<const double> grid,
                                         const ode::Options& opt = {});
std::vector<SolutionSample> direct_solve(const PeriodicPotential& V0, const GBVPerturbation& V, double E, double u0,
                                         double du0, double x0, std::span<const double> grid,
                                         const ode::Options& opt = {});

struct PruferSample {
    double x;
    double logR;
    double eta;
};

enum class TrajectorySource { flow, decomposed };

class PruferTrajectory {
public:
    PruferTrajectory(std::shared_ptr<const FloquetData> context, TrajectorySource source,
                     std::vector<PruferSample> samples);

    const std::vector<PruferSample>& samples() const noexcept { return samples_; }
    const FloquetData& context() const noexcept { return *context_; }
    std::shared_ptr<const FloquetData> context_ptr() const noexcept { return context_; }
    double energy() const noexcept { return context_->energy(); }
    TrajectorySource source() const noexcept { return source_; }
    /// max |(u', u) - Im[rho (phi', phi)]| over the input samples (decomposed only).
    double reconstruction_residual() const noexcept { return residual_; }
    void set_reconstruction_residual(double r) { residual_ = r; }

    /// theta = kappa x + varpi(x) + eta(x) at sample i.
    double theta(std::size_t i) const;
    /// (u, u') rebuilt from (R, eta) at sample i.
    std::pair<double, double> solution(std::size_t i) const;

private:
    std::shared_ptr<const FloquetData> context_;
    TrajectorySource source_;
    std::vector<PruferSample> samples_;
    double residual_ = 0.0;
};

/// Solves for rho at each sample; eta is unwrapped continuously from Arg rho(first) in (-pi, pi].
/// Throws DegenerateFloquetError when |phi||phi'| / (omega/2) exceeds `max_condition`, and
/// DomainError when consecutive samples differ by more than pi/2 in eta (sampling too coarse).
PruferTrajectory decompose(std::span<const SolutionSample> u, std::shared_ptr<const FloquetData> F,
                           double max_condition = 1e10);

/// direct_solve followed by decompose. The grid is refined (each interval halved) while the
/// eta unwrap guard fails, up to `max_refinements` times; the returned samples are then
/// thinned back to the requested grid.
PruferTrajectory decompose_direct(const PeriodicPotential& V0, const RealFunction& V,
                                  std::shared_ptr<const FloquetData> F, double u0, double du0, double x0,
                                  std::span<const double> grid, const ode::Options& opt = {},
                                  int max_refinements = 6);

/// Integrates [log R]' = Im(Phi0 V e^{2 i theta}), eta' = Phi0 V (-1 + cos 2 theta)
/// from (logR0, eta0) at x0 through `grid` (forward or backward).
PruferTrajectory flow(const RealFunction& V, std::shared_ptr<const FloquetData> F, double logR0, double eta0,
                      double x0, std::span<const double> grid, const ode::Options& opt = {});
PruferTrajectory flow(const GBVPerturbation& V, std::shared_ptr<const FloquetData> F, double logR0, double eta0,
                      double x0, std::span<const double> grid, const ode::Options& opt = {});

/// Right-hand side of the flow at one point, (d logR/dx, d eta/dx).
std::pair<double, double> flow_rhs(const FloquetData& F, double x, double V, double eta);

/// Initial (log R, eta) matching (u, u') at x for the context F.
std::pair<double, double> prufer_initial(const FloquetData& F, double x, double u, double du);

enum class VerdictKind { bounded, decaying, growing, inconclusive };
std::string to_string(VerdictKind v);

struct ClassifyOptions {
    double window_start = 1e2;
    std::optional<double> window_end;  // default: last sample
    /// |B| must exceed this many standard errors for a decaying/growing verdict.
    double significance = 5.0;
    /// Oscillation growth under horizon doubling below this fraction counts as stabilised.
    double stabilization = 0.1;
};

struct Verdict {
    VerdictKind kind = VerdictKind::inconclusive;
    /// "power": log R = C - B ln x; "stretched": log R = C - B x^{1-(p-1) gamma} / (1 - (p-1) gamma).
    std::string model;
    double B = 0.0;
    double B_stderr = 0.0;
    double intercept = 0.0;
    double window_start = 0.0;
    double window_end = 0.0;
    /// sup - inf of log R on [start, end/2] and on [start, end].
    double oscillation_half = 0.0;
    double oscillation_full = 0.0;
};

/// Fits the decay/growth rate of log R; throws DomainError if the window spans less than two
/// decades or gamma is outside (1/p, 1/(p-1)].
Verdict classify(const PruferTrajectory& T, double gamma, int p, const ClassifyOptions& opt = {});

struct TwoSolutionReport {
    /// R1 R2 sin(eta1 - eta2); the Wronskian u1 u2' - u1' u2 equals (omega/2) times this.
    std::vector<double> invariant;
    double initial = 0.0;
    double max_relative_drift = 0.0;
    double wronskian = 0.0;
    bool pass = false;
};

/// Checks constancy of R1 R2 sin(eta1 - eta2). Both trajectories must share the context and
/// the sample abscissae.
TwoSolutionReport two_solution_check(const PruferTrajectory& A, const PruferTrajectory& B, double tolerance = 1e-6);

}  // namespace wvn
