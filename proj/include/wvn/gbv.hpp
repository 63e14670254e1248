#pragma once

// Decaying oscillatory perturbations V(x) = sum_l c_l exp(-i phi_l x) gamma_l(x) + beta0(x),
// with envelopes of bounded variation and L^p tails.

#include <complex>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace wvn {

/// A numerical quantity with an error bar; `estimated` marks grid-based lower bounds.
struct Estimate {
    double value = 0.0;
    double error = 0.0;
    bool estimated = false;
};

class Envelope {
public:
    enum class Kind { power_tail, sampled, custom, sum };

    /// x^{-gamma} on [x0, inf), held at x0^{-gamma} below the onset.
    static Envelope power_tail(double gamma, double x0);
    /// Piecewise-linear through (x_i, v_i); v_0 before the first node, 0 after the last.
    static Envelope sampled(std::vector<double> x, std::vector<double> v);
    /// User-supplied C^1 envelope. Without `variation` metadata, condition checks refuse it.
    static Envelope custom(std::string name, std::function<double(double)> value,
                           std::function<double(double)> derivative, double onset,
                           std::optional<double> variation = std::nullopt,
                           std::optional<double> lp_norm = std::nullopt, std::optional<double> lp_exponent = std::nullopt);
    static Envelope sum(std::vector<Envelope> parts);

    Kind kind() const noexcept;
    std::string describe() const;
    double operator()(double x) const;
    double derivative(double x) const;
    double onset() const noexcept;
    /// Power-tail exponent, if this is a power tail.
    std::optional<double> exponent() const;

    /// Total variation on (0, inf). Throws ConfigError for custom envelopes without metadata.
    Estimate variation() const;
    bool has_variation() const noexcept;
    /// ||gamma||_p over the tail [onset, inf).
    Estimate lp_norm(double p) const;

    bool same_as(const Envelope& other) const noexcept;

private:
    struct Data;
    explicit Envelope(std::shared_ptr<const Data> d) : d_(std::move(d)) {}
    std::shared_ptr<const Data> d_;
};

/// C^1 phase modulation xi(x).
struct PhaseFunction {
    std::function<double(double)> value;
    std::function<double(double)> derivative;

    static PhaseFunction constant(double c);
};

/// c exp(-i (phi x + xi_sign * xi(x))) gamma(x).
struct GBVTerm {
    std::complex<double> c;
    double phase = 0.0;
    Envelope envelope;
    int xi = -1;           // index into the perturbation's phase functions, -1 for none
    double xi_sign = 1.0;  // +1 for the exp(-i(alpha x + xi)) half of a cosine, -1 for its partner
};

/// Smooth step: 0 on (-inf, x0/2], 1 on [x0, inf).
double smooth_cutoff(double x, double x0);

struct ExampleSpec;

class GBVPerturbation {
public:
    GBVPerturbation(std::vector<GBVTerm> terms, int p, double frak_a, double x0,
                    std::optional<Envelope> beta0 = std::nullopt, std::vector<PhaseFunction> xi = {});

    const std::vector<GBVTerm>& terms() const noexcept { return terms_; }
    const std::vector<PhaseFunction>& phase_functions() const noexcept { return xi_; }
    const std::optional<Envelope>& beta0() const noexcept { return beta0_; }
    int p() const noexcept { return p_; }
    double frak_a() const noexcept { return frak_a_; }
    double x0() const noexcept { return x0_; }
    /// Declared bound on sum |c_l| over terms dropped by truncation.
    double tail_bound() const noexcept { return tail_bound_; }
    /// Exponent gamma of the cosine example family, when built that way.
    std::optional<double> example_gamma() const noexcept { return example_gamma_; }

    /// Real value including the near-origin cutoff; defined for every real x.
    double operator()(double x) const;
    /// Same as operator() but with the phase functions replaced by the given values.
    double value_with_xi(double x, std::span<const double> xi_values) const;
    /// Uncut complex sum (plus beta0) at x.
    std::complex<double> complex_value(double x) const;

    /// Distinct phases, with 0 included when beta0 is present.
    std::vector<double> phases() const;
    double tau() const;
    double frak_m() const;
    double coefficient_sum() const;

    /// Keeps the first `L_max` terms; dropped mass is added to tail_bound().
    GBVPerturbation truncated(std::size_t L_max) const;

private:
    friend GBVPerturbation build_example_potential(const ExampleSpec&);
    double sum_terms(double x, std::span<const double> xi_values) const;

    std::vector<GBVTerm> terms_;
    int p_;
    double frak_a_;
    double x0_;
    std::optional<Envelope> beta0_;
    std::vector<PhaseFunction> xi_;
    double tail_bound_ = 0.0;
    std::optional<double> example_gamma_;
};

/// V(x) = -8 sin(2x)/x on [x0, inf), p = 2.
GBVPerturbation build_wigner_von_neumann(double x0 = 1.0, double frak_a = 0.5);

struct ExampleSpec {
    std::vector<double> L;       // amplitudes, > 0
    std::vector<double> alpha;   // phases, nonzero
    double gamma = 1.0;          // in (1/p, 1/(p-1)]
    int p = 2;
    std::vector<PhaseFunction> xi;  // one per amplitude, or empty for xi = 0
    std::optional<Envelope> beta0;
    double x0 = 1.0;
    std::optional<double> frak_a;  // defaults to 1/(2(p-1))
};

/// sum_l L_l x^{-gamma} cos(alpha_l x + xi_l(x)) + beta0(x) on [x0, inf).
GBVPerturbation build_example_potential(const ExampleSpec& spec);

/// Real value of V at x > 0; throws if x <= 0 or the imaginary residue exceeds 1e-12.
double evaluate(const GBVPerturbation& V, double x);

struct ConditionCheck {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct ConditionReport {
    Estimate tau;
    Estimate frak_m;
    double coefficient_sum = 0.0;  // sum |c_l|^a over the stored terms
    double coefficient_tail = 0.0;
    std::vector<ConditionCheck> checks;

    bool all_pass() const;
    const ConditionCheck* find(const std::string& name) const;
};

/// Ratio test for w(x) = x^a |f(x)| staying bounded on a log grid over [x0, X]:
/// the max over the last decade must not exceed `slack` times the max before it.
bool bounded_power_weight(const std::function<double(double)>& f, double a, double x0, double X = 1e6,
                          double slack = 1.5, double* ratio = nullptr);

ConditionReport condition_report(const GBVPerturbation& V);

}  // namespace wvn
