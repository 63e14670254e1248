#pragma once

// The lambda operator, symmetric products and the f/g/h tables built from a Floquet context.

#include <complex>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "wvn/floquet.hpp"
#include "wvn/fourier.hpp"

namespace wvn {

/// w_0 = -1, w_{+-1} = 1/2, 0 otherwise.
constexpr double weight(int a) noexcept { return a == 0 ? -1.0 : (a == 1 || a == -1) ? 0.5 : 0.0; }

/// The 1-periodic solution of (i T e^{i alpha x})' = (1 - e^{i alpha}) Phi e^{i alpha x}:
/// c(n) -> -c(n)(1 - e^{i alpha})/(2 pi n + alpha). Smooth in alpha; at alpha = 2 pi m it is the
/// constant i c(-m).
FourierSeries tilde_phi(const FourierSeries& Phi, double alpha);

/// tilde_phi divided by (1 - e^{i alpha}): c(n) -> -c(n)/(2 pi n + alpha).
/// Throws SmallDivisorError when |2 pi n + alpha| < floor for a mode with c(n) != 0.
FourierSeries reduced_tilde_phi(const FourierSeries& Phi, double alpha, double floor = 1e-6, int K = 0,
                                double phase_sum = 0.0);

/// lambda_{alpha,K} Phi = tilde_phi(Phi, alpha) e^{-2iK varpi}.
FourierSeries lambda_op(const FourierSeries& Phi, double alpha, int K, const FloquetData& F);

/// A FourierSeries-valued function of `arity` phases.
struct PhaseFamily {
    int arity = 0;
    std::function<FourierSeries(std::span<const double>)> fn;

    FourierSeries operator()(std::span<const double> phases) const;
};

/// Average over all (I+J)! assignments of the phases to the two factors.
PhaseFamily symmetric_product(const PhaseFamily& p, const PhaseFamily& q, int order = -1);

/// Sorted indices into the table's phase list; a phase multiset.
using Multiset = std::vector<int>;

/// The same product on a multiset: sum over sub-multisets S of size |p| with weight
/// prod_v C(m_v, s_v) / C(|M|, |S|).
template <class P, class Q>
FourierSeries symmetric_product_multiset(const Multiset& M, int I, const P& p, const Q& q, int order);

/// Visit every sub-multiset S of M with |S| = I, passing (S, M \ S, weight).
void for_each_split(const Multiset& M, int I, const std::function<void(const Multiset&, const Multiset&, double)>& fn);

/// All multisets of size J from {0, ..., P-1}.
std::vector<Multiset> multisets(int P, int J);

struct HarmonicOptions {
    double divisor_floor = 1e-6;
    int order = 64;
    /// Record resonant (K, phase sum) entries and skip them (and what depends on them)
    /// instead of throwing.
    bool permit_resonant = false;
    /// p above this emits a cost warning in the table.
    int max_p = 5;
};

struct ResonantEntry {
    int J;
    int K;
    Multiset phases;
    double alpha;  // 2 K kappa - sum
};

class HarmonicTable {
public:
    const FloquetData& context() const noexcept { return F_; }
    const std::vector<double>& phases() const noexcept { return phases_; }
    int p() const noexcept { return p_; }
    int order() const noexcept { return opt_.order; }
    const HarmonicOptions& options() const noexcept { return opt_; }
    const std::vector<ResonantEntry>& resonances() const noexcept { return resonances_; }
    const std::vector<std::string>& warnings() const noexcept { return warnings_; }

    bool has_f(int J, int K, const Multiset& M) const;
    bool has_g(int J, int K, const Multiset& M) const;
    /// Entries with K outside [0, J] are zero; J = 0 follows f_0 = 0, g_{0,0} = 2, g_{0,K>0} = 0.
    FourierSeries f(int J, int K, const Multiset& M) const;
    FourierSeries g(int J, int K, const Multiset& M) const;
    /// h_J on an ordered tuple of phase indices.
    double h(std::span<const int> tuple) const;

    /// Multiset of the given phase values (each must be in phases()).
    Multiset multiset_of(std::span<const double> values) const;
    double phase_sum(const Multiset& M) const;

    const std::map<std::tuple<int, int, Multiset>, FourierSeries>& f_entries() const noexcept { return f_; }
    const std::map<std::tuple<int, int, Multiset>, FourierSeries>& g_entries() const noexcept { return g_; }
    const std::map<std::vector<int>, double>& h_entries() const noexcept { return h_; }

private:
    friend HarmonicTable compute_table(const FloquetData&, std::vector<double>, int, const HarmonicOptions&);
    HarmonicTable(const FloquetData& F, std::vector<double> phases, int p, HarmonicOptions opt)
        : F_(F), phases_(std::move(phases)), p_(p), opt_(opt) {}

    FloquetData F_;
    std::vector<double> phases_;
    int p_;
    HarmonicOptions opt_;
    std::map<std::tuple<int, int, Multiset>, FourierSeries> f_, g_;
    std::map<std::vector<int>, double> h_;
    std::vector<ResonantEntry> resonances_;
    std::vector<std::string> warnings_;
};

/// f_{J,K}, g_{J,K} for 1 <= J <= p-1 and 0 <= K <= J over all phase multisets, plus h_J on
/// every ordered tuple of length <= p-1.
HarmonicTable compute_table(const FloquetData& F, std::vector<double> phases, int p, const HarmonicOptions& opt = {});

/// h_J(phi_1..phi_J) with h_0 = 1; `k` is the signed exponent. Throws SmallDivisorError.
double h_value(std::span<const double> phases, double k, double floor = 1e-6);

/// Mean of f_{p-1,1} e^{2i varpi} e^{i(2 kappa - sum) x}, i.e. the coefficient of
/// f_{p-1,1} e^{2i varpi} at -m where 2 kappa - sum = 2 pi m.
std::complex<double> mean_criterion(const HarmonicTable& T, std::span<const double> tuple);

struct RecursionResidual {
    int K;
    Multiset phases;
    double f_residual;
    double g_residual;
};

struct RecursionReport {
    int I = 0;
    int l = 0;
    bool vacuous = false;
    double max_f = 0.0;
    double max_g = 0.0;
    std::vector<RecursionResidual> entries;
};

/// Residuals (l1 of the coefficient difference, which bounds the sup norm) of
/// f_{I,K} = 1/2 sum_j f_{j,l} . g_{I-j,K-l} and the g analogue, for l <= K <= I.
RecursionReport verify_recursion(const HarmonicTable& T, int I, int l);

struct GBoundReport {
    int J = 0;
    double max_ratio = 0.0;   // max |g_{J,1}| / bound over grid and multisets
    double min_margin = 0.0;  // min (bound - |g|)
    std::size_t checked = 0;
};

/// |g_{J,1}| <= 2 (2 ||Phi0||)^J / J! * sum_sigma h_J(sigma) on an M-point grid.
GBoundReport g_bound_check(const HarmonicTable& T, int J, int grid = 512);

// --- implementation of the template ---

template <class P, class Q>
FourierSeries symmetric_product_multiset(const Multiset& M, int I, const P& p, const Q& q, int order) {
    FourierSeries out(order);
    for_each_split(M, I, [&](const Multiset& S, const Multiset& T, double w) {
        out += w * multiply(p(S), q(T), order);
    });
    return out;
}

}  // namespace wvn
