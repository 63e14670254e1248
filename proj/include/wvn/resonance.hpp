#pragma once

// Resonant energies 2k(E) = +-s mod 2 pi for sums s of phases, small-divisor sums and the
// Hausdorff dimension bound.

#include <complex>
#include <span>
#include <string>
#include <vector>

#include "wvn/floquet.hpp"

namespace wvn {

/// One contribution to a phase sum: the multiset of phase indices (sorted) and its size l.
struct SumProvenance {
    int order;
    std::vector<int> phases;
};

struct PhaseSum {
    double value;  // reduced to [0, 2 pi)
    std::vector<SumProvenance> provenance;
};

/// All sums of l elements of A with repetition, 1 <= l <= p-1, reduced mod 2 pi and merged
/// when within `merge_tolerance`. Sorted by value.
std::vector<PhaseSum> phase_sums(std::span<const double> A, int p, double merge_tolerance = 1e-12);

struct ResonantEnergy {
    double energy;
    double k;
    double target;    // k value solved for
    double residual;  // |k(E) - target|
    /// Indices into ResonanceSet::sums, with +1 for 2k = s and -1 for 2k = -s.
    std::vector<std::pair<std::size_t, int>> sums;
};

struct ResonanceDiagnostic {
    std::size_t band;
    std::string message;
};

struct ResonanceSet {
    std::vector<PhaseSum> sums;
    std::vector<Band> bands;
    /// energies[b] lists the resonant energies inside bands[b], ascending.
    std::vector<std::vector<ResonantEnergy>> energies;
    /// Targets at k = 0 or pi: band edges, excluded.
    std::vector<ResonanceDiagnostic> boundary;
    std::vector<ResonanceDiagnostic> flagged;
    double tolerance = 1e-6;
    /// Number of distinct (band, target) pairs with the target inside the band's k-range.
    std::size_t targets_hit = 0;

    std::size_t count() const;
};

struct ResonanceOptions {
    /// Targets within this of 0 or pi are boundary cases; same delta as the divisor floor.
    double tolerance = 1e-6;
    double residual_limit = 1e-10;
    /// Energies closer than this (relative) are the same resonance.
    double merge_tolerance = 1e-10;
    ode::Options ode{};
};

/// k(E) = arccos(Delta/2) with Delta clamped to [-2, 2].
double band_k(const PeriodicPotential& V0, double E, const ode::Options& opt = {});

ResonanceSet resonant_energies(const PeriodicPotential& V0, const BandStructure& bands, std::vector<PhaseSum> sums,
                               const ResonanceOptions& opt = {});

struct SmallDivisorSum {
    double value = 0.0;
    double tail_bound = 0.0;
    double min_divisor = 0.0;  // smallest |1 - e^{i(2k - sum)}| met in the truncated sum
};

/// sum over index tuples (l_1..l_j) with l_i < L_max of |c_{l_1} ... c_{l_j}| h_j(phi_{l_1}, ..., phi_{l_j}).
/// `extra_tail` adds coefficient mass beyond the supplied lists. Throws SmallDivisorError if k is
/// resonant at a recursion level.
SmallDivisorSum smalldivisor_sum(std::span<const std::complex<double>> c, std::span<const double> phases, double k,
                                 int j, int L_max, double floor = 1e-6, double extra_tail = 0.0);

/// (p - 1) frak_a, an upper bound on the Hausdorff dimension of the exceptional set.
double hausdorff_bound(int p, double frak_a);

}  // namespace wvn
