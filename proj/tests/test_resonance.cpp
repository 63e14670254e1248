#include "doctest.h"

#include <cmath>
#include <complex>
#include <numbers>
#include <algorithm>
#include <random>

#include "wvn/errors.hpp"
#include "wvn/floquet.hpp"
#include "wvn/resonance.hpp"

using namespace wvn;

namespace {

constexpr double pi = std::numbers::pi;

double dist_2pi(double x) { return std::abs(x - 2 * pi * std::round(x / (2 * pi))); }

std::vector<double> values(const std::vector<PhaseSum>& s) {
    std::vector<double> v;
    for (const auto& x : s) v.push_back(x.value);
    return v;
}

}  // namespace

TEST_CASE("phase sums") {
    const std::vector<double> A{2.0, -2.0};
    SUBCASE("p = 2") {
        const auto s = phase_sums(A, 2);
        REQUIRE(s.size() == 2);
        CHECK(s[0].value == doctest::Approx(2.0));
        CHECK(s[1].value == doctest::Approx(2 * pi - 2.0));
        CHECK(s[0].provenance.size() == 1);
        CHECK(s[0].provenance[0].order == 1);
    }
    SUBCASE("empty set") { CHECK(phase_sums(std::vector<double>{}, 3).empty()); }
    SUBCASE("p = 3 adds pairwise sums") {
        const auto s = phase_sums(A, 3);
        const auto v = values(s);
        REQUIRE(v.size() == 5);
        CHECK(v[0] == 0.0);
        CHECK(v[1] == doctest::Approx(2.0));
        CHECK(v[2] == doctest::Approx(2 * pi - 4.0));
        CHECK(v[3] == doctest::Approx(4.0));
        CHECK(v[4] == doctest::Approx(2 * pi - 2.0));
        for (const auto& x : s)
            for (const auto& pr : x.provenance) {
                double t = 0.0;
                for (int i : pr.phases) t += A[static_cast<std::size_t>(i)];
                CHECK(dist_2pi(t - x.value) < 1e-12);
            }
    }
    SUBCASE("coincident sums are merged with all provenance") {
        const std::vector<double> B{1.0, 2.0, 3.0};
        const auto s = phase_sums(B, 3);
        const auto it = std::find_if(s.begin(), s.end(), [](const PhaseSum& x) { return std::abs(x.value - 4.0) < 1e-9; });
        REQUIRE(it != s.end());
        CHECK(it->provenance.size() == 2);  // 1 + 3 and 2 + 2
    }
}

TEST_CASE("free resonant energies") {
    const auto V0 = PeriodicPotential::free();
    const auto bands = band_structure(V0, 0.0, 50.0, 0.05);
    const std::vector<double> A{2.0, -2.0};
    const auto R = resonant_energies(V0, bands, phase_sums(A, 2));
    REQUIRE(!R.energies.empty());
    REQUIRE(R.energies[0].size() == 2);
    CHECK(R.energies[0][0].energy == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(R.energies[0][1].energy == doctest::Approx((pi - 1) * (pi - 1)).epsilon(1e-9));
    CHECK(R.energies[0][0].sums.size() == 2);  // 2k = 2 and 2k = -(2 pi - 2)
    CHECK(R.count() == R.targets_hit);
    for (std::size_t b = 0; b < R.energies.size(); ++b)
        for (const auto& e : R.energies[b]) {
            CHECK(R.bands[b].contains_interior(e.energy));
            CHECK(e.residual < 1e-10);
            for (const auto& [i, sign] : e.sums) CHECK(dist_2pi(2 * e.k - sign * R.sums[i].value) < 1e-9);
        }

    SUBCASE("empty sums") {
        const auto E = resonant_energies(V0, bands, {});
        CHECK(E.count() == 0);
        CHECK(E.energies.size() == bands.bands.size());
    }
    SUBCASE("zero sum sits on band edges") {
        const auto E = resonant_energies(V0, bands, phase_sums(A, 3));
        CHECK(!E.boundary.empty());
        CHECK(E.count() == E.targets_hit);
    }
}

TEST_CASE("Mathieu resonant energies") {
    const auto V0 = PeriodicPotential::cosine(2.0);
    const auto bands = band_structure(V0, -2.0, 40.0, 0.05);
    const std::vector<double> A{2.0, -2.0};
    const auto R = resonant_energies(V0, bands, phase_sums(A, 3));
    REQUIRE(!R.bands.empty());
    CHECK(!R.energies[0].empty());
    CHECK(R.energies[0].size() <= 4);
    CHECK(R.count() == R.targets_hit);
    for (std::size_t b = 0; b < R.energies.size(); ++b)
        for (const auto& e : R.energies[b]) {
            CHECK(e.residual < 1e-10);
            CHECK(std::abs(quasimomentum(V0, e.energy, bands) - e.k) < 1e-9);
            for (const auto& [i, sign] : e.sums) CHECK(dist_2pi(2 * e.k - sign * R.sums[i].value) < 1e-9);
        }

    SUBCASE("negation symmetry") {
        const std::vector<double> B{0.7, -0.7, 2.3, -2.3};
        const auto R1 = resonant_energies(V0, bands, phase_sums(B, 2));
        std::vector<double> Bn;
        for (double b : B) Bn.push_back(-b);
        const auto R2 = resonant_energies(V0, bands, phase_sums(Bn, 2));
        REQUIRE(R1.count() == R2.count());
        for (std::size_t b = 0; b < R1.energies.size(); ++b)
            for (std::size_t i = 0; i < R1.energies[b].size(); ++i)
                CHECK(R1.energies[b][i].energy == doctest::Approx(R2.energies[b][i].energy).epsilon(1e-12));
    }
}

TEST_CASE("small divisor sums") {
    using cd = std::complex<double>;
    SUBCASE("single conjugate pair, j = 1") {
        const std::vector<cd> c{cd(0, -4), cd(0, 4)};
        const std::vector<double> ph{2.0, -2.0};
        const double k = 1.3;
        const auto S = smalldivisor_sum(c, ph, k, 1, 10);
        const double expect = 4.0 / std::abs(1.0 - std::polar(1.0, 2 * k - 2.0)) +
                              4.0 / std::abs(1.0 - std::polar(1.0, 2 * k + 2.0));
        CHECK(S.value == doctest::Approx(expect).epsilon(1e-14));
        CHECK(S.tail_bound == 0.0);
    }
    SUBCASE("resonant k") {
        const std::vector<cd> c{cd(1.0)};
        const std::vector<double> ph{2.0};
        CHECK_THROWS_AS(smalldivisor_sum(c, ph, 1.0, 1, 4), SmallDivisorError);
    }
    SUBCASE("geometric amplitudes converge under L_max doubling") {
        std::mt19937 rng(41);
        std::uniform_real_distribution<double> u(-pi, pi);
        std::vector<cd> c;
        std::vector<double> ph;
        for (int l = 1; l <= 32; ++l) {
            c.emplace_back(std::pow(2.0, -l));
            ph.push_back(u(rng));
        }
        const double k = 0.9;
        for (int j : {1, 2, 3}) {
            double prev = -1.0;
            for (int L : {4, 8, 16}) {
                const auto a = smalldivisor_sum(c, ph, k, j, L);
                const auto b = smalldivisor_sum(c, ph, k, j, 2 * L);
                CHECK(std::isfinite(a.value));
                CHECK(b.value >= a.value);
                CHECK(b.value - a.value <= a.tail_bound);
                CHECK(a.value >= prev);
                prev = a.value;
            }
        }
    }
    SUBCASE("argument validation") {
        const std::vector<cd> c{cd(1.0)};
        const std::vector<double> ph{0.5, 1.0};
        CHECK_THROWS_AS(smalldivisor_sum(c, ph, 1.0, 1, 4), DomainError);
        const std::vector<double> one{0.5};
        CHECK_THROWS_AS(smalldivisor_sum(c, one, 1.0, 0, 4), DomainError);
    }
}

TEST_CASE("Hausdorff bound") {
    CHECK(hausdorff_bound(2, 0.5) == doctest::Approx(0.5));
    CHECK(hausdorff_bound(3, 0.25) == doctest::Approx(0.5));
    CHECK(hausdorff_bound(4, 1e-9) < 1e-8);
    CHECK_THROWS_AS(hausdorff_bound(2, 1.0), DomainError);
    CHECK_THROWS_AS(hausdorff_bound(3, 0.5), DomainError);
    CHECK_THROWS_AS(hausdorff_bound(2, 0.0), DomainError);
    CHECK_THROWS_AS(hausdorff_bound(1, 0.1), DomainError);
}
