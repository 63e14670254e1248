#include "doctest.h"

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "wvn/errors.hpp"
#include "wvn/floquet.hpp"
#include "wvn/harmonics.hpp"
#include "wvn/quadrature.hpp"

using namespace wvn;
using cd = std::complex<double>;

namespace {

constexpr double pi = std::numbers::pi;
const cd I1(0.0, 1.0);

FourierSeries random_series(std::mt19937& rng, int order, int support) {
    std::normal_distribution<double> n(0.0, 1.0);
    FourierSeries s(order);
    for (int m = -support; m <= support; ++m) s.coeff_ref(m) = cd(n(rng), n(rng)) / (1.0 + m * m);
    return s;
}

FloquetData constant_context(double k) {
    return FloquetData::from_periodic_factor(k * k, k, FourierSeries::constant(16, 1.0), 2.0 * k);
}

/// Periodic solution of (i T e^{i a x})' = (1 - e^{i a}) Phi e^{i a x} by direct quadrature.
cd tilde_phi_oracle(const FourierSeries& Phi, double a, double x) {
    auto Q = [&](double t) {
        auto re = [&](double s) { return std::real(Phi(s) * std::polar(1.0, a * s)); };
        auto im = [&](double s) { return std::imag(Phi(s) * std::polar(1.0, a * s)); };
        if (t == 0.0) return cd(0.0);
        return cd(quad::adaptive_simpson(re, 0.0, t, 1e-13).value, quad::adaptive_simpson(im, 0.0, t, 1e-13).value);
    };
    const cd T0 = I1 * Q(1.0);
    return std::polar(1.0, -a * x) * (T0 - I1 * (1.0 - std::polar(1.0, a)) * Q(x));
}

// Recursive definitions evaluated on explicit phase vectors, independent of the table's
// multiset bookkeeping.
struct Oracle {
    const FloquetData& F;
    int N;

    FourierSeries U(int K) const { return F.unimodular(K).resized(N); }

    FourierSeries g(int J, int K, std::vector<double> ph) const {
        if (J == 0) return K == 0 ? FourierSeries::constant(N, 2.0) : FourierSeries(N);
        if (K <= 0 || K > J) return FourierSeries(N);
        double s = 0.0;
        for (double v : ph) s += v;
        const double a = 2.0 * K * F.kappa() - s;
        const FourierSeries lam = lambda_op(multiply(U(K), f(J, K, ph), N), a, K, F);
        return lam * (2.0 * K / (1.0 - std::polar(1.0, a)));
    }

    FourierSeries f(int J, int K, std::vector<double> ph) const {
        if (J == 1) return K == 1 ? F.phi0_fourier().resized(N) : FourierSeries(N);
        if (K < 0 || K > J) return FourierSeries(N);
        PhaseFamily phi0{1, [this](std::span<const double>) { return F.phi0_fourier().resized(N); }};
        PhaseFamily rest{J - 1, [this, J, K](std::span<const double> q) {
                             std::vector<double> v(q.begin(), q.end());
                             FourierSeries out(N);
                             for (int a = -1; a <= 1; ++a) out += weight(a) * g(J - 1, K + a, v);
                             return out;
                         }};
        return symmetric_product(phi0, rest, N)(ph);
    }
};

double h2_closed(double k, double a, double b) {
    const double d1 = std::abs(1.0 - std::polar(1.0, 2 * k - a));
    const double d2 = std::abs(1.0 - std::polar(1.0, 2 * k - a - b));
    return 2.0 / (d1 * d2);
}

}  // namespace

TEST_CASE("weights") {
    CHECK(weight(0) == -1.0);
    CHECK(weight(1) == 0.5);
    CHECK(weight(-1) == 0.5);
    int nonzero = 0;
    for (int a = -5; a <= 5; ++a) nonzero += weight(a) != 0.0;
    CHECK(nonzero == 3);
}

TEST_CASE("tilde_phi examples") {
    const cd C(0.7, -0.2);
    const auto Phi = FourierSeries::constant(8, C);

    SUBCASE("constant, alpha = pi") {
        const auto T = tilde_phi(Phi, pi);
        CHECK(std::abs(T.mean() - (-2.0 * C / pi)) < 1e-14);
        for (double x : {0.0, 0.2, 0.55, 0.9}) CHECK(std::abs(T(x) - tilde_phi_oracle(Phi, pi, x)) < 1e-10);
    }
    SUBCASE("single mode, alpha -> 0") {
        const auto E1 = FourierSeries::mode(8, 1, 1.0);
        for (double a : {1e-3, 1e-6, 1e-9}) CHECK(tilde_phi(E1, a).l1_norm() < 2 * a);
        CHECK(tilde_phi(E1, 0.0).l1_norm() == 0.0);
    }
    SUBCASE("constant, alpha -> 0 gives i C") {
        CHECK(std::abs(tilde_phi(Phi, 0.0).mean() - I1 * C) < 1e-15);
        CHECK(std::abs(tilde_phi(Phi, 1e-8).mean() - I1 * C) < 1e-7);
    }
    SUBCASE("random series against quadrature") {
        std::mt19937 rng(3);
        for (int t = 0; t < 5; ++t) {
            const auto P = random_series(rng, 8, 3);
            const double a = std::uniform_real_distribution<double>(-10, 10)(rng);
            const auto T = tilde_phi(P, a);
            for (double x : {0.1, 0.37, 0.8}) CHECK(std::abs(T(x) - tilde_phi_oracle(P, a, x)) < 1e-9);
        }
    }
}

TEST_CASE("reduced rule and small divisors") {
    const auto Phi = FourierSeries::constant(4, 1.0);
    CHECK(std::abs(reduced_tilde_phi(Phi, 0.5).mean() - (-2.0)) < 1e-15);
    try {
        reduced_tilde_phi(FourierSeries::mode(4, 2, 1.0), -4 * pi + 1e-9, 1e-6, 3, 1.25);
        FAIL("expected SmallDivisorError");
    } catch (const SmallDivisorError& e) {
        CHECK(e.mode() == 2);
        CHECK(e.K() == 3);
        CHECK(e.phase_sum() == 1.25);
    }
    // A vanishing coefficient at the resonant mode is harmless.
    CHECK_NOTHROW(reduced_tilde_phi(Phi, -2 * pi));
}

TEST_CASE("lambda operator") {
    const auto V0 = PeriodicPotential::cosine(2.0);
    const auto F = floquet_solution(V0, 1.5);
    const cd C(1.0, 0.5);

    SUBCASE("free case constant") {
        const auto Ff = floquet_solution(PeriodicPotential::free(), 1.0);
        for (double a : {0.3, 2.0, -1.7}) {
            const auto L = lambda_op(FourierSeries::constant(64, C), a, 1, Ff);
            CHECK(std::abs(L.mean() - (-C * (1.0 - std::polar(1.0, a)) / a)) < 1e-10);
        }
    }
    SUBCASE("K = 0 has no varpi factor") {
        std::mt19937 rng(5);
        const auto P = random_series(rng, 64, 4);
        const auto A = lambda_op(P, 1.1, 0, F), B = tilde_phi(P, 1.1);
        CHECK((A - B).l1_norm() == 0.0);
    }
    SUBCASE("derivative identity") {
        std::mt19937 rng(11);
        const auto P = random_series(rng, 64, 4);
        const double a = 2.3, h = 1e-4;
        const auto L = lambda_op(P, a, 0, F);
        auto lhs = [&](double x) { return I1 * L(x) * std::polar(1.0, a * x); };
        for (double x : {0.05, 0.3, 0.71}) {
            const cd d = (lhs(x + h) - lhs(x - h)) / (2 * h);
            const cd rhs = (1.0 - std::polar(1.0, a)) * P(x) * std::polar(1.0, a * x);
            CHECK(std::abs(d - rhs) < 1e-6 * (1.0 + P.l1_norm()));
        }
    }
    SUBCASE("periodicity") {
        std::mt19937 rng(13);
        const auto P = random_series(rng, 64, 4);
        const auto L = lambda_op(P, -0.9, 2, F);
        for (double x : {0.0, 0.25, 0.6}) CHECK(std::abs(L(x + 1.0) - L(x)) < 1e-12);
    }
    SUBCASE("operator norm at most 2 over random draws") {
        std::mt19937 rng(17);
        std::uniform_real_distribution<double> ua(-20.0, 20.0);
        std::uniform_int_distribution<int> uk(0, 3);
        double worst = 0.0;
        for (int t = 0; t < 1000; ++t) {
            const auto P = random_series(rng, 64, 4);
            const auto L = lambda_op(P, ua(rng), uk(rng), F);
            worst = std::max(worst, L.sup_norm(1024) / P.sup_norm(1024));
        }
        CHECK(worst <= 2.0 + 1e-9);
    }
    SUBCASE("continuity at 2 pi n") {
        std::mt19937 rng(19);
        const auto P = random_series(rng, 32, 3);
        for (int n : {-2, 0, 1}) {
            // Limit is i c(-n) e^{-2 pi i n x}: T e^{i alpha x} is constant at alpha = 2 pi n.
            const auto target = FourierSeries::mode(32, -n, I1 * P.coeff(-n));
            for (double sgn : {1.0, -1.0}) {
                const double e1 = 1e-3, e2 = 1e-4;
                const auto T1 = tilde_phi(P, 2 * pi * n + sgn * e1), T2 = tilde_phi(P, 2 * pi * n + sgn * e2);
                const double d1 = (T1 - target).l1_norm();
                const double d2 = (T2 - target).l1_norm();
                CHECK(d1 < 10 * e1 * P.l1_norm());
                CHECK(d2 == doctest::Approx(d1 / 10).epsilon(0.02));
            }
        }
    }
}

TEST_CASE("symmetric product") {
    auto constant_family = [](int arity, auto value) {
        return PhaseFamily{arity, [value](std::span<const double> ph) {
                               return FourierSeries::constant(2, value(ph));
                           }};
    };
    const auto P = constant_family(1, [](std::span<const double> ph) { return cd(ph[0]); });
    const auto One = constant_family(1, [](std::span<const double>) { return cd(1.0); });
    const auto One0 = constant_family(0, [](std::span<const double>) { return cd(1.0); });

    SUBCASE("two-term average") {
        const std::vector<double> ph{0.4, 1.8};
        CHECK(std::abs(symmetric_product(P, One)(ph).mean() - 1.1) < 1e-15);
    }
    SUBCASE("arity-zero identity") {
        const std::vector<double> ph{0.4};
        CHECK(std::abs(symmetric_product(P, One0)(ph).mean() - 0.4) < 1e-15);
    }
    SUBCASE("swap symmetry") {
        std::mt19937 rng(23);
        const auto A = random_series(rng, 4, 2), B = random_series(rng, 4, 2);
        const PhaseFamily p{1, [A](std::span<const double> ph) { return A * cd(std::cos(ph[0]), ph[0]); }};
        const PhaseFamily q{1, [B](std::span<const double> ph) { return B * cd(ph[0] * ph[0], 1.0); }};
        const auto pq = symmetric_product(p, q);
        const std::vector<double> x{0.3, -1.2}, y{-1.2, 0.3};
        CHECK((pq(x) - pq(y)).l1_norm() < 1e-14);
    }
    SUBCASE("arity mismatch") {
        const std::vector<double> ph{0.1, 0.2};
        CHECK_THROWS_AS(P(ph), DomainError);
    }
    SUBCASE("multiset form equals the permutation average") {
        std::mt19937 rng(29);
        const std::vector<double> vals{0.3, -0.8, 1.7};
        const auto A = random_series(rng, 4, 2), B = random_series(rng, 4, 2);
        auto pf = [A](std::span<const double> ph) {
            cd w = 1.0;
            for (double v : ph) w *= cd(1.0 + v, 0.5 * v);
            return A * w;
        };
        auto qf = [B](std::span<const double> ph) {
            cd w = 1.0;
            for (double v : ph) w += cd(v * v, -v);
            return B * w;
        };
        for (const Multiset& M : {Multiset{0, 0, 1, 2}, Multiset{1, 1, 1, 2}, Multiset{0, 1, 2, 2, 2}}) {
            for (int I = 0; I <= static_cast<int>(M.size()); ++I) {
                std::vector<double> ph;
                for (int i : M) ph.push_back(vals[static_cast<std::size_t>(i)]);
                const PhaseFamily p{I, pf};
                const PhaseFamily q{static_cast<int>(M.size()) - I, qf};
                const auto brute = symmetric_product(p, q, 8)(ph);
                auto to_vals = [&](const Multiset& S) {
                    std::vector<double> v;
                    for (int i : S) v.push_back(vals[static_cast<std::size_t>(i)]);
                    return v;
                };
                const auto fast = symmetric_product_multiset(
                    M, I, [&](const Multiset& S) { return pf(to_vals(S)); },
                    [&](const Multiset& S) { return qf(to_vals(S)); }, 8);
                CHECK((brute - fast).l1_norm() < 1e-12 * (1.0 + brute.l1_norm()));
            }
        }
    }
}

TEST_CASE("multiset enumeration") {
    CHECK(multisets(3, 2).size() == 6);
    CHECK(multisets(2, 4).size() == 5);
    CHECK(multisets(4, 3).size() == 20);
    double total = 0.0;
    for_each_split({0, 0, 1, 2}, 2, [&](const Multiset&, const Multiset&, double w) { total += w; });
    CHECK(total == doctest::Approx(1.0));
}

TEST_CASE("table base entries and free case") {
    const double k = 1.3;
    const auto F = floquet_solution(PeriodicPotential::free(), k * k);
    REQUIRE(std::abs(F.kappa() - k) < 1e-9);
    const std::vector<double> phases{0.4, 1.1};
    const auto T = compute_table(F, phases, 3);
    for (int i = 0; i < 2; ++i) {
        const Multiset M{i};
        CHECK(T.f(1, 0, M).l1_norm() == 0.0);
        CHECK((T.f(1, 1, M) - F.phi0_fourier().resized(64)).l1_norm() < 1e-15);
        const cd g11 = T.g(1, 1, M).mean();
        CHECK(std::abs(g11 - (-1.0 / (k * (2 * k - phases[static_cast<std::size_t>(i)])))) < 1e-9);
        CHECK(T.g(1, 1, M).l1_norm() - std::abs(g11) < 1e-9);
    }
    for (const auto& [key, h] : T.h_entries()) CHECK(h >= 0.0);
    CHECK(T.warnings().empty());
    CHECK_THROWS_AS(compute_table(F, phases, 1), DomainError);
    CHECK_THROWS_AS(compute_table(F, {}, 3), DomainError);
}

TEST_CASE("sign pattern for large k") {
    const auto F = constant_context(20.0);
    const auto T = compute_table(F, {0.3, 0.9, 1.7}, 5);
    std::size_t checked = 0;
    for (const auto& [key, f] : T.f_entries()) {
        const auto& [j, l, M] = key;
        if (j == 1 && l == 0) continue;
        const cd v = f.mean();
        CHECK(std::abs(v.imag()) < 1e-12 * std::abs(v));
        CHECK((l % 2 == 1 ? 1.0 : -1.0) * v.real() > 0.0);
        ++checked;
    }
    CHECK(checked > 50);
}

TEST_CASE("h values") {
    const std::vector<double> none;
    CHECK(h_value(none, 1.0) == 1.0);
    const std::vector<double> one{0.9};
    CHECK(h_value(one, 1.0) == doctest::Approx(1.0 / std::abs(1.0 - std::polar(1.0, 2.0 - 0.9))).epsilon(1e-14));
    const std::vector<double> two{2.5, 0.7};
    CHECK(h_value(two, 1.0) == doctest::Approx(h2_closed(1.0, 2.5, 0.7)).epsilon(1e-14));

    // J = 3 expanded by hand: h3 = (h2(a,b) + h1(a) h1(b) + h2(a,b)) / D(a+b+c).
    const double k = 0.8, a = 0.3, b = -1.1, c = 2.0;
    auto D = [&](double s) { return std::abs(1.0 - std::polar(1.0, 2 * k - s)); };
    const double h3 = (2 * h2_closed(k, a, b) + 1.0 / (D(a) * D(b))) / D(a + b + c);
    const std::vector<double> three{a, b, c};
    CHECK(h_value(three, k) == doctest::Approx(h3).epsilon(1e-13));

    const std::vector<double> res{2.0};
    CHECK_THROWS_AS(h_value(res, 1.0), SmallDivisorError);
}

TEST_CASE("resonance handling in the table") {
    const double k = 1.3;
    const auto F = floquet_solution(PeriodicPotential::free(), k * k);
    const std::vector<double> phases{2 * k, 0.5};
    try {
        compute_table(F, phases, 2);
        FAIL("expected SmallDivisorError");
    } catch (const SmallDivisorError& e) {
        CHECK(e.K() == 1);
        CHECK(e.phase_sum() == doctest::Approx(2 * k));
    }
    HarmonicOptions opt;
    opt.permit_resonant = true;
    const auto T = compute_table(F, phases, 3, opt);
    CHECK(!T.resonances().empty());
    CHECK(!T.has_g(1, 1, Multiset{0}));
    CHECK(!T.has_f(2, 1, Multiset{0, 1}));
    CHECK(T.has_f(2, 1, Multiset{1, 1}));

    opt.max_p = 2;
    CHECK(compute_table(F, {0.5}, 3, opt).warnings().size() == 1);
}

TEST_CASE("table matches the permutation oracle") {
    const auto F = floquet_solution(PeriodicPotential::cosine(2.0), 1.5);
    const std::vector<double> phases{0.4, 1.3, -0.6};
    HarmonicOptions opt;
    opt.order = 32;
    const auto T = compute_table(F, phases, 4, opt);
    const Oracle O{F, 32};
    for (const Multiset& M : {Multiset{0, 1, 2}, Multiset{0, 0, 2}, Multiset{1, 1, 1}}) {
        std::vector<double> ph;
        for (int i : M) ph.push_back(phases[static_cast<std::size_t>(i)]);
        for (int K = 0; K <= 3; ++K) {
            const auto tf = T.f(3, K, M), tg = T.g(3, K, M);
            std::sort(ph.begin(), ph.end());
            do {
                CHECK((O.f(3, K, ph) - tf).l1_norm() < 1e-12 * (1.0 + tf.l1_norm()));
                CHECK((O.g(3, K, ph) - tg).l1_norm() < 1e-12 * (1.0 + tg.l1_norm()));
            } while (std::next_permutation(ph.begin(), ph.end()));
        }
    }
}

TEST_CASE("recursion identities") {
    SUBCASE("vacuous") {
        const auto T = compute_table(constant_context(2.0), {0.5}, 2);
        CHECK(verify_recursion(T, 1, 0).vacuous);
        CHECK(verify_recursion(T, 0, 0).vacuous);
    }
    SUBCASE("free case by hand, I = 2") {
        const double k = 1.3, a = 0.4, b = 1.1;
        const auto F = floquet_solution(PeriodicPotential::free(), k * k);
        const auto T = compute_table(F, {a, b}, 3);
        const double f22 = -0.25 / (2 * k) * (1 / (k * (2 * k - a)) + 1 / (k * (2 * k - b)));
        CHECK(std::abs(T.f(2, 2, {0, 1}).mean() - f22) < 1e-9);
        const auto rep = verify_recursion(T, 2, 1);
        CHECK(rep.max_f < 1e-9);
        CHECK(rep.max_g < 1e-9);
        CHECK_THROWS_AS(verify_recursion(T, 2, 2), DomainError);
        CHECK_THROWS_AS(verify_recursion(T, 3, 1), DomainError);
    }
    SUBCASE("free and Mathieu backgrounds up to I = 4") {
        const auto Ff = floquet_solution(PeriodicPotential::free(), 1.69);
        const auto Fm = floquet_solution(PeriodicPotential::cosine(2.0), 1.5);
        for (const FloquetData* F : {&Ff, &Fm}) {
            const auto T = compute_table(*F, {0.41, 1.93}, 5);
            for (int I = 2; I <= 4; ++I)
                for (int l = 1; l < I; ++l) {
                    const auto rep = verify_recursion(T, I, l);
                    CHECK(!rep.entries.empty());
                    CHECK(rep.max_f < 1e-9);
                    CHECK(rep.max_g < 1e-9);
                }
        }
    }
}

TEST_CASE("g bound") {
    const auto Ff = floquet_solution(PeriodicPotential::free(), 1.69);
    const auto Fm = floquet_solution(PeriodicPotential::cosine(2.0), 1.5);
    for (const FloquetData* F : {&Ff, &Fm}) {
        const auto T = compute_table(*F, {0.41, 1.93, 2.77}, 5);
        for (int J = 1; J <= 4; ++J) {
            const auto rep = g_bound_check(T, J);
            CHECK(rep.checked > 0);
            CHECK(rep.max_ratio <= 1.0);
        }
    }
}

TEST_CASE("mean criterion") {
    HarmonicOptions opt;
    opt.permit_resonant = true;

    SUBCASE("free case, p = 2") {
        const double k = 1.3;
        const auto F = floquet_solution(PeriodicPotential::free(), k * k);
        const std::vector<double> tuple{2 * F.kappa()};
        const auto T = compute_table(F, tuple, 2, opt);
        CHECK(std::abs(mean_criterion(T, tuple) - 1.0 / (2 * k)) < 1e-9);
    }
    SUBCASE("constant Floquet solution, p = 3") {
        const double k = 2.0;
        const auto F = constant_context(k);
        for (double a : {0.3, 1.1, 2.5}) {
            const std::vector<double> tuple{a, 2 * k - a};
            const auto T = compute_table(F, tuple, 3, opt);
            const double expect = 1 / (4 * k * k) * (1 / (2 * k - a) + 1 / (2 * k - tuple[1]));
            const cd m = mean_criterion(T, tuple);
            CHECK(std::abs(m - expect) < 1e-12);
            CHECK(std::abs(m) > 0.0);
        }
    }
    SUBCASE("Mathieu, p = 2, against quadrature") {
        for (double amp : {2.0, 0.05}) {
            const auto F = floquet_solution(PeriodicPotential::cosine(amp), 1.5);
            const std::vector<double> tuple{2 * F.kappa()};
            const auto T = compute_table(F, tuple, 2, opt);
            const cd m = mean_criterion(T, tuple);
            auto re = [&](double x) { return F.phi0(x) * std::cos(2 * F.varpi(x)); };
            auto im = [&](double x) { return F.phi0(x) * std::sin(2 * F.varpi(x)); };
            const cd q(quad::adaptive_simpson(re, 0, 1, 1e-12).value, quad::adaptive_simpson(im, 0, 1, 1e-12).value);
            CHECK(std::abs(m - q) < 1e-8);
            CHECK(std::abs(m) > 1e-3);
            if (amp < 0.1) CHECK(std::abs(m - 1.0 / (2 * F.k())) < 0.1 * amp);
        }
    }
    SUBCASE("tuple validation") {
        const auto T = compute_table(constant_context(2.0), {0.5}, 3);
        const std::vector<double> one{0.5}, alien{0.5, 0.7};
        CHECK_THROWS_AS(mean_criterion(T, one), DomainError);
        CHECK_THROWS_AS(mean_criterion(T, alien), DomainError);
    }
}
