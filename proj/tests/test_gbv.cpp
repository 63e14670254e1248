#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "wvn/errors.hpp"
#include "wvn/gbv.hpp"

using namespace wvn;
using std::numbers::pi;

TEST_CASE("Wigner-von Neumann potential") {
    const auto V = build_wigner_von_neumann();
    CHECK(std::abs(evaluate(V, pi / 2)) < 1e-14);
    CHECK(evaluate(V, 10.0) == doctest::Approx(-8 * std::sin(20.0) / 10));
    for (double x : {1.0, 3.3, 77.0, 1234.5}) CHECK(evaluate(V, x) == doctest::Approx(-8 * std::sin(2 * x) / x).epsilon(1e-13));
    const auto ph = V.phases();
    REQUIRE(ph.size() == 2);
    CHECK(ph[0] == -2.0);
    CHECK(ph[1] == 2.0);
    for (const auto& t : V.terms()) CHECK(std::abs(t.c) == doctest::Approx(4.0));
    CHECK(V.tau() == doctest::Approx(1.0));
    CHECK(V.p() == 2);

    const auto r = condition_report(V);
    CHECK(r.all_pass());
    CHECK(r.coefficient_sum == doctest::Approx(4.0));
    CHECK(r.tau.value == doctest::Approx(1.0));
    CHECK(r.frak_m.value == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("cutoff near the origin") {
    const auto V = build_wigner_von_neumann(2.0);
    CHECK(V(0.0) == 0.0);
    CHECK(V(-5.0) == 0.0);
    CHECK(V(1.0) == 0.0);
    CHECK(V(2.0) == doctest::Approx(-4 * std::sin(4.0)));
    double prev = 0.0;
    for (int i = 0; i <= 100; ++i) {
        const double c = smooth_cutoff(1.0 + i / 100.0, 2.0);
        CHECK(c >= prev);
        prev = c;
    }
    CHECK(smooth_cutoff(1.5, 2.0) == doctest::Approx(0.5));
    CHECK_THROWS_AS(evaluate(V, 0.0), DomainError);
    CHECK_THROWS_AS(evaluate(V, -1.0), DomainError);
}

TEST_CASE("example potential") {
    SUBCASE("single cosine with constant phase shift") {
        ExampleSpec s;
        s.L = {8.0};
        s.alpha = {2.0};
        s.gamma = 1.0;
        s.xi = {PhaseFunction::constant(pi / 2)};
        const auto V = build_example_potential(s);
        for (double x : {1.0, 2.5, 40.0}) CHECK(evaluate(V, x) == doctest::Approx(-8 * std::sin(2 * x) / x).epsilon(1e-12));
        s.xi = {PhaseFunction::constant(-pi / 2)};
        const auto W = build_example_potential(s);
        for (double x : {1.0, 2.5, 40.0}) CHECK(evaluate(W, x) == doctest::Approx(8 * std::sin(2 * x) / x).epsilon(1e-12));
        const double xi[] = {pi / 2};
        CHECK(W.value_with_xi(2.5, xi) == doctest::Approx(-8 * std::sin(5.0) / 2.5));
    }
    SUBCASE("beta0 conditions") {
        ExampleSpec s;
        s.L = {1.0};
        s.alpha = {2.0};
        s.beta0 = Envelope::power_tail(1.0, 1.0);
        const auto V = build_example_potential(s);
        const auto r = condition_report(V);
        REQUIRE(r.find("beta0_decay"));
        CHECK(r.find("beta0_decay")->pass);
        CHECK(r.find("beta0_derivative_decay")->pass);
        CHECK(r.find("gamma_range")->pass);
        const auto ph = V.phases();
        CHECK(ph == std::vector<double>{-2.0, 0.0, 2.0});

        s.beta0 = Envelope::power_tail(0.5, 1.0);
        const auto r2 = condition_report(build_example_potential(s));
        CHECK_FALSE(r2.find("beta0_decay")->pass);
        CHECK_FALSE(r2.find("beta0_derivative_decay")->pass);
        CHECK_FALSE(r2.all_pass());
    }
    SUBCASE("gamma range is half open") {
        ExampleSpec s;
        s.L = {1.0};
        s.alpha = {1.0};
        s.p = 2;
        s.gamma = 0.5;
        CHECK_THROWS_AS(build_example_potential(s), DomainError);
        s.gamma = 1.01;
        CHECK_THROWS_AS(build_example_potential(s), DomainError);
        s.gamma = 1.0;
        CHECK_NOTHROW(build_example_potential(s));
        s.p = 3;
        s.gamma = 0.5;
        CHECK_NOTHROW(build_example_potential(s));
        s.gamma = 1.0 / 3.0;
        CHECK_THROWS_AS(build_example_potential(s), DomainError);
    }
    SUBCASE("xi' decay is enforced") {
        ExampleSpec s;
        s.L = {1.0};
        s.alpha = {1.0};
        s.gamma = 0.9;
        s.xi = {{[](double x) { return std::log(x); }, [](double x) { return 1.0 / x; }}};
        CHECK_NOTHROW(build_example_potential(s));
        s.xi = {{[](double x) { return std::sqrt(x); }, [](double x) { return 0.5 / std::sqrt(x); }}};
        CHECK_THROWS_AS(build_example_potential(s), DomainError);
    }
    SUBCASE("invalid amplitudes and phases") {
        ExampleSpec s;
        s.L = {-1.0};
        s.alpha = {1.0};
        CHECK_THROWS_AS(build_example_potential(s), DomainError);
        s.L = {1.0};
        s.alpha = {0.0};
        CHECK_THROWS_AS(build_example_potential(s), DomainError);
    }
}

TEST_CASE("empty perturbation evaluates to zero") {
    const GBVPerturbation V({}, 2, 0.5, 1.0);
    CHECK(evaluate(V, 3.0) == 0.0);
    CHECK(V(100.0) == 0.0);
    CHECK(V.phases().empty());
}

TEST_CASE("realness of random conjugate-closed term lists") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<GBVTerm> terms;
        const int n = 1 + trial % 5;
        for (int l = 0; l < n; ++l) {
            const std::complex<double> c(u(rng), u(rng));
            const double phi = u(rng);
            const auto env = Envelope::power_tail(0.6 + 0.1 * (l % 4), 1.0 + 0.5 * l);
            terms.push_back({c, phi, env});
            terms.push_back({std::conj(c), -phi, env});
        }
        terms.push_back({u(rng), 0.0, Envelope::power_tail(0.7, 1.0)});
        const GBVPerturbation V(terms, 2, 0.5, 1.0);
        for (double x = 0.5; x < 500.0; x *= 1.37) {
            const auto z = V.complex_value(x);
            CHECK(std::abs(z.imag()) < 1e-12);
            CHECK(evaluate(V, x) == doctest::Approx(smooth_cutoff(x, 1.0) * z.real()).epsilon(1e-14));
        }
    }
}

TEST_CASE("terms must be closed under conjugation") {
    const auto env = Envelope::power_tail(1.0, 1.0);
    CHECK_THROWS_AS(GBVPerturbation({{{1.0, 1.0}, 2.0, env}}, 2, 0.5, 1.0), DomainError);
    CHECK_THROWS_AS(GBVPerturbation({{{0.0, 1.0}, 0.0, env}}, 2, 0.5, 1.0), DomainError);
    CHECK_THROWS_AS(GBVPerturbation({{{1.0, 1.0}, 2.0, env}, {{1.0, -1.0}, -2.0, Envelope::power_tail(0.9, 1.0)}}, 2,
                                    0.5, 1.0),
                    DomainError);
    CHECK_NOTHROW(GBVPerturbation({{{1.0, 1.0}, 2.0, env}, {{1.0, -1.0}, -2.0, env}}, 2, 0.5, 1.0));
}

TEST_CASE("power-tail L^p norm against the closed form") {
    CHECK(Envelope::power_tail(1.0, 1.0).lp_norm(2).value == doctest::Approx(1.0).epsilon(1e-12));
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> g(0.3, 1.2), x0(0.5, 20.0);
    for (int trial = 0; trial < 40; ++trial) {
        const int p = 2 + trial % 4;
        double gamma = g(rng);
        if (p * gamma <= 1.05) gamma = 1.1 / p;
        const double a = x0(rng);
        const double exact = std::pow(std::pow(a, 1 - p * gamma) / (p * gamma - 1), 1.0 / p);
        const auto est = Envelope::power_tail(gamma, a).lp_norm(p);
        CHECK(std::abs(est.value - exact) < 1e-6);
        CHECK(est.error < 1e-6);
    }
    CHECK(std::isinf(Envelope::power_tail(0.5, 1.0).lp_norm(2).value));
}

TEST_CASE("variation of sampled envelopes") {
    // Samples of the monotone 1/x on [1, 1000]; analytic variation on (0, inf) is 1.
    std::vector<double> x, v;
    for (int i = 0; i <= 3000; ++i) {
        const double t = std::pow(1000.0, i / 3000.0);
        x.push_back(t);
        v.push_back(1.0 / t);
    }
    const auto e = Envelope::sampled(x, v);
    const auto var = e.variation();
    CHECK(var.estimated);
    CHECK(std::abs(var.value - 1.0) < 0.01);

    // Non-monotone generator: 2 + sin(x) on [0.5, 0.5 + 10 pi], then drop to 0.
    std::vector<double> xs, vs;
    for (int i = 0; i <= 20000; ++i) {
        const double t = 0.5 + 10 * pi * i / 20000.0;
        xs.push_back(t);
        vs.push_back(2.0 + std::sin(t));
    }
    // Exact variation of 2 + sin on [0.5, 0.5 + 10 pi] is 20, plus the final drop 2 + sin(0.5).
    CHECK(Envelope::sampled(xs, vs).variation().value == doctest::Approx(20.0 + 2.0 + std::sin(0.5)).epsilon(0.01));
    CHECK_THROWS_AS(Envelope::sampled({1.0, 1.0}, {1.0, 2.0}), ConfigError);
}

TEST_CASE("variation is subadditive over envelope sums") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> g(0.3, 1.5), x0(0.5, 5.0), amp(-2.0, 2.0);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<Envelope> parts{Envelope::power_tail(g(rng), x0(rng)), Envelope::power_tail(g(rng), x0(rng))};
        std::vector<double> xs, vs;
        for (int i = 0; i < 30; ++i) {
            xs.push_back(1.0 + i);
            vs.push_back(amp(rng));
        }
        parts.push_back(Envelope::sampled(xs, vs));
        double bound = 0.0;
        for (const auto& p : parts) bound += p.variation().value;
        const auto s = Envelope::sum(parts);
        CHECK(s.variation().value <= bound * (1 + 1e-12));
        CHECK(s(3.7) == doctest::Approx(parts[0](3.7) + parts[1](3.7) + parts[2](3.7)));
    }
}

TEST_CASE("custom envelopes") {
    const auto bare = Envelope::custom("bare", [](double x) { return 1.0 / x; }, {}, 1.0);
    const GBVPerturbation V({{1.0, 0.0, bare}}, 2, 0.5, 1.0);
    CHECK_THROWS_AS(condition_report(V), ConfigError);

    const auto honest = Envelope::custom(
        "inv", [](double x) { return 1.0 / x; }, [](double x) { return -1.0 / (x * x); }, 1.0, 1.0, 1.0, 2.0);
    CHECK(condition_report(GBVPerturbation({{1.0, 0.0, honest}}, 2, 0.5, 1.0)).all_pass());

    // x^{-1/2} sin(x^2) is not of bounded variation; a false declaration is caught.
    const auto chirp = Envelope::custom(
        "chirp", [](double x) { return std::sin(x * x) / std::sqrt(x); },
        [](double x) { return 2 * std::sqrt(x) * std::cos(x * x) - 0.5 * std::sin(x * x) / std::pow(x, 1.5); }, 1.0,
        5.0);
    const auto r = condition_report(GBVPerturbation({{1.0, 0.0, chirp}}, 2, 0.5, 1.0));
    CHECK_FALSE(r.find("bounded_variation")->pass);
}

TEST_CASE("coefficient summability and truncation") {
    const auto env = Envelope::power_tail(1.0, 1.0);
    std::vector<GBVTerm> terms;
    for (int l = 1; l <= 10; ++l) {
        const double c = std::pow(2.0, -l);
        terms.push_back({c, 0.3 * l, env});
        terms.push_back({c, -0.3 * l, env});
    }
    const GBVPerturbation V(terms, 3, 0.25, 1.0);
    CHECK(V.coefficient_sum() == doctest::Approx([&] {
              double s = 0;
              for (int l = 1; l <= 10; ++l) s += 2 * std::pow(std::pow(2.0, -l), 0.25);
              return s;
          }()));
    const auto T = V.truncated(8);
    CHECK(T.terms().size() == 8);
    CHECK(T.tail_bound() == doctest::Approx(2 * (std::pow(2.0, -4) - std::pow(2.0, -10))));
    CHECK_THROWS_AS(V.truncated(7), DomainError);

    const GBVPerturbation bad(terms, 3, 0.6, 1.0);
    CHECK_FALSE(condition_report(bad).find("coefficient_summability")->pass);
}
