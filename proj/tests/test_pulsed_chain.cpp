#include <cmath>
#include <random>

#include "doctest.h"
#include "qrep/pulsed_chain.hpp"

using namespace qrep;

namespace {

// raw (never normalized) chain, for the trace identity
template <class T = double>
PulsedCoefficients<T> raw_chain(int n, const T& P1, double pur, double e) {
    auto k = initial_coefficients(P1, pur);
    for (int j = 0; j < n; ++j) k = swap_step(k, e);
    return k;
}

}  // namespace

TEST_SUITE("pulsed_chain") {

TEST_CASE("attenuation conventions") {
    LinkBudget b;
    b.L_total = 200.0;
    b.depth_n = 1;
    CHECK(b.L0() == 100.0);
    CHECK(b.eta_LD() == doctest::Approx(0.9 * std::exp(-100.0 / 22.0)));
    b.attenuation = Attenuation::HalfSpan;
    CHECK(b.eta_LD() == doctest::Approx(0.9 * std::exp(-100.0 / 44.0)));
    CHECK(b.eta2() == doctest::Approx(0.72));
    b.eta_d = 1.2;
    CHECK_THROWS_AS(b.validate(), Error);
}

TEST_CASE("depth-0 coefficients") {
    auto k = initial_coefficients(0.0, 0.8);
    CHECK(k.diag.c10 == 1.0);
    CHECK(k.A0 == 1.0);
    CHECK(k.B0 == 0.0);
    auto k2 = initial_coefficients(0.01, 0.95);
    CHECK(k2.trace() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(k2.diag.c00 == 0.0);
    CHECK_THROWS_AS(initial_coefficients(0.6, 0.9), Error);
    CHECK_THROWS_AS(initial_coefficients(0.01, 0.0), Error);
}

TEST_CASE("closed forms track the recursion to first order") {
    // c's, A0 and B0 agree at O(P1^2); halving P1 quarters the gap
    for (double e : {0.5, 0.72, 1.0})
        for (int n = 0; n <= 4; ++n) {
            auto gap = [&](double P1) {
                auto r = raw_chain(n, P1, 0.95, e);
                auto c = closed_form_coefficients(n, P1, 0.95, e);
                double q = std::pow(e / 4.0, std::ldexp(1.0, n) - 1.0);
                double m = 0.0;
                for (auto [x, y] : {std::pair{r.diag.c00, c.diag.c00}, {r.diag.c10, c.diag.c10},
                                    {r.diag.c11, c.diag.c11}, {r.diag.c20, c.diag.c20}, {r.A0, c.A0}, {r.B0, c.B0}})
                    m = std::max(m, std::abs(x - y) / q);
                return m;
            };
            double g1 = gap(4e-4), g2 = gap(2e-4);
            if (g1 < 1e-12) continue;
            CHECK(g1 / g2 == doctest::Approx(4.0).epsilon(0.02));
        }
}

TEST_CASE("closed-form A1 is half the recursion value") {
    for (double e : {0.5, 0.72})
        for (int n = 1; n <= 4; ++n) {
            double P1 = 1e-6;
            auto r = raw_chain(n, P1, 0.9, e);
            auto c = closed_form_coefficients(n, P1, 0.9, e);
            CHECK(r.A1 / c.A1 == doctest::Approx(2.0).epsilon(1e-3));
        }
}

TEST_CASE("two swaps at P1 = 0.01 match the n = 2 closed form") {
    auto r = raw_chain(2, 0.01, 0.95, 0.72);
    auto c = closed_form_coefficients(2, 0.01, 0.95, 0.72);
    CHECK(std::abs(r.diag.c10 - c.diag.c10) < 1e-3);
    CHECK(std::abs(r.A0 - c.A0) < 1e-3);
    CHECK(std::abs(r.B0 - c.B0) < 1e-3);
}

TEST_CASE("raw trace equals the product of swap probabilities to first order") {
    // the diagonal recursion and the swap probability both drop three-photon terms,
    // differently, so the identity holds through O(P1) only
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> upur(0.4, 1.0), ue(0.3, 1.0);
    for (int i = 0; i < 50; ++i) {
        double pur = upur(rng), e = ue(rng);
        int n = 1 + i % 4;
        Dual P1(0.0, 1.0);
        auto ks = pulsed_chain<Dual>(n, P1, pur, e);
        Dual pred(1.0);
        for (int k = 1; k <= n; ++k) {
            Dual half = swap_probability(ks[k - 1].diag, e) / 2.0;
            for (int r = 0; r < (1 << (n - k)); ++r) pred *= half;
        }
        Dual tr = raw_chain<Dual>(n, P1, pur, e).trace();
        CHECK(tr.v == doctest::Approx(pred.v).epsilon(1e-12));
        CHECK(tr.d == doctest::Approx(pred.d).epsilon(1e-10));
        CHECK(predicted_raw_trace(n, 0.0, pur, e) == doctest::Approx(raw_chain(n, 0.0, pur, e).trace()).epsilon(1e-12));
        auto gap = [&](double p) {
            return std::abs(raw_chain(n, p, pur, e).trace() / predicted_raw_trace(n, p, pur, e) - 1.0);
        };
        CHECK(gap(4e-4) / gap(2e-4) == doctest::Approx(4.0).epsilon(0.03));
    }
}

TEST_CASE("probabilities and fidelities stay in range") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> up(0.0, 0.05), ue(0.3, 1.0);
    auto modes = ModeDecomposition::from_weights({0.6, 0.25, 0.1, 0.05});
    for (int i = 0; i < 60; ++i) {
        double P1 = up(rng), e = ue(rng);
        int n = i % 5;
        auto ks = pulsed_chain<double>(n, P1, modes.purity, e);
        for (const auto& k : ks) {
            CHECK(k.trace() == doctest::Approx(1.0).epsilon(1e-12));
            double ps = swap_prob(k, e);
            CHECK(ps >= 0.0);
            CHECK(ps <= 1.0);
            double pps = postselect_prob(k, e);
            CHECK(pps > 0.0);
            CHECK(pps <= 1.0);
        }
        double F = fidelity_pulsed(n, P1, modes, e, FidelityOrder::Full);
        CHECK(F >= 0.0);
        CHECK(F <= 1.0);
    }
    PulsedCoefficients<double> raw = swap_step(initial_coefficients(0.01, 0.9), 0.72);
    CHECK_THROWS_AS(swap_prob(raw, 0.72), Error);
}

TEST_CASE("baseline fidelity at vanishing intensity") {
    auto m = ModeDecomposition::from_weights({0.5, 0.5});
    CHECK(baseline_fidelity(m, 1, BaselineMode::Exact) == doctest::Approx(0.5625).epsilon(1e-12));
    CHECK(fidelity_pulsed_expansion(1, m, 0.72).v == doctest::Approx(0.5625).epsilon(1e-12));
    for (double s : {0.2, 1.0, 2.5}) {
        ModeDecomposition md = mode_decomposition(s);
        for (int n = 0; n <= 4; ++n) {
            Dual f = fidelity_pulsed_expansion(n, md, 0.72);
            CHECK(std::abs(f.v - baseline_fidelity(md, n, BaselineMode::Exact)) < 1e-8);
            CHECK(f.d < 0.0);
        }
        // n = 0: both baselines coincide
        CHECK(baseline_fidelity(md, 0, BaselineMode::Approximate) ==
              doctest::Approx(baseline_fidelity(md, 0, BaselineMode::Exact)).epsilon(1e-12));
    }
}

TEST_CASE("first-order fidelity expansion, frozen") {
    // values confirmed by the truncated Fock-space simulation
    auto m = ModeDecomposition::from_weights({0.7, 0.3});
    Dual f0 = fidelity_pulsed_expansion(0, m, 0.72);
    Dual f1 = fidelity_pulsed_expansion(1, m, 0.72);
    Dual f2 = fidelity_pulsed_expansion(2, m, 0.72);
    CHECK(f0.v == doctest::Approx(0.79).epsilon(1e-13));
    CHECK(f0.d == doctest::Approx(-1.190784).epsilon(1e-10));
    CHECK(f1.v == doctest::Approx(0.6241).epsilon(1e-13));
    CHECK(f1.d == doctest::Approx(-3.32220672).epsilon(1e-10));
    CHECK(f2.v == doctest::Approx(0.52885681).epsilon(1e-12));
    CHECK(f2.d == doctest::Approx(-9.97877).epsilon(1e-5));

    ModeDecomposition md = mode_decomposition(1.0);
    CHECK(fidelity_pulsed_expansion(1, md, 0.72).v == doctest::Approx(0.877148961170).epsilon(1e-9));
    CHECK(fidelity_pulsed_expansion(1, md, 0.72).d == doctest::Approx(-5.5681290120).epsilon(1e-8));
}

TEST_CASE("full and first-order fidelity differ at second order") {
    ModeDecomposition md = mode_decomposition(0.5);
    for (int n = 0; n <= 3; ++n) {
        auto gap = [&](double P1) {
            return std::abs(fidelity_pulsed(n, P1, md, 0.72, FidelityOrder::Full) -
                            fidelity_pulsed(n, P1, md, 0.72, FidelityOrder::FirstOrder));
        };
        CHECK(gap(2e-4) / gap(1e-4) == doctest::Approx(4.0).epsilon(0.05));
    }
}

TEST_CASE("fidelity decreases with depth at fixed width") {
    for (double s : {0.1, 0.5, 1.5}) {
        ModeDecomposition md = mode_decomposition(s);
        for (int n = 1; n <= 4; ++n)
            CHECK(fidelity_pulsed(n, 0.001, md, 0.72) < fidelity_pulsed(n - 1, 0.001, md, 0.72));
    }
}

TEST_CASE("generation probability") {
    CHECK(gen_prob_pulsed(0.01, 0.9, 0.5) == doctest::Approx(2 * 0.5 * 0.01 * (1 + 0.01 * 1.9)));
    CHECK_THROWS_AS(gen_prob_pulsed(0.01, 0.9, 1.5), Error);
}

}
