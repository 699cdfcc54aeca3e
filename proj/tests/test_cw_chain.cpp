#include <cmath>
#include <random>

#include "doctest.h"
#include "qrep/cw_chain.hpp"
#include "qrep/quadrature.hpp"

using namespace qrep;

TEST_SUITE("cw_chain") {

TEST_CASE("derived depth-0 set") {
    for (double T : {0.5, 2.0, 6.0, 20.0}) {
        double E = std::exp(-T / 2.0);
        auto k0 = initial_coefficients_cw<double>(0.0, T);
        CHECK(k0.diag.c10 == doctest::Approx(1.0 - E).epsilon(1e-14));
        CHECK(k0.A0 == doctest::Approx(1.0 - E).epsilon(1e-14));
        CHECK(k0.A1 == 0.0);
        CHECK(k0.B0 == 0.0);
        for (double x2 : {1e-4, 1e-3, 0.01}) {
            auto k = initial_coefficients_cw<double>(x2, T);
            CHECK(k.trace() == doctest::Approx(1.0).epsilon(1e-13));
            CHECK(k.A0 == doctest::Approx((1.0 - E) * (1.0 - x2 * T)).epsilon(1e-13));
            CHECK(k.B0 == doctest::Approx(k.diag.c20).epsilon(1e-13));
        }
    }
    CHECK_THROWS_AS(initial_coefficients_cw<double>(0.2, 2.0), Error);
    CHECK_THROWS_AS(initial_coefficients_cw<double>(0.01, 0.0), Error);
}

TEST_CASE("printed depth-0 set as written") {
    // the printed vacuum term has e^{+T/2}; its trace defect does not vanish with x^2
    auto p = initial_coefficients_cw<double>(0.01, 3.0, CwVariant::Printed);
    CHECK(p.trace() - 1.0 == doctest::Approx(0.1198).epsilon(1e-3));
    auto d = initial_coefficients_cw<double>(0.01, 3.0, CwVariant::Derived);
    CHECK(p.diag.c11 == doctest::Approx(d.diag.c11).epsilon(1e-14));
    CHECK(p.diag.c20 == doctest::Approx(d.diag.c20).epsilon(1e-14));
    for (double T : {1.0, 3.0, 6.0}) {
        auto td = cw_detail::depth0_terms(T, CwVariant::Derived);
        auto tp = cw_detail::depth0_terms(T, CwVariant::Printed);
        CHECK(td.A2[1] / tp.A2[1] == doctest::Approx(4.0).epsilon(1e-12));
    }
}

TEST_CASE("mode functions have unit trace and consistent overlaps") {
    for (double T : {0.5, 2.0, 5.0, 12.0}) {
        auto tab = cached_overlap_table(T);
        for (int i = 0; i < 4; ++i) {
            CHECK(tab->self_trace[i] == doctest::Approx(1.0).epsilon(1e-9));
            CHECK(tab->overlap[0][i] == doctest::Approx(1.0).epsilon(1e-9));
            for (int j = 0; j < 4; ++j) {
                CHECK(tab->overlap[i][j] == doctest::Approx(tab->overlap[j][i]).epsilon(1e-12));
                CHECK(tab->cosine[i][j] <= 1.0 + 1e-12);
                CHECK(tab->cosine[i][j] >= -1.0 - 1e-12);
            }
        }
    }
    CHECK(cached_overlap_table(3.0) == cached_overlap_table(3.0));
}

TEST_CASE("overlap table at kappa T = 3, frozen") {
    auto tab = mode_overlap_table(3.0, true);
    CHECK(tab.overlap[1][1] == doctest::Approx(1.05278801).epsilon(1e-7));
    CHECK(tab.overlap[1][2] == doctest::Approx(1.02803901).epsilon(1e-7));
    CHECK(tab.overlap[2][2] == doctest::Approx(1.01493937).epsilon(1e-7));
    CHECK(tab.overlap[3][3] == doctest::Approx(1.00322493).epsilon(1e-7));
    CHECK(tab.B0_derived == doctest::Approx(2.17657537).epsilon(1e-7));
    // printed functions with their printed normalizers
    CHECK(tab.rho10_0_printed == doctest::Approx(1.0).epsilon(1e-7));
    CHECK(tab.rho11_printed == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(tab.rho20_printed == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(tab.rhoB0_printed == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(tab.rhoA1_printed == doctest::Approx(0.67688097).epsilon(1e-6));
    CHECK(tab.rhoA2_printed == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(tab.rho10_2_printed == doctest::Approx(3.45671112).epsilon(1e-6));
    CHECK(tab.rhoA2_shape_deviation < 1e-10);
    CHECK(tab.B0_printed_bracket == doctest::Approx(5.93490646).epsilon(1e-8));
    CHECK(tab.rhoB0_printed_denominator == doctest::Approx(4.35315075).epsilon(1e-8));
    CHECK(tab.has_printed_diagnostics);
    CHECK_FALSE(cached_overlap_table(3.0)->has_printed_diagnostics);
}

TEST_CASE("mode functions against direct quadrature") {
    const double T = 2.5, h = T / 2.0;
    CwModeFunctions mf(T);
    // J = int m0 v, with v the x^2-normalized smearing of m0
    double J = integrate_adaptive([&](double s) { return mf.m0(s) * mf.v(s); }, -h, h, 1e-12, {0.0}).value;
    CHECK(mf.J() == doctest::Approx(J).epsilon(1e-9));
    // trace of rho_A2 computed on the diagonal
    double tr = integrate_adaptive([&](double t) { return mf.evaluate(2, t, t); }, -h, h, 1e-12, {0.0}).value;
    CHECK(tr == doctest::Approx(1.0).epsilon(1e-8));
    // A2 slope is -2 J
    auto t = cw_detail::depth0_terms(T, CwVariant::Derived);
    CHECK(t.A2[1] == doctest::Approx(-2.0 * mf.J()).epsilon(1e-10));
}

TEST_CASE("first-order CW fidelity, frozen") {
    // values confirmed by the time-bin Fock-space simulation
    Dual f0 = fidelity_cw_expansion(0, 2.0, 0.72);
    Dual f1 = fidelity_cw_expansion(1, 2.0, 0.72);
    CHECK(f0.v == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(f0.d == doctest::Approx(-5.17186024).epsilon(1e-8));
    CHECK(f1.v == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(f1.d == doctest::Approx(-20.68744096).epsilon(1e-8));
}

TEST_CASE("fidelity falls with intensity and faster at larger depth") {
    for (double T : {1.0, 5.0}) {
        double prev_x = 1.0;
        for (int n = 0; n <= 4; ++n) {
            double prev = 1.0 + 1e-12;
            for (double x2 : {1e-6, 1e-5, 1e-4, 1e-3, 1e-2}) {
                double F = fidelity_cw(n, x2, T, 0.72);
                CHECK(F < prev);
                prev = F;
            }
            // x^2 where F crosses 0.9 at first order
            Dual f = fidelity_cw_expansion(n, T, 0.72);
            double x_star = (f.v - 0.9) / -f.d;
            CHECK(x_star < prev_x);
            prev_x = x_star;
        }
    }
}

TEST_CASE("chain stays normalized and probabilities in range") {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> ux(0.0, 0.01), uT(0.5, 15.0), ue(0.3, 1.0);
    for (int i = 0; i < 40; ++i) {
        double x2 = ux(rng), T = uT(rng), e = ue(rng);
        auto ks = cw_chain<double>(4, x2, T, e);
        REQUIRE(ks.size() == 5);
        for (const auto& k : ks) {
            CHECK(k.trace() == doctest::Approx(1.0).epsilon(1e-12));
            double p = swap_probability(k.diag, e);
            CHECK(p >= 0.0);
            CHECK(p <= 1.0);
        }
    }
}

TEST_CASE("generation probability and domain checks") {
    bool warn = false;
    CHECK(gen_prob_cw(0.01, 0.5, 100.0, &warn) == doctest::Approx(0.5 * 0.01 * 1.01 * 100.0));
    CHECK(warn);
    gen_prob_cw(1e-4, 0.01, 100.0, &warn);
    CHECK_FALSE(warn);
    CHECK_THROWS_AS(fidelity_cw(7, 0.001, 2.0, 0.72), Error);
    CHECK_THROWS_AS(fidelity_cw(1, 0.2, 2.0, 0.72), Error);
    CHECK_THROWS_AS(fidelity_cw(1, 0.001, 2.0, 0.0), Error);
}

}
