#include <cmath>

#include "doctest.h"
#include "qrep/optimizer.hpp"
#include "qrep/repeater_metrics.hpp"

using namespace qrep;

namespace {

LinkBudget link(double L, int n) {
    LinkBudget b;
    b.L_total = L;
    b.depth_n = n;
    return b;
}

DepthPlan fake_plan(int n, double P1) {
    DepthPlan p;
    p.n = n;
    p.feasible = true;
    p.P1 = P1;
    p.purity = 1.0;
    p.swap_probs.assign(n, 0.5);
    p.p_ps = 0.3;
    p.fidelity = 0.9;
    return p;
}

}  // namespace

TEST_SUITE("repeater_metrics") {

TEST_CASE("rate formula") {
    CHECK(rate(link(100, 0), {1.0, 1.0}, 0.9).rate_hz == doctest::Approx(333.333333).epsilon(1e-9));
    CHECK(rate(link(100, 1), {0.5, 0.5, 0.5}, 0.9).rate_hz == doctest::Approx(27.7777778).epsilon(1e-8));
    CHECK_THROWS_AS(rate(link(100, 1), {0.5, 0.5}, 0.9), Error);
    CHECK_THROWS_AS(rate(link(100, 0), {0.5, 1.5}, 0.9), Error);
    auto r = rate(link(400, 2), {0.1, 0.5, 0.5, 0.2}, 0.9);
    CHECK(r.probs.size() == 4);
    CHECK(r.depth_n == 2);
    CHECK(std::isnan(r.t_total_s));
}

TEST_CASE("multiplexed time") {
    CHECK(multiplexed_time(0.01, 100, 32) == doctest::Approx(1.0 / 32.0));
    CHECK(multiplexed_time(0.01, 100, 64) == doctest::Approx(multiplexed_time(0.01, 100, 32) / 2.0));
    CHECK(std::isinf(multiplexed_time(0.0, 100, 32)));
    CHECK_THROWS_AS(multiplexed_time(-1.0, 100, 32), Error);
}

TEST_CASE("plan evaluation and best depth") {
    Scenario sc = Scenario::pulsed(std::numeric_limits<double>::infinity());
    std::vector<DepthPlan> plans{fake_plan(0, 0.05), fake_plan(1, 0.05), fake_plan(2, 0.05)};
    LinkBudget b;
    CHECK(best_depth(20.0, sc, plans, b).n == 0);
    CHECK(best_depth(2000.0, sc, plans, b).n == 2);
    std::vector<DepthPlan> none{DepthPlan{}};
    CHECK_FALSE(best_depth(500.0, sc, none, b).feasible);
    CHECK_THROWS_AS(best_depth(5.0, sc, plans, b), Error);

    RateResult r = evaluate_plan(sc, plans[1], 300.0, b);
    CHECK(r.probs.front() == doctest::Approx(gen_prob_pulsed(0.05, 1.0, 0.9 * std::exp(-150.0 / 22.0))));
    CHECK(r.probs.size() == 3);
}

TEST_CASE("crossover agrees with the closed form for the exponential loss") {
    // R_n(L) L / c = K_n exp(-L / (2^n L_att)) with K_n independent of L
    Scenario sc = Scenario::pulsed(std::numeric_limits<double>::infinity());
    LinkBudget b;
    auto plans = plan_depths(sc, 3, 0.9, b);
    for (int n = 0; n < 3; ++n) {
        auto K = [&](int m, double L) {
            return evaluate_plan(sc, plans[m], L, b).rate_hz * L / b.fiber_c *
                   std::exp(L / (std::ldexp(1.0, m) * b.L_att));
        };
        CHECK(K(n, 100.0) == doctest::Approx(K(n, 900.0)).epsilon(1e-3));
        double expected = std::ldexp(1.0, n + 1) * b.L_att * std::log(K(n, 300.0) / K(n + 1, 300.0));
        CHECK(crossover(sc, plans[n], plans[n + 1], b) == doctest::Approx(expected).epsilon(1e-3));
    }
    // the half-span convention has twice the attenuation length
    LinkBudget h = b;
    h.attenuation = Attenuation::HalfSpan;
    CHECK(crossover(sc, plans[1], plans[2], h) ==
          doctest::Approx(2.0 * crossover(sc, plans[1], plans[2], b)).epsilon(1e-4));
    CHECK_THROWS_AS(crossover(sc, plans[0], plans[1], b, 500.0, 2000.0), Error);
}

TEST_CASE("best depth selections") {
    LinkBudget b;
    CHECK(best_depth(500.0, Scenario::cw(), 0.9, b).n == 2);
    CHECK(best_depth(200.0, Scenario::pulsed(1.0), 0.9, b).n == 1);
    CHECK(best_depth(1600.0, Scenario::pulsed(std::numeric_limits<double>::infinity()), 0.9, b).n == 4);
}

TEST_CASE("scenario names") {
    CHECK(Scenario::cw().name() == "cw");
    CHECK(Scenario::pulsed(0.1).name() == "pulsed(a=0.1)");
    CHECK(Scenario::pulsed(std::numeric_limits<double>::infinity()).ideal_pulse());
}

}
