#include <cmath>
#include <thread>

#include "doctest.h"
#include "qrep/cw_chain.hpp"
#include "qrep/optimizer.hpp"

using namespace qrep;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TEST_SUITE("optimizer") {

TEST_CASE("P1 target solve") {
    auto pure = ModeDecomposition::from_weights({1.0});
    for (int n = 0; n <= 4; ++n) {
        TargetSolve s = solve_target_p1(0.9, n, pure, 0.72);
        CHECK(std::abs(s.achieved_F - 0.9) <= 1e-6);
        CHECK(std::abs(fidelity_pulsed(n, s.value, pure, 0.72) - 0.9) <= 1e-6);
        CHECK(s.param == "P1");
        CHECK(s.value > 0.0);
    }
    // roughly quarters per depth
    CHECK(solve_target_p1(0.9, 1, pure, 0.72).value ==
          doctest::Approx(solve_target_p1(0.9, 0, pure, 0.72).value / 4.0).epsilon(0.02));

    auto two = ModeDecomposition::from_weights({0.5, 0.5});
    try {
        solve_target_p1(0.9, 1, two, 0.72);
        FAIL("expected infeasible");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Infeasible);
    }
    TargetSolve full = solve_target_p1(0.9, 2, pure, 0.72, FidelityOrder::Full);
    CHECK(std::abs(fidelity_pulsed(2, full.value, pure, 0.72, FidelityOrder::Full) - 0.9) <= 1e-6);
}

TEST_CASE("optimal pulse width sits on the intensity cap") {
    for (double a : {0.1, 1.0}) {
        double prev = 10.0;
        for (int n = 0; n <= 2; ++n) {
            SigmaSolve s = optimal_sigma(a, n, 0.9, 0.72);
            CHECK(s.p1.value == doctest::Approx(p1_max(a, s.kappa_sigma)).epsilon(1e-4));
            CHECK(s.kappa_sigma < prev);
            CHECK(s.kappa_sigma_3dp == doctest::Approx(std::round(s.kappa_sigma * 1000) / 1000));
            prev = s.kappa_sigma;
        }
    }
    // a smaller cap forces wider pulses
    CHECK(optimal_sigma(0.1, 1, 0.9, 0.72).kappa_sigma > optimal_sigma(1.0, 1, 0.9, 0.72).kappa_sigma);
    CHECK_THROWS_AS(optimal_sigma(kInf, 1, 0.9, 0.72), Error);
}

TEST_CASE("weight cache is shared across threads") {
    std::shared_ptr<const ModeDecomposition> got[4];
    std::vector<std::thread> ts;
    for (int i = 0; i < 4; ++i) ts.emplace_back([&, i] { got[i] = cached_modes(0.777); });
    for (auto& t : ts) t.join();
    for (int i = 0; i < 4; ++i) CHECK(got[i]->purity == got[0]->purity);
    CHECK(cached_modes(0.777) == cached_modes(0.777));
}

TEST_CASE("x^2 target solve") {
    for (int n = 0; n <= 4; ++n) {
        TargetSolve s = solve_target_x(0.9, n, 5.0, 0.72);
        CHECK(std::abs(fidelity_cw(n, s.value, 5.0, 0.72) - 0.9) <= 1e-6);
        CHECK(s.param == "x2");
    }
}

TEST_CASE("optimal window maximizes the distance-free rate factor") {
    for (int n : {0, 2}) {
        WindowSolve w = optimal_window(n, 0.9, 0.72);
        CHECK(w.unimodal);
        CHECK(w.objective >= window_objective(n, w.kappa_T - 0.3, 0.9, 0.72));
        CHECK(w.objective >= window_objective(n, w.kappa_T + 0.3, 0.9, 0.72));
        // the same window wins at every distance
        LinkBudget b;
        Scenario sc = Scenario::cw();
        auto plan_at = [&](double T) {
            DepthPlan p;
            p.n = n;
            p.feasible = true;
            p.kappa_T = T;
            p.x2 = solve_target_x(0.9, n, T, 0.72).value;
            auto ks = cw_chain<double>(n, p.x2, T, 0.72);
            for (int k = 0; k < n; ++k) p.swap_probs.push_back(swap_probability(ks[k].diag, 0.72));
            p.p_ps = postselect_probability(ks[n].diag, 0.72);
            return p;
        };
        for (double L : {200.0, 800.0}) {
            double best = evaluate_plan(sc, plan_at(w.kappa_T), L, b).rate_hz;
            CHECK(best >= evaluate_plan(sc, plan_at(w.kappa_T - 0.5), L, b).rate_hz);
            CHECK(best >= evaluate_plan(sc, plan_at(w.kappa_T + 0.5), L, b).rate_hz);
        }
    }
}

TEST_CASE("planning is deterministic across job counts") {
    LinkBudget b;
    auto one = plan_depths(Scenario::pulsed(1.0), 3, 0.9, b, 1);
    auto three = plan_depths(Scenario::pulsed(1.0), 3, 0.9, b, 3);
    REQUIRE(one.size() == three.size());
    for (std::size_t i = 0; i < one.size(); ++i) {
        CHECK(one[i].n == static_cast<int>(i));
        CHECK(one[i].kappa_sigma == three[i].kappa_sigma);
        CHECK(one[i].P1 == three[i].P1);
        CHECK(one[i].p_ps == three[i].p_ps);
    }
}

TEST_CASE("table rows chain their distance ranges") {
    LinkBudget b;
    auto rows = build_table(Scenario::pulsed(kInf), 0.9, b);
    REQUIRE(rows.size() == 5);
    CHECK(rows[0].L_from == 100.0);
    for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
        CHECK(rows[i].feasible);
        CHECK(rows[i].L_to == rows[i + 1].L_from);
        CHECK(rows[i].L_to > rows[i].L_from);
        CHECK(std::isnan(rows[i].kappa_sigma));
    }
    CHECK(std::isinf(rows.back().L_to));
    auto cw = build_table(Scenario::cw(), 0.9, b, 2);
    REQUIRE(cw.size() == 3);
    CHECK(cw[1].kappa_T > cw[0].kappa_T);
    CHECK(cw[1].x2 < cw[0].x2);
}

}
