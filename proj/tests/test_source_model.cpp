#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "qrep/errors.hpp"
#include "qrep/quadrature.hpp"
#include "qrep/source_model.hpp"
#include "qrep/special.hpp"

using namespace qrep;

namespace {

// Direct double integral of chi(t) chi(tau) e^{-|t - tau|}, independent of erfcx.
double p1_double_integral(double x, double s) {
    auto chi = [&](double t) { return x / (std::sqrt(2.0 * std::numbers::pi) * s) * std::exp(-t * t / (2.0 * s * s)); };
    const double h = 12.0 * s;
    auto outer = [&](double t) {
        return chi(t) * integrate_adaptive([&](double u) { return chi(u) * std::exp(-std::abs(t - u)); }, -h, h,
                                           1e-14, {t})
                            .value;
    };
    return integrate_adaptive(outer, -h, h, 1e-13 * x * x, {0.0}).value;
}

}  // namespace

TEST_SUITE("source_model") {

TEST_CASE("erfcx matches erfc times exp and its asymptotic series") {
    for (double z : {0.0, 0.3, 1.0, 2.5, 4.9})
        CHECK(erfcx(z) == doctest::Approx(std::erfc(z) * std::exp(z * z)).epsilon(1e-13));
    // continuity across the branch switch
    CHECK(erfcx(5.0 - 1e-9) == doctest::Approx(erfcx(5.0 + 1e-9)).epsilon(1e-9));
    for (double z : {8.0, 30.0, 1e3}) {
        double z2 = z * z;
        double series = 1.0 / (z * std::sqrt(std::numbers::pi)) * (1.0 - 1.0 / (2 * z2) + 3.0 / (4 * z2 * z2));
        CHECK(erfcx(z) == doctest::Approx(series).epsilon(2e-5));
    }
    CHECK(std::isfinite(erfcx(1e6)));
}

TEST_CASE("pair probability closed form") {
    CHECK(p1_pulsed(0.0, 1.0) == 0.0);
    CHECK(p1_pulsed(0.3, 1e-9) == doctest::Approx(0.09).epsilon(1e-8));
    CHECK(p1_pulsed(0.1, 1.0) == doctest::Approx(0.01 * std::exp(1.0) * std::erfc(1.0)).epsilon(1e-14));
    CHECK(p1_pulsed(0.1, 1.0) == doctest::Approx(4.2758e-3).epsilon(1e-4));
    CHECK_THROWS_AS(p1_pulsed(-0.1, 1.0), Error);
    CHECK_THROWS_AS(p1_pulsed(0.1, 0.0), Error);
}

TEST_CASE("pair probability agrees with the double integral") {
    for (double x : {0.01, 0.1, 0.3})
        for (double s : {0.05, 0.5, 1.0, 5.0}) {
            double q = p1_double_integral(x, s);
            CHECK(std::abs(p1_pulsed(x, s) - q) / q < 1e-6);
        }
}

TEST_CASE("intensity-capped pair probability") {
    CHECK(p1_max(1.0, 1.0) == doctest::Approx(std::numbers::pi / 2.0 * std::exp(1.0) * std::erfc(1.0)).epsilon(1e-13));
    CHECK(p1_max(1.0, 1.0) == doctest::Approx(0.6716).epsilon(1e-4));
    CHECK(p1_max(1.0, 1e-6) < 1e-11);
    for (double s : {20.0, 50.0, 200.0})
        CHECK(std::abs(p1_max(2.0, s) / (2.0 * std::sqrt(std::numbers::pi) * s / 2.0) - 1.0) < 0.01);
    CHECK_THROWS_AS(p1_max(0.0, 1.0), Error);

    // p1_max with a = 2 x^2 / (pi s^2) is p1_pulsed
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> ux(0.01, 0.3), us(0.05, 10.0);
    for (int i = 0; i < 200; ++i) {
        double x = ux(rng), s = us(rng);
        double a = 2.0 * x * x / (std::numbers::pi * s * s);
        CHECK(std::abs(p1_max(a, s) / p1_pulsed(x, s) - 1.0) < 1e-12);
    }
}

TEST_CASE("drive profile validation") {
    CHECK_THROWS_AS(DriveProfile::gaussian(-1.0, 1.0), Error);
    CHECK_THROWS_AS(DriveProfile::gaussian(0.1, 0.0), Error);
    CHECK_THROWS_AS(DriveProfile::continuous(1.0), Error);
    CHECK(DriveProfile::continuous(0.4).chi(3.0) == doctest::Approx(0.2));
    auto g = make_kernel_grid(1.0, 400);
    try {
        build_joint_kernel(DriveProfile::continuous(0.2), g);
        FAIL("expected an unsupported-profile error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::UnsupportedProfile);
    }
    try {
        build_joint_kernel(DriveProfile::gaussian(0.0, 1.0), g);
        FAIL("expected a zero-amplitude error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::ZeroAmplitude);
    }
}

TEST_CASE("kernel grid spans the pulse and the cavity tail") {
    for (double s : {0.01, 1.0, 3.0}) {
        auto g = make_kernel_grid(s, 400);
        CHECK_NOTHROW(g.validate());
        CHECK(g.size() == 400);
        double m = std::max(1.0, s);
        CHECK(g.points.front() < -0.95 * 6 * m);
        CHECK(g.points.back() > 6 * m);
    }
}

TEST_CASE("coarse grids are refused") {
    auto g = make_kernel_grid(2.0, 200);
    try {
        build_joint_kernel(DriveProfile::gaussian(1.0, 2.0), g);
        FAIL("expected a grid-too-coarse error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::GridTooCoarse);
    }
}

TEST_CASE("Nystrom decomposition on the kernel grid") {
    auto g = make_kernel_grid(1.0, 400);
    Eigen::MatrixXd k = build_joint_kernel(DriveProfile::gaussian(0.1, 1.0), g);
    ModeDecomposition m = schmidt_decompose(k, g);
    CHECK_NOTHROW(m.validate());
    // converges as N^-2 towards the spectral route
    ModeDecomposition ref = mode_decomposition(1.0);
    CHECK(std::abs(m.weights[0] - ref.weights[0]) < 5e-4);
    CHECK(std::abs(m.purity - ref.purity) < 1e-3);

    Eigen::MatrixXd bad = 2.0 * k;
    CHECK_THROWS_AS(schmidt_decompose(bad, g), Error);
}

TEST_CASE("short pulses give a pure, exponentially decaying signal mode") {
    auto g = make_kernel_grid(0.01, 400);
    Eigen::MatrixXd k = build_joint_kernel(DriveProfile::gaussian(0.2, 0.01), g);
    CHECK(schmidt_decompose(k, g).purity >= 0.999);
    CHECK(mode_decomposition(0.01).purity >= 0.999);
    // after the pulse the kernel factorizes into e^{-ts/2} e^{-ti/2}
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < g.size(); ++i)
        if (g.points[i] > 0.5 && g.points[i] < 8.0) idx.push_back(i);
    REQUIRE(idx.size() > 10);
    std::size_t j = idx[3];
    for (std::size_t i : idx) {
        double ratio = k(i, j) / k(idx[0], j);
        CHECK(ratio == doctest::Approx(std::exp(-(g.points[i] - g.points[idx[0]]) / 2.0)).epsilon(1e-6));
    }
    CHECK(k(idx.back(), idx[0]) == doctest::Approx(k(idx[0], idx.back())).epsilon(1e-9));
}

TEST_CASE("spectral decomposition converges under refinement") {
    ModeDecomposition a = mode_decomposition(1.0, {25, 16, 9.0});
    ModeDecomposition b = mode_decomposition(1.0, {50, 16, 9.0});
    CHECK(std::abs(a.weights[0] - b.weights[0]) < 1e-6);
    for (int l = 0; l < 10; ++l) CHECK(std::abs(a.weights[l] - b.weights[l]) < 1e-5);
    CHECK(std::abs(a.purity - b.purity) < 1e-8);
}

TEST_CASE("purity against the trace of the fourth power of the pump-time operator") {
    // Tr(M^4) / P^2 with the kernel of M^2 in closed form, integrated with
    // scipy dblquad to 1e-12; no eigensolver involved
    const std::pair<double, double> oracle[] = {
        {0.1, 0.998064382588}, {0.5, 0.959116017615}, {1.0, 0.871406516578}, {2.0, 0.683485851865}};
    for (auto [s, pur] : oracle) CHECK(std::abs(mode_decomposition(s).purity - pur) < 5e-9);
}

TEST_CASE("purity decreases with pulse width") {
    double prev = 1.0;
    for (double s : {0.05, 0.1, 0.3, 0.6, 1.0, 1.7, 3.0}) {
        ModeDecomposition m = mode_decomposition(s);
        CHECK_NOTHROW(m.validate());
        CHECK(m.purity < prev);
        CHECK(m.purity >= 1.0 / m.weights.size());
        for (std::size_t l = 1; l < m.weights.size(); ++l) CHECK(m.weights[l] <= m.weights[l - 1]);
        prev = m.purity;
    }
}

TEST_CASE("mode decomposition from explicit weights") {
    auto m = ModeDecomposition::from_weights({0.3, 0.7});
    REQUIRE(m.weights.size() == 2);
    CHECK(m.weights[0] == 0.7);
    CHECK(m.purity == doctest::Approx(0.58));
    // renormalized, non-positive entries dropped
    auto r = ModeDecomposition::from_weights({1.0, 3.0, 0.0});
    REQUIRE(r.weights.size() == 2);
    CHECK(r.weights[0] == doctest::Approx(0.75));
    CHECK_THROWS_AS(ModeDecomposition::from_weights({0.0, -1.0}), Error);
    ModeDecomposition broken;
    broken.weights = {0.5, 0.6};
    broken.purity = 0.61;
    CHECK_THROWS_AS(broken.validate(), Error);
}

}
