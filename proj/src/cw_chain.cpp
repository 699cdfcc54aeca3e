#include "qrep/cw_chain.hpp"

#include <cmath>
#include <map>
#include <mutex>

#include "qrep/quadrature.hpp"

namespace qrep {

namespace cw_detail {

Terms depth0_terms(double T, CwVariant variant) {
    const double E = std::exp(-T / 2.0);
    const double E2 = E * E;
    Terms t{};
    auto set = [](double* p, double a, double b) { p[0] = a; p[1] = b; };
    set(t.c11, 0.0, T * (1.0 - E) / 2.0);
    set(t.c20, 0.0, (2.0 * (5.0 + T) - E * (14.0 + 6.0 * T + T * T / 4.0) + E2 * (4.0 + T)) / 4.0);
    set(t.A1, 0.0, (10.0 - E * (10.0 + 3.0 * T + T * T / 4.0)) / 4.0);
    if (variant == CwVariant::Printed) {
        set(t.c00, E, -(10.0 * (1.0 - E) + T * (2.0 - std::exp(T / 2.0) * (3.0 + T / 4.0))) / 4.0);
        set(t.c10, 1.0 - E, -(2.0 * T - E * (4.0 + 5.0 * T) + E2 * (4.0 + T)) / 4.0);
        set(t.A0, 1.0 - E, -(1.0 - E) * T / 4.0);
        set(t.A1, 0.0, (10.0 * (1.0 - E) - T * E * (3.0 - T)) / 4.0);
        set(t.A2, 0.0, -(5.0 * (1.0 - E) - E * (2.0 + 2.0 * T + T * T / 8.0) + E2 * (4.0 + T) / 2.0) / 4.0);
        set(t.B0, 0.0,
            ((5.0 + T) * (1.0 - E) - E2 * (2.0 + 2.0 * T + T * T / 8.0) + E2 * (4.0 + T) / 2.0) / 4.0);
        return t;
    }
    const double c10s = T * T * E / 16.0 - T - T * E2 / 2.0 + 13.0 * T * E / 4.0 - 2.5 - 2.0 * E2 + 4.5 * E;
    const double Ss = T * T * E / 16.0 - T - T * E2 / 2.0 + 9.0 * T * E / 4.0 - 2.5 - 2.0 * E2 + 4.5 * E;
    set(t.c10, 1.0 - E, c10s);
    set(t.c00, E, -(c10s + t.c11[1] + t.c20[1]));
    set(t.A0, 1.0 - E, -(1.0 - E) * T);
    set(t.A2, 0.0, Ss + (1.0 - E) * T - t.A1[1]);
    set(t.B0, 0.0, t.c20[1]);
    return t;
}

}  // namespace cw_detail

// CwModeFunctions -------------------------------------------------------------

double CwModeFunctions::m0(double t) { return 0.70710678118654752440 * std::exp(-std::abs(t) / 2.0); }

double CwModeFunctions::u1(double t) {
    double g = 1.0 + std::abs(t) / 2.0;
    return m0(t) * g * g;
}

double CwModeFunctions::Nshape(double d) {
    d = std::abs(d);
    return 0.5 * std::exp(-d / 2.0) * (1.0 + d / 2.0);
}

double CwModeFunctions::v(double s) const {
    // the integrand is smooth between the kinks at tau = 0 and tau = s
    double a = std::min(0.0, s), b = std::max(0.0, s);
    double bounds[4] = {-T_ / 2.0, a, b, T_ / 2.0};
    double sum = 0.0;
    for (int p = 0; p < 3; ++p) {
        double lo = bounds[p], hi = bounds[p + 1];
        if (hi <= lo) continue;
        double h = (hi - lo) / 2.0, c = (hi + lo) / 2.0;
        for (std::size_t i = 0; i < vx_.size(); ++i) {
            double tau = c + h * vx_[i];
            sum += h * vw_[i] * Nshape(s - tau) * m0(tau);
        }
    }
    return sum;
}

double CwModeFunctions::u(int i, double t) const {
    switch (i) {
        case 0: return m0(t);
        case 1: return u1(t);
        default: return v(t);
    }
}

CwModeFunctions::CwModeFunctions(double kappa_T) : T_(kappa_T) {
    require(kappa_T > 0.0 && kappa_T <= 50.0, ErrorKind::Domain, "mode functions: kappa T must lie in (0, 50]");
    const Rule& r = gauss_legendre(32);
    vx_ = r.x;
    vw_ = r.w;
    const double h = T_ / 2.0;
    for (int a = 0; a < 3; ++a) {
        for (int b = a; b < 3; ++b) {
            auto f = [&](double t) { return u(a, t) * u(b, t); };
            double val = integrate_adaptive(f, -h, h, 1e-11, {0.0}).value;
            gram_[a][b] = gram_[b][a] = val;
        }
    }
    const double E = std::exp(-T_ / 2.0);
    const double N1 = 10.0 - E * (10.0 + 3.0 * T_ + T_ * T_ / 4.0);
    const double Jv = J();
    const double B0s = T_ * (1.0 - E) / 2.0 + Jv;
    fn_[0] = {{1.0 / (1.0 - E), 0, 0}};
    fn_[1] = {{2.0 / N1, 1, 0}, {2.0 / N1, 0, 1}};
    fn_[2] = {{1.0 / (2.0 * Jv), 2, 0}, {1.0 / (2.0 * Jv), 0, 2}};
    // R(tA, s) = m0(tA) [T m0(s) / 2 + v(s)] / 2, symmetrized, over 2 tr R
    fn_[3] = {{T_ / 4.0 / B0s, 0, 0}, {0.5 / B0s, 0, 2}, {T_ / 4.0 / B0s, 0, 0}, {0.5 / B0s, 2, 0}};
}

double CwModeFunctions::evaluate(int i, double t1, double t2) const {
    double s = 0.0;
    for (const Term& k : fn_[i]) s += k.coef * u(k.f, t1) * u(k.h, t2);
    return s;
}

// Printed functions -------------------------------------------------------------

namespace cw_printed {

double rhoA2(double t1, double t2, double T) {
    const double E = std::exp(-T / 2.0);
    double a1 = std::abs(t1), a2 = std::abs(t2);
    double den = 5.0 - E * (7.0 + 2.0 * T + T * T / 8.0) + E * E * (4.0 + T) / 2.0;
    double brace = 6.0 + (3.0 - E) * (a1 + a2) / 2.0 + (a1 * a1 + a2 * a2) / 4.0 -
                   E * (3.0 + T / 2.0) * (1.0 + (std::exp(a1) + std::exp(a2)) / 2.0) +
                   E * (a1 * std::exp(a1) + a2 * std::exp(a2)) / 2.0;
    return 0.5 * std::exp(-(a1 + a2) / 2.0) / den * brace;
}

double rho10_2(double t1, double t2, double T) {
    const double E = std::exp(-T / 2.0);
    double a1 = std::abs(t1), a2 = std::abs(t2), d = std::abs(t1 - t2);
    double den = 2.0 * T - E * (4.0 + 5.0 * T) + E * E * (4.0 + T);
    double first = 2.0 * E * std::exp(-d / 2.0) * (1.0 + d / 2.0) / den;
    double brace = 4.0 + 2.0 * T + (a1 + a2) / 2.0 * (1.0 - E) +
                   E / 2.0 * ((a1 * std::exp(a1) + a2 * std::exp(a2)) / 2.0 -
                              (1.0 + (std::exp(a1) + std::exp(a2)) / 2.0) * (6.0 + T));
    return first + std::exp(-(a1 + a2) / 2.0) / 2.0 / den * brace;
}

double rho11(double t1, double t2, double t3, double t4, double T) {
    const double E = std::exp(-T / 2.0);
    double d24 = std::abs(t2 - t4), d13 = std::abs(t1 - t3);
    double num = std::exp(-(std::abs(t1) + std::abs(t3) + d24) / 2.0) * (1.0 + d24 / 2.0) +
                 std::exp(-(std::abs(t2) + std::abs(t4) + d13) / 2.0) * (1.0 + d13 / 2.0);
    return num / (4.0 * T * (1.0 - E));
}

double rho20(double t1, double t2, double t3, double t4, double T) {
    const double E = std::exp(-T / 2.0);
    double d = std::abs(t2 - t4);
    double den = 2.0 * (5.0 + T) - E * (14.0 + 6.0 * T + T * T / 4.0) + E * E * (4.0 + T);
    return 4.0 * std::exp(-(std::abs(t1) + std::abs(t3) + d) / 2.0) * (1.0 + d / 2.0) / den;
}

double rhoB0(double t1, double t2, double t3, double t4, double T) {
    const double E = std::exp(-T / 2.0);
    double d = std::abs(t2 - t3);
    double den = (5.0 + T) - E * (7.0 + 3.0 * T + T * T / 8.0) + E * E * (4.0 + T) / 2.0;
    return std::exp(-(std::abs(t1) + std::abs(t4) + d) / 2.0) * (1.0 + d / 2.0) / den;
}

}  // namespace cw_printed

// Overlap table ---------------------------------------------------------------------

namespace {

double integrate2d(const std::function<double(double, double)>& f, double h, double tol) {
    auto inner = [&](double t1) {
        return integrate_adaptive([&](double t2) { return f(t1, t2); }, -h, h, tol / (4.0 * h), {0.0, t1}).value;
    };
    return integrate_adaptive(inner, -h, h, tol, {0.0}).value;
}

double separable_inner(const CwModeFunctions::Separable& a, const CwModeFunctions::Separable& b,
                       const std::array<std::array<double, 3>, 3>& G) {
    double s = 0.0;
    for (const auto& p : a)
        for (const auto& q : b) s += p.coef * q.coef * G[p.f][q.f] * G[p.h][q.h];
    return s;
}

double separable_trace(const CwModeFunctions::Separable& a, const std::array<std::array<double, 3>, 3>& G) {
    double s = 0.0;
    for (const auto& p : a) s += p.coef * G[p.f][p.h];
    return s;
}

}  // namespace

ModeFunctionTable mode_overlap_table(double kappa_T, bool with_printed) {
    CwModeFunctions mf(kappa_T);
    const auto& G = mf.gram();
    const double T = kappa_T, h = T / 2.0, E = std::exp(-T / 2.0);
    ModeFunctionTable tab;
    tab.kappa_T = T;
    for (int i = 0; i < 4; ++i) {
        tab.self_trace[i] = separable_trace(mf.function(i), G);
        for (int j = 0; j < 4; ++j) tab.overlap[i][j] = separable_inner(mf.function(i), mf.function(j), G);
    }
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            tab.cosine[i][j] = tab.overlap[i][j] / std::sqrt(tab.overlap[i][i] * tab.overlap[j][j]);
    tab.B0_derived = T * (1.0 - E) / 2.0 + mf.J();
    if (!with_printed) return tab;
    tab.has_printed_diagnostics = true;

    const double tol = 1e-7;
    tab.rho10_0_printed = integrate_adaptive([&](double t) { return std::exp(-std::abs(t)) / (2.0 * (1.0 - E)); },
                                             -h, h, tol, {0.0}).value;
    tab.rho10_2_printed =
        integrate_adaptive([&](double t) { return cw_printed::rho10_2(t, t, T); }, -h, h, tol, {0.0}).value;
    tab.rhoA1_printed = 4.0 * G[0][1] / (10.0 * (1.0 - E) - T * E * (3.0 - T));
    tab.rhoA2_printed =
        integrate_adaptive([&](double t) { return cw_printed::rhoA2(t, t, T); }, -h, h, tol, {0.0}).value;
    tab.rho11_printed = integrate2d([&](double a, double b) { return cw_printed::rho11(a, b, a, b, T); }, h, tol);
    // |t1 t2><t3 t4| has trace delta13 delta24 + delta14 delta23 and appears twice with weight 1/8
    tab.rho20_printed = 0.25 * integrate2d(
                                   [&](double a, double b) {
                                       return cw_printed::rho20(a, b, a, b, T) + cw_printed::rho20(a, b, b, a, T);
                                   },
                                   h, tol);
    // loses one of the two photons in t1, t2; average of the two contractions
    tab.rhoB0_printed = 0.5 * integrate2d(
                                  [&](double s, double tau) {
                                      return cw_printed::rhoB0(s, tau, tau, s, T) + cw_printed::rhoB0(tau, s, tau, s, T);
                                  },
                                  h, tol);

    // shape check of the printed rho_A2 on a grid
    double dev = 0.0;
    const int ng = 41;
    for (int i = 0; i < ng; ++i) {
        for (int j = 0; j < ng; ++j) {
            double t1 = -h + T * i / (ng - 1), t2 = -h + T * j / (ng - 1);
            double p = cw_printed::rhoA2(t1, t2, T) / tab.rhoA2_printed;
            dev = std::max(dev, std::abs(p - mf.evaluate(2, t1, t2)));
        }
    }
    tab.rhoA2_shape_deviation = dev;

    tab.B0_printed_bracket = (5.0 + T) * (1.0 - E) - E * E * (2.0 + 2.0 * T + T * T / 8.0) + E * E * (4.0 + T) / 2.0;
    tab.rhoB0_printed_denominator = (5.0 + T) - E * (7.0 + 3.0 * T + T * T / 8.0) + E * E * (4.0 + T) / 2.0;
    return tab;
}

std::shared_ptr<const ModeFunctionTable> cached_overlap_table(double kappa_T) {
    static std::mutex mu;
    static std::map<double, std::shared_ptr<const ModeFunctionTable>> cache;
    {
        std::lock_guard<std::mutex> lock(mu);
        auto it = cache.find(kappa_T);
        if (it != cache.end()) return it->second;
    }
    auto tab = std::make_shared<const ModeFunctionTable>(mode_overlap_table(kappa_T, false));
    std::lock_guard<std::mutex> lock(mu);
    if (cache.size() > 4096) cache.clear();
    return cache.emplace(kappa_T, tab).first->second;
}

double gen_prob_cw(double x2, double eta_LD, double kappa_Ttot, bool* warn) {
    require(x2 >= 0.0 && eta_LD >= 0.0 && eta_LD <= 1.0 && kappa_Ttot > 0.0, ErrorKind::Domain,
            "gen_prob_cw: inputs out of domain");
    double p = eta_LD * x2 * (1.0 + x2) * kappa_Ttot;
    if (warn) *warn = p > 0.1;
    return p;
}

Dual fidelity_cw_expansion(int n, double kappa_T, double e, CwVariant variant) {
    auto tab = cached_overlap_table(kappa_T);
    auto ks = cw_chain<Dual>(n, Dual(0.0, 1.0), kappa_T, e, variant);
    return fidelity_from_cw_coefficients(ks.back(), *tab, e);
}

double fidelity_cw(int n, double x2, double kappa_T, double e, FidelityOrder order, CwVariant variant) {
    require(e > 0.0 && e <= 1.0, ErrorKind::Domain, "fidelity_cw: eta2 must lie in (0, 1]");
    require(n >= 0 && n <= 6, ErrorKind::Domain, "fidelity_cw: n must lie in [0, 6]");
    require(x2 >= 0.0 && x2 <= 0.1, ErrorKind::Domain, "fidelity_cw: x^2 must lie in [0, 0.1]");
    if (order == FidelityOrder::FirstOrder) {
        Dual F = fidelity_cw_expansion(n, kappa_T, e, variant);
        return F.v + x2 * F.d;
    }
    auto tab = cached_overlap_table(kappa_T);
    auto ks = cw_chain<double>(n, x2, kappa_T, e, variant);
    return fidelity_from_cw_coefficients(ks.back(), *tab, e);
}

}  // namespace qrep
