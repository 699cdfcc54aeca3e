#pragma once

#include <array>
#include <memory>
#include <vector>

#include "qrep/dual.hpp"
#include "qrep/pulsed_chain.hpp"

namespace qrep {

// Depth-0 coefficient sets for continuous driving.
enum class CwVariant {
    Derived,  // from the two-time correlation functions; used everywhere
    Printed,  // reference formulas taken verbatim, kept for comparison
};

template <class T>
struct CwCoefficients {
    int depth_n = 0;
    double kappa_T = 0.0;
    double strength_x2 = 0.0;
    Diagonal<T> diag;
    T A0{}, A1{}, A2{}, B0{};
    bool normalized = true;

    T trace() const { return diag.trace(); }
};

namespace cw_detail {

struct Terms {
    // value = base + x2 * slope for every coefficient
    double c00[2], c10[2], c11[2], c20[2], A0[2], A1[2], A2[2], B0[2];
};

Terms depth0_terms(double kappa_T, CwVariant variant);

}  // namespace cw_detail

template <class T>
CwCoefficients<T> initial_coefficients_cw(const T& x2, double kappa_T, CwVariant variant = CwVariant::Derived) {
    require(value_of(x2) >= 0.0 && value_of(x2) <= 0.1, ErrorKind::Domain,
            "initial_coefficients_cw: x^2 must lie in [0, 0.1]");
    require(kappa_T > 0.0 && kappa_T <= 50.0, ErrorKind::Domain,
            "initial_coefficients_cw: kappa T must lie in (0, 50]");
    cw_detail::Terms t = cw_detail::depth0_terms(kappa_T, variant);
    auto ev = [&](const double* p) { return T(p[0]) + x2 * p[1]; };
    CwCoefficients<T> k;
    k.kappa_T = kappa_T;
    k.strength_x2 = value_of(x2);
    k.diag.c00 = ev(t.c00);
    k.diag.c10 = ev(t.c10);
    k.diag.c11 = ev(t.c11);
    k.diag.c20 = ev(t.c20);
    k.A0 = ev(t.A0);
    k.A1 = ev(t.A1);
    k.A2 = ev(t.A2);
    k.B0 = ev(t.B0);
    k.normalized = false;
    return k;
}

template <class T>
CwCoefficients<T> swap_step_cw(const CwCoefficients<T>& k, double e) {
    require(e > 0.0 && e <= 1.0, ErrorKind::Domain, "swap_step_cw: eta2 must lie in (0, 1]");
    CwCoefficients<T> o = k;
    o.depth_n = k.depth_n + 1;
    o.diag = swap_diagonal(k.diag, e);
    o.A0 = e / 4.0 * k.A0 * (k.A0 + k.A1 + k.A2 + 2.0 * (1.0 - e) * k.B0);
    o.A1 = e / 4.0 * k.A0 * k.A1;
    o.A2 = e / 4.0 * k.A0 * k.A2;
    o.B0 = e / 4.0 * k.A0 * k.B0;
    o.normalized = false;
    return o;
}

template <class T>
CwCoefficients<T> normalize(const CwCoefficients<T>& k) {
    T tr = k.trace();
    require(value_of(tr) > 0.0, ErrorKind::Numerical, "normalize: non-positive trace");
    CwCoefficients<T> o = k;
    o.diag.c00 = k.diag.c00 / tr;
    o.diag.c10 = k.diag.c10 / tr;
    o.diag.c11 = k.diag.c11 / tr;
    o.diag.c20 = k.diag.c20 / tr;
    o.A0 = k.A0 / tr;
    o.A1 = k.A1 / tr;
    o.A2 = k.A2 / tr;
    o.B0 = k.B0 / tr;
    o.normalized = true;
    return o;
}

// Normalized sets at depths 0..n.
template <class T>
std::vector<CwCoefficients<T>> cw_chain(int n, const T& x2, double kappa_T, double e,
                                        CwVariant variant = CwVariant::Derived) {
    require(n >= 0, ErrorKind::Domain, "cw_chain: n must be >= 0");
    std::vector<CwCoefficients<T>> out;
    out.push_back(normalize(initial_coefficients_cw(x2, kappa_T, variant)));
    for (int j = 0; j < n; ++j) out.push_back(normalize(swap_step_cw(out.back(), e)));
    return out;
}

// Coherence functions in kappa units on [-T/2, T/2]. Every function used by the
// fidelity is a sum of products f(t1) h(t2) of three single-time functions
//   u0 = m0, u1 = m0 (1 + |t|/2)^2, u2 = v,
// with m0(t) = e^{-|t|/2}/sqrt(2) and v(s) = int N(s - tau) m0(tau) dtau / x^2.
class CwModeFunctions {
public:
    explicit CwModeFunctions(double kappa_T);

    struct Term {
        double coef;
        int f, h;
    };
    using Separable = std::vector<Term>;

    double kappa_T() const { return T_; }
    static double m0(double t);
    static double u1(double t);
    // N(d) / x^2
    static double Nshape(double d);
    double v(double s) const;
    double u(int i, double t) const;

    // int u_a u_b over the window, adaptive quadrature
    const std::array<std::array<double, 3>, 3>& gram() const { return gram_; }
    // int m0 v, per x^2
    double J() const { return gram_[0][2]; }

    // trace-one coherence functions: 0 = A0, 1 = A1, 2 = A2, 3 = R
    const Separable& function(int i) const { return fn_[i]; }
    double evaluate(int i, double t1, double t2) const;

private:
    double T_;
    std::vector<double> vx_, vw_;  // nodes for v
    std::array<std::array<double, 3>, 3> gram_{};
    std::array<Separable, 4> fn_;
};

// Verbatim reference functions, used only for diagnostics.
namespace cw_printed {
double rhoA2(double t1, double t2, double T);
double rho10_2(double t1, double t2, double T);
double rho11(double t1, double t2, double t3, double t4, double T);
double rho20(double t1, double t2, double t3, double t4, double T);
double rhoB0(double t1, double t2, double t3, double t4, double T);
}  // namespace cw_printed

struct ModeFunctionTable {
    double kappa_T = 0.0;
    // Hilbert-Schmidt overlaps of rho_A0, rho_A1, rho_A2, rho_R
    std::array<std::array<double, 4>, 4> overlap{};
    // overlap / sqrt(self * self)
    std::array<std::array<double, 4>, 4> cosine{};
    // traces of the functions used; 1 by construction
    std::array<double, 4> self_trace{};

    // Self-normalizations of the printed functions with their printed
    // denominators (1 when the printed normalizer is right).
    double rho10_0_printed = 0.0;
    double rho10_2_printed = 0.0;
    double rho11_printed = 0.0;
    double rho20_printed = 0.0;
    double rhoA1_printed = 0.0;
    double rhoA2_printed = 0.0;
    double rhoB0_printed = 0.0;
    // max |printed rho_A2 shape - rho_A2|, both normalized to unit trace
    double rhoA2_shape_deviation = 0.0;
    // per x^2: B0 bracket as printed, rho_B0 denominator as printed, and the
    // reduced trace of the two-photon/one-photon block
    double B0_printed_bracket = 0.0;
    double rhoB0_printed_denominator = 0.0;
    double B0_derived = 0.0;
    bool has_printed_diagnostics = false;
};

// with_printed = false skips the 2-D integrals of the printed functions and
// leaves those fields at 0.
ModeFunctionTable mode_overlap_table(double kappa_T, bool with_printed = true);

// Shared immutable table per kappa T, overlaps only.
std::shared_ptr<const ModeFunctionTable> cached_overlap_table(double kappa_T);

// eta_LD x^2 (1 + x^2) kappa Ttot. Sets *warn when the result exceeds 0.1.
double gen_prob_cw(double x2, double eta_LD, double kappa_Ttot, bool* warn = nullptr);

template <class T>
T fidelity_from_cw_coefficients(const CwCoefficients<T>& k, const ModeFunctionTable& tab, double e,
                                T* p_ps_out = nullptr) {
    T p10 = readout_p10(k.diag, e);
    std::array<T, 4> a{k.A0 / 2.0, k.A1 / 2.0, k.A2 / 2.0, (1.0 - e) * k.B0};
    T g2(0.0);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) g2 += a[i] * a[j] * tab.overlap[i][j];
    g2 = e * e * g2;
    T pps = postselect_probability(k.diag, e);
    if (p_ps_out) *p_ps_out = pps;
    require(value_of(pps) > 0.0, ErrorKind::UndefinedFidelity, "fidelity_cw: post-selection probability is zero");
    return (p10 * p10 + g2) / pps;
}

double fidelity_cw(int n, double x2, double kappa_T, double eta2, FidelityOrder order = FidelityOrder::FirstOrder,
                   CwVariant variant = CwVariant::Derived);

Dual fidelity_cw_expansion(int n, double kappa_T, double eta2, CwVariant variant = CwVariant::Derived);

}  // namespace qrep
