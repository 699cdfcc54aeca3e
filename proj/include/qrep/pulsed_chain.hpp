#pragma once

#include <cmath>
#include <vector>

#include "qrep/dual.hpp"
#include "qrep/errors.hpp"
#include "qrep/source_model.hpp"

namespace qrep {

enum class Attenuation {
    FullSpan,  // eta_LD = eta_d exp(-L0 / L_att), reproduces the tables
    HalfSpan,  // eta_LD = eta_d exp(-L0 / (2 L_att))
};

struct LinkBudget {
    double eta_d = 0.9;
    double eta_m = 0.8;
    double L_att = 22.0;      // km
    double fiber_c = 2.0e5;   // km/s
    double L_total = 100.0;   // km
    int depth_n = 0;
    Attenuation attenuation = Attenuation::FullSpan;

    double L0() const { return L_total / std::ldexp(1.0, depth_n); }
    double eta_LD() const;
    double eta2() const { return eta_m * eta_d; }
    void validate() const;
};

// Diagonal coefficients shared by the pulsed and CW chains.
template <class T>
struct Diagonal {
    T c00{}, c10{}, c11{}, c20{};
    T trace() const { return c00 + c10 + c11 + c20; }
};

// One swap of the diagonal set, unnormalized.
template <class T>
Diagonal<T> swap_diagonal(const Diagonal<T>& c, double e) {
    const double l = 1.0 - e;
    T carry = c.c00 + c.c10 * (l / 2.0) + c.c20 * (l * l / 2.0);
    T a = c.c10 / 2.0 + c.c20 * l;
    Diagonal<T> o;
    o.c00 = e * a * carry;
    o.c10 = e * (a * (c.c10 / 2.0 + c.c11 * l) + c.c11 * carry);
    o.c11 = e * (c.c10 / 2.0) * c.c11;
    o.c20 = e * (c.c10 / 2.0) * (c.c20 / 2.0);
    return o;
}

template <class T>
T swap_probability(const Diagonal<T>& c, double e) {
    return 2.0 * e * (1.0 - e * (c.c10 / 2.0 + c.c11 + c.c20) + e * e * c.c20 / 2.0) *
           (c.c10 / 2.0 + c.c11 + (1.0 - e) * c.c20);
}

template <class T>
T postselect_probability(const Diagonal<T>& c, double e) {
    T s = c.c11 + c.c20;
    T half = (c.c10 + 2.0 * (1.0 - e) * s) / 2.0;
    return 2.0 * e * e * (c.c11 * (1.0 - e * (c.c10 + (2.0 - e) * s)) + half * half);
}

// Readout probabilities of one chain: exactly one photon in one memory, none in
// the other (p10), and no photon at all (p00).
template <class T>
T readout_p10(const Diagonal<T>& c, double e) {
    return e / 2.0 * (c.c10 + 2.0 * (1.0 - e) * (c.c11 + c.c20));
}

template <class T>
struct PulsedCoefficients {
    int depth_n = 0;
    Diagonal<T> diag;
    T A0{}, A1{}, B0{};
    bool normalized = true;

    T trace() const { return diag.trace(); }
};

template <class T>
PulsedCoefficients<T> initial_coefficients(const T& P1, double purity) {
    require(value_of(P1) >= 0.0 && value_of(P1) <= 0.5, ErrorKind::Domain,
            "initial_coefficients: P1 must lie in [0, 0.5]");
    require(purity > 0.0 && purity <= 1.0, ErrorKind::Domain, "initial_coefficients: purity must lie in (0, 1]");
    T D = 1.0 + P1 * (1.0 + purity);
    PulsedCoefficients<T> k;
    k.diag.c00 = T(0.0);
    k.diag.c10 = (1.0 - P1) / D;
    k.diag.c11 = P1 / D;
    k.diag.c20 = P1 * (1.0 + purity) / D;
    k.A0 = k.diag.c10;
    k.A1 = T(0.0);
    k.B0 = P1 * std::sqrt((1.0 + purity) / 2.0) / D;
    k.normalized = true;
    return k;
}

template <class T>
PulsedCoefficients<T> swap_step(const PulsedCoefficients<T>& k, double e) {
    require(e > 0.0 && e <= 1.0, ErrorKind::Domain, "swap_step: eta2 must lie in (0, 1]");
    PulsedCoefficients<T> o;
    o.depth_n = k.depth_n + 1;
    o.diag = swap_diagonal(k.diag, e);
    o.A0 = e / 4.0 * k.A0 * k.A0;
    o.A1 = e / 2.0 * k.A0 * (k.A1 + (1.0 - e) * k.B0);
    o.B0 = e / 4.0 * k.A0 * k.B0;
    o.normalized = false;
    return o;
}

template <class T>
PulsedCoefficients<T> normalize(const PulsedCoefficients<T>& k) {
    T tr = k.trace();
    require(value_of(tr) > 0.0, ErrorKind::Numerical, "normalize: non-positive trace");
    PulsedCoefficients<T> o = k;
    o.diag.c00 = k.diag.c00 / tr;
    o.diag.c10 = k.diag.c10 / tr;
    o.diag.c11 = k.diag.c11 / tr;
    o.diag.c20 = k.diag.c20 / tr;
    o.A0 = k.A0 / tr;
    o.A1 = k.A1 / tr;
    o.B0 = k.B0 / tr;
    o.normalized = true;
    return o;
}

// Normalized coefficient sets at depths 0..n from the exact initial conditions.
template <class T>
std::vector<PulsedCoefficients<T>> pulsed_chain(int n, const T& P1, double purity, double e) {
    require(n >= 0, ErrorKind::Domain, "pulsed_chain: n must be >= 0");
    std::vector<PulsedCoefficients<T>> out;
    out.push_back(initial_coefficients(P1, purity));
    for (int j = 0; j < n; ++j) out.push_back(normalize(swap_step(out.back(), e)));
    return out;
}

// First-order-in-P1 closed forms, verbatim, unnormalized.
PulsedCoefficients<double> closed_form_coefficients(int n, double P1, double purity, double eta2);

// Elementary-link heralding probability 2 eta_LD P1 [1 + P1 (1 + purity)].
double gen_prob_pulsed(double P1, double purity, double eta_LD);

double swap_prob(const PulsedCoefficients<double>& k, double eta2);
double postselect_prob(const PulsedCoefficients<double>& k, double eta2);

// Unnormalized trace after n raw swaps from normalized depth-0 coefficients,
// predicted by the product of swap probabilities.
double predicted_raw_trace(int n, double P1, double purity, double eta2);

enum class FidelityOrder {
    FirstOrder,  // F(0) + P1 F'(0)
    Full,        // ratio of the coefficient polynomials at P1
};

struct FidelityParts {
    double p10 = 0.0;
    double coherence = 0.0;  // sum over modes of C_l^2
    double p_ps = 0.0;
    double F = 0.0;
};

// Assembly from a normalized coefficient set of depth k.depth_n.
template <class T>
T fidelity_from_coefficients(const PulsedCoefficients<T>& k, const ModeDecomposition& modes, double e,
                             T* p_ps_out = nullptr) {
    const double pur = modes.purity;
    const double lam_scale = std::sqrt(2.0 / (1.0 + pur));
    const double power = std::ldexp(1.0, k.depth_n);
    T p10 = readout_p10(k.diag, e);
    T coh(0.0);
    for (double w : modes.weights) {
        double lam = lam_scale * (1.0 + w);
        double wp = std::pow(w, power);
        T C = e * wp * ((k.A0 + k.A1 * lam) / 2.0 + (1.0 - e) * k.B0 * lam);
        coh += C * C;
    }
    T pps = postselect_probability(k.diag, e);
    if (p_ps_out) *p_ps_out = pps;
    require(value_of(pps) > 0.0, ErrorKind::UndefinedFidelity, "fidelity: post-selection probability is zero");
    return (p10 * p10 + coh) / pps;
}

double fidelity_pulsed(int n, double P1, const ModeDecomposition& modes, double eta2,
                       FidelityOrder order = FidelityOrder::FirstOrder);

// F(0) and dF/dP1 at P1 = 0.
Dual fidelity_pulsed_expansion(int n, const ModeDecomposition& modes, double eta2);

enum class BaselineMode { Exact, Approximate };
double baseline_fidelity(const ModeDecomposition& modes, int n, BaselineMode mode);

}  // namespace qrep
