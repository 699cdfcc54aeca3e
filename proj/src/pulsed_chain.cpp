#include "qrep/pulsed_chain.hpp"

#include <cmath>

namespace qrep {

double LinkBudget::eta_LD() const {
    double scale = attenuation == Attenuation::FullSpan ? 1.0 : 2.0;
    return eta_d * std::exp(-L0() / (scale * L_att));
}

void LinkBudget::validate() const {
    require(eta_d >= 0.0 && eta_d <= 1.0, ErrorKind::Domain, "link: eta_d outside [0,1]");
    require(eta_m >= 0.0 && eta_m <= 1.0, ErrorKind::Domain, "link: eta_m outside [0,1]");
    require(L_att > 0.0 && fiber_c > 0.0, ErrorKind::Domain, "link: L_att and c must be > 0");
    require(L_total > 0.0, ErrorKind::Domain, "link: L_total must be > 0");
    require(depth_n >= 0, ErrorKind::Domain, "link: depth_n must be >= 0");
}

PulsedCoefficients<double> closed_form_coefficients(int n, double P1, double pur, double e) {
    require(n >= 0, ErrorKind::Domain, "closed_form_coefficients: n must be >= 0");
    const double q = std::pow(e / 4.0, std::ldexp(1.0, n) - 1.0);
    const double N = std::ldexp(1.0, n);
    const double r = std::sqrt((1.0 + pur) / 2.0);
    PulsedCoefficients<double> k;
    k.depth_n = n;
    k.diag.c00 = q * (1 - e) * (N - 1) *
                 (1 - P1 * ((1 + pur) * (1 - e) + N * (4 - 3 * pur + 2 * e + 6 * pur * e) / 3 -
                            2 * N * N * (1 - e) / 3));
    k.diag.c10 = q * (1 - P1 * (2 * (1 + pur) * (1 - e) + N * (2 - pur + 2 * pur * e) - 2 * N * N * (1 - e)));
    k.diag.c11 = N * q * P1;
    k.diag.c20 = q * (1 + pur) * P1;
    k.A0 = q * (1 - N * (2 + pur) * P1);
    k.A1 = q * (N - 1) * (1 - e) * r * P1;
    k.B0 = q * r * P1;
    k.normalized = false;
    return k;
}

double gen_prob_pulsed(double P1, double pur, double eta_LD) {
    require(P1 >= 0.0 && eta_LD >= 0.0 && eta_LD <= 1.0, ErrorKind::Domain, "gen_prob_pulsed: inputs out of domain");
    return 2.0 * eta_LD * P1 * (1.0 + P1 * (1.0 + pur));
}

namespace {
void require_normalized(const PulsedCoefficients<double>& k, const char* who) {
    if (!k.normalized || std::abs(k.trace() - 1.0) > 1e-9)
        fail(ErrorKind::Contract, std::string(who) + ": coefficient set is not normalized");
}
}  // namespace

double swap_prob(const PulsedCoefficients<double>& k, double e) {
    require_normalized(k, "swap_prob");
    return swap_probability(k.diag, e);
}

double postselect_prob(const PulsedCoefficients<double>& k, double e) {
    require_normalized(k, "postselect_prob");
    return postselect_probability(k.diag, e);
}

double predicted_raw_trace(int n, double P1, double pur, double e) {
    auto ks = pulsed_chain<double>(n, P1, pur, e);
    // swap k (depth k-1 -> k) enters with power 2^{n-k}
    double tr = 1.0;
    for (int k = 1; k <= n; ++k) tr *= std::pow(swap_probability(ks[k - 1].diag, e) / 2.0, std::ldexp(1.0, n - k));
    return tr;
}

Dual fidelity_pulsed_expansion(int n, const ModeDecomposition& modes, double e) {
    auto ks = pulsed_chain<Dual>(n, Dual(0.0, 1.0), modes.purity, e);
    return fidelity_from_coefficients(ks.back(), modes, e);
}

double fidelity_pulsed(int n, double P1, const ModeDecomposition& modes, double e, FidelityOrder order) {
    require(e > 0.0 && e <= 1.0, ErrorKind::Domain, "fidelity_pulsed: eta2 must lie in (0, 1]");
    if (order == FidelityOrder::FirstOrder) {
        require(P1 >= 0.0 && P1 <= 0.5, ErrorKind::Domain, "fidelity_pulsed: P1 must lie in [0, 0.5]");
        Dual F = fidelity_pulsed_expansion(n, modes, e);
        return F.v + P1 * F.d;
    }
    auto ks = pulsed_chain<double>(n, P1, modes.purity, e);
    return fidelity_from_coefficients(ks.back(), modes, e);
}

double baseline_fidelity(const ModeDecomposition& modes, int n, BaselineMode mode) {
    require(n >= 0, ErrorKind::Domain, "baseline_fidelity: n must be >= 0");
    if (mode == BaselineMode::Approximate) return (1.0 + std::pow(modes.purity, std::ldexp(1.0, n))) / 2.0;
    double s = 0.0;
    for (double w : modes.weights) s += std::pow(w, std::ldexp(1.0, n + 1));
    return (1.0 + s) / 2.0;
}

}  // namespace qrep
