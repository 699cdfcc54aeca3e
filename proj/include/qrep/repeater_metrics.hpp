#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "qrep/pulsed_chain.hpp"

namespace qrep {

struct RateResult {
    int depth_n = 0;
    double L_total = 0.0;             // km
    std::vector<double> probs;        // P0, P1..Pn, P_PS
    double fidelity = 0.0;
    double rate_hz = 0.0;             // per memory
    double t_total_s = std::numeric_limits<double>::quiet_NaN();  // unset unless multiplexing asked for
};

// (c/L0) 2^-(n+2) prod(probs) / 1.5^(n+1), with n = link.depth_n.
RateResult rate(const LinkBudget& link, const std::vector<double>& probs, double fidelity);

// (N_mm N_mem R)^-1; +infinity for a zero rate.
double multiplexed_time(double rate_hz, double n_mm, double n_mem);

struct Scenario {
    enum class Kind { Pulsed, Cw };
    Kind kind = Kind::Pulsed;
    double a = std::numeric_limits<double>::infinity();  // pulsed intensity cap I_max / I_thres
    double kappa_Ttot = 100.0;                            // CW generation time in kappa units

    static Scenario pulsed(double a) { return {Kind::Pulsed, a, 100.0}; }
    static Scenario cw(double kappa_Ttot = 100.0) { return {Kind::Cw, 0.0, kappa_Ttot}; }
    bool ideal_pulse() const { return kind == Kind::Pulsed && std::isinf(a); }
    std::string name() const;
};

// Optimized, distance-independent operating point of one swap depth.
struct DepthPlan {
    int n = 0;
    bool feasible = false;
    std::string reason;
    // pulsed
    double kappa_sigma = std::numeric_limits<double>::quiet_NaN();  // NaN for the ideal pulse
    double P1 = 0.0;
    double purity = 1.0;
    // cw
    double kappa_T = std::numeric_limits<double>::quiet_NaN();
    double x2 = 0.0;
    // probabilities that do not depend on the distance
    std::vector<double> swap_probs;
    double p_ps = 0.0;
    double fidelity = 0.0;
};

// Rate of a plan at the given total distance; budget.L_total and depth_n are overridden.
RateResult evaluate_plan(const Scenario& sc, const DepthPlan& plan, double L_total, LinkBudget budget);

struct DepthChoice {
    bool feasible = false;
    int n = -1;
    RateResult result;
};

// Argmax over the feasible plans, ties toward smaller n.
DepthChoice best_depth(double L_total, const Scenario& sc, const std::vector<DepthPlan>& plans,
                       const LinkBudget& budget);

// Distance where plans a and b have equal rate, by bisection on log(R_a / R_b) in
// [lo, hi] to tol km. Throws Infeasible when the sign does not change.
double crossover(const Scenario& sc, const DepthPlan& a, const DepthPlan& b, const LinkBudget& budget,
                 double lo = 10.0, double hi = 5000.0, double tol = 0.01);

}  // namespace qrep
