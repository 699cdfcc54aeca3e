#pragma once

#include <memory>
#include <string>
#include <vector>

#include "qrep/repeater_metrics.hpp"
#include "qrep/source_model.hpp"

namespace qrep {

struct TargetSolve {
    double target_F = 0.9;
    std::string param;       // "P1" or "x2"
    double value = 0.0;
    double lo = 0.0, hi = 0.0;
    double achieved_F = 0.0;
    int iterations = 0;
};

// Schmidt weights for a pulse width, memoized per exact kappa sigma (thread safe).
std::shared_ptr<const ModeDecomposition> cached_modes(double kappa_sigma);

// Bisection on P1 in [0, 0.2]. Infeasible when F(P1 -> 0) <= target.
TargetSolve solve_target_p1(double F_target, int n, const ModeDecomposition& modes, double eta2,
                            FidelityOrder order = FidelityOrder::FirstOrder);

struct SigmaSolve {
    double kappa_sigma = 0.0;      // bisection result
    double kappa_sigma_3dp = 0.0;  // rounded to 3 decimals for reporting
    double purity = 1.0;
    TargetSolve p1;
    int iterations = 0;
};

// Crossing of the target P1 and the intensity cap P1_max(a, sigma) over [1e-3, 3].
SigmaSolve optimal_sigma(double a, int n, double F_target, double eta2);

// Bisection on x^2 in [1e-8, 0.1].
TargetSolve solve_target_x(double F_target, int n, double kappa_T, double eta2,
                           FidelityOrder order = FidelityOrder::FirstOrder);

// T-dependent factor of the CW rate: x*^2 (1 + x*^2) prod P_k P_PS.
double window_objective(int n, double kappa_T, double F_target, double eta2);

struct WindowSolve {
    double kappa_T = 0.0;
    double objective = 0.0;
    TargetSolve x2;
    bool unimodal = true;
    std::string warning;
};

// Golden section over kappa T in [0.5, 20] to 0.05, with a unimodality scan on a 0.1 grid.
WindowSolve optimal_window(int n, double F_target, double eta2, double kappa_Ttot = 100.0);

DepthPlan plan_depth(const Scenario& sc, int n, double F_target, const LinkBudget& budget);

// Plans for n = 0..n_max, computed on `jobs` threads; order is always by n.
std::vector<DepthPlan> plan_depths(const Scenario& sc, int n_max, double F_target, const LinkBudget& budget,
                                   int jobs = 1);

// Convenience overload that plans n = 0..6 first.
DepthChoice best_depth(double L_total, const Scenario& sc, double F_target, const LinkBudget& budget);

struct TableRow {
    int n = 0;
    bool feasible = false;
    std::string note;
    double kappa_sigma = std::numeric_limits<double>::quiet_NaN();  // pulsed, reported to 3 decimals
    double P1 = std::numeric_limits<double>::quiet_NaN();
    double kappa_T = std::numeric_limits<double>::quiet_NaN();      // cw
    double x2 = std::numeric_limits<double>::quiet_NaN();
    double L_from = std::numeric_limits<double>::quiet_NaN();       // km
    double L_to = std::numeric_limits<double>::infinity();          // km, infinity for the last row
    DepthPlan plan;
};

// Rows n = 0..n_max with the distance interval in which each depth has the highest
// rate, starting at L_min.
std::vector<TableRow> build_table(const Scenario& sc, double F_target, const LinkBudget& budget, int n_max = 4,
                                  double L_min = 100.0, int jobs = 1);

}  // namespace qrep
