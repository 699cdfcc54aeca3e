#include "qrep/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "qrep/cw_chain.hpp"
#include "qrep/pulsed_chain.hpp"

namespace qrep {

std::shared_ptr<const ModeDecomposition> cached_modes(double kappa_sigma) {
    static std::mutex mu;
    static std::map<double, std::shared_ptr<const ModeDecomposition>> cache;
    {
        std::lock_guard<std::mutex> lock(mu);
        auto it = cache.find(kappa_sigma);
        if (it != cache.end()) return it->second;
    }
    auto m = std::make_shared<const ModeDecomposition>(mode_decomposition(kappa_sigma));
    std::lock_guard<std::mutex> lock(mu);
    if (cache.size() > 4096) cache.clear();
    return cache.emplace(kappa_sigma, m).first->second;
}

namespace {

// Bisection for a decreasing F(p) on [lo, hi].
template <class F>
TargetSolve bisect_target(F&& fid, double target, double lo, double hi, const char* param) {
    TargetSolve s;
    s.target_F = target;
    s.param = param;
    s.lo = lo;
    s.hi = hi;
    double f_lo = fid(lo);
    if (!(f_lo > target)) {
        std::ostringstream msg;
        msg << "target fidelity " << target << " not reachable: F(" << param << " = " << lo << ") = " << f_lo;
        fail(ErrorKind::Infeasible, msg.str());
    }
    double f_hi = fid(hi);
    if (f_hi > target) {
        std::ostringstream msg;
        msg << "target fidelity " << target << " not bracketed: F(" << param << " = " << hi << ") = " << f_hi;
        fail(ErrorKind::Numerical, msg.str());
    }
    double a = lo, b = hi, fm = f_lo, mid = lo;
    for (s.iterations = 0; s.iterations < 200; ++s.iterations) {
        mid = 0.5 * (a + b);
        fm = fid(mid);
        if (std::abs(fm - target) <= 1e-10 || b - a < 1e-15) break;
        if (fm > target)
            a = mid;
        else
            b = mid;
    }
    require(std::abs(fm - target) <= 1e-6, ErrorKind::Numerical, "bisection did not reach the target fidelity");
    s.value = mid;
    s.achieved_F = fm;
    return s;
}

}  // namespace

TargetSolve solve_target_p1(double F_target, int n, const ModeDecomposition& modes, double eta2,
                            FidelityOrder order) {
    require(F_target > 0.0 && F_target < 1.0, ErrorKind::Domain, "solve_target_p1: target must lie in (0, 1)");
    require(n >= 0 && n <= 6, ErrorKind::Domain, "solve_target_p1: n must lie in [0, 6]");
    if (order == FidelityOrder::FirstOrder) {
        Dual f = fidelity_pulsed_expansion(n, modes, eta2);
        return bisect_target([&](double p) { return f.v + p * f.d; }, F_target, 0.0, 0.2, "P1");
    }
    return bisect_target([&](double p) { return fidelity_pulsed(n, p, modes, eta2, order); }, F_target, 0.0, 0.2,
                         "P1");
}

SigmaSolve optimal_sigma(double a, int n, double F_target, double eta2) {
    require(a > 0.0 && std::isfinite(a), ErrorKind::Domain, "optimal_sigma: a must be positive and finite");
    require(n >= 0 && n <= 6, ErrorKind::Domain, "optimal_sigma: n must lie in [0, 6]");
    // positive while the fidelity-limited P1 exceeds the intensity cap
    auto excess = [&](double s) {
        double cap = p1_max(a, s);
        try {
            return solve_target_p1(F_target, n, *cached_modes(s), eta2).value - cap;
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::Infeasible) throw;
            return -cap;
        }
    };
    double lo = 1e-3, hi = 3.0;
    double f_lo = excess(lo), f_hi = excess(hi);
    if (!(f_lo > 0.0 && f_hi < 0.0)) {
        std::ostringstream msg;
        msg << "optimal_sigma: no crossing of P1* and P1_max in [" << lo << ", " << hi << "] for a = " << a
            << ", n = " << n;
        fail(ErrorKind::Infeasible, msg.str());
    }
    SigmaSolve out;
    while (hi - lo > 1e-6) {
        double mid = 0.5 * (lo + hi);
        if (excess(mid) > 0.0)
            lo = mid;
        else
            hi = mid;
        ++out.iterations;
    }
    // the low end is the widest pulse still limited by fidelity, so P1* is defined there
    out.kappa_sigma = lo;
    out.kappa_sigma_3dp = std::round(lo * 1000.0) / 1000.0;
    auto modes = cached_modes(lo);
    out.purity = modes->purity;
    out.p1 = solve_target_p1(F_target, n, *modes, eta2);
    return out;
}

TargetSolve solve_target_x(double F_target, int n, double kappa_T, double eta2, FidelityOrder order) {
    require(F_target > 0.0 && F_target < 1.0, ErrorKind::Domain, "solve_target_x: target must lie in (0, 1)");
    require(n >= 0 && n <= 6, ErrorKind::Domain, "solve_target_x: n must lie in [0, 6]");
    if (order == FidelityOrder::FirstOrder) {
        Dual f = fidelity_cw_expansion(n, kappa_T, eta2);
        return bisect_target([&](double x2) { return f.v + x2 * f.d; }, F_target, 1e-8, 0.1, "x2");
    }
    return bisect_target([&](double x2) { return fidelity_cw(n, x2, kappa_T, eta2, order); }, F_target, 1e-8, 0.1,
                         "x2");
}

namespace {

struct CwPoint {
    TargetSolve x2;
    std::vector<double> swap_probs;
    double p_ps = 0.0;
    double fidelity = 0.0;
    double objective = 0.0;
};

CwPoint cw_point(int n, double kappa_T, double F_target, double eta2) {
    CwPoint p;
    p.x2 = solve_target_x(F_target, n, kappa_T, eta2);
    auto ks = cw_chain<double>(n, p.x2.value, kappa_T, eta2);
    double prod = 1.0;
    for (int k = 0; k < n; ++k) {
        p.swap_probs.push_back(swap_probability(ks[k].diag, eta2));
        prod *= p.swap_probs.back();
    }
    p.p_ps = postselect_probability(ks[n].diag, eta2);
    p.fidelity = p.x2.achieved_F;
    double x2 = p.x2.value;
    p.objective = x2 * (1.0 + x2) * prod * p.p_ps;
    return p;
}

}  // namespace

double window_objective(int n, double kappa_T, double F_target, double eta2) {
    return cw_point(n, kappa_T, F_target, eta2).objective;
}

WindowSolve optimal_window(int n, double F_target, double eta2, double kappa_Ttot) {
    require(n >= 0 && n <= 6, ErrorKind::Domain, "optimal_window: n must lie in [0, 6]");
    require(kappa_Ttot > 0.0, ErrorKind::Domain, "optimal_window: kappa Ttot must be positive");
    const double lo = 0.5, hi = 20.0;
    auto g = [&](double T) { return window_objective(n, T, F_target, eta2); };

    WindowSolve out;
    // unimodality scan
    std::vector<double> grid, val;
    for (int i = 0; lo + 0.1 * i <= hi + 1e-9; ++i) {
        grid.push_back(lo + 0.1 * i);
        val.push_back(g(grid.back()));
    }
    std::size_t arg = std::max_element(val.begin(), val.end()) - val.begin();
    int peaks = 0;
    for (std::size_t i = 1; i + 1 < val.size(); ++i)
        if (val[i] > val[i - 1] && val[i] > val[i + 1]) ++peaks;
    double a = lo, b = hi;
    if (peaks > 1) {
        out.unimodal = false;
        out.warning = "objective is not unimodal on the 0.1 grid; refining around the grid maximum";
        a = grid[arg == 0 ? 0 : arg - 1];
        b = grid[std::min(arg + 1, grid.size() - 1)];
    }

    const double r = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - r * (b - a), d = a + r * (b - a);
    double gc = g(c), gd = g(d);
    while (b - a > 0.05) {
        if (gc > gd) {
            b = d;
            d = c;
            gd = gc;
            c = b - r * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + r * (b - a);
            gd = g(d);
        }
    }
    out.kappa_T = 0.5 * (a + b);
    CwPoint p = cw_point(n, out.kappa_T, F_target, eta2);
    // a golden section that lands below the grid maximum means a plateau edge
    if (p.objective < val[arg]) {
        out.kappa_T = grid[arg];
        p = cw_point(n, out.kappa_T, F_target, eta2);
    }
    out.objective = p.objective;
    out.x2 = p.x2;
    return out;
}

DepthPlan plan_depth(const Scenario& sc, int n, double F_target, const LinkBudget& budget) {
    require(n >= 0 && n <= 6, ErrorKind::Domain, "plan_depth: n must lie in [0, 6]");
    const double e = budget.eta2();
    DepthPlan plan;
    plan.n = n;
    try {
        if (sc.kind == Scenario::Kind::Cw) {
            WindowSolve w = optimal_window(n, F_target, e, sc.kappa_Ttot);
            CwPoint p = cw_point(n, w.kappa_T, F_target, e);
            plan.kappa_T = w.kappa_T;
            plan.x2 = p.x2.value;
            plan.swap_probs = p.swap_probs;
            plan.p_ps = p.p_ps;
            plan.fidelity = p.fidelity;
            if (!w.unimodal) plan.reason = w.warning;
        } else {
            std::shared_ptr<const ModeDecomposition> modes;
            if (sc.ideal_pulse()) {
                modes = std::make_shared<const ModeDecomposition>(ModeDecomposition::from_weights({1.0}));
                plan.P1 = solve_target_p1(F_target, n, *modes, e).value;
            } else {
                SigmaSolve s = optimal_sigma(sc.a, n, F_target, e);
                plan.kappa_sigma = s.kappa_sigma;
                plan.P1 = s.p1.value;
                modes = cached_modes(s.kappa_sigma);
            }
            plan.purity = modes->purity;
            auto ks = pulsed_chain<double>(n, plan.P1, plan.purity, e);
            for (int k = 0; k < n; ++k) plan.swap_probs.push_back(swap_prob(ks[k], e));
            plan.p_ps = postselect_prob(ks[n], e);
            plan.fidelity = fidelity_pulsed(n, plan.P1, *modes, e);
        }
        plan.feasible = true;
    } catch (const Error& err) {
        if (err.kind() != ErrorKind::Infeasible) throw;
        plan.feasible = false;
        plan.reason = err.what();
    }
    return plan;
}

std::vector<DepthPlan> plan_depths(const Scenario& sc, int n_max, double F_target, const LinkBudget& budget,
                                   int jobs) {
    require(n_max >= 0 && n_max <= 6, ErrorKind::Domain, "plan_depths: n_max must lie in [0, 6]");
    std::vector<DepthPlan> plans(n_max + 1);
    jobs = std::max(1, std::min(jobs, n_max + 1));
    if (jobs == 1) {
        for (int n = 0; n <= n_max; ++n) plans[n] = plan_depth(sc, n, F_target, budget);
        return plans;
    }
    std::vector<std::exception_ptr> errors(n_max + 1);
    std::vector<std::thread> pool;
    for (int w = 0; w < jobs; ++w) {
        pool.emplace_back([&, w] {
            for (int n = w; n <= n_max; n += jobs) {
                try {
                    plans[n] = plan_depth(sc, n, F_target, budget);
                } catch (...) {
                    errors[n] = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return plans;
}

DepthChoice best_depth(double L_total, const Scenario& sc, double F_target, const LinkBudget& budget) {
    return best_depth(L_total, sc, plan_depths(sc, 6, F_target, budget), budget);
}

std::vector<TableRow> build_table(const Scenario& sc, double F_target, const LinkBudget& budget, int n_max,
                                  double L_min, int jobs) {
    std::vector<DepthPlan> plans = plan_depths(sc, n_max, F_target, budget, jobs);
    std::vector<TableRow> rows(plans.size());
    for (std::size_t i = 0; i < plans.size(); ++i) {
        TableRow& r = rows[i];
        r.n = plans[i].n;
        r.plan = plans[i];
        r.feasible = plans[i].feasible;
        r.note = plans[i].reason;
        if (!r.feasible) continue;
        if (sc.kind == Scenario::Kind::Cw) {
            r.kappa_T = plans[i].kappa_T;
            r.x2 = plans[i].x2;
        } else {
            r.P1 = plans[i].P1;
            if (!sc.ideal_pulse()) r.kappa_sigma = std::round(plans[i].kappa_sigma * 1000.0) / 1000.0;
        }
    }
    // depth n wins between the crossovers with n - 1 and n + 1
    double from = L_min;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (!rows[i].feasible) continue;
        rows[i].L_from = from;
        if (i + 1 < rows.size() && rows[i + 1].feasible) {
            try {
                rows[i].L_to = crossover(sc, plans[i], plans[i + 1], budget, std::max(10.0, 0.5 * L_min), 5000.0);
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::Infeasible) throw;
                rows[i].L_to = std::numeric_limits<double>::quiet_NaN();
                rows[i].note += (rows[i].note.empty() ? "" : "; ") + std::string(e.what());
            }
            from = rows[i].L_to;
        }
    }
    return rows;
}

}  // namespace qrep
