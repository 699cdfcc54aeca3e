#include "qrep/repeater_metrics.hpp"

#include <sstream>

#include "qrep/cw_chain.hpp"

namespace qrep {

RateResult rate(const LinkBudget& link, const std::vector<double>& probs, double fidelity) {
    link.validate();
    const int n = link.depth_n;
    if (static_cast<int>(probs.size()) != n + 2) {
        std::ostringstream msg;
        msg << "rate: expected " << n + 2 << " probabilities for depth " << n << ", got " << probs.size();
        fail(ErrorKind::Contract, msg.str());
    }
    double prod = 1.0;
    for (double p : probs) {
        require(p >= 0.0 && p <= 1.0, ErrorKind::Domain, "rate: probability outside [0,1]");
        prod *= p;
    }
    RateResult r;
    r.depth_n = n;
    r.L_total = link.L_total;
    r.probs = probs;
    r.fidelity = fidelity;
    r.rate_hz = link.fiber_c / link.L0() / std::ldexp(1.0, n + 2) * prod / std::pow(1.5, n + 1);
    return r;
}

double multiplexed_time(double rate_hz, double n_mm, double n_mem) {
    require(rate_hz >= 0.0 && n_mm > 0.0 && n_mem > 0.0, ErrorKind::Domain,
            "multiplexed_time: need rate >= 0 and positive mode and memory counts");
    if (rate_hz == 0.0) return std::numeric_limits<double>::infinity();
    return 1.0 / (n_mm * n_mem * rate_hz);
}

std::string Scenario::name() const {
    if (kind == Kind::Cw) return "cw";
    if (ideal_pulse()) return "pulsed(a=inf)";
    std::ostringstream s;
    s << "pulsed(a=" << a << ")";
    return s.str();
}

RateResult evaluate_plan(const Scenario& sc, const DepthPlan& plan, double L_total, LinkBudget budget) {
    require(plan.feasible, ErrorKind::Infeasible, "evaluate_plan: plan is infeasible");
    budget.L_total = L_total;
    budget.depth_n = plan.n;
    double eta_LD = budget.eta_LD();
    double P0 = sc.kind == Scenario::Kind::Cw ? gen_prob_cw(plan.x2, eta_LD, sc.kappa_Ttot)
                                              : gen_prob_pulsed(plan.P1, plan.purity, eta_LD);
    std::vector<double> probs{P0};
    probs.insert(probs.end(), plan.swap_probs.begin(), plan.swap_probs.end());
    probs.push_back(plan.p_ps);
    return rate(budget, probs, plan.fidelity);
}

DepthChoice best_depth(double L_total, const Scenario& sc, const std::vector<DepthPlan>& plans,
                       const LinkBudget& budget) {
    require(L_total >= 10.0, ErrorKind::Domain, "best_depth: L_total must be >= 10 km");
    DepthChoice best;
    for (const DepthPlan& p : plans) {
        if (!p.feasible) continue;
        RateResult r = evaluate_plan(sc, p, L_total, budget);
        if (!best.feasible || r.rate_hz > best.result.rate_hz) {
            best.feasible = true;
            best.n = p.n;
            best.result = r;
        }
    }
    return best;
}

double crossover(const Scenario& sc, const DepthPlan& a, const DepthPlan& b, const LinkBudget& budget, double lo,
                 double hi, double tol) {
    auto diff = [&](double L) {
        return std::log(evaluate_plan(sc, a, L, budget).rate_hz) - std::log(evaluate_plan(sc, b, L, budget).rate_hz);
    };
    double flo = diff(lo), fhi = diff(hi);
    if (!(flo * fhi < 0.0)) {
        std::ostringstream msg;
        msg << "crossover: rates of depths " << a.n << " and " << b.n << " do not cross in [" << lo << ", " << hi
            << "] km";
        fail(ErrorKind::Infeasible, msg.str());
    }
    while (hi - lo > tol) {
        double mid = 0.5 * (lo + hi);
        double fm = diff(mid);
        if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace qrep
