#pragma once

// JSON views of the result types. Non-finite numbers become null (JSON has no inf/nan).

#include <cmath>

#include "json.hpp"
#include "qrep/cw_chain.hpp"
#include "qrep/optimizer.hpp"

namespace qrep {

inline nlohmann::json num(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

inline void to_json(nlohmann::json& j, const ModeDecomposition& m) {
    j = {{"weights", m.weights}, {"purity", m.purity}};
}

inline void to_json(nlohmann::json& j, const Diagonal<double>& d) {
    j = {{"c00", d.c00}, {"c10", d.c10}, {"c11", d.c11}, {"c20", d.c20}};
}

inline void to_json(nlohmann::json& j, const PulsedCoefficients<double>& k) {
    j = {{"depth_n", k.depth_n}, {"diag", k.diag}, {"A0", k.A0}, {"A1", k.A1}, {"B0", k.B0},
         {"normalized", k.normalized}};
}

inline void to_json(nlohmann::json& j, const CwCoefficients<double>& k) {
    j = {{"depth_n", k.depth_n}, {"kappa_T", k.kappa_T}, {"x2", k.strength_x2}, {"diag", k.diag},
         {"A0", k.A0}, {"A1", k.A1}, {"A2", k.A2}, {"B0", k.B0}, {"normalized", k.normalized}};
}

inline void to_json(nlohmann::json& j, const ModeFunctionTable& t) {
    j = {{"kappa_T", t.kappa_T}, {"overlap", t.overlap}, {"cosine", t.cosine}, {"self_trace", t.self_trace},
         {"B0_derived", t.B0_derived}};
    if (t.has_printed_diagnostics) {
        j["printed"] = {{"rho10_0", t.rho10_0_printed},
                        {"rho10_2", t.rho10_2_printed},
                        {"rho11", t.rho11_printed},
                        {"rho20", t.rho20_printed},
                        {"rhoA1", t.rhoA1_printed},
                        {"rhoA2", t.rhoA2_printed},
                        {"rhoB0", t.rhoB0_printed},
                        {"rhoA2_shape_deviation", t.rhoA2_shape_deviation},
                        {"B0_bracket", t.B0_printed_bracket},
                        {"rhoB0_denominator", t.rhoB0_printed_denominator}};
    }
}

inline void to_json(nlohmann::json& j, const TargetSolve& s) {
    j = {{"target_F", s.target_F}, {"param", s.param},           {"value", s.value},
         {"lo", s.lo},             {"hi", s.hi},                 {"achieved_F", s.achieved_F},
         {"iterations", s.iterations}};
}

inline void to_json(nlohmann::json& j, const RateResult& r) {
    j = {{"depth_n", r.depth_n}, {"L_total_km", r.L_total}, {"probs", r.probs},
         {"fidelity", r.fidelity}, {"rate_hz", r.rate_hz}, {"t_total_s", num(r.t_total_s)}};
}

inline void to_json(nlohmann::json& j, const DepthPlan& p) {
    j = {{"n", p.n},
         {"feasible", p.feasible},
         {"reason", p.reason},
         {"kappa_sigma", num(p.kappa_sigma)},
         {"P1", p.P1},
         {"purity", p.purity},
         {"kappa_T", num(p.kappa_T)},
         {"x2", p.x2},
         {"swap_probs", p.swap_probs},
         {"p_ps", p.p_ps},
         {"fidelity", p.fidelity}};
}

inline void to_json(nlohmann::json& j, const TableRow& r) {
    j = {{"n", r.n},
         {"feasible", r.feasible},
         {"note", r.note},
         {"kappa_sigma", num(r.kappa_sigma)},
         {"P1", num(r.P1)},
         {"kappa_T", num(r.kappa_T)},
         {"x2", num(r.x2)},
         {"L_from_km", num(r.L_from)},
         {"L_to_km", num(r.L_to)}};
}

}  // namespace qrep
