// qrep: tables and figure data for the SPDC-source repeater model.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>
#include <variant>

#include "CLI11.hpp"
#include "json.hpp"
#include "qrep/cw_chain.hpp"
#include "qrep/optimizer.hpp"
#include "qrep/serialize.hpp"
#include "run_config.hpp"

using nlohmann::json;
namespace cli = qrep::cli;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitNumerical = 4;

using Cell = std::variant<std::monostate, double, int, bool, std::string>;

struct Column {
    std::string name;
    std::string type;  // number | integer | boolean | string
    std::string doc;
};

struct Output {
    std::string command;
    std::vector<Column> columns;
    std::vector<std::vector<Cell>> rows;
    json summary = json::object();
};

std::string fmt_number(double v) {
    if (std::isnan(v)) return "";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::string csv_cell(const Cell& c) {
    struct V {
        std::string operator()(std::monostate) const { return ""; }
        std::string operator()(double d) const { return fmt_number(d); }
        std::string operator()(int i) const { return std::to_string(i); }
        std::string operator()(bool b) const { return b ? "true" : "false"; }
        std::string operator()(const std::string& s) const {
            if (s.find_first_of(",\"\n") == std::string::npos) return s;
            std::string q = "\"";
            for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
            return q + "\"";
        }
    };
    return std::visit(V{}, c);
}

json json_cell(const Cell& c) {
    struct V {
        json operator()(std::monostate) const { return nullptr; }
        json operator()(double d) const {
            if (std::isnan(d)) return nullptr;
            if (std::isinf(d)) return d > 0 ? "inf" : "-inf";
            return d;
        }
        json operator()(int i) const { return i; }
        json operator()(bool b) const { return b; }
        json operator()(const std::string& s) const { return s; }
    };
    return std::visit(V{}, c);
}

json header_json(const Output& o, const cli::RunConfig& cfg) {
    return {{"tool", "qrep"}, {"version", QREP_VERSION}, {"command", o.command}, {"config", cfg.to_json()}};
}

void write_output(const Output& o, const cli::RunConfig& cfg) {
    std::ostringstream s;
    if (cfg.format == "json") {
        json j = header_json(o, cfg);
        json cols = json::array();
        for (const auto& c : o.columns) cols.push_back(c.name);
        j["columns"] = cols;
        json rows = json::array();
        for (const auto& r : o.rows) {
            json row = json::object();
            for (std::size_t i = 0; i < r.size(); ++i) row[o.columns[i].name] = json_cell(r[i]);
            rows.push_back(row);
        }
        j["rows"] = rows;
        j["summary"] = o.summary;
        s << j.dump(2) << "\n";
    } else {
        json h = header_json(o, cfg);
        s << "# tool: qrep " << QREP_VERSION << "\n";
        s << "# command: " << o.command << "\n";
        s << "# config: " << h["config"].dump() << "\n";
        if (!o.summary.empty()) s << "# summary: " << o.summary.dump() << "\n";
        for (std::size_t i = 0; i < o.columns.size(); ++i) s << (i ? "," : "") << o.columns[i].name;
        s << "\n";
        for (const auto& r : o.rows) {
            for (std::size_t i = 0; i < r.size(); ++i) s << (i ? "," : "") << csv_cell(r[i]);
            s << "\n";
        }
    }
    if (cfg.out == "-") {
        std::cout << s.str();
    } else {
        std::ofstream f(cfg.out, std::ios::binary);
        if (!f) throw cli::ConfigError("cannot write '" + cfg.out + "'");
        f << s.str();
    }
}

// Runs fn(i) for i in [0, count) on `jobs` threads; results land by index.
template <class Fn>
void parallel_for(int count, int jobs, Fn&& fn) {
    jobs = std::max(1, std::min(jobs, count));
    if (jobs == 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::exception_ptr> err(count);
    std::vector<std::thread> pool;
    for (int w = 0; w < jobs; ++w)
        pool.emplace_back([&, w] {
            for (int i = w; i < count; i += jobs) {
                try {
                    fn(i);
                } catch (...) {
                    err[i] = std::current_exception();
                }
            }
        });
    for (auto& t : pool) t.join();
    for (auto& e : err)
        if (e) std::rethrow_exception(e);
}

// Column descriptions shared by the CSV schema and the JSON schema.
std::vector<Column> purity_columns(int n_max) {
    std::vector<Column> c{{"kappa_sigma", "number", "pulse width kappa*sigma"},
                          {"purity", "number", "single-photon purity sum w_l^2"}};
    for (int n = 0; n <= n_max; ++n)
        c.push_back({"F_exact_n" + std::to_string(n), "number", "F(P1->0) = (1 + sum w^(2^(n+1)))/2"});
    for (int n = 0; n <= n_max; ++n)
        c.push_back({"F_approx_n" + std::to_string(n), "number", "F(P1->0) ~ (1 + purity^(2^n))/2"});
    return c;
}

std::vector<Column> table1_columns() {
    return {{"a", "number", "peak intensity cap I_max/I_thres (inf: ideal pulse)"},
            {"n", "integer", "swap depth"},
            {"feasible", "boolean", "target fidelity reachable"},
            {"kappa_sigma", "number", "optimal pulse width, 3 decimals (empty for a = inf)"},
            {"P1", "number", "pair probability at the target"},
            {"L_from_km", "number", "start of the distance range where depth n is best"},
            {"L_to_km", "number", "end of that range (inf for the last depth)"},
            {"note", "string", "reason for infeasibility or warnings"}};
}

std::vector<Column> table2_columns() {
    return {{"n", "integer", "swap depth"},
            {"feasible", "boolean", "target fidelity reachable"},
            {"kappa_T", "number", "optimal acceptance window kappa*T"},
            {"x2", "number", "driving strength x^2 at the target"},
            {"L_from_km", "number", "start of the distance range where depth n is best"},
            {"L_to_km", "number", "end of that range (inf for the last depth)"},
            {"note", "string", "warnings"}};
}

std::vector<Column> rate_columns(int n_max, bool multiplexed) {
    std::vector<Column> c{{"L_km", "number", "total distance"}};
    for (int n = 0; n <= n_max; ++n)
        c.push_back({"rate_n" + std::to_string(n), "number", "rate per memory in Hz at depth n (empty if infeasible)"});
    c.push_back({"envelope_rate", "number", "best rate over depths"});
    c.push_back({"envelope_n", "integer", "depth attaining the envelope"});
    if (multiplexed) c.push_back({"t_total_s", "number", "1/(N_mm N_mem envelope_rate)"});
    return c;
}

std::vector<Column> solve_columns() {
    return {{"scenario", "string", "pulsed or cw"},
            {"n", "integer", "swap depth"},
            {"param", "string", "solved parameter (P1 or x2)"},
            {"value", "number", "parameter value at the target"},
            {"achieved_F", "number", "fidelity at the solved parameter"},
            {"target_F", "number", "target fidelity"},
            {"kappa_sigma", "number", "pulse width used (pulsed)"},
            {"purity", "number", "single-photon purity (pulsed)"},
            {"kappa_T", "number", "acceptance window used (cw)"},
            {"iterations", "integer", "bisection iterations"}};
}

json schema_for(const std::string& command, const std::vector<Column>& cols) {
    json csv = json::array();
    json props = json::object();
    for (const auto& c : cols) {
        csv.push_back({{"name", c.name}, {"type", c.type}, {"doc", c.doc}});
        json t = c.type == "string" ? json{{"type", "string"}}
                 : c.type == "boolean" ? json{{"type", "boolean"}}
                 : c.type == "integer" ? json{{"type", json::array({"integer", "null"})}}
                                       : json{{"type", json::array({"number", "string", "null"})}};
        props[c.name] = t;
    }
    json row_schema = {{"type", "object"}, {"properties", props}};
    json schema = {{"$schema", "https://json-schema.org/draft/2020-12/schema"},
                   {"title", "qrep " + command},
                   {"type", "object"},
                   {"required", json::array({"tool", "version", "command", "config", "columns", "rows"})},
                   {"properties",
                    {{"tool", {{"const", "qrep"}}},
                     {"version", {{"type", "string"}}},
                     {"command", {{"const", command}}},
                     {"config", {{"type", "object"}}},
                     {"columns", {{"type", "array"}, {"items", {{"type", "string"}}}}},
                     {"rows", {{"type", "array"}, {"items", row_schema}}},
                     {"summary", {{"type", "object"}}}}}};
    return {{"command", command},
            {"csv", {{"header", "lines starting with '#' carry tool, command, config and summary"},
                     {"columns", csv}}},
            {"json_schema", schema}};
}

Output cmd_purity_sweep(const cli::RunConfig& cfg, int jobs) {
    Output o{"purity-sweep", purity_columns(cfg.n_max), {}, json::object()};
    const int m = cfg.sigma_points;
    std::vector<double> sig(m);
    for (int i = 0; i < m; ++i)
        sig[i] = m == 1 ? cfg.sigma_min
                        : cfg.sigma_min * std::pow(cfg.sigma_max / cfg.sigma_min, double(i) / (m - 1));
    o.rows.resize(m);
    parallel_for(m, jobs, [&](int i) {
        qrep::ModeDecomposition md = qrep::mode_decomposition(sig[i]);
        std::vector<Cell> row{sig[i], md.purity};
        for (int n = 0; n <= cfg.n_max; ++n) row.push_back(qrep::baseline_fidelity(md, n, qrep::BaselineMode::Exact));
        for (int n = 0; n <= cfg.n_max; ++n)
            row.push_back(qrep::baseline_fidelity(md, n, qrep::BaselineMode::Approximate));
        o.rows[i] = std::move(row);
    });
    double gap = 0.0;
    bool ordered = true;
    for (const auto& r : o.rows) {
        for (int n = 0; n <= cfg.n_max; ++n) {
            double ex = std::get<double>(r[2 + n]), ap = std::get<double>(r[3 + cfg.n_max + n]);
            gap = std::max(gap, std::abs(ex - ap));
            if (n > 0 && !(ex <= std::get<double>(r[1 + n]))) ordered = false;
        }
    }
    o.summary = {{"max_abs_exact_minus_approx", gap}, {"descending_in_n", ordered}};
    return o;
}

Output cmd_table1(const cli::RunConfig& cfg, int jobs, bool& any_feasible) {
    Output o{"table1", table1_columns(), {}, json::object()};
    const qrep::LinkBudget b = cfg.budget();
    for (double a : cfg.a_values) {
        auto rows = qrep::build_table(qrep::Scenario::pulsed(a), cfg.F_target, b, cfg.n_max, 100.0, jobs);
        for (const auto& r : rows) {
            any_feasible |= r.feasible;
            o.rows.push_back({a, r.n, r.feasible, r.kappa_sigma, r.P1, r.L_from, r.L_to, r.note});
        }
    }
    return o;
}

Output cmd_table2(const cli::RunConfig& cfg, int jobs, bool& any_feasible) {
    Output o{"table2", table2_columns(), {}, json::object()};
    auto rows = qrep::build_table(qrep::Scenario::cw(cfg.kappa_Ttot), cfg.F_target, cfg.budget(), cfg.n_max, 100.0,
                                  jobs);
    for (const auto& r : rows) {
        any_feasible |= r.feasible;
        o.rows.push_back({r.n, r.feasible, r.kappa_T, r.x2, r.L_from, r.L_to, r.note});
    }
    return o;
}

Output cmd_rate_curve(const cli::RunConfig& cfg, int jobs, bool& any_feasible) {
    const bool mux = cfg.N_mm > 0.0;
    Output o{"rate-curve", rate_columns(cfg.n_max, mux), {}, json::object()};
    const qrep::Scenario sc = cfg.scenario_value();
    const qrep::LinkBudget b = cfg.budget();
    auto plans = qrep::plan_depths(sc, cfg.n_max, cfg.F_target, b, jobs);
    json switches = json::array();
    int prev = -1;
    const int steps = static_cast<int>(std::floor((cfg.L_max - cfg.L_min) / cfg.L_step + 1e-9));
    for (int i = 0; i <= steps; ++i) {
        double L = cfg.L_min + i * cfg.L_step;
        std::vector<Cell> row{L};
        for (const auto& p : plans) {
            if (p.feasible)
                row.push_back(qrep::evaluate_plan(sc, p, L, b).rate_hz);
            else
                row.push_back(std::monostate{});
        }
        qrep::DepthChoice best = qrep::best_depth(L, sc, plans, b);
        if (best.feasible) {
            any_feasible = true;
            row.push_back(best.result.rate_hz);
            row.push_back(best.n);
            if (mux) row.push_back(qrep::multiplexed_time(best.result.rate_hz, cfg.N_mm, cfg.N_mem));
            if (prev >= 0 && best.n != prev) switches.push_back({{"L_km", L}, {"from_n", prev}, {"to_n", best.n}});
            prev = best.n;
        } else {
            row.push_back(std::monostate{});
            row.push_back(std::monostate{});
            if (mux) row.push_back(std::monostate{});
        }
        o.rows.push_back(std::move(row));
    }
    json plan_json = json::array();
    for (const auto& p : plans) plan_json.push_back(p);
    o.summary = {{"scenario", sc.name()}, {"envelope_switches", switches}, {"plans", plan_json}};
    return o;
}

Output cmd_solve(const cli::RunConfig& cfg) {
    Output o{"solve", solve_columns(), {}, json::object()};
    const double e = cfg.budget().eta2();
    const qrep::FidelityOrder order = cfg.order == "full" ? qrep::FidelityOrder::Full : qrep::FidelityOrder::FirstOrder;
    if (cfg.scenario == "cw") {
        double T = cfg.kappa_T;
        if (std::isnan(T)) T = qrep::optimal_window(cfg.n, cfg.F_target, e, cfg.kappa_Ttot).kappa_T;
        qrep::TargetSolve s = qrep::solve_target_x(cfg.F_target, cfg.n, T, e, order);
        o.rows.push_back({std::string("cw"), cfg.n, s.param, s.value, s.achieved_F, s.target_F, std::monostate{},
                          std::monostate{}, T, s.iterations});
        o.summary = {{"solve", s}};
        return o;
    }
    double sigma = cfg.kappa_sigma;
    std::shared_ptr<const qrep::ModeDecomposition> modes;
    if (std::isnan(sigma)) {
        if (std::isinf(cfg.a)) {
            modes = std::make_shared<const qrep::ModeDecomposition>(qrep::ModeDecomposition::from_weights({1.0}));
        } else {
            sigma = qrep::optimal_sigma(cfg.a, cfg.n, cfg.F_target, e).kappa_sigma;
            modes = qrep::cached_modes(sigma);
        }
    } else {
        modes = qrep::cached_modes(sigma);
    }
    qrep::TargetSolve s = qrep::solve_target_p1(cfg.F_target, cfg.n, *modes, e, order);
    Cell sig = std::isnan(sigma) ? Cell{} : Cell{sigma};
    o.rows.push_back(
        {std::string("pulsed"), cfg.n, s.param, s.value, s.achieved_F, s.target_F, sig, modes->purity, std::monostate{},
         s.iterations});
    o.summary = {{"solve", s}};
    return o;
}

int exit_code_for(qrep::ErrorKind k) {
    switch (k) {
        case qrep::ErrorKind::Infeasible: return kExitInfeasible;
        case qrep::ErrorKind::Numerical:
        case qrep::ErrorKind::GridTooCoarse:
        case qrep::ErrorKind::UndefinedFidelity:
        case qrep::ErrorKind::DimensionOverflow: return kExitNumerical;
        default: return kExitConfig;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"qrep: repeater rate tables and figure data"};
    app.set_version_flag("--version", std::string("qrep ") + QREP_VERSION);
    app.require_subcommand(1);

    std::string config_file;
    int jobs = 1;
    bool schema = false;
    std::vector<std::string> assignments;
    std::map<std::string, std::string> flag_values;

    const std::vector<std::pair<std::string, std::string>> commands{
        {"purity-sweep", "multimode-limited fidelity versus pulse width"},
        {"table1", "optimal pulse widths and depth ranges (pulsed source)"},
        {"table2", "optimal acceptance windows and depth ranges (cw source)"},
        {"rate-curve", "per-depth and envelope rates versus distance"},
        {"solve", "single target-fidelity solve"}};
    std::vector<CLI::App*> subs;
    for (const auto& [name, desc] : commands) {
        CLI::App* s = app.add_subcommand(name, desc);
        s->add_option("--config", config_file, "key=value config file");
        s->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
        s->add_flag("--schema", schema, "print the output schema and exit");
        for (const auto& k : cli::RunConfig::keys())
            s->add_option("--" + k, flag_values[name + "/" + k], "config key " + k);
        s->add_option("assignments", assignments, "key=value overrides");
        subs.push_back(s);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    std::string command;
    for (auto* s : subs)
        if (s->parsed()) command = s->get_name();

    cli::RunConfig cfg;
    try {
        // defaults < config file < environment < flags and key=value
        if (!config_file.empty())
            for (const auto& [k, v] : cli::read_config_file(config_file)) cfg.set(k, v);
        for (const auto& [k, v] : cli::env_overrides()) cfg.set(k, v);
        for (auto* s : subs) {
            if (!s->parsed()) continue;
            for (const auto& k : cli::RunConfig::keys())
                if (s->get_option("--" + k)->count() > 0) cfg.set(k, flag_values[command + "/" + k]);
        }
        for (const auto& a : assignments) {
            auto eq = a.find('=');
            if (eq == std::string::npos) throw cli::ConfigError("expected key=value, got '" + a + "'");
            cfg.set(a.substr(0, eq), a.substr(eq + 1));
        }
        if (command == "table1") cfg.scenario = "pulsed";
        if (command == "table2") cfg.scenario = "cw";
        cfg.validate();
    } catch (const cli::ConfigError& e) {
        std::cerr << "qrep: config error: " << e.what() << "\n";
        return kExitConfig;
    }

    if (schema) {
        std::vector<Column> cols = command == "purity-sweep" ? purity_columns(cfg.n_max)
                                   : command == "table1"     ? table1_columns()
                                   : command == "table2"     ? table2_columns()
                                   : command == "rate-curve" ? rate_columns(cfg.n_max, cfg.N_mm > 0.0)
                                                             : solve_columns();
        std::cout << schema_for(command, cols).dump(2) << "\n";
        return kExitOk;
    }

    try {
        bool any_feasible = false;
        Output o;
        if (command == "purity-sweep") {
            o = cmd_purity_sweep(cfg, jobs);
            any_feasible = true;
        } else if (command == "table1") {
            o = cmd_table1(cfg, jobs, any_feasible);
        } else if (command == "table2") {
            o = cmd_table2(cfg, jobs, any_feasible);
        } else if (command == "rate-curve") {
            o = cmd_rate_curve(cfg, jobs, any_feasible);
        } else {
            o = cmd_solve(cfg);
            any_feasible = true;
        }
        write_output(o, cfg);
        if (!any_feasible) {
            std::cerr << "qrep: target fidelity infeasible for every depth\n";
            return kExitInfeasible;
        }
        return kExitOk;
    } catch (const qrep::Error& e) {
        std::cerr << "qrep: " << e.what() << "\n";
        return exit_code_for(e.kind());
    } catch (const cli::ConfigError& e) {
        std::cerr << "qrep: config error: " << e.what() << "\n";
        return kExitConfig;
    }
}
