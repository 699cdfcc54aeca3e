#include "run_config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace qrep::cli {

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

int parse_int(const std::string& key, const std::string& v) {
    int out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size()) throw ConfigError(key + ": not an integer: '" + v + "'");
    return out;
}

std::string one_of(const std::string& key, const std::string& v, std::initializer_list<const char*> allowed) {
    for (const char* a : allowed)
        if (v == a) return v;
    std::string msg = key + ": '" + v + "' is not one of";
    for (const char* a : allowed) msg += std::string(" ") + a;
    throw ConfigError(msg);
}

nlohmann::json jnum(double v) {
    if (std::isnan(v)) return nullptr;
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

}  // namespace

double parse_number(const std::string& key, const std::string& value) {
    std::string v = trim(value);
    if (v == "inf" || v == "Inf" || v == "infinity") return std::numeric_limits<double>::infinity();
    char* end = nullptr;
    double d = std::strtod(v.c_str(), &end);
    if (v.empty() || end != v.c_str() + v.size() || std::isnan(d))
        throw ConfigError(key + ": not a number: '" + value + "'");
    return d;
}

const std::vector<std::string>& RunConfig::keys() {
    static const std::vector<std::string> k{
        "scenario",  "F_target",  "eta_d",        "eta_m", "L_att_km", "c_km_s", "a",     "kappa_Ttot",
        "attenuation", "order",   "n_max",        "sigma_min", "sigma_max", "sigma_points", "L_min", "L_max",
        "L_step",    "N_mm",      "N_mem",        "a_values", "n",         "kappa_sigma", "kappa_T", "out",
        "format"};
    return k;
}

void RunConfig::set(const std::string& key, const std::string& raw) {
    const std::string v = trim(raw);
    if (key == "scenario") scenario = one_of(key, v, {"pulsed", "cw"});
    else if (key == "F_target") F_target = parse_number(key, v);
    else if (key == "eta_d") eta_d = parse_number(key, v);
    else if (key == "eta_m") eta_m = parse_number(key, v);
    else if (key == "L_att_km") L_att_km = parse_number(key, v);
    else if (key == "c_km_s") c_km_s = parse_number(key, v);
    else if (key == "a") a = parse_number(key, v);
    else if (key == "kappa_Ttot") kappa_Ttot = parse_number(key, v);
    else if (key == "attenuation") attenuation = one_of(key, v, {"full", "half"});
    else if (key == "order") order = one_of(key, v, {"first", "full"});
    else if (key == "n_max") n_max = parse_int(key, v);
    else if (key == "sigma_min") sigma_min = parse_number(key, v);
    else if (key == "sigma_max") sigma_max = parse_number(key, v);
    else if (key == "sigma_points") sigma_points = parse_int(key, v);
    else if (key == "L_min") L_min = parse_number(key, v);
    else if (key == "L_max") L_max = parse_number(key, v);
    else if (key == "L_step") L_step = parse_number(key, v);
    else if (key == "N_mm") N_mm = parse_number(key, v);
    else if (key == "N_mem") N_mem = parse_number(key, v);
    else if (key == "a_values") {
        a_values.clear();
        std::stringstream ss(v);
        std::string item;
        while (std::getline(ss, item, ',')) a_values.push_back(parse_number(key, item));
        if (a_values.empty()) throw ConfigError("a_values: empty list");
    } else if (key == "n") n = parse_int(key, v);
    else if (key == "kappa_sigma") kappa_sigma = parse_number(key, v);
    else if (key == "kappa_T") kappa_T = parse_number(key, v);
    else if (key == "out") out = v;
    else if (key == "format") format = one_of(key, v, {"csv", "json"});
    else throw ConfigError("unknown config key '" + key + "'");
}

void RunConfig::validate() const {
    auto unit = [](const char* k, double v) {
        if (!(v >= 0.0 && v <= 1.0)) throw ConfigError(std::string(k) + " must lie in [0, 1]");
    };
    unit("eta_d", eta_d);
    unit("eta_m", eta_m);
    if (!(F_target > 0.0 && F_target < 1.0)) throw ConfigError("F_target must lie in (0, 1)");
    if (!(L_att_km > 0.0) || !(c_km_s > 0.0)) throw ConfigError("L_att_km and c_km_s must be positive");
    if (!(a > 0.0)) throw ConfigError("a must be positive (inf for the ideal pulse)");
    for (double v : a_values)
        if (!(v > 0.0)) throw ConfigError("a_values must be positive");
    if (!(kappa_Ttot > 0.0)) throw ConfigError("kappa_Ttot must be positive");
    if (n_max < 0 || n_max > 6) throw ConfigError("n_max must lie in [0, 6]");
    if (n < 0 || n > 6) throw ConfigError("n must lie in [0, 6]");
    if (!(sigma_min > 0.0 && sigma_max >= sigma_min) || sigma_points < 1)
        throw ConfigError("purity sweep needs 0 < sigma_min <= sigma_max and sigma_points >= 1");
    if (!(L_min >= 10.0 && L_max >= L_min && L_step > 0.0))
        throw ConfigError("rate curve needs 10 <= L_min <= L_max and L_step > 0");
    if (N_mm < 0.0 || N_mem < 0.0 || ((N_mm > 0.0) != (N_mem > 0.0)))
        throw ConfigError("N_mm and N_mem must both be positive or both 0");
}

nlohmann::json RunConfig::to_json() const {
    nlohmann::json av = nlohmann::json::array();
    for (double v : a_values) av.push_back(jnum(v));
    return {{"scenario", scenario},     {"F_target", F_target},   {"eta_d", eta_d},
            {"eta_m", eta_m},           {"L_att_km", L_att_km},   {"c_km_s", c_km_s},
            {"a", jnum(a)},             {"kappa_Ttot", kappa_Ttot}, {"attenuation", attenuation},
            {"order", order},           {"n_max", n_max},         {"sigma_min", sigma_min},
            {"sigma_max", sigma_max},   {"sigma_points", sigma_points}, {"L_min", L_min},
            {"L_max", L_max},           {"L_step", L_step},       {"N_mm", N_mm},
            {"N_mem", N_mem},           {"a_values", av},         {"n", n},
            {"kappa_sigma", jnum(kappa_sigma)}, {"kappa_T", jnum(kappa_T)}, {"format", format}};
}

LinkBudget RunConfig::budget() const {
    LinkBudget b;
    b.eta_d = eta_d;
    b.eta_m = eta_m;
    b.L_att = L_att_km;
    b.fiber_c = c_km_s;
    b.attenuation = attenuation == "half" ? Attenuation::HalfSpan : Attenuation::FullSpan;
    return b;
}

Scenario RunConfig::scenario_value() const {
    return scenario == "cw" ? Scenario::cw(kappa_Ttot) : Scenario::pulsed(a);
}

std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::vector<std::pair<std::string, std::string>> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key=value");
        out.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return out;
}

std::vector<std::pair<std::string, std::string>> env_overrides() {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& k : RunConfig::keys()) {
        std::string name = "QREP_" + k;
        std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::toupper(c); });
        if (const char* v = std::getenv(name.c_str())) out.emplace_back(k, v);
    }
    return out;
}

}  // namespace qrep::cli
