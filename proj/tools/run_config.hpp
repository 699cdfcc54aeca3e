#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "qrep/optimizer.hpp"

namespace qrep::cli {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::string scenario = "pulsed";  // pulsed | cw
    double F_target = 0.90;
    double eta_d = 0.9;
    double eta_m = 0.8;
    double L_att_km = 22.0;
    double c_km_s = 2.0e5;
    double a = std::numeric_limits<double>::infinity();
    double kappa_Ttot = 100.0;
    std::string attenuation = "full";  // full | half
    std::string order = "first";       // first | full (solve only)
    int n_max = 4;
    // purity-sweep: log-spaced kappa sigma
    double sigma_min = 1e-3;
    double sigma_max = 3.0;
    int sigma_points = 40;
    // rate-curve
    double L_min = 100.0;
    double L_max = 2000.0;
    double L_step = 10.0;
    double N_mm = 0.0;   // 0 disables the multiplexed column
    double N_mem = 0.0;
    // table1
    std::vector<double> a_values{0.01, 0.1, 1.0, std::numeric_limits<double>::infinity()};
    // solve
    int n = 0;
    double kappa_sigma = std::numeric_limits<double>::quiet_NaN();  // unset: optimized (or pure for a = inf)
    double kappa_T = std::numeric_limits<double>::quiet_NaN();      // unset: optimal window
    std::string out = "-";
    std::string format = "csv";  // csv | json

    // Applies one key=value; throws ConfigError on unknown keys and bad values.
    void set(const std::string& key, const std::string& value);
    void validate() const;
    nlohmann::json to_json() const;

    LinkBudget budget() const;
    Scenario scenario_value() const;

    static const std::vector<std::string>& keys();
};

// "key=value" lines; '#' starts a comment; blank lines ignored.
std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path);

// QREP_<KEY> variables for every known key (key upper-cased).
std::vector<std::pair<std::string, std::string>> env_overrides();

double parse_number(const std::string& key, const std::string& value);

}  // namespace qrep::cli
