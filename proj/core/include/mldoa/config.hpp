#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mldoa/array_model.hpp"
#include "mldoa/ml_costs.hpp"
#include "mldoa/resolution.hpp"

namespace mldoa {

/// One self-contained run description, ingested from a JSON file (schema in
/// the repository README). DoAs may be given in physical degrees or
/// electrical radians; conversion happens once, here.
struct RunConfig {
    // scenario
    int elements = 0;
    double spacing_wavelengths = 0.25;
    std::vector<double> doas_electrical;  // converted, ascending
    std::vector<double> source_powers;    // per-source linear power
    int corr_i = -1, corr_j = -1;         // optional correlated pair
    double corr_rho = 0.0;
    int snapshots = 0;

    // run
    std::vector<Method> methods;
    std::vector<double> snr_db;
    int trials = 0;
    std::uint64_t seed = 1;
    std::int64_t qmc_budget = 131072;
    double eps = kDefaultEps;  // feasible-set gap, electrical radians
    SearchOptions search;
    int mse_extra_starts = 8;
    std::optional<double> mse_small_override;
    int threads = 0;  // 0: hardware concurrency
    std::string out_dir = "out";

    // validate-command knob: scales every validation tolerance (fixture hook)
    double validate_tolerance_scale = 1.0;

    int source_count() const { return static_cast<int>(doas_electrical.size()); }
    DoaPoint true_doas() const;
    MatrixXcd source_covariance() const;
    /// sigma^2 chosen so a unit-power source sits at the requested SNR.
    Scenario make_scenario(double snr_db_value) const;
};

RunConfig parse_run_config(const std::string& json_text, const std::string& origin);
RunConfig load_run_config(const std::string& path);

std::string method_name(Method m);

}  // namespace mldoa
