#include "mldoa/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mldoa/errors.hpp"

namespace mldoa {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& origin, const std::string& field, const std::string& msg) {
    throw ConfigError(origin + ": field '" + field + "': " + msg);
}

template <typename T>
T require(const json& j, const std::string& origin, const std::string& field) {
    if (!j.contains(field)) fail(origin, field, "missing");
    try {
        return j.at(field).get<T>();
    } catch (const json::exception& e) {
        fail(origin, field, e.what());
    }
}

template <typename T>
T optional_of(const json& j, const std::string& origin, const std::string& field, T fallback) {
    if (!j.contains(field)) return fallback;
    try {
        return j.at(field).get<T>();
    } catch (const json::exception& e) {
        fail(origin, field, e.what());
    }
}

}  // namespace

std::string method_name(Method m) { return m == Method::cml ? "cml" : "uml"; }

DoaPoint RunConfig::true_doas() const {
    return DoaPoint(Eigen::Map<const VectorXd>(doas_electrical.data(),
                                               static_cast<Eigen::Index>(doas_electrical.size())),
                    eps);
}

MatrixXcd RunConfig::source_covariance() const {
    const int k = source_count();
    MatrixXcd p = MatrixXcd::Zero(k, k);
    for (int i = 0; i < k; ++i) p(i, i) = source_powers[static_cast<std::size_t>(i)];
    if (corr_i >= 0 && corr_j >= 0) {
        const double cross = corr_rho * std::sqrt(source_powers[static_cast<std::size_t>(corr_i)] *
                                                  source_powers[static_cast<std::size_t>(corr_j)]);
        p(corr_i, corr_j) = cross;
        p(corr_j, corr_i) = cross;
    }
    return p;
}

Scenario RunConfig::make_scenario(double snr_db_value) const {
    const double sigma2 = std::pow(10.0, -snr_db_value / 10.0);
    return Scenario(Manifold(elements, spacing_wavelengths), true_doas(), source_covariance(),
                    sigma2, snapshots);
}

RunConfig parse_run_config(const std::string& json_text, const std::string& origin) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(origin + ": JSON parse error at byte " + std::to_string(e.byte) + ": " +
                          e.what());
    }

    RunConfig cfg;
    if (!root.contains("scenario")) fail(origin, "scenario", "missing");
    const json& sc = root.at("scenario");

    cfg.elements = require<int>(sc, origin, "elements");
    cfg.spacing_wavelengths = optional_of<double>(sc, origin, "spacing_wavelengths", 0.25);
    const auto doas = require<std::vector<double>>(sc, origin, "doas");
    if (doas.empty()) fail(origin, "scenario.doas", "must be nonempty");
    const std::string units = optional_of<std::string>(sc, origin, "units", "degrees");
    if (units != "degrees" && units != "electrical")
        fail(origin, "scenario.units", "must be 'degrees' or 'electrical'");
    for (double v : doas)
        cfg.doas_electrical.push_back(units == "degrees" ? electrical_from_physical_deg(v) : v);
    std::sort(cfg.doas_electrical.begin(), cfg.doas_electrical.end());
    cfg.snapshots = require<int>(sc, origin, "snapshots");
    cfg.source_powers = optional_of<std::vector<double>>(sc, origin, "source_powers",
                                                         std::vector<double>(doas.size(), 1.0));
    if (cfg.source_powers.size() != doas.size())
        fail(origin, "scenario.source_powers", "length must match doas");
    for (double p : cfg.source_powers)
        if (!(p > 0.0)) fail(origin, "scenario.source_powers", "powers must be positive");
    if (sc.contains("correlation")) {
        const json& corr = sc.at("correlation");
        const auto pair = require<std::vector<int>>(corr, origin, "correlation.pair");
        if (pair.size() != 2 || pair[0] < 0 || pair[1] < 0 ||
            pair[0] >= static_cast<int>(doas.size()) || pair[1] >= static_cast<int>(doas.size()) ||
            pair[0] == pair[1])
            fail(origin, "scenario.correlation.pair", "must name two distinct source indices");
        cfg.corr_i = pair[0];
        cfg.corr_j = pair[1];
        cfg.corr_rho = require<double>(corr, origin, "correlation.rho");
        if (!(cfg.corr_rho > -1.0 && cfg.corr_rho < 1.0))
            fail(origin, "scenario.correlation.rho", "must lie in (-1, 1)");
    }

    const auto method_names = optional_of<std::vector<std::string>>(
        root, origin, "methods", std::vector<std::string>{"cml", "uml"});
    for (const auto& name : method_names) {
        if (name == "cml") cfg.methods.push_back(Method::cml);
        else if (name == "uml") cfg.methods.push_back(Method::uml);
        else fail(origin, "methods", "unknown method '" + name + "'");
    }
    if (cfg.methods.empty()) fail(origin, "methods", "must be nonempty");
    cfg.snr_db = require<std::vector<double>>(root, origin, "snr_db");
    if (cfg.snr_db.empty()) fail(origin, "snr_db", "must be nonempty");
    if (!std::is_sorted(cfg.snr_db.begin(), cfg.snr_db.end()))
        fail(origin, "snr_db", "must be ascending");
    cfg.trials = optional_of<int>(root, origin, "trials", 0);
    if (cfg.trials < 0) fail(origin, "trials", "must be >= 0");
    cfg.seed = optional_of<std::uint64_t>(root, origin, "seed", 1);
    cfg.qmc_budget = optional_of<std::int64_t>(root, origin, "qmc_budget", 131072);
    if (cfg.qmc_budget < 1000) fail(origin, "qmc_budget", "must be >= 1000");
    cfg.threads = optional_of<int>(root, origin, "threads", 0);
    if (cfg.threads < 0) fail(origin, "threads", "must be >= 0");
    cfg.out_dir = optional_of<std::string>(root, origin, "out_dir", "out");
    if (root.contains("mse_small_override"))
        cfg.mse_small_override = require<double>(root, origin, "mse_small_override");
    cfg.validate_tolerance_scale = optional_of<double>(root, origin, "validate_tolerance_scale", 1.0);

    if (root.contains("search")) {
        const json& se = root.at("search");
        cfg.search.n_starts = optional_of<int>(se, origin, "search.starts", 0);
        cfg.search.max_iter = optional_of<int>(se, origin, "search.max_iter", 500);
        cfg.search.cluster_threshold =
            optional_of<double>(se, origin, "search.cluster_threshold", 0.6);
        cfg.eps = optional_of<double>(se, origin, "search.eps", kDefaultEps);
        cfg.mse_extra_starts = optional_of<int>(se, origin, "search.mse_extra_starts", 8);
    }

    if (cfg.elements < 2) fail(origin, "scenario.elements", "need at least 2");
    if (cfg.source_count() >= cfg.elements)
        fail(origin, "scenario.doas", "need fewer sources than elements");
    if (cfg.snapshots < 1) fail(origin, "scenario.snapshots", "must be >= 1");
    if (cfg.snapshots == cfg.source_count())
        fail(origin, "scenario.snapshots",
             "N equal to the source count K is an unsupported boundary regime");
    try {
        (void)cfg.true_doas();
    } catch (const std::exception& e) {
        fail(origin, "scenario.doas", e.what());
    }
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config file '" + path + "' cannot be opened");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_run_config(buf.str(), path);
}

}  // namespace mldoa
