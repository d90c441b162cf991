// hmimo: DFT-based channel estimation for holographic MIMO uniform linear arrays
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "hmimo/channel.hpp"
#include "hmimo/estimators.hpp"

namespace hmimo {

class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

enum class Experiment { fig1, fig2, fig3, fig4, bench };

inline const char* to_string(Experiment e) {
    switch (e) {
        case Experiment::fig1: return "fig1";
        case Experiment::fig2: return "fig2";
        case Experiment::fig3: return "fig3";
        case Experiment::fig4: return "fig4";
        case Experiment::bench: return "bench";
    }
    return "?";
}

inline Experiment experiment_from_string(const std::string& s) {
    if (s == "fig1") return Experiment::fig1;
    if (s == "fig2") return Experiment::fig2;
    if (s == "fig3") return Experiment::fig3;
    if (s == "fig4") return Experiment::fig4;
    if (s == "bench") return Experiment::bench;
    throw ConfigError("unknown experiment '" + s + "' (expected fig1|fig2|fig3|fig4|bench)");
}

inline EstimatorKind estimator_kind_from_string(const std::string& s) {
    if (s == "MMSE") return EstimatorKind::mmse;
    if (s == "LS") return EstimatorKind::ls;
    if (s == "LoS") return EstimatorKind::los;
    if (s == "ISO") return EstimatorKind::iso;
    if (s == "DFT") return EstimatorKind::dft;
    throw ConfigError("unknown scheme '" + s + "' (expected MMSE|LS|LoS|ISO|DFT)");
}

struct PathLossConfig {
    double ref_distance_m = 1000.0;
    double exponent = 3.76;
    double ref_gain_db = -148.1;

    PathLossModel model() const { return {ref_distance_m, exponent, ref_gain_db}; }
};

struct SectorJsonConfig {
    double min_distance_m = 5.0;
    double max_distance_m = 100.0;
    double azimuth_min_deg = -60.0;
    double azimuth_max_deg = 60.0;
    std::string distance_distribution = "uniform_distance";  // or "uniform_area"

    SectorConfig sector() const {
        SectorConfig s;
        s.min_distance = min_distance_m;
        s.max_distance = max_distance_m;
        s.azimuth_min = deg_to_rad(azimuth_min_deg);
        s.azimuth_max = deg_to_rad(azimuth_max_deg);
        s.uniform_in_area = distance_distribution == "uniform_area";
        return s;
    }
};

struct PhysicalConfig {
    double wavelength_m = 0.1;               // 3 GHz carrier
    double spacing_over_wavelength = 0.25;   // d / lambda
    double array_elevation_m = 10.0;
    int pilot_length = 10;
    double tx_power_dbm = 20.0;
    double noise_power_dbm = -87.0;          // 100 MHz bandwidth
    double bandwidth_hz = 1e8;
    double sigma_theta_deg = 10.0;
    PathLossConfig pathloss;
    SectorJsonConfig sector;

    double spacing_m() const { return spacing_over_wavelength * wavelength_m; }
    UlaGeometry geometry(int n_antennas) const {
        return UlaGeometry(n_antennas, spacing_m(), wavelength_m, array_elevation_m);
    }
    ScenarioParams params() const {
        return ScenarioParams(pilot_length, std::pow(10.0, (tx_power_dbm - 30.0) / 10.0),
                              std::pow(10.0, (noise_power_dbm - 30.0) / 10.0), bandwidth_hz);
    }
    int antennas_for_aperture(double l_over_lambda) const {
        const double n = l_over_lambda / spacing_over_wavelength;
        return static_cast<int>(std::lround(n));
    }
};

struct EstimatorTuning {
    double rank_tol = 1e-6;
    double clamp_tol = 1e-10;
    bool iso_beta_scale = false;
    double shrinkage_eta = 0.5;
};

struct Fig1Config {
    std::vector<double> l_over_lambda = {2, 4, 8, 16, 32};
    std::vector<std::string> schemes = {"MMSE", "LS", "DFT"};
    int n_drops = 200;
};

struct Fig2Config {
    std::vector<double> sigma_theta_deg = {1, 2, 5, 10, 15, 20, 30};
    int n_antennas = 64;
    std::vector<std::string> schemes = {"MMSE", "LS", "LoS", "ISO", "DFT"};
    int n_drops = 200;
};

struct Fig3Config {
    std::vector<int> m_values = {20, 50, 100};
    int n_antennas = 64;
    int n_elevation_bins = 6;
    int n_stat_batches = 2000;
    std::vector<std::string> schemes = {"MMSE", "DFT"};
    double whisker_k = 1.5;
};

struct Fig4Config {
    std::vector<double> l_over_lambda = {2, 4, 8, 16, 32};
    std::vector<int> m_values = {20, 50, 100};
    int n_drops = 200;
};

struct BenchConfig {
    std::vector<int> n_values = {256, 512, 1024, 2048, 4096, 8192, 16384};
    int mmse_max_n = 4096;   // the cubic phases stop here
    int iso_max_n = 2048;    // sinc EVD setup cost bound (setup untimed, apply timed)
    int repetitions = 3;
    std::vector<std::string> schemes = {"MMSE", "LS", "LoS", "ISO", "DFT"};
};

/// Top-level declarative experiment description. Every field has the desk-scale
/// default; JSON may override any subset. Unknown JSON keys are rejected.
struct ExperimentConfig {
    std::optional<Experiment> experiment;
    std::uint64_t master_seed = 1;
    std::string output_dir = "out";
    QuadratureSpec quadrature;
    PhysicalConfig physical;
    EstimatorTuning estimators;
    Fig1Config fig1;
    Fig2Config fig2;
    Fig3Config fig3;
    Fig4Config fig4;
    BenchConfig bench;
};

namespace detail {

using nlohmann::json;

inline void require_keys(const json& j, const char* where,
                         std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw ConfigError(std::string(where) + ": expected a JSON object");
    for (const auto& item : j.items()) {
        bool ok = false;
        for (const char* k : allowed)
            if (item.key() == k) {
                ok = true;
                break;
            }
        if (!ok) throw ConfigError(std::string(where) + ": unknown key '" + item.key() + "'");
    }
}

template <typename T>
void get_if_present(const json& j, const char* key, T& out) {
    if (auto it = j.find(key); it != j.end()) {
        try {
            out = it->get<T>();
        } catch (const json::exception& e) {
            throw ConfigError(std::string("key '") + key + "': " + e.what());
        }
    }
}

}  // namespace detail

inline nlohmann::json to_json(const ExperimentConfig& c) {
    using nlohmann::json;
    json j;
    if (c.experiment) j["experiment"] = to_string(*c.experiment);
    j["master_seed"] = c.master_seed;
    j["output_dir"] = c.output_dir;
    j["quadrature"] = {{"nodes", c.quadrature.n_nodes}, {"tail_sigmas", c.quadrature.tail_sigmas}};
    j["physical"] = {
        {"wavelength_m", c.physical.wavelength_m},
        {"spacing_over_wavelength", c.physical.spacing_over_wavelength},
        {"array_elevation_m", c.physical.array_elevation_m},
        {"pilot_length", c.physical.pilot_length},
        {"tx_power_dbm", c.physical.tx_power_dbm},
        {"noise_power_dbm", c.physical.noise_power_dbm},
        {"bandwidth_hz", c.physical.bandwidth_hz},
        {"sigma_theta_deg", c.physical.sigma_theta_deg},
        {"pathloss",
         {{"ref_distance_m", c.physical.pathloss.ref_distance_m},
          {"exponent", c.physical.pathloss.exponent},
          {"ref_gain_db", c.physical.pathloss.ref_gain_db}}},
        {"sector",
         {{"min_distance_m", c.physical.sector.min_distance_m},
          {"max_distance_m", c.physical.sector.max_distance_m},
          {"azimuth_min_deg", c.physical.sector.azimuth_min_deg},
          {"azimuth_max_deg", c.physical.sector.azimuth_max_deg},
          {"distance_distribution", c.physical.sector.distance_distribution}}},
    };
    j["estimators"] = {{"rank_tol", c.estimators.rank_tol},
                       {"clamp_tol", c.estimators.clamp_tol},
                       {"iso_beta_scale", c.estimators.iso_beta_scale},
                       {"shrinkage_eta", c.estimators.shrinkage_eta}};
    j["fig1"] = {{"l_over_lambda", c.fig1.l_over_lambda},
                 {"schemes", c.fig1.schemes},
                 {"n_drops", c.fig1.n_drops}};
    j["fig2"] = {{"sigma_theta_deg", c.fig2.sigma_theta_deg},
                 {"n_antennas", c.fig2.n_antennas},
                 {"schemes", c.fig2.schemes},
                 {"n_drops", c.fig2.n_drops}};
    j["fig3"] = {{"m_values", c.fig3.m_values},
                 {"n_antennas", c.fig3.n_antennas},
                 {"n_elevation_bins", c.fig3.n_elevation_bins},
                 {"n_stat_batches", c.fig3.n_stat_batches},
                 {"schemes", c.fig3.schemes},
                 {"whisker_k", c.fig3.whisker_k}};
    j["fig4"] = {{"l_over_lambda", c.fig4.l_over_lambda},
                 {"m_values", c.fig4.m_values},
                 {"n_drops", c.fig4.n_drops}};
    j["bench"] = {{"n_values", c.bench.n_values},
                  {"mmse_max_n", c.bench.mmse_max_n},
                  {"iso_max_n", c.bench.iso_max_n},
                  {"repetitions", c.bench.repetitions},
                  {"schemes", c.bench.schemes}};
    return j;
}

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
    using detail::get_if_present;
    using detail::require_keys;
    ExperimentConfig c;
    require_keys(j, "config",
                 {"experiment", "master_seed", "output_dir", "quadrature", "physical",
                  "estimators", "fig1", "fig2", "fig3", "fig4", "bench"});
    if (auto it = j.find("experiment"); it != j.end())
        c.experiment = experiment_from_string(it->get<std::string>());
    get_if_present(j, "master_seed", c.master_seed);
    get_if_present(j, "output_dir", c.output_dir);
    if (auto it = j.find("quadrature"); it != j.end()) {
        require_keys(*it, "quadrature", {"nodes", "tail_sigmas"});
        get_if_present(*it, "nodes", c.quadrature.n_nodes);
        get_if_present(*it, "tail_sigmas", c.quadrature.tail_sigmas);
    }
    if (auto it = j.find("physical"); it != j.end()) {
        require_keys(*it, "physical",
                     {"wavelength_m", "spacing_over_wavelength", "array_elevation_m",
                      "pilot_length", "tx_power_dbm", "noise_power_dbm", "bandwidth_hz",
                      "sigma_theta_deg", "pathloss", "sector"});
        auto& p = c.physical;
        get_if_present(*it, "wavelength_m", p.wavelength_m);
        get_if_present(*it, "spacing_over_wavelength", p.spacing_over_wavelength);
        get_if_present(*it, "array_elevation_m", p.array_elevation_m);
        get_if_present(*it, "pilot_length", p.pilot_length);
        get_if_present(*it, "tx_power_dbm", p.tx_power_dbm);
        get_if_present(*it, "noise_power_dbm", p.noise_power_dbm);
        get_if_present(*it, "bandwidth_hz", p.bandwidth_hz);
        get_if_present(*it, "sigma_theta_deg", p.sigma_theta_deg);
        if (auto pl = it->find("pathloss"); pl != it->end()) {
            require_keys(*pl, "pathloss", {"ref_distance_m", "exponent", "ref_gain_db"});
            get_if_present(*pl, "ref_distance_m", p.pathloss.ref_distance_m);
            get_if_present(*pl, "exponent", p.pathloss.exponent);
            get_if_present(*pl, "ref_gain_db", p.pathloss.ref_gain_db);
        }
        if (auto se = it->find("sector"); se != it->end()) {
            require_keys(*se, "sector",
                         {"min_distance_m", "max_distance_m", "azimuth_min_deg",
                          "azimuth_max_deg", "distance_distribution"});
            get_if_present(*se, "min_distance_m", p.sector.min_distance_m);
            get_if_present(*se, "max_distance_m", p.sector.max_distance_m);
            get_if_present(*se, "azimuth_min_deg", p.sector.azimuth_min_deg);
            get_if_present(*se, "azimuth_max_deg", p.sector.azimuth_max_deg);
            get_if_present(*se, "distance_distribution", p.sector.distance_distribution);
        }
    }
    if (auto it = j.find("estimators"); it != j.end()) {
        require_keys(*it, "estimators", {"rank_tol", "clamp_tol", "iso_beta_scale", "shrinkage_eta"});
        get_if_present(*it, "rank_tol", c.estimators.rank_tol);
        get_if_present(*it, "clamp_tol", c.estimators.clamp_tol);
        get_if_present(*it, "iso_beta_scale", c.estimators.iso_beta_scale);
        get_if_present(*it, "shrinkage_eta", c.estimators.shrinkage_eta);
    }
    if (auto it = j.find("fig1"); it != j.end()) {
        require_keys(*it, "fig1", {"l_over_lambda", "schemes", "n_drops"});
        get_if_present(*it, "l_over_lambda", c.fig1.l_over_lambda);
        get_if_present(*it, "schemes", c.fig1.schemes);
        get_if_present(*it, "n_drops", c.fig1.n_drops);
    }
    if (auto it = j.find("fig2"); it != j.end()) {
        require_keys(*it, "fig2", {"sigma_theta_deg", "n_antennas", "schemes", "n_drops"});
        get_if_present(*it, "sigma_theta_deg", c.fig2.sigma_theta_deg);
        get_if_present(*it, "n_antennas", c.fig2.n_antennas);
        get_if_present(*it, "schemes", c.fig2.schemes);
        get_if_present(*it, "n_drops", c.fig2.n_drops);
    }
    if (auto it = j.find("fig3"); it != j.end()) {
        require_keys(*it, "fig3",
                     {"m_values", "n_antennas", "n_elevation_bins", "n_stat_batches", "schemes",
                      "whisker_k"});
        get_if_present(*it, "m_values", c.fig3.m_values);
        get_if_present(*it, "n_antennas", c.fig3.n_antennas);
        get_if_present(*it, "n_elevation_bins", c.fig3.n_elevation_bins);
        get_if_present(*it, "n_stat_batches", c.fig3.n_stat_batches);
        get_if_present(*it, "schemes", c.fig3.schemes);
        get_if_present(*it, "whisker_k", c.fig3.whisker_k);
    }
    if (auto it = j.find("fig4"); it != j.end()) {
        require_keys(*it, "fig4", {"l_over_lambda", "m_values", "n_drops"});
        get_if_present(*it, "l_over_lambda", c.fig4.l_over_lambda);
        get_if_present(*it, "m_values", c.fig4.m_values);
        get_if_present(*it, "n_drops", c.fig4.n_drops);
    }
    if (auto it = j.find("bench"); it != j.end()) {
        require_keys(*it, "bench", {"n_values", "mmse_max_n", "iso_max_n", "repetitions", "schemes"});
        get_if_present(*it, "n_values", c.bench.n_values);
        get_if_present(*it, "mmse_max_n", c.bench.mmse_max_n);
        get_if_present(*it, "iso_max_n", c.bench.iso_max_n);
        get_if_present(*it, "repetitions", c.bench.repetitions);
        get_if_present(*it, "schemes", c.bench.schemes);
    }
    return c;
}

inline ExperimentConfig parse_config(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("JSON parse error: ") + e.what());
    }
    return config_from_json(j);
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_config(text);
}

inline std::string serialize_config(const ExperimentConfig& c) { return to_json(c).dump(2) + "\n"; }

inline bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
    return to_json(a) == to_json(b);
}

/// Fails fast on out-of-range or empty-list settings; returns the list of
/// problems so the CLI can print them all at once.
inline std::vector<std::string> validate_config(const ExperimentConfig& c) {
    std::vector<std::string> errors;
    auto check = [&](bool ok, const std::string& msg) {
        if (!ok) errors.push_back(msg);
    };
    const auto& p = c.physical;
    check(p.wavelength_m > 0, "physical.wavelength_m must be positive");
    check(p.spacing_over_wavelength > 0, "physical.spacing_over_wavelength must be positive");
    check(p.array_elevation_m >= 0, "physical.array_elevation_m must be non-negative");
    check(p.pilot_length >= 1, "physical.pilot_length must be >= 1");
    check(p.sigma_theta_deg > 0, "physical.sigma_theta_deg must be positive");
    check(p.sector.min_distance_m > 0, "sector.min_distance_m must be positive");
    check(p.sector.max_distance_m >= p.sector.min_distance_m,
          "sector.max_distance_m must be >= min_distance_m");
    check(p.sector.distance_distribution == "uniform_distance" ||
              p.sector.distance_distribution == "uniform_area",
          "sector.distance_distribution must be uniform_distance or uniform_area");
    check(p.sector.azimuth_max_deg >= p.sector.azimuth_min_deg,
          "sector azimuth bounds out of order");
    check(c.quadrature.n_nodes >= 2, "quadrature.nodes must be >= 2");
    check(c.quadrature.tail_sigmas > 0, "quadrature.tail_sigmas must be positive");
    check(c.estimators.rank_tol > 0, "estimators.rank_tol must be positive");
    check(c.estimators.clamp_tol >= 0, "estimators.clamp_tol must be non-negative");
    check(c.estimators.shrinkage_eta >= 0 && c.estimators.shrinkage_eta <= 1,
          "estimators.shrinkage_eta must lie in [0, 1]");

    auto check_schemes = [&](const std::vector<std::string>& schemes, const char* where,
                             std::initializer_list<const char*> allowed) {
        check(!schemes.empty(), std::string(where) + ".schemes must be non-empty");
        for (const auto& s : schemes) {
            bool ok = false;
            for (const char* a : allowed)
                if (s == a) ok = true;
            if (!ok) errors.push_back(std::string(where) + ": scheme '" + s + "' not allowed here");
        }
    };
    check(!c.fig1.l_over_lambda.empty(), "fig1.l_over_lambda must be non-empty");
    for (double l : c.fig1.l_over_lambda) check(l > 0, "fig1.l_over_lambda entries must be positive");
    check(c.fig1.n_drops >= 1, "fig1.n_drops must be >= 1");
    check_schemes(c.fig1.schemes, "fig1", {"MMSE", "LS", "DFT"});
    check(!c.fig2.sigma_theta_deg.empty(), "fig2.sigma_theta_deg must be non-empty");
    for (double s : c.fig2.sigma_theta_deg) check(s > 0, "fig2.sigma_theta_deg entries must be positive");
    check(c.fig2.n_antennas >= 1, "fig2.n_antennas must be >= 1");
    check(c.fig2.n_drops >= 1, "fig2.n_drops must be >= 1");
    check_schemes(c.fig2.schemes, "fig2", {"MMSE", "LS", "LoS", "ISO", "DFT"});
    check(!c.fig3.m_values.empty(), "fig3.m_values must be non-empty");
    for (int m : c.fig3.m_values) check(m >= 1, "fig3.m_values entries must be >= 1");
    check(c.fig3.n_antennas >= 1, "fig3.n_antennas must be >= 1");
    check(c.fig3.n_elevation_bins >= 1, "fig3.n_elevation_bins must be >= 1");
    check(c.fig3.n_stat_batches >= 1, "fig3.n_stat_batches must be >= 1");
    check(c.fig3.whisker_k >= 0, "fig3.whisker_k must be non-negative");
    check_schemes(c.fig3.schemes, "fig3", {"MMSE", "DFT"});
    check(!c.fig4.l_over_lambda.empty(), "fig4.l_over_lambda must be non-empty");
    check(!c.fig4.m_values.empty(), "fig4.m_values must be non-empty");
    for (int m : c.fig4.m_values) check(m >= 1, "fig4.m_values entries must be >= 1");
    check(c.fig4.n_drops >= 1, "fig4.n_drops must be >= 1");
    check(!c.bench.n_values.empty(), "bench.n_values must be non-empty");
    for (int n : c.bench.n_values) check(n >= 1, "bench.n_values entries must be >= 1");
    check(c.bench.repetitions >= 1, "bench.repetitions must be >= 1");
    check_schemes(c.bench.schemes, "bench", {"MMSE", "LS", "LoS", "ISO", "DFT"});

    for (double l : c.fig1.l_over_lambda)
        check(c.physical.antennas_for_aperture(l) >= 1,
              "fig1: aperture " + std::to_string(l) + " gives N < 1");
    for (double l : c.fig4.l_over_lambda)
        check(c.physical.antennas_for_aperture(l) >= 1,
              "fig4: aperture " + std::to_string(l) + " gives N < 1");
    return errors;
}

}  // namespace hmimo
