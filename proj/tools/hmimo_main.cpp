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

#include <CLI11.hpp>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "hmimo/config.hpp"
#include "hmimo/experiments.hpp"
#include "hmimo/plotdata.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 2;
constexpr int kExitNumericalError = 3;

int do_validate(const std::string& config_path) {
    hmimo::ExperimentConfig cfg;
    try {
        cfg = hmimo::load_config(config_path);
    } catch (const hmimo::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    }
    const auto errors = hmimo::validate_config(cfg);
    if (!errors.empty()) {
        for (const auto& msg : errors) std::cerr << "config error: " << msg << "\n";
        return kExitConfigError;
    }
    std::cout << "config OK";
    if (cfg.experiment) std::cout << " (experiment " << hmimo::to_string(*cfg.experiment) << ")";
    std::cout << "\n";
    return kExitOk;
}

int do_run(const std::string& config_path, const std::string& experiment_flag,
           std::optional<std::uint64_t> seed, const std::string& out_flag, int threads) {
    hmimo::ExperimentConfig cfg;
    try {
        cfg = hmimo::load_config(config_path);
        if (!experiment_flag.empty())
            cfg.experiment = hmimo::experiment_from_string(experiment_flag);
        if (!cfg.experiment)
            throw hmimo::ConfigError("no experiment selected (use --experiment or the config key)");
        if (seed) cfg.master_seed = *seed;
        if (!out_flag.empty()) cfg.output_dir = out_flag;
        const auto errors = hmimo::validate_config(cfg);
        if (!errors.empty()) {
            std::string joined;
            for (const auto& msg : errors) joined += "\n  " + msg;
            throw hmimo::ConfigError("invalid config:" + joined);
        }
    } catch (const hmimo::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    }

    const hmimo::Experiment exp = *cfg.experiment;
    hmimo::CsvTable table;
    try {
        table = hmimo::run_experiment(cfg, exp, threads);
    } catch (const hmimo::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        std::cerr << "failing trial seed path: " << e.seed_path() << "\n";
        return kExitNumericalError;
    }

    namespace fs = std::filesystem;
    const fs::path out_dir(cfg.output_dir);
    fs::create_directories(out_dir);
    const fs::path csv_path = out_dir / (std::string(hmimo::to_string(exp)) + ".csv");
    hmimo::write_csv(table, csv_path.string());
    const auto plot_files = hmimo::emit_plotdata(table, out_dir.string());
    const fs::path cfg_path = out_dir / (std::string(hmimo::to_string(exp)) + ".config.json");
    {
        std::ofstream out(cfg_path, std::ios::binary);
        out << hmimo::serialize_config(cfg);
    }

    std::cout << "wrote " << csv_path.string() << " (" << table.rows.size() << " rows)\n";
    for (const auto& p : plot_files) std::cout << "wrote " << p << "\n";
    std::cout << "wrote " << cfg_path.string() << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monte-Carlo experiments for linear channel estimation on large uniform "
                 "linear arrays"};
    app.require_subcommand(1);

    std::string config_path, experiment_flag, out_flag;
    std::optional<std::uint64_t> seed;
    int threads = 0;

    CLI::App* run = app.add_subcommand("run", "run an experiment and emit CSV + plot data");
    run->add_option("--config", config_path, "JSON config file")
        ->required()
        ->check(CLI::ExistingFile);
    run->add_option("--experiment", experiment_flag, "fig1|fig2|fig3|fig4|bench");
    run->add_option("--seed", seed, "override master_seed");
    run->add_option("--out", out_flag, "override output directory");
    run->add_option("--threads", threads,
                    "worker threads (default: HMIMO_THREADS or hardware concurrency)");

    std::string validate_path;
    CLI::App* validate = app.add_subcommand("validate", "check a config file and exit");
    validate->add_option("--config", validate_path, "JSON config file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfigError;
    }

    if (app.got_subcommand(validate)) return do_validate(validate_path);
    return do_run(config_path, experiment_flag, seed, out_flag, threads);
}
