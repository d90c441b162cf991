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

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "hmimo/csv.hpp"

namespace hmimo {

namespace detail {

inline void open_out(std::ofstream& out, const std::filesystem::path& path) {
    out.open(path, std::ios::binary);
    if (!out) throw std::runtime_error("emit_plotdata: cannot open " + path.string());
}

// numeric-aware ordering so "100" sorts after "20"
inline bool numeric_less(const std::string& a, const std::string& b) {
    try {
        return std::stod(a) < std::stod(b);
    } catch (...) {
        return a < b;
    }
}

}  // namespace detail

/// Pivots a run_* CSV into one whitespace-delimited data file per figure plus
/// a gnuplot stub. Rows keep a deterministic order (sweep value ascending,
/// series in first-appearance order).
inline std::vector<std::string> emit_plotdata(const CsvTable& table,
                                              const std::string& out_dir) {
    if (table.rows.empty()) throw std::runtime_error("emit_plotdata: empty table");
    const std::string experiment = table.rows.front().experiment;
    for (const CsvRow& row : table.rows)
        if (row.experiment != experiment)
            throw std::runtime_error("emit_plotdata: mixed experiments in one CSV");

    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    const fs::path dat_path = fs::path(out_dir) / (experiment + ".dat");
    const fs::path gp_path = fs::path(out_dir) / (experiment + ".gp");
    std::ofstream dat, gp;
    detail::open_out(dat, dat_path);
    detail::open_out(gp, gp_path);

    auto series_order = [&](auto key_of) {
        std::vector<std::string> order;
        for (const CsvRow& row : table.rows) {
            const std::string k = key_of(row);
            if (std::find(order.begin(), order.end(), k) == order.end()) order.push_back(k);
        }
        return order;
    };

    if (experiment == "fig1" || experiment == "fig2") {
        const bool fig1 = experiment == "fig1";
        const char* xname = fig1 ? "L_over_lambda" : "sigma_theta_deg";
        const auto schemes = series_order([](const CsvRow& r) { return r.scheme; });
        std::map<double, std::map<std::string, std::string>> grid;
        for (const CsvRow& row : table.rows) {
            if (row.stat != "mean") continue;
            const double x = std::stod(fig1 ? row.l_over_lambda : row.sigma_theta_deg);
            grid[x][row.scheme] = row.value;
        }
        dat << "# " << xname;
        for (const auto& s : schemes) dat << ' ' << s;
        dat << '\n';
        for (const auto& [x, by_scheme] : grid) {
            dat << format_value(x);
            for (const auto& s : schemes) {
                auto it = by_scheme.find(s);
                dat << ' ' << (it == by_scheme.end() ? "nan" : it->second);
            }
            dat << '\n';
        }
        gp << "set logscale y\nset xlabel '" << xname << "'\nset ylabel 'NMSEE'\n";
        if (fig1) gp << "set logscale x 2\n";
        gp << "plot";
        for (std::size_t i = 0; i < schemes.size(); ++i)
            gp << (i ? ", " : " ") << "'" << experiment << ".dat' using 1:" << (i + 2)
               << " with linespoints title '" << schemes[i] << "'";
        gp << '\n';
    } else if (experiment == "fig3") {
        // long format: one line per (scheme, M, bin) with the full box summary
        const std::vector<const char*> stats = {"median",       "q1",   "q3",
                                                "whisker_low",  "whisker_high", "mean",
                                                "outlier_frac", "n_outliers",   "count"};
        std::map<std::string, std::map<std::string, std::string>> lines;  // key -> stat -> value
        for (const CsvRow& row : table.rows) {
            const std::string key = row.scheme + " " + row.m + " " + row.theta_bin_deg;
            lines[key][row.stat] = row.value;
        }
        dat << "# scheme M theta_bin_deg";
        for (const char* s : stats) dat << ' ' << s;
        dat << '\n';
        std::vector<std::string> keys;
        for (const auto& [key, _] : lines) keys.push_back(key);
        std::sort(keys.begin(), keys.end());
        for (const auto& key : keys) {
            dat << key;
            const auto& by_stat = lines[key];
            for (const char* s : stats) {
                auto it = by_stat.find(s);
                dat << ' ' << (it == by_stat.end() ? "nan" : it->second);
            }
            dat << '\n';
        }
        gp << "set xlabel 'elevation bin (deg)'\nset ylabel 'NMSEE'\nset logscale y\n"
           << "# boxplot-style summary per scheme/M; filter rows by the first two columns\n";
    } else if (experiment == "fig4") {
        const auto ms = series_order([](const CsvRow& r) { return r.m; });
        std::map<double, std::map<std::string, std::string>> grid;
        for (const CsvRow& row : table.rows) {
            if (row.stat != "mean") continue;
            grid[std::stod(row.l_over_lambda)][row.m] = row.value;
        }
        dat << "# L_over_lambda";
        for (const auto& m : ms) dat << " M=" << m;
        dat << '\n';
        for (const auto& [x, by_m] : grid) {
            dat << format_value(x);
            for (const auto& m : ms) {
                auto it = by_m.find(m);
                dat << ' ' << (it == by_m.end() ? "nan" : it->second);
            }
            dat << '\n';
        }
        gp << "set logscale xy\nset xlabel 'L/lambda'\nset ylabel 'NMSEE'\nplot";
        for (std::size_t i = 0; i < ms.size(); ++i)
            gp << (i ? ", " : " ") << "'fig4.dat' using 1:" << (i + 2)
               << " with linespoints title 'M=" << ms[i] << "'";
        gp << '\n';
    } else if (experiment == "bench") {
        std::set<std::string> columns;
        std::map<long long, std::map<std::string, std::string>> grid;
        for (const CsvRow& row : table.rows) {
            if (row.n.empty()) continue;  // slope summary rows
            const std::string col = row.scheme + ":" + row.stat;
            columns.insert(col);
            grid[std::stoll(row.n)][col] = row.value;
        }
        dat << "# N";
        for (const auto& c : columns) dat << ' ' << c;
        dat << '\n';
        for (const auto& [n, by_col] : grid) {
            dat << n;
            for (const auto& c : columns) {
                auto it = by_col.find(c);
                dat << ' ' << (it == by_col.end() ? "nan" : it->second);
            }
            dat << '\n';
        }
        gp << "set logscale xy\nset xlabel 'N'\nset ylabel 'seconds'\n"
           << "# columns follow the header comment of bench.dat\n";
    } else {
        throw std::runtime_error("emit_plotdata: unknown experiment '" + experiment + "'");
    }
    return {dat_path.string(), gp_path.string()};
}

inline std::vector<std::string> emit_plotdata(const std::string& csv_path,
                                              const std::string& out_dir) {
    return emit_plotdata(read_csv(csv_path), out_dir);
}

}  // namespace hmimo
