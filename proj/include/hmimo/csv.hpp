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

#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace hmimo {

/// Fixed output schema shared by every experiment. Inapplicable cells stay
/// empty; M additionally admits the literal "perfect" for reference rows.
inline constexpr std::array<const char*, 10> kCsvColumns = {
    "experiment", "scheme",        "N", "L_over_lambda", "sigma_theta_deg",
    "theta_bin_deg", "M", "stat", "value", "flags"};

struct CsvRow {
    std::string experiment;
    std::string scheme;
    std::string n;
    std::string l_over_lambda;
    std::string sigma_theta_deg;
    std::string theta_bin_deg;
    std::string m;
    std::string stat;
    std::string value;
    std::string flags;

    std::array<const std::string*, 10> cells() const {
        return {&experiment, &scheme,        &n, &l_over_lambda, &sigma_theta_deg,
                &theta_bin_deg, &m, &stat, &value, &flags};
    }
};

struct CsvTable {
    std::vector<CsvRow> rows;
};

/// Floats print with 9 significant digits so reruns are byte-comparable.
inline std::string format_value(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

inline std::string format_count(long long v) { return std::to_string(v); }

inline void write_csv(const CsvTable& table, std::ostream& out) {
    for (std::size_t i = 0; i < kCsvColumns.size(); ++i) {
        if (i > 0) out << ',';
        out << kCsvColumns[i];
    }
    out << '\n';
    for (const CsvRow& row : table.rows) {
        const auto cells = row.cells();
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i > 0) out << ',';
            out << *cells[i];
        }
        out << '\n';
    }
}

inline void write_csv(const CsvTable& table, const std::string& path) {
    std::ofstream out(path, std::ios::binary);  // binary: identical bytes on every platform
    if (!out) throw std::runtime_error("write_csv: cannot open " + path);
    write_csv(table, out);
}

inline std::string to_csv_string(const CsvTable& table) {
    std::ostringstream ss;
    write_csv(table, ss);
    return ss.str();
}

inline CsvTable parse_csv(std::istream& in) {
    CsvTable table;
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::string cell;
        std::stringstream ss(line);
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        // a trailing empty cell is eaten by getline; restore it
        while (cells.size() < kCsvColumns.size()) cells.emplace_back();
        if (cells.size() != kCsvColumns.size())
            throw std::runtime_error("parse_csv: expected " + std::to_string(kCsvColumns.size()) +
                                     " columns, got " + std::to_string(cells.size()));
        if (header) {
            for (std::size_t i = 0; i < kCsvColumns.size(); ++i)
                if (cells[i] != kCsvColumns[i])
                    throw std::runtime_error("parse_csv: unexpected header column '" + cells[i] + "'");
            header = false;
            continue;
        }
        CsvRow row;
        row.experiment = cells[0];
        row.scheme = cells[1];
        row.n = cells[2];
        row.l_over_lambda = cells[3];
        row.sigma_theta_deg = cells[4];
        row.theta_bin_deg = cells[5];
        row.m = cells[6];
        row.stat = cells[7];
        row.value = cells[8];
        row.flags = cells[9];
        table.rows.push_back(std::move(row));
    }
    if (header) throw std::runtime_error("parse_csv: missing header row");
    return table;
}

inline CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_csv: cannot open " + path);
    return parse_csv(in);
}

}  // namespace hmimo
