#pragma once

#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "sgtherm/analysis.hpp"

namespace sgtherm {

inline nlohmann::json report_to_json(const CheckReport& rep) {
    nlohmann::json j;
    j["check"] = rep.check;
    j["protocol"] = rep.protocol;
    j["diagnostics"] = nlohmann::json::object();
    for (const auto& [k, v] : rep.diagnostics) j["diagnostics"][k] = v;
    j["thresholds"] = nlohmann::json::object();
    for (const auto& [k, v] : rep.thresholds) j["thresholds"][k] = v;
    j["pass"] = rep.pass;
    return j;
}

inline std::string report_to_text(const CheckReport& rep) {
    std::ostringstream os;
    os << "check: " << rep.check << "\n";
    os << "protocol: " << rep.protocol << "\n";
    os << "result: " << (rep.pass ? "PASS" : "FAIL") << "\n";
    os << rep.details << "\n";
    os << "diagnostics:\n";
    for (const auto& [k, v] : rep.diagnostics) os << "  " << k << " = " << v << "\n";
    os << "thresholds:\n";
    for (const auto& [k, v] : rep.thresholds) os << "  " << k << " = " << v << "\n";
    return os.str();
}

struct ReportFiles {
    std::filesystem::path text_path;
    std::filesystem::path json_path;
};

inline ReportFiles write_report_files(const CheckReport& rep,
                                      const std::filesystem::path& dir,
                                      const std::string& basename) {
    std::filesystem::create_directories(dir);
    ReportFiles files{dir / (basename + "_report.txt"), dir / (basename + "_report.json")};
    {
        std::ofstream out(files.text_path);
        if (!out) throw std::runtime_error("cannot open " + files.text_path.string());
        out << report_to_text(rep);
    }
    {
        std::ofstream out(files.json_path);
        if (!out) throw std::runtime_error("cannot open " + files.json_path.string());
        out << report_to_json(rep).dump(2) << '\n';
    }
    return files;
}

// The full V2 heatmap: for every generating cell, the evaluated potential at
// every other cell minus the row minimum. One flat CSV for external plotting.
inline void write_v2_heatmap_csv(const GridResult& grid, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string());
    out << "star_" << grid.axis1_name << ",star_" << grid.axis2_name << ','
        << grid.axis1_name << ',' << grid.axis2_name << ",potential_minus_min\n";
    const std::size_t n1 = grid.axis1.size(), n2 = grid.axis2.size();
    auto usable = [&](std::size_t i, std::size_t j) {
        return !grid.at(i, j).diverged && grid.at(i, j).S_total.has_value();
    };
    char buf[160];
    for (std::size_t si = 0; si < n1; ++si) {
        for (std::size_t sj = 0; sj < n2; ++sj) {
            if (!usable(si, sj)) continue;
            const bool column_only = grid.protocol == Protocol::FixedSphere;
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < n1; ++i)
                for (std::size_t j = column_only ? sj : 0;
                     j < (column_only ? sj + 1 : n2); ++j)
                    if (usable(i, j))
                        best = std::min(best, v2_potential(grid, si, sj, i, j));
            for (std::size_t i = 0; i < n1; ++i) {
                for (std::size_t j = column_only ? sj : 0;
                     j < (column_only ? sj + 1 : n2); ++j) {
                    if (!usable(i, j)) continue;
                    const double g = v2_potential(grid, si, sj, i, j) - best;
                    std::snprintf(buf, sizeof(buf), "%.12g,%.12g,%.12g,%.12g,%.12g\n",
                                  grid.axis1[si], grid.axis2[sj], grid.axis1[i],
                                  grid.axis2[j], g);
                    out << buf;
                }
            }
        }
    }
}

}  // namespace sgtherm
