#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "sgtherm/analysis.hpp"
#include "sgtherm/protocol.hpp"

namespace sgtherm {

class SchemaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// One flat record per (cell, seed). Fields that do not apply to the row's
// protocol are empty in the CSV, never zero.
struct ResultRow {
    std::string protocol;
    std::optional<double> eta;
    std::optional<double> eta_eff;
    std::optional<double> lambda;
    std::optional<double> radius_fixed;
    double sigma = 1.0;
    std::size_t d = 3;
    std::uint64_t iterations = 0;
    std::uint64_t seed = 0;
    bool diverged = false;
    std::optional<double> U_mean;
    std::optional<double> r_emp;
    std::optional<double> sigma2_emp;
    std::optional<double> grad_sq_mean;
    std::optional<double> lambda_eff_emp;
    std::optional<double> S_sphere;
    std::optional<double> S_total;
    std::optional<std::uint64_t> n_dropped;
    std::optional<double> T_theory;
    std::optional<double> r_star_sde;
    std::optional<double> r_star_discr;
    std::optional<double> F;
    std::optional<double> G;
};

inline const std::string& results_csv_header() {
    static const std::string header =
        "protocol,eta,eta_eff,lambda,radius_fixed,sigma,d,iterations,seed,diverged,"
        "U_mean,r_emp,sigma2_emp,grad_sq_mean,lambda_eff_emp,S_sphere,S_total,"
        "n_dropped,T_theory,r_star_sde,r_star_discr,F,G";
    return header;
}

namespace detail {

// 12 significant digits keeps theory-vs-theory identities checkable while the
// files stay byte-stable across reruns.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

inline std::string format_opt(const std::optional<double>& v) {
    return v ? format_double(*v) : std::string();
}

inline std::optional<double> parse_opt_double(const std::string& s, std::size_t line) {
    if (s.empty()) return std::nullopt;
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument("");
        return v;
    } catch (const std::exception&) {
        throw SchemaError("results CSV: malformed number '" + s + "' at line " +
                          std::to_string(line));
    }
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace detail

inline std::string results_row_to_csv(const ResultRow& r) {
    std::ostringstream os;
    os << r.protocol << ',' << detail::format_opt(r.eta) << ','
       << detail::format_opt(r.eta_eff) << ',' << detail::format_opt(r.lambda) << ','
       << detail::format_opt(r.radius_fixed) << ',' << detail::format_double(r.sigma)
       << ',' << r.d << ',' << r.iterations << ',' << r.seed << ','
       << (r.diverged ? 1 : 0) << ',' << detail::format_opt(r.U_mean) << ','
       << detail::format_opt(r.r_emp) << ',' << detail::format_opt(r.sigma2_emp) << ','
       << detail::format_opt(r.grad_sq_mean) << ','
       << detail::format_opt(r.lambda_eff_emp) << ',' << detail::format_opt(r.S_sphere)
       << ',' << detail::format_opt(r.S_total) << ','
       << (r.n_dropped ? std::to_string(*r.n_dropped) : std::string()) << ','
       << detail::format_opt(r.T_theory) << ',' << detail::format_opt(r.r_star_sde)
       << ',' << detail::format_opt(r.r_star_discr) << ',' << detail::format_opt(r.F)
       << ',' << detail::format_opt(r.G);
    return os.str();
}

inline void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
    out << results_csv_header() << '\n';
    for (const ResultRow& r : rows) out << results_row_to_csv(r) << '\n';
}

inline std::vector<ResultRow> read_results_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open results file '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw SchemaError("results CSV: empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != results_csv_header())
        throw SchemaError("results CSV: header does not match the expected schema");

    std::vector<ResultRow> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        const std::vector<std::string> f = detail::split_csv_line(line);
        if (f.size() != 23)
            throw SchemaError("results CSV: wrong field count at line " +
                              std::to_string(line_no));
        ResultRow r;
        std::size_t k = 0;
        r.protocol = f[k++];
        if (!parse_protocol(r.protocol))
            throw SchemaError("results CSV: unknown protocol at line " +
                              std::to_string(line_no));
        r.eta = detail::parse_opt_double(f[k++], line_no);
        r.eta_eff = detail::parse_opt_double(f[k++], line_no);
        r.lambda = detail::parse_opt_double(f[k++], line_no);
        r.radius_fixed = detail::parse_opt_double(f[k++], line_no);
        r.sigma = detail::parse_opt_double(f[k++], line_no).value_or(1.0);
        r.d = static_cast<std::size_t>(std::stoull(f[k++]));
        r.iterations = std::stoull(f[k++]);
        r.seed = std::stoull(f[k++]);
        r.diverged = f[k++] == "1";
        r.U_mean = detail::parse_opt_double(f[k++], line_no);
        r.r_emp = detail::parse_opt_double(f[k++], line_no);
        r.sigma2_emp = detail::parse_opt_double(f[k++], line_no);
        r.grad_sq_mean = detail::parse_opt_double(f[k++], line_no);
        r.lambda_eff_emp = detail::parse_opt_double(f[k++], line_no);
        r.S_sphere = detail::parse_opt_double(f[k++], line_no);
        r.S_total = detail::parse_opt_double(f[k++], line_no);
        if (!f[k].empty()) r.n_dropped = std::stoull(f[k]);
        ++k;
        r.T_theory = detail::parse_opt_double(f[k++], line_no);
        r.r_star_sde = detail::parse_opt_double(f[k++], line_no);
        r.r_star_discr = detail::parse_opt_double(f[k++], line_no);
        r.F = detail::parse_opt_double(f[k++], line_no);
        r.G = detail::parse_opt_double(f[k++], line_no);
        rows.push_back(std::move(r));
    }
    return rows;
}

// Rebuild the rectangular grid from flat rows, averaging replicates per cell.
// Every (axis1, axis2) combination must be present; diverged replicates are
// excluded from the seed-mean and a cell is flagged only when no replicate
// survives.
inline GridResult load_grid(const std::vector<ResultRow>& rows) {
    if (rows.empty()) throw SchemaError("load_grid: no rows");
    const auto proto = parse_protocol(rows.front().protocol);
    if (!proto) throw SchemaError("load_grid: unknown protocol");

    GridResult grid;
    grid.protocol = *proto;
    grid.d = rows.front().d;
    grid.sigma = rows.front().sigma;
    switch (grid.protocol) {
        case Protocol::FixedLR:
            grid.axis1_name = "eta";
            grid.axis2_name = "lambda";
            break;
        case Protocol::FixedELR:
            grid.axis1_name = "eta_eff";
            grid.axis2_name = "lambda";
            break;
        case Protocol::FixedSphere:
            grid.axis1_name = "eta_eff";
            grid.axis2_name = "radius";
            break;
    }

    auto axis_value = [&](const ResultRow& r, bool first) -> double {
        const std::optional<double>& v =
            first ? (grid.protocol == Protocol::FixedLR ? r.eta : r.eta_eff)
                  : (grid.protocol == Protocol::FixedSphere ? r.radius_fixed : r.lambda);
        if (!v)
            throw SchemaError("load_grid: row is missing its protocol axis value");
        return *v;
    };

    auto collect_axis = [&](bool first) {
        std::vector<double> vals;
        for (const ResultRow& r : rows) {
            if (r.protocol != rows.front().protocol)
                throw SchemaError("load_grid: mixed protocols in one file");
            const double v = axis_value(r, first);
            bool found = false;
            for (double u : vals)
                if (std::abs(u - v) <= 1e-9 * std::max(std::abs(u), std::abs(v))) {
                    found = true;
                    break;
                }
            if (!found) vals.push_back(v);
        }
        std::sort(vals.begin(), vals.end());
        return vals;
    };
    grid.axis1 = collect_axis(true);
    grid.axis2 = collect_axis(false);

    auto axis_index = [](const std::vector<double>& axis, double v) {
        for (std::size_t i = 0; i < axis.size(); ++i)
            if (std::abs(axis[i] - v) <= 1e-9 * std::max(std::abs(axis[i]), std::abs(v)))
                return i;
        throw SchemaError("load_grid: axis lookup failed");
    };

    struct Accum {
        std::size_t n = 0;
        double U = 0, r = 0, s2 = 0, g2 = 0;
        std::size_t n_le = 0, n_ss = 0, n_st = 0;
        double le = 0, ss = 0, st = 0;
        std::uint64_t dropped = 0;
        std::size_t rows_seen = 0;
    };
    std::vector<std::vector<Accum>> acc(grid.axis1.size(),
                                        std::vector<Accum>(grid.axis2.size()));
    for (const ResultRow& r : rows) {
        if (r.d != grid.d || r.sigma != grid.sigma)
            throw SchemaError("load_grid: rows disagree on d or sigma");
        Accum& a = acc[axis_index(grid.axis1, axis_value(r, true))]
                      [axis_index(grid.axis2, axis_value(r, false))];
        ++a.rows_seen;
        if (r.diverged || !r.U_mean || !r.r_emp) continue;
        ++a.n;
        a.U += *r.U_mean;
        a.r += *r.r_emp;
        a.s2 += r.sigma2_emp.value_or(0.0);
        a.g2 += r.grad_sq_mean.value_or(0.0);
        if (r.lambda_eff_emp) {
            ++a.n_le;
            a.le += *r.lambda_eff_emp;
        }
        if (r.S_sphere) {
            ++a.n_ss;
            a.ss += *r.S_sphere;
        }
        if (r.S_total) {
            ++a.n_st;
            a.st += *r.S_total;
        }
        a.dropped += r.n_dropped.value_or(0);
    }

    grid.cells.assign(grid.axis1.size(), std::vector<StationaryStats>(grid.axis2.size()));
    for (std::size_t i = 0; i < grid.axis1.size(); ++i) {
        for (std::size_t j = 0; j < grid.axis2.size(); ++j) {
            const Accum& a = acc[i][j];
            if (a.rows_seen == 0)
                throw SchemaError("load_grid: grid is not rectangular (missing cell)");
            StationaryStats& st = grid.cells[i][j];
            if (a.n == 0) {
                st.diverged = true;
                continue;
            }
            const double n = static_cast<double>(a.n);
            st.U_mean = a.U / n;
            st.r_emp = a.r / n;
            st.sigma2_emp = a.s2 / n;
            st.grad_sq_mean = a.g2 / n;
            if (a.n_le) st.lambda_eff_emp = a.le / static_cast<double>(a.n_le);
            if (a.n_ss) st.S_sphere = a.ss / static_cast<double>(a.n_ss);
            if (a.n_st) st.S_total = a.st / static_cast<double>(a.n_st);
            st.n_dropped = static_cast<std::size_t>(a.dropped);
        }
    }
    return grid;
}

}  // namespace sgtherm
