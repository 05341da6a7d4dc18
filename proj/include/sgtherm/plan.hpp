#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "sgtherm/geometry.hpp"
#include "sgtherm/protocol.hpp"

namespace sgtherm {

class PlanError : public std::runtime_error {
public:
    PlanError(const std::string& msg, std::size_t line)
        : std::runtime_error(msg + " (line " + std::to_string(line) + ")"), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_ = 0;
};

struct AxisSpec {
    std::string name;
    double min = 0.0;
    double max = 0.0;
    std::size_t count = 0;
    bool log_spaced = true;

    std::vector<double> values() const {
        std::vector<double> out(count);
        if (count == 1) {
            out[0] = min;
            return out;
        }
        for (std::size_t i = 0; i < count; ++i) {
            const double t = static_cast<double>(i) / static_cast<double>(count - 1);
            out[i] = log_spaced
                         ? std::pow(10.0, std::log10(min) + t * (std::log10(max) - std::log10(min)))
                         : min + t * (max - min);
        }
        out.front() = min;
        out.back() = max;
        return out;
    }
};

// A sweep: one protocol, two hyperparameter axes, one model direction.
struct ExperimentPlan {
    Protocol protocol = Protocol::FixedLR;
    std::size_t d = 3;
    double sigma = 1.0;            // gradient noise scale
    std::uint64_t iterations = 2'000'000;
    std::size_t seeds_per_cell = 1;
    std::uint64_t seed = 0;        // plan seed; per-run seeds derive from it
    std::optional<std::uint64_t> mu_seed;  // mu drawn uniformly from this seed
    std::optional<Vec> mu;                 // or given explicitly
    AxisSpec axis1;  // eta (fixed_lr) or eta_eff
    AxisSpec axis2;  // lambda, or radius for fixed_sphere
    std::string output_dir = "out";
    std::size_t workers = 0;  // 0 = hardware concurrency

    std::pair<std::string, std::string> expected_axes() const {
        switch (protocol) {
            case Protocol::FixedLR: return {"eta", "lambda"};
            case Protocol::FixedELR: return {"eta_eff", "lambda"};
            case Protocol::FixedSphere: return {"eta_eff", "radius"};
        }
        throw std::logic_error("expected_axes: bad protocol");
    }

    void validate() const {
        auto fail = [](const std::string& msg) { throw PlanError(msg, 0); };
        const auto [n1, n2] = expected_axes();
        if (axis1.name != n1 || axis2.name != n2)
            fail("plan axes must be {" + n1 + ", " + n2 + "} for protocol " +
                 protocol_name(protocol) + ", got {" + axis1.name + ", " + axis2.name + "}");
        for (const AxisSpec* ax : {&axis1, &axis2}) {
            if (ax->count < 1) fail("axis " + ax->name + ": count must be >= 1");
            if (!(ax->min > 0.0) || !(ax->max > 0.0))
                fail("axis " + ax->name + ": values must be positive");
            if (ax->min > ax->max) fail("axis " + ax->name + ": min exceeds max");
            if (ax->count == 1 && ax->min != ax->max)
                fail("axis " + ax->name + ": count 1 requires min == max");
        }
        if (d < 3) fail("d must be at least 3");
        if (!(sigma > 0.0)) fail("sigma must be positive");
        if (seeds_per_cell < 1) fail("seeds_per_cell must be >= 1");
        if (mu && mu_seed) fail("mu and mu_seed are mutually exclusive");
        if (mu && mu->size() != d) fail("explicit mu must have d components");
        if (mu && !(norm(*mu) > 0.0)) fail("explicit mu must be nonzero");
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& s, std::size_t line) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument("");
        return v;
    } catch (const std::exception&) {
        throw PlanError("malformed number '" + s + "'", line);
    }
}

inline std::uint64_t parse_uint(const std::string& s, std::size_t line) {
    try {
        std::size_t used = 0;
        const unsigned long long v = std::stoull(s, &used);
        if (used != s.size() || s.find('-') != std::string::npos)
            throw std::invalid_argument("");
        return v;
    } catch (const std::exception&) {
        throw PlanError("malformed integer '" + s + "'", line);
    }
}

inline bool parse_bool(const std::string& s, std::size_t line) {
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw PlanError("malformed boolean '" + s + "'", line);
}

inline Vec parse_vector(const std::string& s, std::size_t line) {
    Vec out;
    std::stringstream ss(s);
    std::string part;
    while (std::getline(ss, part, ',')) {
        part = trim(part);
        if (part.empty()) throw PlanError("malformed vector component", line);
        out.push_back(parse_double(part, line));
    }
    if (out.empty()) throw PlanError("empty vector", line);
    return out;
}

}  // namespace detail

// Line-oriented key=value format with [section] headers and # comments.
// Sections: one [experiment], exactly two [axis] blocks in axis order.
inline ExperimentPlan parse_plan_text(const std::string& text) {
    ExperimentPlan plan;
    std::vector<AxisSpec> axes;
    std::vector<std::size_t> axis_lines;

    enum class Section { None, Experiment, Axis };
    Section section = Section::None;
    std::size_t section_line = 0;
    std::vector<std::string> seen_keys;
    bool have_experiment = false;

    // axis fields tracked per block so required keys can be enforced
    bool ax_has_min = false, ax_has_max = false, ax_has_count = false;

    auto close_axis = [&]() {
        if (section != Section::Axis) return;
        AxisSpec& ax = axes.back();
        if (ax.name.empty()) throw PlanError("axis is missing required key 'name'", section_line);
        if (!ax_has_min) throw PlanError("axis is missing required key 'min'", section_line);
        if (!ax_has_max) throw PlanError("axis is missing required key 'max'", section_line);
        if (!ax_has_count) throw PlanError("axis is missing required key 'count'", section_line);
    };

    std::istringstream stream(text);
    std::string raw;
    std::size_t line_no = 0;
    bool have_protocol = false;
    while (std::getline(stream, raw)) {
        ++line_no;
        std::string line = raw;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']') throw PlanError("malformed section header", line_no);
            const std::string name = detail::trim(line.substr(1, line.size() - 2));
            close_axis();
            if (name == "experiment") {
                if (have_experiment)
                    throw PlanError("duplicate [experiment] section", line_no);
                have_experiment = true;
                section = Section::Experiment;
            } else if (name == "axis") {
                axes.emplace_back();
                ax_has_min = ax_has_max = ax_has_count = false;
                section = Section::Axis;
            } else {
                throw PlanError("unknown section [" + name + "]", line_no);
            }
            section_line = line_no;
            seen_keys.clear();
            continue;
        }

        const auto eq = line.find('=');
        if (eq == std::string::npos) throw PlanError("expected key = value", line_no);
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (key.empty()) throw PlanError("empty key", line_no);
        if (value.empty()) throw PlanError("empty value for key '" + key + "'", line_no);
        for (const std::string& k : seen_keys)
            if (k == key) throw PlanError("duplicate key '" + key + "'", line_no);
        seen_keys.push_back(key);

        if (section == Section::Experiment) {
            if (key == "protocol") {
                const auto p = parse_protocol(value);
                if (!p) throw PlanError("unknown protocol '" + value + "'", line_no);
                plan.protocol = *p;
                have_protocol = true;
            } else if (key == "d") {
                plan.d = static_cast<std::size_t>(detail::parse_uint(value, line_no));
            } else if (key == "sigma") {
                plan.sigma = detail::parse_double(value, line_no);
            } else if (key == "iterations") {
                plan.iterations = detail::parse_uint(value, line_no);
            } else if (key == "seeds_per_cell") {
                plan.seeds_per_cell = static_cast<std::size_t>(detail::parse_uint(value, line_no));
            } else if (key == "seed") {
                plan.seed = detail::parse_uint(value, line_no);
            } else if (key == "mu_seed") {
                plan.mu_seed = detail::parse_uint(value, line_no);
            } else if (key == "mu") {
                plan.mu = detail::parse_vector(value, line_no);
            } else if (key == "output_dir") {
                plan.output_dir = value;
            } else if (key == "workers") {
                plan.workers = static_cast<std::size_t>(detail::parse_uint(value, line_no));
            } else {
                throw PlanError("unknown key '" + key + "' in [experiment]", line_no);
            }
        } else if (section == Section::Axis) {
            AxisSpec& ax = axes.back();
            if (key == "name") {
                ax.name = value;
            } else if (key == "min") {
                ax.min = detail::parse_double(value, line_no);
                ax_has_min = true;
            } else if (key == "max") {
                ax.max = detail::parse_double(value, line_no);
                ax_has_max = true;
            } else if (key == "count") {
                ax.count = static_cast<std::size_t>(detail::parse_uint(value, line_no));
                ax_has_count = true;
            } else if (key == "log") {
                ax.log_spaced = detail::parse_bool(value, line_no);
            } else {
                throw PlanError("unknown key '" + key + "' in [axis]", line_no);
            }
        } else {
            throw PlanError("key outside any section", line_no);
        }
    }
    close_axis();

    if (!have_experiment) throw PlanError("missing [experiment] section", line_no);
    if (!have_protocol) throw PlanError("missing required key 'protocol'", line_no);
    if (axes.size() != 2)
        throw PlanError("expected exactly 2 [axis] sections, got " +
                            std::to_string(axes.size()),
                        line_no);

    // canonical axis order: rate axis first, then lambda/radius
    const auto expected = plan.expected_axes();
    if (axes[0].name == expected.second && axes[1].name == expected.first)
        std::swap(axes[0], axes[1]);
    plan.axis1 = axes[0];
    plan.axis2 = axes[1];
    plan.validate();
    return plan;
}

inline ExperimentPlan parse_plan(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw PlanError("cannot open plan file '" + path + "'", 0);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_plan_text(buf.str());
}

inline std::string write_plan(const ExperimentPlan& plan) {
    std::ostringstream os;
    os.precision(17);
    os << "[experiment]\n";
    os << "protocol = " << protocol_name(plan.protocol) << "\n";
    os << "d = " << plan.d << "\n";
    os << "sigma = " << plan.sigma << "\n";
    os << "iterations = " << plan.iterations << "\n";
    os << "seeds_per_cell = " << plan.seeds_per_cell << "\n";
    os << "seed = " << plan.seed << "\n";
    if (plan.mu_seed) os << "mu_seed = " << *plan.mu_seed << "\n";
    if (plan.mu) {
        os << "mu = ";
        for (std::size_t i = 0; i < plan.mu->size(); ++i)
            os << (i ? ", " : "") << (*plan.mu)[i];
        os << "\n";
    }
    os << "output_dir = " << plan.output_dir << "\n";
    os << "workers = " << plan.workers << "\n";
    for (const AxisSpec* ax : {&plan.axis1, &plan.axis2}) {
        os << "\n[axis]\n";
        os << "name = " << ax->name << "\n";
        os << "min = " << ax->min << "\n";
        os << "max = " << ax->max << "\n";
        os << "count = " << ax->count << "\n";
        os << "log = " << (ax->log_spaced ? "true" : "false") << "\n";
    }
    return os.str();
}

}  // namespace sgtherm
