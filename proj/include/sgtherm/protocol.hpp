#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "sgtherm/geometry.hpp"

namespace sgtherm {

enum class Protocol { FixedSphere, FixedELR, FixedLR };

inline const char* protocol_name(Protocol p) {
    switch (p) {
        case Protocol::FixedSphere: return "fixed_sphere";
        case Protocol::FixedELR: return "fixed_elr";
        case Protocol::FixedLR: return "fixed_lr";
    }
    return "?";
}

inline std::optional<Protocol> parse_protocol(const std::string& s) {
    if (s == "fixed_sphere") return Protocol::FixedSphere;
    if (s == "fixed_elr") return Protocol::FixedELR;
    if (s == "fixed_lr") return Protocol::FixedLR;
    return std::nullopt;
}

// One training run. Exactly the hyperparameters required by the protocol are
// set; the rest stay empty:
//   fixed_lr:     eta, lambda
//   fixed_elr:    eta_eff, lambda
//   fixed_sphere: eta_eff, radius
struct ProtocolConfig {
    Protocol protocol = Protocol::FixedLR;
    std::optional<double> eta;
    std::optional<double> eta_eff;
    std::optional<double> lambda;
    std::optional<double> radius;
    double sigma = 1.0;
    std::size_t d = 3;
    std::uint64_t iterations = 2'000'000;
    std::uint64_t seed = 0;
    std::optional<Vec> w0;

    void validate() const {
        auto require = [](bool cond, const char* msg) {
            if (!cond) throw std::invalid_argument(std::string("ProtocolConfig: ") + msg);
        };
        switch (protocol) {
            case Protocol::FixedLR:
                require(eta.has_value() && lambda.has_value(),
                        "fixed_lr needs eta and lambda");
                require(!eta_eff && !radius, "fixed_lr takes no eta_eff/radius");
                require(*eta > 0.0 && *lambda > 0.0, "eta, lambda must be positive");
                break;
            case Protocol::FixedELR:
                require(eta_eff.has_value() && lambda.has_value(),
                        "fixed_elr needs eta_eff and lambda");
                require(!eta && !radius, "fixed_elr takes no eta/radius");
                require(*eta_eff > 0.0 && *lambda > 0.0,
                        "eta_eff, lambda must be positive");
                break;
            case Protocol::FixedSphere:
                require(eta_eff.has_value() && radius.has_value(),
                        "fixed_sphere needs eta_eff and radius");
                require(!eta && !lambda, "fixed_sphere takes no eta/lambda");
                require(*eta_eff > 0.0 && *radius > 0.0,
                        "eta_eff, radius must be positive");
                break;
        }
        require(sigma > 0.0, "sigma must be positive");
        require(d >= 3, "d must be at least 3");
        if (w0) {
            require(w0->size() == d, "w0 dimension mismatch");
            const double n = norm(*w0);
            require(n > 0.0, "w0 must be nonzero");
            if (protocol == Protocol::FixedSphere)
                require(std::abs(n - *radius) <= 1e-9 * std::max(1.0, *radius),
                        "fixed_sphere w0 must lie on the sphere");
        }
    }
};

}  // namespace sgtherm
