#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>

#include "sgtherm/protocol.hpp"

namespace sgtherm {

class StencilError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Thermodynamic reading of one stationary configuration:
// T temperature (loss units), p = lambda, V = r^2/2, R = (d-1)/2,
// U mean loss, entropies in nats, F = U - T S_total, G = F + p V.
struct ThermoState {
    double T = 0.0;
    double p = 0.0;
    double V = 0.0;
    double R = 0.0;
    double U = 0.0;
    double S_sphere = 0.0;
    double S_total = 0.0;
    double F = 0.0;
    double G = 0.0;
};

struct VmfStats {
    double kappa = 0.0;
    double U = 0.0;
    double S_sphere = 0.0;
    bool exact = false;
};

struct HeatCapacities {
    double C_V = 0.0;
    double C_p = 0.0;
    double gamma = 0.0;
};

enum class VmfMode { Exact, Asymptotic };

inline double gas_constant(std::size_t d) { return 0.5 * static_cast<double>(d - 1); }

// T = eta_eff sigma^2 / 2 (fixed sphere / fixed ELR),
// T = sqrt(eta lambda sigma^2 / (2(d-1))) (fixed LR).
inline double temperature(const ProtocolConfig& cfg) {
    const double s2 = cfg.sigma * cfg.sigma;
    switch (cfg.protocol) {
        case Protocol::FixedSphere:
        case Protocol::FixedELR:
            return 0.5 * *cfg.eta_eff * s2;
        case Protocol::FixedLR:
            return std::sqrt(*cfg.eta * *cfg.lambda * s2 /
                             (2.0 * static_cast<double>(cfg.d - 1)));
    }
    throw std::logic_error("temperature: bad protocol");
}

inline double predicted_radius_sde(const ProtocolConfig& cfg) {
    const double s2d = cfg.sigma * cfg.sigma * static_cast<double>(cfg.d - 1);
    switch (cfg.protocol) {
        case Protocol::FixedELR:
            return std::sqrt(*cfg.eta_eff * s2d / (2.0 * *cfg.lambda));
        case Protocol::FixedLR:
            return std::pow(*cfg.eta * s2d / (2.0 * *cfg.lambda), 0.25);
        case Protocol::FixedSphere:
            throw std::invalid_argument(
                "predicted_radius_sde: not applicable to fixed_sphere");
    }
    throw std::logic_error("predicted_radius_sde: bad protocol");
}

// Discretization-corrected stationary radius: the measured mean squared
// gradient of the direction joins the covariance trace. Reduces to the SDE
// value at grad_sq_mean = 0.
inline double predicted_radius_discrete(const ProtocolConfig& cfg, double grad_sq_mean) {
    if (grad_sq_mean < 0.0)
        throw std::invalid_argument("predicted_radius_discrete: negative grad_sq_mean");
    const double trace = cfg.sigma * cfg.sigma * static_cast<double>(cfg.d - 1);
    switch (cfg.protocol) {
        case Protocol::FixedELR:
            return std::sqrt(*cfg.eta_eff / (2.0 * *cfg.lambda) * (trace + grad_sq_mean));
        case Protocol::FixedLR:
            return std::pow(*cfg.eta / (2.0 * *cfg.lambda) * (trace + grad_sq_mean), 0.25);
        case Protocol::FixedSphere:
            throw std::invalid_argument(
                "predicted_radius_discrete: use lambda_eff_discrete for fixed_sphere");
    }
    throw std::logic_error("predicted_radius_discrete: bad protocol");
}

// lambda_eff = eta_eff (Tr Sigma + E|grad L(w_bar)|^2) / (2 r^2)
inline double lambda_eff_discrete(const ProtocolConfig& cfg, double grad_sq_mean) {
    if (cfg.protocol != Protocol::FixedSphere)
        throw std::invalid_argument("lambda_eff_discrete: fixed_sphere only");
    if (grad_sq_mean < 0.0)
        throw std::invalid_argument("lambda_eff_discrete: negative grad_sq_mean");
    const double trace = cfg.sigma * cfg.sigma * static_cast<double>(cfg.d - 1);
    const double r = *cfg.radius;
    return *cfg.eta_eff / (2.0 * r * r) * (trace + grad_sq_mean);
}

// VMF statistics at kappa = 1/T. Exact closed forms exist for d = 3:
// A_3(k) = coth k - 1/k and C_3(k) = k / (4 pi sinh k); evaluated in log
// space so large kappa does not overflow.
inline VmfStats vmf_stats(double T, std::size_t d, VmfMode mode) {
    if (!(T > 0.0)) throw std::invalid_argument("vmf_stats: T must be positive");
    if (d < 3) throw std::invalid_argument("vmf_stats: d must be at least 3");
    VmfStats out;
    out.kappa = 1.0 / T;
    if (mode == VmfMode::Asymptotic) {
        out.U = 0.5 * static_cast<double>(d - 1) * T;
        out.S_sphere = 0.5 * static_cast<double>(d - 1) * std::log(2.0 * M_PI * M_E * T);
        out.exact = false;
        return out;
    }
    if (d != 3)
        throw std::invalid_argument("vmf_stats: exact mode supports d = 3 only");
    const double k = out.kappa;
    const double em2k = std::exp(-2.0 * k);
    const double one_m = -std::expm1(-2.0 * k);  // 1 - e^{-2k}
    const double a3 = 1.0 + 2.0 * em2k / one_m - 1.0 / k;  // coth k - 1/k
    // -log C_3 = log(4 pi sinh k / k); log sinh k = k - log 2 + log(1 - e^{-2k})
    const double log_sinh = k - std::log(2.0) + std::log1p(-em2k);
    out.U = 1.0 - a3;
    out.S_sphere = std::log(4.0 * M_PI) + log_sinh - std::log(k) - k * a3;
    out.exact = true;
    return out;
}

// F = U - T S, G = F + p V
inline std::pair<double, double> potentials(double U, double S_total, double T, double p,
                                            double V) {
    if (!(T > 0.0)) throw std::invalid_argument("potentials: T must be positive");
    if (!(V > 0.0)) throw std::invalid_argument("potentials: V must be positive");
    const double F = U - T * S_total;
    return {F, F + p * V};
}

// For the VMF stationary family U = (d-1)T/2, so C_V = (d-1)/2 and
// C_p = C_V + R; gamma = 2 independent of d.
inline HeatCapacities heat_capacities(std::size_t d) {
    if (d < 3) throw std::invalid_argument("heat_capacities: d must be at least 3");
    HeatCapacities hc;
    hc.C_V = gas_constant(d);
    hc.C_p = hc.C_V + gas_constant(d);
    hc.gamma = hc.C_p / hc.C_V;
    return hc;
}

// p V^gamma up to a constant factor: eta^{gamma/2} lambda^{1 - gamma/2}.
// Constant-eta paths are adiabats when gamma = 2.
inline double adiabatic_invariant(const ProtocolConfig& cfg, double gamma) {
    if (cfg.protocol != Protocol::FixedLR)
        throw std::invalid_argument("adiabatic_invariant: fixed_lr only");
    if (!(gamma > 1.0)) throw std::invalid_argument("adiabatic_invariant: gamma must exceed 1");
    return std::pow(*cfg.eta, 0.5 * gamma) * std::pow(*cfg.lambda, 1.0 - 0.5 * gamma);
}

// Central-difference residual of T dS - p dV = dU across a three-state
// stencil taken from a smooth one-parameter stationary family.
inline double first_law_residual(const ThermoState& s1, const ThermoState& s2,
                                 const ThermoState& s3) {
    auto monotone = [](double a, double b, double c) {
        return (a <= b && b <= c) || (a >= b && b >= c);
    };
    if (!monotone(s1.T, s2.T, s3.T) || !monotone(s1.V, s2.V, s3.V))
        throw StencilError("first_law_residual: states not monotone along the sweep");
    const double dU = s3.U - s1.U;
    const double dS = s3.S_total - s1.S_total;
    const double dV = s3.V - s1.V;
    return std::abs(dU - s2.T * dS + s2.p * dV);
}

// Analytic VMF stationary state for a configuration: theory prediction of
// every ThermoState field. For the fixed sphere the pressure is the
// ideal-gas effective weight decay T(d-1)/(2V).
inline ThermoState stationary_state_theory(const ProtocolConfig& cfg, VmfMode mode) {
    ThermoState st;
    st.T = temperature(cfg);
    st.R = gas_constant(cfg.d);
    double r_star = 0.0;
    if (cfg.protocol == Protocol::FixedSphere) {
        r_star = *cfg.radius;
        st.V = 0.5 * r_star * r_star;
        st.p = st.T * static_cast<double>(cfg.d - 1) / (2.0 * st.V);
    } else {
        r_star = predicted_radius_sde(cfg);
        st.V = 0.5 * r_star * r_star;
        st.p = *cfg.lambda;
    }
    const VmfStats stats = vmf_stats(st.T, cfg.d, mode);
    st.U = stats.U;
    st.S_sphere = stats.S_sphere;
    st.S_total = stats.S_sphere + static_cast<double>(cfg.d - 1) * std::log(r_star);
    const auto [F, G] = potentials(st.U, st.S_total, st.T, st.p, st.V);
    st.F = F;
    st.G = G;
    return st;
}

}  // namespace sgtherm
