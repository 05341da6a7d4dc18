#include <doctest.h>

#include <cmath>

#include "sgtherm/thermo.hpp"
#include "support/oracles.hpp"

using namespace sgtherm;

namespace {

ProtocolConfig lr_config(double eta, double lambda, double sigma = 1.0, std::size_t d = 3) {
    ProtocolConfig cfg;
    cfg.protocol = Protocol::FixedLR;
    cfg.eta = eta;
    cfg.lambda = lambda;
    cfg.sigma = sigma;
    cfg.d = d;
    return cfg;
}

ProtocolConfig elr_config(double eta_eff, double lambda, double sigma = 1.0,
                          std::size_t d = 3) {
    ProtocolConfig cfg;
    cfg.protocol = Protocol::FixedELR;
    cfg.eta_eff = eta_eff;
    cfg.lambda = lambda;
    cfg.sigma = sigma;
    cfg.d = d;
    return cfg;
}

ProtocolConfig sphere_config(double eta_eff, double radius, double sigma = 1.0,
                             std::size_t d = 3) {
    ProtocolConfig cfg;
    cfg.protocol = Protocol::FixedSphere;
    cfg.eta_eff = eta_eff;
    cfg.radius = radius;
    cfg.sigma = sigma;
    cfg.d = d;
    return cfg;
}

}  // namespace

TEST_CASE("temperature per protocol") {
    CHECK(temperature(elr_config(1e-2, 1e-2)) == doctest::Approx(0.005).epsilon(1e-12));
    CHECK(temperature(sphere_config(1e-2, 1.0)) == doctest::Approx(0.005).epsilon(1e-12));
    CHECK(temperature(lr_config(1e-2, 1e-2)) == doctest::Approx(0.005).epsilon(1e-12));

    // fixed LR temperature depends on eta*lambda only
    for (double c : {0.3, 2.0, 7.5}) {
        const double base = temperature(lr_config(1e-2, 1e-2));
        CHECK(temperature(lr_config(1e-2 * c, 1e-2 / c)) ==
              doctest::Approx(base).epsilon(1e-12));
    }
}

TEST_CASE("SDE stationary radius and the ideal gas law") {
    CHECK(predicted_radius_sde(elr_config(1e-2, 1e-2)) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(predicted_radius_sde(lr_config(1e-2, 1e-2)) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(predicted_radius_sde(sphere_config(1e-2, 1.0)), std::invalid_argument);

    // p V = R T with V = r*^2 / 2 across a grid of configs
    for (double a : {1e-3, 3.1e-3, 1e-2, 4.7e-2, 1e-1}) {
        for (double l : {1e-3, 2.3e-3, 1e-2, 1e-1}) {
            for (const ProtocolConfig& cfg : {lr_config(a, l, 1.3, 5), elr_config(a, l, 0.8, 4)}) {
                const double r_star = predicted_radius_sde(cfg);
                const double V = 0.5 * r_star * r_star;
                const double R = gas_constant(cfg.d);
                CHECK(*cfg.lambda * V ==
                      doctest::Approx(R * temperature(cfg)).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("discretization-corrected radius") {
    const ProtocolConfig cfg = lr_config(1e-2, 1e-2);
    CHECK(predicted_radius_discrete(cfg, 0.0) ==
          doctest::Approx(predicted_radius_sde(cfg)).epsilon(1e-15));
    CHECK(predicted_radius_discrete(cfg, 0.2) == doctest::Approx(1.0241137).epsilon(1e-6));

    double prev = 0.0;
    for (double g2 : {0.0, 0.1, 0.5, 1.0, 2.0}) {
        const double r = predicted_radius_discrete(cfg, g2);
        CHECK(r > prev);
        prev = r;
    }
    CHECK_THROWS_AS(predicted_radius_discrete(sphere_config(1e-2, 1.0), 0.0),
                    std::invalid_argument);
}

TEST_CASE("discrete effective weight decay on the sphere") {
    CHECK(lambda_eff_discrete(sphere_config(1e-2, 1.0), 0.0) ==
          doctest::Approx(0.01).epsilon(1e-12));
    CHECK(lambda_eff_discrete(sphere_config(1e-2, 1.0), 2.0) ==
          doctest::Approx(0.02).epsilon(1e-12));
    // scales as 1/r^2
    CHECK(lambda_eff_discrete(sphere_config(1e-2, 0.5), 0.0) ==
          doctest::Approx(0.04).epsilon(1e-12));
    CHECK_THROWS_AS(lambda_eff_discrete(lr_config(1e-2, 1e-2), 0.0), std::invalid_argument);
}

TEST_CASE("VMF asymptotic statistics") {
    const VmfStats s = vmf_stats(0.005, 3, VmfMode::Asymptotic);
    CHECK(s.U == doctest::Approx(0.005).epsilon(1e-12));
    CHECK(s.S_sphere == doctest::Approx(-2.4604403001).epsilon(1e-9));
    CHECK_FALSE(s.exact);
}

TEST_CASE("VMF exact closed form, d = 3") {
    const VmfStats s = vmf_stats(0.005, 3, VmfMode::Exact);
    // U = 1 - coth(200) + 1/200
    CHECK(std::abs(s.U - 0.005) < 1e-6);
    CHECK(s.exact);
    CHECK_THROWS_AS(vmf_stats(0.005, 4, VmfMode::Exact), std::invalid_argument);
    CHECK_THROWS_AS(vmf_stats(0.0, 3, VmfMode::Exact), std::invalid_argument);
}

TEST_CASE("VMF exact vs asymptotic at low temperature") {
    for (double kappa : {100.0, 200.0, 1000.0}) {
        const VmfStats ex = vmf_stats(1.0 / kappa, 3, VmfMode::Exact);
        const VmfStats as = vmf_stats(1.0 / kappa, 3, VmfMode::Asymptotic);
        CHECK(std::abs(ex.U - as.U) < 1e-4);
        CHECK(std::abs(ex.S_sphere - as.S_sphere) < 1e-3);
    }
}

TEST_CASE("VMF exact statistics match independent quadrature") {
    for (double kappa : {1.0, 5.0, 50.0, 200.0}) {
        const VmfStats ex = vmf_stats(1.0 / kappa, 3, VmfMode::Exact);
        const oracles::VmfQuadrature q = oracles::vmf_quadrature_d3(kappa);
        CHECK(std::abs(ex.U - q.U) < 1e-6);
        CHECK(std::abs(ex.S_sphere - q.S) < 1e-6);
    }
}

TEST_CASE("VMF exact statistics decrease monotonically in kappa") {
    double prev_u = std::numeric_limits<double>::infinity();
    double prev_s = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 60; ++i) {
        const double kappa = std::pow(10.0, 0.05 * i);  // 1 .. 10^3
        const VmfStats s = vmf_stats(1.0 / kappa, 3, VmfMode::Exact);
        CHECK(s.U < prev_u);
        CHECK(s.S_sphere < prev_s);
        CHECK(s.U > 0.0);
        CHECK(s.U <= 1.0);
        prev_u = s.U;
        prev_s = s.S_sphere;
    }
}

TEST_CASE("potentials and their identity") {
    const auto [F, G] = potentials(0.005, -2.458, 0.005, 1e-2, 0.5);
    CHECK(F == doctest::Approx(0.01729).epsilon(1e-3));
    CHECK(G == doctest::Approx(0.02229).epsilon(1e-3));

    Rng rng(9);
    for (int rep = 0; rep < 50; ++rep) {
        const double U = rng.uniform(), S = 4.0 * rng.uniform() - 2.0;
        const double T = 0.001 + rng.uniform(), p = rng.uniform(), V = 0.1 + rng.uniform();
        const auto [f, g] = potentials(U, S, T, p, V);
        CHECK(g - f == doctest::Approx(p * V).epsilon(1e-12));
    }
    const auto [f0, g0] = potentials(0.1, 1.0, 0.5, 0.0, 1.0);
    CHECK(f0 == g0);
    CHECK_THROWS_AS(potentials(0.1, 1.0, 0.0, 0.1, 1.0), std::invalid_argument);
}

TEST_CASE("heat capacities") {
    const HeatCapacities hc = heat_capacities(3);
    CHECK(hc.C_V == doctest::Approx(1.0));
    CHECK(hc.C_p == doctest::Approx(2.0));
    CHECK(hc.gamma == doctest::Approx(2.0));
    for (std::size_t d = 3; d <= 10; ++d) {
        const HeatCapacities h = heat_capacities(d);
        CHECK(h.C_p - h.C_V == doctest::Approx(0.5 * (d - 1)).epsilon(1e-12));
        CHECK(h.gamma == doctest::Approx(2.0).epsilon(1e-12));
        CHECK(h.gamma > 1.0);
    }
}

TEST_CASE("adiabatic invariant reduces to eta at gamma = 2") {
    CHECK(adiabatic_invariant(lr_config(1e-2, 1e-3), 2.0) ==
          doctest::Approx(1e-2).epsilon(1e-12));
    CHECK(adiabatic_invariant(lr_config(1e-2, 1e-1), 2.0) ==
          doctest::Approx(adiabatic_invariant(lr_config(1e-2, 1e-3), 2.0)).epsilon(1e-12));
    CHECK_THROWS_AS(adiabatic_invariant(elr_config(1e-2, 1e-2), 2.0), std::invalid_argument);
}

TEST_CASE("first law on analytic stationary families") {
    const double ratio = std::pow(10.0, 1.0 / 8.0);

    // lambda sweep at fixed eta
    auto lam_state = [&](double lambda) {
        return stationary_state_theory(lr_config(1e-2, lambda), VmfMode::Asymptotic);
    };
    const ThermoState l1 = lam_state(1e-2 / ratio);
    const ThermoState l2 = lam_state(1e-2);
    const ThermoState l3 = lam_state(1e-2 * ratio);
    const double res_l = first_law_residual(l1, l2, l3);
    CHECK(res_l / std::abs(l3.U - l1.U) < 0.05);

    // eta sweep at fixed lambda
    auto eta_state = [&](double eta) {
        return stationary_state_theory(lr_config(eta, 1e-2), VmfMode::Asymptotic);
    };
    const ThermoState e1 = eta_state(1e-2 / ratio);
    const ThermoState e2 = eta_state(1e-2);
    const ThermoState e3 = eta_state(1e-2 * ratio);
    CHECK(first_law_residual(e1, e2, e3) / std::abs(e3.U - e1.U) < 0.05);

    // degenerate constant stencil
    CHECK(first_law_residual(l2, l2, l2) == doctest::Approx(0.0));
    // reversal invariance
    CHECK(first_law_residual(l3, l2, l1) == doctest::Approx(res_l).epsilon(1e-12));
    // non-monotone parametrization
    CHECK_THROWS_AS(first_law_residual(e1, e3, e2), StencilError);
}

TEST_CASE("Gibbs energy decomposition identity") {
    Rng rng(31);
    for (int rep = 0; rep < 50; ++rep) {
        const double eta = std::pow(10.0, -3.0 + 2.0 * rng.uniform());
        const double lambda = std::pow(10.0, -3.0 + 2.0 * rng.uniform());
        const ThermoState st = stationary_state_theory(lr_config(eta, lambda), VmfMode::Asymptotic);
        // G = [U - T S_sphere] - R T log(2V) + p V
        const double lhs = st.G;
        const double rhs = st.U - st.T * st.S_sphere - st.R * st.T * std::log(2.0 * st.V) +
                           st.p * st.V;
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
        CHECK(st.G - st.F == doctest::Approx(st.p * st.V).epsilon(1e-12));
    }
}

TEST_CASE("V-dependent Gibbs part is minimized at V = RT/p") {
    const double T = 0.007, p = 3e-3, R = 1.0;
    const double v_star = R * T / p;
    double best_v = 0.0, best = std::numeric_limits<double>::infinity();
    std::vector<double> grid;
    for (int i = 0; i <= 400; ++i) grid.push_back(v_star * std::pow(10.0, -2.0 + 4.0 * i / 400.0));
    for (double V : grid) {
        const double f = -R * T * std::log(2.0 * V) + p * V;
        if (f < best) {
            best = f;
            best_v = V;
        }
    }
    // argmin lands within one grid cell of RT/p
    CHECK(std::abs(std::log10(best_v / v_star)) <= 4.0 / 400.0 + 1e-12);
}
