#include <doctest.h>

#include <cmath>

#include "sgtherm/geometry.hpp"
#include "support/oracles.hpp"

using namespace sgtherm;

namespace {

LossModel model3() { return LossModel(Vec{0.36, -0.48, 0.8}); }

}  // namespace

TEST_CASE("loss value at the poles of mu") {
    const LossModel m = model3();
    CHECK(loss_value(m, m.mu) == doctest::Approx(2.0).epsilon(1e-12));
    Vec neg(m.mu);
    for (double& x : neg) x = -x;
    CHECK(loss_value(m, neg) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("scale invariance of the loss") {
    const LossModel m = model3();
    Rng rng(11);
    for (int rep = 0; rep < 20; ++rep) {
        Vec w = rng.unit_vector(3);
        for (double& x : w) x = 2.0 * x + 0.1;
        const double base = loss_value(m, w);
        for (double alpha : {0.1, 1.0, 10.0}) {
            Vec scaled(w);
            for (double& x : scaled) x *= alpha;
            CHECK(std::abs(loss_value(m, scaled) - base) < 1e-12);
        }
    }
}

TEST_CASE("loss and gradient reject the origin") {
    const LossModel m = model3();
    const Vec zero(3, 0.0);
    CHECK_THROWS_AS(loss_value(m, zero), std::domain_error);
    CHECK_THROWS_AS(loss_gradient(m, zero), std::domain_error);
    CHECK_THROWS_AS(project_to_sphere(zero, 1.0), std::domain_error);
}

TEST_CASE("gradient vanishes at the minimum and stays orthogonal") {
    const LossModel m = model3();
    Vec neg(m.mu);
    for (double& x : neg) x = -x;
    for (double g : loss_gradient(m, neg)) CHECK(std::abs(g) < 1e-15);

    Rng rng(5);
    for (int rep = 0; rep < 50; ++rep) {
        Vec w = rng.unit_vector(3);
        for (double& x : w) x *= 3.0;
        const Vec g = loss_gradient(m, w);
        CHECK(std::abs(dot(w, g)) < 1e-12);

        Vec w2(w);
        for (double& x : w2) x *= 2.0;
        const Vec g2 = loss_gradient(m, w2);
        CHECK(norm(g2) == doctest::Approx(norm(g) / 2.0).epsilon(1e-12));
    }
}

TEST_CASE("gradient matches central finite differences") {
    const LossModel m = model3();
    Rng rng(17);
    auto f = [&m](const Vec& w) { return loss_value(m, w); };
    for (int rep = 0; rep < 100; ++rep) {
        Vec w = rng.unit_vector(3);
        for (double& x : w) x *= 0.5 + 2.0 * rep / 100.0;
        const Vec g = loss_gradient(m, w);
        const Vec fd = oracles::finite_difference_gradient(f, w, 1e-6);
        const double scale = std::max(norm(g), 1e-3);
        for (std::size_t i = 0; i < 3; ++i)
            CHECK(std::abs(g[i] - fd[i]) / scale < 1e-5);
    }
}

TEST_CASE("projection onto a sphere") {
    Rng rng(3);
    const Vec e1{1.0, 0.0, 0.0};
    Vec two_e1{2.0, 0.0, 0.0};
    const Vec p = project_to_sphere(two_e1, 1.0);
    for (std::size_t i = 0; i < 3; ++i)
        CHECK(p[i] == doctest::Approx(e1[i]).epsilon(1e-15));

    for (int rep = 0; rep < 20; ++rep) {
        Vec w = rng.unit_vector(3);
        const Vec same = project_to_sphere(w, 1.0);
        for (std::size_t i = 0; i < 3; ++i)
            CHECK(same[i] == doctest::Approx(w[i]).epsilon(1e-12));
        for (double& x : w) x *= 7.3;
        CHECK(norm(project_to_sphere(w, 2.5)) == doctest::Approx(2.5).epsilon(1e-12));
    }
}

TEST_CASE("spherical coordinates of axis-aligned directions, d = 3") {
    const AngularCoords px = to_spherical(Direction(Vec{1.0, 0.0, 0.0}));
    CHECK(px.polar[0] == doctest::Approx(0.0));
    CHECK(px.azimuth == doctest::Approx(0.0));  // pole convention

    const AngularCoords py = to_spherical(Direction(Vec{0.0, 1.0, 0.0}));
    CHECK(py.polar[0] == doctest::Approx(M_PI / 2).epsilon(1e-14));
    CHECK(py.azimuth == doctest::Approx(0.0));

    const AngularCoords nz = to_spherical(Direction(Vec{0.0, 0.0, -1.0}));
    CHECK(nz.polar[0] == doctest::Approx(M_PI / 2).epsilon(1e-14));
    CHECK(nz.azimuth == doctest::Approx(3.0 * M_PI / 2).epsilon(1e-14));
}

TEST_CASE("spherical round trip across dimensions") {
    for (std::size_t d : {std::size_t{3}, std::size_t{5}, std::size_t{10}}) {
        Rng rng(100 + d);
        for (int rep = 0; rep < 1000; ++rep) {
            const Direction dir(rng.unit_vector(d));
            const Direction back = from_spherical(to_spherical(dir));
            for (std::size_t i = 0; i < d; ++i)
                CHECK(std::abs(back.coords()[i] - dir.coords()[i]) < 1e-9);
        }
    }
}

TEST_CASE("log Jacobian values and pole sentinel") {
    AngularCoords a;
    a.polar = {M_PI / 2};
    a.azimuth = 0.0;
    CHECK(log_jacobian(a) == doctest::Approx(0.0));

    AngularCoords b;
    b.polar = {M_PI / 2, M_PI / 6};
    b.azimuth = 1.0;
    CHECK(log_jacobian(b) == doctest::Approx(std::log(0.5)).epsilon(1e-12));

    AngularCoords pole;
    pole.polar = {0.0};
    pole.azimuth = 0.0;
    CHECK(log_jacobian(pole) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("Jacobian integrates to the sphere area, d = 3") {
    // total area of S^2: int J dtheta dphi = 2 pi * int_0^pi sin = 4 pi
    const double integral =
        2.0 * M_PI * oracles::integrate([](double t) {
            AngularCoords a;
            a.polar = {t};
            return t <= 0.0 || t >= M_PI ? 0.0 : std::exp(log_jacobian(a));
        }, 0.0, M_PI, 1e-10);
    CHECK(integral == doctest::Approx(4.0 * M_PI).epsilon(1e-6));
}

TEST_CASE("tangent noise is orthogonal with the right scale") {
    Rng rng(23);
    const Direction dir(Vec{0.6, 0.0, 0.8});
    for (int rep = 0; rep < 100; ++rep) {
        const Vec s = sample_tangent_noise(dir, 1.7, rng);
        CHECK(std::abs(dot(dir.coords(), s)) < 1e-10);
    }

    const Vec zero_noise = sample_tangent_noise(dir, 0.0, rng);
    for (double x : zero_noise) CHECK(x == 0.0);

    // E |sigma P eps|^2 = sigma^2 (d - 1) = 2 for sigma = 1, d = 3
    double acc = 0.0;
    const int n = 100000;
    for (int rep = 0; rep < n; ++rep) acc += norm_sq(sample_tangent_noise(dir, 1.0, rng));
    CHECK(acc / n == doctest::Approx(2.0).epsilon(0.01));
}

TEST_CASE("LossModel validates dimension and normalizes mu") {
    CHECK_THROWS_AS(LossModel(Vec{1.0, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(LossModel(Vec{0.0, 0.0, 0.0}), std::domain_error);
    const LossModel m(Vec{2.0, 0.0, 0.0});
    CHECK(norm(m.mu) == doctest::Approx(1.0).epsilon(1e-12));
}
