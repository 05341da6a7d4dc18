#include <doctest.h>

#include <cmath>
#include <random>

#include "sgtherm/entropy.hpp"
#include "support/oracles.hpp"

using namespace sgtherm;

namespace {

std::vector<Vec> uniform_cube(std::size_t n, std::size_t m, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Vec> pts(n, Vec(m));
    for (Vec& p : pts)
        for (double& x : p) x = u(gen);
    return pts;
}

std::vector<Vec> gaussian_cloud(std::size_t n, std::size_t m, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> g;
    std::vector<Vec> pts(n, Vec(m));
    for (Vec& p : pts)
        for (double& x : p) x = g(gen);
    return pts;
}

constexpr double kGaussianEntropy1d = 1.4189385332046727;  // 0.5 log(2 pi e)

}  // namespace

TEST_CASE("uniform and Gaussian closed forms, m = 1") {
    const EntropyEstimate u = knn_entropy(SampleSet(uniform_cube(10000, 1, 1), 1));
    CHECK(std::abs(u.value) < 0.05);
    CHECK(u.n_dropped == 0);

    const EntropyEstimate g = knn_entropy(SampleSet(gaussian_cloud(10000, 1, 2), 1));
    CHECK(std::abs(g.value - kGaussianEntropy1d) < 0.05);
}

TEST_CASE("duplicated points are dropped, not fatal") {
    std::vector<Vec> pts = uniform_cube(100, 2, 3);
    pts.push_back(Vec{0.5, 0.5});
    pts.push_back(Vec{0.5, 0.5});
    const EntropyEstimate est = knn_entropy(SampleSet(pts, 2));
    CHECK(est.n_dropped == 2);
    CHECK(est.n_used == 100);
    CHECK(std::isfinite(est.value));
}

TEST_CASE("all-identical input is a degenerate sample") {
    const std::vector<Vec> pts(10, Vec{1.0, 2.0});
    CHECK_THROWS_AS(knn_entropy(SampleSet(pts, 2)), DegenerateSampleError);

    std::vector<Direction> dirs(5, Direction(Vec{0.6, 0.0, 0.8}));
    CHECK_THROWS_AS(sphere_entropy(dirs), DegenerateSampleError);
}

TEST_CASE("translation leaves the estimate unchanged") {
    const std::vector<Vec> pts = gaussian_cloud(500, 2, 7);
    std::vector<Vec> shifted = pts;
    for (Vec& p : shifted) {
        p[0] += 3.25;
        p[1] -= 1.5;
    }
    const double a = knn_entropy(SampleSet(pts, 2)).value;
    const double b = knn_entropy(SampleSet(shifted, 2)).value;
    CHECK(std::abs(a - b) < 1e-10);
}

TEST_CASE("scaling shifts the estimate by exactly m log alpha") {
    const double alpha = 3.7;
    for (std::size_t m : {std::size_t{1}, std::size_t{3}}) {
        const std::vector<Vec> pts = gaussian_cloud(400, m, 11 + m);
        std::vector<Vec> scaled = pts;
        for (Vec& p : scaled)
            for (double& x : p) x *= alpha;
        const double a = knn_entropy(SampleSet(pts, m)).value;
        const double b = knn_entropy(SampleSet(scaled, m)).value;
        CHECK(std::abs(b - a - static_cast<double>(m) * std::log(alpha)) < 1e-10);
    }
}

TEST_CASE("bias shrinks as the sample grows") {
    // Monotone within the 20-seed noise floor: once the bias is resolved to
    // zero (m = 1 already is at N = 100) only the statistical scatter remains.
    for (std::size_t m : {std::size_t{1}, std::size_t{2}, std::size_t{3}}) {
        double prev_bias = std::numeric_limits<double>::infinity();
        double prev_sem = 0.0;
        for (std::size_t n : {std::size_t{100}, std::size_t{1000}, std::size_t{10000}}) {
            double acc = 0.0, acc2 = 0.0;
            for (std::uint64_t seed = 0; seed < 20; ++seed) {
                const double v =
                    knn_entropy(SampleSet(uniform_cube(n, m, 1000 * m + seed), m)).value;
                acc += v;
                acc2 += v * v;
            }
            const double mean = acc / 20.0;
            const double var = std::max(0.0, acc2 / 20.0 - mean * mean);
            const double sem = std::sqrt(var / 19.0 / 20.0);
            const double bias = std::abs(mean);  // true entropy is 0
            CHECK(bias < prev_bias + 2.0 * (prev_sem + sem));
            prev_bias = bias;
            prev_sem = sem;
        }
    }
}

TEST_CASE("uniform sphere entropy equals log of the surface area") {
    const std::vector<Vec> pts = oracles::uniform_sphere_samples(10000, 3, 21);
    std::vector<Direction> dirs;
    dirs.reserve(pts.size());
    for (const Vec& p : pts) dirs.emplace_back(p);
    const EntropyEstimate est = sphere_entropy(dirs);
    CHECK(std::abs(est.value - std::log(4.0 * M_PI)) < 0.05);
}

TEST_CASE("VMF sphere entropy matches the closed form at T = 0.01") {
    // S_exact(kappa = 100) = log(4 pi sinh k / k) - k (coth k - 1/k) = -1.76729...
    const double expected = -1.7672931196;
    oracles::VmfSampler sampler(Vec{0.36, -0.48, 0.8}, 100.0, 5);
    std::vector<Direction> dirs;
    for (int i = 0; i < 10000; ++i) dirs.emplace_back(sampler.sample());
    const EntropyEstimate est = sphere_entropy(dirs);
    CHECK(std::abs(est.value - expected) < 0.1);
}

TEST_CASE("sphere entropy is rotation invariant within Monte Carlo error") {
    const auto rot = oracles::rotation_matrix_3d(0.7, 1.1);
    std::vector<double> deltas;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        oracles::VmfSampler sampler(Vec{0.36, -0.48, 0.8}, 20.0, 100 + seed);
        std::vector<Direction> dirs, rotated;
        for (int i = 0; i < 1000; ++i) {
            const Vec w = sampler.sample();
            dirs.emplace_back(w);
            rotated.emplace_back(oracles::apply_matrix(rot, w));
        }
        deltas.push_back(sphere_entropy(rotated).value - sphere_entropy(dirs).value);
    }
    double mean = 0.0;
    for (double d : deltas) mean += d;
    mean /= static_cast<double>(deltas.size());
    double var = 0.0;
    for (double d : deltas) var += (d - mean) * (d - mean);
    var /= static_cast<double>(deltas.size() - 1);
    const double sem = std::sqrt(var / static_cast<double>(deltas.size()));
    CHECK(std::abs(mean) <= 2.0 * sem + 1e-12);
}

TEST_CASE("total entropy: unit norms reduce to sphere entropy") {
    const std::vector<Vec> pts = oracles::uniform_sphere_samples(500, 3, 33);
    std::vector<Direction> dirs;
    for (const Vec& p : pts) dirs.emplace_back(p);
    CHECK(total_entropy(pts) == doctest::Approx(sphere_entropy(dirs).value).epsilon(1e-12));
}

TEST_CASE("total entropy: scaling all weights adds (d-1) log alpha") {
    const double alpha = 2.6;
    const std::vector<Vec> pts = oracles::uniform_sphere_samples(500, 3, 44);
    std::vector<Vec> scaled = pts;
    for (Vec& p : scaled)
        for (double& x : p) x *= alpha;
    const double base = total_entropy(pts);
    const double grown = total_entropy(scaled);
    CHECK(std::abs(grown - base - 2.0 * std::log(alpha)) < 1e-9);
}
