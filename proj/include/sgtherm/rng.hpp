#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace sgtherm {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Stable per-run seed: hash of (plan seed, cell index, replicate index).
// Keeps sweeps reproducible without storing per-cell seeds.
inline std::uint64_t derive_seed(std::uint64_t plan_seed, std::uint64_t cell_index,
                                 std::uint64_t replicate) {
    std::uint64_t s = plan_seed;
    splitmix64(s);
    s ^= 0x9E3779B97F4A7C15ull * (cell_index + 1);
    splitmix64(s);
    s ^= 0xC2B2AE3D27D4EB4Full * (replicate + 1);
    return splitmix64(s);
}

// Seeded generator owned by exactly one run/worker; never shared.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    double gaussian() { return normal_(gen_); }

    // uniform in [0, 1)
    double uniform() {
        return std::uniform_real_distribution<double>(0.0, 1.0)(gen_);
    }

    void fill_gaussian(std::vector<double>& out) {
        for (double& x : out) x = normal_(gen_);
    }

    // uniform direction on the unit sphere in R^d
    std::vector<double> unit_vector(std::size_t d) {
        if (d == 0) throw std::invalid_argument("unit_vector: d must be positive");
        std::vector<double> v(d);
        while (true) {
            double nsq = 0.0;
            for (double& x : v) {
                x = normal_(gen_);
                nsq += x * x;
            }
            if (nsq > 1e-300) {
                const double inv = 1.0 / std::sqrt(nsq);
                for (double& x : v) x *= inv;
                return v;
            }
        }
    }

    std::mt19937_64& engine() { return gen_; }

private:
    std::mt19937_64 gen_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace sgtherm
