#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "sgtherm/rng.hpp"

namespace sgtherm {

using Vec = std::vector<double>;

inline double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm_sq(const Vec& v) { return dot(v, v); }

inline double norm(const Vec& v) { return std::sqrt(norm_sq(v)); }

inline Vec normalized(const Vec& v) {
    const double n = norm(v);
    if (!(n > 0.0)) throw std::domain_error("normalized: zero-norm vector");
    Vec out(v);
    const double inv = 1.0 / n;
    for (double& x : out) x *= inv;
    return out;
}

// Scale-invariant objective L(w) = 1 + mu.w / |w| with fixed unit direction mu.
struct LossModel {
    Vec mu;

    explicit LossModel(Vec direction) : mu(std::move(direction)) {
        if (mu.size() < 3)
            throw std::invalid_argument("LossModel: d must be at least 3");
        const double n = norm(mu);
        if (!(n > 0.0)) throw std::domain_error("LossModel: mu has zero norm");
        if (std::abs(n - 1.0) > 1e-12) {
            const double inv = 1.0 / n;
            for (double& x : mu) x *= inv;
        }
    }

    static LossModel random(std::size_t d, Rng& rng) {
        return LossModel(rng.unit_vector(d));
    }

    std::size_t dim() const { return mu.size(); }
};

// Unit direction vector; renormalized on construction so norm drift stays
// below 1e-9 across long trajectories.
class Direction {
public:
    explicit Direction(Vec coords) : coords_(std::move(coords)) {
        const double n = norm(coords_);
        if (!(n > 0.0)) throw std::domain_error("Direction: zero-norm vector");
        const double inv = 1.0 / n;
        for (double& x : coords_) x *= inv;
    }

    const Vec& coords() const { return coords_; }
    std::size_t dim() const { return coords_.size(); }

private:
    Vec coords_;
};

// Hyperspherical angles: d-2 polar angles in [0, pi] plus azimuth in [0, 2pi).
struct AngularCoords {
    Vec polar;
    double azimuth = 0.0;

    std::size_t ambient_dim() const { return polar.size() + 2; }
};

inline double loss_value(const LossModel& model, const Vec& w) {
    if (w.size() != model.dim())
        throw std::invalid_argument("loss_value: dimension mismatch");
    const double n = norm(w);
    if (!(n > 0.0)) throw std::domain_error("loss_value: zero-norm input");
    return 1.0 + dot(model.mu, w) / n;
}

// grad L(w) = (mu - (w_bar.mu) w_bar) / |w|; orthogonal to w, scales as 1/|w|.
inline Vec loss_gradient(const LossModel& model, const Vec& w) {
    if (w.size() != model.dim())
        throw std::invalid_argument("loss_gradient: dimension mismatch");
    const double n = norm(w);
    if (!(n > 0.0)) throw std::domain_error("loss_gradient: zero-norm input");
    const double inv_n = 1.0 / n;
    const double c = dot(model.mu, w) * inv_n;  // mu . w_bar
    Vec g(w.size());
    for (std::size_t i = 0; i < w.size(); ++i)
        g[i] = (model.mu[i] - c * w[i] * inv_n) * inv_n;
    return g;
}

inline Vec project_to_sphere(const Vec& w, double radius) {
    if (!(radius > 0.0))
        throw std::invalid_argument("project_to_sphere: radius must be positive");
    const double n = norm(w);
    if (!(n > 0.0)) throw std::domain_error("project_to_sphere: zero-norm input");
    Vec out(w);
    const double s = radius / n;
    for (double& x : out) x *= s;
    return out;
}

// Standard hyperspherical parametrization:
//   x_1 = cos t_1,  x_k = sin t_1 ... sin t_{k-1} cos t_k,
//   x_{d-1} = sin t_1 ... sin t_{d-2} cos phi,  x_d = (...) sin phi.
// At a pole (some t_j in {0, pi}) the downstream angles are underdetermined;
// they are set to 0 deterministically.
inline AngularCoords to_spherical(const Direction& w_bar) {
    const Vec& x = w_bar.coords();
    const std::size_t d = x.size();
    if (d < 3) throw std::invalid_argument("to_spherical: d must be at least 3");

    // tail[k] = sqrt(x_k^2 + ... + x_{d-1}^2), accumulated backward for accuracy
    Vec tail(d + 1, 0.0);
    for (std::size_t k = d; k-- > 0;)
        tail[k] = std::sqrt(x[k] * x[k] + tail[k + 1] * tail[k + 1]);

    AngularCoords angles;
    angles.polar.resize(d - 2);
    bool at_pole = false;
    for (std::size_t k = 0; k < d - 2; ++k) {
        if (at_pole || tail[k] == 0.0) {
            angles.polar[k] = 0.0;
            at_pole = true;
            continue;
        }
        angles.polar[k] = std::atan2(tail[k + 1], x[k]);
        if (tail[k + 1] == 0.0) at_pole = true;
    }
    if (at_pole || tail[d - 2] == 0.0) {
        angles.azimuth = 0.0;
    } else {
        double phi = std::atan2(x[d - 1], x[d - 2]);
        if (phi < 0.0) phi += 2.0 * M_PI;
        if (phi >= 2.0 * M_PI) phi = 0.0;
        angles.azimuth = phi;
    }
    return angles;
}

inline Direction from_spherical(const AngularCoords& angles) {
    const std::size_t d = angles.ambient_dim();
    Vec x(d);
    double sin_prod = 1.0;
    for (std::size_t k = 0; k < d - 2; ++k) {
        const double t = angles.polar[k];
        x[k] = sin_prod * std::cos(t);
        sin_prod *= std::sin(t);
    }
    x[d - 2] = sin_prod * std::cos(angles.azimuth);
    x[d - 1] = sin_prod * std::sin(angles.azimuth);
    return Direction(std::move(x));
}

// log J(t) = sum_{j=1}^{d-2} (d-1-j) log sin t_j; -inf at a degenerate pole.
inline double log_jacobian(const AngularCoords& angles) {
    const std::size_t d = angles.ambient_dim();
    double sum = 0.0;
    for (std::size_t j = 0; j < d - 2; ++j) {
        const double s = std::sin(angles.polar[j]);
        if (!(s > 0.0)) return -std::numeric_limits<double>::infinity();
        sum += static_cast<double>(d - 2 - j) * std::log(s);
    }
    return sum;
}

// sigma * P_{w_bar} * eps with eps ~ N(0, I_d); orthogonal to w_bar,
// E|.|^2 = sigma^2 (d-1).
inline Vec sample_tangent_noise(const Direction& w_bar, double sigma, Rng& rng) {
    if (sigma < 0.0)
        throw std::invalid_argument("sample_tangent_noise: sigma must be nonnegative");
    const Vec& u = w_bar.coords();
    Vec eps(u.size());
    rng.fill_gaussian(eps);
    const double c = dot(u, eps);
    for (std::size_t i = 0; i < u.size(); ++i) eps[i] = sigma * (eps[i] - c * u[i]);
    return eps;
}

}  // namespace sgtherm
