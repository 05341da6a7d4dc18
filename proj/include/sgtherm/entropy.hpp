#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "sgtherm/geometry.hpp"

namespace sgtherm {

inline constexpr double kEulerGamma = 0.5772156649015329;
inline constexpr double kDegenerateDistance = 1e-12;

class DegenerateSampleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SampleSet {
    std::vector<Vec> points;
    std::size_t dim = 0;

    SampleSet(std::vector<Vec> pts, std::size_t m) : points(std::move(pts)), dim(m) {
        if (points.size() < 2)
            throw std::invalid_argument("SampleSet: need at least 2 samples");
        if (dim < 1) throw std::invalid_argument("SampleSet: dimension must be >= 1");
        for (const Vec& p : points) {
            if (p.size() != dim)
                throw std::invalid_argument("SampleSet: inconsistent dimensions");
            for (double x : p)
                if (!std::isfinite(x))
                    throw std::invalid_argument("SampleSet: non-finite sample");
        }
    }
};

struct EntropyEstimate {
    double value = 0.0;
    std::size_t n_used = 0;
    std::size_t n_dropped = 0;
};

namespace detail {

inline double dist_sq(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double diff = a[i] - b[i];
        s += diff * diff;
    }
    return s;
}

// Exact brute-force nearest-neighbor distances over the index subset.
inline std::vector<double> nn_distances(const std::vector<Vec>& pts,
                                        const std::vector<std::size_t>& idx) {
    std::vector<double> nn(idx.size(), std::numeric_limits<double>::infinity());
    for (std::size_t a = 0; a < idx.size(); ++a) {
        for (std::size_t b = a + 1; b < idx.size(); ++b) {
            const double dsq = dist_sq(pts[idx[a]], pts[idx[b]]);
            if (dsq < nn[a]) nn[a] = dsq;
            if (dsq < nn[b]) nn[b] = dsq;
        }
    }
    for (double& d : nn) d = std::sqrt(d);
    return nn;
}

// C(N, d) = log(N-1) - log Gamma(d/2 + 1) + (d/2) log pi + gamma_Euler
inline double kl_constant(std::size_t n, std::size_t m) {
    const double half_m = 0.5 * static_cast<double>(m);
    return std::log(static_cast<double>(n - 1)) - std::lgamma(half_m + 1.0) +
           half_m * std::log(M_PI) + kEulerGamma;
}

}  // namespace detail

// Nearest-neighbor differential entropy (nats). Samples closer than
// kDegenerateDistance to their nearest neighbor are dropped before the
// estimate; log zeta diverges there and duplicates have probability zero
// under continuous dynamics.
inline EntropyEstimate knn_entropy(const SampleSet& samples) {
    const std::size_t n_total = samples.points.size();
    std::vector<std::size_t> idx(n_total);
    for (std::size_t i = 0; i < n_total; ++i) idx[i] = i;

    std::vector<double> nn = detail::nn_distances(samples.points, idx);

    std::vector<std::size_t> kept;
    kept.reserve(n_total);
    for (std::size_t i = 0; i < n_total; ++i)
        if (nn[i] >= kDegenerateDistance) kept.push_back(i);

    if (kept.size() < 2)
        throw DegenerateSampleError("knn_entropy: fewer than 2 distinct samples");

    if (kept.size() != n_total) nn = detail::nn_distances(samples.points, kept);

    double sum_log = 0.0;
    for (std::size_t a = 0; a < kept.size(); ++a) sum_log += std::log(nn[a]);

    const std::size_t n = kept.size();
    const double m = static_cast<double>(samples.dim);
    EntropyEstimate est;
    est.value = m / static_cast<double>(n) * sum_log + detail::kl_constant(n, samples.dim);
    est.n_used = n;
    est.n_dropped = n_total - n;
    return est;
}

// Entropy on the unit sphere: estimate in angle space and correct by the
// expected log-Jacobian. Samples sitting exactly at a coordinate pole
// (log J = -inf) are dropped before both terms.
inline EntropyEstimate sphere_entropy(const std::vector<Direction>& directions) {
    if (directions.size() < 2)
        throw DegenerateSampleError("sphere_entropy: need at least 2 samples");
    const std::size_t d = directions.front().dim();
    if (d < 3) throw std::invalid_argument("sphere_entropy: d must be at least 3");

    std::vector<Vec> angles;
    angles.reserve(directions.size());
    double sum_log_jac = 0.0;
    std::size_t pole_drops = 0;
    for (const Direction& dir : directions) {
        if (dir.dim() != d)
            throw std::invalid_argument("sphere_entropy: inconsistent dimensions");
        const AngularCoords coords = to_spherical(dir);
        const double log_jac = log_jacobian(coords);
        if (!std::isfinite(log_jac)) {
            ++pole_drops;
            continue;
        }
        Vec theta(coords.polar);
        theta.push_back(coords.azimuth);
        angles.push_back(std::move(theta));
        sum_log_jac += log_jac;
    }
    if (angles.size() < 2)
        throw DegenerateSampleError("sphere_entropy: fewer than 2 usable samples");

    const double mean_log_jac = sum_log_jac / static_cast<double>(angles.size());
    EntropyEstimate est = knn_entropy(SampleSet(std::move(angles), d - 1));
    est.value += mean_log_jac;
    est.n_dropped += pole_drops;
    return est;
}

// Total entropy of the weight distribution:
// S(w) = S_{sphere}(w_bar) + (d-1) log E|w|.
inline double total_entropy(const std::vector<Vec>& weights) {
    if (weights.size() < 2)
        throw DegenerateSampleError("total_entropy: need at least 2 samples");
    const std::size_t d = weights.front().size();
    std::vector<Direction> dirs;
    dirs.reserve(weights.size());
    double mean_norm = 0.0;
    for (const Vec& w : weights) {
        if (w.size() != d)
            throw std::invalid_argument("total_entropy: inconsistent dimensions");
        mean_norm += norm(w);
        dirs.emplace_back(w);  // throws on zero norm
    }
    mean_norm /= static_cast<double>(weights.size());
    const EntropyEstimate sphere = sphere_entropy(dirs);
    return sphere.value + static_cast<double>(d - 1) * std::log(mean_norm);
}

}  // namespace sgtherm
