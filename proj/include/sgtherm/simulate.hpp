#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "sgtherm/geometry.hpp"
#include "sgtherm/protocol.hpp"
#include "sgtherm/rng.hpp"

namespace sgtherm {

inline constexpr std::uint64_t kLogStride = 50;
inline constexpr std::size_t kQueueCapacity = 1000;
inline constexpr double kMinNorm = 1e-8;
inline constexpr double kMaxNorm = 1e8;

class InstabilityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Trajectory {
    std::vector<std::pair<std::uint64_t, double>> loss_log;    // every kLogStride
    std::vector<std::pair<std::uint64_t, double>> radius_log;  // every kLogStride
    std::vector<Vec> weight_queue;                // FIFO, capacity kQueueCapacity
    std::vector<std::uint64_t> queue_iterations;  // iteration of each queued weight
    // every post-warm-up decimated weight; the queue is its suffix. Kept so
    // the analysis layer can rebuild the queue content at earlier instants.
    std::vector<Vec> weight_series;
    std::vector<std::uint64_t> series_iterations;
    std::vector<double> lambda_eff_log;           // per step, fixed_sphere only
    std::vector<double> grad_sq_log;              // |grad L(w_bar)|^2 at log instants
    bool diverged = false;
    std::uint64_t completed_iterations = 0;
};

namespace detail {

// Shared step kernel. Draws one standard-normal d-vector, forms the noisy
// gradient g = (mu + sigma*eps - c*w_bar) / |w|, c = w_bar.(mu + sigma*eps),
// and applies the protocol update in place. Returns the lambda_eff sample for
// the fixed-sphere protocol (0 otherwise).
struct StepScratch {
    Vec eps;
    Vec g;
};

inline double step_in_place(Vec& w, const ProtocolConfig& cfg, const LossModel& model,
                            Rng& rng, StepScratch& scratch) {
    const std::size_t d = w.size();
    scratch.eps.resize(d);
    scratch.g.resize(d);
    rng.fill_gaussian(scratch.eps);

    const double r = norm(w);
    if (!(r > 0.0)) throw InstabilityError("step: zero-norm weights");
    const double inv_r = 1.0 / r;

    // b = mu + sigma * eps; g = P_{w_bar} b / r
    double c = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        scratch.eps[i] = model.mu[i] + cfg.sigma * scratch.eps[i];
        c += scratch.eps[i] * w[i] * inv_r;
    }
    for (std::size_t i = 0; i < d; ++i)
        scratch.g[i] = (scratch.eps[i] - c * w[i] * inv_r) * inv_r;

    double lambda_eff_sample = 0.0;
    switch (cfg.protocol) {
        case Protocol::FixedLR: {
            const double eta = *cfg.eta;
            const double decay = 1.0 - eta * *cfg.lambda;
            for (std::size_t i = 0; i < d; ++i)
                w[i] = decay * w[i] - eta * scratch.g[i];
            break;
        }
        case Protocol::FixedELR: {
            const double eta = *cfg.eta_eff * r * r;
            const double decay = 1.0 - eta * *cfg.lambda;
            for (std::size_t i = 0; i < d; ++i)
                w[i] = decay * w[i] - eta * scratch.g[i];
            break;
        }
        case Protocol::FixedSphere: {
            const double radius = *cfg.radius;
            const double eta = *cfg.eta_eff * radius * radius;
            // lambda_eff from the same noisy gradient the step uses:
            // (|w - eta g| - |w|) / (eta |w|), in cancellation-free form.
            const double wg = dot(w, scratch.g);
            const double gg = norm_sq(scratch.g);
            const double delta_sq = -2.0 * eta * wg + eta * eta * gg;
            const double new_norm = std::sqrt(r * r + delta_sq);
            lambda_eff_sample = delta_sq / ((new_norm + r) * eta * r);
            const double scale = radius / new_norm;
            for (std::size_t i = 0; i < d; ++i)
                w[i] = (w[i] - eta * scratch.g[i]) * scale;
            break;
        }
    }

    const double rn = norm(w);
    if (!(rn >= kMinNorm))
        throw InstabilityError("step: weight norm collapsed below 1e-8");
    return lambda_eff_sample;
}

}  // namespace detail

// Eq. update w' = w - eta (grad L(w) + P_{w_bar} sigma eps / |w| + lambda w).
inline Vec step_fixed_lr(const Vec& w, const ProtocolConfig& cfg, const LossModel& model,
                         Rng& rng) {
    if (cfg.protocol != Protocol::FixedLR || !cfg.eta || !cfg.lambda)
        throw std::invalid_argument("step_fixed_lr: config is not fixed_lr");
    Vec out(w);
    detail::StepScratch scratch;
    detail::step_in_place(out, cfg, model, rng, scratch);
    return out;
}

// Same update with eta = eta_eff |w|^2 refreshed every step.
inline Vec step_fixed_elr(const Vec& w, const ProtocolConfig& cfg, const LossModel& model,
                          Rng& rng) {
    if (cfg.protocol != Protocol::FixedELR || !cfg.eta_eff || !cfg.lambda)
        throw std::invalid_argument("step_fixed_elr: config is not fixed_elr");
    Vec out(w);
    detail::StepScratch scratch;
    detail::step_in_place(out, cfg, model, rng, scratch);
    return out;
}

// Noisy gradient step with eta = eta_eff r^2, then projection back to the
// sphere of the configured radius. No weight decay.
inline Vec step_fixed_sphere(const Vec& w, const ProtocolConfig& cfg,
                             const LossModel& model, Rng& rng) {
    if (cfg.protocol != Protocol::FixedSphere || !cfg.eta_eff || !cfg.radius)
        throw std::invalid_argument("step_fixed_sphere: config is not fixed_sphere");
    Vec out(w);
    detail::StepScratch scratch;
    detail::step_in_place(out, cfg, model, rng, scratch);
    return out;
}

// One sample of the effective weight decay induced by the projection,
// (|w - eta grad L_B(w)| - |w|) / (eta |w|) with eta = eta_eff |w|^2.
// Draws its own noise; inside run() the sample reuses the step's draw.
inline double measure_lambda_eff(const Vec& w, const ProtocolConfig& cfg,
                                 const LossModel& model, Rng& rng) {
    if (cfg.protocol != Protocol::FixedSphere || !cfg.eta_eff || !cfg.radius)
        throw std::invalid_argument("measure_lambda_eff: config is not fixed_sphere");
    Vec tmp(w);
    detail::StepScratch scratch;
    return detail::step_in_place(tmp, cfg, model, rng, scratch);
}

// Runs the configured protocol for cfg.iterations steps. Loss and radius are
// logged every kLogStride iterations; weight copies enter the FIFO queue at
// the same stride once the first half of the budget has passed. Deterministic
// for a fixed seed within one build.
inline Trajectory run(const ProtocolConfig& cfg, const LossModel& model) {
    cfg.validate();
    if (model.dim() != cfg.d)
        throw std::invalid_argument("run: model dimension mismatch");

    Rng rng(cfg.seed);
    Vec w;
    if (cfg.w0) {
        w = *cfg.w0;
    } else {
        w = rng.unit_vector(cfg.d);
        if (cfg.protocol == Protocol::FixedSphere)
            for (double& x : w) x *= *cfg.radius;
    }

    Trajectory traj;
    const std::uint64_t total = cfg.iterations;
    const std::uint64_t warmup = total / 2;
    const std::size_t n_logs = static_cast<std::size_t>(total / kLogStride);
    traj.loss_log.reserve(n_logs);
    traj.radius_log.reserve(n_logs);
    traj.grad_sq_log.reserve(n_logs);
    traj.weight_series.reserve((total - warmup) / kLogStride + 1);
    if (cfg.protocol == Protocol::FixedSphere)
        traj.lambda_eff_log.reserve(static_cast<std::size_t>(total));

    detail::StepScratch scratch;

    for (std::uint64_t k = 1; k <= total; ++k) {
        double lambda_eff_sample = 0.0;
        try {
            lambda_eff_sample = detail::step_in_place(w, cfg, model, rng, scratch);
        } catch (const InstabilityError&) {
            traj.diverged = true;
            break;
        }
        if (cfg.protocol == Protocol::FixedSphere)
            traj.lambda_eff_log.push_back(lambda_eff_sample);

        const double r = norm(w);
        if (!(r >= kMinNorm && r <= kMaxNorm)) {
            traj.diverged = true;
            break;
        }

        if (k % kLogStride == 0) {
            const double c = dot(model.mu, w) / r;  // mu . w_bar
            const double loss = 1.0 + c;
            if (!std::isfinite(loss)) {
                traj.diverged = true;
                break;
            }
            traj.loss_log.emplace_back(k, loss);
            traj.radius_log.emplace_back(k, r);
            traj.grad_sq_log.push_back(1.0 - c * c);
            if (k > warmup) {
                traj.series_iterations.push_back(k);
                traj.weight_series.push_back(w);
            }
        }
        traj.completed_iterations = k;
    }

    // final queue = last kQueueCapacity decimated weights
    const std::size_t n_series = traj.weight_series.size();
    const std::size_t q_begin = n_series > kQueueCapacity ? n_series - kQueueCapacity : 0;
    traj.weight_queue.assign(traj.weight_series.begin() + q_begin,
                             traj.weight_series.end());
    traj.queue_iterations.assign(traj.series_iterations.begin() + q_begin,
                                 traj.series_iterations.end());
    return traj;
}

}  // namespace sgtherm
