#pragma once

#include <atomic>
#include <chrono>
#include <optional>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "sgtherm/entropy.hpp"
#include "sgtherm/plan.hpp"
#include "sgtherm/results.hpp"
#include "sgtherm/simulate.hpp"
#include "sgtherm/thermo.hpp"

namespace sgtherm {

// Entropy snapshots are spaced like the loss/radius logging: an estimate
// every kEntropyStride iterations over the queue content at that instant,
// with the stationary value the mean of the last kEntropyWindows snapshots.
inline constexpr std::uint64_t kEntropyStride = 40'000;
inline constexpr std::size_t kEntropyWindows = 10;

namespace detail {

struct EntropySummary {
    std::optional<double> S_sphere;
    std::optional<double> S_total;
    std::size_t n_dropped = 0;
};

inline std::optional<std::pair<EntropyEstimate, double>> window_entropy(
    const Trajectory& traj, std::size_t begin, std::size_t end, std::size_t d) {
    if (end - begin < 2) return std::nullopt;
    std::vector<Direction> dirs;
    dirs.reserve(end - begin);
    double mean_norm = 0.0;
    for (std::size_t k = begin; k < end; ++k) {
        mean_norm += norm(traj.weight_series[k]);
        dirs.emplace_back(traj.weight_series[k]);
    }
    mean_norm /= static_cast<double>(end - begin);
    try {
        const EntropyEstimate sphere = sphere_entropy(dirs);
        const double total =
            sphere.value + static_cast<double>(d - 1) * std::log(mean_norm);
        return std::make_pair(sphere, total);
    } catch (const DegenerateSampleError&) {
        return std::nullopt;
    }
}

// Mean of the last kEntropyWindows snapshot estimates; falls back to a single
// estimate over the final queue when the run is too short for snapshots.
inline EntropySummary entropy_summary(const Trajectory& traj, const ProtocolConfig& cfg) {
    EntropySummary out;
    const std::size_t n_series = traj.weight_series.size();
    if (n_series < 2) return out;

    struct Snapshot {
        double sphere, total;
        std::size_t dropped;
    };
    std::vector<Snapshot> snapshots;
    for (std::size_t end = 1; end <= n_series; ++end) {
        const std::uint64_t iter = traj.series_iterations[end - 1];
        if (iter % kEntropyStride != 0) continue;
        // queue content at this instant: the last kQueueCapacity entries
        const std::size_t lo = end > kQueueCapacity ? end - kQueueCapacity : 0;
        if (const auto est = window_entropy(traj, lo, end, cfg.d))
            snapshots.push_back({est->first.value, est->second, est->first.n_dropped});
    }

    if (snapshots.empty()) {
        const std::size_t lo =
            n_series > kQueueCapacity ? n_series - kQueueCapacity : 0;
        if (const auto est = window_entropy(traj, lo, n_series, cfg.d)) {
            out.S_sphere = est->first.value;
            out.S_total = est->second;
            out.n_dropped = est->first.n_dropped;
        }
        return out;
    }

    const std::size_t use = std::min(snapshots.size(), kEntropyWindows);
    double sphere = 0.0, total = 0.0;
    std::size_t dropped = 0;
    for (std::size_t k = snapshots.size() - use; k < snapshots.size(); ++k) {
        sphere += snapshots[k].sphere;
        total += snapshots[k].total;
        dropped += snapshots[k].dropped;
    }
    out.S_sphere = sphere / static_cast<double>(use);
    out.S_total = total / static_cast<double>(use);
    out.n_dropped = dropped;
    return out;
}

}  // namespace detail

// Stationary averages per the run's logging windows: the last
// min(5000, n_logs/2) loss/radius logs, never reaching before the midpoint.
inline StationaryStats stationary_stats(const Trajectory& traj, const ProtocolConfig& cfg) {
    StationaryStats st;
    st.diverged = traj.diverged;
    if (traj.diverged) return st;

    const std::size_t n_logs = traj.loss_log.size();
    if (n_logs == 0) {
        st.diverged = false;
        st.sigma2_emp = cfg.sigma * cfg.sigma;
        return st;
    }
    const std::size_t window = std::min<std::size_t>(5000, std::max<std::size_t>(1, n_logs / 2));
    const std::size_t begin = n_logs - window;

    double u = 0.0, r = 0.0, g2 = 0.0;
    for (std::size_t k = begin; k < n_logs; ++k) {
        u += traj.loss_log[k].second;
        r += traj.radius_log[k].second;
        g2 += traj.grad_sq_log[k];
    }
    st.U_mean = u / static_cast<double>(window);
    st.r_emp = r / static_cast<double>(window);
    st.grad_sq_mean = g2 / static_cast<double>(window);
    st.sigma2_emp = cfg.sigma * cfg.sigma;

    if (cfg.protocol == Protocol::FixedSphere && !traj.lambda_eff_log.empty()) {
        // same step range as the log window: steps in
        // (iter(first windowed log) - stride, iter(last log)]
        const std::uint64_t first_iter = traj.loss_log[begin].first;
        const std::uint64_t last_iter = traj.loss_log.back().first;
        const std::uint64_t from = first_iter - kLogStride;  // exclusive
        double acc = 0.0;
        std::uint64_t count = 0;
        for (std::uint64_t s = from + 1; s <= last_iter; ++s) {
            acc += traj.lambda_eff_log[static_cast<std::size_t>(s - 1)];
            ++count;
        }
        if (count > 0) st.lambda_eff_emp = acc / static_cast<double>(count);
    }

    const detail::EntropySummary entropy = detail::entropy_summary(traj, cfg);
    st.S_sphere = entropy.S_sphere;
    st.S_total = entropy.S_total;
    st.n_dropped = entropy.n_dropped;
    return st;
}

namespace detail {

inline ResultRow make_result_row(const ExperimentPlan& plan, const ProtocolConfig& cfg,
                                 const StationaryStats& st) {
    ResultRow row;
    row.protocol = protocol_name(cfg.protocol);
    row.eta = cfg.eta;
    row.eta_eff = cfg.eta_eff;
    row.lambda = cfg.lambda;
    row.radius_fixed = cfg.radius;
    row.sigma = cfg.sigma;
    row.d = cfg.d;
    row.iterations = cfg.iterations;
    row.seed = cfg.seed;
    row.diverged = st.diverged;
    row.T_theory = temperature(cfg);
    if (cfg.protocol != Protocol::FixedSphere)
        row.r_star_sde = predicted_radius_sde(cfg);
    if (st.diverged) return row;
    (void)plan;

    row.U_mean = st.U_mean;
    row.r_emp = st.r_emp;
    row.sigma2_emp = st.sigma2_emp;
    row.grad_sq_mean = st.grad_sq_mean;
    row.lambda_eff_emp = st.lambda_eff_emp;
    row.S_sphere = st.S_sphere;
    row.S_total = st.S_total;
    row.n_dropped = st.n_dropped;
    if (cfg.protocol != Protocol::FixedSphere)
        row.r_star_discr = predicted_radius_discrete(cfg, st.grad_sq_mean);
    if (st.S_total) {
        const double T = *row.T_theory;
        const double V = 0.5 * st.r_emp * st.r_emp;
        const double p = cfg.protocol == Protocol::FixedSphere
                             ? st.lambda_eff_emp.value_or(0.0)
                             : *cfg.lambda;
        const auto [F, G] = potentials(st.U_mean, *st.S_total, T, p, V);
        row.F = F;
        row.G = G;
    }
    return row;
}

}  // namespace detail

inline LossModel plan_model(const ExperimentPlan& plan) {
    if (plan.mu) return LossModel(*plan.mu);
    Rng rng(plan.mu_seed.value_or(1));
    return LossModel::random(plan.d, rng);
}

inline ProtocolConfig cell_config(const ExperimentPlan& plan, std::size_t i, std::size_t j,
                                  std::size_t replicate) {
    ProtocolConfig cfg;
    cfg.protocol = plan.protocol;
    cfg.sigma = plan.sigma;
    cfg.d = plan.d;
    cfg.iterations = plan.iterations;
    const double v1 = plan.axis1.values()[i];
    const double v2 = plan.axis2.values()[j];
    switch (plan.protocol) {
        case Protocol::FixedLR:
            cfg.eta = v1;
            cfg.lambda = v2;
            break;
        case Protocol::FixedELR:
            cfg.eta_eff = v1;
            cfg.lambda = v2;
            break;
        case Protocol::FixedSphere:
            cfg.eta_eff = v1;
            cfg.radius = v2;
            break;
    }
    const std::size_t cell_index = i * plan.axis2.count + j;
    cfg.seed = derive_seed(plan.seed, cell_index, replicate);
    return cfg;
}

// Executes every (cell, replicate) and returns rows sorted by cell index then
// replicate, independent of worker scheduling. A replicate that throws is
// reported as a diverged row; the sweep continues.
inline std::vector<ResultRow> execute_sweep(const ExperimentPlan& plan) {
    plan.validate();
    const LossModel model = plan_model(plan);
    const std::size_t n_cells = plan.axis1.count * plan.axis2.count;
    const std::size_t n_tasks = n_cells * plan.seeds_per_cell;
    std::vector<ResultRow> rows(n_tasks);

    std::size_t n_workers = plan.workers != 0
                                ? plan.workers
                                : std::max(1u, std::thread::hardware_concurrency());
    n_workers = std::min(n_workers, n_tasks);

    std::atomic<std::size_t> next{0};
    auto work = [&]() {
        while (true) {
            const std::size_t t = next.fetch_add(1);
            if (t >= n_tasks) break;
            const std::size_t cell = t / plan.seeds_per_cell;
            const std::size_t rep = t % plan.seeds_per_cell;
            const std::size_t i = cell / plan.axis2.count;
            const std::size_t j = cell % plan.axis2.count;
            const ProtocolConfig cfg = cell_config(plan, i, j, rep);
            try {
                const Trajectory traj = run(cfg, model);
                rows[t] = detail::make_result_row(plan, cfg, stationary_stats(traj, cfg));
            } catch (const std::exception&) {
                StationaryStats bad;
                bad.diverged = true;
                rows[t] = detail::make_result_row(plan, cfg, bad);
            }
        }
    };

    if (n_workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_workers);
        for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(work);
        for (std::thread& th : pool) th.join();
    }
    return rows;
}

struct SweepOutput {
    std::filesystem::path results_csv;
    std::filesystem::path manifest_json;
};

// Runs the plan and persists results.csv plus a JSON manifest. The CSV is
// staged through a temp file so an I/O failure never leaves a partial file.
inline SweepOutput run_sweep(const ExperimentPlan& plan) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::vector<ResultRow> rows = execute_sweep(plan);

    namespace fs = std::filesystem;
    const fs::path dir(plan.output_dir);
    fs::create_directories(dir);
    const fs::path csv_path = dir / "results.csv";
    const fs::path tmp_path = dir / "results.csv.tmp";
    try {
        {
            std::ofstream out(tmp_path);
            if (!out) throw std::runtime_error("cannot open " + tmp_path.string());
            write_results_csv(out, rows);
            out.flush();
            if (!out) throw std::runtime_error("write failed for " + tmp_path.string());
        }
        fs::rename(tmp_path, csv_path);
    } catch (...) {
        std::error_code ec;
        fs::remove(tmp_path, ec);
        throw;
    }

    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    nlohmann::json manifest;
    manifest["plan"] = write_plan(plan);
    manifest["rows"] = rows.size();
    manifest["csv_schema"] = results_csv_header();
    manifest["wall_seconds"] = wall;
    manifest["version"] = "0.1.0";
    const fs::path manifest_path = dir / "run_manifest.json";
    std::ofstream mout(manifest_path);
    if (!mout) throw std::runtime_error("cannot open " + manifest_path.string());
    mout << manifest.dump(2) << '\n';

    return {csv_path, manifest_path};
}

}  // namespace sgtherm
