// hmimo: DFT-based channel estimation for holographic MIMO uniform linear arrays
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <chrono>
#include <cmath>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "hmimo/config.hpp"
#include "hmimo/covariance.hpp"
#include "hmimo/csv.hpp"
#include "hmimo/estimators.hpp"
#include "hmimo/metrics.hpp"
#include "hmimo/parallel.hpp"

namespace hmimo {

/// Stream-tree ids, level one of the derivation documented in the README:
/// trial stream = derive(derive(derive(master_seed, experiment_id), sweep_index), trial_index).
inline std::uint64_t experiment_stream_id(Experiment e) {
    switch (e) {
        case Experiment::fig1: return 1;
        case Experiment::fig2: return 2;
        case Experiment::fig3: return 3;
        case Experiment::fig4: return 4;
        case Experiment::bench: return 5;
    }
    return 0;
}

inline RngStream trial_stream(std::uint64_t master, Experiment e, std::uint64_t sweep,
                              std::uint64_t trial) {
    return RngStream(master, {experiment_stream_id(e), sweep, trial});
}

namespace detail {

inline std::string seed_path(const ExperimentConfig& cfg, Experiment e, std::uint64_t sweep,
                             std::uint64_t trial) {
    return std::string(to_string(e)) + "/sweep=" + std::to_string(sweep) +
           "/trial=" + std::to_string(trial) + "/master_seed=" + std::to_string(cfg.master_seed);
}

inline std::string flag_string(long long clamped, long long loaded) {
    std::string s;
    if (clamped > 0) s += "clamped=" + std::to_string(clamped);
    if (loaded > 0) {
        if (!s.empty()) s += ';';
        s += "loaded=" + std::to_string(loaded);
    }
    return s;
}

inline double mean_of(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

struct DropScene {
    UePlacement ue;
    double beta = 0.0;
    SpatialCovariance cov;
};

inline DropScene make_drop(const ExperimentConfig& cfg, const UlaGeometry& geom, RngStream& rng) {
    DropScene d;
    d.ue = draw_ue(cfg.physical.sector.sector(), geom, rng);
    d.beta = cfg.physical.pathloss.model().beta(d.ue.distance_3d);
    d.cov = build_covariance(
        geom, ScatteringProfile(d.ue.elevation, deg_to_rad(cfg.physical.sigma_theta_deg), d.beta),
        cfg.quadrature);
    return d;
}

}  // namespace detail

/// Fig. 1 sweep: averaged analytic NMSEE versus aperture L/lambda for the
/// perfect-statistics estimators (MMSE, LS, DFT), over random UE drops.
inline CsvTable run_fig1(const ExperimentConfig& cfg, int threads = 0) {
    const auto& f = cfg.fig1;
    const ScenarioParams params = cfg.physical.params();
    const double gamma = params.snr();
    const double tau_p = params.pilot_length;
    const double rho = params.tx_power;
    const int nthreads = resolve_threads(threads);

    CsvTable table;
    for (std::size_t si = 0; si < f.l_over_lambda.size(); ++si) {
        const double lol = f.l_over_lambda[si];
        const int n = cfg.physical.antennas_for_aperture(lol);
        const UlaGeometry geom = cfg.physical.geometry(n);

        std::vector<std::vector<double>> values(f.schemes.size(),
                                                std::vector<double>(f.n_drops));
        std::vector<long long> clamped(f.n_drops, 0), loaded(f.n_drops, 0);
        parallel_for(static_cast<std::size_t>(f.n_drops), nthreads, [&](std::size_t t) {
            RngStream rng = trial_stream(cfg.master_seed, Experiment::fig1, si, t);
            try {
                const detail::DropScene drop = detail::make_drop(cfg, geom, rng);
                for (std::size_t k = 0; k < f.schemes.size(); ++k) {
                    const EstimatorKind kind = estimator_kind_from_string(f.schemes[k]);
                    double v = 0.0;
                    if (kind == EstimatorKind::mmse) {
                        const auto op = mmse_precompute(drop.cov.matrix, gamma, tau_p, rho);
                        loaded[t] += op.loaded_solve() ? 1 : 0;
                        v = nmsee_analytic(drop.cov, gamma, op, tau_p, rho);
                    } else if (kind == EstimatorKind::ls) {
                        v = nmsee_analytic(drop.cov, gamma, ls_operator(tau_p, rho, n), tau_p, rho);
                    } else {
                        const auto op = dft_precompute(drop.cov.generator, gamma, tau_p, rho);
                        clamped[t] += op.clamped_count();
                        v = nmsee_analytic(drop.cov, gamma, op, tau_p, rho);
                    }
                    values[k][t] = v;
                }
            } catch (const std::exception& e) {
                throw NumericalError(e.what(),
                                     detail::seed_path(cfg, Experiment::fig1, si, t));
            }
        });

        const long long cl = std::accumulate(clamped.begin(), clamped.end(), 0LL);
        const long long lo = std::accumulate(loaded.begin(), loaded.end(), 0LL);
        for (std::size_t k = 0; k < f.schemes.size(); ++k) {
            CsvRow row;
            row.experiment = "fig1";
            row.scheme = f.schemes[k];
            row.n = format_count(n);
            row.l_over_lambda = format_value(lol);
            row.sigma_theta_deg = format_value(cfg.physical.sigma_theta_deg);
            row.stat = "mean";
            row.value = format_value(detail::mean_of(values[k]));
            if (f.schemes[k] == "DFT")
                row.flags = detail::flag_string(cl, 0);
            else if (f.schemes[k] == "MMSE")
                row.flags = detail::flag_string(0, lo);
            table.rows.push_back(std::move(row));
        }
    }
    return table;
}

/// Fig. 2 sweep: averaged analytic NMSEE versus angular spread at fixed N for
/// all five estimators.
inline CsvTable run_fig2(const ExperimentConfig& cfg, int threads = 0) {
    const auto& f = cfg.fig2;
    const ScenarioParams params = cfg.physical.params();
    const double gamma = params.snr();
    const double tau_p = params.pilot_length;
    const double rho = params.tx_power;
    const int n = f.n_antennas;
    const UlaGeometry geom = cfg.physical.geometry(n);
    const int nthreads = resolve_threads(threads);

    bool wants_iso = false;
    for (const auto& s : f.schemes) wants_iso |= (s == "ISO");
    IsoBasis iso;
    EstimatorOperator iso_shared = ls_operator(tau_p, rho, n);  // placeholder value
    if (wants_iso) {
        iso = iso_basis(geom, cfg.estimators.rank_tol);
        if (!cfg.estimators.iso_beta_scale)
            iso_shared = iso_precompute(iso, gamma, tau_p, rho);
    }

    CsvTable table;
    for (std::size_t si = 0; si < f.sigma_theta_deg.size(); ++si) {
        const double sigma_deg = f.sigma_theta_deg[si];
        std::vector<std::vector<double>> values(f.schemes.size(),
                                                std::vector<double>(f.n_drops));
        std::vector<long long> clamped(f.n_drops, 0), loaded(f.n_drops, 0);
        parallel_for(static_cast<std::size_t>(f.n_drops), nthreads, [&](std::size_t t) {
            RngStream rng = trial_stream(cfg.master_seed, Experiment::fig2, si, t);
            try {
                const UePlacement ue = draw_ue(cfg.physical.sector.sector(), geom, rng);
                const double beta = cfg.physical.pathloss.model().beta(ue.distance_3d);
                const SpatialCovariance cov = build_covariance(
                    geom, ScatteringProfile(ue.elevation, deg_to_rad(sigma_deg), beta),
                    cfg.quadrature);
                for (std::size_t k = 0; k < f.schemes.size(); ++k) {
                    const EstimatorKind kind = estimator_kind_from_string(f.schemes[k]);
                    double v = 0.0;
                    switch (kind) {
                        case EstimatorKind::mmse: {
                            const auto op = mmse_precompute(cov.matrix, gamma, tau_p, rho);
                            loaded[t] += op.loaded_solve() ? 1 : 0;
                            v = nmsee_analytic(cov, gamma, op, tau_p, rho);
                            break;
                        }
                        case EstimatorKind::ls:
                            v = nmsee_analytic(cov, gamma, ls_operator(tau_p, rho, n), tau_p, rho);
                            break;
                        case EstimatorKind::los: {
                            const auto op = los_precompute(geom, ue.azimuth, ue.elevation, beta,
                                                           gamma, tau_p, rho);
                            v = nmsee_analytic(cov, gamma, op, tau_p, rho);
                            break;
                        }
                        case EstimatorKind::iso: {
                            if (cfg.estimators.iso_beta_scale) {
                                const auto op = iso_precompute(iso, gamma, tau_p, rho, beta);
                                v = nmsee_analytic(cov, gamma, op, tau_p, rho);
                            } else {
                                v = nmsee_analytic(cov, gamma, iso_shared, tau_p, rho);
                            }
                            break;
                        }
                        case EstimatorKind::dft: {
                            const auto op = dft_precompute(cov.generator, gamma, tau_p, rho);
                            clamped[t] += op.clamped_count();
                            v = nmsee_analytic(cov, gamma, op, tau_p, rho);
                            break;
                        }
                    }
                    values[k][t] = v;
                }
            } catch (const std::exception& e) {
                throw NumericalError(e.what(),
                                     detail::seed_path(cfg, Experiment::fig2, si, t));
            }
        });

        const long long cl = std::accumulate(clamped.begin(), clamped.end(), 0LL);
        const long long lo = std::accumulate(loaded.begin(), loaded.end(), 0LL);
        for (std::size_t k = 0; k < f.schemes.size(); ++k) {
            CsvRow row;
            row.experiment = "fig2";
            row.scheme = f.schemes[k];
            row.n = format_count(n);
            row.l_over_lambda = format_value(geom.aperture_over_wavelength());
            row.sigma_theta_deg = format_value(sigma_deg);
            row.stat = "mean";
            row.value = format_value(detail::mean_of(values[k]));
            if (f.schemes[k] == "DFT")
                row.flags = detail::flag_string(cl, 0);
            else if (f.schemes[k] == "MMSE")
                row.flags = detail::flag_string(0, lo);
            table.rows.push_back(std::move(row));
        }
    }
    return table;
}

namespace detail {

struct ElevationBin {
    double theta_lo, theta_hi;   // radians, theta_lo more negative
    double dist_lo, dist_hi;     // matching horizontal distances
    double center_deg() const { return rad_to_deg(0.5 * (theta_lo + theta_hi)); }
};

inline std::vector<ElevationBin> elevation_bins(const PhysicalConfig& phys, int count) {
    const double b = phys.array_elevation_m;
    const double theta_near = -std::atan2(b, phys.sector.min_distance_m);  // most negative
    const double theta_far = -std::atan2(b, phys.sector.max_distance_m);
    std::vector<ElevationBin> bins(static_cast<std::size_t>(count));
    const double width = (theta_far - theta_near) / count;
    for (int i = 0; i < count; ++i) {
        ElevationBin& bin = bins[static_cast<std::size_t>(i)];
        bin.theta_lo = theta_near + i * width;
        bin.theta_hi = theta_near + (i + 1) * width;
        bin.dist_lo = (bin.theta_lo < 0.0) ? b / std::tan(-bin.theta_lo) : phys.sector.min_distance_m;
        bin.dist_hi = (bin.theta_hi < 0.0) ? b / std::tan(-bin.theta_hi) : phys.sector.max_distance_m;
    }
    bins.front().dist_lo = phys.sector.min_distance_m;  // avoid tan() round-off at the edges
    bins.back().dist_hi = phys.sector.max_distance_m;
    return bins;
}

inline void append_box_rows(CsvTable& table, const char* experiment, const std::string& scheme,
                            int n, double lol, double sigma_deg, const std::string& bin_deg,
                            const std::string& m_label, const std::vector<double>& samples,
                            double whisker_k, const std::string& flags) {
    const BoxStats stats = box_stats(samples, whisker_k);
    auto push = [&](const char* stat, double value) {
        CsvRow row;
        row.experiment = experiment;
        row.scheme = scheme;
        row.n = format_count(n);
        row.l_over_lambda = format_value(lol);
        row.sigma_theta_deg = format_value(sigma_deg);
        row.theta_bin_deg = bin_deg;
        row.m = m_label;
        row.stat = stat;
        row.value = format_value(value);
        row.flags = flags;
        table.rows.push_back(std::move(row));
    };
    push("median", stats.median);
    push("q1", stats.q1);
    push("q3", stats.q3);
    push("whisker_low", stats.whisker_low);
    push("whisker_high", stats.whisker_high);
    push("mean", stats.mean);
    push("outlier_frac", stats.outlier_fraction());
    push("n_outliers", static_cast<double>(stats.outliers.size()));
    push("count", static_cast<double>(stats.n));
}

}  // namespace detail

/// Per-batch output of the imperfect-statistics pipeline of fig3. Perfect
/// values are filled only when the cell is asked to compute them.
struct Fig3Batch {
    double nmsee_mmse_hat = 0.0;
    double nmsee_dft_hat = 0.0;
    double nmsee_mmse_perfect = 0.0;
    double nmsee_dft_perfect = 0.0;
    long long clamped = 0;
    long long loaded = 0;
};

/// One (elevation bin, M) cell of the fig3 study: n_stat_batches independent
/// covariance-estimation batches on UEs drawn inside the bin. Exposed so the
/// acceptance suite can pool raw batch values across bins.
inline std::vector<Fig3Batch> run_fig3_cell(const ExperimentConfig& cfg, std::size_t bin_index,
                                            std::size_t m_index, bool compute_perfect,
                                            int threads = 0) {
    const auto& f = cfg.fig3;
    const ScenarioParams params = cfg.physical.params();
    const double gamma = params.snr();
    const double tau_p = params.pilot_length;
    const double rho = params.tx_power;
    const int n = f.n_antennas;
    const UlaGeometry geom = cfg.physical.geometry(n);
    const SectorConfig sector = cfg.physical.sector.sector();
    const auto bins = detail::elevation_bins(cfg.physical, f.n_elevation_bins);
    const auto& bin = bins.at(bin_index);
    const int m_snapshots = f.m_values.at(m_index);
    const std::uint64_t sweep = bin_index * f.m_values.size() + m_index;

    bool wants_mmse = false, wants_dft = false;
    for (const auto& s : f.schemes) {
        wants_mmse |= (s == "MMSE");
        wants_dft |= (s == "DFT");
    }

    std::vector<Fig3Batch> results(static_cast<std::size_t>(f.n_stat_batches));
    parallel_for(static_cast<std::size_t>(f.n_stat_batches), resolve_threads(threads),
                 [&](std::size_t t) {
        RngStream rng = trial_stream(cfg.master_seed, Experiment::fig3, sweep, t);
        try {
            // distance-uniform placement conditioned on the bin
            double horiz;
            if (sector.uniform_in_area) {
                const double lo2 = bin.dist_lo * bin.dist_lo;
                const double hi2 = bin.dist_hi * bin.dist_hi;
                horiz = std::sqrt(rng.uniform(lo2, hi2));
            } else {
                horiz = rng.uniform(bin.dist_lo, bin.dist_hi);
            }
            const double az = rng.uniform(sector.azimuth_min, sector.azimuth_max);
            const UePlacement ue = UePlacement::at(horiz, az, geom.array_elevation);
            const double beta = cfg.physical.pathloss.model().beta(ue.distance_3d);
            const SpatialCovariance cov = build_covariance(
                geom,
                ScatteringProfile(ue.elevation, deg_to_rad(cfg.physical.sigma_theta_deg), beta),
                cfg.quadrature);
            const ChannelSampler sampler(cov, cfg.estimators.clamp_tol);
            const SnapshotBatch batch =
                draw_snapshots(sampler, n, m_snapshots, gamma, params.pilot_gain(), rng);
            const CovarianceEstimate toe = toeplitz_average(sample_correlation(batch));

            Fig3Batch& out = results[t];
            if (wants_mmse) {
                const auto op = mmse_precompute(noise_subtract(toe, gamma), gamma, tau_p, rho);
                out.loaded += op.loaded_solve() ? 1 : 0;
                out.nmsee_mmse_hat = nmsee_analytic(cov, gamma, op, tau_p, rho);
                if (compute_perfect) {
                    const auto perf = mmse_precompute(cov.matrix, gamma, tau_p, rho);
                    out.nmsee_mmse_perfect = nmsee_analytic(cov, gamma, perf, tau_p, rho);
                }
            }
            if (wants_dft) {
                const auto op = dft_precompute(noise_subtract_generator(toe, gamma), gamma,
                                               tau_p, rho);
                out.clamped += op.clamped_count();
                out.nmsee_dft_hat = nmsee_analytic(cov, gamma, op, tau_p, rho);
                if (compute_perfect) {
                    const auto perf = dft_precompute(cov.generator, gamma, tau_p, rho);
                    out.nmsee_dft_perfect = nmsee_analytic(cov, gamma, perf, tau_p, rho);
                }
            }
        } catch (const std::exception& e) {
            throw NumericalError(e.what(), detail::seed_path(cfg, Experiment::fig3, sweep, t));
        }
    });
    return results;
}

/// Fig. 3 robustness study: per elevation bin and snapshot count M, the NMSEE
/// distribution of MMSE and DFT operators built from Toeplitz-averaged
/// covariance estimates, plus the perfect-statistics reference. The sweep
/// index for seeding is bin_index * |m_values| + m_index.
inline CsvTable run_fig3(const ExperimentConfig& cfg, int threads = 0) {
    const auto& f = cfg.fig3;
    const int n = f.n_antennas;
    const UlaGeometry geom = cfg.physical.geometry(n);
    const auto bins = detail::elevation_bins(cfg.physical, f.n_elevation_bins);

    CsvTable table;
    for (std::size_t bi = 0; bi < bins.size(); ++bi) {
        const std::string bin_deg = format_value(bins[bi].center_deg());
        for (std::size_t mi = 0; mi < f.m_values.size(); ++mi) {
            const int m_snapshots = f.m_values[mi];
            const bool compute_perfect = (mi == 0);
            const std::vector<Fig3Batch> results =
                run_fig3_cell(cfg, bi, mi, compute_perfect, threads);

            long long cl = 0, lo = 0;
            for (const auto& r : results) {
                cl += r.clamped;
                lo += r.loaded;
            }
            for (const auto& scheme : f.schemes) {
                std::vector<double> hat(results.size());
                for (std::size_t t = 0; t < results.size(); ++t)
                    hat[t] = (scheme == "MMSE") ? results[t].nmsee_mmse_hat
                                                : results[t].nmsee_dft_hat;
                const std::string flags = (scheme == "MMSE") ? detail::flag_string(0, lo)
                                                             : detail::flag_string(cl, 0);
                detail::append_box_rows(table, "fig3", scheme, n,
                                        geom.aperture_over_wavelength(),
                                        cfg.physical.sigma_theta_deg, bin_deg,
                                        format_count(m_snapshots), hat, f.whisker_k, flags);
            }
            if (compute_perfect) {
                for (const auto& scheme : f.schemes) {
                    std::vector<double> perf(results.size());
                    for (std::size_t t = 0; t < results.size(); ++t)
                        perf[t] = (scheme == "MMSE") ? results[t].nmsee_mmse_perfect
                                                     : results[t].nmsee_dft_perfect;
                    const BoxStats stats = box_stats(perf, f.whisker_k);
                    for (const auto& [stat, value] :
                         {std::pair<const char*, double>{"mean", stats.mean},
                          {"median", stats.median}}) {
                        CsvRow row;
                        row.experiment = "fig3";
                        row.scheme = scheme;
                        row.n = format_count(n);
                        row.l_over_lambda = format_value(geom.aperture_over_wavelength());
                        row.sigma_theta_deg = format_value(cfg.physical.sigma_theta_deg);
                        row.theta_bin_deg = bin_deg;
                        row.m = "perfect";
                        row.stat = stat;
                        row.value = format_value(value);
                        table.rows.push_back(std::move(row));
                    }
                }
            }
        }
    }
    return table;
}

/// Fig. 4: mean NMSEE (outliers included) of the DFT estimator with estimated
/// statistics versus aperture, one curve per M plus the perfect-knowledge
/// curve. Sweep index for seeding: l_index * (|m_values| + 1) + m_index, where
/// m_index == |m_values| is the perfect pass. Every pass at a sweep point
/// draws its UE placements from the perfect-pass stream, so the M curves are
/// paired: they differ only in the estimation snapshots, not in geometry.
inline CsvTable run_fig4(const ExperimentConfig& cfg, int threads = 0) {
    const auto& f = cfg.fig4;
    const ScenarioParams params = cfg.physical.params();
    const double gamma = params.snr();
    const double tau_p = params.pilot_length;
    const double rho = params.tx_power;
    const int nthreads = resolve_threads(threads);

    CsvTable table;
    for (std::size_t si = 0; si < f.l_over_lambda.size(); ++si) {
        const double lol = f.l_over_lambda[si];
        const int n = cfg.physical.antennas_for_aperture(lol);
        const UlaGeometry geom = cfg.physical.geometry(n);

        const std::uint64_t perfect_sweep = si * (f.m_values.size() + 1) + f.m_values.size();
        for (std::size_t mi = 0; mi <= f.m_values.size(); ++mi) {
            const bool perfect = (mi == f.m_values.size());
            const std::uint64_t sweep = si * (f.m_values.size() + 1) + mi;
            std::vector<double> values(static_cast<std::size_t>(f.n_drops));
            std::vector<long long> clamped(static_cast<std::size_t>(f.n_drops), 0);
            parallel_for(static_cast<std::size_t>(f.n_drops), nthreads, [&](std::size_t t) {
                RngStream ue_rng = trial_stream(cfg.master_seed, Experiment::fig4, perfect_sweep, t);
                try {
                    const detail::DropScene drop = detail::make_drop(cfg, geom, ue_rng);
                    if (perfect) {
                        const auto op = dft_precompute(drop.cov.generator, gamma, tau_p, rho);
                        values[t] = nmsee_analytic(drop.cov, gamma, op, tau_p, rho);
                    } else {
                        RngStream rng = trial_stream(cfg.master_seed, Experiment::fig4, sweep, t);
                        const ChannelSampler sampler(drop.cov, cfg.estimators.clamp_tol);
                        const SnapshotBatch batch = draw_snapshots(
                            sampler, n, f.m_values[mi], gamma, params.pilot_gain(), rng);
                        const CovarianceEstimate toe = toeplitz_average(sample_correlation(batch));
                        const auto op = dft_precompute(noise_subtract_generator(toe, gamma), gamma,
                                                       tau_p, rho);
                        clamped[t] += op.clamped_count();
                        values[t] = nmsee_analytic(drop.cov, gamma, op, tau_p, rho);
                    }
                } catch (const std::exception& e) {
                    throw NumericalError(e.what(),
                                         detail::seed_path(cfg, Experiment::fig4, sweep, t));
                }
            });

            CsvRow row;
            row.experiment = "fig4";
            row.scheme = "DFT";
            row.n = format_count(n);
            row.l_over_lambda = format_value(lol);
            row.sigma_theta_deg = format_value(cfg.physical.sigma_theta_deg);
            row.m = perfect ? "perfect" : format_count(f.m_values[mi]);
            row.stat = "mean";
            row.value = format_value(detail::mean_of(values));
            row.flags = detail::flag_string(
                std::accumulate(clamped.begin(), clamped.end(), 0LL), 0);
            table.rows.push_back(std::move(row));
        }
    }
    return table;
}

namespace detail {

inline double steady_seconds() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

/// Median wall-clock seconds of `reps` runs of fn(). fn must return a value
/// that depends on the computed result so the optimizer cannot drop it.
template <typename F>
double median_time(int reps, F&& fn) {
    static volatile double sink = 0.0;
    std::vector<double> times;
    times.reserve(static_cast<std::size_t>(reps));
    for (int r = 0; r < reps; ++r) {
        const double t0 = steady_seconds();
        sink = sink + fn();
        times.push_back(steady_seconds() - t0);
    }
    std::sort(times.begin(), times.end());
    return times[times.size() / 2];
}

/// Times the non-allocating apply with an inner loop sized so one measurement
/// spans >= 2 ms.
inline double time_apply(const EstimatorOperator& op, const CVector& y, int reps) {
    static volatile double sink = 0.0;
    CVector out(y.size());
    const double t0 = steady_seconds();
    op.apply_into(y, out);
    const double t1 = steady_seconds() - t0;
    sink = sink + out(0).real();
    const int inner = std::max(1, static_cast<int>(std::ceil(2e-3 / std::max(t1, 1e-9))));
    std::vector<double> times;
    for (int r = 0; r < reps; ++r) {
        double acc = 0.0;
        const double s0 = steady_seconds();
        for (int i = 0; i < inner; ++i) {
            op.apply_into(y, out);
            acc += out(0).real();
        }
        times.push_back((steady_seconds() - s0) / inner);
        sink = sink + acc;
    }
    std::sort(times.begin(), times.end());
    return times[times.size() / 2];
}

/// Least-squares slope of log(t) against log(N).
inline double loglog_slope(const std::vector<std::pair<double, double>>& points) {
    const double n = static_cast<double>(points.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& [x, y] : points) {
        const double lx = std::log(x), ly = std::log(y);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace detail

/// Complexity benchmark: wall-clock medians for the precompute and apply
/// phases per scheme over the N grid, plus a log-log slope fit per column.
/// Measurements run single-threaded regardless of the thread setting; at the
/// benchmark scenario (theta = -30 deg) precompute timings are emitted for the
/// MMSE and DFT kinds, matching the schemes that have a per-UE precompute.
inline CsvTable run_bench(const ExperimentConfig& cfg, int /*threads*/ = 0) {
    const auto& f = cfg.bench;
    const ScenarioParams params = cfg.physical.params();
    const double gamma = params.snr();
    const double tau_p = params.pilot_length;
    const double rho = params.tx_power;
    const double b = cfg.physical.array_elevation_m;
    const double theta = deg_to_rad(-30.0);
    const double dist3 = (b > 0.0) ? b / std::sin(-theta) : 20.0;
    const double beta = cfg.physical.pathloss.model().beta(dist3);

    CsvTable table;
    std::map<std::string, std::vector<std::pair<double, double>>> slope_points;

    for (const auto& scheme : f.schemes) {
        const EstimatorKind kind = estimator_kind_from_string(scheme);
        for (std::size_t ni = 0; ni < f.n_values.size(); ++ni) {
            const int n = f.n_values[ni];
            if ((kind == EstimatorKind::mmse && n > f.mmse_max_n) ||
                (kind == EstimatorKind::iso && n > f.iso_max_n))
                continue;
            const UlaGeometry geom = cfg.physical.geometry(n);
            const SpatialCovariance cov = build_covariance(
                geom, ScatteringProfile(theta, deg_to_rad(cfg.physical.sigma_theta_deg), beta),
                cfg.quadrature);
            RngStream rng = trial_stream(cfg.master_seed, Experiment::bench, ni, 0);
            CVector y(n);
            for (int i = 0; i < n; ++i) y(i) = rng.complex_gaussian();

            const int reps =
                (kind == EstimatorKind::mmse && n >= 4096) ? 1 : f.repetitions;
            double precompute_s = -1.0;
            EstimatorOperator op = ls_operator(tau_p, rho, n);
            switch (kind) {
                case EstimatorKind::mmse:
                    precompute_s = detail::median_time(reps, [&] {
                        op = mmse_precompute(cov.matrix, gamma, tau_p, rho);
                        return op.scale();
                    });
                    break;
                case EstimatorKind::dft:
                    precompute_s = detail::median_time(f.repetitions, [&] {
                        op = dft_precompute(cov.generator, gamma, tau_p, rho);
                        return op.scale();
                    });
                    break;
                case EstimatorKind::ls:
                    break;
                case EstimatorKind::los:
                    op = los_precompute(geom, 0.0, theta, beta, gamma, tau_p, rho);
                    break;
                case EstimatorKind::iso:
                    op = iso_precompute(iso_basis(geom, cfg.estimators.rank_tol), gamma, tau_p, rho);
                    break;
            }
            const double apply_s = detail::time_apply(op, y, f.repetitions);

            auto push = [&](const char* stat, double value) {
                CsvRow row;
                row.experiment = "bench";
                row.scheme = scheme;
                row.n = format_count(n);
                row.stat = stat;
                row.value = format_value(value);
                table.rows.push_back(std::move(row));
            };
            if (precompute_s >= 0.0) {
                push("precompute_seconds", precompute_s);
                slope_points[scheme + "/precompute_slope"].emplace_back(n, precompute_s);
            }
            push("apply_seconds", apply_s);
            slope_points[scheme + "/apply_slope"].emplace_back(n, apply_s);
        }
    }

    for (const auto& [key, points] : slope_points) {
        if (points.size() < 2) continue;
        const auto slash = key.find('/');
        CsvRow row;
        row.experiment = "bench";
        row.scheme = key.substr(0, slash);
        row.stat = key.substr(slash + 1);
        row.value = format_value(detail::loglog_slope(points));
        table.rows.push_back(std::move(row));
    }
    return table;
}

inline CsvTable run_experiment(const ExperimentConfig& cfg, Experiment e, int threads = 0) {
    switch (e) {
        case Experiment::fig1: return run_fig1(cfg, threads);
        case Experiment::fig2: return run_fig2(cfg, threads);
        case Experiment::fig3: return run_fig3(cfg, threads);
        case Experiment::fig4: return run_fig4(cfg, threads);
        case Experiment::bench: return run_bench(cfg, threads);
    }
    throw std::logic_error("run_experiment: bad experiment");
}

}  // namespace hmimo
