#pragma once

// Closed-form multi-party synchronization bounds and the end-to-end Monte
// Carlo that drives M independent trackers from one shared diffusing-phase
// source. The source is the SDE phase model with the closed-form linewidth
// of the chosen gain kind; per-party flux is kappa mu / M.

#include "laserclock/liouvillian.hpp"
#include "laserclock/tracking.hpp"

namespace laserclock {

inline constexpr double hbar = 1.054571817e-34;  // J s
inline constexpr double speed_of_light = 299792458.0;  // m/s

/// sqrt(M)/(4 mu): the noiseless-gain source tracked adaptively.
inline double hl_bound(double mu, int parties) {
    if (!(mu > 0.0) || parties < 1) throw std::invalid_argument("hl_bound: need mu > 0, parties >= 1");
    return std::sqrt(static_cast<double>(parties)) / (4.0 * mu);
}

/// sqrt(M)/(2 mu): standard source, dual-homodyne tracking.
inline double sql_bound(double mu, int parties) {
    if (!(mu > 0.0) || parties < 1) throw std::invalid_argument("sql_bound: need mu > 0, parties >= 1");
    return std::sqrt(static_cast<double>(parties)) / (2.0 * mu);
}

/// M/(4 mu): phase variance of one output of a coherent M-way split.
inline double split_coherent_bound(double mu, int parties) {
    if (!(mu > 0.0) || parties < 1)
        throw std::invalid_argument("split_coherent_bound: need mu > 0, parties >= 1");
    return static_cast<double>(parties) / (4.0 * mu);
}

struct SyncBudget {
    double mu = 0.0;
    int parties = 1;
    double kappa = 1.0;
    double ell_hl = 0.0, ell_sql = 0.0;    // closed-form linewidths
    double flux_per_party = 0.0;           // kappa mu / M
    double coherence_number_hl = 0.0;      // flux / ell_hl
    double coherence_number_sql = 0.0;
    double hl = 0.0, sql = 0.0, split_coherent = 0.0;
};

inline SyncBudget make_sync_budget(double mu, int parties, double kappa = 1.0) {
    if (!(mu > 0.0) || parties < 1 || !(kappa > 0.0))
        throw std::invalid_argument("make_sync_budget: need mu > 0, parties >= 1, kappa > 0");
    SyncBudget b;
    b.mu = mu;
    b.parties = parties;
    b.kappa = kappa;
    b.ell_hl = kappa / (4.0 * mu);
    b.ell_sql = kappa / (2.0 * mu);
    b.flux_per_party = kappa * mu / parties;
    b.coherence_number_hl = b.flux_per_party / b.ell_hl;
    b.coherence_number_sql = b.flux_per_party / b.ell_sql;
    b.hl = hl_bound(mu, parties);
    b.sql = sql_bound(mu, parties);
    b.split_coherent = split_coherent_bound(mu, parties);
    return b;
}

struct PhysicalBudget {
    double power = 0.0;           // watts
    double omega = 0.0;           // optical angular frequency, rad/s
    double linewidth = 0.0;       // 1/s
    double parties = 1.0;         // double: planetary-scale counts overflow int
    double bound = 0.0;           // sqrt(hbar omega M ell / P)
    double photons_per_second = 0.0;  // per party
    double coherence_number = 0.0;    // per-party flux / ell
};

inline double omega_from_wavelength(double wavelength) {
    if (!(wavelength > 0.0)) throw std::invalid_argument("omega_from_wavelength: need lambda > 0");
    return 2.0 * pi * speed_of_light / wavelength;
}

/// Mean-square synchronization error of a real beam in physical units.
inline PhysicalBudget physical_bound(double power, double omega, double linewidth,
                                     double parties) {
    if (!(power > 0.0) || !(omega > 0.0) || !(linewidth > 0.0) || parties < 1.0)
        throw std::invalid_argument("physical_bound: all inputs must be positive");
    PhysicalBudget b;
    b.power = power;
    b.omega = omega;
    b.linewidth = linewidth;
    b.parties = parties;
    b.bound = std::sqrt(hbar * omega * parties * linewidth / power);
    b.photons_per_second = power / (hbar * omega * parties);
    b.coherence_number = b.photons_per_second / linewidth;
    return b;
}

struct EndToEndOptions {
    double burn_in_time_constants = 10.0;
    double averaging_time_constants = 100.0;
};

struct EndToEndResult {
    SyncBudget budget;
    TrackingScheme scheme = TrackingScheme::adaptive;
    double linewidth_used = 0.0;
    double chi = 0.0;
    double dt = 0.0;
    double mse = 0.0;      // per-party steady circular MSE, trajectory mean
    double stderr_ = 0.0;  // over trajectories
    double bound = 0.0;
    double ratio = 0.0;    // mse / bound
    int trajectories = 0;
    int excluded = 0;
    // cross-party error correlation; the shared source phase makes the
    // per-party errors correlated at ell/(ell + chi^2)
    double pair_correlation = 0.0;
    double pair_correlation_stderr = 0.0;
};

/// M trackers locked to one shared source path, independent measurement
/// noises. HL pairs the noiseless-gain linewidth with adaptive tracking,
/// SQL the standard linewidth with dual homodyne.
inline EndToEndResult end_to_end_mc(double mu, int parties, double kappa, GainKind gain,
                                    int n_traj, std::uint64_t seed,
                                    const EndToEndOptions& opt = {}) {
    if (gain == GainKind::none) throw std::invalid_argument("end_to_end_mc: need a gain kind");
    if (n_traj < 2) throw std::invalid_argument("end_to_end_mc: need at least two trajectories");
    EndToEndResult result;
    result.budget = make_sync_budget(mu, parties, kappa);
    result.scheme =
        gain == GainKind::hl_noiseless ? TrackingScheme::adaptive : TrackingScheme::nonadaptive;
    result.linewidth_used =
        gain == GainKind::hl_noiseless ? result.budget.ell_hl : result.budget.ell_sql;
    result.bound = gain == GainKind::hl_noiseless ? result.budget.hl : result.budget.sql;
    result.chi = std::sqrt(result.linewidth_used);

    const BeamSpec beam{result.budget.flux_per_party, result.linewidth_used};
    if (beam.coherence_number() < 100.0)
        throw std::invalid_argument("end_to_end_mc: coherence number below 100");
    const bool adaptive = result.scheme == TrackingScheme::adaptive;
    const double chi = result.chi;
    const double tau = filter_time_constant(beam, chi, result.scheme);
    const double dt = recommended_dt(beam, chi, result.scheme);
    result.dt = dt;
    const long burn_steps = std::lround(std::ceil(opt.burn_in_time_constants * tau / dt));
    const long avg_steps = std::lround(std::ceil(opt.averaging_time_constants * tau / dt));
    const long total = burn_steps + avg_steps;
    const long lock_window = std::lround(std::ceil(5.0 * tau / dt));

    const double step_sd = std::sqrt(result.linewidth_used * dt);
    const double noise_sd = std::sqrt(dt);
    const double gain_adaptive = 2.0 * std::sqrt(beam.flux);
    const double gain_dual = 2.0 * std::sqrt(0.5 * beam.flux);
    const int n_pairs = parties * (parties - 1) / 2;

    std::vector<double> traj_mse(n_traj), traj_pair(n_traj, 0.0);
    std::vector<char> traj_lost(n_traj, 0);

    parallel_for(n_traj, [&](std::size_t i) {
        NormalStream source(derive_seed(seed, 101, i));
        std::vector<NormalStream> meas, meas2;
        meas.reserve(parties);
        for (int j = 0; j < parties; ++j)
            meas.emplace_back(derive_seed(seed, 211, i * 1024 + j));
        if (!adaptive) {
            meas2.reserve(parties);
            for (int j = 0; j < parties; ++j)
                meas2.emplace_back(derive_seed(seed, 223, i * 1024 + j));
        }

        double phi = 0.0;
        std::vector<double> estimate(parties, 0.0), err(parties, 0.0);
        std::vector<long> out_of_lock(parties, 0);
        double acc_sq = 0.0, acc_pair = 0.0;
        bool lost = false;
        for (long k = 0; k < total; ++k) {
            for (int j = 0; j < parties; ++j) {
                if (adaptive) {
                    const double dy =
                        gain_adaptive * std::sin(phi - estimate[j]) * dt + noise_sd * meas[j]();
                    estimate[j] += chi * dy;
                } else {
                    const double dy1 = gain_dual * std::sin(phi) * dt + noise_sd * meas[j]();
                    const double dy2 =
                        gain_dual * std::sin(phi - 0.5 * pi) * dt + noise_sd * meas2[j]();
                    estimate[j] += chi * (std::cos(estimate[j]) * dy1 + std::sin(estimate[j]) * dy2);
                }
            }
            phi += step_sd * source();
            for (int j = 0; j < parties; ++j) {
                err[j] = wrap_angle(phi - estimate[j]);
                if (std::abs(err[j]) > 0.5 * pi) ++out_of_lock[j];
                if (out_of_lock[j] > lock_window) lost = true;
            }
            if (k >= burn_steps) {
                for (int j = 0; j < parties; ++j) acc_sq += err[j] * err[j];
                for (int a = 0; a < parties; ++a)
                    for (int b = a + 1; b < parties; ++b) acc_pair += err[a] * err[b];
            }
        }
        traj_mse[i] = acc_sq / static_cast<double>(avg_steps * parties);
        traj_pair[i] = n_pairs > 0 ? acc_pair / static_cast<double>(avg_steps * n_pairs) : 0.0;
        traj_lost[i] = lost ? 1 : 0;
    });

    std::vector<double> kept_mse, kept_pair;
    kept_mse.reserve(n_traj);
    for (int i = 0; i < n_traj; ++i) {
        if (traj_lost[i]) {
            ++result.excluded;
        } else {
            kept_mse.push_back(traj_mse[i]);
            kept_pair.push_back(traj_pair[i]);
        }
    }
    if (result.excluded > 0.01 * n_traj)
        throw LockLossBudgetExceeded("end_to_end_mc: more than 1% of trajectories lost lock");

    const MeanStderr mse = mean_stderr(kept_mse);
    result.mse = mse.mean;
    result.stderr_ = mse.stderr_;
    result.ratio = result.mse / result.bound;
    result.trajectories = n_traj;
    if (n_pairs > 0) {
        const MeanStderr pair = mean_stderr(kept_pair);
        result.pair_correlation = pair.mean / result.mse;
        result.pair_correlation_stderr = pair.stderr_ / result.mse;
    }
    return result;
}

}  // namespace laserclock
