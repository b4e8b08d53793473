#pragma once

// Stochastic simulation of a coherent beam with a diffusing phase and of
// homodyne phase tracking against it: adaptive (local oscillator slaved to
// the running estimate) and non-adaptive (dual homodyne on two fixed
// quadratures). Trajectories are independent jobs keyed by (seed, index);
// every reduction runs in index order so results are bitwise reproducible.

#include <algorithm>

#include <unsupported/Eigen/FFT>

#include "laserclock/numerics.hpp"

namespace laserclock {

struct BeamSpec {
    double flux;       // photons per unit time
    double linewidth;  // phase diffusion rate (rad^2 per unit time)

    void validate() const {
        if (!(flux > 0.0)) throw std::invalid_argument("BeamSpec: flux must be positive");
        if (linewidth < 0.0) throw std::invalid_argument("BeamSpec: linewidth must be nonnegative");
    }

    /// N = p / ell, photons per coherence time.
    double coherence_number() const {
        if (linewidth <= 0.0) return std::numeric_limits<double>::infinity();
        return flux / linewidth;
    }
};

enum class TrackingScheme { adaptive, nonadaptive };

inline const char* to_string(TrackingScheme s) {
    return s == TrackingScheme::adaptive ? "adaptive" : "nonadaptive";
}

/// Loop time constant of the linearized tracking filter.
inline double filter_time_constant(const BeamSpec& spec, double chi, TrackingScheme scheme) {
    const double signal = scheme == TrackingScheme::adaptive ? 2.0 * std::sqrt(spec.flux)
                                                             : std::sqrt(2.0 * spec.flux);
    return 1.0 / (chi * signal);
}

/// Fixed step resolving the diffusion, measurement and feedback scales:
/// 1e-2 min(1/ell, 1/(4 sqrt(p ell)), tau_filter).
inline double recommended_dt(const BeamSpec& spec, double chi, TrackingScheme scheme) {
    double cap = filter_time_constant(spec, chi, scheme);
    if (spec.linewidth > 0.0) {
        cap = std::min(cap, 1.0 / spec.linewidth);
        cap = std::min(cap, 1.0 / (4.0 * std::sqrt(spec.flux * spec.linewidth)));
    }
    return 1e-2 * cap;
}

struct PhasePath {
    double dt = 0.0;
    std::vector<double> phase;  // wrapped to (-pi, pi], sample k at t = k dt
};

/// Euler-Maruyama path of d(phi) = sqrt(ell) dW; unwrapped internally,
/// wrapped on output.
inline PhasePath simulate_phase_path(const BeamSpec& spec, double dt, double horizon,
                                     std::uint64_t seed, double initial_phase = 0.0) {
    spec.validate();
    if (!(dt > 0.0)) throw std::invalid_argument("simulate_phase_path: dt must be positive");
    if (spec.linewidth * dt > 0.1)
        throw std::invalid_argument("simulate_phase_path: dt too coarse for the diffusion rate");
    const long steps = std::lround(std::ceil(horizon / dt));
    NormalStream noise(derive_seed(seed, 1));
    PhasePath path;
    path.dt = dt;
    path.phase.resize(steps + 1);
    const double step_sd = std::sqrt(spec.linewidth * dt);
    double phi = initial_phase;
    path.phase[0] = wrap_angle(phi);
    for (long k = 1; k <= steps; ++k) {
        if (step_sd > 0.0) phi += step_sd * noise();
        path.phase[k] = wrap_angle(phi);
    }
    return path;
}

/// Homodyne photocurrent increments against a given local-oscillator path:
/// dy_k = 2 sqrt(p) sin(phi_k - Phi_k) dt + dW_k, dW_k ~ N(0, dt).
inline std::vector<double> homodyne_record(const BeamSpec& spec, const PhasePath& phi,
                                           const PhasePath& lo, std::uint64_t seed) {
    spec.validate();
    if (phi.dt != lo.dt || phi.phase.size() != lo.phase.size())
        throw std::invalid_argument("homodyne_record: paths must share one grid");
    const double dt = phi.dt;
    NormalStream noise(derive_seed(seed, 2));
    std::vector<double> record(phi.phase.size() - 1);
    const double gain = 2.0 * std::sqrt(spec.flux);
    const double noise_sd = std::sqrt(dt);
    for (std::size_t k = 0; k < record.size(); ++k)
        record[k] = gain * std::sin(phi.phase[k] - lo.phase[k]) * dt + noise_sd * noise();
    return record;
}

struct TrackerOptions {
    double burn_in_time_constants = 10.0;
    double averaging_time_constants = 50.0;
    double dt = 0.0;  // 0: use recommended_dt
    bool record_paths = false;
};

struct TrackerRun {
    std::uint64_t seed = 0;
    double dt = 0.0;
    double horizon = 0.0;
    double chi = 0.0;
    double steady_mse = 0.0;  // circular MSE of wrap(phi - estimate) after burn-in
    long samples = 0;
    bool lock_lost = false;   // wrapped error beyond pi/2 for > 5 time constants in total
    std::vector<double> true_phase, lo_phase, estimate;
};

namespace detail {

template <bool Adaptive>
TrackerRun run_tracker(const BeamSpec& spec, double chi, std::uint64_t seed,
                       const TrackerOptions& opt) {
    spec.validate();
    if (!(chi > 0.0)) throw std::invalid_argument("run_tracker: gain must be positive");
    if (opt.burn_in_time_constants < 10.0)
        throw std::invalid_argument("run_tracker: burn-in must cover ten filter time constants");
    constexpr TrackingScheme scheme =
        Adaptive ? TrackingScheme::adaptive : TrackingScheme::nonadaptive;
    const double tau = filter_time_constant(spec, chi, scheme);
    const double dt = opt.dt > 0.0 ? opt.dt : recommended_dt(spec, chi, scheme);
    if (dt > 1.000001 * recommended_dt(spec, chi, scheme))
        throw std::invalid_argument("run_tracker: dt above the resolution rule");

    const long burn_steps = std::lround(std::ceil(opt.burn_in_time_constants * tau / dt));
    const long avg_steps = std::lround(std::ceil(opt.averaging_time_constants * tau / dt));
    const long total = burn_steps + avg_steps;

    NormalStream phase_noise(derive_seed(seed, 1));
    NormalStream meas_noise(derive_seed(seed, 2));
    NormalStream meas_noise2(derive_seed(seed, 3));

    TrackerRun run;
    run.seed = seed;
    run.dt = dt;
    run.horizon = total * dt;
    run.chi = chi;
    if (opt.record_paths) {
        run.true_phase.reserve(total);
        run.lo_phase.reserve(total);
        run.estimate.reserve(total);
    }

    const double step_sd = std::sqrt(spec.linewidth * dt);
    const double noise_sd = std::sqrt(dt);
    const double gain_adaptive = 2.0 * std::sqrt(spec.flux);
    const double gain_dual = 2.0 * std::sqrt(0.5 * spec.flux);
    const long lock_window = std::lround(std::ceil(5.0 * tau / dt));

    double phi = 0.0, estimate = 0.0, acc = 0.0;
    long out_of_lock = 0;
    for (long k = 0; k < total; ++k) {
        if constexpr (Adaptive) {
            // LO slaved to the estimate: measure the error quadrature only
            const double dy = gain_adaptive * std::sin(phi - estimate) * dt + noise_sd * meas_noise();
            estimate += chi * dy;
        } else {
            // fixed orthogonal LOs at half flux each, rotated into the
            // error frame of the running estimate
            const double dy1 = gain_dual * std::sin(phi) * dt + noise_sd * meas_noise();
            const double dy2 = gain_dual * std::sin(phi - 0.5 * pi) * dt + noise_sd * meas_noise2();
            const double dz = std::cos(estimate) * dy1 + std::sin(estimate) * dy2;
            estimate += chi * dz;
        }
        if (step_sd > 0.0) phi += step_sd * phase_noise();

        const double err = wrap_angle(phi - estimate);
        if (std::abs(err) > 0.5 * pi) ++out_of_lock;
        if (out_of_lock > lock_window) run.lock_lost = true;
        if (k >= burn_steps) {
            acc += err * err;
            ++run.samples;
        }
        if (opt.record_paths) {
            run.true_phase.push_back(wrap_angle(phi));
            run.estimate.push_back(wrap_angle(estimate));
            run.lo_phase.push_back(Adaptive ? wrap_angle(estimate) : 0.0);
        }
    }
    run.steady_mse = acc / static_cast<double>(run.samples);
    return run;
}

}  // namespace detail

inline TrackerRun adaptive_track(const BeamSpec& spec, double chi, std::uint64_t seed,
                                 const TrackerOptions& opt = {}) {
    return detail::run_tracker<true>(spec, chi, seed, opt);
}

inline TrackerRun nonadaptive_track(const BeamSpec& spec, double chi, std::uint64_t seed,
                                    const TrackerOptions& opt = {}) {
    return detail::run_tracker<false>(spec, chi, seed, opt);
}

/// Raised when more than one percent of trajectories lose lock.
struct LockLossBudgetExceeded : std::runtime_error {
    explicit LockLossBudgetExceeded(const std::string& what) : std::runtime_error(what) {}
};

struct MseEstimate {
    double mse = 0.0;
    double stderr_ = 0.0;
    int trajectories = 0;
    int excluded = 0;  // lock-loss exclusions
};

/// Ensemble MSE over independent trajectories.
inline MseEstimate track_mse_mc(const BeamSpec& spec, double chi, TrackingScheme scheme,
                                int n_traj, std::uint64_t seed, const TrackerOptions& opt = {}) {
    if (n_traj < 2) throw std::invalid_argument("track_mse_mc: need at least two trajectories");
    std::vector<double> mse(n_traj);
    std::vector<char> lost(n_traj, 0);
    parallel_for(n_traj, [&](std::size_t i) {
        const std::uint64_t traj_seed = derive_seed(seed, 17, i);
        const TrackerRun run = scheme == TrackingScheme::adaptive
                                   ? adaptive_track(spec, chi, traj_seed, opt)
                                   : nonadaptive_track(spec, chi, traj_seed, opt);
        mse[i] = run.steady_mse;
        lost[i] = run.lock_lost ? 1 : 0;
    });
    MseEstimate est;
    est.trajectories = n_traj;
    std::vector<double> kept;
    kept.reserve(n_traj);
    for (int i = 0; i < n_traj; ++i) {
        if (lost[i]) {
            ++est.excluded;
        } else {
            kept.push_back(mse[i]);
        }
    }
    if (est.excluded > 0.01 * n_traj)
        throw LockLossBudgetExceeded("track_mse_mc: more than 1% of trajectories lost lock");
    const MeanStderr ms = mean_stderr(kept);
    est.mse = ms.mean;
    est.stderr_ = ms.stderr_;
    return est;
}

struct AutocorrelationPoint {
    double tau = 0.0;
    double mean = 0.0;    // Re <e^{i(phi(tau) - phi(0))}>
    double stderr_ = 0.0;
    double theory = 0.0;  // e^{-ell tau / 2}
};

/// Ensemble autocorrelation of the beam phase factor at the given lags.
inline std::vector<AutocorrelationPoint> beam_autocorrelation(const BeamSpec& spec,
                                                              const std::vector<double>& taus,
                                                              int n_traj, std::uint64_t seed,
                                                              double dt = 0.0) {
    spec.validate();
    if (spec.linewidth <= 0.0)
        throw std::invalid_argument("beam_autocorrelation: need a diffusing phase");
    if (dt <= 0.0) dt = 1e-2 / spec.linewidth;
    const double t_max = *std::max_element(taus.begin(), taus.end());
    std::vector<std::vector<double>> per_tau(taus.size(), std::vector<double>(n_traj));
    parallel_for(n_traj, [&](std::size_t i) {
        const PhasePath path = simulate_phase_path(spec, dt, t_max, derive_seed(seed, 23, i));
        for (std::size_t j = 0; j < taus.size(); ++j) {
            const long k = std::lround(taus[j] / dt);
            per_tau[j][i] = std::cos(path.phase[k] - path.phase[0]);
        }
    });
    std::vector<AutocorrelationPoint> out(taus.size());
    for (std::size_t j = 0; j < taus.size(); ++j) {
        const MeanStderr ms = mean_stderr(per_tau[j]);
        out[j] = {taus[j], ms.mean, ms.stderr_, std::exp(-0.5 * spec.linewidth * taus[j])};
    }
    return out;
}

struct LineshapeResult {
    double fwhm = 0.0;
    double theory = 0.0;       // the diffusion rate ell
    double resolution = 0.0;   // frequency-bin spacing
    int n_fft = 0;
    int trajectories = 0;
};

/// Trajectory-averaged periodogram of e^{i phi(t)} and its full width at
/// half maximum. Initial phases are randomized so the ensemble is
/// stationary and the mean periodogram estimates the Lorentzian line.
inline LineshapeResult beam_lineshape(const BeamSpec& spec, int n_traj, std::uint64_t seed,
                                      int n_fft = 8192, double span_coherence_times = 128.0) {
    spec.validate();
    if (spec.linewidth <= 0.0) throw std::invalid_argument("beam_lineshape: need a diffusing phase");
    const double horizon = span_coherence_times / spec.linewidth;
    const double dt = horizon / n_fft;
    const double step_sd = std::sqrt(spec.linewidth * dt);

    const int chunk = 64;
    const int n_chunks = (n_traj + chunk - 1) / chunk;
    std::vector<std::vector<double>> partial(n_chunks);
    parallel_for(n_chunks, [&](std::size_t c) {
        Eigen::FFT<double> fft;
        std::vector<complexd> signal(n_fft), spectrum(n_fft);
        std::vector<double> acc(n_fft, 0.0);
        const int lo = static_cast<int>(c) * chunk;
        const int hi = std::min(n_traj, lo + chunk);
        for (int i = lo; i < hi; ++i) {
            NormalStream noise(derive_seed(seed, 29, i));
            double phi = 2.0 * pi * (noise.uniform() - 0.5);
            for (int k = 0; k < n_fft; ++k) {
                signal[k] = std::exp(complexd(0.0, phi));
                phi += step_sd * noise();
            }
            fft.fwd(spectrum, signal);
            for (int k = 0; k < n_fft; ++k) acc[k] += std::norm(spectrum[k]);
        }
        partial[c] = std::move(acc);
    });

    // centered spectrum, bin k -> omega = 2 pi (k - n/2) / horizon
    std::vector<double> spec_avg(n_fft, 0.0);
    for (const auto& acc : partial)
        for (int k = 0; k < n_fft; ++k) spec_avg[k] += acc[k];
    std::vector<double> centered(n_fft);
    for (int bin = 0; bin < n_fft; ++bin) {
        const int signed_k = bin < n_fft / 2 ? bin : bin - n_fft;
        centered[signed_k + n_fft / 2] = spec_avg[bin];
    }
    auto omega_at = [&](double idx) { return 2.0 * pi * (idx - n_fft / 2) / horizon; };

    int peak = 0;
    for (int k = 1; k < n_fft; ++k)
        if (centered[k] > centered[peak]) peak = k;
    const double half = 0.5 * centered[peak];
    auto crossing = [&](int direction) {
        int k = peak;
        while (k + direction > 0 && k + direction < n_fft - 1 && centered[k] > half) k += direction;
        const double s_in = centered[k - direction], s_out = centered[k];
        const double w_in = omega_at(k - direction), w_out = omega_at(k);
        return w_in + (half - s_in) * (w_out - w_in) / (s_out - s_in);
    };

    LineshapeResult result;
    result.fwhm = crossing(+1) - crossing(-1);
    result.theory = spec.linewidth;
    result.resolution = 2.0 * pi / horizon;
    result.n_fft = n_fft;
    result.trajectories = n_traj;
    return result;
}

struct ScalingFit {
    double exponent = 0.0;
    double prefactor = 0.0;
    double rms_residual = 0.0;
};

/// Power-law fit mse ~ prefactor * N^exponent over (N, mse) points.
inline ScalingFit scaling_fit(const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 3) throw std::invalid_argument("scaling_fit: need at least three points");
    std::vector<double> x, y;
    for (const auto& [n, mse] : points) {
        x.push_back(std::log(n));
        y.push_back(std::log(mse));
    }
    const LinearFit fit = fit_line(x, y);
    return {fit.slope, std::exp(fit.intercept), fit.rms_residual};
}

}  // namespace laserclock
