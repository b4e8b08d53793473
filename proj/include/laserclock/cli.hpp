#pragma once

// Batch front-end: experiment configuration (key=value files plus
// overrides), orchestration of the simulation modules, deterministic
// result tables, and report aggregation over completed runs.
//
// Exit codes: 0 pass, 2 configuration error, 3 tolerance failure,
// 4 lock-loss budget exceeded.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "laserclock/ensemble.hpp"
#include "laserclock/fock.hpp"
#include "laserclock/liouvillian.hpp"
#include "laserclock/pixel.hpp"
#include "laserclock/sync.hpp"
#include "laserclock/tracking.hpp"
#include "laserclock/version.hpp"

namespace laserclock::cli {

using json = nlohmann::ordered_json;

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

inline constexpr int exit_ok = 0;
inline constexpr int exit_config_error = 2;
inline constexpr int exit_tolerance_failure = 3;
inline constexpr int exit_lock_loss = 4;

/// Full-precision text form so reruns produce byte-identical tables.
inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct ParamSpec {
    std::string key;
    std::string default_value;
    std::string help;
};

inline const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names = {"ensemble-equality", "linewidth", "channel",
                                                   "track-scaling", "sync", "budget"};
    return names;
}

inline const std::vector<ParamSpec>& experiment_schema(const std::string& experiment) {
    static const std::map<std::string, std::vector<ParamSpec>> schemas = {
        {"ensemble-equality",
         {{"mu", "9", "mean photon number"},
          {"dim", "0", "Fock truncation (0 = automatic)"},
          {"phase-points", "0", "phase quadrature points (0 = automatic)"}}},
        {"linewidth",
         {{"mu", "20", "mean photon number"},
          {"kappa", "1", "cavity loss rate"},
          {"gain", "both", "gain kind: hl, standard or both"},
          {"dim", "0", "Fock truncation (0 = automatic)"}}},
        {"channel",
         {{"alpha-abs", "10", "input coherent amplitude"},
          {"alpha-phase", "0", "input phase (rad)"},
          {"delta", "1", "pixel width"},
          {"sweep-phases", "0", "phases for the reference-error sweep (0 = skip)"}}},
        {"track-scaling",
         {{"scheme", "both", "adaptive, nonadaptive or both"},
          {"coherence-numbers", "100,1000,10000", "comma-separated N values"},
          {"linewidth", "1", "phase diffusion rate"},
          {"trajectories", "1000", "trajectories per point"}}},
        {"sync",
         {{"mu", "400", "source mean photon number"},
          {"parties", "4", "number of receivers"},
          {"kappa", "1", "cavity loss rate"},
          {"gain", "both", "hl (adaptive tracking), sql (dual homodyne) or both"},
          {"trajectories", "2000", "Monte Carlo trajectories"}}},
        {"budget",
         {{"power", "1e-3", "beam power, watts"},
          {"lambda", "600e-9", "wavelength, meters (ignored when omega > 0)"},
          {"omega", "0", "optical angular frequency, rad/s (0 = from lambda)"},
          {"linewidth", "1e6", "linewidth, 1/s"},
          {"parties", "1", "number of receivers"}}},
    };
    const auto it = schemas.find(experiment);
    if (it == schemas.end()) throw ConfigError("unknown experiment: " + experiment);
    return it->second;
}

struct RunConfig {
    std::string experiment;
    std::uint64_t seed = 1;
    std::filesystem::path out_dir;
    std::set<std::string> formats = {"csv", "json"};
    std::map<std::string, std::string> params;

    double real(const std::string& key) const { return std::stod(params.at(key)); }
    long integer(const std::string& key) const { return std::stol(params.at(key)); }
    const std::string& text(const std::string& key) const { return params.at(key); }
};

/// key = value lines; '#' starts a comment.
inline std::map<std::string, std::string> parse_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    std::map<std::string, std::string> out;
    std::string line;
    auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t\r\n");
        const auto b = s.find_last_not_of(" \t\r\n");
        return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
        if (!out.emplace(key, value).second)
            throw ConfigError("config line " + std::to_string(lineno) + ": duplicate key " + key);
    }
    return out;
}

/// Resolve experiment parameters: schema defaults, then file values, then
/// command-line overrides. Unknown keys are rejected.
inline RunConfig make_run_config(const std::string& experiment,
                                 const std::map<std::string, std::string>& file_params,
                                 const std::map<std::string, std::string>& overrides) {
    RunConfig config;
    config.experiment = experiment;
    const auto& schema = experiment_schema(experiment);
    for (const auto& p : schema) config.params[p.key] = p.default_value;

    auto apply = [&](const std::map<std::string, std::string>& src, const char* origin) {
        for (const auto& [key, value] : src) {
            if (key == "experiment") {
                if (value != experiment)
                    throw ConfigError(std::string(origin) + ": experiment mismatch: " + value);
            } else if (key == "seed") {
                config.seed = std::stoull(value);
            } else if (key == "out") {
                config.out_dir = value;
            } else if (key == "formats") {
                config.formats.clear();
                std::stringstream ss(value);
                std::string item;
                while (std::getline(ss, item, ',')) {
                    if (item != "csv" && item != "json")
                        throw ConfigError(std::string(origin) + ": unknown format " + item);
                    config.formats.insert(item);
                }
                if (config.formats.empty())
                    throw ConfigError(std::string(origin) + ": empty format list");
            } else if (config.params.count(key)) {
                config.params[key] = value;
            } else {
                throw ConfigError(std::string(origin) + ": unknown key '" + key + "' for experiment " +
                                  experiment);
            }
        }
    };
    apply(file_params, "config file");
    apply(overrides, "command line");

    if (config.out_dir.empty()) {
        const char* base = std::getenv("LASERCLOCK_OUT");
        config.out_dir = std::filesystem::path(base ? base : "runs") / experiment;
    }
    return config;
}

enum class ToleranceKind { relative, absolute, interval, informational };

inline const char* to_string(ToleranceKind k) {
    switch (k) {
        case ToleranceKind::relative: return "relative";
        case ToleranceKind::absolute: return "absolute";
        case ToleranceKind::interval: return "interval";
        case ToleranceKind::informational: return "informational";
    }
    return "?";
}

struct ResultRow {
    std::string name;
    std::string formula;  // closed-form reference the row checks
    double theory = 0.0;
    double measured = 0.0;
    double stderr_ = std::numeric_limits<double>::quiet_NaN();
    ToleranceKind kind = ToleranceKind::informational;
    double tol_a = 0.0, tol_b = 0.0;  // rel/abs tolerance, or interval ends
    bool pass = true;
};

inline ResultRow row_relative(std::string name, std::string formula, double theory, double measured,
                              double rel_tol, double stderr_ = std::numeric_limits<double>::quiet_NaN()) {
    ResultRow row{std::move(name), std::move(formula), theory, measured, stderr_,
                  ToleranceKind::relative, rel_tol, 0.0, false};
    row.pass = std::abs(measured - theory) <= rel_tol * std::abs(theory);
    return row;
}

inline ResultRow row_absolute(std::string name, std::string formula, double theory, double measured,
                              double abs_tol, double stderr_ = std::numeric_limits<double>::quiet_NaN()) {
    ResultRow row{std::move(name), std::move(formula), theory, measured, stderr_,
                  ToleranceKind::absolute, abs_tol, 0.0, false};
    row.pass = std::abs(measured - theory) <= abs_tol;
    return row;
}

inline ResultRow row_interval(std::string name, std::string formula, double theory, double measured,
                              double lo, double hi,
                              double stderr_ = std::numeric_limits<double>::quiet_NaN()) {
    ResultRow row{std::move(name), std::move(formula), theory, measured, stderr_,
                  ToleranceKind::interval, lo, hi, false};
    row.pass = measured >= lo && measured <= hi;
    return row;
}

inline ResultRow row_info(std::string name, std::string formula, double theory, double measured,
                          double stderr_ = std::numeric_limits<double>::quiet_NaN()) {
    return {std::move(name), std::move(formula), theory, measured, stderr_,
            ToleranceKind::informational, 0.0, 0.0, true};
}

struct RunResult {
    RunConfig config;
    std::vector<ResultRow> rows;
    std::vector<std::pair<std::string, std::string>> tables;  // filename -> CSV text
    std::vector<std::pair<std::string, std::string>> plots;   // filename -> gnuplot-style text

    bool pass() const {
        for (const auto& r : rows)
            if (!r.pass) return false;
        return true;
    }
};

namespace detail {

inline GainKind parse_gain(const std::string& text) {
    if (text == "hl") return GainKind::hl_noiseless;
    if (text == "standard" || text == "sql") return GainKind::standard_surrogate;
    throw ConfigError("unknown gain kind: " + text);
}

inline std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
    if (out.empty()) throw ConfigError("empty list parameter");
    return out;
}

inline RunResult run_ensemble_equality(const RunConfig& config) {
    RunResult result{config, {}, {}, {}};
    const double mu = config.real("mu");
    EnsembleSpec spec = default_ensemble_spec(mu);
    if (config.integer("dim") > 0) spec.dim = static_cast<int>(config.integer("dim"));
    if (config.integer("phase-points") > 0)
        spec.phase_points = static_cast<int>(config.integer("phase-points"));
    const DensityMatrix averaged = phase_averaged_mixture(spec);
    const DensityMatrix poisson = poisson_mixture(spec);
    const double deviation = (averaged.matrix - poisson.matrix).cwiseAbs().maxCoeff();
    result.rows.push_back(row_absolute("ensemble-max-abs-deviation",
                                       "phase-averaged mixture equals Poisson number mixture", 0.0,
                                       deviation, 1e-8));
    double mean_n = 0.0;
    for (int n = 0; n < spec.dim; ++n) mean_n += n * poisson.matrix(n, n).real();
    result.rows.push_back(row_relative("poisson-mean-photons", "mean of Poisson(mu) = mu", mu,
                                       mean_n, 1e-6));
    result.rows.push_back(row_info("ensemble-dim", "resolved Fock truncation", 0.0, spec.dim));
    result.rows.push_back(
        row_info("ensemble-phase-points", "resolved quadrature points", 0.0, spec.phase_points));
    return result;
}

inline RunResult run_linewidth(const RunConfig& config) {
    RunResult result{config, {}, {}, {}};
    const double mu = config.real("mu");
    const double kappa = config.real("kappa");
    const int dim = static_cast<int>(config.integer("dim"));
    const std::string gain_text = config.text("gain");
    std::vector<GainKind> gains;
    if (gain_text == "both") {
        gains = {GainKind::hl_noiseless, GainKind::standard_surrogate};
    } else {
        gains = {parse_gain(gain_text)};
    }
    std::map<GainKind, double> measured;
    for (GainKind gain : gains) {
        LiouvillianSpec spec{kappa, mu, gain, 0.0};
        const LinewidthResult lw = g1_linewidth(spec, dim);
        measured[gain] = lw.linewidth;
        const std::string tag = gain == GainKind::hl_noiseless ? "hl" : "standard";
        const std::string formula =
            gain == GainKind::hl_noiseless ? "kappa/(4 mu)" : "kappa/(2 mu)";
        result.rows.push_back(
            row_relative("linewidth-" + tag, formula, lw.theory, lw.linewidth, 0.10));
        result.rows.push_back(row_info("linewidth-" + tag + "-fit-residual",
                                       "rms log residual of the exponential fit", 0.0,
                                       lw.fit_residual));
    }
    if (gains.size() == 2) {
        const double ratio =
            measured[GainKind::standard_surrogate] / measured[GainKind::hl_noiseless];
        result.rows.push_back(row_absolute("linewidth-ratio-standard-over-hl",
                                           "standard/noiseless linewidth ratio = 2", 2.0, ratio,
                                           0.1));
    }
    return result;
}

inline RunResult run_channel(const RunConfig& config) {
    RunResult result{config, {}, {}, {}};
    const double amp = config.real("alpha-abs");
    const double phase = config.real("alpha-phase");
    const double delta = config.real("delta");
    const complexd alpha = amp * std::exp(complexd(0.0, phase));
    const PixelBasisSpec spec = default_pixel_spec(alpha, delta);
    const ChannelOutput out = apply_channel(alpha, spec);

    result.rows.push_back(row_absolute("channel-completeness",
                                       "pixel probabilities sum to one", 1.0,
                                       out.covered_probability + out.q_tail_bound, 1e-6));
    const double rel_err = std::abs(out.output_amplitude - alpha) / std::abs(alpha);
    result.rows.push_back(row_absolute("channel-amplitude-relative-error",
                                       "output mean amplitude approximates the input", 0.0,
                                       rel_err, 0.05));
    result.rows.push_back(row_info("channel-output-phase-error",
                                   "arg of output amplitude tracks the input phase", 0.0,
                                   wrap_angle(std::arg(out.output_amplitude) - phase)));
    result.rows.push_back(
        row_info("channel-q-tail-bound", "coherent weight outside the box window", 0.0,
                 out.q_tail_bound));

    std::ostringstream csv;
    csv << "n,m,q_n,p_m,probability\n";
    for (int bi = 0; bi < out.table.rows(); ++bi) {
        const int n = spec.n_min + bi;
        for (int ci = 0; ci < out.table.cols(); ++ci) {
            const int m = spec.m_center - spec.m_halfwidth + ci;
            csv << n << ',' << m << ',' << format_double(spec.box_center(n)) << ','
                << format_double(spec.momentum(m)) << ',' << format_double(out.table(bi, ci))
                << '\n';
        }
    }
    result.tables.emplace_back("pixel_probabilities.csv", csv.str());

    const long sweep = config.integer("sweep-phases");
    if (sweep > 0) {
        const double rms = channel_phase_reference_error(amp, delta, static_cast<int>(sweep));
        result.rows.push_back(row_info("channel-phase-reference-rms-error",
                                       "RMS input-output phase error over a phase sweep", 0.0,
                                       rms));
    }
    return result;
}

inline RunResult run_track_scaling(const RunConfig& config) {
    RunResult result{config, {}, {}, {}};
    const std::vector<double> ns = parse_list(config.text("coherence-numbers"));
    const double ell = config.real("linewidth");
    const int n_traj = static_cast<int>(config.integer("trajectories"));
    const std::string scheme_text = config.text("scheme");
    std::vector<TrackingScheme> schemes;
    if (scheme_text == "both") {
        schemes = {TrackingScheme::adaptive, TrackingScheme::nonadaptive};
    } else if (scheme_text == "adaptive") {
        schemes = {TrackingScheme::adaptive};
    } else if (scheme_text == "nonadaptive") {
        schemes = {TrackingScheme::nonadaptive};
    } else {
        throw ConfigError("unknown scheme: " + scheme_text);
    }

    std::ostringstream record;
    record << "scheme,N,flux,linewidth,chi,mse,stderr,excluded\n";
    for (TrackingScheme scheme : schemes) {
        const bool adaptive = scheme == TrackingScheme::adaptive;
        std::vector<std::pair<double, double>> points;
        std::ostringstream plot;
        plot << "# N  mse  stderr  theory\n";
        for (double n : ns) {
            if (n < 100.0) throw ConfigError("coherence numbers below 100 are outside the model");
            const BeamSpec beam{n * ell, ell};
            const double chi = std::sqrt(ell);
            const MseEstimate est =
                track_mse_mc(beam, chi, scheme, n_traj, derive_seed(config.seed, adaptive ? 1 : 2,
                                                                    static_cast<std::uint64_t>(n)));
            const double theory = adaptive ? 1.0 / (2.0 * std::sqrt(n)) : 1.0 / std::sqrt(2.0 * n);
            const std::string formula = adaptive ? "1/(2 sqrt(N))" : "1/sqrt(2 N)";
            std::ostringstream name;
            name << "track-" << to_string(scheme) << "-N" << static_cast<long>(n);
            result.rows.push_back(
                row_relative(name.str(), formula, theory, est.mse, 0.10, est.stderr_));
            points.emplace_back(n, est.mse);
            plot << format_double(n) << ' ' << format_double(est.mse) << ' '
                 << format_double(est.stderr_) << ' ' << format_double(theory) << '\n';
            record << to_string(scheme) << ',' << format_double(n) << ','
                   << format_double(beam.flux) << ',' << format_double(ell) << ','
                   << format_double(chi) << ',' << format_double(est.mse) << ','
                   << format_double(est.stderr_) << ',' << est.excluded << '\n';
        }
        if (points.size() >= 3) {
            const ScalingFit fit = scaling_fit(points);
            result.rows.push_back(row_absolute(std::string("track-") + to_string(scheme) + "-slope",
                                               "mse scales as N^(-1/2)", -0.5, fit.exponent, 0.1));
        }
        result.plots.emplace_back(std::string("track_") + to_string(scheme) + ".dat", plot.str());
    }
    result.tables.emplace_back("track_points.csv", record.str());
    return result;
}

inline RunResult run_sync(const RunConfig& config) {
    RunResult result{config, {}, {}, {}};
    const double mu = config.real("mu");
    const int parties = static_cast<int>(config.integer("parties"));
    const double kappa = config.real("kappa");
    const int n_traj = static_cast<int>(config.integer("trajectories"));
    const std::string gain_text = config.text("gain");
    std::vector<GainKind> gains;
    if (gain_text == "both") {
        gains = {GainKind::hl_noiseless, GainKind::standard_surrogate};
    } else {
        gains = {parse_gain(gain_text)};
    }
    const SyncBudget budget = make_sync_budget(mu, parties, kappa);
    result.rows.push_back(row_info("sync-bound-hl", "sqrt(M)/(4 mu)", 0.0, budget.hl));
    result.rows.push_back(row_info("sync-bound-sql", "sqrt(M)/(2 mu)", 0.0, budget.sql));
    result.rows.push_back(
        row_info("sync-bound-split-coherent", "M/(4 mu)", 0.0, budget.split_coherent));
    result.rows.push_back(
        row_info("sync-flux-per-party", "kappa mu / M", 0.0, budget.flux_per_party));
    result.rows.push_back(row_info("sync-coherence-number-hl", "p/ell at the hl linewidth", 0.0,
                                   budget.coherence_number_hl));
    for (GainKind gain : gains) {
        const bool hl = gain == GainKind::hl_noiseless;
        const EndToEndResult e2e = end_to_end_mc(mu, parties, kappa, gain, n_traj,
                                                 derive_seed(config.seed, hl ? 11 : 13));
        const std::string tag = hl ? "hl-adaptive" : "sql-nonadaptive";
        const std::string formula = hl ? "sqrt(M)/(4 mu)" : "sqrt(M)/(2 mu)";
        result.rows.push_back(row_interval("sync-" + tag + "-mse-over-bound",
                                           formula + " within [1.0, 1.5] of measured", 1.0,
                                           e2e.ratio, 1.0, 1.5, e2e.stderr_ / e2e.bound));
        result.rows.push_back(
            row_info("sync-" + tag + "-measured-mse", formula, e2e.bound, e2e.mse, e2e.stderr_));
        if (parties > 1)
            result.rows.push_back(row_info("sync-" + tag + "-pair-correlation",
                                           "shared source path correlates party errors at 1/2",
                                           0.5, e2e.pair_correlation,
                                           e2e.pair_correlation_stderr));
    }
    return result;
}

inline RunResult run_budget(const RunConfig& config) {
    RunResult result{config, {}, {}, {}};
    const double power = config.real("power");
    const double ell = config.real("linewidth");
    const double parties = config.real("parties");
    double omega = config.real("omega");
    if (omega <= 0.0) omega = omega_from_wavelength(config.real("lambda"));
    const double root_m = std::sqrt(parties);

    // The linewidth unit is ambiguous by 2 pi (cycles vs radians); both
    // readings are reported.
    const PhysicalBudget direct = physical_bound(power, omega, ell, parties);
    const PhysicalBudget angular = physical_bound(power, omega, 2.0 * pi * ell, parties);
    result.rows.push_back(row_interval("budget-bound", "sqrt(hbar omega M ell / P)", 1.8e-5 * root_m,
                                       direct.bound, 1e-5 * root_m, 5e-5 * root_m));
    result.rows.push_back(row_interval("budget-bound-angular-linewidth",
                                       "sqrt(hbar omega M (2 pi ell) / P)", 4.5e-5 * root_m,
                                       angular.bound, 1e-5 * root_m, 5e-5 * root_m));
    result.rows.push_back(row_info("budget-photons-per-second-per-party", "P/(hbar omega M)", 0.0,
                                   direct.photons_per_second));
    result.rows.push_back(row_info("budget-coherence-number-per-party", "p/ell", 0.0,
                                   direct.coherence_number));
    return result;
}

}  // namespace detail

inline RunResult run_experiment(const RunConfig& config) {
    if (config.experiment == "ensemble-equality") return detail::run_ensemble_equality(config);
    if (config.experiment == "linewidth") return detail::run_linewidth(config);
    if (config.experiment == "channel") return detail::run_channel(config);
    if (config.experiment == "track-scaling") return detail::run_track_scaling(config);
    if (config.experiment == "sync") return detail::run_sync(config);
    if (config.experiment == "budget") return detail::run_budget(config);
    throw ConfigError("unknown experiment: " + config.experiment);
}

inline std::string results_csv(const RunResult& result) {
    std::ostringstream out;
    out << "name,formula,theory,measured,stderr,tolerance_type,tol_a,tol_b,pass\n";
    for (const auto& r : result.rows) {
        out << r.name << ",\"" << r.formula << "\"," << format_double(r.theory) << ','
            << format_double(r.measured) << ','
            << (std::isnan(r.stderr_) ? std::string() : format_double(r.stderr_)) << ','
            << to_string(r.kind) << ',' << format_double(r.tol_a) << ',' << format_double(r.tol_b)
            << ',' << (r.pass ? "true" : "false") << '\n';
    }
    return out.str();
}

inline json results_json(const RunResult& result) {
    json doc;
    json cfg;
    cfg["experiment"] = result.config.experiment;
    cfg["seed"] = result.config.seed;
    for (const auto& [k, v] : result.config.params) cfg[k] = v;
    doc["config"] = cfg;
    json rows = json::array();
    for (const auto& r : result.rows) {
        json row;
        row["name"] = r.name;
        row["formula"] = r.formula;
        row["theory"] = r.theory;
        row["measured"] = r.measured;
        if (std::isnan(r.stderr_)) {
            row["stderr"] = nullptr;
        } else {
            row["stderr"] = r.stderr_;
        }
        row["tolerance_type"] = to_string(r.kind);
        row["tol_a"] = r.tol_a;
        row["tol_b"] = r.tol_b;
        row["pass"] = r.pass;
        rows.push_back(row);
    }
    doc["results"] = rows;
    doc["pass"] = result.pass();
    return doc;
}

/// Short form for the human-readable summary; tables keep full precision.
inline std::string format_short(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

inline std::string summary_text(const RunResult& result) {
    std::ostringstream out;
    out << tool_name << ' ' << tool_version << " -- " << result.config.experiment << '\n';
    for (const auto& r : result.rows) {
        out << (r.pass ? "[PASS] " : "[FAIL] ") << r.name << ": measured "
            << format_short(r.measured);
        if (r.kind != ToleranceKind::informational) out << ", reference " << format_short(r.theory);
        out << " (" << r.formula;
        switch (r.kind) {
            case ToleranceKind::relative: out << "; relative tolerance " << r.tol_a; break;
            case ToleranceKind::absolute: out << "; absolute tolerance " << r.tol_a; break;
            case ToleranceKind::interval: out << "; interval [" << r.tol_a << ", " << r.tol_b << "]"; break;
            case ToleranceKind::informational: break;
        }
        out << ")\n";
    }
    out << (result.pass() ? "ALL PASS" : "FAILURES PRESENT") << '\n';
    return out.str();
}

/// Writes manifest, result tables and plot data; returns the exit code.
inline int write_run(const RunResult& result) {
    namespace fs = std::filesystem;
    const fs::path dir = result.config.out_dir;
    fs::create_directories(dir);

    json manifest;
    manifest["tool"] = tool_name;
    manifest["version"] = tool_version;
    manifest["experiment"] = result.config.experiment;
    manifest["seed"] = result.config.seed;
    json cfg;
    for (const auto& [k, v] : result.config.params) cfg[k] = v;
    manifest["config"] = cfg;
    json fmts = json::array();
    for (const auto& f : result.config.formats) fmts.push_back(f);
    manifest["formats"] = fmts;
    manifest["timestamp"] =
        std::chrono::duration_cast<std::chrono::milliseconds>(
            std::chrono::system_clock::now().time_since_epoch())
            .count();
    std::ofstream(dir / "manifest.json") << manifest.dump(2) << '\n';

    if (result.config.formats.count("csv"))
        std::ofstream(dir / "results.csv") << results_csv(result);
    if (result.config.formats.count("json"))
        std::ofstream(dir / "results.json") << results_json(result).dump(2) << '\n';
    std::ofstream(dir / "summary.txt") << summary_text(result);
    for (const auto& [name, text] : result.tables) std::ofstream(dir / name) << text;
    for (const auto& [name, text] : result.plots) std::ofstream(dir / name) << text;
    return result.pass() ? exit_ok : exit_tolerance_failure;
}

struct ReportSummary {
    int runs = 0;
    int passed = 0;
    std::vector<std::string> failing;  // "run-dir: row-name"
    std::string text;

    bool pass() const { return runs > 0 && passed == runs; }
};

/// Aggregates every completed run below `dir` into one summary document.
inline ReportSummary report_directory(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw ConfigError("report: not a directory: " + dir.string());
    ReportSummary summary;
    std::ostringstream text;
    std::vector<fs::path> subdirs;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_directory()) subdirs.push_back(entry.path());
    std::sort(subdirs.begin(), subdirs.end());
    for (const auto& sub : subdirs) {
        if (!fs::exists(sub / "manifest.json")) {
            std::cerr << "report: skipping " << sub.string() << " (no manifest)\n";
            continue;
        }
        std::ifstream results(sub / "results.json");
        if (!results) {
            std::cerr << "report: skipping " << sub.string() << " (no results.json)\n";
            continue;
        }
        json doc = json::parse(results);
        ++summary.runs;
        const bool pass = doc.at("pass").get<bool>();
        if (pass) ++summary.passed;
        text << (pass ? "[PASS] " : "[FAIL] ") << sub.filename().string() << " ("
             << doc.at("config").at("experiment").get<std::string>() << ")\n";
        for (const auto& row : doc.at("results"))
            if (!row.at("pass").get<bool>()) {
                summary.failing.push_back(sub.filename().string() + ": " +
                                          row.at("name").get<std::string>());
                text << "       failed: " << row.at("name").get<std::string>() << '\n';
            }
    }
    if (summary.runs == 0) throw ConfigError("report: no runs found in " + dir.string());
    text << summary.passed << '/' << summary.runs << " runs pass\n";
    summary.text = text.str();

    json doc;
    doc["runs"] = summary.runs;
    doc["passed"] = summary.passed;
    doc["failing"] = summary.failing;
    std::ofstream(dir / "report.json") << doc.dump(2) << '\n';
    std::ofstream(dir / "report.txt") << summary.text;
    return summary;
}

}  // namespace laserclock::cli
