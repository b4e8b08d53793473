// Command-line front end: `laserclock run <experiment> [options]` executes
// one experiment and writes its artifacts; `laserclock report <dir>`
// aggregates completed runs.

#include <CLI11.hpp>

#include "laserclock/cli.hpp"

namespace lc = laserclock;

int main(int argc, char** argv) {
    CLI::App app{"Numerical limits of a laser used as a shared clock"};
    app.require_subcommand(1);

    std::string experiment, config_path, out_dir, formats;
    std::uint64_t seed = 0;
    bool seed_set = false, out_set = false, formats_set = false;

    std::string experiments_help = "one of:";
    for (const auto& name : lc::cli::experiment_names()) experiments_help += " " + name;

    CLI::App* run = app.add_subcommand("run", "execute one experiment");
    run->add_option("experiment", experiment, experiments_help)->required();
    run->add_option("--config", config_path, "key = value parameter file");
    run->add_option("--seed", seed, "random seed")->each([&](const std::string&) { seed_set = true; });
    run->add_option("--out", out_dir, "output directory")->each([&](const std::string&) { out_set = true; });
    run->add_option("--formats", formats, "comma list of csv,json")
        ->each([&](const std::string&) { formats_set = true; });
    run->allow_extras();  // remaining --key value pairs become parameter overrides

    std::string report_dir;
    CLI::App* report = app.add_subcommand("report", "aggregate completed runs in a directory");
    report->add_option("directory", report_dir, "directory holding run subdirectories")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : lc::cli::exit_config_error;
    }

    try {
        if (run->parsed()) {
            std::map<std::string, std::string> overrides;
            const std::vector<std::string> extras = run->remaining();
            for (std::size_t i = 0; i < extras.size(); ++i) {
                std::string key = extras[i];
                if (key.rfind("--", 0) != 0)
                    throw lc::cli::ConfigError("expected --key value pairs, got: " + key);
                key = key.substr(2);
                const auto eq = key.find('=');
                if (eq != std::string::npos) {
                    overrides[key.substr(0, eq)] = key.substr(eq + 1);
                } else {
                    if (i + 1 >= extras.size())
                        throw lc::cli::ConfigError("missing value for --" + key);
                    overrides[key] = extras[++i];
                }
            }
            if (seed_set) overrides["seed"] = std::to_string(seed);
            if (out_set) overrides["out"] = out_dir;
            if (formats_set) overrides["formats"] = formats;

            std::map<std::string, std::string> file_params;
            if (!config_path.empty()) file_params = lc::cli::parse_config_file(config_path);

            const lc::cli::RunConfig config =
                lc::cli::make_run_config(experiment, file_params, overrides);
            const lc::cli::RunResult result = lc::cli::run_experiment(config);
            const int code = lc::cli::write_run(result);
            std::cout << lc::cli::summary_text(result);
            std::cout << "artifacts: " << config.out_dir.string() << '\n';
            return code;
        }
        if (report->parsed()) {
            const lc::cli::ReportSummary summary = lc::cli::report_directory(report_dir);
            std::cout << summary.text;
            return summary.pass() ? lc::cli::exit_ok : lc::cli::exit_tolerance_failure;
        }
    } catch (const lc::cli::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return lc::cli::exit_config_error;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return lc::cli::exit_config_error;
    } catch (const lc::LockLossBudgetExceeded& e) {
        std::cerr << "lock-loss budget exceeded: " << e.what() << '\n';
        return lc::cli::exit_lock_loss;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return lc::cli::exit_tolerance_failure;
    }
    return lc::cli::exit_config_error;
}
