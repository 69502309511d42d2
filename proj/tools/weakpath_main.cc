#include <fstream>
#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "commands.h"

using namespace weakpath::cli;

namespace {

enum ExitCode { kOk = 0, kCheckFailed = 1, kError = 2 };

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Weak values and sequential weak values on path networks"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "TOML/INI file with option defaults; command line flags win");

    ScenarioConfig config;
    std::string out_path;
    std::string seed_text;
    std::string target_text;
    std::optional<double> grid_l;
    std::optional<std::size_t> grid_m;

    std::map<std::string, OutputFormat> formats{{"csv", OutputFormat::csv}, {"json", OutputFormat::json}};

    app.add_option("--network", config.network, "network file, or 'preset' for the nested interferometer")
        ->capture_default_str();
    app.add_option("--postselect", config.postselect, "detector port to postselect on")->capture_default_str();
    app.add_option("--meter", config.meters, "arm@slice[:g=<v>,sigma=<v>], repeatable");
    app.add_option("--chain", config.chains, "arm@slice,arm@slice,..., repeatable");
    app.add_option("--format", config.format, "csv or json")->transform(CLI::CheckedTransformer(formats));
    app.add_option("--seed", seed_text, "random seed (montecarlo)");
    app.add_option("--out", out_path, "write output here instead of stdout");
    app.add_option("--g", config.strengths, "coupling strengths for the disturbance sweep");
    app.add_option("--target", target_text, "arm@slice whose probability the disturbance sweep reports");
    app.add_option("--sweep-start", config.sweep_start, "first g of the meter sweep")->capture_default_str();
    app.add_option("--sweep-factor", config.sweep_factor, "ratio between sweep points")->capture_default_str();
    app.add_option("--sweep-points", config.sweep_points, "number of sweep points")->capture_default_str();
    app.add_option("--samples", config.samples, "accepted samples per quadrature combination")
        ->capture_default_str();
    app.add_option("--export-dir", config.export_dir, "write raw batches and metadata here");
    app.add_option("--grid-L", grid_l, "grid half width");
    app.add_option("--grid-M", grid_m, "grid points per pointer (odd)");
    app.add_option("--tolerance", config.oracle_tolerance, "oracle absolute tolerance")->capture_default_str();
    app.add_flag("--bare", config.bare, "oracle: no meters, network only");

    app.add_subcommand("weak-values", "weak value of every arm projector at every slice");
    app.add_subcommand("sequential", "sequential weak values of projector chains");
    app.add_subcommand("disturbance", "target probability against coupling strength for one meter");
    app.add_subcommand("meter-sweep", "pointer estimators against exact values over a dyadic g sweep");
    app.add_subcommand("montecarlo", "sampled pointer readings and jackknife estimates");
    app.add_subcommand("oracle", "analytic meter model against a brute-force grid simulation");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        int code = app.exit(e);
        return code == 0 ? kOk : kError;
    }

    try {
        if (!seed_text.empty()) {
            std::size_t used = 0;
            config.seed = std::stoull(seed_text, &used);
            if (used != seed_text.size()) {
                throw std::invalid_argument("bad --seed '" + seed_text + "'");
            }
        }
        if (!target_text.empty()) {
            config.target = target_text;
        }
        config.grid_half_width = grid_l;
        config.grid_points = grid_m;

        const std::string name = app.get_subcommands().front()->get_name();
        CommandResult result;
        if (name == "weak-values") {
            result = cmd_weak_values(config);
        } else if (name == "sequential") {
            result = cmd_sequential(config);
        } else if (name == "disturbance") {
            result = cmd_disturbance(config);
        } else if (name == "meter-sweep") {
            result = cmd_meter_sweep(config);
        } else if (name == "montecarlo") {
            result = cmd_montecarlo(config);
        } else {
            result = cmd_oracle(config);
            // The comparison report is JSON unless csv was asked for explicitly.
            if (app.count("--format") == 0) {
                config.format = OutputFormat::json;
            }
        }

        if (out_path.empty()) {
            write_result(std::cout, result, config.format);
        } else {
            std::ofstream out(out_path);
            if (!out) {
                throw std::runtime_error("cannot open " + out_path);
            }
            write_result(out, result, config.format);
        }
        for (const auto &chk : result.checks) {
            if (!chk.pass) {
                std::cerr << "check failed: " << chk.name << "\n";
            }
        }
        return result.ok() ? kOk : kCheckFailed;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kError;
    }
}
