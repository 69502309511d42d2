#ifndef WEAKPATH_TOOLS_COMMANDS_H
#define WEAKPATH_TOOLS_COMMANDS_H

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include "weakpath/meter.h"
#include "weakpath/oracle.h"
#include "weakpath/sampling.h"
#include "weakpath/tsvf.h"

namespace weakpath::cli {

/// `arm@slice:g=<v>,sigma=<v>`; g and sigma are optional (defaults 0.1 and 1).
struct MeterArg {
    std::string arm;
    std::size_t slice = 0;
    double strength = 0.1;
    double sigma = 1.0;
};

MeterArg parse_meter_arg(const std::string &text);

/// `arm@slice,arm@slice,...`
ProjectorChain parse_chain_arg(const std::string &text);

ArmProjector parse_projector_arg(const std::string &text);

enum class OutputFormat { csv, json };

struct ScenarioConfig {
    std::string network = "preset";
    std::string postselect = "D2";
    std::vector<std::string> meters;
    std::vector<std::string> chains;
    OutputFormat format = OutputFormat::csv;
    std::optional<std::uint64_t> seed;

    // disturbance
    std::vector<double> strengths;
    std::optional<std::string> target;

    // meter-sweep: g_k = start · factor^k, k < points
    double sweep_start = 0.2;
    double sweep_factor = 0.5;
    std::size_t sweep_points = 4;

    // montecarlo
    std::uint64_t samples = 1000000;
    std::string export_dir;

    // oracle
    std::optional<double> grid_half_width;
    std::optional<std::size_t> grid_points;
    double oracle_tolerance = 1e-7;
    bool bare = false;
};

NetworkLayout load_layout(const ScenarioConfig &config);
Experiment build_experiment(const NetworkLayout &layout, const std::vector<MeterArg> &meters);

using Cell = std::variant<std::string, double, std::int64_t>;

struct Check {
    std::string name;
    double value = 0.0;
    double expected = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

/// Output of one subcommand: a table plus the internal consistency checks
/// that decide the exit code.
struct CommandResult {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
    std::vector<Check> checks;
    std::vector<std::pair<std::string, std::string>> metadata;

    bool ok() const;
    void add_check(std::string name, double value, double expected, double tolerance);
};

void write_csv(std::ostream &out, const CommandResult &result);
void write_json(std::ostream &out, const CommandResult &result);
void write_result(std::ostream &out, const CommandResult &result, OutputFormat format);

CommandResult cmd_weak_values(const ScenarioConfig &config);
CommandResult cmd_sequential(const ScenarioConfig &config);
CommandResult cmd_disturbance(const ScenarioConfig &config);
CommandResult cmd_meter_sweep(const ScenarioConfig &config);
CommandResult cmd_montecarlo(const ScenarioConfig &config);
CommandResult cmd_oracle(const ScenarioConfig &config);

/// Least-squares slope of log(error) against log(g).
double loglog_slope(const std::vector<double> &g, const std::vector<double> &error);

/// Batch export: CSV `meter_id,quadrature,reading` and a JSON sidecar.
void write_batch_csv(std::ostream &out, const SampleBatch &batch);
void write_batch_metadata(std::ostream &out, const SampleBatch &batch);

/// Oracle comparison as a JSON array of {name, analytic, grid, abs_dev, tol, pass}.
void write_comparison_json(std::ostream &out, const ComparisonTable &table);

}  // namespace weakpath::cli

#endif
