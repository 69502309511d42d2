#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "commands.h"
#include <nlohmann/json.hpp>

using namespace weakpath;
using namespace weakpath::cli;

namespace {

const std::string kTool = WEAKPATH_TOOL_PATH;
const std::string kDataDir = WEAKPATH_TEST_DATA_DIR;

double cell_double(const Cell &c) {
    return std::get<double>(c);
}

std::string cell_string(const Cell &c) {
    return std::get<std::string>(c);
}

int run_tool(const std::string &args, const std::string &out_file) {
    std::string cmd = kTool + " " + args + " > " + out_file + " 2>/dev/null";
    int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const std::string &path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string temp_path(const std::string &name) {
    return (std::filesystem::temp_directory_path() / ("weakpath_cli_" + name)).string();
}

}  // namespace

TEST(CliParse, MeterArgument) {
    MeterArg m = parse_meter_arg("B@2:g=0.25,sigma=2");
    EXPECT_EQ(m.arm, "B");
    EXPECT_EQ(m.slice, 2u);
    EXPECT_DOUBLE_EQ(m.strength, 0.25);
    EXPECT_DOUBLE_EQ(m.sigma, 2.0);
    MeterArg d = parse_meter_arg("E@3");
    EXPECT_DOUBLE_EQ(d.strength, 0.1);
    EXPECT_THROW(parse_meter_arg("B2"), std::invalid_argument);
    EXPECT_THROW(parse_meter_arg("B@2:h=1"), std::invalid_argument);
    EXPECT_THROW(parse_meter_arg("B@2:g=abc"), std::invalid_argument);
}

TEST(CliParse, ChainArgument) {
    EXPECT_EQ(parse_chain_arg("B@2,E@3").to_string(), "B@2->E@3");
    try {
        parse_chain_arg("E@3,B@2");
        FAIL();
    } catch (const std::invalid_argument &e) {
        EXPECT_NE(std::string(e.what()).find("E@3,B@2"), std::string::npos);
    }
}

TEST(CliCommands, WeakValuesPreset) {
    ScenarioConfig config;
    CommandResult r = cmd_weak_values(config);
    EXPECT_TRUE(r.ok());
    std::map<std::string, double> re;
    for (const auto &row : r.rows) {
        re[cell_string(row[0]) + "@" + std::to_string(std::get<std::int64_t>(row[1]))] = cell_double(row[2]);
    }
    EXPECT_NEAR(re["B@2"], 0.5, 1e-12);
    EXPECT_NEAR(re["C@2"], -0.5, 1e-12);
    EXPECT_NEAR(re["N@2"], 1.0, 1e-12);
    EXPECT_NEAR(re["D@1"], 0.0, 1e-12);
    EXPECT_NEAR(re["E@3"], 0.0, 1e-12);
}

TEST(CliCommands, WeakValuesOtherPort) {
    ScenarioConfig config;
    config.postselect = "D3";
    CommandResult r = cmd_weak_values(config);
    EXPECT_TRUE(r.ok());
    EXPECT_EQ(r.checks.size(), 5u);
}

TEST(CliCommands, SequentialDefaultChains) {
    ScenarioConfig config;
    CommandResult r = cmd_sequential(config);
    ASSERT_EQ(r.rows.size(), 3u);
    EXPECT_NEAR(cell_double(r.rows[0][1]), 0.5, 1e-12);
    EXPECT_NEAR(cell_double(r.rows[1][1]), -0.5, 1e-12);
    EXPECT_NEAR(cell_double(r.rows[2][1]), 0.0, 1e-12);
    EXPECT_TRUE(r.ok());
    EXPECT_GE(r.checks.size(), 2u);
}

TEST(CliCommands, DisturbanceTable) {
    ScenarioConfig config;
    config.strengths = {0, 0.05, 0.1, 0.2};
    CommandResult r = cmd_disturbance(config);
    EXPECT_TRUE(r.ok());
    ASSERT_EQ(r.rows.size(), 4u);
    EXPECT_EQ(cell_double(r.rows[0][2]), 0.0);
    for (std::size_t k = 1; k < r.rows.size(); k++) {
        EXPECT_GT(cell_double(r.rows[k][2]), cell_double(r.rows[k - 1][2]));
        EXPECT_LT(cell_double(r.rows[k][5]), 1e-10);
    }
    config.meters = {"B@2:sigma=2"};
    CommandResult wide = cmd_disturbance(config);
    EXPECT_LT(cell_double(wide.rows[2][2]), cell_double(r.rows[2][2]));
}

TEST(CliCommands, DisturbanceRejectsNegativeStrength) {
    ScenarioConfig config;
    config.strengths = {0.1, -0.1};
    EXPECT_THROW(cmd_disturbance(config), std::invalid_argument);
}

TEST(CliCommands, MeterSweep) {
    ScenarioConfig config;
    CommandResult r = cmd_meter_sweep(config);
    EXPECT_TRUE(r.ok());
    config.sweep_points = 3;
    EXPECT_THROW(cmd_meter_sweep(config), std::invalid_argument);
}

TEST(CliCommands, MeterSweepSingleMeterIsExact) {
    ScenarioConfig config;
    config.meters = {"B@2"};
    CommandResult r = cmd_meter_sweep(config);
    ASSERT_EQ(r.checks.size(), 1u);
    EXPECT_EQ(r.checks[0].name.rfind("exact", 0), 0u);
    EXPECT_TRUE(r.ok());
}

TEST(CliCommands, MontecarloNeedsSeed) {
    ScenarioConfig config;
    EXPECT_THROW(cmd_montecarlo(config), std::invalid_argument);
}

TEST(CliCommands, MontecarloSmallRunStillReports) {
    ScenarioConfig config;
    config.seed = 5;
    config.samples = 100;
    CommandResult r = cmd_montecarlo(config);
    for (const auto &row : r.rows) {
        EXPECT_TRUE(std::isfinite(cell_double(row[4])));
        EXPECT_TRUE(std::isfinite(cell_double(row[2])));
    }
}

TEST(CliCommands, OracleBareAndTiny) {
    ScenarioConfig config;
    config.bare = true;
    EXPECT_TRUE(cmd_oracle(config).ok());
    ScenarioConfig tiny;
    tiny.meters = {"B@2:g=0.1,sigma=1"};
    tiny.grid_half_width = 2.0;
    CommandResult r = cmd_oracle(tiny);
    EXPECT_FALSE(r.ok());
    EXPECT_EQ(cell_string(r.rows[0][1]), "grid_norm_check");
}

TEST(CliOutput, CsvAndJson) {
    ScenarioConfig config;
    CommandResult r = cmd_sequential(config);
    std::ostringstream csv;
    write_csv(csv, r);
    EXPECT_EQ(csv.str().rfind("chain,re,im\n", 0), 0u);
    EXPECT_NE(csv.str().find("# check,"), std::string::npos);
    std::ostringstream js;
    write_json(js, r);
    auto doc = nlohmann::json::parse(js.str());
    EXPECT_EQ(doc["rows"].size(), 3u);
    EXPECT_EQ(doc["rows"][0]["chain"], "B@2->E@3");
    EXPECT_TRUE(doc["ok"].get<bool>());
}

TEST(CliOutput, LogLogSlope) {
    std::vector<double> g{0.4, 0.2, 0.1, 0.05};
    std::vector<double> e;
    for (double x : g) {
        e.push_back(3 * x * x);
    }
    EXPECT_NEAR(loglog_slope(g, e), 2.0, 1e-12);
}

TEST(CliBinary, ExitCodes) {
    std::string out = temp_path("out.txt");
    EXPECT_EQ(run_tool("weak-values", out), 0);
    EXPECT_EQ(run_tool("weak-values --network " + kDataDir + "/single_mzi.net --postselect P2", out), 2);
    EXPECT_EQ(run_tool("sequential --chain E@3,B@2", out), 2);
    EXPECT_EQ(run_tool("meter-sweep --sweep-points 3", out), 2);
    EXPECT_EQ(run_tool("montecarlo --samples 100", out), 2);
    EXPECT_EQ(run_tool("oracle --meter B@2:g=0.1 --grid-L 2", out), 1);
    EXPECT_EQ(run_tool("bogus", out), 2);
}

TEST(CliBinary, FileNetworkAndJson) {
    std::string out = temp_path("mzi.json");
    ASSERT_EQ(run_tool("weak-values --network " + kDataDir + "/single_mzi.net --postselect P1 --format json", out), 0);
    auto doc = nlohmann::json::parse(slurp(out));
    EXPECT_TRUE(doc["ok"].get<bool>());
    EXPECT_EQ(doc["rows"].size(), 6u);
}

TEST(CliBinary, MontecarloIsReproducible) {
    std::string a = temp_path("mc_a.csv");
    std::string b = temp_path("mc_b.csv");
    std::string dir = temp_path("mc_export");
    std::filesystem::remove_all(dir);
    ASSERT_EQ(run_tool("montecarlo --seed 3 --samples 2000 --export-dir " + dir, a), 0);
    ASSERT_EQ(run_tool("montecarlo --seed 3 --samples 2000", b), 0);
    EXPECT_EQ(slurp(a), slurp(b));
    EXPECT_TRUE(std::filesystem::exists(dir + "/batch_0.csv"));
    auto meta = nlohmann::json::parse(slurp(dir + "/batch_3.json"));
    EXPECT_EQ(meta["seed"], 3);
    EXPECT_EQ(meta["n"], 2000);
    EXPECT_EQ(slurp(dir + "/batch_0.csv").rfind("meter_id,quadrature,reading\n", 0), 0u);
}

TEST(CliBinary, ConfigFileWithFlagOverride) {
    std::string cfg = temp_path("scenario.ini");
    {
        std::ofstream out(cfg);
        out << "postselect = D3\nformat = json\n";
    }
    std::string out = temp_path("cfg.json");
    ASSERT_EQ(run_tool("weak-values --config " + cfg, out), 0);
    auto doc = nlohmann::json::parse(slurp(out));
    EXPECT_EQ(doc["metadata"]["postselect"], "D3");
    ASSERT_EQ(run_tool("weak-values --config " + cfg + " --postselect D1", out), 0);
    doc = nlohmann::json::parse(slurp(out));
    EXPECT_EQ(doc["metadata"]["postselect"], "D1");
}
