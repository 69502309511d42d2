#include "commands.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>
#include "weakpath/network_format.h"

namespace weakpath::cli {

namespace {

constexpr double kExactTolerance = 1e-12;
constexpr double kSlopeTarget = 2.0;
constexpr double kSlopeTolerance = 0.3;
constexpr double kDisturbanceTolerance = 1e-10;
constexpr double kMonteCarloZ = 4.0;

std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t");
    if (b == std::string_view::npos) {
        return "";
    }
    auto e = s.find_last_not_of(" \t");
    return std::string(s.substr(b, e - b + 1));
}

double parse_double(const std::string &text, const std::string &what) {
    double v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
        throw std::invalid_argument("bad number for " + what + ": '" + text + "'");
    }
    return v;
}

std::string render(double v) {
    if (std::isnan(v)) {
        return "nan";
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

std::string render(const Cell &cell) {
    if (auto s = std::get_if<std::string>(&cell)) {
        return *s;
    }
    if (auto d = std::get_if<double>(&cell)) {
        return render(*d);
    }
    return std::to_string(std::get<std::int64_t>(cell));
}

std::string projector_label(const std::string &arm, std::size_t slice) {
    return arm + "@" + std::to_string(slice);
}

std::vector<MeterArg> meters_or_default(const ScenarioConfig &config, std::vector<std::string> defaults) {
    const auto &texts = config.meters.empty() ? defaults : config.meters;
    if (texts.empty()) {
        throw std::invalid_argument("no --meter given and no default for a non-preset network");
    }
    std::vector<MeterArg> out;
    for (const auto &t : texts) {
        out.push_back(parse_meter_arg(t));
    }
    return out;
}

bool is_preset(const ScenarioConfig &config) {
    return config.network == "preset";
}

}  // namespace

ArmProjector parse_projector_arg(const std::string &text) {
    auto at = text.find('@');
    if (at == std::string::npos || at == 0 || at + 1 == text.size()) {
        throw std::invalid_argument("expected arm@slice, got '" + text + "'");
    }
    std::string slice_text = trim(text.substr(at + 1));
    std::size_t slice = 0;
    auto [ptr, ec] = std::from_chars(slice_text.data(), slice_text.data() + slice_text.size(), slice);
    if (ec != std::errc() || ptr != slice_text.data() + slice_text.size()) {
        throw std::invalid_argument("bad slice index in '" + text + "'");
    }
    return ArmProjector{trim(text.substr(0, at)), slice};
}

MeterArg parse_meter_arg(const std::string &text) {
    MeterArg m;
    auto colon = text.find(':');
    ArmProjector where = parse_projector_arg(text.substr(0, colon));
    m.arm = where.arm;
    m.slice = where.slice;
    if (colon == std::string::npos) {
        return m;
    }
    std::stringstream rest(text.substr(colon + 1));
    std::string item;
    while (std::getline(rest, item, ',')) {
        auto eq = item.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("expected key=value in meter '" + text + "'");
        }
        std::string key = trim(item.substr(0, eq));
        std::string value = trim(item.substr(eq + 1));
        if (key == "g") {
            m.strength = parse_double(value, "g");
        } else if (key == "sigma") {
            m.sigma = parse_double(value, "sigma");
        } else {
            throw std::invalid_argument("unknown meter key '" + key + "' in '" + text + "'");
        }
    }
    return m;
}

ProjectorChain parse_chain_arg(const std::string &text) {
    std::vector<ArmProjector> projectors;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        projectors.push_back(parse_projector_arg(trim(item)));
    }
    if (projectors.empty()) {
        throw std::invalid_argument("empty chain '" + text + "'");
    }
    try {
        return ProjectorChain(std::move(projectors));
    } catch (const std::invalid_argument &e) {
        throw std::invalid_argument("chain '" + text + "': " + e.what());
    }
}

NetworkLayout load_layout(const ScenarioConfig &config) {
    if (is_preset(config)) {
        return nested_mzi_preset();
    }
    return load_network_file(config.network);
}

Experiment build_experiment(const NetworkLayout &layout, const std::vector<MeterArg> &meters) {
    Experiment ex(layout);
    for (const auto &m : meters) {
        ex = attach_meter(std::move(ex), m.arm, m.slice, m.strength, m.sigma);
    }
    return ex;
}

bool CommandResult::ok() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check &c) { return c.pass; });
}

void CommandResult::add_check(std::string name, double value, double expected, double tolerance) {
    bool pass = std::abs(value - expected) <= tolerance;
    checks.push_back(Check{std::move(name), value, expected, tolerance, pass});
}

void write_csv(std::ostream &out, const CommandResult &result) {
    for (std::size_t c = 0; c < result.columns.size(); c++) {
        out << (c ? "," : "") << result.columns[c];
    }
    out << "\n";
    for (const auto &row : result.rows) {
        for (std::size_t c = 0; c < row.size(); c++) {
            out << (c ? "," : "") << render(row[c]);
        }
        out << "\n";
    }
    for (const auto &[key, value] : result.metadata) {
        out << "# " << key << "=" << value << "\n";
    }
    for (const auto &chk : result.checks) {
        out << "# check," << chk.name << "," << render(chk.value) << "," << render(chk.expected) << ","
            << render(chk.tolerance) << "," << (chk.pass ? "pass" : "FAIL") << "\n";
    }
}

namespace {

nlohmann::json to_json(const Cell &cell) {
    if (auto s = std::get_if<std::string>(&cell)) {
        return *s;
    }
    if (auto d = std::get_if<double>(&cell)) {
        if (!std::isfinite(*d)) {
            return render(*d);
        }
        return *d;
    }
    return std::get<std::int64_t>(cell);
}

nlohmann::json finite_or_string(double v) {
    return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(render(v));
}

}  // namespace

void write_json(std::ostream &out, const CommandResult &result) {
    nlohmann::json doc;
    doc["columns"] = result.columns;
    doc["rows"] = nlohmann::json::array();
    for (const auto &row : result.rows) {
        nlohmann::json obj = nlohmann::json::object();
        for (std::size_t c = 0; c < row.size() && c < result.columns.size(); c++) {
            obj[result.columns[c]] = to_json(row[c]);
        }
        doc["rows"].push_back(obj);
    }
    doc["checks"] = nlohmann::json::array();
    for (const auto &chk : result.checks) {
        doc["checks"].push_back({{"name", chk.name},
                                 {"value", finite_or_string(chk.value)},
                                 {"expected", finite_or_string(chk.expected)},
                                 {"tolerance", finite_or_string(chk.tolerance)},
                                 {"pass", chk.pass}});
    }
    nlohmann::json meta = nlohmann::json::object();
    for (const auto &[key, value] : result.metadata) {
        meta[key] = value;
    }
    doc["metadata"] = meta;
    doc["ok"] = result.ok();
    out << doc.dump(2) << "\n";
}

void write_result(std::ostream &out, const CommandResult &result, OutputFormat format) {
    if (format == OutputFormat::json) {
        write_json(out, result);
    } else {
        write_csv(out, result);
    }
}

CommandResult cmd_weak_values(const ScenarioConfig &config) {
    NetworkLayout layout = load_layout(config);
    const std::string &port = config.postselect;
    CommandResult result;
    result.columns = {"arm", "slice", "re", "im"};
    for (std::size_t t = 0; t < layout.num_slices(); t++) {
        Complex sum = 0.0;
        for (const auto &arm : layout.slices[t]) {
            Complex w = weak_value(layout, port, ArmProjector{arm, t}).value;
            sum += w;
            result.rows.push_back({arm, static_cast<std::int64_t>(t), w.real(), w.imag()});
        }
        result.add_check("completeness slice " + std::to_string(t), std::abs(sum - Complex(1.0)), 0.0,
                         kExactTolerance);
    }
    result.metadata.emplace_back("postselect", port);
    return result;
}

CommandResult cmd_sequential(const ScenarioConfig &config) {
    NetworkLayout layout = load_layout(config);
    const std::string &port = config.postselect;
    std::vector<std::string> texts = config.chains;
    if (texts.empty()) {
        if (!is_preset(config)) {
            throw std::invalid_argument("no --chain given");
        }
        texts = {"B@2,E@3", "C@2,E@3", "N@2,E@3"};
    }
    CommandResult result;
    result.columns = {"chain", "re", "im"};
    std::vector<ProjectorChain> chains;
    for (const auto &t : texts) {
        chains.push_back(parse_chain_arg(t));
    }
    for (const auto &chain : chains) {
        Complex w = sequential_weak_value(layout, port, chain).value;
        result.rows.push_back({chain.to_string(), w.real(), w.imag()});
    }

    // Marginal sum rules for every two-projector chain in the request.
    std::set<std::pair<std::string, std::size_t>> lefts;
    std::set<std::pair<std::string, std::size_t>> rights;
    for (const auto &chain : chains) {
        if (chain.projectors().size() != 2 || chain.is_zero()) {
            continue;
        }
        const auto &first = chain.projectors()[0];
        const auto &second = chain.projectors()[1];
        if (lefts.insert({second.arm, second.slice}).second) {
            Complex sum = 0.0;
            for (const auto &x : layout.slices[first.slice]) {
                sum += sequential_weak_value(layout, port, ProjectorChain({{x, first.slice}, second})).value;
            }
            Complex target = weak_value(layout, port, second).value;
            result.add_check("left marginal sum_X {X@" + std::to_string(first.slice) + " " +
                                 projector_label(second.arm, second.slice) + "}",
                             std::abs(sum - target), 0.0, kExactTolerance);
        }
        if (rights.insert({first.arm, first.slice}).second) {
            Complex sum = 0.0;
            for (const auto &y : layout.slices[second.slice]) {
                sum += sequential_weak_value(layout, port, ProjectorChain({first, {y, second.slice}})).value;
            }
            Complex target = weak_value(layout, port, first).value;
            result.add_check("right marginal sum_Y {" + projector_label(first.arm, first.slice) + " Y@" +
                                 std::to_string(second.slice) + "}",
                             std::abs(sum - target), 0.0, kExactTolerance);
        }
    }
    result.metadata.emplace_back("postselect", port);
    return result;
}

CommandResult cmd_disturbance(const ScenarioConfig &config) {
    NetworkLayout layout = load_layout(config);
    auto meters = meters_or_default(config, is_preset(config) ? std::vector<std::string>{"B@2:sigma=1"}
                                                               : std::vector<std::string>{});
    if (meters.size() != 1) {
        throw std::invalid_argument("disturbance takes exactly one --meter");
    }
    ArmProjector target;
    if (config.target) {
        target = parse_projector_arg(*config.target);
    } else if (is_preset(config)) {
        target = ArmProjector{"E", preset::kSliceT2};
    } else {
        throw std::invalid_argument("no --target given");
    }
    std::vector<double> strengths = config.strengths;
    if (strengths.empty()) {
        strengths = {0.0, 0.05, 0.1, 0.2, 0.4};
    }
    for (double g : strengths) {
        if (!(g >= 0) || !std::isfinite(g)) {
            throw std::invalid_argument("sweep strengths must be finite and >= 0");
        }
    }

    const std::string &port = config.postselect;
    const std::string target_name = projector_label(target.arm, target.slice);
    CommandResult result;
    result.columns = {"g", "sigma", "P(" + target_name + ")", "P(" + port + ")", "closed_form", "deviation"};
    for (double g : strengths) {
        MeterArg m = meters.front();
        m.strength = g;
        Experiment ex = build_experiment(layout, {m});
        double p_target = arm_probability(ex, target.arm, target.slice);
        auto ports = port_probabilities(ex);
        if (!ports.count(port)) {
            throw std::invalid_argument("unknown detector port " + port);
        }
        double closed = single_meter_arm_probability(layout, {m.arm, m.slice}, target, g, m.sigma);
        double dev = std::abs(p_target - closed);
        result.rows.push_back({g, m.sigma, p_target, ports.at(port), closed, dev});
        result.add_check("closed form g=" + render(g), p_target, closed, kDisturbanceTolerance);
        double total = 0.0;
        for (const auto &[name, p] : ports) {
            total += p;
        }
        result.add_check("port probabilities sum g=" + render(g), total, 1.0, kExactTolerance);
    }
    result.metadata.emplace_back("meter", projector_label(meters.front().arm, meters.front().slice));
    result.metadata.emplace_back("target", target_name);
    return result;
}

double loglog_slope(const std::vector<double> &g, const std::vector<double> &error) {
    if (g.size() != error.size() || g.size() < 2) {
        throw std::invalid_argument("slope fit needs at least two matched points");
    }
    double n = static_cast<double>(g.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < g.size(); i++) {
        double x = std::log(g[i]);
        double y = std::log(error[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

CommandResult cmd_meter_sweep(const ScenarioConfig &config) {
    if (config.sweep_points < 4) {
        throw std::invalid_argument("meter-sweep needs at least 4 sweep points for a slope fit");
    }
    if (!(config.sweep_start > 0) || !(config.sweep_factor > 0) || config.sweep_factor == 1.0) {
        throw std::invalid_argument("meter-sweep needs start > 0 and a positive factor != 1");
    }
    NetworkLayout layout = load_layout(config);
    auto meters = meters_or_default(config, is_preset(config) ? std::vector<std::string>{"B@2", "E@3"}
                                                               : std::vector<std::string>{});
    const std::string &port = config.postselect;

    struct Estimator {
        std::string name;
        std::size_t i;
        std::optional<std::size_t> j;
        Complex exact;
        std::vector<double> errors;
    };
    std::vector<Estimator> estimators;
    for (std::size_t i = 0; i < meters.size(); i++) {
        ArmProjector p{meters[i].arm, meters[i].slice};
        estimators.push_back({"single " + projector_label(p.arm, p.slice), i, std::nullopt,
                              weak_value(layout, port, p).value, {}});
    }
    for (std::size_t i = 0; i < meters.size(); i++) {
        for (std::size_t j = 0; j < meters.size(); j++) {
            if (i == j || meters[i].slice > meters[j].slice || (meters[i].slice == meters[j].slice && i > j)) {
                continue;
            }
            ProjectorChain chain({{meters[i].arm, meters[i].slice}, {meters[j].arm, meters[j].slice}});
            estimators.push_back({"sequential " + chain.to_string(), i, j,
                                  sequential_weak_value(layout, port, chain).value, {}});
        }
    }

    CommandResult result;
    result.columns = {"g", "estimator", "re", "im", "exact_re", "exact_im", "error"};
    std::vector<double> gs;
    for (std::size_t k = 0; k < config.sweep_points; k++) {
        double g = config.sweep_start * std::pow(config.sweep_factor, static_cast<double>(k));
        gs.push_back(g);
        auto scaled = meters;
        for (auto &m : scaled) {
            m.strength = g;
        }
        Experiment ex = build_experiment(layout, scaled);
        PointerMixture mix = postselect(ex, port);
        for (auto &e : estimators) {
            Complex est = e.j ? estimate_sequential_weak_value(mix, e.i, *e.j) : estimate_weak_value(mix, e.i);
            double err = std::abs(est - e.exact);
            e.errors.push_back(err);
            result.rows.push_back({g, e.name, est.real(), est.imag(), e.exact.real(), e.exact.imag(), err});
        }
    }
    for (const auto &e : estimators) {
        double worst = *std::max_element(e.errors.begin(), e.errors.end());
        if (worst < kExactTolerance) {
            result.add_check("exact " + e.name, worst, 0.0, kExactTolerance);
        } else {
            // Faster than quadratic decay also passes.
            double slope = loglog_slope(gs, e.errors);
            result.checks.push_back({"slope " + e.name, slope, kSlopeTarget, kSlopeTolerance,
                                     slope >= kSlopeTarget - kSlopeTolerance});
        }
    }
    return result;
}

CommandResult cmd_montecarlo(const ScenarioConfig &config) {
    if (!config.seed) {
        throw std::invalid_argument("montecarlo needs --seed");
    }
    if (config.samples < 1) {
        throw std::invalid_argument("montecarlo needs --samples >= 1");
    }
    NetworkLayout layout = load_layout(config);
    auto meters = meters_or_default(
        config, is_preset(config) ? std::vector<std::string>{"B@2:g=0.3,sigma=1", "E@3:g=0.3,sigma=1"}
                                  : std::vector<std::string>{});
    Experiment ex = build_experiment(layout, meters);
    PointerMixture mix = postselect(ex, config.postselect);
    const std::size_t m = ex.num_meters();

    std::vector<ReadoutPlan> plans;
    if (m >= 2) {
        plans = sequential_plans(m, 0, 1, config.samples, *config.seed);
    } else {
        for (std::uint32_t s = 0; s < 2; s++) {
            ReadoutPlan plan;
            plan.quadratures = {s == 0 ? Quadrature::x : Quadrature::p};
            plan.samples = config.samples;
            plan.seed = *config.seed;
            plan.stream = s;
            plans.push_back(plan);
        }
    }
    std::vector<SampleBatch> batches;
    for (const auto &plan : plans) {
        batches.push_back(sample_readings(mix, plan));
    }
    if (!config.export_dir.empty()) {
        std::filesystem::create_directories(config.export_dir);
        for (const auto &b : batches) {
            std::string stem = config.export_dir + "/batch_" + std::to_string(b.plan.stream);
            std::ofstream csv(stem + ".csv");
            write_batch_csv(csv, b);
            std::ofstream meta(stem + ".json");
            write_batch_metadata(meta, b);
        }
    }
    SampleEstimates est = m >= 2 ? estimate_from_samples(batches, 0, 1) : estimate_from_samples(batches);

    CommandResult result;
    result.columns = {"quantity", "estimate", "stderr", "exact", "abs_z"};
    auto add = [&](const std::string &name, double value, double se, double exact) {
        double z = std::isfinite(se) && se > 0 ? std::abs(value - exact) / se : 0.0;
        result.rows.push_back({name, value, se, exact, z});
        if (std::isfinite(se)) {
            result.checks.push_back({"|z| " + name, z, 0.0, kMonteCarloZ, z < kMonteCarloZ});
        } else {
            result.checks.push_back({"|z| " + name + " (degenerate stderr)", z, 0.0, kMonteCarloZ, true});
        }
    };
    for (const auto &mom : est.moments) {
        // Names are one or two of <quadrature><meter>.
        std::vector<QuadratureRef> refs;
        for (std::size_t p = 0; p < mom.name.size();) {
            Quadrature q = mom.name[p] == 'x' ? Quadrature::x : Quadrature::p;
            std::size_t end = p + 1;
            while (end < mom.name.size() && std::isdigit(static_cast<unsigned char>(mom.name[end]))) {
                end++;
            }
            refs.push_back({static_cast<std::size_t>(std::stoul(mom.name.substr(p + 1, end - p - 1))), q});
            p = end;
        }
        double exact = refs.size() == 1 ? pointer_mean(mix, refs[0].meter, refs[0].quadrature)
                                        : pointer_corr(mix, refs[0], refs[1]);
        add("<" + mom.name + ">", mom.estimate.value, mom.estimate.std_error, exact);
    }
    for (std::size_t i = 0; i < m; i++) {
        if (!est.single[i]) {
            continue;
        }
        Complex exact = estimate_weak_value(mix, i);
        std::string name = "weak " + projector_label(meters[i].arm, meters[i].slice);
        add(name + " re", est.single[i]->value.real(), est.single[i]->std_error_real, exact.real());
        add(name + " im", est.single[i]->value.imag(), est.single[i]->std_error_imag, exact.imag());
    }
    if (est.sequential) {
        Complex exact = estimate_sequential_weak_value(mix, 0, 1);
        std::string name = "sequential " + projector_label(meters[0].arm, meters[0].slice) + "->" +
                           projector_label(meters[1].arm, meters[1].slice);
        add(name + " re", est.sequential->value.real(), est.sequential->std_error_real, exact.real());
        add(name + " im", est.sequential->value.imag(), est.sequential->std_error_imag, exact.imag());
    }
    result.metadata.emplace_back("seed", std::to_string(*config.seed));
    result.metadata.emplace_back("samples_per_batch", std::to_string(config.samples));
    result.metadata.emplace_back("generator", "philox4x32-10");
    result.metadata.emplace_back("pass_rate", render(mix.postselection_probability()));
    return result;
}

namespace {

std::vector<std::vector<MeterArg>> preset_oracle_suite() {
    auto m = [](const std::string &t) { return parse_meter_arg(t); };
    return {
        {},
        {m("D@1:g=0.1,sigma=1")},
        {m("N@2:g=0.1,sigma=1")},
        {m("B@2:g=0.1,sigma=1")},
        {m("C@2:g=0.1,sigma=1")},
        {m("E@3:g=0.1,sigma=1")},
        {m("B@2:g=0.4,sigma=0.5")},
        {m("B@2:g=0.1,sigma=1"), m("E@3:g=0.1,sigma=1")},
        {m("C@2:g=0.1,sigma=1"), m("E@3:g=0.1,sigma=1")},
        {m("N@2:g=0.1,sigma=1"), m("E@3:g=0.1,sigma=1")},
    };
}

}  // namespace

CommandResult cmd_oracle(const ScenarioConfig &config) {
    NetworkLayout layout = load_layout(config);
    std::vector<std::vector<MeterArg>> suite;
    if (config.bare) {
        suite = {{}};
    } else if (!config.meters.empty()) {
        suite = {meters_or_default(config, {})};
    } else if (is_preset(config)) {
        suite = preset_oracle_suite();
    } else {
        suite = {{}};
    }

    CommandResult result;
    result.columns = {"experiment", "name", "analytic", "grid", "abs_dev", "tol", "pass", "note"};
    Tolerances tol;
    tol.absolute = config.oracle_tolerance;
    for (const auto &meters : suite) {
        Experiment ex = build_experiment(layout, meters);
        GridSpec spec = GridSpec::defaults(ex);
        if (config.grid_half_width) {
            spec.half_width = *config.grid_half_width;
        }
        if (config.grid_points) {
            spec.points = *config.grid_points;
        }
        ComparisonTable table =
            compare(analytic_report(ex, config.postselect), grid_report(ex, config.postselect, spec), tol);
        std::string label;
        for (const auto &m : meters) {
            label += (label.empty() ? "" : "+") + projector_label(m.arm, m.slice) + ":g=" + render(m.strength) +
                     ",sigma=" + render(m.sigma);
        }
        if (label.empty()) {
            label = "no meters";
        }
        for (const auto &row : table.rows) {
            result.rows.push_back({label, row.name, row.analytic, row.grid, row.abs_dev, row.tol,
                                   std::string(row.pass ? "true" : "false"), row.note});
        }
        result.checks.push_back({"oracle " + label, table.max_deviation(), 0.0, tol.absolute, table.all_pass()});
    }
    return result;
}

void write_batch_csv(std::ostream &out, const SampleBatch &batch) {
    out << "meter_id,quadrature,reading\n";
    for (std::uint64_t k = 0; k < batch.num_samples(); k++) {
        for (std::size_t j = 0; j < batch.num_meters(); j++) {
            out << j << "," << quadrature_name(batch.plan.quadratures[j]) << "," << render(batch.reading(k, j))
                << "\n";
        }
    }
}

void write_batch_metadata(std::ostream &out, const SampleBatch &batch) {
    nlohmann::json doc;
    doc["generator"] = "philox4x32-10";
    doc["seed"] = batch.plan.seed;
    doc["stream"] = batch.plan.stream;
    doc["n"] = batch.num_samples();
    doc["pass_rate"] = batch.postselection_probability;
    doc["acceptance_rate"] = batch.acceptance_rate();
    doc["proposals"] = batch.proposals;
    doc["meters"] = nlohmann::json::array();
    for (std::size_t j = 0; j < batch.num_meters(); j++) {
        doc["meters"].push_back({{"meter_id", j},
                                 {"quadrature", std::string(1, quadrature_name(batch.plan.quadratures[j]))},
                                 {"sigma", batch.meters[j].sigma},
                                 {"g", batch.meters[j].strength}});
    }
    out << doc.dump(2) << "\n";
}

void write_comparison_json(std::ostream &out, const ComparisonTable &table) {
    nlohmann::json doc = nlohmann::json::array();
    for (const auto &row : table.rows) {
        nlohmann::json entry = {{"name", row.name},
                                {"analytic", finite_or_string(row.analytic)},
                                {"grid", finite_or_string(row.grid)},
                                {"abs_dev", finite_or_string(row.abs_dev)},
                                {"tol", row.tol},
                                {"pass", row.pass}};
        if (!row.note.empty()) {
            entry["note"] = row.note;
        }
        doc.push_back(entry);
    }
    out << doc.dump(2) << "\n";
}

}  // namespace weakpath::cli
