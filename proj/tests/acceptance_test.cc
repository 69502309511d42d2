#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "test_support.h"
#include "weakpath/meter.h"
#include "weakpath/oracle.h"
#include "weakpath/sampling.h"
#include "weakpath/tsvf.h"

using namespace weakpath;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

struct Criterion {
    int id;
    std::string title;
    double time_limit;
    std::function<Outcome()> run;
};

std::string fmt(const char *pattern, double a, double b = 0, double c = 0) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), pattern, a, b, c);
    return buf;
}

Experiment preset_with(std::vector<std::tuple<std::string, std::size_t, double, double>> meters) {
    Experiment ex(nested_mzi_preset());
    for (const auto &[arm, slice, g, sigma] : meters) {
        ex = attach_meter(std::move(ex), arm, slice, g, sigma);
    }
    return ex;
}

double slope(const std::vector<double> &x, const std::vector<double> &y) {
    double n = static_cast<double>(x.size()), sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); i++) {
        double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

constexpr std::size_t t1 = preset::kSliceT1;
constexpr std::size_t t2 = preset::kSliceT2;
const std::vector<double> kSweep{0.2, 0.1, 0.05, 0.025};
const std::vector<double> kDisturbanceG{0.0, 0.05, 0.1, 0.2, 0.4};
const std::vector<double> kDisturbanceSigma{0.5, 1.0, 2.0};

Outcome criterion_weak_values() {
    NetworkLayout layout = nested_mzi_preset();
    auto w = [&](const char *arm, std::size_t t) { return weak_value(layout, "D2", {arm, t}).value; };
    double worst = std::max({std::abs(w("D", 1)), std::abs(w("E", t2)), std::abs(w("B", t1) - 0.5),
                             std::abs(w("C", t1) + 0.5), std::abs(w("N", t1) - 1.0)});
    return {worst < 1e-12, fmt("D,E = 0; B,C,N = 0.5,-0.5,1; max error %.2e", worst)};
}

Outcome criterion_sequential() {
    NetworkLayout layout = nested_mzi_preset();
    auto s = [&](const std::string &x, std::size_t tx, const std::string &y, std::size_t ty) {
        return sequential_weak_value(layout, "D2", ProjectorChain({{x, tx}, {y, ty}})).value;
    };
    double worst = std::max({std::abs(s("B", t1, "E", t2) - 0.5), std::abs(s("C", t1, "E", t2) + 0.5),
                             std::abs(s("N", t1, "E", t2))});
    double sums = 0;
    for (const auto &y : layout.slices[t2]) {
        Complex left = 0;
        for (const auto &x : layout.slices[t1]) {
            left += s(x, t1, y, t2);
        }
        sums = std::max(sums, std::abs(left - weak_value(layout, "D2", {y, t2}).value));
    }
    for (const auto &x : layout.slices[t1]) {
        Complex right = 0;
        for (const auto &y : layout.slices[t2]) {
            right += s(x, t1, y, t2);
        }
        sums = std::max(sums, std::abs(right - weak_value(layout, "D2", {x, t1}).value));
    }
    return {worst < 1e-12 && sums < 1e-12,
            fmt("B->E, C->E, N->E = 0.5, -0.5, 0 (max error %.2e); marginal sum rules %.2e", worst, sums)};
}

Outcome criterion_disturbance() {
    double worst = 0;
    bool zero_exact = true;
    for (double sigma : kDisturbanceSigma) {
        for (double g : kDisturbanceG) {
            double p = arm_probability(preset_with({{"B", t1, g, sigma}}), "E", t2);
            double closed = 0.25 * (1 - std::exp(-g * g / (8 * sigma * sigma)));
            worst = std::max(worst, std::abs(p - closed));
            if (g == 0.0) {
                zero_exact = zero_exact && p == 0.0;
            }
        }
    }
    return {worst < 1e-10 && zero_exact,
            fmt("P(E) vs (1/4)(1-exp(-g^2/8s^2)) over 15 points, max deviation %.2e; g=0 exactly 0: %s", worst) +
                (zero_exact ? "yes" : "no")};
}

Outcome criterion_convergence() {
    double x_dev = 0;
    std::vector<double> single_err, seq_err;
    std::vector<double> single_b_exact;
    for (double g : kSweep) {
        PointerMixture one = postselect(preset_with({{"B", t1, g, 1.0}}), "D2");
        x_dev = std::max(x_dev, std::abs(pointer_mean(one, 0, Quadrature::x) - g / 2));
        single_b_exact.push_back(std::abs(estimate_weak_value(one, 0) - 0.5));
        PointerMixture two = postselect(preset_with({{"B", t1, g, 1.0}, {"E", t2, g, 1.0}}), "D2");
        single_err.push_back(std::abs(estimate_weak_value(two, 0) - 0.5));
        seq_err.push_back(std::abs(estimate_sequential_weak_value(two, 0, 1) - 0.5));
    }
    double s_single = slope(kSweep, single_err);
    double s_seq = slope(kSweep, seq_err);
    double lone = *std::max_element(single_b_exact.begin(), single_b_exact.end());
    bool pass = x_dev < 1e-12 && lone < 1e-12 && std::abs(s_single - 2) <= 0.3 && std::abs(s_seq - 2) <= 0.3;
    return {pass, fmt("<x> on B = g/2 (max dev %.2e, lone-meter estimator exact); slopes single %.3f, sequential %.3f",
                      std::max(x_dev, lone), s_single, s_seq)};
}

Outcome criterion_oracle() {
    std::vector<Experiment> suite{Experiment(nested_mzi_preset())};
    for (double sigma : kDisturbanceSigma) {
        for (double g : kDisturbanceG) {
            suite.push_back(preset_with({{"B", t1, g, sigma}}));
        }
    }
    for (double g : kSweep) {
        suite.push_back(preset_with({{"B", t1, g, 1.0}}));
        for (const char *arm : {"B", "C", "N"}) {
            suite.push_back(preset_with({{arm, t1, g, 1.0}, {"E", t2, g, 1.0}}));
        }
    }
    double worst = 0;
    bool pass = true;
    std::size_t rows = 0;
    for (const auto &ex : suite) {
        ComparisonTable table =
            compare(analytic_report(ex, "D2"), grid_report(ex, "D2", GridSpec::defaults(ex)), Tolerances{1e-7, {}});
        pass = pass && table.all_pass();
        worst = std::max(worst, table.max_deviation());
        rows += table.rows.size();
    }
    return {pass, fmt("%.0f experiments, %.0f quantities on L = 10s+2g, M = 1025; max deviation %.2e",
                      static_cast<double>(suite.size()), static_cast<double>(rows), worst)};
}

Outcome criterion_random_layouts() {
    double sum_dev = 0, unit_dev = 0, norm_dev = 0;
    for (std::uint64_t seed = 0; seed < 100; seed++) {
        NetworkLayout layout = test_support::random_layout(seed);
        std::string port = test_support::brightest_port(layout);
        for (std::size_t k = 0; k < layout.stages.size(); k++) {
            unit_dev = std::max(unit_dev, unitarity_defect(stage_unitary(layout, k)));
        }
        for (std::size_t t = 0; t < layout.num_slices(); t++) {
            norm_dev = std::max(norm_dev, std::abs(forward_state(layout, t).amplitudes.squaredNorm() - 1));
            Complex sum = 0;
            for (const auto &arm : layout.slices[t]) {
                sum += weak_value(layout, port, {arm, t}).value;
            }
            sum_dev = std::max(sum_dev, std::abs(sum - 1.0));
        }
        for (std::size_t a = 0; a + 1 < layout.num_slices(); a++) {
            for (std::size_t b = a + 1; b < layout.num_slices(); b++) {
                for (const auto &x : layout.slices[a]) {
                    Complex right = 0;
                    for (const auto &y : layout.slices[b]) {
                        right += sequential_weak_value(layout, port, ProjectorChain({{x, a}, {y, b}})).value;
                    }
                    sum_dev = std::max(sum_dev, std::abs(right - weak_value(layout, port, {x, a}).value));
                }
                for (const auto &y : layout.slices[b]) {
                    Complex left = 0;
                    for (const auto &x : layout.slices[a]) {
                        left += sequential_weak_value(layout, port, ProjectorChain({{x, a}, {y, b}})).value;
                    }
                    sum_dev = std::max(sum_dev, std::abs(left - weak_value(layout, port, {y, b}).value));
                }
            }
        }
    }
    return {sum_dev < 1e-10 && unit_dev < 1e-12 && norm_dev < 1e-12,
            fmt("100 layouts: sum rules %.2e, unitarity %.2e, norm %.2e", sum_dev, unit_dev, norm_dev)};
}

Outcome criterion_montecarlo() {
    const std::uint64_t n = 1000000, seed = 20261016;
    PointerMixture mix = postselect(preset_with({{"B", t1, 0.3, 1.0}, {"E", t2, 0.3, 1.0}}), "D2");
    std::vector<SampleBatch> batches, rerun;
    for (const auto &plan : sequential_plans(2, 0, 1, n, seed)) {
        batches.push_back(sample_readings(mix, plan));
        rerun.push_back(sample_readings_parallel(mix, plan, 2));
    }
    bool identical = true;
    for (std::size_t k = 0; k < batches.size(); k++) {
        identical = identical && batches[k] == rerun[k];
    }
    SampleEstimates est = estimate_from_samples(batches, 0, 1);
    double worst_z = 0;
    auto z = [&](double value, double se, double exact) { worst_z = std::max(worst_z, std::abs(value - exact) / se); };
    for (const auto &m : est.moments) {
        std::vector<QuadratureRef> refs;
        for (std::size_t p = 0; p < m.name.size(); p += 2) {
            refs.push_back({static_cast<std::size_t>(m.name[p + 1] - '0'),
                            m.name[p] == 'x' ? Quadrature::x : Quadrature::p});
        }
        double exact = refs.size() == 1 ? pointer_mean(mix, refs[0].meter, refs[0].quadrature)
                                        : pointer_corr(mix, refs[0], refs[1]);
        z(m.estimate.value, m.estimate.std_error, exact);
    }
    for (std::size_t i = 0; i < 2; i++) {
        Complex exact = estimate_weak_value(mix, i);
        z(est.single[i]->value.real(), est.single[i]->std_error_real, exact.real());
        z(est.single[i]->value.imag(), est.single[i]->std_error_imag, exact.imag());
    }
    Complex exact = estimate_sequential_weak_value(mix, 0, 1);
    z(est.sequential->value.real(), est.sequential->std_error_real, exact.real());
    z(est.sequential->value.imag(), est.sequential->std_error_imag, exact.imag());
    return {worst_z < 4 && identical,
            fmt("4 x 1e6 samples, %.0f moments; max |z| %.2f; sequential %.4f", static_cast<double>(est.moments.size()),
                worst_z, est.sequential->value.real()) +
                "; rerun bit-identical: " + (identical ? "yes" : "no")};
}

Outcome criterion_cost_law() {
    const std::vector<double> gs{0.4, 0.2, 0.1, 0.05};
    const std::uint64_t n = 200000;
    const double target = 0.05;
    std::vector<double> needed;
    for (std::size_t k = 0; k < gs.size(); k++) {
        PointerMixture mix = postselect(preset_with({{"B", t1, gs[k], 1.0}, {"E", t2, gs[k], 1.0}}), "D2");
        std::vector<SampleBatch> batches;
        for (const auto &plan : sequential_plans(2, 0, 1, n, 1000 + k)) {
            batches.push_back(sample_readings(mix, plan));
        }
        SampleEstimates est = estimate_from_samples(batches, 0, 1);
        double rel = sequential_relative_error(mix, *est.sequential, 0, 1);
        needed.push_back(static_cast<double>(n) * (rel / target) * (rel / target));
    }
    double s = slope(gs, needed);
    return {std::abs(s + 4) <= 0.5, fmt("samples for 5%% relative error: %.3g at g=0.4, %.3g at g=0.05; exponent %.3f",
                                        needed.front(), needed.back(), s)};
}

}  // namespace

int main() {
    std::vector<Criterion> criteria{
        {1, "weak values", 1, criterion_weak_values},
        {2, "sequential weak value", 1, criterion_sequential},
        {3, "disturbance law", 1, criterion_disturbance},
        {4, "meter estimator convergence", 5, criterion_convergence},
        {5, "oracle equivalence", 60, criterion_oracle},
        {6, "sum-rule property suite", 10, criterion_random_layouts},
        {7, "monte carlo consistency", 120, criterion_montecarlo},
        {8, "cost law", 300, criterion_cost_law},
    };
    int failures = 0;
    for (const auto &c : criteria) {
        auto start = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = c.run();
        } catch (const std::exception &e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        bool pass = out.pass && secs < c.time_limit;
        failures += pass ? 0 : 1;
        std::printf("%s criterion %d (%s): %s [%.2fs / %.0fs]\n", pass ? "PASS" : "FAIL", c.id, c.title.c_str(),
                    out.detail.c_str(), secs, c.time_limit);
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
