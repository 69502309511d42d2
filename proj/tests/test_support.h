#ifndef WEAKPATH_TESTS_TEST_SUPPORT_H
#define WEAKPATH_TESTS_TEST_SUPPORT_H

#include <algorithm>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>

#include "weakpath/network.h"
#include "weakpath/tsvf.h"

namespace weakpath::test_support {

/// Random valid layout: 3..5 arms per slice, 2..5 stages of random
/// beamsplitters, phases and pass-throughs.
inline NetworkLayout random_layout(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto uniform = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
    auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };

    NetworkLayout layout;
    int width = pick(3, 5);
    int stages = pick(2, 5);
    int fresh = 0;
    auto new_arm = [&] {
        std::string name = "a" + std::to_string(fresh++);
        layout.arms.push_back(name);
        return name;
    };

    std::vector<std::string> current;
    for (int i = 0; i < width; i++) {
        current.push_back(new_arm());
    }
    layout.slices.push_back(current);

    for (int k = 0; k < stages; k++) {
        std::vector<std::string> order = current;
        std::shuffle(order.begin(), order.end(), rng);
        Stage stage;
        std::vector<std::string> next;
        std::size_t i = 0;
        int bs_count = 0;
        for (; i + 1 < order.size(); i += 2) {
            if (pick(0, 3) == 0) {
                break;
            }
            std::string c = new_arm();
            std::string d = new_arm();
            stage.components.push_back(ComponentSpec{ComponentKind::beamsplitter,
                                                     "BS" + std::to_string(k) + "_" + std::to_string(bs_count++),
                                                     {order[i], order[i + 1]},
                                                     {c, d},
                                                     uniform(0.05, std::numbers::pi / 2 - 0.05),
                                                     uniform(-std::numbers::pi, std::numbers::pi)});
            next.push_back(c);
            next.push_back(d);
        }
        for (; i < order.size(); i++) {
            if (pick(0, 1) == 0) {
                stage.components.push_back(ComponentSpec{ComponentKind::phase,
                                                         "P" + std::to_string(k) + "_" + order[i],
                                                         {order[i]},
                                                         {order[i]},
                                                         0.0,
                                                         uniform(-std::numbers::pi, std::numbers::pi)});
            } else {
                stage.pass_through.push_back(order[i]);
            }
            next.push_back(order[i]);
        }
        std::shuffle(next.begin(), next.end(), rng);
        layout.stages.push_back(stage);
        layout.slices.push_back(next);
        current = next;
    }

    layout.source = layout.slices.front()[static_cast<std::size_t>(pick(0, width - 1))];
    for (std::size_t i = 0; i < current.size(); i++) {
        layout.detectors.push_back({"P" + std::to_string(i), current[i]});
    }
    return layout;
}

/// The detector port with the largest postselection probability.
inline std::string brightest_port(const NetworkLayout &layout) {
    std::string best;
    double best_p = -1;
    for (const auto &d : layout.detectors) {
        double p = std::norm(postselection_amplitude(layout, d.name));
        if (p > best_p) {
            best_p = p;
            best = d.name;
        }
    }
    return best;
}

}  // namespace weakpath::test_support

#endif
