#include <gtest/gtest.h>

#include <cmath>

#include "test_support.h"
#include "weakpath/tsvf.h"

using namespace weakpath;

namespace {

constexpr double kTol = 1e-12;

Complex wv(const NetworkLayout &layout, const std::string &port, const std::string &arm, std::size_t slice) {
    return weak_value(layout, port, ArmProjector{arm, slice}).value;
}

Complex swv(const NetworkLayout &layout, const std::string &port, std::vector<ArmProjector> chain) {
    return sequential_weak_value(layout, port, ProjectorChain(std::move(chain))).value;
}

}  // namespace

TEST(Tsvf, PresetWeakValues) {
    NetworkLayout layout = nested_mzi_preset();
    EXPECT_LT(std::abs(wv(layout, "D2", "D", 1)), kTol);
    EXPECT_LT(std::abs(wv(layout, "D2", "E", preset::kSliceT2)), kTol);
    EXPECT_LT(std::abs(wv(layout, "D2", "B", preset::kSliceT1) - 0.5), kTol);
    EXPECT_LT(std::abs(wv(layout, "D2", "C", preset::kSliceT1) + 0.5), kTol);
    EXPECT_LT(std::abs(wv(layout, "D2", "N", preset::kSliceT1) - 1.0), kTol);
}

TEST(Tsvf, PresetBackwardState) {
    NetworkLayout layout = nested_mzi_preset();
    CoState bra = backward_state(layout, "D2", preset::kSliceT1);
    const double r = std::sqrt(0.5);
    ASSERT_EQ(bra.components.size(), 3);
    EXPECT_LT(std::abs(bra.components(0) - Complex(0, r)), 1e-15);
    EXPECT_LT(std::abs(bra.components(1) - Complex(0.5, 0)), 1e-15);
    EXPECT_LT(std::abs(bra.components(2) - Complex(0, 0.5)), 1e-15);
}

TEST(Tsvf, PresetSequential) {
    NetworkLayout layout = nested_mzi_preset();
    const std::size_t t1 = preset::kSliceT1, t2 = preset::kSliceT2;
    EXPECT_LT(std::abs(swv(layout, "D2", {{"B", t1}, {"E", t2}}) - 0.5), kTol);
    EXPECT_LT(std::abs(swv(layout, "D2", {{"C", t1}, {"E", t2}}) + 0.5), kTol);
    EXPECT_LT(std::abs(swv(layout, "D2", {{"N", t1}, {"E", t2}})), kTol);
}

TEST(Tsvf, SingleProjectorChainMatchesWeakValue) {
    NetworkLayout layout = nested_mzi_preset();
    EXPECT_LT(std::abs(swv(layout, "D2", {{"B", 2}}) - wv(layout, "D2", "B", 2)), 1e-15);
}

TEST(Tsvf, EmptyChainRejected) {
    EXPECT_THROW(swv(nested_mzi_preset(), "D2", {}), std::invalid_argument);
}

TEST(Tsvf, ChainRules) {
    EXPECT_THROW(ProjectorChain({{"E", 3}, {"B", 2}}), std::invalid_argument);
    ProjectorChain same({{"B", 2}, {"B", 2}});
    EXPECT_EQ(same.projectors().size(), 1u);
    EXPECT_FALSE(same.is_zero());
    ProjectorChain orth({{"B", 2}, {"C", 2}});
    EXPECT_TRUE(orth.is_zero());
    EXPECT_EQ(sequential_weak_value(nested_mzi_preset(), "D2", orth).value, Complex(0.0));
    EXPECT_EQ(ProjectorChain({{"B", 2}, {"E", 3}}).to_string(), "B@2->E@3");
}

TEST(Tsvf, IdempotentProjector) {
    NetworkLayout layout = nested_mzi_preset();
    EXPECT_LT(std::abs(swv(layout, "D2", {{"C", 2}, {"C", 2}}) - wv(layout, "D2", "C", 2)), 1e-15);
}

TEST(Tsvf, DegeneratePostselection) {
    NetworkLayout layout = nested_mzi_preset();
    // With BS1 fully transmitting nothing reaches F, so D3 is dark.
    layout.stages[0].components[0].theta = 0.0;
    ASSERT_TRUE(validate_network(layout).empty());
    EXPECT_THROW(weak_value(layout, "D3", {"N", 1}), DegeneratePostselection);
    try {
        weak_value(layout, "D3", {"N", 1});
    } catch (const DegeneratePostselection &e) {
        EXPECT_LT(std::abs(e.amplitude()), kDegeneracyThreshold);
    }
}

TEST(Tsvf, PresetCompletenessAllPorts) {
    NetworkLayout layout = nested_mzi_preset();
    for (const std::string port : {"D1", "D2", "D3"}) {
        for (std::size_t t = 0; t < layout.num_slices(); t++) {
            Complex sum = 0;
            for (const auto &arm : layout.slices[t]) {
                sum += wv(layout, port, arm, t);
            }
            EXPECT_LT(std::abs(sum - 1.0), kTol) << port << " slice " << t;
        }
    }
}

TEST(Tsvf, ContractMatchesAmplitude) {
    NetworkLayout layout = nested_mzi_preset();
    for (std::size_t t = 0; t < layout.num_slices(); t++) {
        Complex c = contract(backward_state(layout, "D2", t), forward_state(layout, t));
        EXPECT_LT(std::abs(c - postselection_amplitude(layout, "D2")), 1e-15);
    }
}

TEST(Tsvf, ChainAmplitudeThroughBlockedArm) {
    NetworkLayout layout = nested_mzi_preset();
    // Projecting on B removes the C path that cancels it at E.
    ProjectorChain chain({{"B", 2}});
    EXPECT_GT(std::abs(chain_amplitude(layout, chain, "E", 3)), 0.1);
    EXPECT_EQ(chain_amplitude(layout, ProjectorChain(std::vector<ArmProjector>{}), "E", 3), Complex(0.0));
}

TEST(Tsvf, RandomLayoutSumRules) {
    for (std::uint64_t seed = 0; seed < 100; seed++) {
        NetworkLayout layout = test_support::random_layout(seed);
        std::string port = test_support::brightest_port(layout);
        for (std::size_t t = 0; t < layout.num_slices(); t++) {
            Complex sum = 0;
            for (const auto &arm : layout.slices[t]) {
                sum += wv(layout, port, arm, t);
            }
            EXPECT_LT(std::abs(sum - 1.0), 1e-10) << "seed " << seed;
        }
        for (std::size_t t1 = 0; t1 + 1 < layout.num_slices(); t1++) {
            std::size_t t2 = t1 + 1 + seed % (layout.num_slices() - t1 - 1);
            for (const auto &x : layout.slices[t1]) {
                Complex right = 0;
                for (const auto &y : layout.slices[t2]) {
                    right += swv(layout, port, {{x, t1}, {y, t2}});
                }
                EXPECT_LT(std::abs(right - wv(layout, port, x, t1)), 1e-10) << "seed " << seed;
            }
            for (const auto &y : layout.slices[t2]) {
                Complex left = 0;
                for (const auto &x : layout.slices[t1]) {
                    left += swv(layout, port, {{x, t1}, {y, t2}});
                }
                EXPECT_LT(std::abs(left - wv(layout, port, y, t2)), 1e-10) << "seed " << seed;
            }
        }
    }
}
