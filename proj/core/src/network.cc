#include "weakpath/network.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace weakpath {

std::string_view component_kind_name(ComponentKind kind) {
    switch (kind) {
        case ComponentKind::beamsplitter:
            return "bs";
        case ComponentKind::mirror:
            return "mirror";
        case ComponentKind::phase:
            return "phase";
    }
    return "?";
}

bool Stage::operator==(const Stage &other) const {
    if (components != other.components || pass_through != other.pass_through) {
        return false;
    }
    if (raw_override.has_value() != other.raw_override.has_value()) {
        return false;
    }
    return !raw_override.has_value() || *raw_override == *other.raw_override;
}

bool NetworkLayout::operator==(const NetworkLayout &other) const {
    return arms == other.arms && slices == other.slices && stages == other.stages && source == other.source &&
           detectors == other.detectors;
}

std::optional<std::size_t> NetworkLayout::arm_index(std::size_t slice, std::string_view arm) const {
    if (slice >= slices.size()) {
        return std::nullopt;
    }
    const auto &s = slices[slice];
    auto it = std::find(s.begin(), s.end(), arm);
    if (it == s.end()) {
        return std::nullopt;
    }
    return static_cast<std::size_t>(it - s.begin());
}

std::size_t NetworkLayout::require_arm_index(std::size_t slice, std::string_view arm) const {
    if (slice >= slices.size()) {
        throw std::invalid_argument("slice " + std::to_string(slice) + " out of range");
    }
    auto idx = arm_index(slice, arm);
    if (!idx) {
        throw std::invalid_argument("arm " + std::string(arm) + " does not exist at slice " + std::to_string(slice));
    }
    return *idx;
}

const DetectorPort &NetworkLayout::detector(std::string_view port) const {
    for (const auto &d : detectors) {
        if (d.name == port) {
            return d;
        }
    }
    throw std::invalid_argument("unknown detector port " + std::string(port));
}

double unitarity_defect(const ComplexMatrix &u) {
    if (u.rows() != u.cols()) {
        return std::numeric_limits<double>::infinity();
    }
    ComplexMatrix d = u.adjoint() * u - ComplexMatrix::Identity(u.rows(), u.cols());
    return d.cwiseAbs().maxCoeff();
}

namespace {

bool valid_label(const std::string &s) {
    if (s.empty()) {
        return false;
    }
    return std::none_of(s.begin(), s.end(), [](unsigned char c) {
        return std::isspace(c) || c == ',' || c == '=' || c == '#' || c == '@' || c == ':';
    });
}

void check_stage_structure(const NetworkLayout &layout, std::size_t k, ValidationReport &out) {
    const auto &stage = layout.stages[k];
    const auto &in_arms = layout.slices[k];
    const auto &out_arms = layout.slices[k + 1];
    std::map<std::string, int> consumed;
    std::map<std::string, int> produced;

    for (const auto &c : stage.components) {
        std::size_t want = c.kind == ComponentKind::beamsplitter ? 2 : 1;
        if (c.inputs.size() != want || c.outputs.size() != want) {
            out.push_back({k, c.name, std::string(component_kind_name(c.kind)) + " " + c.name + " at stage " +
                                          std::to_string(k) + " needs " + std::to_string(want) + " input(s) and " +
                                          std::to_string(want) + " output(s)"});
        }
        if (c.kind == ComponentKind::phase && c.inputs.size() == 1 && c.outputs.size() == 1 &&
            c.inputs[0] != c.outputs[0]) {
            out.push_back({k, c.inputs[0], "phase element must keep its arm at stage " + std::to_string(k)});
        }
        for (const auto &a : c.inputs) {
            consumed[a]++;
            if (std::find(in_arms.begin(), in_arms.end(), a) == in_arms.end()) {
                out.push_back({k, a, "arm " + a + " is not present at slice " + std::to_string(k)});
            }
        }
        for (const auto &a : c.outputs) {
            produced[a]++;
            if (std::find(out_arms.begin(), out_arms.end(), a) == out_arms.end()) {
                out.push_back({k, a, "arm " + a + " is not present at slice " + std::to_string(k + 1)});
            }
        }
    }
    for (const auto &a : stage.pass_through) {
        consumed[a]++;
        produced[a]++;
        if (std::find(in_arms.begin(), in_arms.end(), a) == in_arms.end() ||
            std::find(out_arms.begin(), out_arms.end(), a) == out_arms.end()) {
            out.push_back({k, a, "pass-through arm " + a + " must exist at slices " + std::to_string(k) + " and " +
                                     std::to_string(k + 1)});
        }
    }
    for (const auto &a : in_arms) {
        int n = consumed.count(a) ? consumed[a] : 0;
        if (n == 0) {
            out.push_back({k, a, "arm " + a + " not consumed at stage " + std::to_string(k)});
        } else if (n > 1) {
            out.push_back({k, a, "arm " + a + " double-consumed at stage " + std::to_string(k)});
        }
    }
    for (const auto &a : out_arms) {
        int n = produced.count(a) ? produced[a] : 0;
        if (n == 0) {
            out.push_back({k, a, "arm " + a + " not produced at stage " + std::to_string(k)});
        } else if (n > 1) {
            out.push_back({k, a, "arm " + a + " produced twice at stage " + std::to_string(k)});
        }
    }
}

}  // namespace

std::pair<double, double> splitter_coefficients(double theta) {
    // cos and sin of the rounded π/4 differ by one ulp; a 50-50 splitter
    // should be exactly balanced so that dark ports come out exactly dark.
    if (theta == std::numbers::pi / 4) {
        return {std::numbers::sqrt2 / 2, std::numbers::sqrt2 / 2};
    }
    return {std::cos(theta), std::sin(theta)};
}

ValidationReport validate_network(const NetworkLayout &layout) {
    ValidationReport out;

    std::map<std::string, int> declared;
    for (const auto &a : layout.arms) {
        if (!valid_label(a)) {
            out.push_back({std::nullopt, a, "invalid arm label '" + a + "'"});
        }
        if (++declared[a] == 2) {
            out.push_back({std::nullopt, a, "arm " + a + " declared twice"});
        }
    }
    if (layout.slices.empty()) {
        out.push_back({std::nullopt, "", "layout has no slices"});
        return out;
    }
    for (std::size_t s = 0; s < layout.slices.size(); s++) {
        std::map<std::string, int> seen;
        if (layout.slices[s].empty()) {
            out.push_back({std::nullopt, "", "slice " + std::to_string(s) + " is empty"});
        }
        for (const auto &a : layout.slices[s]) {
            if (!declared.count(a)) {
                out.push_back({std::nullopt, a, "arm " + a + " at slice " + std::to_string(s) + " is not declared"});
            }
            if (++seen[a] == 2) {
                out.push_back({std::nullopt, a, "arm " + a + " listed twice at slice " + std::to_string(s)});
            }
        }
    }
    if (layout.stages.size() + 1 != layout.slices.size()) {
        out.push_back({std::nullopt, "", "expected " + std::to_string(layout.slices.size() - 1) + " stages, found " +
                                             std::to_string(layout.stages.size())});
        return out;
    }
    if (!layout.arm_index(0, layout.source)) {
        out.push_back({std::nullopt, layout.source, "source arm '" + layout.source + "' is not present at slice 0"});
    }
    if (layout.detectors.empty()) {
        out.push_back({std::nullopt, "", "no detector ports declared"});
    }
    std::map<std::string, int> port_names;
    for (const auto &d : layout.detectors) {
        if (++port_names[d.name] == 2) {
            out.push_back({std::nullopt, d.arm, "detector port " + d.name + " declared twice"});
        }
        if (!layout.arm_index(layout.final_slice(), d.arm)) {
            out.push_back({std::nullopt, d.arm, "detector " + d.name + " arm " + d.arm + " is not in the final slice"});
        }
    }

    for (std::size_t k = 0; k < layout.stages.size(); k++) {
        std::size_t before = out.size();
        if (!layout.stages[k].raw_override) {
            check_stage_structure(layout, k, out);
        }
        if (out.size() != before) {
            continue;
        }
        ComplexMatrix u = stage_unitary(layout, k);
        if (u.rows() != static_cast<Eigen::Index>(layout.slices[k + 1].size()) ||
            u.cols() != static_cast<Eigen::Index>(layout.slices[k].size())) {
            out.push_back({k, "", "stage " + std::to_string(k) + " matrix has wrong shape"});
            continue;
        }
        double defect = unitarity_defect(u);
        if (!(defect < kUnitarityTolerance)) {
            std::ostringstream msg;
            msg << "stage " << k << " is not unitary (max |U^dag U - I| = " << defect << ")";
            out.push_back({k, "", msg.str()});
        }
    }
    return out;
}

void require_valid(const NetworkLayout &layout) {
    auto report = validate_network(layout);
    if (report.empty()) {
        return;
    }
    std::string msg = "invalid network:";
    for (const auto &v : report) {
        msg += "\n  " + v.message;
    }
    throw std::invalid_argument(msg);
}

ComplexMatrix stage_unitary(const NetworkLayout &layout, std::size_t k) {
    if (k >= layout.stages.size() || k + 1 >= layout.slices.size()) {
        throw std::out_of_range("stage index " + std::to_string(k) + " out of range");
    }
    const auto &stage = layout.stages[k];
    if (stage.raw_override) {
        return *stage.raw_override;
    }
    auto rows = static_cast<Eigen::Index>(layout.slices[k + 1].size());
    auto cols = static_cast<Eigen::Index>(layout.slices[k].size());
    ComplexMatrix u = ComplexMatrix::Zero(rows, cols);
    auto col = [&](const std::string &a) {
        return static_cast<Eigen::Index>(layout.require_arm_index(k, a));
    };
    auto row = [&](const std::string &a) {
        return static_cast<Eigen::Index>(layout.require_arm_index(k + 1, a));
    };

    for (const auto &a : stage.pass_through) {
        u(row(a), col(a)) = 1.0;
    }
    for (const auto &c : stage.components) {
        Complex global = std::polar(1.0, c.phase);
        switch (c.kind) {
            case ComponentKind::beamsplitter: {
                auto [cs, sn] = splitter_coefficients(c.theta);
                Complex t = global * cs;
                Complex r = global * Complex(0.0, sn);
                u(row(c.outputs[0]), col(c.inputs[0])) += t;
                u(row(c.outputs[0]), col(c.inputs[1])) += r;
                u(row(c.outputs[1]), col(c.inputs[0])) += r;
                u(row(c.outputs[1]), col(c.inputs[1])) += t;
                break;
            }
            case ComponentKind::mirror:
                u(row(c.outputs[0]), col(c.inputs[0])) += 1.0;
                break;
            case ComponentKind::phase:
                u(row(c.outputs[0]), col(c.inputs[0])) += global;
                break;
        }
    }
    return u;
}

ComplexMatrix transfer_matrix(const NetworkLayout &layout, std::size_t from, std::size_t to) {
    if (from > to || to >= layout.slices.size()) {
        throw std::invalid_argument("invalid slice range " + std::to_string(from) + " -> " + std::to_string(to));
    }
    auto n = static_cast<Eigen::Index>(layout.slices[from].size());
    ComplexMatrix m = ComplexMatrix::Identity(n, n);
    for (std::size_t k = from; k < to; k++) {
        m = stage_unitary(layout, k) * m;
    }
    return m;
}

PathState propagate(const PathState &state, const NetworkLayout &layout, std::size_t from_slice,
                    std::size_t to_slice) {
    if (from_slice > to_slice) {
        throw std::invalid_argument("propagate requires from_slice <= to_slice");
    }
    if (to_slice >= layout.slices.size()) {
        throw std::invalid_argument("slice " + std::to_string(to_slice) + " out of range");
    }
    if (state.slice != from_slice ||
        state.amplitudes.size() != static_cast<Eigen::Index>(layout.slices[from_slice].size())) {
        throw std::invalid_argument("state is not indexed on slice " + std::to_string(from_slice));
    }
    PathState out = state;
    for (std::size_t k = from_slice; k < to_slice; k++) {
        out.amplitudes = stage_unitary(layout, k) * out.amplitudes;
    }
    out.slice = to_slice;
    return out;
}

NetworkLayout nested_mzi_preset() {
    constexpr double kHalf = std::numbers::pi / 4;
    auto bs = [&](std::string name, std::string a, std::string b, std::string c, std::string d) {
        return ComponentSpec{ComponentKind::beamsplitter, std::move(name), {std::move(a), std::move(b)},
                             {std::move(c), std::move(d)}, kHalf, 0.0};
    };

    NetworkLayout layout;
    layout.arms = {"in", "V1", "V2", "N", "D", "B", "C", "E", "F", "D1", "D2", "D3"};
    layout.slices = {
        {"in", "V1", "V2"},
        {"N", "D", "V2"},
        {"N", "B", "C"},
        {"N", "E", "F"},
        {"D1", "D2", "D3"},
    };
    layout.stages.resize(4);
    layout.stages[0].components = {bs("BS1", "in", "V1", "N", "D")};
    layout.stages[0].pass_through = {"V2"};
    layout.stages[1].components = {bs("BS2", "D", "V2", "B", "C")};
    layout.stages[1].pass_through = {"N"};
    layout.stages[2].components = {bs("BS3", "B", "C", "E", "F")};
    layout.stages[2].pass_through = {"N"};
    layout.stages[3].components = {
        bs("BS4", "N", "E", "D1", "D2"),
        ComponentSpec{ComponentKind::mirror, "M", {"F"}, {"D3"}, 0.0, 0.0},
    };
    layout.source = "in";
    layout.detectors = {{"D1", "D1"}, {"D2", "D2"}, {"D3", "D3"}};

    require_valid(layout);

    // The inner interferometer must be dark toward E and fully bright toward F.
    ComplexMatrix inner = transfer_matrix(layout, 1, preset::kSliceT2);
    std::size_t d = layout.require_arm_index(1, "D");
    Complex d_to_e = inner(static_cast<Eigen::Index>(layout.require_arm_index(preset::kSliceT2, "E")),
                           static_cast<Eigen::Index>(d));
    Complex d_to_f = inner(static_cast<Eigen::Index>(layout.require_arm_index(preset::kSliceT2, "F")),
                           static_cast<Eigen::Index>(d));
    if (std::norm(d_to_e) >= 1e-24 || std::abs(std::norm(d_to_f) - 1.0) > 1e-12) {
        throw std::logic_error("nested MZI preset is not dark toward E");
    }
    return layout;
}

}  // namespace weakpath
