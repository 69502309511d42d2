#ifndef WEAKPATH_NETWORK_H
#define WEAKPATH_NETWORK_H

#include <complex>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace weakpath {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using ComplexRowVector = Eigen::RowVectorXcd;

/// Entry-wise tolerance for stage unitarity, ‖U†U − I‖_max.
inline constexpr double kUnitarityTolerance = 1e-12;

enum class ComponentKind { beamsplitter, mirror, phase };

std::string_view component_kind_name(ComponentKind kind);

/// One optical element acting between two adjacent slices.
///
/// A beamsplitter with inputs (a, b) and outputs (c, d) sends
///     c = e^{iφ} (cos θ · a + i sin θ · b)
///     d = e^{iφ} (i sin θ · a + cos θ · b)
/// so θ = π/4 is a 50-50 splitter with real transmission and reflection
/// multiplied by i. Mirrors are the identity (arm relabelling) and phase
/// elements multiply their single arm by e^{iφ}.
struct ComponentSpec {
    ComponentKind kind = ComponentKind::mirror;
    std::string name;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    double theta = 0.0;
    double phase = 0.0;

    bool operator==(const ComponentSpec &) const = default;
};

struct Stage {
    std::vector<ComponentSpec> components;
    std::vector<std::string> pass_through;
    /// Replaces the matrix assembled from `components`. Only used to inject
    /// hand-built (possibly broken) matrices; never produced by the parser.
    std::optional<ComplexMatrix> raw_override;

    bool operator==(const Stage &other) const;
};

struct DetectorPort {
    std::string name;
    std::string arm;

    bool operator==(const DetectorPort &) const = default;
};

/// Arms organised into time slices, with stage k mapping slice k to slice k+1.
///
/// Arm labels are global: an arm carried through a stage unchanged keeps its
/// label at the next slice. Rows and columns of every stage matrix follow the
/// order in which arms are listed in the slices.
struct NetworkLayout {
    std::vector<std::string> arms;
    std::vector<std::vector<std::string>> slices;
    std::vector<Stage> stages;
    std::string source;
    std::vector<DetectorPort> detectors;

    std::size_t num_slices() const {
        return slices.size();
    }
    std::size_t final_slice() const {
        return slices.empty() ? 0 : slices.size() - 1;
    }
    /// Position of `arm` within slice `slice`, if present.
    std::optional<std::size_t> arm_index(std::size_t slice, std::string_view arm) const;
    /// Like arm_index but throws std::invalid_argument when missing.
    std::size_t require_arm_index(std::size_t slice, std::string_view arm) const;
    const DetectorPort &detector(std::string_view port) const;

    bool operator==(const NetworkLayout &other) const;
};

struct Violation {
    std::optional<std::size_t> stage;
    std::string arm;
    std::string message;
};

using ValidationReport = std::vector<Violation>;

/// Checks every structural and unitarity invariant; an empty report means valid.
ValidationReport validate_network(const NetworkLayout &layout);

/// Throws std::invalid_argument listing the violations when the layout is invalid.
void require_valid(const NetworkLayout &layout);

/// Matrix over (slice k+1 arms) × (slice k arms).
ComplexMatrix stage_unitary(const NetworkLayout &layout, std::size_t stage);

/// Product of stage matrices taking slice `from` to slice `to` (identity when equal).
ComplexMatrix transfer_matrix(const NetworkLayout &layout, std::size_t from, std::size_t to);

/// Complex amplitudes over the arms of one slice.
struct PathState {
    std::size_t slice = 0;
    ComplexVector amplitudes;
};

PathState propagate(const PathState &state, const NetworkLayout &layout, std::size_t from_slice, std::size_t to_slice);

/// (cos θ, sin θ) for a beamsplitter, exactly balanced at θ = π/4.
std::pair<double, double> splitter_coefficients(double theta);

/// Max-entry deviation ‖U†U − I‖_max, or +inf for non-square matrices.
double unitarity_defect(const ComplexMatrix &u);

/// The nested Mach-Zehnder interferometer with all-50-50 beamsplitters.
///
///     slice 0      {in, V1, V2}   source "in", vacuum inputs V1, V2
///     stage 0 BS1  (in, V1) -> (N, D)
///     slice 1      {N, D, V2}
///     stage 1 BS2  (D, V2) -> (B, C)
///     slice 2 (t1) {N, B, C}
///     stage 2 BS3  (B, C) -> (E, F)
///     slice 3 (t2) {N, E, F}
///     stage 3 BS4  (N, E) -> (D1, D2);  mirror F -> D3
///     slice 4      {D1, D2, D3}       ports D1, D2, D3
///
/// The inner interferometer is dark toward E; this is checked when the
/// preset is built.
NetworkLayout nested_mzi_preset();

namespace preset {
inline constexpr std::size_t kSliceT1 = 2;
inline constexpr std::size_t kSliceT2 = 3;
}  // namespace preset

}  // namespace weakpath

#endif
