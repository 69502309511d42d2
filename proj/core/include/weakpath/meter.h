#ifndef WEAKPATH_METER_H
#define WEAKPATH_METER_H

#include <cstddef>
#include <map>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "weakpath/gaussian.h"
#include "weakpath/network.h"
#include "weakpath/tsvf.h"

namespace weakpath {

/// Postselection probabilities below this leave the pointer state undefined.
inline constexpr double kMinPostselectionProbability = 1e-300;

class ZeroProbability : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

struct GaussianPointer {
    double sigma = 1.0;
};

/// A von Neumann meter coupled impulsively at `slice` through
/// exp(-i g Π_arm ⊗ p̂).
struct MeterAttachment {
    std::string arm;
    std::size_t slice = 0;
    double strength = 0.0;
    GaussianPointer pointer;
};

enum class Quadrature { x, p };

char quadrature_name(Quadrature q);

/// A network plus the meters attached to it. Meter ids are registration order.
class Experiment {
   public:
    explicit Experiment(NetworkLayout layout);

    const NetworkLayout &layout() const {
        return *layout_;
    }
    const std::vector<MeterAttachment> &meters() const {
        return meters_;
    }
    std::size_t num_meters() const {
        return meters_.size();
    }
    const MeterAttachment &meter(std::size_t id) const;

    friend Experiment attach_meter(Experiment experiment, std::string_view arm, std::size_t slice, double strength,
                                   double sigma);

   private:
    std::shared_ptr<const NetworkLayout> layout_;
    std::vector<MeterAttachment> meters_;
};

Experiment attach_meter(Experiment experiment, std::string_view arm, std::size_t slice, double strength,
                        double sigma);

/// One pointer displacement per meter; each entry is 0 or that meter's g.
using ShiftVector = std::vector<double>;

struct JointTerm {
    std::size_t arm = 0;  // index within the slice
    ShiftVector shifts;
    Complex coefficient;
};

/// System ⊗ pointers state Σ c(arm, s) |arm⟩ ⊗ Π_j φ(x_j - s_j).
///
/// Terms are grouped by shift vector; each group holds the amplitude over
/// the slice's arms.
class JointState {
   public:
    JointState(std::size_t slice, std::vector<double> sigmas);

    std::size_t slice() const {
        return slice_;
    }
    const std::vector<double> &sigmas() const {
        return sigmas_;
    }
    const std::map<ShiftVector, ComplexVector> &groups() const {
        return groups_;
    }
    std::vector<JointTerm> terms() const;
    std::size_t num_terms() const;

    /// ‖Σ_s c(arm, s) φ_s‖² computed with exact Gaussian overlaps.
    double arm_norm_squared(std::size_t arm) const;
    double norm_squared() const;

    void apply_stage(const ComplexMatrix &unitary, std::size_t next_slice);
    void apply_coupling(std::size_t meter, std::size_t arm, double strength);

    static JointState initial(const Experiment &experiment);

   private:
    std::size_t slice_;
    std::vector<double> sigmas_;
    std::map<ShiftVector, ComplexVector> groups_;
};

/// Evolves through the network, applying every coupling registered at slices
/// up to and including `slice`.
JointState run_coupled_to(const Experiment &experiment, std::size_t slice);
JointState run_coupled(const Experiment &experiment);

/// Post-selected pointer-only state Σ_s a_s Π_j φ(x_j - s_j), unnormalized;
/// its squared norm is the postselection probability.
class PointerMixture {
   public:
    PointerMixture(std::vector<ShiftVector> shifts, std::vector<Complex> amplitudes, std::vector<double> sigmas,
                   std::vector<double> strengths);

    std::size_t num_meters() const {
        return sigmas_.size();
    }
    const std::vector<ShiftVector> &shifts() const {
        return shifts_;
    }
    const std::vector<Complex> &amplitudes() const {
        return amplitudes_;
    }
    double sigma(std::size_t meter) const;
    double strength(std::size_t meter) const;
    double postselection_probability() const {
        return probability_;
    }

    /// Normalized ⟨Ψ| ⊗_j ops[j] |Ψ⟩ / ⟨Ψ|Ψ⟩; `ops` has one entry per meter.
    Complex expectation(std::span<const PointerOp> ops) const;

   private:
    Complex raw_expectation(std::span<const PointerOp> ops) const;

    std::vector<ShiftVector> shifts_;
    std::vector<Complex> amplitudes_;
    std::vector<double> sigmas_;
    std::vector<double> strengths_;
    double probability_;
};

PointerMixture postselect(const Experiment &experiment, const JointState &joint, std::string_view port);
PointerMixture postselect(const Experiment &experiment, std::string_view port);

/// Postselection probability of every detector port, keyed by port name.
std::map<std::string, double> port_probabilities(const Experiment &experiment);

double pointer_mean(const PointerMixture &mixture, std::size_t meter, Quadrature q);

struct QuadratureRef {
    std::size_t meter;
    Quadrature quadrature;
};

/// ⟨q_i q_j⟩. Mixed x/p on a single meter is rejected.
double pointer_corr(const PointerMixture &mixture, QuadratureRef a, QuadratureRef b);

/// ⟨ζ_i ζ_j⟩ assembled from the four jointly measurable real correlators.
Complex zeta_corr(const PointerMixture &mixture, std::size_t i, std::size_t j);

/// ⟨ζ_i ζ_j⟩ evaluated directly from ζ φ_b = b φ_b.
Complex zeta_corr_direct(const PointerMixture &mixture, std::size_t i, std::size_t j);

/// (⟨x⟩ + 2iσ²⟨p⟩)/g.
Complex estimate_weak_value(const PointerMixture &mixture, std::size_t meter);

/// ⟨ζ_i ζ_j⟩/(g_i g_j).
Complex estimate_sequential_weak_value(const PointerMixture &mixture, std::size_t i, std::size_t j);

/// Probability that a projective detector at (arm, slice) fires.
double arm_probability(const Experiment &experiment, std::string_view arm, std::size_t slice);

/// Two-path closed form for a single meter on (meter_arm, meter_slice):
///     |A₀|² + |A₁|² + 2 Re(A₀* A₁) exp(-g²/(8σ²))
/// where A₁ is the amplitude to reach (target_arm, target_slice) through the
/// metered arm and A₀ the amplitude avoiding it.
double single_meter_arm_probability(const NetworkLayout &layout, const ArmProjector &meter_at,
                                    const ArmProjector &target, double strength, double sigma);

}  // namespace weakpath

#endif
