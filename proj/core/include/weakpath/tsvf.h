#ifndef WEAKPATH_TSVF_H
#define WEAKPATH_TSVF_H

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "weakpath/network.h"

namespace weakpath {

/// Below this |⟨f|U|in⟩| weak values are reported as undefined.
inline constexpr double kDegeneracyThreshold = 1e-12;

class DegeneratePostselection : public std::runtime_error {
   public:
    explicit DegeneratePostselection(const std::string &port, Complex amplitude);

    Complex amplitude() const {
        return amplitude_;
    }

   private:
    Complex amplitude_;
};

/// Backward-evolved postselection bra ⟨f|U(t_f, t) as a row over the slice's arms.
struct CoState {
    std::size_t slice = 0;
    ComplexRowVector components;
};

struct ArmProjector {
    std::string arm;
    std::size_t slice = 0;

    bool operator==(const ArmProjector &) const = default;
};

/// Time-ordered product Π_n(t_n) … Π_1(t_1) of arm projectors.
///
/// Entries must come in non-decreasing slice order. Repeated projectors on
/// the same arm and slice collapse into one; two different arms at one slice
/// make the whole product the zero operator.
class ProjectorChain {
   public:
    ProjectorChain() = default;
    explicit ProjectorChain(std::vector<ArmProjector> projectors);

    const std::vector<ArmProjector> &projectors() const {
        return projectors_;
    }
    bool is_zero() const {
        return zero_;
    }
    bool empty() const {
        return projectors_.empty();
    }
    std::string to_string() const;

   private:
    std::vector<ArmProjector> projectors_;
    bool zero_ = false;
};

struct WeakValueResult {
    Complex value;
    Complex numerator;
    Complex postselection_amplitude;
};

PathState forward_state(const NetworkLayout &layout, std::size_t slice);

CoState backward_state(const NetworkLayout &layout, std::string_view port, std::size_t slice);

/// ⟨φ(t)|ψ(t)⟩, which is the same at every slice.
Complex contract(const CoState &bra, const PathState &ket);

/// ⟨f|U(t_f, t_0)|in⟩.
Complex postselection_amplitude(const NetworkLayout &layout, std::string_view port);

WeakValueResult weak_value(const NetworkLayout &layout, std::string_view port, const ArmProjector &projector);

/// ⟨f|U Π_n … U Π_1 U|in⟩ / ⟨f|U|in⟩.
WeakValueResult sequential_weak_value(const NetworkLayout &layout, std::string_view port,
                                      const ProjectorChain &chain);

/// Unnormalized amplitude ⟨target|U(t, t_n) Π_n … Π_1 U(t_1, t_0)|in⟩ for an
/// arm at any slice at or after the last projector.
Complex chain_amplitude(const NetworkLayout &layout, const ProjectorChain &chain, std::string_view target_arm,
                        std::size_t target_slice);

}  // namespace weakpath

#endif
