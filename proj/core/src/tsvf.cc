#include "weakpath/tsvf.h"

#include <sstream>

namespace weakpath {

namespace {

std::string describe(Complex z) {
    std::ostringstream s;
    s.precision(17);
    s << z.real() << (z.imag() < 0 ? "" : "+") << z.imag() << "i";
    return s.str();
}

void require_slice(const NetworkLayout &layout, std::size_t slice) {
    if (slice >= layout.num_slices()) {
        throw std::invalid_argument("slice " + std::to_string(slice) + " out of range");
    }
}

// Applies the chain to |in⟩ and leaves the result on `to_slice`.
PathState apply_chain(const NetworkLayout &layout, const ProjectorChain &chain, std::size_t to_slice) {
    PathState state = forward_state(layout, 0);
    if (chain.is_zero()) {
        require_slice(layout, to_slice);
        state.amplitudes = ComplexVector::Zero(static_cast<Eigen::Index>(layout.slices[to_slice].size()));
        state.slice = to_slice;
        return state;
    }
    for (const auto &p : chain.projectors()) {
        auto idx = layout.require_arm_index(p.slice, p.arm);
        state = propagate(state, layout, state.slice, p.slice);
        Complex keep = state.amplitudes(static_cast<Eigen::Index>(idx));
        state.amplitudes.setZero();
        state.amplitudes(static_cast<Eigen::Index>(idx)) = keep;
    }
    if (to_slice < state.slice) {
        throw std::invalid_argument("target slice precedes the last projector");
    }
    return propagate(state, layout, state.slice, to_slice);
}

}  // namespace

DegeneratePostselection::DegeneratePostselection(const std::string &port, Complex amplitude)
    : std::runtime_error("postselection on " + port + " is degenerate (<f|U|in> = " + describe(amplitude) +
                         "); weak values are undefined"),
      amplitude_(amplitude) {
}

ProjectorChain::ProjectorChain(std::vector<ArmProjector> projectors) {
    for (auto &p : projectors) {
        if (!projectors_.empty()) {
            const auto &last = projectors_.back();
            if (p.slice < last.slice) {
                throw std::invalid_argument("projector chain slices must be non-decreasing: " + p.arm + "@" +
                                            std::to_string(p.slice) + " follows " + last.arm + "@" +
                                            std::to_string(last.slice));
            }
            if (p.slice == last.slice) {
                if (p.arm != last.arm) {
                    zero_ = true;
                }
                continue;
            }
        }
        projectors_.push_back(std::move(p));
    }
}

std::string ProjectorChain::to_string() const {
    std::string out;
    for (const auto &p : projectors_) {
        if (!out.empty()) {
            out += "->";
        }
        out += p.arm + "@" + std::to_string(p.slice);
    }
    if (zero_) {
        out += " (zero)";
    }
    return out;
}

PathState forward_state(const NetworkLayout &layout, std::size_t slice) {
    require_slice(layout, slice);
    PathState s;
    s.slice = 0;
    s.amplitudes = ComplexVector::Zero(static_cast<Eigen::Index>(layout.slices[0].size()));
    s.amplitudes(static_cast<Eigen::Index>(layout.require_arm_index(0, layout.source))) = 1.0;
    return propagate(s, layout, 0, slice);
}

CoState backward_state(const NetworkLayout &layout, std::string_view port, std::size_t slice) {
    require_slice(layout, slice);
    const auto &det = layout.detector(port);
    std::size_t final = layout.final_slice();
    ComplexRowVector bra = ComplexRowVector::Zero(static_cast<Eigen::Index>(layout.slices[final].size()));
    bra(static_cast<Eigen::Index>(layout.require_arm_index(final, det.arm))) = 1.0;
    for (std::size_t k = final; k > slice; k--) {
        bra = bra * stage_unitary(layout, k - 1);
    }
    return CoState{slice, bra};
}

Complex contract(const CoState &bra, const PathState &ket) {
    if (bra.slice != ket.slice || bra.components.size() != ket.amplitudes.size()) {
        throw std::invalid_argument("bra and ket live on different slices");
    }
    return (bra.components * ket.amplitudes)(0, 0);
}

Complex postselection_amplitude(const NetworkLayout &layout, std::string_view port) {
    return contract(backward_state(layout, port, 0), forward_state(layout, 0));
}

namespace {

WeakValueResult finish(std::string_view port, Complex numerator, Complex denominator) {
    if (!(std::abs(denominator) > kDegeneracyThreshold)) {
        throw DegeneratePostselection(std::string(port), denominator);
    }
    return WeakValueResult{numerator / denominator, numerator, denominator};
}

}  // namespace

WeakValueResult weak_value(const NetworkLayout &layout, std::string_view port, const ArmProjector &projector) {
    auto idx = static_cast<Eigen::Index>(layout.require_arm_index(projector.slice, projector.arm));
    CoState bra = backward_state(layout, port, projector.slice);
    PathState ket = forward_state(layout, projector.slice);
    Complex denominator = contract(bra, ket);
    return finish(port, bra.components(idx) * ket.amplitudes(idx), denominator);
}

WeakValueResult sequential_weak_value(const NetworkLayout &layout, std::string_view port,
                                      const ProjectorChain &chain) {
    if (chain.empty()) {
        throw std::invalid_argument("projector chain is empty");
    }
    const auto &det = layout.detector(port);
    Complex denominator = postselection_amplitude(layout, port);
    Complex numerator = chain_amplitude(layout, chain, det.arm, layout.final_slice());
    return finish(port, numerator, denominator);
}

Complex chain_amplitude(const NetworkLayout &layout, const ProjectorChain &chain, std::string_view target_arm,
                        std::size_t target_slice) {
    auto idx = static_cast<Eigen::Index>(layout.require_arm_index(target_slice, target_arm));
    return apply_chain(layout, chain, target_slice).amplitudes(idx);
}

}  // namespace weakpath
