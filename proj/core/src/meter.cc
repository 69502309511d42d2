#include "weakpath/meter.h"

#include <cmath>

namespace weakpath {

char quadrature_name(Quadrature q) {
    return q == Quadrature::x ? 'x' : 'p';
}

Experiment::Experiment(NetworkLayout layout) {
    require_valid(layout);
    layout_ = std::make_shared<const NetworkLayout>(std::move(layout));
}

const MeterAttachment &Experiment::meter(std::size_t id) const {
    if (id >= meters_.size()) {
        throw std::out_of_range("unknown meter " + std::to_string(id));
    }
    return meters_[id];
}

Experiment attach_meter(Experiment experiment, std::string_view arm, std::size_t slice, double strength,
                        double sigma) {
    experiment.layout().require_arm_index(slice, arm);
    if (!(strength >= 0) || !std::isfinite(strength)) {
        throw std::invalid_argument("meter strength must be finite and >= 0");
    }
    if (!(sigma > 0) || !std::isfinite(sigma)) {
        throw std::invalid_argument("pointer width sigma must be positive");
    }
    experiment.meters_.push_back(MeterAttachment{std::string(arm), slice, strength, GaussianPointer{sigma}});
    return experiment;
}

JointState::JointState(std::size_t slice, std::vector<double> sigmas) : slice_(slice), sigmas_(std::move(sigmas)) {
}

JointState JointState::initial(const Experiment &experiment) {
    std::vector<double> sigmas;
    for (const auto &m : experiment.meters()) {
        sigmas.push_back(m.pointer.sigma);
    }
    JointState state(0, sigmas);
    state.groups_[ShiftVector(sigmas.size(), 0.0)] = forward_state(experiment.layout(), 0).amplitudes;
    return state;
}

std::vector<JointTerm> JointState::terms() const {
    std::vector<JointTerm> out;
    for (const auto &[shifts, amps] : groups_) {
        for (Eigen::Index a = 0; a < amps.size(); a++) {
            out.push_back({static_cast<std::size_t>(a), shifts, amps(a)});
        }
    }
    return out;
}

std::size_t JointState::num_terms() const {
    std::size_t n = 0;
    for (const auto &[shifts, amps] : groups_) {
        n += static_cast<std::size_t>(amps.size());
    }
    return n;
}

namespace {

double product_overlap(const ShiftVector &a, const ShiftVector &b, const std::vector<double> &sigmas) {
    double o = 1.0;
    for (std::size_t j = 0; j < sigmas.size(); j++) {
        if (a[j] != b[j]) {
            o *= gaussian_overlap(a[j], b[j], sigmas[j]);
        }
    }
    return o;
}

}  // namespace

double JointState::arm_norm_squared(std::size_t arm) const {
    auto idx = static_cast<Eigen::Index>(arm);
    double total = 0.0;
    for (const auto &[s1, v1] : groups_) {
        for (const auto &[s2, v2] : groups_) {
            total += (std::conj(v1(idx)) * v2(idx)).real() * product_overlap(s1, s2, sigmas_);
        }
    }
    return total;
}

double JointState::norm_squared() const {
    if (groups_.empty()) {
        return 0.0;
    }
    double total = 0.0;
    for (Eigen::Index a = 0; a < groups_.begin()->second.size(); a++) {
        total += arm_norm_squared(static_cast<std::size_t>(a));
    }
    return total;
}

void JointState::apply_stage(const ComplexMatrix &unitary, std::size_t next_slice) {
    for (auto &[shifts, amps] : groups_) {
        amps = unitary * amps;
    }
    slice_ = next_slice;
}

void JointState::apply_coupling(std::size_t meter, std::size_t arm, double strength) {
    if (strength == 0.0) {
        return;
    }
    auto idx = static_cast<Eigen::Index>(arm);
    std::map<ShiftVector, ComplexVector> next;
    for (auto &[shifts, amps] : groups_) {
        ShiftVector moved = shifts;
        moved[meter] += strength;
        Complex c = amps(idx);
        ComplexVector stay = amps;
        stay(idx) = 0.0;
        auto [it, fresh] = next.try_emplace(shifts, ComplexVector::Zero(amps.size()));
        it->second += stay;
        auto [jt, fresh2] = next.try_emplace(moved, ComplexVector::Zero(amps.size()));
        jt->second(idx) += c;
    }
    groups_ = std::move(next);
}

JointState run_coupled_to(const Experiment &experiment, std::size_t slice) {
    const auto &layout = experiment.layout();
    if (slice >= layout.num_slices()) {
        throw std::invalid_argument("slice " + std::to_string(slice) + " out of range");
    }
    JointState state = JointState::initial(experiment);
    for (std::size_t t = 0; t <= slice; t++) {
        for (std::size_t j = 0; j < experiment.num_meters(); j++) {
            const auto &m = experiment.meter(j);
            if (m.slice == t) {
                state.apply_coupling(j, layout.require_arm_index(t, m.arm), m.strength);
            }
        }
        if (t < slice) {
            state.apply_stage(stage_unitary(layout, t), t + 1);
        }
    }
    return state;
}

JointState run_coupled(const Experiment &experiment) {
    return run_coupled_to(experiment, experiment.layout().final_slice());
}

PointerMixture::PointerMixture(std::vector<ShiftVector> shifts, std::vector<Complex> amplitudes,
                               std::vector<double> sigmas, std::vector<double> strengths)
    : shifts_(std::move(shifts)),
      amplitudes_(std::move(amplitudes)),
      sigmas_(std::move(sigmas)),
      strengths_(std::move(strengths)),
      probability_(0.0) {
    if (shifts_.size() != amplitudes_.size() || sigmas_.size() != strengths_.size()) {
        throw std::invalid_argument("inconsistent pointer mixture");
    }
    std::vector<PointerOp> ident(sigmas_.size(), PointerOp::identity);
    probability_ = raw_expectation(ident).real();
    if (!(probability_ >= kMinPostselectionProbability)) {
        throw ZeroProbability("postselection probability is zero; pointer state undefined");
    }
}

double PointerMixture::sigma(std::size_t meter) const {
    if (meter >= sigmas_.size()) {
        throw std::out_of_range("unknown meter " + std::to_string(meter));
    }
    return sigmas_[meter];
}

double PointerMixture::strength(std::size_t meter) const {
    if (meter >= strengths_.size()) {
        throw std::out_of_range("unknown meter " + std::to_string(meter));
    }
    return strengths_[meter];
}

Complex PointerMixture::raw_expectation(std::span<const PointerOp> ops) const {
    if (ops.size() != sigmas_.size()) {
        throw std::invalid_argument("expected one pointer operator per meter");
    }
    Complex total = 0.0;
    for (std::size_t u = 0; u < shifts_.size(); u++) {
        for (std::size_t v = 0; v < shifts_.size(); v++) {
            Complex elem = std::conj(amplitudes_[u]) * amplitudes_[v];
            for (std::size_t j = 0; j < sigmas_.size(); j++) {
                elem *= pointer_element(ops[j], shifts_[u][j], shifts_[v][j], sigmas_[j]);
            }
            total += elem;
        }
    }
    return total;
}

Complex PointerMixture::expectation(std::span<const PointerOp> ops) const {
    return raw_expectation(ops) / probability_;
}

PointerMixture postselect(const Experiment &experiment, const JointState &joint, std::string_view port) {
    const auto &layout = experiment.layout();
    const auto &det = layout.detector(port);
    if (joint.slice() != layout.final_slice()) {
        throw std::invalid_argument("postselection needs the joint state at the final slice");
    }
    auto idx = static_cast<Eigen::Index>(layout.require_arm_index(joint.slice(), det.arm));
    std::vector<ShiftVector> shifts;
    std::vector<Complex> amps;
    for (const auto &[s, v] : joint.groups()) {
        if (v(idx) != Complex(0.0)) {
            shifts.push_back(s);
            amps.push_back(v(idx));
        }
    }
    std::vector<double> strengths;
    for (const auto &m : experiment.meters()) {
        strengths.push_back(m.strength);
    }
    if (shifts.empty()) {
        throw ZeroProbability("postselection on " + std::string(port) + " has zero probability");
    }
    return PointerMixture(std::move(shifts), std::move(amps), joint.sigmas(), std::move(strengths));
}

PointerMixture postselect(const Experiment &experiment, std::string_view port) {
    return postselect(experiment, run_coupled(experiment), port);
}

std::map<std::string, double> port_probabilities(const Experiment &experiment) {
    const auto &layout = experiment.layout();
    JointState joint = run_coupled(experiment);
    std::map<std::string, double> out;
    for (const auto &d : layout.detectors) {
        out[d.name] = joint.arm_norm_squared(layout.require_arm_index(layout.final_slice(), d.arm));
    }
    return out;
}

double pointer_mean(const PointerMixture &mixture, std::size_t meter, Quadrature q) {
    mixture.sigma(meter);
    std::vector<PointerOp> ops(mixture.num_meters(), PointerOp::identity);
    ops[meter] = q == Quadrature::x ? PointerOp::x : PointerOp::p;
    return mixture.expectation(ops).real();
}

double pointer_corr(const PointerMixture &mixture, QuadratureRef a, QuadratureRef b) {
    mixture.sigma(a.meter);
    mixture.sigma(b.meter);
    std::vector<PointerOp> ops(mixture.num_meters(), PointerOp::identity);
    auto op = [](Quadrature q) {
        return q == Quadrature::x ? PointerOp::x : PointerOp::p;
    };
    if (a.meter == b.meter) {
        if (a.quadrature != b.quadrature) {
            throw std::invalid_argument("x and p of the same meter are not jointly measurable");
        }
        ops[a.meter] = a.quadrature == Quadrature::x ? PointerOp::x2 : PointerOp::p2;
    } else {
        ops[a.meter] = op(a.quadrature);
        ops[b.meter] = op(b.quadrature);
    }
    return mixture.expectation(ops).real();
}

Complex zeta_corr(const PointerMixture &mixture, std::size_t i, std::size_t j) {
    if (i == j) {
        throw std::invalid_argument("zeta correlator needs two distinct meters");
    }
    double si2 = mixture.sigma(i) * mixture.sigma(i);
    double sj2 = mixture.sigma(j) * mixture.sigma(j);
    double xx = pointer_corr(mixture, {i, Quadrature::x}, {j, Quadrature::x});
    double pp = pointer_corr(mixture, {i, Quadrature::p}, {j, Quadrature::p});
    double xp = pointer_corr(mixture, {i, Quadrature::x}, {j, Quadrature::p});
    double px = pointer_corr(mixture, {i, Quadrature::p}, {j, Quadrature::x});
    return {xx - 4 * si2 * sj2 * pp, 2 * sj2 * xp + 2 * si2 * px};
}

Complex zeta_corr_direct(const PointerMixture &mixture, std::size_t i, std::size_t j) {
    if (i == j) {
        throw std::invalid_argument("zeta correlator needs two distinct meters");
    }
    mixture.sigma(i);
    mixture.sigma(j);
    std::vector<PointerOp> ops(mixture.num_meters(), PointerOp::identity);
    ops[i] = PointerOp::zeta;
    ops[j] = PointerOp::zeta;
    return mixture.expectation(ops);
}

Complex estimate_weak_value(const PointerMixture &mixture, std::size_t meter) {
    double g = mixture.strength(meter);
    if (g == 0.0) {
        throw std::invalid_argument("weak value estimate needs a meter with g > 0");
    }
    double s2 = mixture.sigma(meter) * mixture.sigma(meter);
    return Complex(pointer_mean(mixture, meter, Quadrature::x), 2 * s2 * pointer_mean(mixture, meter, Quadrature::p)) /
           g;
}

Complex estimate_sequential_weak_value(const PointerMixture &mixture, std::size_t i, std::size_t j) {
    double gi = mixture.strength(i);
    double gj = mixture.strength(j);
    if (gi == 0.0 || gj == 0.0) {
        throw std::invalid_argument("sequential estimate needs both meters with g > 0");
    }
    return zeta_corr(mixture, i, j) / (gi * gj);
}

double arm_probability(const Experiment &experiment, std::string_view arm, std::size_t slice) {
    std::size_t idx = experiment.layout().require_arm_index(slice, arm);
    return run_coupled_to(experiment, slice).arm_norm_squared(idx);
}

double single_meter_arm_probability(const NetworkLayout &layout, const ArmProjector &meter_at,
                                    const ArmProjector &target, double strength, double sigma) {
    if (target.slice < meter_at.slice) {
        throw std::invalid_argument("target slice precedes the meter");
    }
    Complex through = chain_amplitude(layout, ProjectorChain({meter_at}), target.arm, target.slice);
    auto idx = static_cast<Eigen::Index>(layout.require_arm_index(target.slice, target.arm));
    Complex total = forward_state(layout, target.slice).amplitudes(idx);
    Complex avoid = total - through;
    double o = gaussian_overlap(0.0, strength, sigma);
    return std::norm(avoid) + std::norm(through) + 2 * (std::conj(avoid) * through).real() * o;
}

}  // namespace weakpath
