#include "weakpath/sampling.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <stdexcept>
#include <exception>
#include <mutex>
#include <thread>

#include "weakpath/philox.h"

namespace weakpath {

namespace {

constexpr std::uint64_t kMaxAttempts = 1u << 24;

// Uniform doubles for one (sample, attempt) pair, two per Philox block.
class AttemptUniforms {
   public:
    AttemptUniforms(const Philox4x32 &rng, std::uint64_t sample, std::uint32_t attempt, std::uint32_t stream)
        : rng_(rng),
          counter_{static_cast<std::uint32_t>(sample), static_cast<std::uint32_t>(sample >> 32), attempt, stream << 16} {
    }

    double next() {
        if (used_ == 2) {
            refill();
        }
        return buffer_[used_++];
    }

   private:
    void refill() {
        auto out = rng_(counter_);
        counter_[3]++;
        buffer_[0] = uniform_from_words(out[0], out[1]);
        buffer_[1] = uniform_from_words(out[2], out[3]);
        used_ = 0;
    }

    const Philox4x32 &rng_;
    Philox4x32::Counter counter_;
    double buffer_[2] = {0, 0};
    int used_ = 2;
};

struct Envelope {
    std::vector<double> cumulative;  // cumulative |a_s|
    double total = 0.0;
};

Envelope make_envelope(const PointerMixture &mixture) {
    Envelope env;
    for (const auto &a : mixture.amplitudes()) {
        env.total += std::abs(a);
        env.cumulative.push_back(env.total);
    }
    return env;
}

// Returns (|Ψ(q)|², Σ_s |a_s| Π_j |f_j|²), both unnormalized.
std::pair<double, double> density_and_envelope(const PointerMixture &mixture, std::span<const Quadrature> quads,
                                               std::span<const double> q) {
    const std::size_t m = mixture.num_meters();
    // Per-meter factors that do not depend on the term.
    double p_mod = 1.0;
    for (std::size_t j = 0; j < m; j++) {
        if (quads[j] == Quadrature::p) {
            double s = mixture.sigma(j);
            p_mod *= std::pow(2 * s * s / std::numbers::pi, 0.25) * std::exp(-s * s * q[j] * q[j]);
        }
    }
    Complex psi = 0.0;
    double env = 0.0;
    const auto &shifts = mixture.shifts();
    const auto &amps = mixture.amplitudes();
    for (std::size_t t = 0; t < amps.size(); t++) {
        double mod = p_mod;
        double phase = 0.0;
        for (std::size_t j = 0; j < m; j++) {
            if (quads[j] == Quadrature::x) {
                mod *= pointer_wavefunction(q[j] - shifts[t][j], mixture.sigma(j));
            } else {
                phase -= q[j] * shifts[t][j];
            }
        }
        psi += amps[t] * std::polar(mod, phase);
        env += std::abs(amps[t]) * mod * mod;
    }
    return {std::norm(psi), env};
}

void check_plan(const PointerMixture &mixture, const ReadoutPlan &plan) {
    if (plan.quadratures.size() != mixture.num_meters()) {
        throw std::invalid_argument("readout plan needs exactly one quadrature per meter");
    }
    if (plan.samples < 1) {
        throw std::invalid_argument("readout plan needs at least one sample");
    }
    if (plan.stream >= (1u << 16)) {
        throw std::invalid_argument("stream index must fit in 16 bits");
    }
}

SampleBatch empty_batch(const PointerMixture &mixture, const ReadoutPlan &plan) {
    SampleBatch batch;
    batch.plan = plan;
    for (std::size_t j = 0; j < mixture.num_meters(); j++) {
        batch.meters.push_back({mixture.sigma(j), mixture.strength(j)});
    }
    batch.postselection_probability = mixture.postselection_probability();
    return batch;
}

}  // namespace

bool SampleBatch::operator==(const SampleBatch &other) const {
    if (plan.quadratures != other.plan.quadratures || plan.samples != other.plan.samples ||
        plan.seed != other.plan.seed || plan.stream != other.plan.stream || meters.size() != other.meters.size()) {
        return false;
    }
    for (std::size_t j = 0; j < meters.size(); j++) {
        if (meters[j].sigma != other.meters[j].sigma || meters[j].strength != other.meters[j].strength) {
            return false;
        }
    }
    return readings == other.readings && postselection_probability == other.postselection_probability &&
           proposals == other.proposals;
}

double readout_density(const PointerMixture &mixture, std::span<const Quadrature> quadratures,
                       std::span<const double> point) {
    if (quadratures.size() != mixture.num_meters() || point.size() != mixture.num_meters()) {
        throw std::invalid_argument("need one quadrature and one coordinate per meter");
    }
    return density_and_envelope(mixture, quadratures, point).first / mixture.postselection_probability();
}

SampleBatch sample_readings_range(const PointerMixture &mixture, const ReadoutPlan &plan, std::uint64_t first,
                                  std::uint64_t count) {
    check_plan(mixture, plan);
    const std::size_t m = mixture.num_meters();
    SampleBatch batch = empty_batch(mixture, plan);
    batch.readings.reserve(count * m);

    Philox4x32 rng(plan.seed);
    Envelope env = make_envelope(mixture);
    const auto &shifts = mixture.shifts();
    std::vector<double> q(m);

    for (std::uint64_t k = first; k < first + count; k++) {
        bool accepted = false;
        for (std::uint64_t attempt = 0; attempt < kMaxAttempts; attempt++) {
            batch.proposals++;
            AttemptUniforms u(rng, k, static_cast<std::uint32_t>(attempt), plan.stream);
            double pick = u.next() * env.total;
            auto term = static_cast<std::size_t>(
                std::upper_bound(env.cumulative.begin(), env.cumulative.end(), pick) - env.cumulative.begin());
            term = std::min(term, env.cumulative.size() - 1);
            for (std::size_t j = 0; j < m; j += 2) {
                double r = std::sqrt(-2.0 * std::log(1.0 - u.next()));
                double angle = 2 * std::numbers::pi * u.next();
                double z[2] = {r * std::cos(angle), r * std::sin(angle)};
                for (std::size_t d = 0; d < 2 && j + d < m; d++) {
                    std::size_t jj = j + d;
                    double s = mixture.sigma(jj);
                    q[jj] = plan.quadratures[jj] == Quadrature::x ? shifts[term][jj] + s * z[d] : z[d] / (2 * s);
                }
            }
            auto [density, envelope] = density_and_envelope(mixture, plan.quadratures, q);
            if (u.next() * env.total * envelope <= density) {
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            throw std::runtime_error("rejection sampler exceeded its attempt budget");
        }
        batch.readings.insert(batch.readings.end(), q.begin(), q.end());
    }
    return batch;
}

SampleBatch sample_readings(const PointerMixture &mixture, const ReadoutPlan &plan) {
    return sample_readings_range(mixture, plan, 0, plan.samples);
}

SampleBatch sample_readings_parallel(const PointerMixture &mixture, const ReadoutPlan &plan, std::size_t parts) {
    check_plan(mixture, plan);
    parts = std::max<std::size_t>(1, std::min<std::uint64_t>(parts, plan.samples));
    std::vector<SampleBatch> pieces(parts);
    std::vector<std::thread> workers;
    std::exception_ptr failure;
    std::mutex failure_mutex;
    for (std::size_t p = 0; p < parts; p++) {
        std::uint64_t begin = plan.samples * p / parts;
        std::uint64_t end = plan.samples * (p + 1) / parts;
        workers.emplace_back([&, p, begin, end] {
            try {
                pieces[p] = sample_readings_range(mixture, plan, begin, end - begin);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                failure = std::current_exception();
            }
        });
    }
    for (auto &w : workers) {
        w.join();
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
    SampleBatch out = empty_batch(mixture, plan);
    for (auto &piece : pieces) {
        out.readings.insert(out.readings.end(), piece.readings.begin(), piece.readings.end());
        out.proposals += piece.proposals;
    }
    return out;
}

MeanEstimate jackknife_mean(std::span<const double> values, std::size_t blocks) {
    MeanEstimate est;
    est.samples = values.size();
    if (values.empty()) {
        est.value = std::numeric_limits<double>::quiet_NaN();
        est.std_error = std::numeric_limits<double>::infinity();
        est.degenerate = true;
        return est;
    }
    double total = 0.0;
    for (double v : values) {
        total += v;
    }
    const double n = static_cast<double>(values.size());
    est.value = total / n;
    std::size_t nb = std::min(blocks, values.size());
    if (nb < 2) {
        est.std_error = std::numeric_limits<double>::infinity();
        est.degenerate = true;
        return est;
    }
    std::vector<double> leave_out(nb);
    for (std::size_t b = 0; b < nb; b++) {
        std::size_t lo = values.size() * b / nb;
        std::size_t hi = values.size() * (b + 1) / nb;
        double block_sum = 0.0;
        for (std::size_t i = lo; i < hi; i++) {
            block_sum += values[i];
        }
        leave_out[b] = (total - block_sum) / (n - static_cast<double>(hi - lo));
    }
    double mean = 0.0;
    for (double v : leave_out) {
        mean += v;
    }
    mean /= static_cast<double>(nb);
    double ss = 0.0;
    for (double v : leave_out) {
        ss += (v - mean) * (v - mean);
    }
    est.std_error = std::sqrt(ss * static_cast<double>(nb - 1) / static_cast<double>(nb));
    return est;
}

double ComplexEstimate::std_error_abs() const {
    return std::hypot(std_error_real, std_error_imag);
}

const MeanEstimate &SampleEstimates::moment(const std::string &name) const {
    for (const auto &m : moments) {
        if (m.name == name) {
            return m.estimate;
        }
    }
    throw std::invalid_argument("no estimate for moment " + name);
}

namespace {

std::string single_name(std::size_t meter, Quadrature q) {
    return std::string(1, quadrature_name(q)) + std::to_string(meter);
}

std::string pair_name(std::size_t i, Quadrature qi, std::size_t j, Quadrature qj) {
    if (i > j) {
        std::swap(i, j);
        std::swap(qi, qj);
    }
    return single_name(i, qi) + single_name(j, qj);
}

// Pools independent estimates of the same mean, weighting by sample count.
MeanEstimate pool(const std::vector<MeanEstimate> &parts) {
    MeanEstimate out;
    double total_n = 0.0;
    for (const auto &p : parts) {
        total_n += static_cast<double>(p.samples);
    }
    double var = 0.0;
    for (const auto &p : parts) {
        double w = static_cast<double>(p.samples) / total_n;
        out.value += w * p.value;
        var += w * w * p.std_error * p.std_error;
        out.samples += p.samples;
        out.degenerate = out.degenerate || p.degenerate;
    }
    out.std_error = out.degenerate ? std::numeric_limits<double>::infinity() : std::sqrt(var);
    return out;
}

}  // namespace

SampleEstimates estimate_from_samples(std::span<const SampleBatch> batches) {
    if (batches.empty()) {
        throw std::invalid_argument("no sample batches");
    }
    const std::size_t m = batches.front().num_meters();
    for (const auto &b : batches) {
        if (b.num_meters() != m) {
            throw std::invalid_argument("sample batches come from different experiments");
        }
        for (std::size_t j = 0; j < m; j++) {
            if (b.meters[j].sigma != batches.front().meters[j].sigma ||
                b.meters[j].strength != batches.front().meters[j].strength) {
                throw std::invalid_argument("sample batches come from different experiments");
            }
        }
    }

    std::map<std::string, std::vector<MeanEstimate>> parts;
    std::vector<double> column;
    for (const auto &b : batches) {
        const auto n = b.num_samples();
        const auto &quads = b.plan.quadratures;
        for (std::size_t i = 0; i < m; i++) {
            column.assign(n, 0.0);
            for (std::uint64_t k = 0; k < n; k++) {
                column[k] = b.reading(k, i);
            }
            parts[single_name(i, quads[i])].push_back(jackknife_mean(column));
            for (std::size_t j = i + 1; j < m; j++) {
                for (std::uint64_t k = 0; k < n; k++) {
                    column[k] = b.reading(k, i) * b.reading(k, j);
                }
                parts[pair_name(i, quads[i], j, quads[j])].push_back(jackknife_mean(column));
            }
        }
    }

    SampleEstimates out;
    for (const auto &[name, list] : parts) {
        out.moments.push_back({name, pool(list)});
    }
    out.single.resize(m);
    for (std::size_t i = 0; i < m; i++) {
        const auto &scale = batches.front().meters[i];
        if (scale.strength == 0.0 || !parts.count(single_name(i, Quadrature::x)) ||
            !parts.count(single_name(i, Quadrature::p))) {
            continue;
        }
        const auto &x = out.moment(single_name(i, Quadrature::x));
        const auto &p = out.moment(single_name(i, Quadrature::p));
        double s2 = scale.sigma * scale.sigma;
        ComplexEstimate e;
        e.value = Complex(x.value, 2 * s2 * p.value) / scale.strength;
        e.std_error_real = x.std_error / scale.strength;
        e.std_error_imag = 2 * s2 * p.std_error / scale.strength;
        e.degenerate = x.degenerate || p.degenerate;
        out.single[i] = e;
    }
    return out;
}

SampleEstimates estimate_from_samples(std::span<const SampleBatch> batches, std::size_t i, std::size_t j) {
    SampleEstimates out = estimate_from_samples(batches);
    const std::size_t m = batches.front().num_meters();
    if (i == j || i >= m || j >= m) {
        throw std::invalid_argument("sequential estimate needs two distinct existing meters");
    }
    auto need = [&](Quadrature qi, Quadrature qj) -> const MeanEstimate & {
        std::string name = pair_name(i, qi, j, qj);
        for (const auto &mom : out.moments) {
            if (mom.name == name) {
                return mom.estimate;
            }
        }
        throw std::invalid_argument(std::string("missing quadrature combination ") + quadrature_name(qi) +
                                    quadrature_name(qj) + " for meters " + std::to_string(i) + "," +
                                    std::to_string(j));
    };
    const auto &xx = need(Quadrature::x, Quadrature::x);
    const auto &pp = need(Quadrature::p, Quadrature::p);
    const auto &xp = need(Quadrature::x, Quadrature::p);
    const auto &px = need(Quadrature::p, Quadrature::x);

    const auto &si = batches.front().meters[i];
    const auto &sj = batches.front().meters[j];
    if (si.strength == 0.0 || sj.strength == 0.0) {
        throw std::invalid_argument("sequential estimate needs both meters with g > 0");
    }
    double si2 = si.sigma * si.sigma;
    double sj2 = sj.sigma * sj.sigma;
    double gg = si.strength * sj.strength;
    ComplexEstimate e;
    e.value = Complex(xx.value - 4 * si2 * sj2 * pp.value, 2 * sj2 * xp.value + 2 * si2 * px.value) / gg;
    e.std_error_real = std::hypot(xx.std_error, 4 * si2 * sj2 * pp.std_error) / gg;
    e.std_error_imag = std::hypot(2 * sj2 * xp.std_error, 2 * si2 * px.std_error) / gg;
    e.degenerate = xx.degenerate || pp.degenerate || xp.degenerate || px.degenerate;
    out.sequential = e;
    return out;
}

std::vector<ReadoutPlan> sequential_plans(std::size_t num_meters, std::size_t i, std::size_t j,
                                          std::uint64_t samples, std::uint64_t seed) {
    if (i == j || i >= num_meters || j >= num_meters) {
        throw std::invalid_argument("sequential plans need two distinct existing meters");
    }
    const Quadrature combos[4][2] = {
        {Quadrature::x, Quadrature::x},
        {Quadrature::p, Quadrature::p},
        {Quadrature::x, Quadrature::p},
        {Quadrature::p, Quadrature::x},
    };
    std::vector<ReadoutPlan> plans;
    for (std::uint32_t c = 0; c < 4; c++) {
        ReadoutPlan plan;
        plan.quadratures.assign(num_meters, Quadrature::x);
        plan.quadratures[i] = combos[c][0];
        plan.quadratures[j] = combos[c][1];
        plan.samples = samples;
        plan.seed = seed;
        plan.stream = c;
        plans.push_back(plan);
    }
    return plans;
}

double sequential_relative_error(const PointerMixture &mixture, const ComplexEstimate &estimate, std::size_t i,
                                 std::size_t j) {
    return estimate.std_error_abs() / std::abs(estimate_sequential_weak_value(mixture, i, j));
}

SampleCostModel calibrate_sample_cost(const PointerMixture &mixture, std::size_t i, std::size_t j,
                                      std::uint64_t samples, std::uint64_t seed) {
    std::vector<SampleBatch> batches;
    for (const auto &plan : sequential_plans(mixture.num_meters(), i, j, samples, seed)) {
        batches.push_back(sample_readings(mixture, plan));
    }
    auto est = estimate_from_samples(batches, i, j);
    double rel = sequential_relative_error(mixture, *est.sequential, i, j);
    double gi = mixture.strength(i);
    double gj = mixture.strength(j);
    double si = mixture.sigma(i);
    double sj = mixture.sigma(j);
    return SampleCostModel{static_cast<double>(samples) * rel * rel * gi * gi * gj * gj / (si * si * sj * sj)};
}

std::uint64_t required_samples(const SampleCostModel &model, double g1, double g2, double sigma1, double sigma2,
                               double target_rel_err) {
    if (!(g1 > 0) || !(g2 > 0)) {
        throw std::invalid_argument("required_samples needs positive strengths");
    }
    if (!(target_rel_err > 0)) {
        throw std::invalid_argument("target relative error must be positive");
    }
    double n = model.constant * sigma1 * sigma1 * sigma2 * sigma2 / (g1 * g1 * g2 * g2 * target_rel_err * target_rel_err);
    if (!(n < 1e18)) {
        return std::numeric_limits<std::uint64_t>::max();
    }
    return std::max<std::uint64_t>(kMinimumBatchSize, static_cast<std::uint64_t>(std::ceil(n)));
}

std::uint64_t required_samples(const SampleCostModel &model, double g1, double g2, double sigma,
                               double target_rel_err) {
    return required_samples(model, g1, g2, sigma, sigma, target_rel_err);
}

}  // namespace weakpath
