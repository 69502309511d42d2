#ifndef WEAKPATH_SAMPLING_H
#define WEAKPATH_SAMPLING_H

#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "weakpath/meter.h"

namespace weakpath {

/// Which quadrature each meter is read out in, how many post-selected
/// readings to draw, and the random stream to draw them from.
struct ReadoutPlan {
    std::vector<Quadrature> quadratures;
    std::uint64_t samples = 1;
    std::uint64_t seed = 0;
    std::uint32_t stream = 0;
};

struct MeterScale {
    double sigma = 1.0;
    double strength = 0.0;
};

/// Post-selected readings, row-major with one row per accepted sample.
struct SampleBatch {
    ReadoutPlan plan;
    std::vector<MeterScale> meters;
    std::vector<double> readings;
    /// Physical probability that a run passes the postselection.
    double postselection_probability = 0.0;
    /// Proposals drawn by the rejection sampler, including rejected ones.
    std::uint64_t proposals = 0;

    std::size_t num_meters() const {
        return meters.size();
    }
    std::uint64_t num_samples() const {
        return readings.size() / (meters.empty() ? 1 : meters.size());
    }
    double reading(std::uint64_t sample, std::size_t meter) const {
        return readings[sample * meters.size() + meter];
    }
    double acceptance_rate() const {
        return proposals == 0 ? 0.0 : static_cast<double>(num_samples()) / static_cast<double>(proposals);
    }

    bool operator==(const SampleBatch &other) const;
};

/// Draws `plan.samples` readings from the exact joint density |Ψ(q)|² of the
/// chosen quadratures by rejection against the positive envelope
/// Σ_s |a_s| Π_j |f_j(q_j; s_j)|². Sample k only ever uses Philox counters
/// derived from (k, attempt, stream), so the result does not depend on how
/// the sample range is partitioned.
SampleBatch sample_readings(const PointerMixture &mixture, const ReadoutPlan &plan);

/// Draws samples [first, first + count) of the plan.
SampleBatch sample_readings_range(const PointerMixture &mixture, const ReadoutPlan &plan, std::uint64_t first,
                                  std::uint64_t count);

/// Splits the plan into `parts` contiguous ranges, draws them on separate
/// threads and concatenates the results.
SampleBatch sample_readings_parallel(const PointerMixture &mixture, const ReadoutPlan &plan, std::size_t parts);

/// Exact joint density of the plan's quadratures at `point` (normalized).
double readout_density(const PointerMixture &mixture, std::span<const Quadrature> quadratures,
                       std::span<const double> point);

inline constexpr std::size_t kJackknifeBlocks = 50;

/// Smallest sample count the cost model will ever recommend.
inline constexpr std::uint64_t kMinimumBatchSize = kJackknifeBlocks;

struct MeanEstimate {
    double value = 0.0;
    double std_error = 0.0;
    std::uint64_t samples = 0;
    /// Too few samples for an error bar; std_error is +inf.
    bool degenerate = false;
};

/// Block-jackknife estimate of the mean of `values`.
MeanEstimate jackknife_mean(std::span<const double> values, std::size_t blocks = kJackknifeBlocks);

struct MomentEstimate {
    std::string name;  // e.g. "x0", "p1", "x0p1"
    MeanEstimate estimate;
};

struct ComplexEstimate {
    std::complex<double> value;
    double std_error_real = 0.0;
    double std_error_imag = 0.0;
    bool degenerate = false;

    double std_error_abs() const;
};

struct SampleEstimates {
    std::vector<MomentEstimate> moments;
    /// (⟨x⟩ + 2iσ²⟨p⟩)/g for each meter with both quadratures available and g > 0.
    std::vector<std::optional<ComplexEstimate>> single;
    std::optional<ComplexEstimate> sequential;

    const MeanEstimate &moment(const std::string &name) const;
};

/// Plug-in moment estimates with jackknife errors from independent batches.
/// First moments and products of the same quadrature pair are pooled across
/// batches.
SampleEstimates estimate_from_samples(std::span<const SampleBatch> batches);

/// Same, and also assembles the sequential estimate for meters (i, j), which
/// needs the xx, pp, xp and px combinations. Throws std::invalid_argument if
/// one is missing.
SampleEstimates estimate_from_samples(std::span<const SampleBatch> batches, std::size_t i, std::size_t j);

/// Plans for the four quadrature combinations on meters (i, j), other meters
/// read in x. Streams are 0..3 in the order xx, pp, xp, px.
std::vector<ReadoutPlan> sequential_plans(std::size_t num_meters, std::size_t i, std::size_t j,
                                          std::uint64_t samples, std::uint64_t seed);

/// n ≈ constant · σ_i²σ_j² / (g_i² g_j² ε²) for relative error ε of the
/// sequential estimate.
struct SampleCostModel {
    double constant = 0.0;
};

/// Measures the cost constant from one run of `samples` per combination.
SampleCostModel calibrate_sample_cost(const PointerMixture &mixture, std::size_t i, std::size_t j,
                                      std::uint64_t samples, std::uint64_t seed);

/// Relative error |std error| / |exact sequential estimate| achieved by a run.
double sequential_relative_error(const PointerMixture &mixture, const ComplexEstimate &estimate, std::size_t i,
                                 std::size_t j);

std::uint64_t required_samples(const SampleCostModel &model, double g1, double g2, double sigma,
                               double target_rel_err);
std::uint64_t required_samples(const SampleCostModel &model, double g1, double g2, double sigma1, double sigma2,
                               double target_rel_err);

}  // namespace weakpath

#endif
