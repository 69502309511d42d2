#ifndef WEAKPATH_ORACLE_H
#define WEAKPATH_ORACLE_H

#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "weakpath/meter.h"

namespace weakpath {

/// Brute-force check of the meter algebra: every pointer is a sampled
/// wavefunction on x_n = -L + n·h, n = 0..M-1, h = 2L/(M-1), and the whole
/// system ⊗ pointers state is evolved as a dense array.

class GridTooSmall : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

struct GridSpec {
    double half_width = 10.0;
    std::size_t points = 1025;

    double spacing() const {
        return 2 * half_width / static_cast<double>(points - 1);
    }
    double coordinate(std::size_t n) const {
        return -half_width + static_cast<double>(n) * spacing();
    }

    /// L = 10σ + 2g (largest σ and g over the meters), M = 1025.
    static GridSpec defaults(const Experiment &experiment);
};

/// Throws GridTooSmall if the initial pointers are not normalized to 1e-10
/// on the grid or L < 6σ + 2·max(g); std::invalid_argument for even or tiny M.
void check_grid(const Experiment &experiment, const GridSpec &spec);

/// Dense state over (arm × grid_1 × … × grid_m), row-major with the arm
/// index slowest and meter 0 next.
class GridState {
   public:
    std::size_t slice() const {
        return slice_;
    }
    const GridSpec &spec() const {
        return spec_;
    }
    std::size_t num_meters() const {
        return num_meters_;
    }
    std::size_t num_arms() const {
        return num_arms_;
    }
    std::size_t cells_per_arm() const {
        return cells_;
    }
    const std::vector<Complex> &data() const {
        return data_;
    }
    /// Trapezoidal norm of the whole state.
    double norm_squared() const;
    double arm_norm_squared(std::size_t arm) const;
    /// arm_probabilities()[slice][arm], recorded while evolving.
    const std::vector<std::vector<double>> &arm_probabilities() const {
        return arm_probabilities_;
    }

    friend GridState grid_run(const Experiment &experiment, const GridSpec &spec);

   private:
    std::size_t slice_ = 0;
    GridSpec spec_;
    std::size_t num_meters_ = 0;
    std::size_t num_arms_ = 0;
    std::size_t cells_ = 1;
    std::vector<Complex> data_;
    std::vector<std::vector<double>> arm_probabilities_;
};

/// Evolves to the final slice, applying stage matrices on the arm index and
/// each coupling exp(-i g Π p̂) on its pointer axis: an exact index shift
/// when g is a whole number of grid spacings, otherwise a momentum-space
/// phase via FFT.
GridState grid_run(const Experiment &experiment, const GridSpec &spec);

struct GridMoments {
    double postselection_probability = 0.0;
    std::vector<double> mean_x;
    std::vector<double> mean_p;
    /// xx[i][j] = ⟨x_i x_j⟩ (diagonal ⟨x_i²⟩), likewise pp.
    std::vector<std::vector<double>> xx;
    std::vector<std::vector<double>> pp;
    /// xp[i][j] = ⟨x_i p_j⟩ for i ≠ j; diagonal unused (zero).
    std::vector<std::vector<double>> xp;
};

/// Trapezoidal pointer moments of the port-projected state, with p̂ applied
/// as a spectral derivative.
GridMoments grid_moments(const Experiment &experiment, const GridState &state, std::string_view port);

/// Named scalar results of one experiment, from either engine.
struct QuantityReport {
    std::string experiment;
    std::vector<std::pair<std::string, double>> quantities;
    /// Set when the engine could not produce results (e.g. grid too small).
    std::string failure;
};

std::string describe_experiment(const Experiment &experiment, std::string_view port);

/// Postselection probability, all pointer first and second moments, and the
/// probability of every arm at every slice.
QuantityReport analytic_report(const Experiment &experiment, std::string_view port);
QuantityReport grid_report(const Experiment &experiment, std::string_view port, const GridSpec &spec);

struct Tolerances {
    double absolute = 1e-7;
    std::map<std::string, double> overrides;

    double for_quantity(const std::string &name) const;
};

struct ComparisonRow {
    std::string name;
    double analytic = 0.0;
    double grid = 0.0;
    double abs_dev = 0.0;
    double tol = 0.0;
    bool pass = false;
    std::string note;
};

struct ComparisonTable {
    std::string experiment;
    std::vector<ComparisonRow> rows;

    bool all_pass() const;
    double max_deviation() const;
};

/// Row per quantity; a failed engine run becomes a single failing row.
/// Throws std::invalid_argument when the reports describe different experiments.
ComparisonTable compare(const QuantityReport &analytic, const QuantityReport &grid, const Tolerances &tolerances);

}  // namespace weakpath

#endif
