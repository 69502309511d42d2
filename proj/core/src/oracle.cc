#include "weakpath/oracle.h"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <sstream>

#include "weakpath/network_format.h"

namespace weakpath {

namespace {

constexpr std::size_t kMaxGridCells = std::size_t{1} << 26;

// One-dimensional complex DFT of length M on an owned, aligned buffer.
class LineFft {
   public:
    explicit LineFft(std::size_t n) : n_(n) {
        buffer_ = fftw_alloc_complex(n);
        forward_ = fftw_plan_dft_1d(static_cast<int>(n), buffer_, buffer_, FFTW_FORWARD, FFTW_ESTIMATE);
        backward_ = fftw_plan_dft_1d(static_cast<int>(n), buffer_, buffer_, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    ~LineFft() {
        fftw_destroy_plan(forward_);
        fftw_destroy_plan(backward_);
        fftw_free(buffer_);
    }
    LineFft(const LineFft &) = delete;
    LineFft &operator=(const LineFft &) = delete;

    Complex *buffer() {
        return reinterpret_cast<Complex *>(buffer_);
    }
    void forward() {
        fftw_execute(forward_);
    }
    /// Unnormalized inverse; caller divides by M.
    void backward() {
        fftw_execute(backward_);
    }
    std::size_t size() const {
        return n_;
    }

   private:
    std::size_t n_;
    fftw_complex *buffer_;
    fftw_plan forward_;
    fftw_plan backward_;
};

std::vector<double> wavenumbers(const GridSpec &spec) {
    const std::size_t m = spec.points;
    std::vector<double> k(m);
    const double scale = 2 * std::numbers::pi / (static_cast<double>(m) * spec.spacing());
    for (std::size_t n = 0; n < m; n++) {
        auto idx = static_cast<double>(n);
        k[n] = (n <= (m - 1) / 2 ? idx : idx - static_cast<double>(m)) * scale;
    }
    return k;
}

std::vector<double> trapezoid_weights(const GridSpec &spec) {
    std::vector<double> w(spec.points, spec.spacing());
    w.front() *= 0.5;
    w.back() *= 0.5;
    return w;
}

// Visits each 1-D line of an (M^m)-cell block along `axis`.
template <typename Fn>
void for_each_line(std::size_t points, std::size_t meters, std::size_t axis, Fn &&fn) {
    std::size_t stride = 1;
    for (std::size_t j = axis + 1; j < meters; j++) {
        stride *= points;
    }
    std::size_t outer = 1;
    for (std::size_t j = 0; j < axis; j++) {
        outer *= points;
    }
    for (std::size_t o = 0; o < outer; o++) {
        for (std::size_t r = 0; r < stride; r++) {
            fn(o * points * stride + r, stride);
        }
    }
}

// Multiplies the spectrum of every line along `axis` by factor[k].
void spectral_apply(Complex *block, const GridSpec &spec, std::size_t meters, std::size_t axis,
                    const std::vector<Complex> &factor, LineFft &fft) {
    const std::size_t m = spec.points;
    const double inv = 1.0 / static_cast<double>(m);
    for_each_line(m, meters, axis, [&](std::size_t base, std::size_t stride) {
        Complex *buf = fft.buffer();
        for (std::size_t n = 0; n < m; n++) {
            buf[n] = block[base + n * stride];
        }
        fft.forward();
        for (std::size_t n = 0; n < m; n++) {
            buf[n] *= factor[n];
        }
        fft.backward();
        for (std::size_t n = 0; n < m; n++) {
            block[base + n * stride] = buf[n] * inv;
        }
    });
}

void shift_apply(Complex *block, const GridSpec &spec, std::size_t meters, std::size_t axis, long shift) {
    const auto m = static_cast<long>(spec.points);
    std::vector<Complex> line(spec.points);
    for_each_line(spec.points, meters, axis, [&](std::size_t base, std::size_t stride) {
        for (long n = 0; n < m; n++) {
            long src = n - shift;
            line[static_cast<std::size_t>(n)] =
                (src >= 0 && src < m) ? block[base + static_cast<std::size_t>(src) * stride] : Complex(0.0);
        }
        for (long n = 0; n < m; n++) {
            block[base + static_cast<std::size_t>(n) * stride] = line[static_cast<std::size_t>(n)];
        }
    });
}

// Weighted sum Σ w(n) f(n, coords) over one block.
template <typename Fn>
double integrate(const GridSpec &spec, std::size_t meters, Fn &&fn) {
    const auto w = trapezoid_weights(spec);
    std::size_t cells = 1;
    for (std::size_t j = 0; j < meters; j++) {
        cells *= spec.points;
    }
    std::vector<std::size_t> idx(meters, 0);
    double total = 0.0;
    for (std::size_t c = 0; c < cells; c++) {
        double weight = 1.0;
        for (std::size_t j = 0; j < meters; j++) {
            weight *= w[idx[j]];
        }
        total += weight * fn(c, idx);
        for (std::size_t j = meters; j-- > 0;) {
            if (++idx[j] < spec.points) {
                break;
            }
            idx[j] = 0;
        }
    }
    return total;
}

std::uint64_t fnv1a(std::string_view text) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace

GridSpec GridSpec::defaults(const Experiment &experiment) {
    double sigma = 1.0;
    double g = 0.0;
    if (experiment.num_meters() > 0) {
        sigma = 0.0;
        for (const auto &m : experiment.meters()) {
            sigma = std::max(sigma, m.pointer.sigma);
            g = std::max(g, m.strength);
        }
    }
    return GridSpec{10 * sigma + 2 * g, 1025};
}

void check_grid(const Experiment &experiment, const GridSpec &spec) {
    if (spec.points < 3 || spec.points % 2 == 0) {
        throw std::invalid_argument("grid needs an odd number of points >= 3");
    }
    if (!(spec.half_width > 0)) {
        throw std::invalid_argument("grid half-width must be positive");
    }
    std::size_t cells = experiment.layout().slices.front().size();
    for (std::size_t j = 0; j < experiment.num_meters(); j++) {
        cells *= spec.points;
        if (cells > kMaxGridCells) {
            throw std::invalid_argument("grid too large: " + std::to_string(experiment.num_meters()) + " meters at " +
                                        std::to_string(spec.points) + " points");
        }
    }
    const auto w = trapezoid_weights(spec);
    double g_max = 0.0;
    for (const auto &m : experiment.meters()) {
        double norm = 0.0;
        for (std::size_t n = 0; n < spec.points; n++) {
            double f = pointer_wavefunction(spec.coordinate(n), m.pointer.sigma);
            norm += w[n] * f * f;
        }
        if (!(std::abs(norm - 1.0) <= 1e-10)) {
            std::ostringstream msg;
            msg << "grid too small: initial pointer norm " << norm << " (sigma=" << m.pointer.sigma
                << ", L=" << spec.half_width << ", M=" << spec.points << ")";
            throw GridTooSmall(msg.str());
        }
        g_max = std::max(g_max, m.strength);
    }
    for (const auto &m : experiment.meters()) {
        if (spec.half_width < 6 * m.pointer.sigma + 2 * g_max) {
            std::ostringstream msg;
            msg << "grid too small: L=" << spec.half_width << " < 6 sigma + 2 g_max = " << 6 * m.pointer.sigma + 2 * g_max;
            throw GridTooSmall(msg.str());
        }
    }
}

double GridState::arm_norm_squared(std::size_t arm) const {
    const Complex *block = data_.data() + arm * cells_;
    return integrate(spec_, num_meters_, [&](std::size_t c, const std::vector<std::size_t> &) {
        return std::norm(block[c]);
    });
}

double GridState::norm_squared() const {
    double total = 0.0;
    for (std::size_t a = 0; a < num_arms_; a++) {
        total += arm_norm_squared(a);
    }
    return total;
}

GridState grid_run(const Experiment &experiment, const GridSpec &spec) {
    check_grid(experiment, spec);
    const auto &layout = experiment.layout();
    const std::size_t meters = experiment.num_meters();

    GridState state;
    state.spec_ = spec;
    state.num_meters_ = meters;
    state.num_arms_ = layout.slices.front().size();
    for (std::size_t j = 0; j < meters; j++) {
        state.cells_ *= spec.points;
    }
    state.data_.assign(state.num_arms_ * state.cells_, Complex(0.0));

    {
        std::size_t src = layout.require_arm_index(0, layout.source);
        Complex *block = state.data_.data() + src * state.cells_;
        std::vector<std::size_t> idx(meters, 0);
        for (std::size_t c = 0; c < state.cells_; c++) {
            double v = 1.0;
            for (std::size_t j = 0; j < meters; j++) {
                v *= pointer_wavefunction(spec.coordinate(idx[j]), experiment.meter(j).pointer.sigma);
            }
            block[c] = v;
            for (std::size_t j = meters; j-- > 0;) {
                if (++idx[j] < spec.points) {
                    break;
                }
                idx[j] = 0;
            }
        }
    }

    LineFft fft(spec.points);
    const auto k = wavenumbers(spec);
    const double h = spec.spacing();

    for (std::size_t t = 0;; t++) {
        for (std::size_t j = 0; j < meters; j++) {
            const auto &m = experiment.meter(j);
            if (m.slice != t || m.strength == 0.0) {
                continue;
            }
            Complex *block = state.data_.data() + layout.require_arm_index(t, m.arm) * state.cells_;
            double steps = m.strength / h;
            double nearest = std::round(steps);
            if (std::abs(steps - nearest) <= 1e-9 * std::max(1.0, steps)) {
                shift_apply(block, spec, meters, j, static_cast<long>(nearest));
            } else {
                std::vector<Complex> phase(spec.points);
                for (std::size_t n = 0; n < spec.points; n++) {
                    phase[n] = std::polar(1.0, -k[n] * m.strength);
                }
                spectral_apply(block, spec, meters, j, phase, fft);
            }
        }

        std::vector<double> probs(state.num_arms_);
        double total = 0.0;
        for (std::size_t a = 0; a < state.num_arms_; a++) {
            probs[a] = state.arm_norm_squared(a);
            total += probs[a];
        }
        if (!(std::abs(total - 1.0) <= 1e-8)) {
            throw GridTooSmall("grid state norm drifted to " + std::to_string(total) + " at slice " +
                               std::to_string(t));
        }
        state.arm_probabilities_.push_back(std::move(probs));
        state.slice_ = t;

        if (t == layout.final_slice()) {
            break;
        }
        ComplexMatrix u = stage_unitary(layout, t);
        std::vector<Complex> next(static_cast<std::size_t>(u.rows()) * state.cells_, Complex(0.0));
        for (Eigen::Index r = 0; r < u.rows(); r++) {
            Complex *out = next.data() + static_cast<std::size_t>(r) * state.cells_;
            for (Eigen::Index c = 0; c < u.cols(); c++) {
                Complex coeff = u(r, c);
                if (coeff == Complex(0.0)) {
                    continue;
                }
                const Complex *in = state.data_.data() + static_cast<std::size_t>(c) * state.cells_;
                for (std::size_t i = 0; i < state.cells_; i++) {
                    out[i] += coeff * in[i];
                }
            }
        }
        state.data_ = std::move(next);
        state.num_arms_ = static_cast<std::size_t>(u.rows());
    }
    return state;
}

GridMoments grid_moments(const Experiment &experiment, const GridState &state, std::string_view port) {
    const auto &layout = experiment.layout();
    if (state.slice() != layout.final_slice()) {
        throw std::invalid_argument("grid moments need the state at the final slice");
    }
    const auto &spec = state.spec();
    const std::size_t meters = state.num_meters();
    const std::size_t cells = state.cells_per_arm();
    std::size_t arm = layout.require_arm_index(layout.final_slice(), layout.detector(port).arm);
    std::vector<Complex> psi(state.data().begin() + static_cast<std::ptrdiff_t>(arm * cells),
                             state.data().begin() + static_cast<std::ptrdiff_t>((arm + 1) * cells));

    GridMoments out;
    out.postselection_probability =
        integrate(spec, meters, [&](std::size_t c, const std::vector<std::size_t> &) { return std::norm(psi[c]); });
    const double prob = out.postselection_probability;
    if (!(prob >= kMinPostselectionProbability)) {
        throw ZeroProbability("postselection on " + std::string(port) + " has zero probability on the grid");
    }

    LineFft fft(spec.points);
    const auto k = wavenumbers(spec);
    std::vector<Complex> kfactor(k.begin(), k.end());
    auto apply_p = [&](std::vector<Complex> v, std::size_t axis) {
        spectral_apply(v.data(), spec, meters, axis, kfactor, fft);
        return v;
    };
    std::vector<std::vector<Complex>> p_psi(meters);
    for (std::size_t j = 0; j < meters; j++) {
        p_psi[j] = apply_p(psi, j);
    }
    auto x_of = [&](const std::vector<std::size_t> &idx, std::size_t j) {
        return spec.coordinate(idx[j]);
    };

    out.mean_x.resize(meters);
    out.mean_p.resize(meters);
    out.xx.assign(meters, std::vector<double>(meters, 0.0));
    out.pp.assign(meters, std::vector<double>(meters, 0.0));
    out.xp.assign(meters, std::vector<double>(meters, 0.0));
    for (std::size_t i = 0; i < meters; i++) {
        out.mean_x[i] = integrate(spec, meters, [&](std::size_t c, const std::vector<std::size_t> &idx) {
                            return x_of(idx, i) * std::norm(psi[c]);
                        }) /
                        prob;
        out.mean_p[i] = integrate(spec, meters, [&](std::size_t c, const std::vector<std::size_t> &) {
                            return (std::conj(psi[c]) * p_psi[i][c]).real();
                        }) /
                        prob;
        for (std::size_t j = 0; j < meters; j++) {
            out.xx[i][j] = integrate(spec, meters, [&](std::size_t c, const std::vector<std::size_t> &idx) {
                               return x_of(idx, i) * x_of(idx, j) * std::norm(psi[c]);
                           }) /
                           prob;
            if (i == j) {
                out.pp[i][i] = integrate(spec, meters, [&](std::size_t c, const std::vector<std::size_t> &) {
                                   return std::norm(p_psi[i][c]);
                               }) /
                               prob;
                continue;
            }
            auto pp_psi = apply_p(p_psi[j], i);
            out.pp[i][j] = integrate(spec, meters, [&](std::size_t c, const std::vector<std::size_t> &) {
                               return (std::conj(psi[c]) * pp_psi[c]).real();
                           }) /
                           prob;
            out.xp[i][j] = integrate(spec, meters, [&](std::size_t c, const std::vector<std::size_t> &idx) {
                               return x_of(idx, i) * (std::conj(psi[c]) * p_psi[j][c]).real();
                           }) /
                           prob;
        }
    }
    return out;
}

std::string describe_experiment(const Experiment &experiment, std::string_view port) {
    std::ostringstream out;
    out.precision(17);
    out << "port=" << port << ";network=" << std::hex << fnv1a(serialize_network(experiment.layout())) << std::dec;
    for (const auto &m : experiment.meters()) {
        out << ";meter=" << m.arm << "@" << m.slice << ":g=" << m.strength << ",sigma=" << m.pointer.sigma;
    }
    return out.str();
}

namespace {

std::string mname(char q, std::size_t i) {
    return std::string(1, q) + std::to_string(i);
}

std::string arm_prob_name(const std::string &arm, std::size_t slice) {
    return "P[" + arm + "@" + std::to_string(slice) + "]";
}

}  // namespace

QuantityReport analytic_report(const Experiment &experiment, std::string_view port) {
    QuantityReport report;
    report.experiment = describe_experiment(experiment, port);
    try {
        PointerMixture mix = postselect(experiment, port);
        auto &q = report.quantities;
        q.emplace_back("P[" + std::string(port) + "]", mix.postselection_probability());
        const std::size_t m = experiment.num_meters();
        for (std::size_t i = 0; i < m; i++) {
            q.emplace_back(mname('x', i), pointer_mean(mix, i, Quadrature::x));
            q.emplace_back(mname('p', i), pointer_mean(mix, i, Quadrature::p));
            q.emplace_back(mname('x', i) + mname('x', i), pointer_corr(mix, {i, Quadrature::x}, {i, Quadrature::x}));
            q.emplace_back(mname('p', i) + mname('p', i), pointer_corr(mix, {i, Quadrature::p}, {i, Quadrature::p}));
        }
        for (std::size_t i = 0; i < m; i++) {
            for (std::size_t j = i + 1; j < m; j++) {
                q.emplace_back(mname('x', i) + mname('x', j), pointer_corr(mix, {i, Quadrature::x}, {j, Quadrature::x}));
                q.emplace_back(mname('p', i) + mname('p', j), pointer_corr(mix, {i, Quadrature::p}, {j, Quadrature::p}));
                q.emplace_back(mname('x', i) + mname('p', j), pointer_corr(mix, {i, Quadrature::x}, {j, Quadrature::p}));
                q.emplace_back(mname('p', i) + mname('x', j), pointer_corr(mix, {i, Quadrature::p}, {j, Quadrature::x}));
            }
        }
        const auto &layout = experiment.layout();
        for (std::size_t t = 0; t < layout.num_slices(); t++) {
            JointState joint = run_coupled_to(experiment, t);
            for (std::size_t a = 0; a < layout.slices[t].size(); a++) {
                q.emplace_back(arm_prob_name(layout.slices[t][a], t), joint.arm_norm_squared(a));
            }
        }
    } catch (const ZeroProbability &e) {
        report.failure = e.what();
    }
    return report;
}

QuantityReport grid_report(const Experiment &experiment, std::string_view port, const GridSpec &spec) {
    QuantityReport report;
    report.experiment = describe_experiment(experiment, port);
    try {
        GridState state = grid_run(experiment, spec);
        GridMoments mom = grid_moments(experiment, state, port);
        auto &q = report.quantities;
        q.emplace_back("P[" + std::string(port) + "]", mom.postselection_probability);
        const std::size_t m = experiment.num_meters();
        for (std::size_t i = 0; i < m; i++) {
            q.emplace_back(mname('x', i), mom.mean_x[i]);
            q.emplace_back(mname('p', i), mom.mean_p[i]);
            q.emplace_back(mname('x', i) + mname('x', i), mom.xx[i][i]);
            q.emplace_back(mname('p', i) + mname('p', i), mom.pp[i][i]);
        }
        for (std::size_t i = 0; i < m; i++) {
            for (std::size_t j = i + 1; j < m; j++) {
                q.emplace_back(mname('x', i) + mname('x', j), mom.xx[i][j]);
                q.emplace_back(mname('p', i) + mname('p', j), mom.pp[i][j]);
                q.emplace_back(mname('x', i) + mname('p', j), mom.xp[i][j]);
                q.emplace_back(mname('p', i) + mname('x', j), mom.xp[j][i]);
            }
        }
        const auto &layout = experiment.layout();
        for (std::size_t t = 0; t < layout.num_slices(); t++) {
            for (std::size_t a = 0; a < layout.slices[t].size(); a++) {
                q.emplace_back(arm_prob_name(layout.slices[t][a], t), state.arm_probabilities()[t][a]);
            }
        }
    } catch (const GridTooSmall &e) {
        report.failure = e.what();
    } catch (const ZeroProbability &e) {
        report.failure = e.what();
    }
    return report;
}

double Tolerances::for_quantity(const std::string &name) const {
    auto it = overrides.find(name);
    return it == overrides.end() ? absolute : it->second;
}

bool ComparisonTable::all_pass() const {
    return std::all_of(rows.begin(), rows.end(), [](const ComparisonRow &r) { return r.pass; });
}

double ComparisonTable::max_deviation() const {
    double worst = 0.0;
    for (const auto &r : rows) {
        worst = std::max(worst, std::isnan(r.abs_dev) ? std::numeric_limits<double>::infinity() : r.abs_dev);
    }
    return worst;
}

ComparisonTable compare(const QuantityReport &analytic, const QuantityReport &grid, const Tolerances &tolerances) {
    if (analytic.experiment != grid.experiment) {
        throw std::invalid_argument("reports describe different experiments:\n  " + analytic.experiment + "\n  " +
                                    grid.experiment);
    }
    ComparisonTable table;
    table.experiment = analytic.experiment;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    if (!analytic.failure.empty() || !grid.failure.empty()) {
        if (!analytic.failure.empty()) {
            table.rows.push_back({"analytic_run", nan, nan, nan, 0.0, false, analytic.failure});
        }
        if (!grid.failure.empty()) {
            bool norm = grid.failure.find("grid too small") != std::string::npos ||
                        grid.failure.find("norm") != std::string::npos;
            table.rows.push_back({norm ? "grid_norm_check" : "grid_run", nan, nan, nan, 0.0, false, grid.failure});
        }
        return table;
    }
    for (const auto &[name, value] : analytic.quantities) {
        ComparisonRow row;
        row.name = name;
        row.analytic = value;
        row.tol = tolerances.for_quantity(name);
        auto it = std::find_if(grid.quantities.begin(), grid.quantities.end(),
                               [&](const auto &entry) { return entry.first == name; });
        if (it == grid.quantities.end()) {
            row.grid = nan;
            row.abs_dev = nan;
            row.note = "missing from grid report";
        } else {
            row.grid = it->second;
            row.abs_dev = std::abs(row.analytic - row.grid);
            row.pass = row.abs_dev <= row.tol;
        }
        table.rows.push_back(row);
    }
    return table;
}

}  // namespace weakpath
