#include "dispersim/metric_graph.hpp"

#include <lapacke.h>

#if defined(__SSE__)
#include <xmmintrin.h>
#endif

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>

#include "dispersim/errors.hpp"
#include "dispersim/tridiagonal.hpp"

namespace dispersim {

namespace {

constexpr cdouble kI{0.0, 1.0};
constexpr double kSupportThreshold = 1e-12;
constexpr double kBoundaryZone = 0.05;

std::size_t multiple_of(double length, double h, const char* who) {
    if (!(h > 0.0) || !(length > 0.0) || !std::isfinite(length) || !std::isfinite(h)) {
        throw std::invalid_argument(std::string(who) + ": length and h must be positive and finite");
    }
    const double ratio = length / h;
    const double n = std::round(ratio);
    if (std::abs(ratio - n) > 1e-9 * ratio || n < 2.0) {
        throw std::invalid_argument(std::string(who) + ": length must be a multiple (>= 2) of h");
    }
    return static_cast<std::size_t>(n);
}

// One Cayley step (W + iτK) u⁺ = (W − iτK) u for a symmetric K and diagonal W.
class Stepper {
public:
    virtual ~Stepper() = default;
    virtual void set_step(double dt) = 0;
    virtual void step(std::vector<cdouble>& u) = 0;
    /// Σ w_k |u_k|².
    virtual double mass(const std::vector<cdouble>& u) const = 0;
    /// Same sum restricted to the nodes next to the truncation walls.
    virtual double boundary_mass(const std::vector<cdouble>& u) const = 0;
};

// Tridiagonal K on a line with uniform weight h.
class LineStepper final : public Stepper {
public:
    LineStepper(std::vector<double> diag, std::vector<double> off, double h)
        : diag_(std::move(diag)), off_(std::move(off)), h_(h), scratch_(diag_.size()) {}

    void set_step(double dt) override {
        if (dt == dt_ && factor_) return;
        dt_ = dt;
        tau_ = 0.5 * dt;
        const std::size_t n = diag_.size();
        std::vector<cdouble> d(n), o(n - 1);
        for (std::size_t k = 0; k < n; ++k) d[k] = h_ + kI * tau_ * diag_[k];
        for (std::size_t k = 0; k + 1 < n; ++k) o[k] = kI * tau_ * off_[k];
        factor_.emplace(o, d, o);
    }

    void step(std::vector<cdouble>& u) override {
        const std::size_t n = u.size();
        for (std::size_t k = 0; k < n; ++k) {
            cdouble ku = diag_[k] * u[k];
            if (k > 0) ku += off_[k - 1] * u[k - 1];
            if (k + 1 < n) ku += off_[k] * u[k + 1];
            scratch_[k] = h_ * u[k] - kI * tau_ * ku;
        }
        factor_->solve(scratch_);
        u.swap(scratch_);
    }

    double mass(const std::vector<cdouble>& u) const override {
        double s = 0.0;
        for (const auto& v : u) s += std::norm(v);
        return h_ * s;
    }

    double boundary_mass(const std::vector<cdouble>& u) const override {
        const std::size_t n = u.size();
        const auto zone = static_cast<std::size_t>(std::ceil(kBoundaryZone * static_cast<double>(n)));
        double s = 0.0;
        for (std::size_t k = 0; k < zone; ++k) s += std::norm(u[k]) + std::norm(u[n - 1 - k]);
        return h_ * s;
    }

private:
    std::vector<double> diag_;
    std::vector<double> off_;
    double h_;
    double dt_ = -1.0;
    double tau_ = 0.0;
    std::optional<TridiagonalFactor> factor_;
    std::vector<cdouble> scratch_;
};

// Kirchhoff / δ star: u[0] is the vertex, then each edge's nodes 1..n-1.
class StarVertexStepper final : public Stepper {
public:
    StarVertexStepper(std::size_t edges, std::size_t samples, double h, double alpha)
        : edges_(edges), interior_(samples - 1), h_(h), alpha_(alpha), scratch_(1 + edges * (samples - 1)) {}

    void set_step(double dt) override {
        if (dt == dt_ && factor_) return;
        dt_ = dt;
        tau_ = 0.5 * dt;
        const std::size_t m = interior_;
        std::vector<cdouble> d(m, h_ + kI * tau_ * (2.0 / h_));
        std::vector<cdouble> o(m - 1, kI * tau_ * (-1.0 / h_));
        factor_.emplace(o, d, o);
        coupling_ = kI * tau_ * (-1.0 / h_);
        const auto n = static_cast<double>(edges_);
        vertex_diag_ = 0.5 * n * h_ + kI * tau_ * (n / h_ + alpha_);
        q_.assign(m, cdouble{});
        q_[0] = coupling_;
        factor_->solve(q_);
    }

    void step(std::vector<cdouble>& u) override {
        const std::size_t m = interior_;
        const auto n = static_cast<double>(edges_);
        const cdouble v = u[0];
        cdouble kv = (n / h_ + alpha_) * v;
        for (std::size_t e = 0; e < edges_; ++e) kv += (-1.0 / h_) * u[1 + e * m];
        scratch_[0] = 0.5 * n * h_ * v - kI * tau_ * kv;
        for (std::size_t e = 0; e < edges_; ++e) {
            const std::size_t base = 1 + e * m;
            for (std::size_t k = 0; k < m; ++k) {
                const cdouble left = k == 0 ? v : u[base + k - 1];
                const cdouble right = k + 1 < m ? u[base + k + 1] : cdouble{};
                const cdouble ku = (2.0 * u[base + k] - left - right) / h_;
                scratch_[base + k] = h_ * u[base + k] - kI * tau_ * ku;
            }
        }
        cdouble first_sum{};
        for (std::size_t e = 0; e < edges_; ++e) {
            std::span<cdouble> block(scratch_.data() + 1 + e * m, m);
            factor_->solve(block);
            first_sum += block[0];
        }
        const cdouble xv = (scratch_[0] - coupling_ * first_sum) / (vertex_diag_ - n * coupling_ * q_[0]);
        scratch_[0] = xv;
        for (std::size_t e = 0; e < edges_; ++e) {
            for (std::size_t k = 0; k < m; ++k) scratch_[1 + e * m + k] -= xv * q_[k];
        }
        u.swap(scratch_);
    }

    double mass(const std::vector<cdouble>& u) const override {
        double s = 0.0;
        for (std::size_t k = 1; k < u.size(); ++k) s += std::norm(u[k]);
        return h_ * s + 0.5 * static_cast<double>(edges_) * h_ * std::norm(u[0]);
    }

    double boundary_mass(const std::vector<cdouble>& u) const override {
        const std::size_t m = interior_;
        const auto zone = static_cast<std::size_t>(std::ceil(kBoundaryZone * static_cast<double>(m + 1)));
        double s = 0.0;
        for (std::size_t e = 0; e < edges_; ++e) {
            for (std::size_t k = m - std::min(zone, m); k < m; ++k) s += std::norm(u[1 + e * m + k]);
        }
        return h_ * s;
    }

private:
    std::size_t edges_;
    std::size_t interior_;
    double h_;
    double alpha_;
    double dt_ = -1.0;
    double tau_ = 0.0;
    std::optional<TridiagonalFactor> factor_;
    cdouble coupling_;
    cdouble vertex_diag_;
    std::vector<cdouble> q_;
    std::vector<cdouble> scratch_;
};

// δ′ star: each edge keeps nodes 0..n-1; endpoints coupled by (1/β) s sᵀ.
class StarDeltaPrimeStepper final : public Stepper {
public:
    StarDeltaPrimeStepper(std::size_t edges, std::size_t samples, double h, double beta)
        : edges_(edges), samples_(samples), h_(h), beta_(beta), scratch_(edges * samples) {}

    void set_step(double dt) override {
        if (dt == dt_ && factor_) return;
        dt_ = dt;
        tau_ = 0.5 * dt;
        const std::size_t n = samples_;
        std::vector<cdouble> d(n, h_ + kI * tau_ * (2.0 / h_));
        d[0] = 0.5 * h_ + kI * tau_ * (1.0 / h_);
        std::vector<cdouble> o(n - 1, kI * tau_ * (-1.0 / h_));
        factor_.emplace(o, d, o);
        gamma_ = kI * tau_ / beta_;
        q_.assign(n, cdouble{});
        q_[0] = 1.0;
        factor_->solve(q_);
    }

    void step(std::vector<cdouble>& u) override {
        const std::size_t n = samples_;
        cdouble ends{};
        for (std::size_t e = 0; e < edges_; ++e) ends += u[e * n];
        for (std::size_t e = 0; e < edges_; ++e) {
            const std::size_t base = e * n;
            for (std::size_t k = 0; k < n; ++k) {
                const cdouble c = u[base + k];
                const cdouble right = k + 1 < n ? u[base + k + 1] : cdouble{};
                cdouble ku;
                cdouble wu;
                if (k == 0) {
                    ku = (c - right) / h_ + ends / beta_;
                    wu = 0.5 * h_ * c;
                } else {
                    ku = (2.0 * c - u[base + k - 1] - right) / h_;
                    wu = h_ * c;
                }
                scratch_[base + k] = wu - kI * tau_ * ku;
            }
        }
        cdouble first_sum{};
        for (std::size_t e = 0; e < edges_; ++e) {
            std::span<cdouble> block(scratch_.data() + e * n, n);
            factor_->solve(block);
            first_sum += block[0];
        }
        const cdouble scale = gamma_ * first_sum / (1.0 + gamma_ * static_cast<double>(edges_) * q_[0]);
        for (std::size_t e = 0; e < edges_; ++e) {
            for (std::size_t k = 0; k < n; ++k) scratch_[e * n + k] -= scale * q_[k];
        }
        u.swap(scratch_);
    }

    double mass(const std::vector<cdouble>& u) const override {
        double s = 0.0;
        for (std::size_t e = 0; e < edges_; ++e) {
            s += 0.5 * std::norm(u[e * samples_]);
            for (std::size_t k = 1; k < samples_; ++k) s += std::norm(u[e * samples_ + k]);
        }
        return h_ * s;
    }

    double boundary_mass(const std::vector<cdouble>& u) const override {
        const auto zone = static_cast<std::size_t>(std::ceil(kBoundaryZone * static_cast<double>(samples_)));
        double s = 0.0;
        for (std::size_t e = 0; e < edges_; ++e) {
            for (std::size_t k = samples_ - zone; k < samples_; ++k) s += std::norm(u[e * samples_ + k]);
        }
        return h_ * s;
    }

private:
    std::size_t edges_;
    std::size_t samples_;
    double h_;
    double beta_;
    double dt_ = -1.0;
    double tau_ = 0.0;
    std::optional<TridiagonalFactor> factor_;
    cdouble gamma_;
    std::vector<cdouble> q_;
    std::vector<cdouble> scratch_;
};

void check_settings(const CrankNicolsonSettings& settings, double h) {
    if (!(settings.dt > 0.0) || !std::isfinite(settings.dt)) {
        throw std::invalid_argument("Crank-Nicolson: dt must be positive");
    }
    if (settings.dt > h) throw std::invalid_argument("Crank-Nicolson: dt > h is rejected as accuracy-hostile");
    if (settings.output_times.empty()) throw std::invalid_argument("Crank-Nicolson: no output times requested");
    double prev = 0.0;
    for (double t : settings.output_times) {
        if (!std::isfinite(t) || t < prev) {
            throw std::invalid_argument("Crank-Nicolson: output times must be finite, nonnegative and nondecreasing");
        }
        prev = t;
    }
}

double sup_abs(const std::vector<cdouble>& u) {
    double s = 0.0;
    for (const auto& v : u) s = std::max(s, std::abs(v));
    return s;
}

// Far-field amplitudes decay into the subnormal range, where x86 arithmetic is
// two orders of magnitude slower; flush them to zero for the duration of a run.
class FlushSubnormals {
public:
#if defined(__SSE__)
    FlushSubnormals() : saved_(_mm_getcsr()) { _mm_setcsr(saved_ | 0x8040u); }
    ~FlushSubnormals() { _mm_setcsr(saved_); }

private:
    unsigned saved_;
#endif
};

template <typename OnOutput>
EvolutionTrace drive(Stepper& stepper, std::vector<cdouble>& u, const CrankNicolsonSettings& settings,
                     OnOutput&& on_output) {
    const FlushSubnormals guard;
    EvolutionTrace trace;
    const double m0 = stepper.mass(u);
    trace.initial_norm = std::sqrt(m0);
    double now = 0.0;
    double mass_prev = m0;
    for (double target : settings.output_times) {
        const double span = target - now;
        if (span > 0.0) {
            const auto steps = static_cast<std::size_t>(std::ceil(span / settings.dt - 1e-9));
            stepper.set_step(span / static_cast<double>(steps));
            for (std::size_t s = 0; s < steps; ++s) {
                stepper.step(u);
                const double m = stepper.mass(u);
                if (m0 > 0.0) trace.max_step_mass_change = std::max(trace.max_step_mass_change, std::abs(m - mass_prev) / m0);
                mass_prev = m;
            }
            now = target;
        }
        trace.times.push_back(target);
        trace.sup_norms.push_back(sup_abs(u));
        trace.norms.push_back(std::sqrt(mass_prev));
        if (m0 > 0.0) {
            trace.boundary_contamination =
                std::max(trace.boundary_contamination, std::sqrt(stepper.boundary_mass(u) / m0));
        }
        on_output(trace, u);
    }
    trace.mass_drift = std::abs(trace.norms.back() - trace.initial_norm);
    return trace;
}

// Largest distance-from-wall violation check for a line datum.
void check_line_buffer(const LineGrid& grid, std::span<const cdouble> phi, double buffer, const char* who) {
    double peak = 0.0;
    for (const auto& v : phi) peak = std::max(peak, std::abs(v));
    if (peak == 0.0) return;
    std::size_t lo = phi.size();
    std::size_t hi = 0;
    for (std::size_t k = 0; k < phi.size(); ++k) {
        if (std::abs(phi[k]) > kSupportThreshold * peak) {
            lo = std::min(lo, k);
            hi = k;
        }
    }
    const double left_gap = static_cast<double>(lo + 1) * grid.h;
    const double right_gap = static_cast<double>(grid.size - hi) * grid.h;
    if (std::min(left_gap, right_gap) < buffer) {
        throw TruncationError(std::string(who) + ": datum lies " + std::to_string(std::min(left_gap, right_gap)) +
                              " from a wall; the run needs a buffer of " + std::to_string(buffer));
    }
}

LineTrace run_line(std::vector<double> diag, std::vector<double> off, const LineGrid& grid,
                   std::span<const cdouble> phi, const CrankNicolsonSettings& settings) {
    LineStepper stepper(std::move(diag), std::move(off), grid.h);
    std::vector<cdouble> u(phi.begin(), phi.end());
    LineTrace out;
    EvolutionTrace base = drive(stepper, u, settings, [&](EvolutionTrace&, const std::vector<cdouble>& state) {
        if (settings.keep_snapshots) out.snapshots.push_back(state);
    });
    static_cast<EvolutionTrace&>(out) = std::move(base);
    out.final_state = std::move(u);
    return out;
}

void check_line_input(const LineGrid& grid, std::span<const cdouble> phi, const CrankNicolsonSettings& settings) {
    grid.validate();
    if (phi.size() != grid.size) throw std::invalid_argument("line solver: datum size does not match the grid");
    check_settings(settings, grid.h);
}

}  // namespace

// ---------------------------------------------------------------------------

LineGrid LineGrid::centered(double half_length, double h) {
    const std::size_t n = multiple_of(half_length, h, "LineGrid::centered");
    return {-static_cast<double>(n - 1) * h, h, 2 * n - 1};
}

void LineGrid::validate() const {
    if (!(h > 0.0) || !std::isfinite(h) || !std::isfinite(x_min)) throw std::invalid_argument("LineGrid: bad spacing");
    if (size < 3) throw std::invalid_argument("LineGrid: need at least 3 nodes");
}

void StepCoefficient::validate() const {
    if (values.size() != breakpoints.size() + 1) {
        throw std::invalid_argument("StepCoefficient: need exactly one more value than breakpoints");
    }
    for (std::size_t i = 1; i < breakpoints.size(); ++i) {
        if (!(breakpoints[i] > breakpoints[i - 1])) {
            throw std::invalid_argument("StepCoefficient: breakpoints must be strictly increasing");
        }
    }
    for (double v : values) {
        if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("StepCoefficient: values must be positive");
    }
}

double StepCoefficient::operator()(double x) const {
    const auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), x);
    return values[static_cast<std::size_t>(it - breakpoints.begin())];
}

double StepCoefficient::max_value() const { return *std::max_element(values.begin(), values.end()); }

double wall_buffer(double sigma_max, double t) { return 24.0 * std::sqrt(sigma_max * std::abs(t)) + 2.0; }

LineTrace evolve_stepline(const StepCoefficient& sigma, const LineGrid& grid, std::span<const cdouble> phi,
                          const CrankNicolsonSettings& settings) {
    sigma.validate();
    check_line_input(grid, phi, settings);
    check_line_buffer(grid, phi, wall_buffer(sigma.max_value(), settings.output_times.back()), "evolve_stepline");

    const double h = grid.h;
    std::vector<double> diag(grid.size), off(grid.size - 1);
    for (std::size_t k = 0; k < grid.size; ++k) {
        const double left = sigma(grid.x(k) - 0.5 * h);
        const double right = sigma(grid.x(k) + 0.5 * h);
        diag[k] = (left + right) / h;
        if (k + 1 < grid.size) off[k] = -right / h;
    }
    return run_line(std::move(diag), std::move(off), grid, phi, settings);
}

void DeltaPotentialSpec::validate() const {
    if (strengths.size() != positions.size()) {
        throw std::invalid_argument("DeltaPotentialSpec: strengths and positions differ in length");
    }
    for (std::size_t i = 0; i < positions.size(); ++i) {
        if (!std::isfinite(strengths[i]) || !std::isfinite(positions[i])) {
            throw std::invalid_argument("DeltaPotentialSpec: non-finite entry");
        }
        if (i > 0 && !(positions[i] > positions[i - 1])) {
            throw std::invalid_argument("DeltaPotentialSpec: positions must be strictly increasing");
        }
    }
}

std::vector<std::size_t> delta_nodes(const DeltaPotentialSpec& spec, const LineGrid& grid) {
    spec.validate();
    std::vector<std::size_t> nodes;
    for (double x : spec.positions) {
        const double k = std::round((x - grid.x_min) / grid.h);
        if (k < 1.0 || k > static_cast<double>(grid.size) - 2.0) {
            throw std::invalid_argument("delta potential at x=" + std::to_string(x) + " lies outside the grid");
        }
        nodes.push_back(static_cast<std::size_t>(k));
    }
    return nodes;
}

namespace {

void delta_line_operator(const DeltaPotentialSpec& spec, const LineGrid& grid, std::vector<double>& diag,
                         std::vector<double>& off) {
    const auto nodes = delta_nodes(spec, grid);
    diag.assign(grid.size, 2.0 / grid.h);
    off.assign(grid.size - 1, -1.0 / grid.h);
    for (std::size_t i = 0; i < nodes.size(); ++i) diag[nodes[i]] += spec.strengths[i];
}

// Number of eigenvalues of the symmetric tridiagonal (d, e) below x (Sturm count).
std::size_t sturm_count(const std::vector<double>& d, const std::vector<double>& e, double x) {
    std::size_t count = 0;
    double q = d[0] - x;
    if (q < 0.0) ++count;
    for (std::size_t k = 1; k < d.size(); ++k) {
        const double prev = q == 0.0 ? 1e-300 : q;
        q = d[k] - x - e[k - 1] * e[k - 1] / prev;
        if (q < 0.0) ++count;
    }
    return count;
}

}  // namespace

LineTrace evolve_delta_line(const DeltaPotentialSpec& spec, const LineGrid& grid, std::span<const cdouble> phi,
                            const CrankNicolsonSettings& settings) {
    check_line_input(grid, phi, settings);
    check_line_buffer(grid, phi, wall_buffer(1.0, settings.output_times.back()), "evolve_delta_line");
    std::vector<double> diag, off;
    delta_line_operator(spec, grid, diag, off);
    return run_line(std::move(diag), std::move(off), grid, phi, settings);
}

std::vector<BoundState> bound_states(const DeltaPotentialSpec& spec, const LineGrid& grid) {
    grid.validate();
    std::vector<double> diag, off;
    delta_line_operator(spec, grid, diag, off);
    // H = K / h.
    for (auto& v : diag) v /= grid.h;
    for (auto& v : off) v /= grid.h;

    constexpr double kCutoff = -1e-8;
    const std::size_t upper = sturm_count(diag, off, kCutoff);
    if (upper == 0) return {};

    double lower = 0.0;
    for (std::size_t k = 0; k < diag.size(); ++k) {
        double r = 0.0;
        if (k > 0) r += std::abs(off[k - 1]);
        if (k + 1 < diag.size()) r += std::abs(off[k]);
        lower = std::min(lower, diag[k] - r);
    }

    const auto n = static_cast<lapack_int>(grid.size);
    lapack_int found = 0;
    std::vector<double> energies(grid.size);
    std::vector<double> vectors(grid.size * (upper + 1));
    std::vector<lapack_int> ifail(grid.size);
    std::vector<double> d = diag;
    std::vector<double> e = off;
    e.push_back(0.0);
    const lapack_int info =
        LAPACKE_dstevx(LAPACK_COL_MAJOR, 'V', 'V', n, d.data(), e.data(), lower - 1.0, kCutoff, 0, 0,
                       2.0 * LAPACKE_dlamch('S'), &found, energies.data(), vectors.data(), n, ifail.data());
    if (info != 0) throw NumericalError("bound_states: eigensolver failed (info=" + std::to_string(info) + ")");

    std::vector<BoundState> states;
    const double scale = 1.0 / std::sqrt(grid.h);
    for (lapack_int s = 0; s < found; ++s) {
        BoundState b;
        b.energy = energies[static_cast<std::size_t>(s)];
        const double* col = vectors.data() + static_cast<std::size_t>(s) * grid.size;
        b.profile.assign(col, col + grid.size);
        const auto peak = std::max_element(b.profile.begin(), b.profile.end(),
                                           [](double x, double y) { return std::abs(x) < std::abs(y); });
        const double sign = *peak < 0.0 ? -scale : scale;
        for (auto& v : b.profile) v *= sign;
        states.push_back(std::move(b));
    }
    return states;
}

cdouble grid_overlap(const LineGrid& grid, const BoundState& state, std::span<const cdouble> phi) {
    if (state.profile.size() != phi.size()) throw std::invalid_argument("grid_overlap: size mismatch");
    cdouble s{};
    for (std::size_t k = 0; k < phi.size(); ++k) s += state.profile[k] * phi[k];
    return grid.h * s;
}

std::vector<cdouble> project_continuous(const LineGrid& grid, std::span<const cdouble> phi,
                                        std::span<const BoundState> states) {
    for (std::size_t i = 0; i < states.size(); ++i) {
        if (states[i].profile.size() != phi.size()) throw std::invalid_argument("project_continuous: size mismatch");
        for (std::size_t j = i; j < states.size(); ++j) {
            double dot = 0.0;
            for (std::size_t k = 0; k < phi.size(); ++k) dot += states[i].profile[k] * states[j].profile[k];
            dot *= grid.h;
            const double expected = i == j ? 1.0 : 0.0;
            if (std::abs(dot - expected) > 1e-8) {
                throw std::invalid_argument("project_continuous: bound states are not orthonormal");
            }
        }
    }
    std::vector<cdouble> out(phi.begin(), phi.end());
    for (const auto& b : states) {
        const cdouble c = grid_overlap(grid, b, out);
        for (std::size_t k = 0; k < out.size(); ++k) out[k] -= c * b.profile[k];
    }
    return out;
}

// ---------------------------------------------------------------------------

void StarGraphSpec::validate() const {
    if (edge_count < 2) throw std::invalid_argument("StarGraphSpec: need at least 2 edges");
    if (!(edge_length > 0.0) || !std::isfinite(edge_length)) {
        throw std::invalid_argument("StarGraphSpec: edge length must be positive");
    }
    if (const auto* dp = std::get_if<DeltaPrimeCoupling>(&vertex)) {
        if (dp->beta == 0.0 || !std::isfinite(dp->beta)) {
            throw std::invalid_argument("StarGraphSpec: delta-prime strength must be finite and nonzero");
        }
    }
    if (const auto* d = std::get_if<DeltaCoupling>(&vertex); d != nullptr && !std::isfinite(d->alpha)) {
        throw std::invalid_argument("StarGraphSpec: delta strength must be finite");
    }
}

std::size_t star_edge_samples(const StarGraphSpec& spec, double h) {
    return multiple_of(spec.edge_length, h, "star graph");
}

namespace {

bool shares_vertex(const StarGraphSpec& spec) { return !std::holds_alternative<DeltaPrimeCoupling>(spec.vertex); }

std::vector<cdouble> flatten(const StarGraphSpec& spec, const StarState& s, std::size_t n) {
    std::vector<cdouble> u;
    if (shares_vertex(spec)) {
        u.reserve(1 + spec.edge_count * (n - 1));
        u.push_back(s.edges[0][0]);
        for (const auto& edge : s.edges) u.insert(u.end(), edge.begin() + 1, edge.end());
    } else {
        for (const auto& edge : s.edges) u.insert(u.end(), edge.begin(), edge.end());
    }
    return u;
}

StarState unflatten(const StarGraphSpec& spec, const std::vector<cdouble>& u, std::size_t n) {
    StarState s;
    s.edges.resize(spec.edge_count);
    for (std::size_t e = 0; e < spec.edge_count; ++e) {
        if (shares_vertex(spec)) {
            s.edges[e].reserve(n);
            s.edges[e].push_back(u[0]);
            const auto first = u.begin() + static_cast<std::ptrdiff_t>(1 + e * (n - 1));
            s.edges[e].insert(s.edges[e].end(), first, first + static_cast<std::ptrdiff_t>(n - 1));
        } else {
            const auto first = u.begin() + static_cast<std::ptrdiff_t>(e * n);
            s.edges[e].assign(first, first + static_cast<std::ptrdiff_t>(n));
        }
    }
    return s;
}

}  // namespace

double star_vertex_residual(const StarGraphSpec& spec, double h, const StarState& state) {
    std::vector<cdouble> deriv;
    cdouble value_sum{};
    for (const auto& edge : state.edges) {
        if (edge.size() < 3) throw std::invalid_argument("star_vertex_residual: edges too short");
        deriv.push_back((-3.0 * edge[0] + 4.0 * edge[1] - edge[2]) / (2.0 * h));
        value_sum += edge[0];
    }
    cdouble deriv_sum{};
    for (const auto& d : deriv) deriv_sum += d;
    return std::visit(
        [&](const auto& cond) -> double {
            using T = std::decay_t<decltype(cond)>;
            if constexpr (std::is_same_v<T, Kirchhoff>) {
                return std::abs(deriv_sum);
            } else if constexpr (std::is_same_v<T, DeltaCoupling>) {
                return std::abs(deriv_sum - cond.alpha * state.edges[0][0]);
            } else {
                const cdouble common = deriv_sum / static_cast<double>(deriv.size());
                double r = std::abs(value_sum - cond.beta * common);
                for (const auto& d : deriv) r = std::max(r, std::abs(d - common));
                return r;
            }
        },
        spec.vertex);
}

StarTrace evolve_star(const StarGraphSpec& spec, double h, const StarState& phi,
                      const CrankNicolsonSettings& settings) {
    spec.validate();
    const std::size_t n = star_edge_samples(spec, h);
    if (n < 4) throw std::invalid_argument("evolve_star: need at least 4 samples per edge");
    check_settings(settings, h);
    if (phi.edges.size() != spec.edge_count) throw std::invalid_argument("evolve_star: wrong number of edges");
    double peak = 0.0;
    for (const auto& edge : phi.edges) {
        if (edge.size() != n) throw std::invalid_argument("evolve_star: edge datum size does not match the grid");
        for (const auto& v : edge) peak = std::max(peak, std::abs(v));
    }
    if (shares_vertex(spec)) {
        for (const auto& edge : phi.edges) {
            if (std::abs(edge[0] - phi.edges[0][0]) > 1e-12 * std::max(1.0, peak)) {
                throw std::invalid_argument("evolve_star: datum is discontinuous at the vertex");
            }
        }
    }
    const double buffer = wall_buffer(1.0, settings.output_times.back());
    for (const auto& edge : phi.edges) {
        for (std::size_t k = 0; k < n; ++k) {
            if (peak > 0.0 && std::abs(edge[k]) > kSupportThreshold * peak &&
                static_cast<double>(n - k) * h < buffer) {
                throw TruncationError("evolve_star: datum too close to a truncated edge end (buffer " +
                                      std::to_string(buffer) + ")");
            }
        }
    }

    std::unique_ptr<Stepper> stepper;
    if (const auto* dp = std::get_if<DeltaPrimeCoupling>(&spec.vertex)) {
        stepper = std::make_unique<StarDeltaPrimeStepper>(spec.edge_count, n, h, dp->beta);
    } else {
        const double alpha = std::holds_alternative<DeltaCoupling>(spec.vertex)
                                 ? std::get<DeltaCoupling>(spec.vertex).alpha
                                 : 0.0;
        stepper = std::make_unique<StarVertexStepper>(spec.edge_count, n, h, alpha);
    }

    std::vector<cdouble> u = flatten(spec, phi, n);
    StarTrace out;
    EvolutionTrace base = drive(*stepper, u, settings, [&](EvolutionTrace& trace, const std::vector<cdouble>& state) {
        trace.vertex_residuals.push_back(star_vertex_residual(spec, h, unflatten(spec, state, n)));
    });
    static_cast<EvolutionTrace&>(out) = std::move(base);
    out.final_state = unflatten(spec, u, n);
    return out;
}

// ---------------------------------------------------------------------------

DenseMatrix DenseMatrix::zeros(std::size_t rows, std::size_t cols) {
    return {rows, cols, std::vector<double>(rows * cols, 0.0)};
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
    DenseMatrix m = zeros(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

CouplingCheck validate_coupling(const VertexCoupling& vc) {
    CouplingCheck check;
    const std::size_t d = vc.a.rows;
    if (d == 0 || vc.a.cols != d || vc.b.rows != d || vc.b.cols != d || vc.a.data.size() != d * d ||
        vc.b.data.size() != d * d) {
        check.diagnostic = "dimension mismatch: A and B must both be d x d";
        return check;
    }
    using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    const auto di = static_cast<Eigen::Index>(d);
    const Eigen::Map<const RowMajor> a(vc.a.data.data(), di, di);
    const Eigen::Map<const RowMajor> b(vc.b.data.data(), di, di);

    Eigen::MatrixXd block(di, 2 * di);
    block << a, b;
    const double block_norm = block.norm();
    if (block_norm > 0.0) {
        const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(block);
        const auto r = qr.matrixQR().diagonal();
        for (Eigen::Index i = 0; i < r.size(); ++i) {
            if (std::abs(r[i]) > 1e-10 * block_norm) ++check.rank;
        }
    }

    const Eigen::MatrixXd product = a * b.transpose();
    check.symmetry_defect = (product - product.transpose()).cwiseAbs().maxCoeff();
    const double symmetry_tol = 1e-10 * (1.0 + a.norm() * b.norm());

    const bool full_rank = check.rank == d;
    const bool symmetric = check.symmetry_defect <= symmetry_tol;
    check.valid = full_rank && symmetric;
    if (!full_rank) {
        check.diagnostic = "rank deficient: rank [A B] = " + std::to_string(check.rank) + " < d = " + std::to_string(d);
    }
    if (!symmetric) {
        if (!check.diagnostic.empty()) check.diagnostic += "; ";
        check.diagnostic += "A B^T not symmetric: max |A B^T - B A^T| = " + std::to_string(check.symmetry_defect);
    }
    if (check.valid) check.diagnostic = "valid";
    return check;
}

namespace {

// Rows 0..d-2 of `m` enforce equality of consecutive entries.
void continuity_rows(DenseMatrix& m) {
    for (std::size_t i = 0; i + 1 < m.rows; ++i) {
        m(i, i) = 1.0;
        m(i, i + 1) = -1.0;
    }
}

}  // namespace

VertexCoupling kirchhoff_coupling(std::size_t degree) { return delta_coupling(degree, 0.0); }

VertexCoupling delta_coupling(std::size_t degree, double alpha) {
    if (degree == 0) throw std::invalid_argument("delta_coupling: degree must be positive");
    VertexCoupling vc{DenseMatrix::zeros(degree, degree), DenseMatrix::zeros(degree, degree)};
    continuity_rows(vc.a);
    vc.a(degree - 1, 0) = -alpha;
    for (std::size_t j = 0; j < degree; ++j) vc.b(degree - 1, j) = 1.0;
    return vc;
}

VertexCoupling delta_prime_coupling(std::size_t degree, double beta) {
    if (degree == 0) throw std::invalid_argument("delta_prime_coupling: degree must be positive");
    VertexCoupling vc{DenseMatrix::zeros(degree, degree), DenseMatrix::zeros(degree, degree)};
    continuity_rows(vc.b);
    vc.b(degree - 1, 0) = -beta;
    for (std::size_t j = 0; j < degree; ++j) vc.a(degree - 1, j) = 1.0;
    return vc;
}

VertexCoupling dirichlet_coupling(std::size_t degree) {
    return {DenseMatrix::identity(degree), DenseMatrix::zeros(degree, degree)};
}

VertexCoupling neumann_coupling(std::size_t degree) {
    return {DenseMatrix::zeros(degree, degree), DenseMatrix::identity(degree)};
}

}  // namespace dispersim
