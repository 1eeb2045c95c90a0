#include "dispersim/evolution.hpp"

#include <fftw3.h>
#include <lapacke.h>

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <tuple>

#include "dispersim/errors.hpp"

namespace dispersim {

namespace {

constexpr std::int64_t kEdgeProbe = 8;

// FFTW's planner is not reentrant; execution on distinct buffers is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

struct FftwBuffer {
    explicit FftwBuffer(std::size_t n)
        : data(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n))) {
        if (data == nullptr) throw ResourceLimitError("evolve_line: FFT buffer allocation failed");
    }
    ~FftwBuffer() { fftw_free(data); }
    FftwBuffer(const FftwBuffer&) = delete;
    FftwBuffer& operator=(const FftwBuffer&) = delete;

    fftw_complex* data;
};

struct FftwPlan {
    FftwPlan(std::size_t n, fftw_complex* buf, int sign) {
        std::lock_guard lock(planner_mutex());
        plan = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, sign, FFTW_ESTIMATE);
    }
    ~FftwPlan() {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(plan);
    }
    FftwPlan(const FftwPlan&) = delete;
    FftwPlan& operator=(const FftwPlan&) = delete;

    fftw_plan plan;
};

// Smallest 2^a 3^b 5^c ≥ n.
std::size_t smooth_size(std::size_t n) {
    for (std::size_t m = std::max<std::size_t>(n, 1);; ++m) {
        std::size_t r = m;
        for (std::size_t f : {2, 3, 5}) {
            while (r % f == 0) r /= f;
        }
        if (r == 1) return m;
    }
}

double mass(const std::vector<cdouble>& v, std::size_t first, std::size_t last) {
    double s = 0.0;
    for (std::size_t k = first; k <= last && k < v.size(); ++k) s += std::norm(v[k]);
    return s;
}

double edge_amplitude(const std::vector<cdouble>& v) {
    double worst = 0.0;
    const auto probe = std::min<std::size_t>(kEdgeProbe, v.size());
    for (std::size_t k = 0; k < probe; ++k) {
        worst = std::max({worst, std::abs(v[k]), std::abs(v[v.size() - 1 - k])});
    }
    return worst;
}

struct Eigensystem {
    std::vector<double> values;
    Eigen::MatrixXd vectors;  // columns are eigenvectors
};

class EigenCache {
public:
    std::shared_ptr<const Eigensystem> get(const CoupledLatticeSpec& spec) {
        const Key key{spec.b1, spec.b2, spec.truncation};
        {
            std::shared_lock lock(mutex_);
            if (auto it = table_.find(key); it != table_.end()) return it->second;
        }
        auto system = decompose(spec);
        std::unique_lock lock(mutex_);
        if (auto it = table_.find(key); it != table_.end()) return it->second;
        if (order_.size() >= kCapacity) {
            table_.erase(order_.front());
            order_.pop_front();
        }
        table_.emplace(key, system);
        order_.push_back(key);
        return system;
    }

    void clear() {
        std::unique_lock lock(mutex_);
        table_.clear();
        order_.clear();
    }

private:
    using Key = std::tuple<double, double, std::int64_t>;
    static constexpr std::size_t kCapacity = 4;

    static std::shared_ptr<const Eigensystem> decompose(const CoupledLatticeSpec& spec) {
        const SymmetricOperator op = build_coupled_operator(spec);
        const auto n = static_cast<lapack_int>(op.dimension());
        auto system = std::make_shared<Eigensystem>();
        system->values = op.diagonal();
        std::vector<double> off = op.off_diagonal();
        system->vectors.resize(n, n);
        const lapack_int info =
            LAPACKE_dstevd(LAPACK_COL_MAJOR, 'V', n, system->values.data(), off.data(), system->vectors.data(), n);
        if (info != 0) {
            throw NumericalError("evolve_coupled: tridiagonal eigensolver failed (info=" + std::to_string(info) + ")");
        }
        return system;
    }

    std::shared_mutex mutex_;
    std::map<Key, std::shared_ptr<const Eigensystem>> table_;
    std::deque<Key> order_;
};

EigenCache& eigen_cache() {
    static EigenCache cache;
    return cache;
}

}  // namespace

std::int64_t propagation_margin(double speed, double t) {
    const double reach = speed * std::abs(t);
    return static_cast<std::int64_t>(std::ceil(2.0 * reach) + std::ceil(12.0 * std::cbrt(reach))) + 32;
}

EvolutionResult evolve_line(const LatticeState& phi, double t, const LineEvolutionOptions& options) {
    if (!std::isfinite(t)) throw std::invalid_argument("evolve_line: t must be finite");
    if (t == 0.0) return {phi, 0.0, 0.0, 0, 0.0};

    const std::int64_t buffer = propagation_margin(1.0, t);
    const std::int64_t first = phi.offset() - buffer;
    const auto width = static_cast<std::size_t>(static_cast<std::int64_t>(phi.size()) + 2 * buffer);
    const std::size_t ring = smooth_size(width);
    if (ring > options.max_ring) {
        throw ResourceLimitError("evolve_line: ring of " + std::to_string(ring) + " sites exceeds cap " +
                                 std::to_string(options.max_ring));
    }

    FftwBuffer buf(ring);
    auto* data = reinterpret_cast<cdouble*>(buf.data);
    std::fill(data, data + ring, cdouble{});
    for (std::size_t k = 0; k < phi.size(); ++k) data[static_cast<std::size_t>(buffer) + k] = phi.values()[k];

    {
        FftwPlan forward(ring, buf.data, FFTW_FORWARD);
        fftw_execute(forward.plan);
    }
    const double n = static_cast<double>(ring);
    for (std::size_t k = 0; k < ring; ++k) {
        const double s = std::sin(std::numbers::pi * static_cast<double>(k) / n);
        data[k] *= std::polar(1.0 / n, -4.0 * t * s * s);
    }
    {
        FftwPlan backward(ring, buf.data, FFTW_BACKWARD);
        fftw_execute(backward.plan);
    }

    std::vector<cdouble> out(data, data + width);
    const double before = std::sqrt(mass(phi.values(), 0, phi.size() - 1));
    const double after = std::sqrt(mass(out, 0, out.size() - 1));
    const double edge = edge_amplitude(out);
    return {LatticeState(first, std::move(out)), t, std::abs(after - before),
            static_cast<std::int64_t>(ring - width), edge};
}

EvolutionResult evolve_halfline(const LatticeState& phi, double t, BoundaryCondition bc,
                                const LineEvolutionOptions& options) {
    if (phi.offset() < 1) {
        throw std::invalid_argument("evolve_halfline: initial datum must be supported on j >= 1");
    }
    const std::int64_t last = phi.last();
    // Extension on [-last, last] (Dirichlet) or [1-last, last] (Neumann).
    const std::int64_t first = bc == BoundaryCondition::Dirichlet ? -last : 1 - last;
    std::vector<cdouble> ext(static_cast<std::size_t>(last - first + 1));
    for (std::int64_t j = first; j <= last; ++j) {
        cdouble v;
        if (j >= 1) {
            v = phi(j);
        } else if (bc == BoundaryCondition::Dirichlet) {
            v = j == 0 ? cdouble{} : -phi(-j);
        } else {
            v = phi(1 - j);
        }
        ext[static_cast<std::size_t>(j - first)] = v;
    }

    EvolutionResult whole = evolve_line(LatticeState(first, std::move(ext)), t, options);
    const std::int64_t reach = std::max(whole.state.last(), last);
    LatticeState half = whole.state.window(0, reach);

    const double before = std::sqrt(mass(phi.values(), 0, phi.size() - 1));
    const double after = std::sqrt(mass(half.values(), 1, half.size() - 1));
    whole.mass_drift = std::abs(after - before);
    whole.state = std::move(half);
    return whole;
}

EvolutionResult evolve_coupled(const CoupledLatticeSpec& spec, const LatticeState& phi, double t,
                               const CoupledEvolutionOptions& options) {
    spec.validate();
    if (!std::isfinite(t)) throw std::invalid_argument("evolve_coupled: t must be finite");
    if (spec.truncation > options.max_truncation) {
        throw ResourceLimitError("evolve_coupled: truncation M=" + std::to_string(spec.truncation) +
                                 " exceeds cap " + std::to_string(options.max_truncation));
    }
    const std::int64_t m = spec.truncation;
    const double speed = std::max(1.0 / (spec.b1 * spec.b1), 1.0 / (spec.b2 * spec.b2));
    const std::int64_t margin = propagation_margin(speed, t);

    std::int64_t extent = 0;
    for (std::int64_t j = phi.offset(); j <= phi.last(); ++j) {
        if (j != 0 && phi(j) != cdouble{}) extent = std::max(extent, j < 0 ? -j : j);
    }
    if (extent > m - margin) {
        throw TruncationError("evolve_coupled: datum reaches |j|=" + std::to_string(extent) + " but M=" +
                              std::to_string(m) + " leaves only " + std::to_string(m - extent) +
                              " sites for a required margin of " + std::to_string(margin));
    }

    const std::size_t n = spec.dimension();
    Eigen::VectorXd re = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    Eigen::VectorXd im = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    double before = 0.0;
    for (std::int64_t j = std::max(phi.offset(), -m); j <= std::min(phi.last(), m); ++j) {
        if (j == 0) continue;
        const auto idx = static_cast<Eigen::Index>(spec.index_of(j));
        re[idx] = phi(j).real();
        im[idx] = phi(j).imag();
        before += std::norm(phi(j));
    }

    std::vector<cdouble> values(n);
    if (t == 0.0) {
        for (std::size_t k = 0; k < n; ++k) values[k] = {re[static_cast<Eigen::Index>(k)], im[static_cast<Eigen::Index>(k)]};
    } else {
        const auto system = eigen_cache().get(spec);
        const Eigen::MatrixXd& u = system->vectors;
        Eigen::VectorXd cr = u.transpose() * re;
        Eigen::VectorXd ci = u.transpose() * im;
        for (Eigen::Index k = 0; k < cr.size(); ++k) {
            const cdouble rotated = std::polar(1.0, t * system->values[static_cast<std::size_t>(k)]) * cdouble(cr[k], ci[k]);
            cr[k] = rotated.real();
            ci[k] = rotated.imag();
        }
        const Eigen::VectorXd out_re = u * cr;
        const Eigen::VectorXd out_im = u * ci;
        for (std::size_t k = 0; k < n; ++k) {
            values[k] = {out_re[static_cast<Eigen::Index>(k)], out_im[static_cast<Eigen::Index>(k)]};
        }
    }

    const double after = mass(values, 0, n - 1);
    const double edge = edge_amplitude(values);
    std::vector<cdouble> full(n + 1);
    const auto half = static_cast<std::size_t>(m);
    std::copy(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(half), full.begin());
    full[half] = spec.junction_value(values[half - 1], values[half]);
    std::copy(values.begin() + static_cast<std::ptrdiff_t>(half), values.end(),
              full.begin() + static_cast<std::ptrdiff_t>(half) + 1);

    return {LatticeState(-m, std::move(full)), t, std::abs(std::sqrt(after) - std::sqrt(before)),
            m - extent - margin, edge};
}

std::vector<double> coupled_spectrum(const CoupledLatticeSpec& spec) {
    spec.validate();
    return eigen_cache().get(spec)->values;
}

void clear_coupled_cache() { eigen_cache().clear(); }

}  // namespace dispersim
