#include "dispersim/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace dispersim {

LatticeState::LatticeState(std::int64_t offset, std::vector<cdouble> values)
    : offset_(offset), values_(std::move(values)) {
    if (values_.empty()) {
        throw std::invalid_argument("LatticeState: values must be nonempty");
    }
    for (const auto& v : values_) {
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
            throw std::invalid_argument("LatticeState: non-finite value");
        }
    }
}

LatticeState LatticeState::delta(std::int64_t site) { return LatticeState(site, {cdouble(1.0, 0.0)}); }

cdouble LatticeState::operator()(std::int64_t site) const noexcept {
    if (site < offset_ || site > last()) return {};
    return values_[static_cast<std::size_t>(site - offset_)];
}

LatticeState LatticeState::window(std::int64_t first, std::int64_t last_site) const {
    if (last_site < first) throw std::invalid_argument("LatticeState::window: empty range");
    std::vector<cdouble> out(static_cast<std::size_t>(last_site - first + 1));
    for (std::int64_t j = std::max(first, offset_); j <= std::min(last_site, last()); ++j) {
        out[static_cast<std::size_t>(j - first)] = values_[static_cast<std::size_t>(j - offset_)];
    }
    return LatticeState(first, std::move(out));
}

LatticeState LatticeState::trimmed(double threshold) const {
    std::size_t lo = values_.size();
    std::size_t hi = 0;
    for (std::size_t k = 0; k < values_.size(); ++k) {
        if (std::abs(values_[k]) > threshold) {
            lo = std::min(lo, k);
            hi = k;
        }
    }
    if (lo == values_.size()) return LatticeState(offset_, {values_.front()});
    return window(offset_ + static_cast<std::int64_t>(lo), offset_ + static_cast<std::int64_t>(hi));
}

LatticeState LatticeState::conj() const {
    std::vector<cdouble> out(values_.size());
    std::transform(values_.begin(), values_.end(), out.begin(), [](cdouble v) { return std::conj(v); });
    return LatticeState(offset_, std::move(out));
}

LatticeState linear_combination(cdouble a, const LatticeState& u, cdouble b, const LatticeState& v) {
    const std::int64_t first = std::min(u.offset(), v.offset());
    const std::int64_t last = std::max(u.last(), v.last());
    std::vector<cdouble> out(static_cast<std::size_t>(last - first + 1));
    for (std::int64_t j = first; j <= last; ++j) {
        out[static_cast<std::size_t>(j - first)] = a * u(j) + b * v(j);
    }
    return LatticeState(first, std::move(out));
}

double max_abs_difference(const LatticeState& u, const LatticeState& v) {
    double worst = 0.0;
    for (std::int64_t j = std::min(u.offset(), v.offset()); j <= std::max(u.last(), v.last()); ++j) {
        worst = std::max(worst, std::abs(u(j) - v(j)));
    }
    return worst;
}

LatticeState discrete_laplacian(const LatticeState& state) {
    const std::int64_t first = state.offset() - 1;
    std::vector<cdouble> out(state.size() + 2);
    for (std::size_t k = 0; k < out.size(); ++k) {
        const std::int64_t j = first + static_cast<std::int64_t>(k);
        out[k] = state(j + 1) - 2.0 * state(j) + state(j - 1);
    }
    return LatticeState(first, std::move(out));
}

double lp_norm(const LatticeState& state, double p) {
    if (std::isnan(p) || p < 1.0) {
        throw std::invalid_argument("lp_norm: p must lie in [1, inf], got " + std::to_string(p));
    }
    const auto& v = state.values();
    double scale = 0.0;
    for (const auto& x : v) scale = std::max(scale, std::abs(x));
    if (std::isinf(p) || scale == 0.0) return scale;
    // Scaled sum avoids overflow/underflow for large p.
    double sum = 0.0;
    for (const auto& x : v) sum += std::pow(std::abs(x) / scale, p);
    return scale * std::pow(sum, 1.0 / p);
}

void CoupledLatticeSpec::validate() const {
    if (!(b1 > 0.0) || !(b2 > 0.0) || !std::isfinite(b1) || !std::isfinite(b2)) {
        throw std::invalid_argument("CoupledLatticeSpec: b1 and b2 must be positive and finite");
    }
    if (truncation < 2) throw std::invalid_argument("CoupledLatticeSpec: truncation M must be >= 2");
}

std::size_t CoupledLatticeSpec::index_of(std::int64_t site) const {
    if (site == 0 || site < -truncation || site > truncation) {
        throw std::out_of_range("CoupledLatticeSpec::index_of: site " + std::to_string(site) +
                                " outside the truncated lattice");
    }
    if (site < 0) return static_cast<std::size_t>(site + truncation);
    return static_cast<std::size_t>(truncation + site - 1);
}

std::int64_t CoupledLatticeSpec::site_of(std::size_t index) const {
    const auto k = static_cast<std::int64_t>(index);
    return k < truncation ? k - truncation : k - truncation + 1;
}

cdouble CoupledLatticeSpec::junction_value(cdouble left, cdouble right) const {
    const double s1 = b1 * b1;
    const double s2 = b2 * b2;
    return (s2 * left + s1 * right) / (s1 + s2);
}

SymmetricOperator::SymmetricOperator(std::vector<double> diagonal, std::vector<double> off_diagonal)
    : diagonal_(std::move(diagonal)), off_diagonal_(std::move(off_diagonal)) {
    if (diagonal_.empty()) throw std::invalid_argument("SymmetricOperator: empty");
    if (off_diagonal_.size() + 1 != diagonal_.size()) {
        throw std::invalid_argument("SymmetricOperator: off-diagonal must have dimension - 1 entries");
    }
}

double SymmetricOperator::entry(std::size_t i, std::size_t j) const {
    if (i >= dimension() || j >= dimension()) throw std::out_of_range("SymmetricOperator::entry");
    if (i == j) return diagonal_[i];
    if (i + 1 == j) return off_diagonal_[i];
    if (j + 1 == i) return off_diagonal_[j];
    return 0.0;
}

double SymmetricOperator::gershgorin_lower() const {
    double lo = kInfinity;
    for (std::size_t i = 0; i < dimension(); ++i) {
        double r = 0.0;
        if (i > 0) r += std::abs(off_diagonal_[i - 1]);
        if (i + 1 < dimension()) r += std::abs(off_diagonal_[i]);
        lo = std::min(lo, diagonal_[i] - r);
    }
    return lo;
}

double SymmetricOperator::gershgorin_upper() const {
    double hi = -kInfinity;
    for (std::size_t i = 0; i < dimension(); ++i) {
        double r = 0.0;
        if (i > 0) r += std::abs(off_diagonal_[i - 1]);
        if (i + 1 < dimension()) r += std::abs(off_diagonal_[i]);
        hi = std::max(hi, diagonal_[i] + r);
    }
    return hi;
}

SymmetricOperator build_coupled_operator(const CoupledLatticeSpec& spec) {
    spec.validate();
    const auto m = static_cast<std::size_t>(spec.truncation);
    const double left = 1.0 / (spec.b1 * spec.b1);
    const double right = 1.0 / (spec.b2 * spec.b2);
    const double mixed = 1.0 / (spec.b1 * spec.b1 + spec.b2 * spec.b2);

    std::vector<double> diag(2 * m);
    std::vector<double> off(2 * m - 1);
    for (std::size_t i = 0; i < m; ++i) diag[i] = -2.0 * left;
    for (std::size_t i = m; i < 2 * m; ++i) diag[i] = -2.0 * right;
    for (std::size_t i = 0; i + 1 < m; ++i) off[i] = left;
    for (std::size_t i = m; i + 1 < 2 * m; ++i) off[i] = right;

    // Junction rows u(-1) and v(1).
    diag[m - 1] = -left - mixed;
    diag[m] = -mixed - right;
    off[m - 1] = mixed;
    return SymmetricOperator(std::move(diag), std::move(off));
}

}  // namespace dispersim
