#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

namespace dispersim {

using cdouble = std::complex<double>;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Finitely supported complex function on the integers.
///
/// Stores a contiguous window [offset, offset + size - 1]; every site outside
/// the window is zero. The window is never empty and all values are finite.
class LatticeState {
public:
    LatticeState(std::int64_t offset, std::vector<cdouble> values);

    /// Unit mass at `site`.
    static LatticeState delta(std::int64_t site);

    std::int64_t offset() const noexcept { return offset_; }
    std::int64_t last() const noexcept {
        return offset_ + static_cast<std::int64_t>(values_.size()) - 1;
    }
    std::size_t size() const noexcept { return values_.size(); }
    const std::vector<cdouble>& values() const noexcept { return values_; }

    /// Value at any site; zero outside the stored window.
    cdouble operator()(std::int64_t site) const noexcept;

    /// Copy restricted or zero-padded to [first, last].
    LatticeState window(std::int64_t first, std::int64_t last) const;

    /// Smallest window containing every site with |u| > threshold. Falls back
    /// to the single site `offset()` when nothing exceeds the threshold.
    LatticeState trimmed(double threshold = 0.0) const;

    LatticeState conj() const;

private:
    std::int64_t offset_;
    std::vector<cdouble> values_;
};

/// a*u + b*v on the union of the two windows.
LatticeState linear_combination(cdouble a, const LatticeState& u, cdouble b, const LatticeState& v);

/// Largest |u(j) - v(j)| over all sites.
double max_abs_difference(const LatticeState& u, const LatticeState& v);

/// (Δ_d u)(j) = u(j+1) - 2u(j) + u(j-1). Support grows by one site on each side.
LatticeState discrete_laplacian(const LatticeState& state);

/// ℓ^p norm for p in [1, ∞]; pass kInfinity for the sup norm. Throws
/// std::invalid_argument for p < 1 or NaN.
double lp_norm(const LatticeState& state, double p);

/// Two half-lattices joined at j = 0 with speeds b1 (j ≤ -1) and b2 (j ≥ 1),
/// truncated to M sites per side.
struct CoupledLatticeSpec {
    double b1 = 1.0;
    double b2 = 1.0;
    std::int64_t truncation = 2;

    /// Throws std::invalid_argument unless b1, b2 > 0 and truncation ≥ 2.
    void validate() const;

    /// Position of site j (j ≠ 0, |j| ≤ M) in the unknown vector: j = -M..-1
    /// map to 0..M-1 and j = 1..M map to M..2M-1.
    std::size_t index_of(std::int64_t site) const;
    std::int64_t site_of(std::size_t index) const;
    std::size_t dimension() const { return 2 * static_cast<std::size_t>(truncation); }

    /// Junction value determined by both coupling identities:
    /// u(0) = (b2² u(-1) + b1² v(1)) / (b1² + b2²).
    cdouble junction_value(cdouble left, cdouble right) const;
};

/// Real symmetric tridiagonal matrix stored as its diagonal and first
/// off-diagonal.
class SymmetricOperator {
public:
    SymmetricOperator(std::vector<double> diagonal, std::vector<double> off_diagonal);

    std::size_t dimension() const noexcept { return diagonal_.size(); }
    const std::vector<double>& diagonal() const noexcept { return diagonal_; }
    const std::vector<double>& off_diagonal() const noexcept { return off_diagonal_; }

    /// Entry (i, j); zero outside the band. entry(i, j) == entry(j, i) exactly.
    double entry(std::size_t i, std::size_t j) const;

    std::size_t bandwidth() const noexcept { return off_diagonal_.empty() ? 0 : 1; }

    /// Bounds on the spectrum from Gershgorin discs.
    double gershgorin_lower() const;
    double gershgorin_upper() const;

private:
    std::vector<double> diagonal_;
    std::vector<double> off_diagonal_;
};

/// The 2M x 2M truncation of the coupled two-speed generator. Interior rows are
/// (b⁻², -2b⁻², b⁻²); the two junction rows carry the mixed weight
/// 1/(b1² + b2²); the far ends are cut (Dirichlet closure).
SymmetricOperator build_coupled_operator(const CoupledLatticeSpec& spec);

}  // namespace dispersim
