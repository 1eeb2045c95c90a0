#include "dispersim/tridiagonal.hpp"

#include <stdexcept>

#include "dispersim/errors.hpp"

namespace dispersim {

TridiagonalFactor::TridiagonalFactor(std::span<const std::complex<double>> lower,
                                     std::span<const std::complex<double>> diagonal,
                                     std::span<const std::complex<double>> upper)
    : lower_(lower.begin(), lower.end()), upper_(upper.begin(), upper.end()), pivot_inv_(diagonal.size()) {
    const std::size_t n = diagonal.size();
    if (n == 0 || lower.size() + 1 != n || upper.size() + 1 != n) {
        throw std::invalid_argument("TridiagonalFactor: inconsistent band sizes");
    }
    std::complex<double> prev_upper_scaled{};
    for (std::size_t k = 0; k < n; ++k) {
        std::complex<double> pivot = diagonal[k];
        if (k > 0) pivot -= lower_[k - 1] * prev_upper_scaled;
        if (std::abs(pivot) == 0.0) throw NumericalError("TridiagonalFactor: zero pivot");
        pivot_inv_[k] = 1.0 / pivot;
        if (k + 1 < n) prev_upper_scaled = upper_[k] * pivot_inv_[k];
    }
}

void TridiagonalFactor::solve(std::span<std::complex<double>> rhs) const {
    const std::size_t n = pivot_inv_.size();
    if (rhs.size() != n) throw std::invalid_argument("TridiagonalFactor::solve: size mismatch");
    // Forward sweep: y_k = (r_k - l_{k-1} y_{k-1}) / p_k.
    rhs[0] *= pivot_inv_[0];
    for (std::size_t k = 1; k < n; ++k) {
        rhs[k] = (rhs[k] - lower_[k - 1] * rhs[k - 1]) * pivot_inv_[k];
    }
    // Back substitution: x_k = y_k - (u_k / p_k) x_{k+1}.
    for (std::size_t k = n - 1; k-- > 0;) {
        rhs[k] -= upper_[k] * pivot_inv_[k] * rhs[k + 1];
    }
}

}  // namespace dispersim
