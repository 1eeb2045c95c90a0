#pragma once

#include <complex>
#include <span>
#include <vector>

namespace dispersim {

/// LU factorization (no pivoting) of a complex tridiagonal matrix with
/// lower/diagonal/upper bands. Intended for diagonally dominant systems such as
/// the Crank–Nicolson matrices W + i(dt/2)K. Throws NumericalError on a zero pivot.
class TridiagonalFactor {
public:
    TridiagonalFactor(std::span<const std::complex<double>> lower, std::span<const std::complex<double>> diagonal,
                      std::span<const std::complex<double>> upper);

    /// Overwrites rhs with the solution.
    void solve(std::span<std::complex<double>> rhs) const;

    std::size_t size() const noexcept { return pivot_inv_.size(); }

private:
    std::vector<std::complex<double>> lower_;
    std::vector<std::complex<double>> upper_;
    std::vector<std::complex<double>> pivot_inv_;
};

}  // namespace dispersim
