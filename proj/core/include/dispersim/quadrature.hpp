#pragma once

#include <cstddef>
#include <vector>

namespace dispersim {

/// Gauss–Legendre rule on [-1, 1].
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// n-point Gauss–Legendre rule by Newton iteration on P_n. Exact for
/// polynomials of degree ≤ 2n - 1.
GaussRule gauss_legendre(std::size_t n);

/// The 20-point rule used by the panel integrators; built once.
const GaussRule& panel_rule();

}  // namespace dispersim
