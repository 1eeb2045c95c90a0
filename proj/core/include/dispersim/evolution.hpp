#pragma once

#include <cstddef>
#include <cstdint>

#include "dispersim/lattice.hpp"

namespace dispersim {

struct EvolutionResult {
    LatticeState state;
    double time = 0.0;
    /// |‖u(t)‖₂ − ‖φ‖₂| over the sites that carry the conserved mass.
    double mass_drift = 0.0;
    /// Buffer sites left over after the propagation margin was reserved.
    std::int64_t truncation_margin = 0;
    /// Largest |u| on the outermost sites next to a truncation; measures wrap-around
    /// or wall contamination instead of assuming it away.
    double boundary_amplitude = 0.0;
};

enum class BoundaryCondition { Dirichlet, Neumann };

struct LineEvolutionOptions {
    /// Largest periodic ring the multiplier method may allocate.
    std::size_t max_ring = std::size_t{1} << 24;
};

/// Sites reserved on each side of the data for a lattice speed `speed` over |t|:
/// the group-velocity reach 2·speed·|t|, an Airy-layer allowance past the light
/// cone, and a fixed 32-site buffer.
std::int64_t propagation_margin(double speed, double t);

/// Whole-line evolution u(t) = e^{itΔ_d}φ by the exact multiplier
/// e^{-4it sin²(ξ/2)} on a periodic ring. The returned window extends the
/// support of φ by propagation_margin(1, t) on both sides. Throws
/// ResourceLimitError when the ring would exceed options.max_ring.
EvolutionResult evolve_line(const LatticeState& phi, double t, const LineEvolutionOptions& options = {});

/// Half-line evolution on j ≥ 1 by the method of images. The result starts at
/// site 0, which holds the boundary value: u(t,0) = 0 for Dirichlet and
/// u(t,0) = u(t,1) for Neumann (mirror about j = 1/2). Mass is measured on j ≥ 1.
/// Throws std::invalid_argument if φ has stored sites below j = 1.
EvolutionResult evolve_halfline(const LatticeState& phi, double t, BoundaryCondition bc,
                                const LineEvolutionOptions& options = {});

struct CoupledEvolutionOptions {
    /// Largest truncation M accepted for the dense eigendecomposition.
    std::int64_t max_truncation = 4000;
};

/// U(t) = e^{itA_M}φ for the truncated coupled operator, via the cached
/// eigendecomposition of A_M. φ(0) is ignored: the junction value is slaved to
/// its neighbours and reconstructed in the result. The result covers [-M, M].
///
/// Throws TruncationError when the support of φ is closer than
/// propagation_margin(max(b1⁻², b2⁻²), t) to either truncated end,
/// ResourceLimitError when M exceeds the cap, NumericalError if the
/// eigensolver fails.
EvolutionResult evolve_coupled(const CoupledLatticeSpec& spec, const LatticeState& phi, double t,
                               const CoupledEvolutionOptions& options = {});

/// Eigenvalues of A_M in ascending order (shares the evolution cache).
std::vector<double> coupled_spectrum(const CoupledLatticeSpec& spec);

/// Drops every cached eigendecomposition.
void clear_coupled_cache();

}  // namespace dispersim
