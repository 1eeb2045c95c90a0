#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "dispersim/lattice.hpp"

namespace dispersim {

// ---------------------------------------------------------------------------
// Grids and solver settings

/// Uniform grid x_k = x_min + k·h, k = 0..size-1, closed by Dirichlet walls at
/// x_min - h and x_min + size·h.
struct LineGrid {
    double x_min = 0.0;
    double h = 0.0;
    std::size_t size = 0;

    double x(std::size_t k) const { return x_min + static_cast<double>(k) * h; }
    double x_max() const { return x(size - 1); }
    /// Grid symmetric about the origin with walls at ±half_length; half_length
    /// must be a multiple of h.
    static LineGrid centered(double half_length, double h);
    void validate() const;
};

struct CrankNicolsonSettings {
    /// Largest time step; each output interval is split into equal steps ≤ dt.
    double dt = 0.01;
    /// Nondecreasing, nonnegative times at which the trace is recorded.
    std::vector<double> output_times;
    bool keep_snapshots = false;
};

struct EvolutionTrace {
    std::vector<double> times;
    std::vector<double> sup_norms;
    /// Discrete L² norm (grid-weighted) at each output time.
    std::vector<double> norms;
    double initial_norm = 0.0;
    /// |‖u(T)‖ − ‖φ‖| at the last output time.
    double mass_drift = 0.0;
    /// max over steps of |‖u_{n+1}‖² − ‖u_n‖²| / ‖φ‖².
    double max_step_mass_change = 0.0;
    /// max over outputs of (mass within 5% of a wall)^{1/2} / ‖φ‖.
    double boundary_contamination = 0.0;
    /// Vertex-condition residuals per output time (star graphs only).
    std::vector<double> vertex_residuals;
};

struct LineTrace : EvolutionTrace {
    std::vector<cdouble> final_state;
    std::vector<std::vector<cdouble>> snapshots;
};

// ---------------------------------------------------------------------------
// Step-coefficient line  i u_t + (σ u_x)_x = 0

/// σ(x) = values[i] on (breakpoints[i-1], breakpoints[i]); values has one more
/// entry than breakpoints.
struct StepCoefficient {
    std::vector<double> breakpoints;
    std::vector<double> values;

    void validate() const;
    double operator()(double x) const;
    double max_value() const;
};

/// Wall distance required around the datum for a run to time t with maximal
/// coefficient sigma_max: 24·√(σ_max·t) + 2.
double wall_buffer(double sigma_max, double t);

/// Crank–Nicolson for the conservative discretization
/// [σ_{k+1/2}(u_{k+1}-u_k) - σ_{k-1/2}(u_k-u_{k-1})]/h² with σ at midpoints.
/// Throws std::invalid_argument for dt > h or malformed input and
/// TruncationError when the datum is closer than wall_buffer to a wall.
LineTrace evolve_stepline(const StepCoefficient& sigma, const LineGrid& grid, std::span<const cdouble> phi,
                          const CrankNicolsonSettings& settings);

// ---------------------------------------------------------------------------
// Line with point interactions  H_α = -Δ + Σ α_j δ(x - x_j)

struct DeltaPotentialSpec {
    std::vector<double> strengths;
    std::vector<double> positions;

    void validate() const;
};

/// Grid node nearest to each delta position; throws if a position lies
/// outside the grid.
std::vector<std::size_t> delta_nodes(const DeltaPotentialSpec& spec, const LineGrid& grid);

/// Crank–Nicolson for i u_t = H_α u, each delta entering as α_j/h on the
/// diagonal at its nearest node.
LineTrace evolve_delta_line(const DeltaPotentialSpec& spec, const LineGrid& grid, std::span<const cdouble> phi,
                            const CrankNicolsonSettings& settings);

struct BoundState {
    double energy = 0.0;
    /// Real eigenfunction on the grid with h·Σ|b_k|² = 1.
    std::vector<double> profile;
};

/// Eigenpairs of the grid H_α with energy below -1e-8, ascending in energy.
std::vector<BoundState> bound_states(const DeltaPotentialSpec& spec, const LineGrid& grid);

/// φ - Σ_b ⟨b, φ⟩ b with the grid inner product h·Σ conj(b)φ. Throws
/// std::invalid_argument when the states are not orthonormal within 1e-8.
std::vector<cdouble> project_continuous(const LineGrid& grid, std::span<const cdouble> phi,
                                        std::span<const BoundState> states);

/// ⟨b, φ⟩ in the grid inner product.
cdouble grid_overlap(const LineGrid& grid, const BoundState& state, std::span<const cdouble> phi);

// ---------------------------------------------------------------------------
// Star graphs

struct Kirchhoff {};
struct DeltaCoupling {
    double alpha = 0.0;  ///< Σ inward derivatives = α u(v)
};
struct DeltaPrimeCoupling {
    double beta = 1.0;   ///< common inward derivative u′, Σ u_e(v) = β u′; β ≠ 0
};
using VertexCondition = std::variant<Kirchhoff, DeltaCoupling, DeltaPrimeCoupling>;

struct StarGraphSpec {
    std::size_t edge_count = 3;
    /// Each half-infinite edge is truncated at this length (a multiple of h).
    double edge_length = 100.0;
    VertexCondition vertex = Kirchhoff{};

    void validate() const;
};

/// Per-edge samples: edges[e][k] is the value at distance k·h from the vertex,
/// k = 0..n-1 with n·h = edge_length. For Kirchhoff and δ couplings all
/// edges[e][0] hold the shared vertex value.
struct StarState {
    std::vector<std::vector<cdouble>> edges;
};

struct StarTrace : EvolutionTrace {
    StarState final_state;
};

/// Number of samples per edge for spacing h.
std::size_t star_edge_samples(const StarGraphSpec& spec, double h);

/// Crank–Nicolson on the star. The vertex is a shared node of weight N·h/2
/// (Kirchhoff, δ) or each edge keeps its own endpoint of weight h/2 tied by
/// the rank-one term (1/β)|Σ u_e(0)|² (δ′). Residuals of the vertex identities
/// use one-sided second-order derivatives.
StarTrace evolve_star(const StarGraphSpec& spec, double h, const StarState& phi,
                      const CrankNicolsonSettings& settings);

/// Vertex-identity residual of a star state (see evolve_star).
double star_vertex_residual(const StarGraphSpec& spec, double h, const StarState& state);

// ---------------------------------------------------------------------------
// General vertex conditions A u(v) + B u'(v) = 0

/// Row-major dense real matrix.
struct DenseMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    static DenseMatrix zeros(std::size_t rows, std::size_t cols);
    static DenseMatrix identity(std::size_t n);
    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

struct VertexCoupling {
    DenseMatrix a;
    DenseMatrix b;

    std::size_t degree() const { return a.rows; }
};

struct CouplingCheck {
    bool valid = false;
    std::size_t rank = 0;
    double symmetry_defect = 0.0;
    std::string diagnostic;
};

/// Self-adjointness test: rank [A B] = d and A Bᵀ = B Aᵀ.
CouplingCheck validate_coupling(const VertexCoupling& vc);

VertexCoupling kirchhoff_coupling(std::size_t degree);
VertexCoupling delta_coupling(std::size_t degree, double alpha);
VertexCoupling delta_prime_coupling(std::size_t degree, double beta);
VertexCoupling dirichlet_coupling(std::size_t degree);
VertexCoupling neumann_coupling(std::size_t degree);

}  // namespace dispersim
