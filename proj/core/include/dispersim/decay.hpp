#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "dispersim/lattice.hpp"

namespace dispersim {

struct FitWindow {
    double t_min = 0.0;
    double t_max = kInfinity;
};

/// Least-squares power law norm ≈ e^{intercept} t^{slope}.
struct DecayFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    FitWindow window;
    std::size_t samples = 0;
    /// Exponent the fit is compared against (negative for decay).
    std::optional<double> theoretical;
};

/// Ordinary least squares of log(norm) on log(t) for samples inside the window.
/// Throws std::invalid_argument with fewer than 8 samples in the window, a
/// degenerate window, or a nonpositive norm/time in it.
DecayFit fit_decay(std::span<const double> times, std::span<const double> norms, FitWindow window);

/// Improved ℓ^p decay rate of the lattice propagator:
/// (p-2)/(2p) on [2, 4), (p-1)/(3p) on (4, ∞], 1/4 at p = 4, 1/3 at p = ∞.
/// Throws std::invalid_argument for p < 2.
double alpha_p_theory(double p);

/// n log-spaced (or linearly spaced) points on [t_min, t_max].
std::vector<double> log_grid(double t_min, double t_max, std::size_t n);
std::vector<double> linear_grid(double t_min, double t_max, std::size_t n);

/// Kernel row truncation |j| ≤ 2⌈2t⌉ + 200.
std::size_t kernel_truncation(double t);

struct KernelNormSample {
    double t = 0.0;
    double norm = 0.0;
    /// ℓ^p mass carried by the last 50 retained sites, relative to the norm.
    double tail_fraction = 0.0;
};

/// ‖K_t‖_{ℓ^p} on each t, using kernel_row up to kernel_truncation(t).
std::vector<KernelNormSample> kernel_lp_norms(double p, std::span<const double> t_grid, std::size_t threads = 0);

/// Largest t accepted by alpha_p_empirical.
inline constexpr double kMaxKernelTime = 1e6;

/// ‖K_t‖_p over t_grid followed by fit_decay on the whole grid; theoretical is
/// set to -alpha_p_theory(p). Throws ResourceLimitError beyond kMaxKernelTime.
DecayFit alpha_p_empirical(double p, std::span<const double> t_grid, std::size_t threads = 0);

/// Trigonometric polynomial Σ_{|k|≤N} a_k e^{ikx}; coefficients[k + N] = a_k.
struct TorusData {
    std::size_t cutoff = 0;
    std::vector<cdouble> coefficients;

    static TorusData ones(std::size_t cutoff);
    void validate() const;
    cdouble evaluate(double t, double x) const;  ///< Σ a_k e^{i(t k² + k x)}
};

inline constexpr std::size_t kMaxTorusSamples = std::size_t{1} << 22;

/// max_x |Σ a_k e^{i(tk² + kx)}| on oversample·(2N+1) uniform points, then a
/// golden-section refinement around the best sample. Throws
/// std::invalid_argument for oversample < 8 and ResourceLimitError above
/// kMaxTorusSamples.
double torus_supnorm(const TorusData& data, double t, std::size_t oversample = 8);

/// ∫₀^{2π} |Σ a_k e^{ikx}| dx by Gauss panels split at the local minima of |f|
/// (where the kinks of |f| sit). `resolution` scales the number of panels.
double torus_l1_norm(const TorusData& data, std::size_t resolution = 1);

struct TorusSweep {
    std::vector<double> times;
    std::vector<double> supnorms;
    /// |t|^{1/2}·supnorm / ‖φ‖_{L¹}
    std::vector<double> scaled;
    double l1_norm = 0.0;
    double max_scaled = 0.0;
};

/// Sweeps t over (0, 1/N]: `count` log-spaced times from N^{-3} to 1/N merged
/// with `count` evenly spaced ones.
TorusSweep torus_sweep(const TorusData& data, std::size_t count, std::size_t oversample = 8, std::size_t threads = 0);

}  // namespace dispersim
