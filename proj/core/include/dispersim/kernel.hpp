#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "dispersim/lattice.hpp"

namespace dispersim {

/// Dispersion relation of the lattice Laplacian, ψ(ξ) = 4 sin²(ξ/2), and its
/// first three derivatives.
struct PhaseFunction {
    static double value(double xi);
    static double d1(double xi);  ///< 2 sin ξ
    static double d2(double xi);  ///< 2 cos ξ
    static double d3(double xi);  ///< -2 sin ξ
};

struct KernelRequest {
    double t = 0.0;
    std::int64_t j = 0;
};

/// Parameters of the coupled-system oscillatory integral
/// I = ∫₀^π exp(i t (2cos θ + 2z arcsin(a sin(θ/2)) + yθ)) sin θ dθ.
struct OscIntegralParams {
    double t = 0.0;
    double y = 0.0;
    double z = 0.0;
    double a = 1.0;

    void validate() const;  ///< 0 < a ≤ 1, all finite.
};

struct QuadratureResult {
    cdouble value;
    double error_estimate = 0.0;
    std::size_t panels = 0;
};

/// Panel budget shared by the oscillatory integrators.
inline constexpr std::size_t kMaxQuadraturePanels = std::size_t{1} << 22;

/// Bessel functions of the first kind J_0(x), ..., J_nmax(x).
///
/// |x| ≤ 20 uses the power series per order (extended precision accumulation);
/// larger arguments use Miller's backward recurrence started beyond both nmax
/// and the turning point, normalized by J₀² + 2ΣJ_k² = 1.
std::vector<double> bessel_j_sequence(double x, std::size_t nmax);

/// J_n(x) for any integer order.
double bessel_j(std::int64_t n, double x);

/// K_t(j) = (1/2π) ∫_{-π}^{π} e^{-4it sin²(ξ/2)} e^{ijξ} dξ by Gauss panels whose
/// count grows like 1 + |t| + |j|; doubled until the panel-halving estimate is
/// below `tol`. Throws AccuracyError if the panel budget runs out and
/// std::invalid_argument for tol outside [1e-13, 1e-4].
QuadratureResult kernel_quadrature(const KernelRequest& req, double tol);

/// Closed form K_t(j) = e^{-2it} i^j J_j(2t).
cdouble kernel_bessel(const KernelRequest& req);

/// K_t(0), ..., K_t(jmax) from a single Bessel sequence. K_t(-j) = K_t(j).
std::vector<cdouble> kernel_row(double t, std::size_t jmax);

/// min over a uniform grid of [-π, π] (endpoints included) of |ψ''| + |ψ'''|.
/// Throws std::invalid_argument for grid_size < 1000.
double phase_vdc_margin(std::size_t grid_size);

/// The coupled-system integral with panel count growing like
/// 1 + |t|(2 + |y| + |z|). Same error contract as kernel_quadrature.
QuadratureResult coupled_oscillatory_integral(const OscIntegralParams& params, double tol);

}  // namespace dispersim
