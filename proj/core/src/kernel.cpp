#include "dispersim/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "dispersim/errors.hpp"
#include "dispersim/quadrature.hpp"

namespace dispersim {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSeriesLimit = 20.0;

void check_tolerance(double tol, const char* who) {
    if (!(tol >= 1e-13 && tol <= 1e-4)) {
        throw std::invalid_argument(std::string(who) + ": tol must lie in [1e-13, 1e-4]");
    }
}

template <typename F>
cdouble integrate_panels(F&& f, double lo, double hi, std::size_t panels) {
    const auto& rule = panel_rule();
    const double width = (hi - lo) / static_cast<double>(panels);
    const double half = 0.5 * width;
    cdouble total{};
    for (std::size_t p = 0; p < panels; ++p) {
        const double mid = lo + (static_cast<double>(p) + 0.5) * width;
        cdouble panel{};
        for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
            panel += rule.weights[k] * f(mid + half * rule.nodes[k]);
        }
        total += half * panel;
    }
    return total;
}

// Doubles the panel count until two successive estimates agree to `tol`.
template <typename F>
QuadratureResult adaptive_panels(F&& f, double lo, double hi, std::size_t initial, double tol,
                                 const char* who) {
    std::size_t panels = std::max<std::size_t>(initial, 2);
    cdouble coarse = integrate_panels(f, lo, hi, panels);
    double err = kInfinity;
    while (2 * panels <= kMaxQuadraturePanels) {
        panels *= 2;
        const cdouble fine = integrate_panels(f, lo, hi, panels);
        err = std::abs(fine - coarse);
        coarse = fine;
        if (err <= tol) return {fine, err, panels};
    }
    throw AccuracyError(std::string(who) + ": panel budget exhausted before reaching tolerance", err);
}

double series_bessel(std::size_t n, double x) {
    if (x == 0.0) return n == 0 ? 1.0 : 0.0;
    const long double half = 0.5L * static_cast<long double>(x);
    const long double log_term0 =
        static_cast<long double>(n) * std::log(half) - std::lgamma(static_cast<long double>(n) + 1.0L);
    if (log_term0 < -11000.0L) return 0.0;
    long double term = std::exp(log_term0);
    long double sum = term;
    const long double q = half * half;
    for (std::size_t k = 1; k < 500; ++k) {
        term *= -q / (static_cast<long double>(k) * static_cast<long double>(k + n));
        sum += term;
        if (std::abs(term) <= 1e-21L * std::abs(sum) && static_cast<long double>(k) > half) break;
    }
    return static_cast<double>(sum);
}

std::vector<double> miller_bessel(double x, std::size_t nmax) {
    const double reach = std::max(static_cast<double>(nmax), x + 17.0 * std::cbrt(0.5 * x));
    const double base = std::ceil(reach);
    auto start = static_cast<std::size_t>(base + std::ceil(std::sqrt(40.0 * base)) + 30.0);
    start += start % 2;

    std::vector<double> seq(start + 2, 0.0);
    seq[start] = 1e-300;
    for (std::size_t n = start; n >= 1; --n) {
        seq[n - 1] = (2.0 * static_cast<double>(n) / x) * seq[n] - seq[n + 1];
        if (std::abs(seq[n - 1]) > 1e250) {
            for (std::size_t k = n - 1; k <= start; ++k) seq[k] *= 1e-250;
        }
    }
    double peak = 0.0;
    for (double v : seq) peak = std::max(peak, std::abs(v));
    for (auto& v : seq) v /= peak;
    double squares = seq[0] * seq[0];
    double linear = seq[0];
    for (std::size_t k = 1; k <= start; ++k) {
        squares += 2.0 * seq[k] * seq[k];
        if (k % 2 == 0) linear += 2.0 * seq[k];
    }
    const double scale = std::copysign(1.0 / std::sqrt(squares), linear);
    seq.resize(nmax + 1);
    for (auto& v : seq) v *= scale;
    return seq;
}

// i^j for any integer j.
cdouble i_power(std::int64_t j) {
    switch (((j % 4) + 4) % 4) {
        case 0: return {1.0, 0.0};
        case 1: return {0.0, 1.0};
        case 2: return {-1.0, 0.0};
        default: return {0.0, -1.0};
    }
}

}  // namespace

double PhaseFunction::value(double xi) {
    const double s = std::sin(0.5 * xi);
    return 4.0 * s * s;
}
double PhaseFunction::d1(double xi) { return 2.0 * std::sin(xi); }
double PhaseFunction::d2(double xi) { return 2.0 * std::cos(xi); }
double PhaseFunction::d3(double xi) { return -2.0 * std::sin(xi); }

void OscIntegralParams::validate() const {
    if (!std::isfinite(t) || !std::isfinite(y) || !std::isfinite(z)) {
        throw std::invalid_argument("OscIntegralParams: t, y, z must be finite");
    }
    if (!(a > 0.0 && a <= 1.0)) throw std::invalid_argument("OscIntegralParams: a must lie in (0, 1]");
}

std::vector<double> bessel_j_sequence(double x, std::size_t nmax) {
    if (!std::isfinite(x)) throw std::invalid_argument("bessel_j_sequence: non-finite argument");
    const double ax = std::abs(x);
    std::vector<double> seq;
    if (ax <= kSeriesLimit) {
        seq.resize(nmax + 1);
        for (std::size_t n = 0; n <= nmax; ++n) seq[n] = series_bessel(n, ax);
    } else {
        seq = miller_bessel(ax, nmax);
    }
    if (x < 0.0) {
        for (std::size_t n = 1; n <= nmax; n += 2) seq[n] = -seq[n];
    }
    return seq;
}

double bessel_j(std::int64_t n, double x) {
    const auto order = static_cast<std::size_t>(n < 0 ? -n : n);
    double v = std::abs(x) <= kSeriesLimit ? series_bessel(order, std::abs(x))
                                            : miller_bessel(std::abs(x), order)[order];
    if (x < 0.0 && order % 2 == 1) v = -v;
    if (n < 0 && order % 2 == 1) v = -v;
    return v;
}

cdouble kernel_bessel(const KernelRequest& req) {
    if (!std::isfinite(req.t)) throw std::invalid_argument("kernel_bessel: t must be finite");
    const cdouble phase = std::polar(1.0, -2.0 * req.t);
    return phase * i_power(req.j) * bessel_j(req.j, 2.0 * req.t);
}

std::vector<cdouble> kernel_row(double t, std::size_t jmax) {
    if (!std::isfinite(t)) throw std::invalid_argument("kernel_row: t must be finite");
    const auto seq = bessel_j_sequence(2.0 * t, jmax);
    const cdouble phase = std::polar(1.0, -2.0 * t);
    std::vector<cdouble> row(jmax + 1);
    for (std::size_t j = 0; j <= jmax; ++j) {
        row[j] = phase * i_power(static_cast<std::int64_t>(j)) * seq[j];
    }
    return row;
}

QuadratureResult kernel_quadrature(const KernelRequest& req, double tol) {
    check_tolerance(tol, "kernel_quadrature");
    if (!std::isfinite(req.t)) throw std::invalid_argument("kernel_quadrature: t must be finite");
    const double t = req.t;
    const auto j = static_cast<double>(req.j);
    auto integrand = [t, j](double xi) {
        return std::polar(1.0 / (2.0 * kPi), -t * PhaseFunction::value(xi) + j * xi);
    };
    const auto initial = static_cast<std::size_t>(std::ceil(1.0 + std::abs(t) + std::abs(j)));
    return adaptive_panels(integrand, -kPi, kPi, initial, tol, "kernel_quadrature");
}

double phase_vdc_margin(std::size_t grid_size) {
    if (grid_size < 1000) throw std::invalid_argument("phase_vdc_margin: grid_size must be >= 1000");
    double margin = kInfinity;
    const double step = 2.0 * kPi / static_cast<double>(grid_size - 1);
    for (std::size_t k = 0; k < grid_size; ++k) {
        const double xi = -kPi + step * static_cast<double>(k);
        margin = std::min(margin, std::abs(PhaseFunction::d2(xi)) + std::abs(PhaseFunction::d3(xi)));
    }
    return margin;
}

QuadratureResult coupled_oscillatory_integral(const OscIntegralParams& params, double tol) {
    check_tolerance(tol, "coupled_oscillatory_integral");
    params.validate();
    const auto [t, y, z, a] = params;
    auto integrand = [=](double theta) {
        const double phase = t * (2.0 * std::cos(theta) + 2.0 * z * std::asin(a * std::sin(0.5 * theta)) + y * theta);
        return std::polar(std::sin(theta), phase);
    };
    const auto initial =
        static_cast<std::size_t>(std::ceil(1.0 + 0.5 * std::abs(t) * (2.0 + std::abs(y) + std::abs(z))));
    return adaptive_panels(integrand, 0.0, kPi, initial, tol, "coupled_oscillatory_integral");
}

}  // namespace dispersim
