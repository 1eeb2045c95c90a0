#include "dispersim/decay.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "dispersim/errors.hpp"
#include "dispersim/kernel.hpp"
#include "dispersim/parallel.hpp"
#include "dispersim/quadrature.hpp"

namespace dispersim {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kGolden = 0.6180339887498949;

// Golden-section search for the maximum of f on [lo, hi].
template <typename F>
double golden_max(F&& f, double lo, double hi, double& best_x) {
    double a = lo;
    double b = hi;
    double c = b - kGolden * (b - a);
    double d = a + kGolden * (b - a);
    double fc = f(c);
    double fd = f(d);
    for (int iter = 0; iter < 80 && (b - a) > 1e-14 * (1.0 + std::abs(a)); ++iter) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - kGolden * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + kGolden * (b - a);
            fd = f(d);
        }
    }
    best_x = fc > fd ? c : d;
    return std::max(fc, fd);
}

}  // namespace

DecayFit fit_decay(std::span<const double> times, std::span<const double> norms, FitWindow window) {
    if (times.size() != norms.size()) throw std::invalid_argument("fit_decay: times and norms differ in length");
    if (!(window.t_min < window.t_max)) throw std::invalid_argument("fit_decay: degenerate window");
    double sx = 0.0, sy = 0.0;
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (times[i] < window.t_min || times[i] > window.t_max) continue;
        if (!(times[i] > 0.0)) throw std::invalid_argument("fit_decay: times in the window must be positive");
        if (!(norms[i] > 0.0) || !std::isfinite(norms[i])) {
            throw std::invalid_argument("fit_decay: norms in the window must be positive and finite");
        }
        xs.push_back(std::log(times[i]));
        ys.push_back(std::log(norms[i]));
        sx += xs.back();
        sy += ys.back();
    }
    if (xs.size() < 8) {
        throw std::invalid_argument("fit_decay: need at least 8 samples in the window, got " + std::to_string(xs.size()));
    }
    const auto n = static_cast<double>(xs.size());
    const double mx = sx / n;
    const double my = sy / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("fit_decay: all sample times coincide");

    DecayFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
        ss_res += r * r;
    }
    fit.r_squared = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
    fit.window = window;
    fit.samples = xs.size();
    return fit;
}

double alpha_p_theory(double p) {
    if (std::isnan(p) || p < 2.0) throw std::invalid_argument("alpha_p_theory: p must be >= 2");
    if (std::isinf(p)) return 1.0 / 3.0;
    if (p < 4.0) return (p - 2.0) / (2.0 * p);
    if (p == 4.0) return 0.25;
    return (p - 1.0) / (3.0 * p);
}

std::vector<double> log_grid(double t_min, double t_max, std::size_t n) {
    if (!(t_min > 0.0) || !(t_max > t_min) || n < 2) throw std::invalid_argument("log_grid: need 0 < t_min < t_max, n >= 2");
    std::vector<double> g(n);
    const double a = std::log(t_min);
    const double b = std::log(t_max);
    for (std::size_t i = 0; i < n; ++i) g[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
    g.front() = t_min;
    g.back() = t_max;
    return g;
}

std::vector<double> linear_grid(double t_min, double t_max, std::size_t n) {
    if (!(t_max > t_min) || n < 2) throw std::invalid_argument("linear_grid: need t_min < t_max, n >= 2");
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = t_min + (t_max - t_min) * static_cast<double>(i) / static_cast<double>(n - 1);
    g.back() = t_max;
    return g;
}

std::size_t kernel_truncation(double t) {
    return 2 * static_cast<std::size_t>(std::ceil(2.0 * std::abs(t))) + 200;
}

std::vector<KernelNormSample> kernel_lp_norms(double p, std::span<const double> t_grid, std::size_t threads) {
    if (std::isnan(p) || p < 1.0) throw std::invalid_argument("kernel_lp_norms: p must lie in [1, inf]");
    for (double t : t_grid) {
        if (!std::isfinite(t) || std::abs(t) > kMaxKernelTime) {
            throw ResourceLimitError("kernel_lp_norms: |t| = " + std::to_string(t) + " exceeds the kernel budget");
        }
    }
    constexpr std::size_t kTail = 50;
    std::vector<KernelNormSample> out(t_grid.size());
    parallel_for(t_grid.size(), threads, [&](std::size_t i) {
        const double t = t_grid[i];
        const std::size_t jmax = kernel_truncation(t);
        const auto row = kernel_row(t, jmax);
        double peak = 0.0;
        for (const auto& v : row) peak = std::max(peak, std::abs(v));
        double norm = peak;
        double tail = 0.0;
        if (std::isinf(p)) {
            for (std::size_t j = jmax + 1 - kTail; j <= jmax; ++j) tail = std::max(tail, std::abs(row[j]));
        } else {
            double sum = std::pow(std::abs(row[0]) / peak, p);
            double tail_sum = 0.0;
            for (std::size_t j = 1; j <= jmax; ++j) {
                const double term = 2.0 * std::pow(std::abs(row[j]) / peak, p);
                sum += term;
                if (j + kTail > jmax) tail_sum += term;
            }
            norm = peak * std::pow(sum, 1.0 / p);
            tail = peak * std::pow(tail_sum, 1.0 / p);
        }
        out[i] = {t, norm, tail / norm};
    });
    return out;
}

DecayFit alpha_p_empirical(double p, std::span<const double> t_grid, std::size_t threads) {
    const double alpha = alpha_p_theory(p);
    if (t_grid.empty()) throw std::invalid_argument("alpha_p_empirical: empty time grid");
    const auto samples = kernel_lp_norms(p, t_grid, threads);
    std::vector<double> ts, ns;
    for (const auto& s : samples) {
        ts.push_back(s.t);
        ns.push_back(s.norm);
    }
    const auto [lo, hi] = std::minmax_element(ts.begin(), ts.end());
    DecayFit fit = fit_decay(ts, ns, {*lo, *hi});
    fit.theoretical = -alpha;
    return fit;
}

TorusData TorusData::ones(std::size_t cutoff) {
    return {cutoff, std::vector<cdouble>(2 * cutoff + 1, cdouble(1.0, 0.0))};
}

void TorusData::validate() const {
    if (coefficients.size() != 2 * cutoff + 1) {
        throw std::invalid_argument("TorusData: need 2N+1 coefficients");
    }
    const bool any = std::any_of(coefficients.begin(), coefficients.end(), [](cdouble c) { return c != cdouble{}; });
    if (!any) throw std::invalid_argument("TorusData: at least one coefficient must be nonzero");
}

cdouble TorusData::evaluate(double t, double x) const {
    cdouble s{};
    const auto n = static_cast<std::int64_t>(cutoff);
    for (std::int64_t k = -n; k <= n; ++k) {
        const auto kd = static_cast<double>(k);
        s += coefficients[static_cast<std::size_t>(k + n)] * std::polar(1.0, t * kd * kd + kd * x);
    }
    return s;
}

double torus_supnorm(const TorusData& data, double t, std::size_t oversample) {
    data.validate();
    if (oversample < 8) throw std::invalid_argument("torus_supnorm: oversample must be >= 8");
    const std::size_t samples = oversample * (2 * data.cutoff + 1);
    if (samples > kMaxTorusSamples) {
        throw ResourceLimitError("torus_supnorm: " + std::to_string(samples) + " samples exceed the cap");
    }
    // Fold the time phase into the coefficients once.
    TorusData shifted = data;
    const auto n = static_cast<std::int64_t>(data.cutoff);
    for (std::int64_t k = -n; k <= n; ++k) {
        const auto kd = static_cast<double>(k);
        shifted.coefficients[static_cast<std::size_t>(k + n)] *= std::polar(1.0, t * kd * kd);
    }
    auto modulus = [&](double x) { return std::abs(shifted.evaluate(0.0, x)); };

    const double step = kTwoPi / static_cast<double>(samples);
    double best = -1.0;
    std::size_t arg = 0;
    for (std::size_t i = 0; i < samples; ++i) {
        const double v = modulus(step * static_cast<double>(i));
        if (v > best) {
            best = v;
            arg = i;
        }
    }
    const double centre = step * static_cast<double>(arg);
    double x_star = centre;
    const double refined = golden_max(modulus, centre - step, centre + step, x_star);
    return std::max(best, refined);
}

double torus_l1_norm(const TorusData& data, std::size_t resolution) {
    data.validate();
    if (resolution == 0) throw std::invalid_argument("torus_l1_norm: resolution must be positive");
    const std::size_t samples = 32 * (2 * data.cutoff + 1) * resolution;
    if (samples > kMaxTorusSamples) throw ResourceLimitError("torus_l1_norm: sample count exceeds the cap");
    auto modulus = [&](double x) { return std::abs(data.evaluate(0.0, x)); };

    const double step = kTwoPi / static_cast<double>(samples);
    std::vector<double> values(samples);
    for (std::size_t i = 0; i < samples; ++i) values[i] = modulus(step * static_cast<double>(i));

    std::vector<double> breaks{0.0};
    for (std::size_t i = 1; i < samples; ++i) {
        const double left = values[i - 1];
        const double right = values[(i + 1) % samples];
        if (values[i] <= left && values[i] < right) {
            const double centre = step * static_cast<double>(i);
            double x_min = centre;
            golden_max([&](double x) { return -modulus(x); }, centre - step, centre + step, x_min);
            if (x_min > breaks.back()) breaks.push_back(x_min);
        }
    }
    breaks.push_back(kTwoPi);

    const auto& rule = panel_rule();
    const double max_width = kTwoPi / static_cast<double>(4 * (2 * data.cutoff + 1) * resolution);
    double total = 0.0;
    for (std::size_t s = 0; s + 1 < breaks.size(); ++s) {
        const double lo = breaks[s];
        const double hi = breaks[s + 1];
        const auto pieces = static_cast<std::size_t>(std::max(1.0, std::ceil((hi - lo) / max_width)));
        const double w = (hi - lo) / static_cast<double>(pieces);
        for (std::size_t p = 0; p < pieces; ++p) {
            const double mid = lo + (static_cast<double>(p) + 0.5) * w;
            double panel = 0.0;
            for (std::size_t k = 0; k < rule.nodes.size(); ++k) panel += rule.weights[k] * modulus(mid + 0.5 * w * rule.nodes[k]);
            total += 0.5 * w * panel;
        }
    }
    return total;
}

TorusSweep torus_sweep(const TorusData& data, std::size_t count, std::size_t oversample, std::size_t threads) {
    data.validate();
    if (count < 2) throw std::invalid_argument("torus_sweep: count must be >= 2");
    const double n = static_cast<double>(std::max<std::size_t>(data.cutoff, 1));
    const double t_max = 1.0 / n;
    std::vector<double> times = log_grid(t_max / (n * n), t_max, count);
    const auto lin = linear_grid(0.0, t_max, count + 1);
    times.insert(times.end(), lin.begin() + 1, lin.end());
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());

    TorusSweep sweep;
    sweep.times = times;
    sweep.supnorms.resize(times.size());
    sweep.scaled.resize(times.size());
    sweep.l1_norm = torus_l1_norm(data);
    parallel_for(times.size(), threads, [&](std::size_t i) {
        sweep.supnorms[i] = torus_supnorm(data, times[i], oversample);
        sweep.scaled[i] = std::sqrt(times[i]) * sweep.supnorms[i] / sweep.l1_norm;
    });
    sweep.max_scaled = *std::max_element(sweep.scaled.begin(), sweep.scaled.end());
    return sweep;
}

}  // namespace dispersim
