#include "experiments.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <numbers>
#include <stdexcept>

#include "dispersim/decay.hpp"
#include "dispersim/evolution.hpp"
#include "dispersim/kernel.hpp"
#include "dispersim/lattice.hpp"
#include "dispersim/metric_graph.hpp"
#include "dispersim/parallel.hpp"

namespace dispersim::cli {

namespace {

constexpr double kLatticeRate = -1.0 / 3.0;
constexpr double kContinuumRate = -0.5;

std::string int_text(std::int64_t v) { return std::to_string(v); }

struct FitRequest {
    std::optional<double> t_min;
    std::optional<double> t_max;
};

FitRequest read_fit(const ParamReader& r) {
    FitRequest f;
    if (r.has("fit_t_min")) f.t_min = r.real("fit_t_min");
    if (r.has("fit_t_max")) f.t_max = r.real("fit_t_max");
    return f;
}

/// Fits norm ~ t^slope on the requested window and records it in the summary.
/// Windows with fewer than 8 usable samples are reported as skipped.
void summarize_fit(Outcome& out, const std::vector<double>& times, const std::vector<double>& norms,
                   const FitRequest& req, std::optional<double> theoretical) {
    FitWindow window{req.t_min.value_or(times.front()), req.t_max.value_or(times.back())};
    std::vector<double> ts, ns;
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (times[i] > 0.0 && times[i] >= window.t_min && times[i] <= window.t_max) {
            ts.push_back(times[i]);
            ns.push_back(norms[i]);
        }
    }
    if (theoretical) {
        out.table.meta.emplace_back("theoretical_slope", format_real(*theoretical));
        out.summary.emplace_back("theoretical_slope", format_real(*theoretical));
    }
    if (ts.size() < 8) {
        out.summary.emplace_back("fit", "skipped (fewer than 8 positive times in the window)");
        return;
    }
    const DecayFit fit = fit_decay(ts, ns, {ts.front(), ts.back()});
    out.summary.emplace_back("fit_t_min", format_real(fit.window.t_min));
    out.summary.emplace_back("fit_t_max", format_real(fit.window.t_max));
    out.summary.emplace_back("fit_samples", int_text(static_cast<std::int64_t>(fit.samples)));
    out.summary.emplace_back("fit_slope", format_real(fit.slope));
    out.summary.emplace_back("fit_intercept", format_real(fit.intercept));
    out.summary.emplace_back("fit_r_squared", format_real(fit.r_squared));
    if (theoretical) out.summary.emplace_back("fit_deviation", format_real(fit.slope - *theoretical));
}

std::size_t thread_count(const ParamReader& r, const RunContext& ctx) {
    const std::size_t configured = r.count("threads", 0);
    return ctx.threads_override > 0 ? ctx.threads_override : configured;
}

// ---------------------------------------------------------------------------
// Initial data

LatticeState lattice_datum(const ParamReader& r, std::int64_t min_site) {
    const std::string kind = r.choice("datum", {"delta", "gaussian", "values"}, "delta");
    if (kind == "delta") {
        const std::int64_t site = r.integer("site", std::max<std::int64_t>(min_site, 0));
        if (site < min_site) r.fail("site", "must be at least " + int_text(min_site));
        return LatticeState::delta(site);
    }
    if (kind == "gaussian") {
        const double center = r.real("center", std::max<double>(static_cast<double>(min_site), 0.0));
        const double width = r.positive("width", 4.0);
        const double momentum = r.real("momentum", 0.0);
        if (!std::isfinite(center) || !std::isfinite(momentum)) r.fail("center", "must be finite");
        const auto reach = static_cast<std::int64_t>(std::ceil(8.0 * width));
        std::int64_t first = static_cast<std::int64_t>(std::floor(center)) - reach;
        const std::int64_t last = static_cast<std::int64_t>(std::ceil(center)) + reach;
        first = std::max(first, min_site);
        if (last < first) r.fail("center", "gaussian lies entirely below site " + int_text(min_site));
        std::vector<cdouble> v;
        for (std::int64_t j = first; j <= last; ++j) {
            const double x = static_cast<double>(j) - center;
            v.push_back(std::exp(-x * x / (2.0 * width * width)) * std::polar(1.0, momentum * static_cast<double>(j)));
        }
        return LatticeState(first, std::move(v));
    }
    const std::int64_t offset = r.integer("offset", std::max<std::int64_t>(min_site, 0));
    if (offset < min_site) r.fail("offset", "must be at least " + int_text(min_site));
    const auto re = r.reals("values");
    const auto im = r.reals("imag", std::vector<double>(re.size(), 0.0));
    if (im.size() != re.size()) r.fail("imag", "must have as many entries as values");
    std::vector<cdouble> v;
    for (std::size_t i = 0; i < re.size(); ++i) {
        if (!std::isfinite(re[i]) || !std::isfinite(im[i])) r.fail("values", "entries must be finite");
        v.emplace_back(re[i], im[i]);
    }
    return LatticeState(offset, std::move(v));
}

struct ContinuumDatum {
    std::string kind;
    double center = 0.0;
    double width = 1.0;
    double momentum = 0.0;

    cdouble operator()(double x) const {
        const double s = (x - center) / width;
        double amp = 0.0;
        if (kind == "gaussian") {
            amp = std::exp(-0.5 * s * s);
        } else if (std::abs(s) < 1.0) {
            amp = std::exp(1.0 - 1.0 / (1.0 - s * s));
        }
        return amp * std::polar(1.0, momentum * x);
    }
};

ContinuumDatum continuum_datum(const ParamReader& r, const std::string& fallback_kind, double fallback_center,
                               double fallback_width) {
    ContinuumDatum d;
    d.kind = r.choice("datum", {"gaussian", "bump"}, fallback_kind);
    d.center = r.real("center", fallback_center);
    d.width = r.positive("width", fallback_width);
    d.momentum = r.real("momentum", 0.0);
    if (!std::isfinite(d.center) || !std::isfinite(d.momentum)) r.fail("center", "must be finite");
    return d;
}

// ---------------------------------------------------------------------------
// Shared table layouts

Table decay_table(const std::string& experiment, std::vector<std::string> extra) {
    Table t;
    t.schema = "decay";
    t.experiment = experiment;
    t.columns = {"t", "norm", "l2_norm", "mass_drift"};
    for (auto& c : extra) t.columns.push_back(std::move(c));
    return t;
}

double relative(double drift, double norm) { return norm > 0.0 ? drift / norm : drift; }

Diagnostic max_of(std::string name, const std::vector<double>& values, std::optional<double> threshold) {
    double m = 0.0;
    for (double v : values) m = std::isnan(v) || std::isnan(m) ? NAN : std::max(m, v);
    return threshold ? upper_bound(std::move(name), m, *threshold) : info(std::move(name), m);
}

Outcome trace_outcome(const std::string& experiment, const EvolutionTrace& trace, const FitRequest& fit,
                      double contamination_threshold) {
    const bool star = !trace.vertex_residuals.empty();
    Outcome out;
    out.table = decay_table(experiment, star ? std::vector<std::string>{"vertex_residual"} : std::vector<std::string>{});
    for (std::size_t i = 0; i < trace.times.size(); ++i) {
        std::vector<Cell> row{trace.times[i], trace.sup_norms[i], trace.norms[i],
                              relative(std::abs(trace.norms[i] - trace.initial_norm), trace.initial_norm)};
        if (star) row.emplace_back(trace.vertex_residuals[i]);
        out.table.add_row(std::move(row));
    }
    out.diagnostics.push_back(upper_bound("mass_drift", relative(trace.mass_drift, trace.initial_norm), 1e-10));
    out.diagnostics.push_back(upper_bound("max_step_mass_change", trace.max_step_mass_change, 1e-13));
    out.diagnostics.push_back(upper_bound("boundary_contamination", trace.boundary_contamination,
                                          contamination_threshold));
    if (star) out.diagnostics.push_back(max_of("vertex_residual", trace.vertex_residuals, 1e-8));
    summarize_fit(out, trace.times, trace.sup_norms, fit, kContinuumRate);
    return out;
}

CrankNicolsonSettings cn_settings(const ParamReader& r, const TimeGrid& grid, double h) {
    CrankNicolsonSettings s;
    s.dt = r.positive("dt", std::min(0.01, h));
    s.output_times = grid.times;
    if (grid.times.front() < 0.0) r.fail("t_min", "Crank-Nicolson runs need nonnegative times");
    return s;
}

// ---------------------------------------------------------------------------
// Experiments

Outcome kernel(const ParamReader& r, const RunContext& ctx) {
    const TimeGrid grid = r.time_grid();
    const std::int64_t j_min = r.integer("j_min", 0);
    const std::int64_t j_max = r.integer("j_max", j_min);
    const std::string method = r.choice("method", {"bessel", "quadrature"}, "bessel");
    const double tol = r.positive("tol", 1e-10);
    const std::size_t threads = thread_count(r, ctx);
    r.reject_unknown();
    if (j_max < j_min) r.fail("j_max", "must be at least j_min");
    if (j_max - j_min > 10'000'000) r.fail("j_max", "more than 1e7 sites per time");

    const std::size_t width = static_cast<std::size_t>(j_max - j_min + 1);
    std::vector<std::vector<QuadratureResult>> values(grid.times.size());
    parallel_for(grid.times.size(), threads, [&](std::size_t i) {
        const double t = grid.times[i];
        auto& slot = values[i];
        slot.resize(width);
        if (method == "bessel") {
            const auto jabs = static_cast<std::size_t>(std::max(std::abs(j_min), std::abs(j_max)));
            const auto row = kernel_row(t, jabs);
            for (std::size_t k = 0; k < width; ++k) {
                const auto j = j_min + static_cast<std::int64_t>(k);
                slot[k].value = row[static_cast<std::size_t>(std::abs(j))];
            }
        } else {
            for (std::size_t k = 0; k < width; ++k) {
                slot[k] = kernel_quadrature({t, j_min + static_cast<std::int64_t>(k)}, tol);
            }
        }
    });

    Outcome out;
    out.table.schema = "kernel";
    out.table.experiment = "kernel";
    out.table.columns = {"t", "j", "re", "im", "modulus", "error_estimate"};
    double worst = 0.0;
    for (std::size_t i = 0; i < grid.times.size(); ++i) {
        for (std::size_t k = 0; k < width; ++k) {
            const auto& q = values[i][k];
            worst = std::max(worst, q.error_estimate);
            out.table.add_row({grid.times[i], j_min + static_cast<std::int64_t>(k), q.value.real(), q.value.imag(),
                               std::abs(q.value), q.error_estimate});
        }
    }
    if (method == "quadrature") {
        out.diagnostics.push_back(upper_bound("quadrature_error_estimate", worst, tol));
    }
    out.summary.emplace_back("method", method);
    return out;
}

Outcome line(const ParamReader& r, const RunContext& ctx) {
    const LatticeState phi = lattice_datum(r, std::numeric_limits<std::int64_t>::min() / 4);
    const TimeGrid grid = r.time_grid();
    LineEvolutionOptions options;
    options.max_ring = r.count("max_ring", options.max_ring);
    const FitRequest fit = read_fit(r);
    const std::size_t threads = thread_count(r, ctx);
    r.reject_unknown();

    std::vector<EvolutionResult> results(grid.times.size(), EvolutionResult{phi});
    parallel_for(grid.times.size(), threads,
                 [&](std::size_t i) { results[i] = evolve_line(phi, grid.times[i], options); });

    const double norm0 = lp_norm(phi, 2.0);
    Outcome out;
    out.table = decay_table("line", {"boundary_amplitude"});
    std::vector<double> sups, drifts, edges;
    for (std::size_t i = 0; i < results.size(); ++i) {
        const auto& res = results[i];
        sups.push_back(lp_norm(res.state, kInfinity));
        drifts.push_back(relative(res.mass_drift, norm0));
        edges.push_back(res.boundary_amplitude);
        out.table.add_row({grid.times[i], sups.back(), lp_norm(res.state, 2.0), drifts.back(), edges.back()});
    }
    out.diagnostics.push_back(max_of("mass_drift", drifts, 1e-10));
    out.diagnostics.push_back(max_of("boundary_amplitude", edges, 1e-10));
    summarize_fit(out, grid.times, sups, fit, kLatticeRate);
    return out;
}

Outcome halfline(const ParamReader& r, const RunContext& ctx) {
    const std::string bc_name = r.choice("boundary", {"dirichlet", "neumann"}, "dirichlet");
    const LatticeState phi = lattice_datum(r, 1);
    const TimeGrid grid = r.time_grid();
    LineEvolutionOptions options;
    options.max_ring = r.count("max_ring", options.max_ring);
    const FitRequest fit = read_fit(r);
    const std::size_t threads = thread_count(r, ctx);
    r.reject_unknown();
    const auto bc = bc_name == "dirichlet" ? BoundaryCondition::Dirichlet : BoundaryCondition::Neumann;

    std::vector<EvolutionResult> results(grid.times.size(), EvolutionResult{phi});
    parallel_for(grid.times.size(), threads,
                 [&](std::size_t i) { results[i] = evolve_halfline(phi, grid.times[i], bc, options); });

    const double norm0 = lp_norm(phi, 2.0);
    Outcome out;
    out.table = decay_table("halfline", {"boundary_amplitude", "boundary_residual"});
    std::vector<double> sups, drifts, edges, residuals;
    for (std::size_t i = 0; i < results.size(); ++i) {
        const auto& s = results[i].state;
        const LatticeState interior = s.window(1, std::max<std::int64_t>(1, s.last()));
        sups.push_back(lp_norm(interior, kInfinity));
        drifts.push_back(relative(results[i].mass_drift, norm0));
        edges.push_back(results[i].boundary_amplitude);
        residuals.push_back(bc == BoundaryCondition::Dirichlet ? std::abs(s(0)) : std::abs(s(0) - s(1)));
        out.table.add_row({grid.times[i], sups.back(), lp_norm(interior, 2.0), drifts.back(), edges.back(),
                           residuals.back()});
    }
    out.diagnostics.push_back(max_of("mass_drift", drifts, 1e-10));
    out.diagnostics.push_back(max_of("boundary_amplitude", edges, 1e-10));
    out.diagnostics.push_back(max_of("boundary_residual", residuals, 1e-10));
    out.summary.emplace_back("boundary", bc_name);
    summarize_fit(out, grid.times, sups, fit, kLatticeRate);
    return out;
}

Outcome coupled(const ParamReader& r, const RunContext& ctx) {
    CoupledLatticeSpec spec;
    spec.b1 = r.positive("b1", 1.0);
    spec.b2 = r.positive("b2", 1.0);
    spec.truncation = r.integer("truncation", 2000);
    if (spec.truncation < 2) r.fail("truncation", "must be at least 2");
    const LatticeState phi = lattice_datum(r, -spec.truncation);
    if (phi.last() > spec.truncation) r.fail("datum", "datum extends beyond the truncation");
    const TimeGrid grid = r.time_grid();
    const FitRequest fit = read_fit(r);
    const std::size_t threads = thread_count(r, ctx);
    r.reject_unknown();

    // Warm the eigendecomposition cache once instead of racing on it.
    (void)coupled_spectrum(spec);
    std::vector<EvolutionResult> results(grid.times.size(), EvolutionResult{phi});
    parallel_for(grid.times.size(), threads,
                 [&](std::size_t i) { results[i] = evolve_coupled(spec, phi, grid.times[i]); });

    LatticeState stored = phi;
    if (phi.offset() <= 0 && phi.last() >= 0) {
        auto v = phi.values();
        v[static_cast<std::size_t>(-phi.offset())] = 0.0;
        stored = LatticeState(phi.offset(), std::move(v));
    }
    const double norm0 = lp_norm(stored, 2.0);
    Outcome out;
    out.table = decay_table("coupled", {"boundary_amplitude"});
    std::vector<double> sups, drifts, edges;
    for (std::size_t i = 0; i < results.size(); ++i) {
        const auto& res = results[i];
        sups.push_back(lp_norm(res.state, kInfinity));
        drifts.push_back(relative(res.mass_drift, norm0));
        edges.push_back(res.boundary_amplitude);
        out.table.add_row({grid.times[i], sups.back(), lp_norm(res.state, 2.0), drifts.back(), edges.back()});
    }
    out.diagnostics.push_back(max_of("mass_drift", drifts, 1e-9));
    out.diagnostics.push_back(max_of("boundary_amplitude", edges, 1e-10));
    summarize_fit(out, grid.times, sups, fit, kLatticeRate);
    return out;
}

Outcome stepline(const ParamReader& r, const RunContext& /*ctx*/) {
    StepCoefficient sigma;
    sigma.values = r.reals("sigma", {1.0});
    sigma.breakpoints = r.has("breakpoints") ? r.reals("breakpoints") : std::vector<double>{};
    const double h = r.positive("h", 0.02);
    const double half_length = r.positive("half_length", 200.0);
    const ContinuumDatum datum = continuum_datum(r, "gaussian", 0.0, 1.0);
    const TimeGrid grid = r.time_grid();
    const CrankNicolsonSettings settings = cn_settings(r, grid, h);
    const double contamination = r.positive("contamination_threshold", 1e-2);
    const FitRequest fit = read_fit(r);
    (void)r.count("threads", 0);
    r.reject_unknown();
    try {
        sigma.validate();
    } catch (const std::invalid_argument& e) {
        r.fail("sigma", e.what());
    }

    const LineGrid lg = LineGrid::centered(half_length, h);
    std::vector<cdouble> phi(lg.size);
    for (std::size_t k = 0; k < lg.size; ++k) phi[k] = datum(lg.x(k));
    const LineTrace trace = evolve_stepline(sigma, lg, phi, settings);
    Outcome out = trace_outcome("stepline", trace, fit, contamination);
    out.summary.emplace_back("grid_points", int_text(static_cast<std::int64_t>(lg.size)));
    return out;
}

Outcome delta_line(const ParamReader& r, const RunContext& /*ctx*/) {
    DeltaPotentialSpec spec;
    spec.strengths = r.has("strengths") ? r.reals("strengths") : std::vector<double>{};
    spec.positions = r.has("positions") ? r.reals("positions") : std::vector<double>{};
    const double h = r.positive("h", 0.02);
    const double half_length = r.positive("half_length", 200.0);
    const bool project = r.flag("project", false);
    const ContinuumDatum datum = continuum_datum(r, "gaussian", 0.0, 1.0);
    const TimeGrid grid = r.time_grid();
    const CrankNicolsonSettings settings = cn_settings(r, grid, h);
    const double contamination = r.positive("contamination_threshold", 1e-2);
    const FitRequest fit = read_fit(r);
    (void)r.count("threads", 0);
    r.reject_unknown();
    if (spec.strengths.size() != spec.positions.size()) r.fail("positions", "needs one position per strength");
    try {
        spec.validate();
    } catch (const std::invalid_argument& e) {
        r.fail("positions", e.what());
    }

    const LineGrid lg = LineGrid::centered(half_length, h);
    std::vector<cdouble> phi(lg.size);
    for (std::size_t k = 0; k < lg.size; ++k) phi[k] = datum(lg.x(k));
    const auto states = bound_states(spec, lg);
    std::vector<double> overlaps;
    for (const auto& b : states) overlaps.push_back(std::abs(grid_overlap(lg, b, phi)));
    if (project) phi = project_continuous(lg, phi, states);

    const LineTrace trace = evolve_delta_line(spec, lg, phi, settings);
    Outcome out = trace_outcome("delta-line", trace, fit, contamination);
    out.summary.emplace_back("projected", project ? "true" : "false");
    out.summary.emplace_back("bound_states", int_text(static_cast<std::int64_t>(states.size())));
    for (std::size_t i = 0; i < states.size(); ++i) {
        const std::string p = "bound_state." + std::to_string(i) + ".";
        double peak = 0.0;
        for (double v : states[i].profile) peak = std::max(peak, std::abs(v));
        out.summary.emplace_back(p + "energy", format_real(states[i].energy));
        out.summary.emplace_back(p + "overlap", format_real(overlaps[i]));
        out.summary.emplace_back(p + "plateau_bound", format_real(0.5 * overlaps[i] * peak));
    }
    return out;
}

Outcome star(const ParamReader& r, const RunContext& /*ctx*/) {
    StarGraphSpec spec;
    const auto edges = r.integer("edges", 3);
    if (edges < 2) r.fail("edges", "a star needs at least 2 edges");
    spec.edge_count = static_cast<std::size_t>(edges);
    spec.edge_length = r.positive("edge_length", 100.0);
    const std::string vertex = r.choice("vertex", {"kirchhoff", "delta", "delta-prime"}, "kirchhoff");
    if (vertex == "delta") {
        spec.vertex = DeltaCoupling{r.real("strength")};
    } else if (vertex == "delta-prime") {
        const double beta = r.real("strength");
        if (beta == 0.0 || !std::isfinite(beta)) r.fail("strength", "delta-prime needs a finite nonzero strength");
        spec.vertex = DeltaPrimeCoupling{beta};
    }
    const double h = r.positive("h", 0.02);
    const std::int64_t datum_edge = r.integer("datum_edge", 0);
    if (datum_edge < 0 || datum_edge >= edges) r.fail("datum_edge", "no such edge");
    const ContinuumDatum datum = continuum_datum(r, "bump", 3.0, 2.5);
    const TimeGrid grid = r.time_grid();
    const CrankNicolsonSettings settings = cn_settings(r, grid, h);
    const double contamination = r.positive("contamination_threshold", 1e-2);
    const FitRequest fit = read_fit(r);
    (void)r.count("threads", 0);
    r.reject_unknown();

    const std::size_t n = star_edge_samples(spec, h);
    StarState phi;
    phi.edges.assign(spec.edge_count, std::vector<cdouble>(n, 0.0));
    for (std::size_t k = 0; k < n; ++k) {
        phi.edges[static_cast<std::size_t>(datum_edge)][k] = datum(static_cast<double>(k) * h);
    }
    const StarTrace trace = evolve_star(spec, h, phi, settings);
    Outcome out = trace_outcome("star", trace, fit, contamination);
    out.summary.emplace_back("vertex", vertex);
    return out;
}

Outcome torus(const ParamReader& r, const RunContext& ctx) {
    const auto cutoff = r.integer("cutoff");
    if (cutoff < 1) r.fail("cutoff", "must be at least 1");
    TorusData data = TorusData::ones(static_cast<std::size_t>(cutoff));
    if (r.has("coefficients") && r.text("coefficients", "ones") != "ones") {
        const auto re = r.reals("coefficients");
        if (re.size() != data.coefficients.size()) {
            r.fail("coefficients", "expected 2*cutoff+1 = " + int_text(2 * cutoff + 1) + " entries");
        }
        for (std::size_t i = 0; i < re.size(); ++i) data.coefficients[i] = re[i];
    }
    const std::size_t count = r.count("count", 64);
    const std::size_t oversample = r.count("oversample", 8);
    const std::size_t threads = thread_count(r, ctx);
    r.reject_unknown();
    if (count < 2) r.fail("count", "must be at least 2");
    if (oversample < 8) r.fail("oversample", "must be at least 8");
    try {
        data.validate();
    } catch (const std::invalid_argument& e) {
        r.fail("coefficients", e.what());
    }

    const TorusSweep sweep = torus_sweep(data, count, oversample, threads);
    Outcome out;
    out.table.schema = "torus";
    out.table.experiment = "torus";
    out.table.columns = {"t", "supnorm", "scaled"};
    for (std::size_t i = 0; i < sweep.times.size(); ++i) {
        out.table.add_row({sweep.times[i], sweep.supnorms[i], sweep.scaled[i]});
    }
    out.summary.emplace_back("l1_norm", format_real(sweep.l1_norm));
    out.summary.emplace_back("max_scaled", format_real(sweep.max_scaled));
    out.diagnostics.push_back(info("max_scaled", sweep.max_scaled));
    return out;
}

Outcome alphap(const ParamReader& r, const RunContext& ctx) {
    const double p = r.real("p");
    if (!(p >= 1.0)) r.fail("p", "must be at least 1 (use inf for the sup norm)");
    const TimeGrid grid = r.time_grid();
    if (grid.times.front() <= 0.0) r.fail("t_min", "times must be positive");
    if (grid.times.back() > kMaxKernelTime) r.fail("t_max", "exceeds the kernel time cap " + format_real(kMaxKernelTime));
    const FitRequest fit = read_fit(r);
    const std::size_t threads = thread_count(r, ctx);
    r.reject_unknown();

    const auto samples = kernel_lp_norms(p, grid.times, threads);
    Outcome out;
    out.table.schema = "decay";
    out.table.experiment = "alphap";
    out.table.columns = {"t", "norm", "tail_fraction"};
    std::vector<double> norms, tails;
    for (const auto& s : samples) {
        norms.push_back(s.norm);
        tails.push_back(s.tail_fraction);
        out.table.add_row({s.t, s.norm, s.tail_fraction});
    }
    out.diagnostics.push_back(max_of("tail_fraction", tails, 1e-10));
    std::optional<double> theory;
    if (p >= 2.0) theory = -alpha_p_theory(p);
    out.summary.emplace_back("p", format_real(p));
    summarize_fit(out, grid.times, norms, fit, theory);
    return out;
}

Outcome fit(const ParamReader& r, const RunContext& ctx) {
    std::filesystem::path input = r.text("input", "");
    if (input.empty()) r.fail("input", "required key missing");
    if (input.is_relative() && ctx.config != nullptr) input = ctx.config->base_dir() / input;
    const std::string time_column = r.text("time_column", "t");
    const std::string column = r.text("column", "norm");
    const double t_min = r.real("t_min", 0.0);
    const double t_max = r.real("t_max", kInfinity);
    (void)r.count("threads", 0);
    r.reject_unknown();

    CsvFile csv;
    try {
        csv = read_csv(input);
    } catch (const std::invalid_argument& e) {
        r.fail("input", e.what());
    }
    std::vector<double> ts, ns;
    try {
        ts = csv.numeric_column(time_column);
        ns = csv.numeric_column(column);
    } catch (const std::invalid_argument& e) {
        r.fail("column", e.what());
    }
    const DecayFit f = fit_decay(ts, ns, {t_min, t_max});

    Outcome out;
    out.table.schema = "fit";
    out.table.experiment = "fit";
    out.table.columns = {"column", "slope", "intercept", "r_squared", "samples", "t_min", "t_max"};
    out.table.add_row({column, f.slope, f.intercept, f.r_squared, static_cast<std::int64_t>(f.samples),
                       f.window.t_min, f.window.t_max});
    out.summary.emplace_back("fit_slope", format_real(f.slope));
    out.summary.emplace_back("fit_r_squared", format_real(f.r_squared));
    if (auto it = csv.meta.find("theoretical_slope"); it != csv.meta.end()) {
        out.summary.emplace_back("theoretical_slope", it->second);
    }
    return out;
}

Outcome vdc(const ParamReader& r, const RunContext& /*ctx*/) {
    const auto sizes = r.reals("grid_sizes", {1000, 10000, 100000, 1000000});
    (void)r.count("threads", 0);
    r.reject_unknown();
    Outcome out;
    out.table.schema = "vdc";
    out.table.experiment = "vdc";
    out.table.columns = {"grid_size", "margin", "deficit"};
    for (double s : sizes) {
        if (!(s >= 1000.0) || s != std::floor(s) || s > 1e9) r.fail("grid_sizes", "entries must be integers in [1000, 1e9]");
        const double m = phase_vdc_margin(static_cast<std::size_t>(s));
        out.table.add_row({static_cast<std::int64_t>(s), m, 2.0 - m});
    }
    return out;
}

Outcome oscint(const ParamReader& r, const RunContext& ctx) {
    const auto as = r.reals("a", {0.25, 0.5, 0.75, 1.0});
    const auto ys = r.reals("y", {-4, -3, -2, -1, 0, 1, 2, 3, 4});
    const auto zs = r.reals("z", {-4, -3, -2, -1, 0, 1, 2, 3, 4});
    const auto ts = r.reals("t", {1, 10, 100, 1000});
    const double tol = r.positive("tol", 1e-10);
    const std::size_t threads = thread_count(r, ctx);
    r.reject_unknown();
    for (double a : as) {
        if (!(a > 0.0 && a <= 1.0)) r.fail("a", "entries must lie in (0, 1]");
    }

    struct Point {
        OscIntegralParams params;
        QuadratureResult result;
    };
    std::vector<Point> points;
    for (double a : as) {
        for (double t : ts) {
            for (double y : ys) {
                for (double z : zs) points.push_back({{t, y, z, a}, {}});
            }
        }
    }
    parallel_for(points.size(), threads, [&](std::size_t i) {
        points[i].result = coupled_oscillatory_integral(points[i].params, tol);
    });

    Outcome out;
    out.table.schema = "oscint";
    out.table.experiment = "oscint";
    out.table.columns = {"a", "y", "z", "t", "re", "im", "modulus", "scaled", "error_estimate", "panels"};
    double worst = 0.0;
    std::map<std::pair<double, double>, double> level_max;
    for (const auto& pt : points) {
        const auto& q = pt.result;
        const double modulus = std::abs(q.value);
        const double scaled = modulus * std::cbrt(1.0 + std::abs(pt.params.t));
        auto& m = level_max[{pt.params.a, pt.params.t}];
        m = std::max(m, scaled);
        worst = std::max(worst, q.error_estimate);
        out.table.add_row({pt.params.a, pt.params.y, pt.params.z, pt.params.t, q.value.real(), q.value.imag(), modulus,
                           scaled, q.error_estimate, static_cast<std::int64_t>(q.panels)});
    }
    out.diagnostics.push_back(upper_bound("quadrature_error_estimate", worst, tol));
    for (double a : as) {
        double overall = 0.0;
        for (double t : ts) overall = std::max(overall, level_max[{a, t}]);
        const std::string p = "a" + format_real(a);
        out.summary.emplace_back("scaled_max." + p, format_real(overall));
        for (double t : ts) {
            out.summary.emplace_back("scaled_max." + p + ".t" + format_real(t), format_real(level_max[{a, t}]));
        }
    }
    return out;
}

DenseMatrix read_matrix(const ParamReader& r, const std::string& key, std::size_t d) {
    const auto v = r.reals(key);
    if (v.size() != d * d) r.fail(key, "expected degree^2 = " + std::to_string(d * d) + " row-major entries");
    DenseMatrix m = DenseMatrix::zeros(d, d);
    m.data = v;
    return m;
}

Outcome coupling_check(const ParamReader& r, const RunContext& /*ctx*/) {
    const std::string preset =
        r.choice("preset", {"explicit", "kirchhoff", "delta", "delta-prime", "dirichlet", "neumann"}, "explicit");
    const auto degree = r.integer("degree");
    if (degree < 1 || degree > 4096) r.fail("degree", "must lie in [1, 4096]");
    const auto d = static_cast<std::size_t>(degree);
    VertexCoupling vc;
    if (preset == "explicit") {
        vc.a = read_matrix(r, "a", d);
        vc.b = read_matrix(r, "b", d);
    } else if (preset == "kirchhoff") {
        vc = kirchhoff_coupling(d);
    } else if (preset == "delta") {
        vc = delta_coupling(d, r.real("strength"));
    } else if (preset == "delta-prime") {
        vc = delta_prime_coupling(d, r.real("strength"));
    } else if (preset == "dirichlet") {
        vc = dirichlet_coupling(d);
    } else {
        vc = neumann_coupling(d);
    }
    (void)r.count("threads", 0);
    r.reject_unknown();

    const CouplingCheck check = validate_coupling(vc);
    Outcome out;
    out.table.schema = "coupling";
    out.table.experiment = "coupling-check";
    out.table.columns = {"degree", "valid", "rank", "symmetry_defect", "diagnostic"};
    out.table.add_row({degree, std::int64_t{check.valid ? 1 : 0}, static_cast<std::int64_t>(check.rank),
                       check.symmetry_defect, check.diagnostic});
    out.summary.emplace_back("preset", preset);
    out.summary.emplace_back("verdict", check.valid ? "valid" : "invalid");
    out.summary.emplace_back("diagnostic", check.diagnostic);
    return out;
}

using Runner = Outcome (*)(const ParamReader&, const RunContext&);

const std::vector<std::pair<std::string, Runner>>& registry() {
    static const std::vector<std::pair<std::string, Runner>> table = {
        {"kernel", kernel},       {"line", line},     {"halfline", halfline}, {"coupled", coupled},
        {"stepline", stepline},   {"star", star},     {"delta-line", delta_line}, {"torus", torus},
        {"alphap", alphap},       {"fit", fit},       {"vdc", vdc},           {"oscint", oscint},
        {"coupling-check", coupling_check},
    };
    return table;
}

}  // namespace

Diagnostic upper_bound(std::string name, double value, double threshold) {
    return Diagnostic{std::move(name), value, threshold, !(value <= threshold)};
}

Diagnostic info(std::string name, double value) { return Diagnostic{std::move(name), value, std::nullopt, false}; }

const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> n;
        for (const auto& [name, _] : registry()) n.push_back(name);
        return n;
    }();
    return names;
}

bool is_experiment(const std::string& name) {
    const auto& n = experiment_names();
    return std::find(n.begin(), n.end(), name) != n.end();
}

Outcome run_experiment(const std::string& name, const RunContext& context) {
    if (context.config == nullptr) throw std::logic_error("run_experiment needs a config");
    for (const auto& [n, runner] : registry()) {
        if (n == name) {
            const ParamReader reader(context.config->section(name));
            return runner(reader, context);
        }
    }
    throw ConfigError(0, name, "unknown subcommand");
}

}  // namespace dispersim::cli
