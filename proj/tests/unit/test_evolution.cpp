#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "dispersim/errors.hpp"
#include "dispersim/evolution.hpp"
#include "dispersim/kernel.hpp"
#include "support.hpp"

using namespace dispersim;

namespace {

LatticeState odd_extension(const LatticeState& half) {
    const std::int64_t last = half.last();
    std::vector<cdouble> v(static_cast<std::size_t>(2 * last + 1));
    for (std::int64_t j = 1; j <= last; ++j) {
        v[static_cast<std::size_t>(last + j)] = half(j);
        v[static_cast<std::size_t>(last - j)] = -half(j);
    }
    return LatticeState(-last, std::move(v));
}

double difference_on(const LatticeState& u, const LatticeState& v, std::int64_t first, std::int64_t last) {
    double d = 0.0;
    for (std::int64_t j = first; j <= last; ++j) d = std::max(d, std::abs(u(j) - v(j)));
    return d;
}

}  // namespace

TEST_CASE("evolve_line at t = 0 is the identity") {
    const auto phi = testing::random_state(-5, 40);
    const auto r = evolve_line(phi, 0.0);
    CHECK(max_abs_difference(r.state, phi) <= 1e-13);
    CHECK(r.mass_drift == 0.0);
    CHECK_THROWS_AS(evolve_line(phi, NAN), std::invalid_argument);
}

TEST_CASE("delta datum reproduces the kernel row") {
    for (double t : {0.7, 5.0, 40.0, 300.0}) {
        const auto r = evolve_line(LatticeState::delta(0), t);
        CAPTURE(t);
        double err = 0.0;
        for (std::int64_t j = r.state.offset(); j <= r.state.last(); ++j) {
            err = std::max(err, std::abs(r.state(j) - kernel_bessel({t, j})));
        }
        CHECK(err <= 1e-9);
        CHECK(r.boundary_amplitude <= 1e-12);
        CHECK(r.truncation_margin >= 0);
    }
}

TEST_CASE("window covers the propagation margin") {
    const auto phi = testing::random_state(3, 10);
    const double t = 25.0;
    const auto r = evolve_line(phi, t);
    const auto margin = propagation_margin(1.0, t);
    CHECK(margin >= 50);
    CHECK(r.state.offset() == phi.offset() - margin);
    CHECK(r.state.last() == phi.last() + margin);
}

TEST_CASE("evolve_line conserves mass on random data") {
    for (int trial = 0; trial < 50; ++trial) {
        const auto phi = testing::random_state(testing::uniform_int(-50, 50), 1 + testing::uniform_int(0, 80));
        const double t = testing::uniform(-200.0, 200.0);
        const auto r = evolve_line(phi, t);
        CAPTURE(t);
        CHECK(r.mass_drift <= 1e-10);
    }
}

TEST_CASE("evolve_line: semigroup, time reversal, linearity") {
    for (int trial = 0; trial < 10; ++trial) {
        const auto phi = testing::random_state(testing::uniform_int(-10, 10), 1 + testing::uniform_int(0, 20));
        const double t1 = testing::uniform(0.0, 30.0);
        const double t2 = testing::uniform(-30.0, 30.0);

        const auto two_steps = evolve_line(evolve_line(phi, t1).state, t2).state;
        const auto one_step = evolve_line(phi, t1 + t2).state;
        CHECK(max_abs_difference(two_steps, one_step) <= 1e-9);

        const auto back = evolve_line(evolve_line(phi, t1).state.conj(), t1).state;
        CHECK(max_abs_difference(back, phi.conj()) <= 1e-9);

        const auto psi = testing::random_state(testing::uniform_int(-10, 10), 1 + testing::uniform_int(0, 20));
        const cdouble a(testing::uniform(-2, 2), testing::uniform(-2, 2));
        const cdouble b(testing::uniform(-2, 2), testing::uniform(-2, 2));
        const auto lhs = evolve_line(linear_combination(a, phi, b, psi), t2).state;
        const auto rhs = linear_combination(a, evolve_line(phi, t2).state, b, evolve_line(psi, t2).state);
        CHECK(max_abs_difference(lhs, rhs) <= 1e-12 * (lp_norm(lhs, kInfinity) + 1.0));
    }
}

TEST_CASE("ring cap raises ResourceLimitError") {
    CHECK_THROWS_AS(evolve_line(LatticeState::delta(0), 1000.0, {256}), ResourceLimitError);
}

TEST_CASE("half-line Dirichlet by odd images") {
    for (int trial = 0; trial < 20; ++trial) {
        const auto phi = testing::random_state(1 + testing::uniform_int(0, 5), 1 + testing::uniform_int(0, 30));
        const double t = testing::uniform(0.1, 80.0);
        const auto r = evolve_halfline(phi, t, BoundaryCondition::Dirichlet);
        CHECK(r.state.offset() == 0);
        CHECK(std::abs(r.state(0)) <= 1e-10);
        CHECK(r.mass_drift <= 1e-10);

        const auto whole = evolve_line(odd_extension(phi), t).state;
        CHECK(difference_on(r.state, whole, 1, r.state.last()) <= 1e-12);
    }
}

TEST_CASE("half-line Neumann keeps u(0) = u(1)") {
    for (double t : {0.5, 3.0, 17.0, 150.0}) {
        const auto r = evolve_halfline(LatticeState::delta(1), t, BoundaryCondition::Neumann);
        CHECK(std::abs(r.state(0) - r.state(1)) <= 1e-10);
        CHECK(r.mass_drift <= 1e-10);
    }
    for (int trial = 0; trial < 10; ++trial) {
        const auto phi = testing::random_state(1, 1 + testing::uniform_int(0, 25));
        const auto r = evolve_halfline(phi, testing::uniform(-50.0, 50.0), BoundaryCondition::Neumann);
        CHECK(std::abs(r.state(0) - r.state(1)) <= 1e-10);
    }
}

TEST_CASE("half-line rejects data at or below the boundary") {
    CHECK_THROWS_AS(evolve_halfline(LatticeState::delta(0), 1.0, BoundaryCondition::Dirichlet),
                    std::invalid_argument);
    CHECK_THROWS_AS(evolve_halfline(LatticeState(-1, {1.0, 1.0, 1.0}), 1.0, BoundaryCondition::Neumann),
                    std::invalid_argument);
}

TEST_CASE("coupled system with equal speeds and odd data is the Dirichlet half-line") {
    const CoupledLatticeSpec spec{1.0, 1.0, 300};
    for (int trial = 0; trial < 10; ++trial) {
        const auto half = testing::random_state(1, 1 + testing::uniform_int(0, 15));
        const double t = testing::uniform(0.5, 40.0);
        const auto coupled = evolve_coupled(spec, odd_extension(half), t);
        const auto dirichlet = evolve_halfline(half, t, BoundaryCondition::Dirichlet);
        CAPTURE(t);
        CHECK(difference_on(coupled.state, dirichlet.state, 1, dirichlet.state.last()) <= 1e-8);
        CHECK(std::abs(coupled.state(0)) <= 1e-10);
    }
}

TEST_CASE("coupled evolution: identity, mass, margin accounting") {
    const CoupledLatticeSpec spec{1.0, 2.0, 400};
    const auto phi = testing::random_state(-20, 41);

    const auto still = evolve_coupled(spec, phi, 0.0);
    for (std::int64_t j = -20; j <= 20; ++j) {
        if (j != 0) CHECK(std::abs(still.state(j) - phi(j)) <= 1e-12);
    }

    for (int trial = 0; trial < 50; ++trial) {
        const auto data = testing::random_state(testing::uniform_int(-40, 20), 1 + testing::uniform_int(0, 20));
        const auto r = evolve_coupled(spec, data, testing::uniform(-60.0, 60.0));
        CHECK(r.mass_drift <= 1e-9);
        CHECK(r.truncation_margin >= 0);
        CHECK(r.boundary_amplitude <= 1e-12);
    }

    CHECK_THROWS_AS(evolve_coupled(spec, LatticeState::delta(-390), 50.0), TruncationError);
    CHECK_THROWS_AS(evolve_coupled({1.0, 1.0, 4001}, LatticeState::delta(1), 1.0), ResourceLimitError);
    CHECK_THROWS_AS(evolve_coupled({0.0, 1.0, 40}, LatticeState::delta(1), 1.0), std::invalid_argument);
}

TEST_CASE("coupled evolution: time reversal and linearity") {
    const CoupledLatticeSpec spec{0.7, 1.6, 250};
    const auto phi = testing::random_state(-8, 17);
    const auto psi = testing::random_state(-3, 9);
    const double t = 12.5;

    const auto fwd = evolve_coupled(spec, phi, t).state;
    // Eigensolver rounding leaves ~1e-15 noise on every site; drop it so the
    // reversed datum passes the margin check.
    const auto back = evolve_coupled(spec, fwd.trimmed(1e-13).conj(), t).state;
    double err = 0.0;
    for (std::int64_t j = -30; j <= 30; ++j) {
        if (j != 0) err = std::max(err, std::abs(back(j) - std::conj(phi(j))));
    }
    CHECK(err <= 1e-9);

    const cdouble a(0.3, -1.1), b(-2.0, 0.4);
    const auto lhs = evolve_coupled(spec, linear_combination(a, phi, b, psi), t).state;
    const auto rhs = linear_combination(a, fwd, b, evolve_coupled(spec, psi, t).state);
    CHECK(max_abs_difference(lhs, rhs) <= 1e-12 * lp_norm(lhs, kInfinity) + 1e-14);
}

TEST_CASE("coupled spectrum is negative semidefinite") {
    for (int trial = 0; trial < 5; ++trial) {
        const CoupledLatticeSpec spec{testing::uniform(0.3, 3.0), testing::uniform(0.3, 3.0),
                                      testing::uniform_int(5, 200)};
        const auto eig = coupled_spectrum(spec);
        CHECK(eig.back() <= 1e-12);
        const double s = std::max({1.0 / (spec.b1 * spec.b1), 1.0 / (spec.b2 * spec.b2),
                                   1.0 / (spec.b1 * spec.b1 + spec.b2 * spec.b2)});
        CHECK(eig.front() >= -4.0 * s - 1e-12);
    }
    clear_coupled_cache();
}
