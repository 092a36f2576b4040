#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <vector>

#include "fracperiod/energy.hpp"
#include "fracperiod/fractional_operator.hpp"
#include "fracperiod/solver.hpp"
#include "fracperiod/torus.hpp"

using namespace fracperiod;

namespace {

const TorusConfig kCfg = TorusConfig::checked(2.0 * kPi, 2, 1.0, 0.5, 2.0);
const ModeLattice kLat = ModeLattice::cubic(2, 5);
const Nonlinearity kRat = Nonlinearity::rational_odd(-1.5);
const double kRootHalf = std::sqrt(0.5);

bool is_constant_pair(const FourierField& u, double c, double tol) {
    const FourierField plus = constant_field(u.lattice(), kCfg, c);
    FourierField d = u;
    d -= plus;
    if (l2_norm(d) <= tol * std::sqrt(kCfg.volume())) return true;
    FourierField s = u;
    s += plus;
    return l2_norm(s) <= tol * std::sqrt(kCfg.volume());
}

}  // namespace

TEST_CASE("options are validated") {
    SolverOptions opts;
    CHECK_NOTHROW(opts.validate());
    opts.gradient_tolerance = 0.0;
    CHECK_THROWS_AS(opts.validate(), ParameterError);
    opts = SolverOptions{};
    opts.linear_tolerance = 1.0;
    CHECK_THROWS_AS(opts.validate(), ParameterError);
    opts = SolverOptions{};
    opts.seed_amplitudes = {};
    CHECK_THROWS_AS(opts.validate(), ParameterError);
    opts = SolverOptions{};
    opts.seed_amplitudes = {0.5, -1.0};
    CHECK_THROWS_AS(opts.validate(), ParameterError);
}

TEST_CASE("newton lands on the constant branch from constant seeds") {
    // Constants solve λ·c = λ∞·c + f(c); with λ = m^{2s} = 1, λ∞ = 2 and
    // f = -1.5t/(1+t²) the non-trivial roots are c = ±1/√2.
    SolverOptions opts;
    for (double seed : {0.6, -0.6}) {
        const FourierField init = constant_field(kLat, kCfg, seed);
        const SolutionRecord rec = solve_newton(kRat, kCfg, init, opts);
        CHECK(rec.converged);
        CHECK(rec.gradient_norm <= 1e-10);
        CHECK(rec.newton_iterations <= 12);
        const double c = seed > 0 ? kRootHalf : -kRootHalf;
        const FourierField expect = constant_field(kLat, kCfg, c);
        FourierField d = rec.u;
        d -= expect;
        CHECK(l2_norm(d) <= 1e-8 * std::sqrt(kCfg.volume()));
    }
}

TEST_CASE("linear problem needs at most two newton iterations") {
    // f ≡ 0 with non-resonant λ∞: the Hessian is constant and diagonal, the
    // preconditioned operator is ±identity, so one exact step reaches u = 0.
    Rng rng(4242);
    SolverOptions opts;
    const Nonlinearity zero = Nonlinearity::zero();
    for (int trial = 0; trial < 20; ++trial) {
        const FourierField init = random_real_field(kLat, rng, 0.7);
        const SolutionRecord rec = solve_newton(zero, kCfg, init, opts);
        CHECK(rec.converged);
        CHECK(rec.newton_iterations <= 2);
        CHECK(rec.l2 <= 1e-9);
    }
}

TEST_CASE("direct minimization finds the global minimizer pair") {
    // λ∞ = 0.5 < λ₁ = 1, f = 0.6t/(1+t²): minimizers are the constants
    // c = ±√0.2.
    const TorusConfig cfg = TorusConfig::checked(2.0 * kPi, 2, 1.0, 0.5, 0.5);
    const Nonlinearity nl = Nonlinearity::rational_odd(0.6);
    SolverOptions opts;
    const double c = std::sqrt(0.2);
    for (double sign : {1.0, -1.0}) {
        const FourierField seed = constant_field(kLat, cfg, sign * 0.1);
        const SolutionRecord rec = solve_direct_min(nl, cfg, kLat, opts, &seed);
        CHECK(rec.converged);
        CHECK(rec.gradient_norm <= 1e-10);
        const FourierField expect = constant_field(kLat, cfg, sign * c);
        FourierField d = rec.u;
        d -= expect;
        CHECK(l2_norm(d) <= 1e-8);
        // The minimum sits strictly below the trivial level 𝒥(0) = 0.
        CHECK(rec.energy < 0.0);
    }
    // Default seed runs too.
    const SolutionRecord rec = solve_direct_min(nl, cfg, kLat, opts);
    CHECK(rec.converged);
    CHECK(is_constant_pair(rec.u, c, 1e-8));

    // Restart consistency: the solve is a pure function of its inputs.
    const SolutionRecord again = solve_direct_min(nl, cfg, kLat, opts);
    REQUIRE(again.u.coeffs().size() == rec.u.coeffs().size());
    for (std::size_t i = 0; i < rec.u.coeffs().size(); ++i)
        CHECK(again.u.coeffs()[i] == rec.u.coeffs()[i]);

    CHECK_THROWS_AS(solve_direct_min(nl, kCfg, kLat, opts), ParameterError);
}

TEST_CASE("multiplicity sweep meets the guaranteed pair count fixture") {
    SolverOptions opts;
    const MultiplicityReport report = solve_multiplicity(kRat, kCfg, kLat, opts);
    CHECK(report.hypotheses.h == 1);
    CHECK(report.hypotheses.k == 9);
    CHECK(report.hypotheses.pair_count == 9);

    CHECK(report.distinct_pairs >= 3);
    CHECK(report.solutions.size() == 2 * static_cast<std::size_t>(report.distinct_pairs));

    bool has_constant_pair = false;
    for (std::size_t i = 0; i < report.solutions.size(); ++i) {
        const SolutionRecord& rec = report.solutions[i];
        CHECK(rec.converged);
        CHECK(rec.gradient_norm <= 1e-10);
        CHECK(rec.l2 > opts.distinctness_tolerance);
        if (is_constant_pair(rec.u, kRootHalf, 1e-8)) has_constant_pair = true;
        // Closure under negation: entries come in (u, -u) order.
        if (i % 2 == 1) {
            FourierField sum = rec.u;
            sum += report.solutions[i - 1].u;
            CHECK(l2_norm(sum) == 0.0);
        }
    }
    CHECK(has_constant_pair);

    // Distinctness modulo sign between pair representatives.
    for (std::size_t i = 0; i < report.solutions.size(); i += 2) {
        for (std::size_t j = i + 2; j < report.solutions.size(); j += 2) {
            FourierField d = report.solutions[i].u;
            d -= report.solutions[j].u;
            FourierField s = report.solutions[i].u;
            s += report.solutions[j].u;
            CHECK(std::min(l2_norm(d), l2_norm(s)) > opts.distinctness_tolerance);
        }
    }

    CHECK(report.attempts == 9 * 4 * 2);
    CHECK(report.converged_attempts + static_cast<int>(report.nonconverged.size()) ==
          report.attempts);
}

TEST_CASE("production cutoff sweep verifies every record independently") {
    // At the M = 16 cutoff the nonlinear tails of every found solution are
    // resolved: re-evaluating each record with the collocation grid doubled
    // reproduces the residual to well below 10× the solver tolerance.
    const ModeLattice lat = ModeLattice::cubic(2, 16);
    SolverOptions opts;
    const MultiplicityReport report = solve_multiplicity(kRat, kCfg, lat, opts);
    CHECK(report.distinct_pairs >= 3);
    MESSAGE("distinct pairs found: ", report.distinct_pairs,
            " (theoretical bound ", report.hypotheses.pair_count, ")");

    bool has_constant_pair = false;
    for (const auto& rec : report.solutions) {
        CHECK(rec.converged);
        CHECK(rec.gradient_norm <= 1e-10);
        CHECK(rec.refined_residual <= 1e-9);
        CHECK(rec.verified);
        if (is_constant_pair(rec.u, kRootHalf, 1e-8)) has_constant_pair = true;
    }
    CHECK(has_constant_pair);

    // Weak form mode by mode: every unit test mode sees a tiny pairing.
    const FourierField g = gradient(report.solutions[0].u, kRat, kCfg);
    double worst = 0.0;
    for (const auto& beta : g.coeffs()) worst = std::max(worst, std::abs(beta));
    CHECK(worst <= 1e-10);

    // Re-solving on the doubled grid moves each representative by < 1e-6 in
    // L²; the constant branch does not move at all to round-off.
    const ModeLattice doubled = lat.refined(2);
    SolverOptions polish;
    polish.use_deflation = false;
    for (std::size_t i = 0; i < report.solutions.size(); i += 2) {
        const FourierField seed = embed_modes(report.solutions[i].u, doubled);
        const SolutionRecord moved = solve_newton(kRat, kCfg, seed, polish);
        CHECK(moved.converged);
        FourierField d = moved.u;
        d -= seed;
        const double movement = l2_norm(d);
        CHECK(movement < 1e-6);
        if (is_constant_pair(report.solutions[i].u, kRootHalf, 1e-8))
            CHECK(movement < 1e-11);
    }

    const ModeLattice tiny = ModeLattice::cubic(2, 3);
    CHECK_THROWS_AS(embed_modes(report.solutions[0].u, tiny), ShapeError);
}

TEST_CASE("deflation finds at least as many pairs as plain restarts") {
    SolverOptions with = {};
    SolverOptions without = {};
    without.use_deflation = false;
    const MultiplicityReport on = solve_multiplicity(kRat, kCfg, kLat, with);
    const MultiplicityReport off = solve_multiplicity(kRat, kCfg, kLat, without);
    CHECK(on.distinct_pairs >= off.distinct_pairs);
    CHECK(off.distinct_pairs >= 1);
}

TEST_CASE("constant solution is a saddle with the predicted morse index") {
    // At u ≡ 1/√2 the Hessian diagonalizes over the eigenmodes with entries
    // λ_j - λ∞ - f'(c) = λ_j - 2 + 1/3, negative exactly for λ_j ∈ {1, √2},
    // i.e. 1 + 4 = 5 directions.
    const FourierField u = constant_field(kLat, kCfg, kRootHalf);
    CHECK(morse_index(u, kRat, kCfg) == 5);
    // The trivial solution: λ_j - λ∞ - λ₀ = λ_j - 0.5 > 0 for every j, a
    // local minimum.
    const FourierField zero_field(kLat, true);
    CHECK(morse_index(zero_field, kRat, kCfg) == 0);
}

TEST_CASE("sweep without the gap condition is refused unless overridden") {
    const Nonlinearity zero = Nonlinearity::zero();
    SolverOptions opts;
    CHECK_THROWS_AS(solve_multiplicity(zero, kCfg, kLat, opts), HypothesisError);

    opts.hypothesis_override = true;
    const MultiplicityReport report = solve_multiplicity(zero, kCfg, kLat, opts);
    // Linear problem with non-resonant λ∞: every seed falls back to zero.
    CHECK(report.distinct_pairs == 0);
    CHECK(report.solutions.empty());
    CHECK(report.trivial_results == report.converged_attempts);
    CHECK(report.trivial_results > 0);

    // Resonant λ∞ is refused outright.
    const TorusConfig resonant =
        TorusConfig::checked(2.0 * kPi, 2, 1.0, 0.5, std::sqrt(2.0));
    SolverOptions plain;
    CHECK_THROWS_AS(solve_multiplicity(kRat, resonant, kLat, plain), HypothesisError);
}

TEST_CASE("palais-smale diagnostics flag the resonant escape ray") {
    // Resonant fixture: u_j = t_j·v with v an eigenfunction at λ = λ∞ gives
    // ‖𝒥′‖ → 0 while |u|_{ℍ^s} → ∞ and 𝒥 grows only logarithmically.
    const TorusConfig resonant =
        TorusConfig::checked(2.0 * kPi, 2, 1.0, 0.5, std::sqrt(2.0));
    const auto basis = real_eigenbasis(resonant, kLat, 2);
    std::vector<FourierField> ray;
    for (int j = 0; j <= 12; ++j) {
        FourierField u = basis[1];
        u *= std::pow(2.0, j);
        ray.push_back(u);
    }
    const PsDiagnostics diag = ps_diagnostics(ray, kRat, resonant);
    REQUIRE(diag.rows.size() == ray.size());
    CHECK(diag.ps_suspect);
    CHECK(diag.rows.back().gradient_norm < 0.1 * diag.rows.front().gradient_norm);
    CHECK(diag.rows.back().hs > 10.0 * diag.rows.front().hs);

    // Non-resonant control: the same ray picks up a linearly growing
    // gradient, so it must not be flagged.
    const PsDiagnostics control = ps_diagnostics(ray, kRat, kCfg);
    CHECK_FALSE(control.ps_suspect);
}

TEST_CASE("nonconvergence is reported as data") {
    SolverOptions opts;
    opts.max_newton_iterations = 1;
    opts.gradient_tolerance = 1e-14;
    Rng rng(1);
    const FourierField init = random_real_field(kLat, rng, 1.0);
    const SolutionRecord rec = solve_newton(kRat, kCfg, init, opts);
    CHECK_FALSE(rec.converged);
    CHECK(rec.newton_iterations == 1);
    CHECK(rec.gradient_history.size() >= 1);
}

TEST_CASE("thread cap changes neither the pair set size nor its members") {
    SolverOptions opts;
    const MultiplicityReport base = solve_multiplicity(kRat, kCfg, kLat, opts);
    setenv("FRACPERIOD_THREADS", "3", 1);
    const MultiplicityReport threaded = solve_multiplicity(kRat, kCfg, kLat, opts);
    unsetenv("FRACPERIOD_THREADS");
    CHECK(threaded.distinct_pairs == base.distinct_pairs);
    for (std::size_t i = 0; i < base.solutions.size(); i += 2) {
        bool found = false;
        for (std::size_t j = 0; j < threaded.solutions.size() && !found; j += 2) {
            FourierField d = base.solutions[i].u;
            d -= threaded.solutions[j].u;
            FourierField s = base.solutions[i].u;
            s += threaded.solutions[j].u;
            found = std::min(l2_norm(d), l2_norm(s)) <= 1e-6;
        }
        CHECK(found);
    }
}
