#pragma once
// Critical-point search for the reduced energy: damped Newton–Krylov with
// deflation against already-found solutions, a direct-minimization branch for
// λ∞ below the first eigenvalue, a seeded multiplicity sweep along the
// eigenvalue ladder λ_h..λ_k, and Palais–Smale sequence diagnostics.
//
// Determinism: with FRACPERIOD_THREADS unset or 1 every routine here is a
// pure function of (inputs, options); the multiplicity sweep processes seeds
// in a fixed order. With more worker threads the found solution set is the
// same in practice but the record order and deflation history may differ.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fracperiod/energy.hpp"
#include "fracperiod/torus.hpp"

namespace fracperiod {

struct SolverOptions {
    double gradient_tolerance = 1e-10;    // stop when ‖𝒥′(u)‖_{L²} falls below
    int max_newton_iterations = 50;
    double linear_tolerance = 1e-8;       // floor for the inner MINRES forcing
    int max_linear_iterations = 600;
    int max_line_search_backtracks = 30;
    double distinctness_tolerance = 1e-4; // L² distance modulo sign
    bool use_deflation = true;
    bool hypothesis_override = false;     // sweep even when the gap check fails
    bool compute_morse_index = false;
    std::vector<double> seed_amplitudes = {0.25, 0.5, 1.0, 2.0};

    void validate() const;  // throws ParameterError on malformed options
};

struct SolutionRecord {
    FourierField u;
    std::string seed_tag;            // e.g. "rank=3,amp=0.5,sign=-"
    bool converged = false;
    int newton_iterations = 0;
    double energy = 0.0;
    double gradient_norm = 0.0;      // undeflated ‖𝒥′(u)‖_{L²}
    double l2 = 0.0;
    double hs = 0.0;                 // |u|_{ℍ^s}
    // Independent re-check: the same coefficients re-evaluated with the
    // collocation grid doubled. verified = refined_residual below 10× the
    // gradient tolerance; false signals an under-resolved lattice.
    double refined_residual = 0.0;
    bool verified = false;
    int morse_index = -1;            // filled only when requested
    std::vector<double> gradient_history;  // per Newton iteration
};

// Damped Newton–Krylov from `init`; `deflated` lists solutions to repel.
// The returned record reports the undeflated gradient norm.
SolutionRecord solve_newton(const Nonlinearity& nl, const TorusConfig& cfg,
                            const FourierField& init, const SolverOptions& opts,
                            std::span<const FourierField> deflated = {});

// Preconditioned descent with Armijo backtracking, then a Newton polish.
// Requires λ∞ < λ₁ = m^{2s}; throws ParameterError otherwise.
SolutionRecord solve_direct_min(const Nonlinearity& nl, const TorusConfig& cfg,
                                const ModeLattice& lattice, const SolverOptions& opts,
                                const FourierField* init = nullptr);

struct MultiplicityReport {
    HypothesisReport hypotheses;
    // Distinct non-trivial solutions; for odd f the list is closed under
    // negation, each pair stored representative-first.
    std::vector<SolutionRecord> solutions;
    int distinct_pairs = 0;
    int attempts = 0;
    int converged_attempts = 0;
    int trivial_results = 0;    // converged to u = 0
    int duplicate_results = 0;  // converged onto an already-found pair
    std::vector<SolutionRecord> nonconverged;  // kept as data, not an error
};

// Seeds ±a·√(λ∞−λ_j)·v_j for every rank j in h..k and amplitude a in the
// options, Newton-solves each with deflation against everything found so
// far. Throws HypothesisError when the gap condition fails or λ∞ is
// resonant, unless hypothesis_override is set.
MultiplicityReport solve_multiplicity(const Nonlinearity& nl, const TorusConfig& cfg,
                                      const ModeLattice& lattice,
                                      const SolverOptions& opts);

struct PsRow {
    double energy = 0.0;
    double gradient_norm = 0.0;
    double hs = 0.0;
};

struct PsDiagnostics {
    std::vector<PsRow> rows;
    bool ps_suspect = false;  // norms blow up while the gradient decays
};

// Tabulates 𝒥, ‖𝒥′‖ and |·|_{ℍ^s} along a trajectory and flags the
// Palais–Smale failure signature: |u|_{ℍ^s} grew by `growth_factor` while
// ‖𝒥′‖ fell by `gradient_drop` and the energy stayed within `energy_cap`.
PsDiagnostics ps_diagnostics(std::span<const FourierField> trajectory,
                             const Nonlinearity& nl, const TorusConfig& cfg,
                             double growth_factor = 10.0, double gradient_drop = 0.1,
                             double energy_cap = 1e6);

// Number of negative eigenvalues of 𝒥″(u) on the packed real coordinates
// (dense assembly; meant for small lattices).
int morse_index(const FourierField& u, const Nonlinearity& nl,
                const TorusConfig& cfg);

// The same coefficients viewed on a lattice with larger half extents; used
// for residual checks against mode refinement. Throws ShapeError when the
// target cannot hold the source modes.
FourierField embed_modes(const FourierField& u, const ModeLattice& target);

}  // namespace fracperiod
