#pragma once
// The periodic fractional operator (-Δ + m²)^s as a Fourier multiplier, its
// exactly enumerated spectrum, and projections onto spans of eigenfunctions.
//
// On mode k the operator multiplies β_k by (ω²|k|² + m²)^s, so eigenvalues are
// λ = (ω²|k|² + m²)^s with multiplicity equal to the number of lattice points
// sharing |k|². The smallest one, λ₁ = m^{2s}, is simple (k = 0).

#include <optional>
#include <string>
#include <vector>

#include "fracperiod/torus.hpp"

namespace fracperiod {

// Multiplier symbol μ^s with μ = ω²|k|² + m².
double mode_mu(const TorusConfig& cfg, long k_squared);
double mode_multiplier(const TorusConfig& cfg, long k_squared);

// (-Δ + m²)^s u; exact in coefficient space.
FourierField apply_operator(const FourierField& u, const TorusConfig& cfg);

// (-Δ + m²)^{-s} g; exact inverse, defined for every g since μ ≥ m² > 0.
FourierField apply_inverse(const FourierField& g, const TorusConfig& cfg);

// Norm of the scale ℍ^{±s}: √(Σ μ^{±s} |β_k|²). `sign` = +1 or -1.
double hs_norm(const FourierField& u, const TorusConfig& cfg, int sign = +1);

// ⟨u, w⟩_{ℍ^s} = Σ μ^s Re(β_k conj(γ_k)).
double hs_inner(const FourierField& u, const FourierField& w, const TorusConfig& cfg);

// One eigenvalue level: all lattice modes with a common |k|².
struct SpectrumLevel {
    double lambda = 0.0;     // μ^s
    double mu = 0.0;         // ω²|k|² + m²
    long k_squared = 0;      // |k|²
    int multiplicity = 0;    // number of lattice points at this |k|²
    int first_rank = 0;      // 1-based rank of the first repeated eigenvalue
    int last_rank = 0;       // first_rank + multiplicity - 1
    std::vector<std::vector<int>> modes;  // lattice points, sorted lexicographically
};

// Eigenvalues in increasing order with multiplicities. Only levels inside the
// certified ball |k|² ≤ (min_i M_i)² are enumerated: outside it the lattice
// truncation could miss lattice points and under-count multiplicities.
struct SpectrumTable {
    std::vector<SpectrumLevel> levels;
    double certified_lambda_max = 0.0;  // largest trustworthy eigenvalue
    int total_ranks = 0;                // Σ multiplicities over levels

    // 1-based rank lookup λ_ell; throws SpectrumRangeError past the table.
    double eigenvalue(int rank) const;
    const SpectrumLevel& level_of_rank(int rank) const;
};

// Enumerates at least `count` eigenvalues (whole levels are kept together).
// Throws SpectrumRangeError if `count` exceeds the certified range.
SpectrumTable enumerate_spectrum(const TorusConfig& cfg, const ModeLattice& lattice,
                                 int count);

struct ResonanceCheck {
    bool resonant = false;
    double distance = 0.0;        // min_λ |λ∞ - λ|
    double nearest_lambda = 0.0;  // the minimizer
};

// Tests λ∞ against the certified spectrum; throws SpectrumRangeError when
// lambda exceeds the certified radius (resonance could not be excluded there).
ResonanceCheck is_resonant(double lambda, const SpectrumTable& table,
                           double tolerance = 1e-9);

// Rayleigh quotient |u|²_{ℍ^s} / |u|²_{L²}; throws on the zero field.
double rayleigh_quotient(const FourierField& u, const TorusConfig& cfg);

// First `count` members of the real L²-orthonormal eigenbasis, ordered by
// eigenvalue level and, inside a level, by the lexicographic order of the
// canonical representative k (cosine before sine). k = 0 gives the constant.
std::vector<FourierField> real_eigenbasis(const TorusConfig& cfg,
                                          const ModeLattice& lattice, int count);

// Span of the first h real eigenfunctions and its orthogonal complement.
struct EigenspaceSplit {
    int h = 0;
    std::vector<FourierField> basis;  // the h eigenfunctions
};

EigenspaceSplit eigenspace_split(const TorusConfig& cfg, const ModeLattice& lattice,
                                 int h);

enum class Subspace { Low, High };  // 𝕍_h and 𝕍_h^⊥

FourierField project(const FourierField& u, const EigenspaceSplit& split,
                     Subspace which);

}  // namespace fracperiod
