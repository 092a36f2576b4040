#pragma once
// Spectral representation of real scalar fields on the torus (0,T)^N.
//
// A field u is stored through its coefficients β_k on the truncated frequency
// lattice k ∈ Π_i [-M_i, M_i], relative to the L²-orthonormal basis
//   e_k(x) = exp(i ω k·x) / √(T^N),   ω = 2π/T,
// so that u(x) = Σ_k β_k e_k(x) and |u|_{L²}² = Σ_k |β_k|².

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "fracperiod/common.hpp"

namespace fracperiod {

// Global parameters of the problem: period, dimension, mass and fractional
// order, plus the spectral shift λ∞ used by the energy functional.
struct TorusConfig {
    double period = 2.0 * kPi;  // T > 0
    int dim = 2;                // N ≥ 1
    double mass = 1.0;          // m > 0
    double s = 0.5;             // fractional order, 0 < s < 1
    double lambda_inf = 0.0;    // asymptotic slope λ∞ of the nonlinearity

    double omega() const { return 2.0 * kPi / period; }
    double volume() const;  // T^N

    // κ_s = 2^{1-2s} Γ(1-s)/Γ(s); equals 1 at s = 1/2.
    double kappa_s() const;

    // Critical Sobolev exponent 2N/(N-2s); +inf when N ≤ 2s.
    double critical_exponent() const;

    // Validates ranges and returns the config; throws ParameterError.
    static TorusConfig checked(double period, int dim, double mass, double s,
                               double lambda_inf);
};

// Symmetric truncated mode lattice with an attached collocation grid.
// grid_sizes[i] ≥ 2·half_extents[i]+1 so that analyze() is exact on
// band-limited data (no aliasing among retained modes).
struct ModeLattice {
    std::vector<int> half_extents;  // M_i ≥ 0
    std::vector<int> grid_sizes;    // n_i ≥ 2 M_i + 1

    static ModeLattice cubic(int dim, int half_extent);
    static ModeLattice make(std::vector<int> half_extents,
                            std::vector<int> grid_sizes);

    int dim() const { return static_cast<int>(half_extents.size()); }
    std::size_t mode_count() const;        // Π (2 M_i + 1)
    std::size_t grid_point_count() const;  // Π n_i

    // Row-major multi-index mapping over digits k_i + M_i (last dim fastest).
    std::vector<int> mode(std::size_t index) const;
    std::size_t index_of(std::span<const int> k) const;
    bool contains(std::span<const int> k) const;
    long k_squared(std::size_t index) const;  // Σ k_i²
    int min_half_extent() const;

    // Same modes, collocation grid refined by an integer factor (dealiasing).
    ModeLattice refined(int factor) const;

    bool operator==(const ModeLattice&) const = default;
};

// Field in coefficient space. Real fields keep the Hermitian symmetry
// β_{-k} = conj(β_k); the flag only asserts intent, the invariant is checked
// where it matters (synthesis, norms).
class FourierField {
  public:
    FourierField() = default;
    explicit FourierField(ModeLattice lattice, bool real = true);

    const ModeLattice& lattice() const { return lattice_; }
    bool is_real() const { return real_; }

    std::span<const std::complex<double>> coeffs() const { return coeffs_; }
    std::span<std::complex<double>> coeffs() { return coeffs_; }
    std::complex<double> coeff(std::span<const int> k) const;
    void set_coeff(std::span<const int> k, std::complex<double> value);

    // Max |β_k - conj(β_{-k})| over the lattice; 0 for exactly real fields.
    double hermitian_defect() const;
    // Symmetrizes coefficients: β_k ← (β_k + conj(β_{-k}))/2.
    void enforce_hermitian();

    FourierField& operator+=(const FourierField& other);
    FourierField& operator-=(const FourierField& other);
    FourierField& operator*=(double scale);
    friend FourierField operator+(FourierField a, const FourierField& b) { return a += b; }
    friend FourierField operator-(FourierField a, const FourierField& b) { return a -= b; }
    friend FourierField operator*(FourierField a, double c) { return a *= c; }
    friend FourierField operator*(double c, FourierField a) { return a *= c; }
    FourierField operator-() const;

  private:
    ModeLattice lattice_;
    std::vector<std::complex<double>> coeffs_;
    bool real_ = true;
};

// L² inner product Re Σ_k β_k conj(γ_k); the real part is the natural inner
// product on real fields.
double inner_l2(const FourierField& a, const FourierField& b);
double l2_norm(const FourierField& u);

// Grid sample coordinates x_j = j_i T / n_i, j_i = 0..n_i-1, row-major.
std::vector<double> grid_point(const ModeLattice& lattice, const TorusConfig& cfg,
                               std::size_t flat_index);

// Forward transform: β_k = (1/√T^N) ∫ u(x exp(-i ω k·x) dx via the exact
// trapezoidal quadrature on the collocation grid. `samples` is row-major with
// lattice.grid_point_count() entries.
FourierField analyze(std::span<const double> samples, const ModeLattice& lattice,
                     const TorusConfig& cfg);

// Inverse transform onto the collocation grid. Requires is_real(); checks the
// reconstruction is real to round-off and returns the real part.
std::vector<double> synthesize(const FourierField& u, const TorusConfig& cfg);

// Complex-output variant, no reality requirement.
std::vector<std::complex<double>> synthesize_complex(const FourierField& u,
                                                     const TorusConfig& cfg);

// Constant field u ≡ value: β_0 = value·√T^N.
FourierField constant_field(const ModeLattice& lattice, const TorusConfig& cfg,
                            double value);

// Random real band-limited field with coefficients ~ N(0, σ²) per real degree
// of freedom; used by property tests and restarts.
FourierField random_real_field(const ModeLattice& lattice, Rng& rng,
                               double sigma = 1.0);

// Packs a real field into its independent real degrees of freedom; the
// Euclidean norm of the packed vector equals the L² norm of the field.
std::vector<double> pack_real(const FourierField& u);
FourierField unpack_real(std::span<const double> dof, const ModeLattice& lattice);

}  // namespace fracperiod
