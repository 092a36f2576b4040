#pragma once
// Extension of a torus field to the half-cylinder (0,T)^N × (0,∞) with the
// degenerate weight y^{1-2s}, realized mode-by-mode through the 1-D profile
//
//   θ(y) = 2^{1-s}/Γ(s) · y^s K_s(y),  θ(0) = 1,  θ(∞) = 0,
//
// which solves θ'' + (1-2s)/y θ' - θ = 0. The extension of u = Σ β_k e_k is
//   v(x,y) = Σ_k β_k θ(√μ_k · y) e_k(x),  μ_k = ω²|k|² + m²,
// its weighted Dirichlet energy is κ_s |u|²_{ℍ^s}, and its conormal trace
// -lim_{y→0} y^{1-2s} ∂_y v equals κ_s (-Δ+m²)^s u.

#include <span>
#include <vector>

#include "fracperiod/fractional_operator.hpp"
#include "fracperiod/torus.hpp"

namespace fracperiod {

// The 1-D extension profile at fractional order s ∈ (0,1). At s = 1/2 the
// profile is exactly e^{-y}.
class ThetaProfile {
  public:
    explicit ThetaProfile(double s);

    double order() const { return s_; }

    // θ(y) for y ≥ 0; θ(0) = 1 by the small-argument limit of y^s K_s(y).
    double value(double y) const;

    // θ'(y) = -2^{1-s}/Γ(s) · y^s K_{1-s}(y), for y > 0.
    double derivative(double y) const;

    // -y^{1-2s} θ'(y) → κ_s as y → 0⁺; exposed for the conormal computation.
    double weighted_slope(double y) const;

  private:
    double s_;
    double front_;  // 2^{1-s}/Γ(s)
};

// Independent evaluator: integrates the profile ODE with a high-order scheme,
// started from the two-sided Frobenius expansion
//   θ(y) = Σ a_n y^{2n} - κ_s/(2s) · y^{2s} Σ b_n y^{2n}
// at a small y₀. Used to cross-check the closed form; O(points) cost.
std::vector<double> theta_via_ode(double s, std::span<const double> y_points);

// I(s) = ∫₀^∞ t^{1-2s} (θ(t)² + θ'(t)²) dt, computed once per s by the
// log-line trapezoid rule. Mathematically equals κ_s; the library keeps the
// two routes separate so the identity stays checkable.
double theta_energy_integral(double s);

// v(·,·) = extension of u; cheap handle holding the trace coefficients.
class ExtendedField {
  public:
    ExtendedField(FourierField trace, TorusConfig cfg);

    const FourierField& trace() const { return trace_; }
    const TorusConfig& config() const { return cfg_; }
    const ThetaProfile& profile() const { return theta_; }

    // Horizontal slice v(·, y) as a torus field: coefficients β_k θ(√μ_k y).
    FourierField slice(double y) const;

    // ∂_y v(·, y): coefficients β_k √μ_k θ'(√μ_k y), y > 0.
    FourierField dy_slice(double y) const;

    // Pointwise evaluation (reference quality, O(modes) per call).
    double value_at(std::span<const double> x, double y) const;

  private:
    FourierField trace_;
    TorusConfig cfg_;
    ThetaProfile theta_;
};

ExtendedField extend(const FourierField& u, const TorusConfig& cfg);

// Weighted energy ‖v‖² = ∬ y^{1-2s} (|∇v|² + m²v²) = Σ_k |β_k|² μ_k^s I(s),
// using the per-mode reduction through θ.
double cylinder_energy(const ExtendedField& v);

// -lim_{y→0⁺} y^{1-2s} ∂_y v(·,y) via Richardson extrapolation along the
// given decreasing y sequence (two-term: first the y^{2-2s} correction, then
// y²). The limit equals κ_s (-Δ+m²)^s u.
FourierField conormal_derivative(const ExtendedField& v, std::span<const double> y_seq);

// Vertical bump w(x,y) = amplitude · b(y) · e(x) with b(0) = 0, used to
// perturb an extension away from the energy-minimizing profile. The cosine
// bump b(y) = 1 - cos(2πy/y_span) on [0, y_span] (0 outside) is C¹ with
// compact support; e(x) is a normalized real mode (cosine or sine type).
struct BumpPerturbation {
    double amplitude = 0.0;
    double y_span = 1.0;
    std::vector<int> x_mode;  // lattice mode of the carrier, k ≠ 0 or k = 0
    bool sine = false;        // carrier √2 sin instead of √2 cos
};

struct TraceGap {
    double lhs = 0.0;  // κ_s |Tr z|²_{ℍ^s}
    double rhs = 0.0;  // ‖z‖² on the cylinder
    double gap = 0.0;  // rhs - lhs ≥ 0, zero iff the perturbation vanishes
};

// Trace inequality κ_s |Tr z|²_{ℍ^s} ≤ ‖z‖² for z = v + bump. Per-mode
// quadrature on the perturbed mode, exact reduction on untouched modes.
TraceGap trace_inequality_check(const ExtendedField& v, const BumpPerturbation& bump);

}  // namespace fracperiod
