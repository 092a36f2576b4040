#pragma once
// Asymptotically linear nonlinearities f(x,t), the reduced energy functional
//
//   𝒥(u) = (κ_s/2)|u|²_{ℍ^s} − (λ∞ κ_s/2)|u|²_{L²} − κ_s ∫ F(x, u(x)) dx,
//
// its L²-Riesz gradient and Hessian action, and the hypothesis checker for
// the slope limits at 0 and ∞, non-resonance, and the spectral gap condition
// λ₀+λ∞ < λ_h ≤ λ_k < λ∞. The ℍ^s term uses the extension identity, so every
// evaluation happens on the trace side; only ∫F needs grid quadrature, done
// on a factor-2 zero-padded grid.

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "fracperiod/fractional_operator.hpp"
#include "fracperiod/torus.hpp"

namespace fracperiod {

// f(x,t) with primitive F(x,t) = ∫₀ᵗ f(x,τ)dτ and slope ∂f/∂t. The slope at
// zero λ₀ and structural flags are declared by the constructor, then
// corroborated numerically by self_check(); they are never inferred.
class Nonlinearity {
  public:
    enum class Kind { RationalOdd, RationalOddModulated, Custom, Zero };

    // f = a·t/(1+t²), F = (a/2)ln(1+t²), λ₀ = a. Odd, x-independent.
    static Nonlinearity rational_odd(double a);

    // f = a·t/(1+t²) + b·cos(ω x₁)·t³/(1+t⁴), λ₀ = a. Odd in t, periodic in x.
    static Nonlinearity rational_odd_modulated(double a, double b, double omega);

    // f ≡ 0 (the linear problem), λ₀ = 0.
    static Nonlinearity zero();

    // Uniformly sampled f-values on [-t_max, t_max], cubic-interpolated, with
    // declared slope at zero and oddness; decay-extended ∝ t^{-2} beyond the
    // table so f/t → 0. Validated like the built-ins.
    static Nonlinearity custom(std::vector<double> f_samples, double t_max,
                               double lambda0, bool odd);

    Kind kind() const { return kind_; }
    double lambda0() const { return lambda0_; }
    bool odd() const { return odd_; }
    bool x_dependent() const { return x_dependent_; }

    double f(std::span<const double> x, double t) const;
    double primitive(std::span<const double> x, double t) const;  // F
    double slope(std::span<const double> x, double t) const;      // ∂f/∂t

    // One named numeric corroboration of a declared property.
    struct CheckItem {
        std::string name;
        bool pass = false;
        double measure = 0.0;    // worst observed value
        double threshold = 0.0;  // bound it must stay under
    };

    // Samples the declared structure: F(x,0)=0, ∂F/∂t=f, oddness, slope → λ₀
    // at 0 and slope → 0 at ∞.
    std::vector<CheckItem> self_check() const;

  private:
    Nonlinearity() = default;
    Kind kind_ = Kind::Zero;
    double a_ = 0.0, b_ = 0.0, omega_ = 1.0;
    double lambda0_ = 0.0;
    bool odd_ = true;
    bool x_dependent_ = false;
    // Custom kind: uniform table on [-t_max, t_max] with cubic interpolation.
    struct Table;
    std::shared_ptr<const Table> table_;
};

double energy(const FourierField& u, const Nonlinearity& nl, const TorusConfig& cfg);

// L²-Riesz representative of 𝒥′(u): coefficients κ_s[(μ_k^s − λ∞)β_k − f̂_k].
FourierField gradient(const FourierField& u, const Nonlinearity& nl,
                      const TorusConfig& cfg);

// Action of 𝒥″(u): κ_s[(μ_k^s − λ∞)ŵ_k − (∂_t f(x,u)·w)^_k]. Symmetric.
FourierField hessian_vec(const FourierField& u, const FourierField& w,
                         const Nonlinearity& nl, const TorusConfig& cfg);

enum class Applicability {
    NoneResonant,        // λ∞ sits on the spectrum: no statement
    DirectMinimization,  // λ∞ < λ₁: global minimizer exists
    Existence,           // non-resonant: at least one weak solution
    Multiplicity,        // odd f with the spectral gap: k-h+1 solution pairs
};

std::string applicability_label(Applicability a);

struct HypothesisReport {
    ResonanceCheck resonance;
    double lambda0 = 0.0;
    double lambda_inf = 0.0;
    bool odd = false;
    bool direct_minimization = false;  // λ∞ < λ₁
    bool gap_condition = false;        // λ₀+λ∞ < λ_h ≤ λ_k < λ∞ with h ≤ k
    int h = 0;                         // least rank with λ_h > λ₀+λ∞
    int k = 0;                         // greatest rank with λ_k < λ∞
    int pair_count = 0;                // k-h+1 when the gap condition holds
    double lambda_h = 0.0, lambda_k = 0.0;
    Applicability applicability = Applicability::NoneResonant;
    std::vector<Nonlinearity::CheckItem> asymptotics;
};

// Classifies the problem against the certified spectrum. Requires the table
// to be certified past λ∞ + |λ₀|.
HypothesisReport check_hypotheses(const Nonlinearity& nl, const TorusConfig& cfg,
                                  const SpectrumTable& table);

}  // namespace fracperiod
