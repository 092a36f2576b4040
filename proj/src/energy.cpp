#include "fracperiod/energy.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>

#include "fracperiod/common.hpp"

namespace fracperiod {

// ---------------------------------------------------------------------------
// Custom tables: cubic Hermite interpolation on a uniform grid with slopes
// from central differences. The primitive is the exact antiderivative of the
// interpolant (a quartic per cell), so ∂F/∂t = f holds identically; beyond
// the table f is extended by f(t_end)·(t_end/t)², which keeps f continuous
// and drives f/t → 0.

struct Nonlinearity::Table {
    std::vector<double> y;   // f samples at nodes
    std::vector<double> m;   // nodal slopes (central differences)
    std::vector<double> cum; // antiderivative of the interpolant at nodes, cum[0]=0
    double t0 = 0.0;         // leftmost node (= -t_max)
    double dt = 0.0;         // node spacing
    double t_end = 0.0;      // rightmost node (= t_max)
    double prim_zero = 0.0;  // antiderivative at t = 0, subtracted so F(0)=0

    std::size_t cells() const { return y.size() - 1; }

    // Hermite value/derivative/antiderivative on cell i at local coordinate
    // u ∈ [0,1]; antiderivative is relative to the cell's left edge.
    double cell_value(std::size_t i, double u) const {
        const double h00 = (1 + 2 * u) * (1 - u) * (1 - u);
        const double h10 = u * (1 - u) * (1 - u);
        const double h01 = u * u * (3 - 2 * u);
        const double h11 = u * u * (u - 1);
        return h00 * y[i] + dt * h10 * m[i] + h01 * y[i + 1] + dt * h11 * m[i + 1];
    }
    double cell_slope(std::size_t i, double u) const {
        const double d00 = 6 * u * (u - 1);
        const double d10 = (1 - u) * (1 - 3 * u);
        const double d01 = 6 * u * (1 - u);
        const double d11 = u * (3 * u - 2);
        return (d00 * y[i] + dt * d10 * m[i] + d01 * y[i + 1] + dt * d11 * m[i + 1]) / dt;
    }
    double cell_integral(std::size_t i, double u) const {
        // ∫₀ᵘ h(v) dv for each Hermite basis polynomial, times dt.
        const double u2 = u * u, u3 = u2 * u, u4 = u3 * u;
        const double i00 = u - u3 + u4 / 2;
        const double i10 = u2 / 2 - 2 * u3 / 3 + u4 / 4;
        const double i01 = u3 - u4 / 2;
        const double i11 = u4 / 4 - u3 / 3;
        return dt * (i00 * y[i] + dt * i10 * m[i] + i01 * y[i + 1] + dt * i11 * m[i + 1]);
    }

    void locate(double t, std::size_t& i, double& u) const {
        double pos = (t - t0) / dt;
        double cell = std::floor(pos);
        cell = std::clamp(cell, 0.0, static_cast<double>(cells() - 1));
        i = static_cast<std::size_t>(cell);
        u = pos - cell;
    }

    double value(double t) const {
        if (t > t_end) {
            const double r = t_end / t;
            return y.back() * r * r;
        }
        if (t < t0) {
            const double r = t0 / t;
            return y.front() * r * r;
        }
        std::size_t i;
        double u;
        locate(t, i, u);
        return cell_value(i, u);
    }

    double slope(double t) const {
        if (t > t_end) return -2.0 * y.back() * t_end * t_end / (t * t * t);
        if (t < t0) return -2.0 * y.front() * t0 * t0 / (t * t * t);
        std::size_t i;
        double u;
        locate(t, i, u);
        return cell_slope(i, u);
    }

    double antiderivative(double t) const {
        if (t > t_end) return cum.back() + y.back() * t_end * (1.0 - t_end / t);
        if (t < t0) return cum.front() + y.front() * t0 * t0 * (-1.0 / t - 1.0 / t0);
        std::size_t i;
        double u;
        locate(t, i, u);
        return cum[i] + cell_integral(i, u);
    }

    double primitive(double t) const { return antiderivative(t) - prim_zero; }
};

Nonlinearity Nonlinearity::rational_odd(double a) {
    Nonlinearity n;
    n.kind_ = Kind::RationalOdd;
    n.a_ = a;
    n.lambda0_ = a;
    n.odd_ = true;
    n.x_dependent_ = false;
    return n;
}

Nonlinearity Nonlinearity::rational_odd_modulated(double a, double b, double omega) {
    if (!(omega > 0.0)) throw ParameterError("modulation frequency must be positive");
    Nonlinearity n;
    n.kind_ = Kind::RationalOddModulated;
    n.a_ = a;
    n.b_ = b;
    n.omega_ = omega;
    n.lambda0_ = a;
    n.odd_ = true;
    n.x_dependent_ = true;
    return n;
}

Nonlinearity Nonlinearity::zero() {
    Nonlinearity n;
    n.kind_ = Kind::Zero;
    n.lambda0_ = 0.0;
    n.odd_ = true;
    n.x_dependent_ = false;
    return n;
}

Nonlinearity Nonlinearity::custom(std::vector<double> f_samples, double t_max,
                                  double lambda0, bool odd) {
    if (f_samples.size() < 4)
        throw ParameterError("custom nonlinearity needs at least 4 samples");
    if (!(t_max > 0.0) || !std::isfinite(t_max))
        throw ParameterError("custom nonlinearity needs t_max > 0");
    for (double v : f_samples)
        if (!std::isfinite(v)) throw ParameterError("custom nonlinearity sample not finite");

    auto table = std::make_shared<Table>();
    const std::size_t n = f_samples.size();
    table->y = std::move(f_samples);
    table->t0 = -t_max;
    table->t_end = t_max;
    table->dt = 2.0 * t_max / static_cast<double>(n - 1);
    table->m.resize(n);
    table->m.front() = (table->y[1] - table->y[0]) / table->dt;
    table->m.back() = (table->y[n - 1] - table->y[n - 2]) / table->dt;
    for (std::size_t i = 1; i + 1 < n; ++i)
        table->m[i] = (table->y[i + 1] - table->y[i - 1]) / (2.0 * table->dt);
    table->cum.resize(n, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i)
        table->cum[i + 1] = table->cum[i] + table->cell_integral(i, 1.0);
    table->prim_zero = table->antiderivative(0.0);

    Nonlinearity nl;
    nl.kind_ = Kind::Custom;
    nl.lambda0_ = lambda0;
    nl.odd_ = odd;
    nl.x_dependent_ = false;
    nl.table_ = std::move(table);
    return nl;
}

double Nonlinearity::f(std::span<const double> x, double t) const {
    switch (kind_) {
        case Kind::Zero:
            return 0.0;
        case Kind::RationalOdd:
            return a_ * t / (1.0 + t * t);
        case Kind::RationalOddModulated: {
            if (x.empty()) throw ShapeError("x-dependent nonlinearity needs a point");
            const double t2 = t * t;
            return a_ * t / (1.0 + t2) +
                   b_ * std::cos(omega_ * x[0]) * (t * t2) / (1.0 + t2 * t2);
        }
        case Kind::Custom:
            return table_->value(t);
    }
    throw std::logic_error("unreachable nonlinearity kind");
}

double Nonlinearity::primitive(std::span<const double> x, double t) const {
    switch (kind_) {
        case Kind::Zero:
            return 0.0;
        case Kind::RationalOdd:
            return 0.5 * a_ * std::log1p(t * t);
        case Kind::RationalOddModulated: {
            if (x.empty()) throw ShapeError("x-dependent nonlinearity needs a point");
            const double t2 = t * t;
            return 0.5 * a_ * std::log1p(t2) +
                   0.25 * b_ * std::cos(omega_ * x[0]) * std::log1p(t2 * t2);
        }
        case Kind::Custom:
            return table_->primitive(t);
    }
    throw std::logic_error("unreachable nonlinearity kind");
}

double Nonlinearity::slope(std::span<const double> x, double t) const {
    switch (kind_) {
        case Kind::Zero:
            return 0.0;
        case Kind::RationalOdd: {
            const double d = 1.0 + t * t;
            return a_ * (1.0 - t * t) / (d * d);
        }
        case Kind::RationalOddModulated: {
            if (x.empty()) throw ShapeError("x-dependent nonlinearity needs a point");
            const double t2 = t * t;
            const double d = 1.0 + t2;
            const double d4 = 1.0 + t2 * t2;
            return a_ * (1.0 - t2) / (d * d) +
                   b_ * std::cos(omega_ * x[0]) * (3.0 * t2 - t2 * t2 * t2) / (d4 * d4);
        }
        case Kind::Custom:
            return table_->slope(t);
    }
    throw std::logic_error("unreachable nonlinearity kind");
}

std::vector<Nonlinearity::CheckItem> Nonlinearity::self_check() const {
    std::vector<CheckItem> items;
    // Sample points: a period of the modulation in x (built-ins depend only on
    // x₁), a spread of t inside the active range.
    std::vector<std::vector<double>> xs;
    if (x_dependent_) {
        const double period = 2.0 * kPi / omega_;
        for (int j = 0; j < 7; ++j)
            xs.push_back({period * static_cast<double>(j) / 7.0, 0.0, 0.0});
    } else {
        xs.push_back({});
    }
    double t_cap = 10.0;
    double dt_table = 0.0;
    if (kind_ == Kind::Custom) {
        t_cap = table_->t_end;
        dt_table = table_->dt;
    }
    std::vector<double> ts;
    for (double t : {0.0, 0.05, 0.31, 1.0, 2.7}) ts.push_back(std::min(t, 0.9 * t_cap));
    ts.push_back(0.9 * t_cap);
    const double scale = std::max({1.0, std::abs(lambda0_), std::abs(a_), std::abs(b_)});

    {
        CheckItem it{"primitive_vanishes_at_zero", false, 0.0, 1e-300};
        for (const auto& x : xs)
            it.measure = std::max(it.measure, std::abs(primitive(x, 0.0)));
        it.pass = it.measure == 0.0;
        items.push_back(it);
    }
    {
        CheckItem it{"primitive_slope_matches_f", false, 0.0, 2e-6 * scale};
        for (const auto& x : xs) {
            for (double t : ts) {
                const double h = 1e-6 * std::max(1.0, std::abs(t));
                const double fd = (primitive(x, t + h) - primitive(x, t - h)) / (2.0 * h);
                it.measure = std::max(it.measure, std::abs(fd - f(x, t)));
            }
        }
        it.pass = it.measure <= it.threshold;
        items.push_back(it);
    }
    if (odd_) {
        CheckItem it{"odd_symmetry", false, 0.0,
                     kind_ == Kind::Custom ? 1e-12 * scale : 0.0};
        for (const auto& x : xs)
            for (double t : ts)
                it.measure = std::max(it.measure, std::abs(f(x, t) + f(x, -t)));
        it.pass = it.measure <= it.threshold;
        items.push_back(it);
    }
    {
        // Near zero the interpolation error of a sampled table dominates; the
        // declared λ₀ only has to match to that accuracy.
        const double tol = kind_ == Kind::Custom
                               ? 10.0 * dt_table * dt_table * scale + 1e-8
                               : 1e-5 * scale;
        CheckItem it{"slope_at_zero_matches_lambda0", false, 0.0, tol};
        const double t = kind_ == Kind::Custom ? std::min(1e-4, 0.25 * dt_table) : 1e-4;
        for (const auto& x : xs)
            it.measure = std::max(it.measure, std::abs(f(x, t) / t - lambda0_));
        it.pass = it.measure <= it.threshold;
        items.push_back(it);
    }
    {
        CheckItem it{"slope_vanishes_at_infinity", false, 0.0, 1e-8 * scale};
        for (const auto& x : xs)
            it.measure = std::max(it.measure, std::abs(f(x, 1e6) / 1e6));
        it.pass = it.measure <= it.threshold;
        items.push_back(it);
    }
    return items;
}

// ---------------------------------------------------------------------------
// Energy, gradient, Hessian action. The nonlinear term is evaluated on the
// factor-2 zero-padded collocation grid; since test directions live on the
// original lattice, the padded quadrature makes the discrete gradient the
// exact derivative of the discrete energy (no aliasing back onto resolved
// modes from products with band-limited directions).

namespace {

struct PaddedSamples {
    ModeLattice lattice;
    std::vector<double> values;
};

FourierField embed(const FourierField& u, const ModeLattice& target) {
    // Same half extents → identical mode enumeration, only the grid differs.
    FourierField out(target, u.is_real());
    std::copy(u.coeffs().begin(), u.coeffs().end(), out.coeffs().begin());
    return out;
}

PaddedSamples padded_samples(const FourierField& u, const TorusConfig& cfg) {
    const ModeLattice fine = u.lattice().refined(2);
    return {fine, synthesize(embed(u, fine), cfg)};
}

}  // namespace

double energy(const FourierField& u, const Nonlinearity& nl, const TorusConfig& cfg) {
    if (!u.is_real()) throw ShapeError("energy expects a real field");
    const double kappa = cfg.kappa_s();
    const double hs = hs_norm(u, cfg);
    const double l2 = l2_norm(u);
    double nonlinear = 0.0;
    if (nl.kind() != Nonlinearity::Kind::Zero) {
        auto [fine, vals] = padded_samples(u, cfg);
        const double dv = cfg.volume() / static_cast<double>(fine.grid_point_count());
        double sum = 0.0;
        if (nl.x_dependent()) {
            for (std::size_t p = 0; p < vals.size(); ++p)
                sum += nl.primitive(grid_point(fine, cfg, p), vals[p]);
        } else {
            for (double v : vals) sum += nl.primitive({}, v);
        }
        nonlinear = sum * dv;
    }
    return 0.5 * kappa * hs * hs - 0.5 * cfg.lambda_inf * kappa * l2 * l2 -
           kappa * nonlinear;
}

FourierField gradient(const FourierField& u, const Nonlinearity& nl,
                      const TorusConfig& cfg) {
    if (!u.is_real()) throw ShapeError("gradient expects a real field");
    const double kappa = cfg.kappa_s();
    FourierField g(u.lattice(), true);
    FourierField fhat(u.lattice(), true);
    if (nl.kind() != Nonlinearity::Kind::Zero) {
        auto [fine, vals] = padded_samples(u, cfg);
        std::vector<double> fv(vals.size());
        if (nl.x_dependent()) {
            for (std::size_t p = 0; p < vals.size(); ++p)
                fv[p] = nl.f(grid_point(fine, cfg, p), vals[p]);
        } else {
            for (std::size_t p = 0; p < vals.size(); ++p) fv[p] = nl.f({}, vals[p]);
        }
        const FourierField fine_hat = analyze(fv, fine, cfg);
        std::copy(fine_hat.coeffs().begin(), fine_hat.coeffs().end(),
                  fhat.coeffs().begin());
    }
    const ModeLattice& lat = u.lattice();
    for (std::size_t i = 0; i < lat.mode_count(); ++i) {
        const double mul = mode_multiplier(cfg, lat.k_squared(i));
        g.coeffs()[i] =
            kappa * ((mul - cfg.lambda_inf) * u.coeffs()[i] - fhat.coeffs()[i]);
    }
    return g;
}

FourierField hessian_vec(const FourierField& u, const FourierField& w,
                         const Nonlinearity& nl, const TorusConfig& cfg) {
    if (!u.is_real() || !w.is_real())
        throw ShapeError("hessian_vec expects real fields");
    if (!(u.lattice() == w.lattice()))
        throw ShapeError("hessian_vec: direction lives on a different lattice");
    const double kappa = cfg.kappa_s();
    FourierField h(u.lattice(), true);
    FourierField chat(u.lattice(), true);
    if (nl.kind() != Nonlinearity::Kind::Zero) {
        const ModeLattice fine = u.lattice().refined(2);
        const std::vector<double> uv = synthesize(embed(u, fine), cfg);
        const std::vector<double> wv = synthesize(embed(w, fine), cfg);
        std::vector<double> cv(uv.size());
        if (nl.x_dependent()) {
            for (std::size_t p = 0; p < uv.size(); ++p)
                cv[p] = nl.slope(grid_point(fine, cfg, p), uv[p]) * wv[p];
        } else {
            for (std::size_t p = 0; p < uv.size(); ++p)
                cv[p] = nl.slope({}, uv[p]) * wv[p];
        }
        const FourierField fine_hat = analyze(cv, fine, cfg);
        std::copy(fine_hat.coeffs().begin(), fine_hat.coeffs().end(),
                  chat.coeffs().begin());
    }
    const ModeLattice& lat = u.lattice();
    for (std::size_t i = 0; i < lat.mode_count(); ++i) {
        const double mul = mode_multiplier(cfg, lat.k_squared(i));
        h.coeffs()[i] =
            kappa * ((mul - cfg.lambda_inf) * w.coeffs()[i] - chat.coeffs()[i]);
    }
    return h;
}

// ---------------------------------------------------------------------------

std::string applicability_label(Applicability a) {
    switch (a) {
        case Applicability::NoneResonant: return "none (resonant)";
        case Applicability::DirectMinimization: return "direct minimization";
        case Applicability::Existence: return "existence";
        case Applicability::Multiplicity: return "multiplicity";
    }
    throw std::logic_error("unreachable applicability");
}

HypothesisReport check_hypotheses(const Nonlinearity& nl, const TorusConfig& cfg,
                                  const SpectrumTable& table) {
    const double lambda0 = nl.lambda0();
    const double lambda_inf = cfg.lambda_inf;
    const double needed = lambda_inf + std::abs(lambda0);
    if (table.certified_lambda_max < needed)
        throw SpectrumRangeError(
            "hypothesis check needs the spectrum certified past lambda_inf + |lambda0|");

    HypothesisReport rep;
    rep.lambda0 = lambda0;
    rep.lambda_inf = lambda_inf;
    rep.odd = nl.odd();
    rep.resonance = is_resonant(lambda_inf, table);
    rep.asymptotics = nl.self_check();

    // h: least rank whose eigenvalue exceeds λ₀+λ∞; k: greatest rank whose
    // eigenvalue stays below λ∞. Whole levels share a rank range.
    const double low_bar = lambda0 + lambda_inf;
    for (const auto& level : table.levels) {
        if (rep.h == 0 && level.lambda > low_bar) {
            rep.h = level.first_rank;
            rep.lambda_h = level.lambda;
        }
        if (level.lambda < lambda_inf) {
            rep.k = level.last_rank;
            rep.lambda_k = level.lambda;
        }
    }
    rep.gap_condition = rep.h >= 1 && rep.k >= 1 && rep.h <= rep.k;
    rep.pair_count = rep.gap_condition ? rep.k - rep.h + 1 : 0;
    rep.direct_minimization = lambda_inf < table.eigenvalue(1);

    if (rep.resonance.resonant) {
        rep.applicability = Applicability::NoneResonant;
    } else if (rep.direct_minimization) {
        rep.applicability = Applicability::DirectMinimization;
    } else if (rep.odd && rep.gap_condition) {
        rep.applicability = Applicability::Multiplicity;
    } else {
        rep.applicability = Applicability::Existence;
    }
    return rep;
}

}  // namespace fracperiod
