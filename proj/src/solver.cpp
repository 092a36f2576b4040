#include "fracperiod/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <mutex>
#include <sstream>
#include <thread>

#include <Eigen/Dense>

#include "fracperiod/common.hpp"
#include "fracperiod/fractional_operator.hpp"

namespace fracperiod {

void SolverOptions::validate() const {
    if (!(gradient_tolerance > 0.0))
        throw ParameterError("gradient tolerance must be positive");
    if (max_newton_iterations < 1)
        throw ParameterError("need at least one Newton iteration");
    if (!(linear_tolerance > 0.0) || linear_tolerance >= 1.0)
        throw ParameterError("linear tolerance must lie in (0,1)");
    if (max_linear_iterations < 1)
        throw ParameterError("need at least one linear iteration");
    if (max_line_search_backtracks < 1)
        throw ParameterError("need at least one backtrack");
    if (!(distinctness_tolerance > 0.0))
        throw ParameterError("distinctness tolerance must be positive");
    if (seed_amplitudes.empty())
        throw ParameterError("seed amplitude ladder is empty");
    for (double a : seed_amplitudes)
        if (!(a > 0.0)) throw ParameterError("seed amplitudes must be positive");
}

namespace {

// Diagonal preconditioner built from the linear part κ_s|μ_k^s − λ∞|,
// floored away from zero so near-resonant modes stay bounded.
class DiagonalPreconditioner {
  public:
    DiagonalPreconditioner(const ModeLattice& lat, const TorusConfig& cfg) {
        inv_.resize(lat.mode_count());
        const double kappa = cfg.kappa_s();
        for (std::size_t i = 0; i < lat.mode_count(); ++i) {
            const double d =
                kappa * std::abs(mode_multiplier(cfg, lat.k_squared(i)) - cfg.lambda_inf);
            inv_[i] = 1.0 / std::max(d, 1e-6);
        }
    }

    FourierField apply(const FourierField& r) const {
        FourierField z = r;
        for (std::size_t i = 0; i < inv_.size(); ++i) z.coeffs()[i] *= inv_[i];
        return z;
    }

  private:
    std::vector<double> inv_;
};

// Preconditioned MINRES for the (possibly indefinite) Hessian system
// H δ = b. Returns the iterate once the preconditioned residual has dropped
// by `rtol` or the iteration budget is spent; saddle-point systems are the
// normal case here, which is why MINRES rather than CG.
template <typename ApplyH>
FourierField pminres(const ApplyH& apply_h, const FourierField& b,
                     const DiagonalPreconditioner& precond, double rtol, int maxit) {
    FourierField x(b.lattice(), true);
    FourierField r = b;
    FourierField z = precond.apply(r);
    double gamma = std::sqrt(std::max(0.0, inner_l2(r, z)));
    if (gamma == 0.0) return x;
    const double target = rtol * gamma;

    FourierField r_old(b.lattice(), true);
    FourierField w(b.lattice(), true), w_old(b.lattice(), true);
    double gamma_old = 1.0;
    double eta = gamma;
    double s_old = 0.0, s = 0.0, c_old = 1.0, c = 1.0;

    for (int it = 0; it < maxit; ++it) {
        FourierField zj = z;
        zj *= 1.0 / gamma;
        FourierField az = apply_h(zj);
        const double delta = inner_l2(az, zj);

        FourierField r_new = az;
        {
            FourierField tmp = r;
            tmp *= delta / gamma;
            r_new -= tmp;
        }
        if (it > 0) {
            FourierField tmp = r_old;
            tmp *= gamma / gamma_old;
            r_new -= tmp;
        }
        FourierField z_new = precond.apply(r_new);
        const double gamma_new = std::sqrt(std::max(0.0, inner_l2(z_new, r_new)));

        const double a0 = c * delta - c_old * s * gamma;
        const double a1 = std::sqrt(a0 * a0 + gamma_new * gamma_new);
        const double a2 = s * delta + c_old * c * gamma;
        const double a3 = s_old * gamma;
        if (a1 == 0.0) break;  // exact breakdown: x already solves the system
        const double c_new = a0 / a1;
        const double s_new = gamma_new / a1;

        FourierField w_new = zj;
        {
            FourierField tmp = w_old;
            tmp *= a3;
            w_new -= tmp;
            tmp = w;
            tmp *= a2;
            w_new -= tmp;
        }
        w_new *= 1.0 / a1;
        {
            FourierField step = w_new;
            step *= c_new * eta;
            x += step;
        }
        eta = -s_new * eta;

        w_old = w;
        w = w_new;
        r_old = r;
        r = r_new;
        z = z_new;
        gamma_old = gamma;
        gamma = gamma_new;
        s_old = s;
        s = s_new;
        c_old = c;
        c = c_new;

        if (std::abs(eta) <= target || gamma <= 1e-300) break;
    }
    return x;
}

// Deflation bookkeeping: D(u) = Π_i (‖u−u_i‖⁻² + 1). Work in logs so long
// registries cannot overflow the merit value.
double log_deflation(const FourierField& u, std::span<const FourierField> deflated) {
    double acc = 0.0;
    for (const auto& ui : deflated) {
        FourierField d = u;
        d -= ui;
        const double r2 = inner_l2(d, d);
        if (r2 <= 1e-300) return 690.0 * static_cast<double>(deflated.size()) + 700.0;
        acc += std::log1p(1.0 / r2);
    }
    return acc;
}

// Newton step rescaling from the deflation operator: with H δ_N = −∇𝒥 the
// deflated Newton direction is τ·δ_N, τ = 1/(1 + Σ_i 2⟨u−u_i,δ_N⟩/(r_i⁴ d_i)).
double deflation_tau(const FourierField& u, const FourierField& newton_step,
                     std::span<const FourierField> deflated) {
    double chi = 0.0;
    for (const auto& ui : deflated) {
        FourierField d = u;
        d -= ui;
        const double r2 = inner_l2(d, d);
        if (r2 <= 1e-300) return 1.0;  // already on top of a root: leave as-is
        const double di = 1.0 / r2 + 1.0;
        chi += 2.0 * inner_l2(d, newton_step) / (r2 * r2 * di);
    }
    const double denom = 1.0 + chi;
    if (std::abs(denom) < 1e-3) return denom >= 0.0 ? 1e3 : -1e3;
    const double tau = 1.0 / denom;
    return std::clamp(tau, -1e3, 1e3);
}

double log_merit(double gradient_norm, double log_defl) {
    return std::log(std::max(gradient_norm, 1e-300)) + log_defl;
}

}  // namespace

SolutionRecord solve_newton(const Nonlinearity& nl, const TorusConfig& cfg,
                            const FourierField& init, const SolverOptions& opts,
                            std::span<const FourierField> deflated) {
    opts.validate();
    if (!init.is_real()) throw ShapeError("solver works on real fields");
    const DiagonalPreconditioner precond(init.lattice(), cfg);

    SolutionRecord rec;
    rec.u = init;
    rec.seed_tag = "custom";

    FourierField u = init;
    FourierField g = gradient(u, nl, cfg);
    double gn = l2_norm(g);
    rec.gradient_history.push_back(gn);

    for (int it = 0; it < opts.max_newton_iterations && gn > opts.gradient_tolerance;
         ++it) {
        // Inner solve accuracy tightens with the residual so the outer
        // iteration keeps its quadratic tail.
        const double rtol =
            std::max(opts.linear_tolerance, std::min(1e-2, 0.5 * gn));
        FourierField b = -g;
        const auto apply_h = [&](const FourierField& w) {
            return hessian_vec(u, w, nl, cfg);
        };
        FourierField step = pminres(apply_h, b, precond, rtol,
                                    opts.max_linear_iterations);
        if (opts.use_deflation && !deflated.empty())
            step *= deflation_tau(u, step, deflated);

        const double merit0 = log_merit(gn, log_deflation(u, deflated));
        double alpha = 1.0;
        bool accepted = false;
        for (int bt = 0; bt < opts.max_line_search_backtracks; ++bt) {
            FourierField trial = step;
            trial *= alpha;
            trial += u;
            const FourierField gt = gradient(trial, nl, cfg);
            const double gtn = l2_norm(gt);
            const double merit = log_merit(gtn, log_deflation(trial, deflated));
            if (merit <= merit0 + std::log1p(-1e-4 * alpha)) {
                u = trial;
                g = gt;
                gn = gtn;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        rec.newton_iterations = it + 1;
        if (!accepted) break;  // stalled: report the best point reached
        rec.gradient_history.push_back(gn);
    }

    rec.u = u;
    rec.gradient_norm = gn;
    rec.converged = gn <= opts.gradient_tolerance;
    rec.energy = energy(u, nl, cfg);
    rec.l2 = l2_norm(u);
    rec.hs = hs_norm(u, cfg);
    rec.refined_residual =
        l2_norm(gradient(embed_modes(u, u.lattice().refined(2)), nl, cfg));
    rec.verified = rec.converged &&
                   rec.refined_residual <= 10.0 * opts.gradient_tolerance;
    return rec;
}

SolutionRecord solve_direct_min(const Nonlinearity& nl, const TorusConfig& cfg,
                                const ModeLattice& lattice, const SolverOptions& opts,
                                const FourierField* init) {
    opts.validate();
    const double lambda1 = std::pow(cfg.mass * cfg.mass, cfg.s);
    if (!(cfg.lambda_inf < lambda1))
        throw ParameterError(
            "direct minimization needs lambda_inf below the first eigenvalue");

    FourierField u = init ? *init : constant_field(lattice, cfg, 0.1);
    if (!u.is_real()) throw ShapeError("solver works on real fields");
    const DiagonalPreconditioner precond(lattice, cfg);

    SolutionRecord rec;
    rec.seed_tag = "direct-min";
    double value = energy(u, nl, cfg);
    FourierField g = gradient(u, nl, cfg);
    double gn = l2_norm(g);
    rec.gradient_history.push_back(gn);

    double alpha = 1.0;
    const int max_descent = 5000;
    int it = 0;
    for (; it < max_descent && gn > 1e-6; ++it) {
        FourierField dir = precond.apply(g);
        const double slope = inner_l2(g, dir);  // ⟨g, P g⟩ > 0
        bool accepted = false;
        for (int bt = 0; bt < opts.max_line_search_backtracks; ++bt) {
            FourierField trial = dir;
            trial *= -alpha;
            trial += u;
            const double tv = energy(trial, nl, cfg);
            if (tv <= value - 1e-4 * alpha * slope) {
                u = trial;
                value = tv;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) break;
        g = gradient(u, nl, cfg);
        gn = l2_norm(g);
        rec.gradient_history.push_back(gn);
        alpha = std::min(alpha * 1.3, 4.0);
    }

    // Newton polish from inside the basin.
    SolverOptions polish = opts;
    polish.use_deflation = false;
    SolutionRecord fin = solve_newton(nl, cfg, u, polish);
    fin.seed_tag = "direct-min";
    fin.newton_iterations += it;
    fin.gradient_history.insert(fin.gradient_history.begin(),
                                rec.gradient_history.begin(),
                                rec.gradient_history.end());
    return fin;
}

FourierField embed_modes(const FourierField& u, const ModeLattice& target) {
    if (u.lattice().dim() != target.dim())
        throw ShapeError("embed_modes: dimension mismatch");
    FourierField out(target, u.is_real());
    const ModeLattice& src = u.lattice();
    for (std::size_t i = 0; i < src.mode_count(); ++i) {
        const std::vector<int> k = src.mode(i);
        if (!target.contains(k))
            throw ShapeError("embed_modes: target lattice too small");
        out.set_coeff(k, u.coeffs()[i]);
    }
    return out;
}

namespace {

// Deterministic sign convention for a solution pair {u, −u}: make the packed
// coordinate of largest magnitude positive.
void canonicalize_sign(FourierField& u) {
    const std::vector<double> dof = pack_real(u);
    double best = 0.0;
    double value = 0.0;
    for (double d : dof) {
        if (std::abs(d) > best) {
            best = std::abs(d);
            value = d;
        }
    }
    if (value < 0.0) u *= -1.0;
}

bool same_pair(const FourierField& a, const FourierField& b, double tol) {
    FourierField d = a;
    d -= b;
    if (l2_norm(d) <= tol) return true;
    FourierField sum = a;
    sum += b;
    return l2_norm(sum) <= tol;
}

struct SweepSeed {
    int rank = 0;
    double amplitude = 0.0;
    double sign = 1.0;
    FourierField field;
    std::string tag;
};

}  // namespace

MultiplicityReport solve_multiplicity(const Nonlinearity& nl, const TorusConfig& cfg,
                                      const ModeLattice& lattice,
                                      const SolverOptions& opts) {
    opts.validate();
    const SpectrumTable table = enumerate_spectrum(cfg, lattice, 1);
    MultiplicityReport report;
    report.hypotheses = check_hypotheses(nl, cfg, table);

    if (!opts.hypothesis_override) {
        if (report.hypotheses.resonance.resonant)
            throw HypothesisError("lambda_inf is resonant: multiplicity sweep refused");
        if (!report.hypotheses.gap_condition)
            throw HypothesisError(
                "gap condition failed: multiplicity sweep refused (override to force)");
    }

    // Even without the gap condition an override still needs a ladder; fall
    // back to every eigenvalue below λ∞, or the first level if none is.
    int h = report.hypotheses.h, k = report.hypotheses.k;
    if (!report.hypotheses.gap_condition) {
        h = 1;
        k = std::max(report.hypotheses.k, 1);
    }

    const auto basis = real_eigenbasis(cfg, lattice, k);
    std::vector<SweepSeed> seeds;
    for (int j = h; j <= k; ++j) {
        const double lam = table.eigenvalue(j);
        const double gap = std::max(cfg.lambda_inf - lam, 0.25);
        for (double amp : opts.seed_amplitudes) {
            for (double sign : {1.0, -1.0}) {
                SweepSeed s;
                s.rank = j;
                s.amplitude = amp;
                s.sign = sign;
                s.field = basis[static_cast<std::size_t>(j - 1)];
                s.field *= sign * amp * std::sqrt(gap) * std::sqrt(cfg.volume());
                std::ostringstream tag;
                tag << "rank=" << j << ",amp=" << amp << ",sign="
                    << (sign > 0 ? "+" : "-");
                s.tag = tag.str();
                seeds.push_back(std::move(s));
            }
        }
    }

    std::vector<FourierField> registry;  // representatives and negations
    std::mutex lock;
    std::size_t next_seed = 0;
    const double trivial_tol = opts.distinctness_tolerance;

    auto process = [&](const SweepSeed& seed) {
        std::vector<FourierField> snapshot;
        {
            std::lock_guard<std::mutex> guard(lock);
            snapshot = registry;
        }
        SolutionRecord rec =
            solve_newton(nl, cfg, seed.field, opts,
                         opts.use_deflation ? std::span<const FourierField>(snapshot)
                                            : std::span<const FourierField>());
        rec.seed_tag = seed.tag;

        std::lock_guard<std::mutex> guard(lock);
        ++report.attempts;
        if (!rec.converged) {
            report.nonconverged.push_back(std::move(rec));
            return;
        }
        ++report.converged_attempts;
        if (rec.l2 <= trivial_tol) {
            ++report.trivial_results;
            return;
        }
        for (const auto& known : registry) {
            if (same_pair(rec.u, known, opts.distinctness_tolerance)) {
                ++report.duplicate_results;
                return;
            }
        }
        canonicalize_sign(rec.u);
        rec.energy = energy(rec.u, nl, cfg);
        rec.gradient_norm = l2_norm(gradient(rec.u, nl, cfg));
        registry.push_back(rec.u);
        SolutionRecord mirror;
        if (nl.odd()) {
            mirror.u = -rec.u;
            mirror.seed_tag = rec.seed_tag + ",negated";
            mirror.converged = true;
            mirror.newton_iterations = rec.newton_iterations;
            mirror.energy = energy(mirror.u, nl, cfg);
            mirror.gradient_norm = l2_norm(gradient(mirror.u, nl, cfg));
            mirror.l2 = rec.l2;
            mirror.hs = rec.hs;
            mirror.refined_residual = l2_norm(
                gradient(embed_modes(mirror.u, lattice.refined(2)), nl, cfg));
            mirror.verified = mirror.refined_residual <=
                              10.0 * opts.gradient_tolerance;
            registry.push_back(mirror.u);
        }
        if (opts.compute_morse_index) rec.morse_index = morse_index(rec.u, nl, cfg);
        report.solutions.push_back(std::move(rec));
        if (nl.odd()) {
            if (opts.compute_morse_index)
                mirror.morse_index = morse_index(mirror.u, nl, cfg);
            report.solutions.push_back(std::move(mirror));
        }
        ++report.distinct_pairs;
    };

    const int threads = std::min<int>(worker_thread_cap(),
                                      static_cast<int>(seeds.size()));
    if (threads <= 1) {
        for (const auto& seed : seeds) process(seed);
    } else {
        auto worker = [&] {
            for (;;) {
                std::size_t mine;
                {
                    std::lock_guard<std::mutex> guard(lock);
                    if (next_seed >= seeds.size()) return;
                    mine = next_seed++;
                }
                process(seeds[mine]);
            }
        };
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    return report;
}

PsDiagnostics ps_diagnostics(std::span<const FourierField> trajectory,
                             const Nonlinearity& nl, const TorusConfig& cfg,
                             double growth_factor, double gradient_drop,
                             double energy_cap) {
    PsDiagnostics diag;
    diag.rows.reserve(trajectory.size());
    for (const auto& u : trajectory) {
        PsRow row;
        row.energy = energy(u, nl, cfg);
        row.gradient_norm = l2_norm(gradient(u, nl, cfg));
        row.hs = hs_norm(u, cfg);
        diag.rows.push_back(row);
    }
    if (diag.rows.size() >= 2) {
        const PsRow& first = diag.rows.front();
        const PsRow& last = diag.rows.back();
        double max_abs_energy = 0.0;
        for (const auto& row : diag.rows)
            max_abs_energy = std::max(max_abs_energy, std::abs(row.energy));
        diag.ps_suspect = last.hs >= growth_factor * std::max(first.hs, 1e-300) &&
                          last.gradient_norm <= gradient_drop * first.gradient_norm &&
                          max_abs_energy <= energy_cap;
    }
    return diag;
}

int morse_index(const FourierField& u, const Nonlinearity& nl,
                const TorusConfig& cfg) {
    const ModeLattice& lat = u.lattice();
    const std::size_t n = lat.mode_count();
    if (n > 4096)
        throw ParameterError("morse_index: lattice too large for dense assembly");
    Eigen::MatrixXd H(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    std::vector<double> e(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        e[j] = 1.0;
        const FourierField wj = unpack_real(e, lat);
        e[j] = 0.0;
        const std::vector<double> col = pack_real(hessian_vec(u, wj, nl, cfg));
        for (std::size_t i = 0; i < n; ++i)
            H(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = col[i];
    }
    // Symmetrize away round-off before the eigensolve.
    H = 0.5 * (H + H.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
    int count = 0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
        if (es.eigenvalues()[i] < -1e-8 * scale) ++count;
    return count;
}

}  // namespace fracperiod
