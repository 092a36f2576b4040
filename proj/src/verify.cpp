#include "fracperiod/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <limits>
#include <vector>

#include "fracperiod/common.hpp"
#include "fracperiod/energy.hpp"
#include "fracperiod/extension.hpp"
#include "fracperiod/fractional_operator.hpp"
#include "fracperiod/solver.hpp"

namespace fracperiod {

namespace {

struct Suite {
    std::vector<VerifyCheck> checks;

    void add(std::string name, double measured, double tolerance) {
        checks.push_back({std::move(name), measured, tolerance,
                          measured <= tolerance});
    }
};

double max_coeff_diff(const FourierField& a, const FourierField& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.coeffs().size(); ++i)
        worst = std::max(worst, std::abs(a.coeffs()[i] - b.coeffs()[i]));
    return worst;
}

// Collocation samples of the rank-1-based real eigenfunction are not needed;
// checks draw random band-limited fields instead so every mode participates.

void torus_checks(Suite& out, const RunConfig& rc, Rng& rng) {
    const TorusConfig& cfg = rc.torus;
    const ModeLattice lat = rc.lattice();

    // Transform round trips. The collocation grid matches the mode count, so
    // both compositions are identities up to round-off.
    FourierField u = random_real_field(lat, rng, 1.0);
    const std::vector<double> samples = synthesize(u, cfg);
    const FourierField back = analyze(samples, lat, cfg);
    out.add("torus.analyze_synthesize_roundtrip",
            max_coeff_diff(u, back) / std::max(1.0, l2_norm(u)), 1e-12);

    std::vector<double> raw(lat.grid_point_count());
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (auto& v : raw) v = gauss(rng);
    const FourierField w = analyze(raw, lat, cfg);
    const std::vector<double> raw_back = synthesize(w, cfg);
    double sample_diff = 0.0, sample_scale = 1.0;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        sample_diff = std::max(sample_diff, std::abs(raw[i] - raw_back[i]));
        sample_scale = std::max(sample_scale, std::abs(raw[i]));
    }
    out.add("torus.synthesize_analyze_roundtrip", sample_diff / sample_scale, 1e-12);

    // Parseval: the coefficient norm equals the grid quadrature of u².
    double quad = 0.0;
    for (double v : samples) quad += v * v;
    quad *= cfg.volume() / static_cast<double>(lat.grid_point_count());
    const double l2sq = l2_norm(u) * l2_norm(u);
    out.add("torus.parseval_identity", std::abs(quad - l2sq) / std::max(1.0, l2sq),
            1e-12);

    // Real analysis output stays tagged real (Hermitian symmetry pinned).
    out.add("torus.analysis_reality", w.is_real() ? 0.0 : 1.0, 0.0);

    // Packed coordinates are an L²-isometry.
    const std::vector<double> dof = pack_real(u);
    double dof_norm = 0.0;
    for (double v : dof) dof_norm += v * v;
    dof_norm = std::sqrt(dof_norm);
    out.add("torus.pack_isometry",
            std::abs(dof_norm - l2_norm(u)) / std::max(1.0, l2_norm(u)), 1e-12);
    const FourierField unpacked = unpack_real(dof, lat);
    out.add("torus.pack_roundtrip", max_coeff_diff(u, unpacked), 1e-13);
}

void operator_checks(Suite& out, const RunConfig& rc, Rng& rng,
                     const SpectrumTable& table) {
    const TorusConfig& cfg = rc.torus;
    const ModeLattice lat = rc.lattice();

    // Ground eigenvalue is m^{2s} and simple.
    out.add("operator.ground_eigenvalue",
            std::abs(table.eigenvalue(1) - std::pow(cfg.mass * cfg.mass, cfg.s)),
            1e-14);
    out.add("operator.ground_simple",
            static_cast<double>(table.levels.front().multiplicity - 1), 0.0);

    // Levels strictly increase and rank bookkeeping is consistent.
    double monotone_defect = 0.0;
    std::size_t rank_sum = 0;
    int next_rank = 1;
    for (const auto& level : table.levels) {
        rank_sum += level.modes.size();
        if (level.first_rank != next_rank) monotone_defect += 1.0;
        next_rank = level.last_rank + 1;
    }
    for (int r = 2; r <= table.total_ranks; ++r)
        monotone_defect +=
            std::max(0.0, table.eigenvalue(r - 1) - table.eigenvalue(r));
    out.add("operator.levels_ordered", monotone_defect, 0.0);
    out.add("operator.rank_bookkeeping",
            static_cast<double>(rank_sum) - static_cast<double>(table.total_ranks),
            0.0);

    // Rayleigh quotients of the first eigenfunctions reproduce the table.
    const int probe = std::min(8, table.total_ranks);
    const auto basis = real_eigenbasis(cfg, lat, probe);
    double rq_defect = 0.0;
    for (int r = 1; r <= probe; ++r) {
        const double lambda = table.eigenvalue(r);
        rq_defect = std::max(
            rq_defect, std::abs(rayleigh_quotient(basis[static_cast<std::size_t>(
                                    r - 1)], cfg) -
                                lambda) /
                           lambda);
    }
    out.add("operator.rayleigh_quotients", rq_defect, 1e-12);

    // apply_inverse undoes apply_operator.
    FourierField u = random_real_field(lat, rng, 1.0);
    const FourierField round = apply_inverse(apply_operator(u, cfg), cfg);
    out.add("operator.inverse_roundtrip",
            max_coeff_diff(u, round) / std::max(1.0, l2_norm(u)), 1e-12);

    // |u|²_{ℍˢ} = ⟨(-Δ+m²)ˢu, u⟩.
    const double hs = hs_norm(u, cfg, +1);
    const double quad_form = inner_l2(apply_operator(u, cfg), u);
    out.add("operator.hs_norm_quadratic_form",
            std::abs(hs * hs - quad_form) / std::max(1.0, quad_form), 1e-12);

    // Resonance detector agrees with a direct distance scan.
    const ResonanceCheck res = is_resonant(cfg.lambda_inf, table);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& level : table.levels)
        best = std::min(best, std::abs(level.lambda - cfg.lambda_inf));
    out.add("operator.resonance_distance", std::abs(res.distance - best), 1e-12);
}

void extension_checks(Suite& out, const RunConfig& rc, Rng& rng) {
    const TorusConfig& cfg = rc.torus;
    const ModeLattice lat = rc.lattice();

    const ThetaProfile theta(cfg.s);
    out.add("extension.theta_at_origin", std::abs(theta.value(0.0) - 1.0), 0.0);

    // Closed form against the ODE integrator.
    std::vector<double> ys;
    for (double y = 1e-3; y <= 8.0; y *= 1.9) ys.push_back(y);
    const std::vector<double> ode = theta_via_ode(cfg.s, ys);
    double ode_defect = 0.0;
    for (std::size_t i = 0; i < ys.size(); ++i)
        ode_defect = std::max(ode_defect, std::abs(theta.value(ys[i]) - ode[i]));
    out.add("extension.theta_ode_crosscheck", ode_defect, 1e-6);

    if (cfg.s == 0.5) {
        double exp_defect = 0.0;
        for (double y = 0.0; y <= 20.0; y += 0.5)
            exp_defect = std::max(exp_defect,
                                  std::abs(theta.value(y) - std::exp(-y)));
        out.add("extension.theta_exponential_at_half", exp_defect, 1e-10);
    }

    out.add("extension.profile_energy_integral",
            std::abs(theta_energy_integral(cfg.s) / cfg.kappa_s() - 1.0), 1e-9);

    // Energy identity and conormal limit on a random field.
    FourierField u = random_real_field(lat, rng, 0.8);
    const ExtendedField v = extend(u, cfg);
    const double hs = hs_norm(u, cfg, +1);
    out.add("extension.energy_identity",
            std::abs(cylinder_energy(v) / (cfg.kappa_s() * hs * hs) - 1.0), 1e-6);

    // Dyadic sequence reaching deep enough that √μ_k·y is small for every
    // retained mode (the extrapolation needs its asymptotic regime).
    std::vector<double> y_seq;
    for (int j = 5; j <= 16; ++j) y_seq.push_back(std::pow(2.0, -j));
    const FourierField conormal = conormal_derivative(v, y_seq);
    FourierField want = apply_operator(u, cfg);
    want *= cfg.kappa_s();
    double conormal_defect = 0.0;
    for (std::size_t i = 0; i < want.coeffs().size(); ++i) {
        const double scale = std::abs(want.coeffs()[i]);
        if (scale < 1e-12) continue;
        conormal_defect = std::max(
            conormal_defect, std::abs(conormal.coeffs()[i] - want.coeffs()[i]) / scale);
    }
    out.add("extension.conormal_matches_operator", conormal_defect, 1e-5);

    // Trace inequality: zero bump sits on the equality case, a real bump pays.
    BumpPerturbation none;
    none.x_mode = std::vector<int>(static_cast<std::size_t>(cfg.dim), 0);
    const TraceGap eq = trace_inequality_check(v, none);
    out.add("extension.trace_equality_at_extension", std::abs(eq.gap), 1e-6);

    BumpPerturbation bump;
    bump.amplitude = 0.1;
    bump.y_span = 1.0;
    bump.x_mode = std::vector<int>(static_cast<std::size_t>(cfg.dim), 0);
    bump.x_mode[0] = 1;
    const TraceGap gap1 = trace_inequality_check(v, bump);
    out.add("extension.trace_gap_positive", -gap1.gap, -1e-12);
    bump.amplitude = 0.2;
    const TraceGap gap2 = trace_inequality_check(v, bump);
    out.add("extension.trace_gap_monotone", gap1.gap - gap2.gap, 0.0);

    // Linearity of the extension in the trace.
    FourierField w = random_real_field(lat, rng, 0.8);
    FourierField sum = u;
    sum += w;
    const double y_probe = 0.37;
    FourierField slice_sum = extend(sum, cfg).slice(y_probe);
    slice_sum -= extend(u, cfg).slice(y_probe);
    slice_sum -= extend(w, cfg).slice(y_probe);
    out.add("extension.linearity", l2_norm(slice_sum), 1e-12);
}

void energy_checks(Suite& out, const RunConfig& rc, Rng& rng,
                   const SpectrumTable& table) {
    const TorusConfig& cfg = rc.torus;
    const ModeLattice lat = rc.lattice();
    const Nonlinearity nl = rc.nonlinearity.build();

    // The nonlinearity's own structural checks.
    double failing = 0.0;
    for (const Nonlinearity::CheckItem& item : nl.self_check())
        if (!item.pass) failing += 1.0;
    out.add("energy.nonlinearity_self_check", failing, 0.0);

    // Central differences of the energy reproduce the gradient and the
    // Hessian-vector product.
    const double step = 1e-5;
    double grad_defect = 0.0, hess_defect = 0.0, sym_defect = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
        FourierField u = random_real_field(lat, rng, 0.5);
        FourierField w = random_real_field(lat, rng, 1.0);
        w *= 1.0 / l2_norm(w);

        FourierField up = u, um = u;
        FourierField step_w = w;
        step_w *= step;
        up += step_w;
        um -= step_w;
        const double fd = (energy(up, nl, cfg) - energy(um, nl, cfg)) / (2.0 * step);
        const double directional = inner_l2(gradient(u, nl, cfg), w);
        grad_defect = std::max(grad_defect, std::abs(fd - directional) /
                                                std::max(1.0, std::abs(fd)));

        FourierField gp = gradient(up, nl, cfg);
        gp -= gradient(um, nl, cfg);
        gp *= 1.0 / (2.0 * step);
        const FourierField hw = hessian_vec(u, w, nl, cfg);
        hess_defect =
            std::max(hess_defect, max_coeff_diff(gp, hw) / std::max(1.0, l2_norm(hw)));

        FourierField z = random_real_field(lat, rng, 1.0);
        const double hwz = inner_l2(hw, z);
        const double hzw = inner_l2(hessian_vec(u, z, nl, cfg), w);
        sym_defect = std::max(sym_defect,
                              std::abs(hwz - hzw) / std::max(1.0, std::abs(hwz)));
    }
    out.add("energy.gradient_fd_consistency", grad_defect, 1e-6);
    out.add("energy.hessian_fd_consistency", hess_defect, 1e-6);
    out.add("energy.hessian_symmetry", sym_defect, 1e-10);

    if (nl.odd()) {
        double even_defect = 0.0;
        for (int trial = 0; trial < 5; ++trial) {
            FourierField u = random_real_field(lat, rng, 0.7);
            even_defect =
                std::max(even_defect, std::abs(energy(u, nl, cfg) - energy(-u, nl, cfg)));
        }
        out.add("energy.evenness_for_odd_f", even_defect, 0.0);
    }

    // Hypothesis report indices are re-checkable against the spectrum table.
    try {
        const HypothesisReport report = check_hypotheses(nl, cfg, table);
        double defect = 0.0;
        if (report.gap_condition) {
            if (!(report.lambda0 + report.lambda_inf < report.lambda_h)) defect += 1.0;
            if (!(report.lambda_h <= report.lambda_k)) defect += 1.0;
            if (!(report.lambda_k < report.lambda_inf)) defect += 1.0;
            if (std::abs(table.eigenvalue(report.h) - report.lambda_h) > 0.0)
                defect += 1.0;
            if (std::abs(table.eigenvalue(report.k) - report.lambda_k) > 0.0)
                defect += 1.0;
            if (report.pair_count != report.k - report.h + 1) defect += 1.0;
        }
        if (report.resonance.resonant !=
            (is_resonant(cfg.lambda_inf, table).distance <= 1e-9))
            defect += 1.0;
        out.add("energy.hypothesis_report_consistent", defect, 0.0);
    } catch (const SpectrumRangeError&) {
        // The lattice cannot certify the window λ∞+|λ₀|; the checker refusing
        // is the contract, so there is nothing to re-check here.
    }
}

void solver_checks(Suite& out, const RunConfig& rc, Rng& rng,
                   const SpectrumTable& table) {
    const TorusConfig& cfg = rc.torus;
    const ModeLattice lat = rc.lattice();

    // In the linear problem the preconditioned Hessian is the identity, so
    // Newton lands on the unique solution u = 0 in at most two iterations.
    // Skipped when λ∞ is an eigenvalue (the linear problem is singular).
    if (!is_resonant(cfg.lambda_inf, table).resonant) {
        SolverOptions opts;
        opts.hypothesis_override = true;
        opts.use_deflation = false;
        const FourierField start = random_real_field(lat, rng, 0.5);
        const SolutionRecord rec =
            solve_newton(Nonlinearity::zero(), cfg, start, opts);
        out.add("solver.linear_newton_two_steps",
                rec.converged ? static_cast<double>(rec.newton_iterations) : 1e9,
                2.0);
        out.add("solver.linear_newton_zero_solution", rec.l2, 1e-9);
        out.add("solver.linear_newton_verified", rec.verified ? 0.0 : 1.0, 0.0);
    }
}

void io_checks(Suite& out, const RunConfig& rc, Rng& rng,
               const std::string& scratch_dir) {
    const TorusConfig& cfg = rc.torus;
    const ModeLattice lat = rc.lattice();
    namespace fs = std::filesystem;
    fs::create_directories(scratch_dir);

    // FHST round trip is bit-for-bit.
    const FourierField u = random_real_field(lat, rng, 1.3);
    const FieldFile file = to_field_file(u, cfg);
    const std::string path =
        (fs::path(scratch_dir) / "verify_roundtrip.fhst").string();
    write_field_file(path, file);
    const FieldFile loaded = read_field_file(path);
    double bit_defect = 0.0;
    if (loaded.dim != file.dim || loaded.grid_sizes != file.grid_sizes ||
        loaded.period != file.period || loaded.mass != file.mass ||
        loaded.s != file.s || loaded.samples.size() != file.samples.size())
        bit_defect = 1.0;
    else
        for (std::size_t i = 0; i < file.samples.size(); ++i)
            if (std::memcmp(&file.samples[i], &loaded.samples[i], sizeof(double)) !=
                0)
                bit_defect += 1.0;
    out.add("io.field_file_bitwise_roundtrip", bit_defect, 0.0);
    const FourierField relift = from_field_file(loaded, cfg, lat);
    out.add("io.field_file_reanalysis", max_coeff_diff(u, relift), 1e-12);
    fs::remove(path);

    // Extended variant.
    ExtendedFieldFile ext;
    ext.base = to_field_file(u, cfg);
    ext.y_nodes = {0.0, 0.25, 1.0};
    ext.base.samples.clear();
    const ExtendedField v = extend(u, cfg);
    for (double y : ext.y_nodes) {
        const std::vector<double> slice = synthesize(v.slice(y), cfg);
        ext.base.samples.insert(ext.base.samples.end(), slice.begin(), slice.end());
    }
    const std::string ext_path =
        (fs::path(scratch_dir) / "verify_roundtrip_ext.fhst").string();
    write_extended_field_file(ext_path, ext);
    const ExtendedFieldFile ext_loaded = read_extended_field_file(ext_path);
    double ext_defect = 0.0;
    if (ext_loaded.y_nodes != ext.y_nodes ||
        ext_loaded.base.samples.size() != ext.base.samples.size())
        ext_defect = 1.0;
    else
        for (std::size_t i = 0; i < ext.base.samples.size(); ++i)
            if (std::memcmp(&ext.base.samples[i], &ext_loaded.base.samples[i],
                            sizeof(double)) != 0)
                ext_defect += 1.0;
    out.add("io.extended_file_bitwise_roundtrip", ext_defect, 0.0);
    fs::remove(ext_path);

    // 17-significant-digit decimal strings reload to the same double.
    std::uniform_real_distribution<double> mag(-30.0, 30.0);
    double fmt_defect = 0.0;
    for (int i = 0; i < 200; ++i) {
        const double x = std::copysign(std::pow(10.0, mag(rng)),
                                       (i % 2 == 0) ? 1.0 : -1.0);
        if (std::strtod(format_double(x).c_str(), nullptr) != x) fmt_defect += 1.0;
    }
    out.add("io.double_format_roundtrip", fmt_defect, 0.0);
}

}  // namespace

VerifyReport run_verification(const RunConfig& cfg, const std::string& scratch_dir) {
    Suite suite;
    Rng rng(cfg.seed);

    const SpectrumTable table =
        enumerate_spectrum(cfg.torus, cfg.lattice(), cfg.spectrum_count);

    torus_checks(suite, cfg, rng);
    operator_checks(suite, cfg, rng, table);
    extension_checks(suite, cfg, rng);
    energy_checks(suite, cfg, rng, table);
    solver_checks(suite, cfg, rng, table);
    io_checks(suite, cfg, rng, scratch_dir);

    VerifyReport report;
    report.checks = std::move(suite.checks);
    report.all_pass = std::all_of(report.checks.begin(), report.checks.end(),
                                  [](const VerifyCheck& c) { return c.pass; });
    return report;
}

}  // namespace fracperiod
