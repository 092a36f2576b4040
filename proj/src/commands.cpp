#include "fracperiod/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "fracperiod/common.hpp"
#include "fracperiod/energy.hpp"
#include "fracperiod/extension.hpp"
#include "fracperiod/fractional_operator.hpp"
#include "fracperiod/solver.hpp"
#include "fracperiod/verify.hpp"

namespace fracperiod {

namespace {

namespace fs = std::filesystem;

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FileFormatError(path + ": cannot open for writing");
    out << text;
    if (!out) throw FileFormatError(path + ": write failed");
}

std::string artifact_path(const RunConfig& cfg, const std::string& name) {
    fs::create_directories(cfg.output_dir);
    return (fs::path(cfg.output_dir) / name).string();
}

JsonValue torus_json(const TorusConfig& t) {
    JsonObject o;
    o.emplace_back("period", t.period);
    o.emplace_back("dim", t.dim);
    o.emplace_back("mass", t.mass);
    o.emplace_back("s", t.s);
    o.emplace_back("lambda_inf", t.lambda_inf);
    o.emplace_back("kappa_s", t.kappa_s());
    o.emplace_back("critical_exponent",
                   std::isfinite(t.critical_exponent())
                       ? JsonValue(t.critical_exponent())
                       : JsonValue("infinite"));
    return JsonValue(std::move(o));
}

JsonValue grid_json(const RunConfig& cfg) {
    JsonArray a;
    for (int n : cfg.grid) a.emplace_back(n);
    return JsonValue(std::move(a));
}

JsonValue nonlinearity_json(const NonlinearitySpec& nl) {
    JsonObject o;
    o.emplace_back("kind", nl.kind);
    if (nl.kind == "rational_odd" || nl.kind == "rational_odd_modulated")
        o.emplace_back("a", nl.a);
    if (nl.kind == "rational_odd_modulated") {
        o.emplace_back("b", nl.b);
        o.emplace_back("omega", nl.omega);
    }
    if (nl.kind == "custom") {
        o.emplace_back("t_max", nl.t_max);
        o.emplace_back("lambda0", nl.lambda0);
        o.emplace_back("odd", nl.odd);
        o.emplace_back("f_sample_count", nl.f_samples.size());
    }
    return JsonValue(std::move(o));
}

JsonValue solver_json(const SolverOptions& o) {
    JsonObject j;
    j.emplace_back("gradient_tolerance", o.gradient_tolerance);
    j.emplace_back("max_newton_iterations", o.max_newton_iterations);
    j.emplace_back("linear_tolerance", o.linear_tolerance);
    j.emplace_back("max_linear_iterations", o.max_linear_iterations);
    j.emplace_back("max_line_search_backtracks", o.max_line_search_backtracks);
    j.emplace_back("distinctness_tolerance", o.distinctness_tolerance);
    j.emplace_back("use_deflation", o.use_deflation);
    j.emplace_back("hypothesis_override", o.hypothesis_override);
    j.emplace_back("compute_morse_index", o.compute_morse_index);
    JsonArray amps;
    for (double a : o.seed_amplitudes) amps.emplace_back(a);
    j.emplace_back("seed_amplitudes", std::move(amps));
    return JsonValue(std::move(j));
}

JsonValue resonance_json(const ResonanceCheck& r) {
    JsonObject o;
    o.emplace_back("resonant", r.resonant);
    o.emplace_back("distance", r.distance);
    o.emplace_back("nearest_lambda", r.nearest_lambda);
    return JsonValue(std::move(o));
}

JsonValue hypotheses_json(const HypothesisReport& h) {
    JsonObject o;
    o.emplace_back("resonance", resonance_json(h.resonance));
    o.emplace_back("lambda0", h.lambda0);
    o.emplace_back("lambda_inf", h.lambda_inf);
    o.emplace_back("odd", h.odd);
    o.emplace_back("direct_minimization", h.direct_minimization);
    o.emplace_back("gap_condition", h.gap_condition);
    o.emplace_back("h", h.h);
    o.emplace_back("k", h.k);
    o.emplace_back("pair_count", h.pair_count);
    o.emplace_back("lambda_h", h.lambda_h);
    o.emplace_back("lambda_k", h.lambda_k);
    o.emplace_back("applicability", applicability_label(h.applicability));
    JsonArray checks;
    for (const auto& item : h.asymptotics) {
        JsonObject c;
        c.emplace_back("name", item.name);
        c.emplace_back("pass", item.pass);
        c.emplace_back("measure", item.measure);
        c.emplace_back("threshold", item.threshold);
        checks.emplace_back(std::move(c));
    }
    o.emplace_back("asymptotics", std::move(checks));
    return JsonValue(std::move(o));
}

JsonValue record_json(const SolutionRecord& rec, int index,
                      const std::string& field_file) {
    JsonObject o;
    o.emplace_back("index", index);
    o.emplace_back("seed_tag", rec.seed_tag);
    o.emplace_back("converged", rec.converged);
    o.emplace_back("newton_iterations", rec.newton_iterations);
    o.emplace_back("energy", rec.energy);
    o.emplace_back("gradient_norm", rec.gradient_norm);
    o.emplace_back("l2", rec.l2);
    o.emplace_back("hs", rec.hs);
    o.emplace_back("refined_residual", rec.refined_residual);
    o.emplace_back("verified", rec.verified);
    if (rec.morse_index >= 0) o.emplace_back("morse_index", rec.morse_index);
    if (!field_file.empty()) o.emplace_back("field_file", field_file);
    return JsonValue(std::move(o));
}

void common_preamble(JsonObject& doc, const char* command, const RunConfig& cfg) {
    doc.emplace_back("command", command);
    doc.emplace_back("seed", cfg.seed);
    doc.emplace_back("torus", torus_json(cfg.torus));
    doc.emplace_back("grid", grid_json(cfg));
}

// λ∞ sitting on the spectrum voids every statement; surfaced as a warning in
// non-strict runs and as exit code 3 under --strict.
std::string resonance_warning(const ResonanceCheck& r) {
    return "lambda_inf is resonant: distance " + format_double(r.distance) +
           " to eigenvalue " + format_double(r.nearest_lambda);
}

}  // namespace

int cmd_spectrum(const RunConfig& cfg, const CommandFlags& flags) {
    const ModeLattice lat = cfg.lattice();
    const SpectrumTable table =
        enumerate_spectrum(cfg.torus, lat, cfg.spectrum_count);
    const ResonanceCheck res = is_resonant(cfg.torus.lambda_inf, table);

    JsonObject doc;
    common_preamble(doc, "spectrum", cfg);
    doc.emplace_back("certified_lambda_max", table.certified_lambda_max);
    doc.emplace_back("total_ranks", table.total_ranks);
    doc.emplace_back("resonance", resonance_json(res));

    JsonArray warnings;
    if (res.resonant) warnings.emplace_back(resonance_warning(res));
    doc.emplace_back("warnings", std::move(warnings));

    const int rank_count = std::min(cfg.spectrum_count, table.total_ranks);
    JsonArray eigenvalues;
    for (int r = 1; r <= rank_count; ++r) eigenvalues.emplace_back(table.eigenvalue(r));
    doc.emplace_back("eigenvalues", std::move(eigenvalues));

    JsonArray levels;
    for (const SpectrumLevel& level : table.levels) {
        if (level.first_rank > rank_count) break;
        JsonObject l;
        l.emplace_back("lambda", level.lambda);
        l.emplace_back("mu", level.mu);
        l.emplace_back("k_squared", static_cast<long long>(level.k_squared));
        l.emplace_back("multiplicity", level.multiplicity);
        l.emplace_back("first_rank", level.first_rank);
        l.emplace_back("last_rank", level.last_rank);
        levels.emplace_back(std::move(l));
    }
    doc.emplace_back("levels", std::move(levels));

    write_text(artifact_path(cfg, "spectrum.json"), JsonValue(std::move(doc)).dump());

    if (flags.emit_csv) {
        std::string csv = "rank,lambda,mu,k_squared,multiplicity\n";
        for (int r = 1; r <= rank_count; ++r) {
            const SpectrumLevel& level = table.level_of_rank(r);
            csv += std::to_string(r) + "," + format_double(level.lambda) + "," +
                   format_double(level.mu) + "," + std::to_string(level.k_squared) +
                   "," + std::to_string(level.multiplicity) + "\n";
        }
        write_text(artifact_path(cfg, "spectrum.csv"), csv);
    }

    std::printf("spectrum: %d ranks, lambda_1 = %s, certified up to %s\n",
                rank_count, format_double(table.eigenvalue(1)).c_str(),
                format_double(table.certified_lambda_max).c_str());
    if (res.resonant) std::printf("warning: %s\n", resonance_warning(res).c_str());
    return 0;
}

int cmd_check(const RunConfig& cfg, const CommandFlags& flags) {
    const ModeLattice lat = cfg.lattice();
    const SpectrumTable table =
        enumerate_spectrum(cfg.torus, lat, cfg.spectrum_count);
    const Nonlinearity nl = cfg.nonlinearity.build();
    const HypothesisReport report = check_hypotheses(nl, cfg.torus, table);

    JsonObject doc;
    common_preamble(doc, "check", cfg);
    doc.emplace_back("nonlinearity", nonlinearity_json(cfg.nonlinearity));
    doc.emplace_back("hypotheses", hypotheses_json(report));
    write_text(artifact_path(cfg, "hypotheses.json"),
               JsonValue(std::move(doc)).dump());

    std::printf("check: lambda0 = %s, lambda_inf = %s -> %s\n",
                format_double(report.lambda0).c_str(),
                format_double(report.lambda_inf).c_str(),
                applicability_label(report.applicability).c_str());
    if (report.gap_condition)
        std::printf("check: gap window h = %d, k = %d, pair bound %d\n", report.h,
                    report.k, report.pair_count);
    if (report.resonance.resonant)
        std::printf("warning: %s\n", resonance_warning(report.resonance).c_str());

    if (flags.strict && report.applicability == Applicability::NoneResonant)
        return 3;
    return 0;
}

int cmd_solve(const RunConfig& cfg, const CommandFlags& flags) {
    const ModeLattice lat = cfg.lattice();
    const TorusConfig& torus = cfg.torus;
    const SpectrumTable table =
        enumerate_spectrum(torus, lat, cfg.spectrum_count);
    const Nonlinearity nl = cfg.nonlinearity.build();
    const HypothesisReport hyp = check_hypotheses(nl, torus, table);

    SolverOptions opts = cfg.solver;
    std::vector<std::string> warnings;
    if (hyp.resonance.resonant) {
        if (flags.strict) {
            std::fprintf(stderr, "solve: %s\n",
                         resonance_warning(hyp.resonance).c_str());
            return 3;
        }
        warnings.push_back(resonance_warning(hyp.resonance));
    }

    // Resolve "auto" against the hypothesis report.
    std::string mode = cfg.solve_mode;
    if (mode == "auto") {
        switch (hyp.applicability) {
            case Applicability::DirectMinimization: mode = "direct_min"; break;
            case Applicability::Multiplicity: mode = "multiplicity"; break;
            case Applicability::Existence:
            case Applicability::NoneResonant: mode = "newton"; break;
        }
    }
    if (mode == "multiplicity" && !opts.hypothesis_override &&
        (hyp.resonance.resonant || !hyp.gap_condition)) {
        if (flags.strict) {
            std::fprintf(stderr,
                         "solve: multiplicity hypotheses fail (gap_condition=%s)\n",
                         hyp.gap_condition ? "true" : "false");
            return 3;
        }
        opts.hypothesis_override = true;
        warnings.push_back(
            "multiplicity hypotheses fail; proceeding under hypothesis_override");
    }

    Rng rng(cfg.seed);
    std::vector<SolutionRecord> solutions;
    std::vector<SolutionRecord> nonconverged;
    JsonObject counts;
    bool solver_failed = false;  // exit 4 under --strict, after artifacts
    if (mode == "multiplicity") {
        MultiplicityReport report = solve_multiplicity(nl, torus, lat, opts);
        solutions = std::move(report.solutions);
        nonconverged = std::move(report.nonconverged);
        counts.emplace_back("attempts", report.attempts);
        counts.emplace_back("converged_attempts", report.converged_attempts);
        counts.emplace_back("distinct_pairs", report.distinct_pairs);
        counts.emplace_back("trivial_results", report.trivial_results);
        counts.emplace_back("duplicate_results", report.duplicate_results);
        counts.emplace_back("nonconverged", static_cast<int>(nonconverged.size()));
        solver_failed = report.converged_attempts == 0 && report.attempts > 0;
    } else {
        SolutionRecord rec;
        if (mode == "direct_min") {
            const FourierField init = cfg.initial.build(torus, lat, rng);
            rec = solve_direct_min(nl, torus, lat, opts, &init);
            rec.seed_tag = "direct_min," + cfg.initial.kind;
        } else {
            const FourierField init = cfg.initial.build(torus, lat, rng);
            rec = solve_newton(nl, torus, init, opts);
            rec.seed_tag = "newton," + cfg.initial.kind;
        }
        if (opts.compute_morse_index && rec.converged)
            rec.morse_index = morse_index(rec.u, nl, torus);
        counts.emplace_back("attempts", 1);
        counts.emplace_back("converged_attempts", rec.converged ? 1 : 0);
        const bool nontrivial = rec.converged && rec.l2 > opts.distinctness_tolerance;
        counts.emplace_back("distinct_pairs", nontrivial ? 1 : 0);
        counts.emplace_back("trivial_results", rec.converged && !nontrivial ? 1 : 0);
        counts.emplace_back("duplicate_results", 0);
        counts.emplace_back("nonconverged", rec.converged ? 0 : 1);
        solver_failed = !rec.converged;
        if (rec.converged)
            solutions.push_back(std::move(rec));
        else
            nonconverged.push_back(std::move(rec));
    }

    JsonObject doc;
    common_preamble(doc, "solve", cfg);
    doc.emplace_back("mode", mode);
    doc.emplace_back("nonlinearity", nonlinearity_json(cfg.nonlinearity));
    doc.emplace_back("solver", solver_json(opts));
    doc.emplace_back("hypotheses", hypotheses_json(hyp));
    JsonArray warn_json;
    for (const std::string& w : warnings) warn_json.emplace_back(w);
    doc.emplace_back("warnings", std::move(warn_json));
    doc.emplace_back("counts", JsonValue(std::move(counts)));

    JsonArray records;
    std::string csv =
        "index,seed_tag,converged,newton_iterations,energy,gradient_norm,l2,hs,"
        "refined_residual,verified\n";
    for (std::size_t i = 0; i < solutions.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "solution_%03zu.fhst", i);
        write_field_file(artifact_path(cfg, name),
                         to_field_file(solutions[i].u, torus));
        records.emplace_back(record_json(solutions[i], static_cast<int>(i), name));
        const SolutionRecord& r = solutions[i];
        csv += std::to_string(i) + "," + r.seed_tag + "," +
               (r.converged ? "1," : "0,") + std::to_string(r.newton_iterations) +
               "," + format_double(r.energy) + "," +
               format_double(r.gradient_norm) + "," + format_double(r.l2) + "," +
               format_double(r.hs) + "," + format_double(r.refined_residual) + "," +
               (r.verified ? "1" : "0") + "\n";
    }
    doc.emplace_back("solutions", std::move(records));

    JsonArray failed;
    for (const SolutionRecord& rec : nonconverged) {
        JsonObject o;
        o.emplace_back("seed_tag", rec.seed_tag);
        o.emplace_back("newton_iterations", rec.newton_iterations);
        o.emplace_back("gradient_norm", rec.gradient_norm);
        o.emplace_back("l2", rec.l2);
        failed.emplace_back(std::move(o));
    }
    doc.emplace_back("nonconverged", std::move(failed));

    write_text(artifact_path(cfg, "manifest.json"), JsonValue(std::move(doc)).dump());
    if (flags.emit_csv) write_text(artifact_path(cfg, "solutions.csv"), csv);

    std::printf("solve: mode %s, %zu solution(s), %zu nonconverged attempt(s)\n",
                mode.c_str(), solutions.size(), nonconverged.size());
    for (const std::string& w : warnings)
        std::printf("warning: %s\n", w.c_str());
    return flags.strict && solver_failed ? 4 : 0;
}

int cmd_extend(const RunConfig& cfg, const CommandFlags& flags) {
    (void)flags;
    const ModeLattice lat = cfg.lattice();
    Rng rng(cfg.seed);
    const FourierField u = cfg.extend.source.build(cfg.torus, lat, rng);
    const ExtendedField v = extend(u, cfg.torus);
    const std::vector<double> nodes = cfg.extend_nodes();

    ExtendedFieldFile file;
    file.base.dim = static_cast<std::uint32_t>(lat.dim());
    for (int n : lat.grid_sizes)
        file.base.grid_sizes.push_back(static_cast<std::uint64_t>(n));
    file.base.period = cfg.torus.period;
    file.base.mass = cfg.torus.mass;
    file.base.s = cfg.torus.s;
    file.y_nodes = nodes;
    for (double y : nodes) {
        const std::vector<double> slice = synthesize(v.slice(y), cfg.torus);
        file.base.samples.insert(file.base.samples.end(), slice.begin(), slice.end());
    }
    write_extended_field_file(artifact_path(cfg, "extension.fhst"), file);

    const double hs = hs_norm(u, cfg.torus, +1);
    JsonObject doc;
    common_preamble(doc, "extend", cfg);
    doc.emplace_back("source_kind", cfg.extend.source.kind);
    JsonArray y_json;
    for (double y : nodes) y_json.emplace_back(y);
    doc.emplace_back("y_nodes", std::move(y_json));
    doc.emplace_back("trace_l2", l2_norm(u));
    doc.emplace_back("trace_hs", hs);
    doc.emplace_back("cylinder_energy", cylinder_energy(v));
    doc.emplace_back("kappa_s_times_hs_squared",
                     cfg.torus.kappa_s() * hs * hs);
    doc.emplace_back("field_file", "extension.fhst");
    write_text(artifact_path(cfg, "extend.json"), JsonValue(std::move(doc)).dump());

    std::printf("extend: %zu slices on [%s, %s], energy %s\n", nodes.size(),
                format_double(nodes.front()).c_str(),
                format_double(nodes.back()).c_str(),
                format_double(cylinder_energy(v)).c_str());
    return 0;
}

int cmd_verify(const RunConfig& cfg, const CommandFlags& flags) {
    (void)flags;
    const VerifyReport report = run_verification(cfg, cfg.output_dir);

    JsonObject doc;
    common_preamble(doc, "verify", cfg);
    JsonArray checks;
    for (const VerifyCheck& c : report.checks) {
        JsonObject o;
        o.emplace_back("name", c.name);
        o.emplace_back("measured", c.measured);
        o.emplace_back("tolerance", c.tolerance);
        o.emplace_back("pass", c.pass);
        checks.emplace_back(std::move(o));
        std::printf("%s  %-42s measured %-13.6g tolerance %-13.6g\n",
                    c.pass ? "PASS" : "FAIL", c.name.c_str(), c.measured,
                    c.tolerance);
    }
    doc.emplace_back("checks", std::move(checks));
    doc.emplace_back("all_pass", report.all_pass);
    write_text(artifact_path(cfg, "verify.json"), JsonValue(std::move(doc)).dump());

    std::printf("verify: %zu checks, %s\n", report.checks.size(),
                report.all_pass ? "all passed" : "FAILURES present");
    return report.all_pass ? 0 : 5;
}

int cmd_gradcheck(const RunConfig& cfg, const CommandFlags& flags) {
    (void)flags;
    const ModeLattice lat = cfg.lattice();
    const TorusConfig& torus = cfg.torus;
    const Nonlinearity nl = cfg.nonlinearity.build();
    Rng rng(cfg.seed);

    const double step = cfg.gradcheck.step;
    double grad_err = 0.0, hess_err = 0.0;
    for (int trial = 0; trial < cfg.gradcheck.trials; ++trial) {
        FourierField u = random_real_field(lat, rng, cfg.gradcheck.sigma);
        FourierField w = random_real_field(lat, rng, 1.0);
        w *= 1.0 / l2_norm(w);

        FourierField step_w = w;
        step_w *= step;
        FourierField up = u, um = u;
        up += step_w;
        um -= step_w;

        const double fd = (energy(up, nl, torus) - energy(um, nl, torus)) /
                          (2.0 * step);
        const double directional = inner_l2(gradient(u, nl, torus), w);
        grad_err = std::max(grad_err, std::abs(fd - directional) /
                                          std::max(1.0, std::abs(fd)));

        FourierField gdiff = gradient(up, nl, torus);
        gdiff -= gradient(um, nl, torus);
        gdiff *= 1.0 / (2.0 * step);
        gdiff -= hessian_vec(u, w, nl, torus);
        hess_err = std::max(hess_err, l2_norm(gdiff));
    }

    const bool pass =
        grad_err <= cfg.gradcheck.tolerance && hess_err <= cfg.gradcheck.tolerance;

    JsonObject doc;
    common_preamble(doc, "gradcheck", cfg);
    doc.emplace_back("nonlinearity", nonlinearity_json(cfg.nonlinearity));
    doc.emplace_back("trials", cfg.gradcheck.trials);
    doc.emplace_back("step", step);
    doc.emplace_back("sigma", cfg.gradcheck.sigma);
    doc.emplace_back("max_gradient_relative_error", grad_err);
    doc.emplace_back("max_hessian_error", hess_err);
    doc.emplace_back("tolerance", cfg.gradcheck.tolerance);
    doc.emplace_back("pass", pass);
    write_text(artifact_path(cfg, "gradcheck.json"),
               JsonValue(std::move(doc)).dump());

    std::printf(
        "gradcheck: max relative error %s over %d trials at step %s (tolerance "
        "%s) -> %s\n",
        format_double(grad_err).c_str(), cfg.gradcheck.trials,
        format_double(step).c_str(), format_double(cfg.gradcheck.tolerance).c_str(),
        pass ? "pass" : "FAIL");
    return pass ? 0 : 5;
}

}  // namespace fracperiod
