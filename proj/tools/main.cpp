// fracperiod — spectra, hypothesis checks, critical-point solves, cylinder
// extensions, cross-module verification and finite-difference audits for the
// periodic fractional operator (-Δ+m²)^s, driven by a single JSON config.
//
// Exit codes: 0 success; 2 configuration problem; 3 hypothesis violation
// (--strict); 4 solver nonconvergence (--strict); 5 verification failure.

#include <cstdio>
#include <exception>
#include <functional>
#include <string>

#include <CLI11.hpp>

#include "fracperiod/commands.hpp"
#include "fracperiod/common.hpp"
#include "fracperiod/io.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string output_dir;  // overrides the config when given
    long long seed = -1;     // overrides the config when ≥ 0
    fracperiod::CommandFlags flags;
};

void attach(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "JSON run configuration")
        ->required();
    cmd->add_option("--output-dir", args.output_dir,
                    "artifact directory (overrides the config)");
    cmd->add_option("--seed", args.seed, "RNG seed (overrides the config)");
    cmd->add_flag("--strict", args.flags.strict,
                  "hypothesis violations and nonconvergence become fatal");
    cmd->add_flag("--emit-csv", args.flags.emit_csv,
                  "also write CSV tables next to the JSON artifacts");
}

int dispatch(const CommonArgs& args,
             const std::function<int(const fracperiod::RunConfig&,
                                     const fracperiod::CommandFlags&)>& command) {
    try {
        fracperiod::RunConfig cfg = fracperiod::parse_run_config(args.config_path);
        if (!args.output_dir.empty()) cfg.output_dir = args.output_dir;
        if (args.seed >= 0) cfg.seed = static_cast<unsigned long long>(args.seed);
        return command(cfg, args.flags);
    } catch (const fracperiod::ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const fracperiod::SpectrumRangeError& e) {
        std::fprintf(stderr,
                     "error: %s\n(the configured lattice cannot certify the "
                     "requested spectral range; enlarge the grid)\n",
                     e.what());
        return 2;
    } catch (const fracperiod::ParameterError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const fracperiod::ShapeError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const fracperiod::FileFormatError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const fracperiod::HypothesisError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "fracperiod: periodic fractional operators, their spectra, and "
        "critical points of the associated energy"};
    app.require_subcommand(1);

    struct Entry {
        const char* name;
        const char* help;
        int (*run)(const fracperiod::RunConfig&, const fracperiod::CommandFlags&);
    };
    const Entry entries[] = {
        {"spectrum", "enumerate the certified spectrum and resonance status",
         fracperiod::cmd_spectrum},
        {"check", "evaluate the solvability hypotheses for the configured problem",
         fracperiod::cmd_check},
        {"solve", "find critical points (direct minimization, Newton, or sweep)",
         fracperiod::cmd_solve},
        {"extend", "dump the half-cylinder extension of a source field",
         fracperiod::cmd_extend},
        {"verify", "run every cross-module invariant check",
         fracperiod::cmd_verify},
        {"gradcheck", "finite-difference audit of the gradient and Hessian",
         fracperiod::cmd_gradcheck},
    };

    CommonArgs args[std::size(entries)];
    for (std::size_t i = 0; i < std::size(entries); ++i) {
        CLI::App* sub = app.add_subcommand(entries[i].name, entries[i].help);
        attach(sub, args[i]);
    }

    CLI11_PARSE(app, argc, argv);

    for (std::size_t i = 0; i < std::size(entries); ++i)
        if (app.get_subcommands().front()->get_name() == entries[i].name)
            return dispatch(args[i], entries[i].run);
    std::fprintf(stderr, "error: no command given\n");
    return 2;
}
