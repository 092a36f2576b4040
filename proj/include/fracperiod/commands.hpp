#pragma once
// The six CLI commands as library functions. Each takes a parsed RunConfig,
// writes its JSON artifacts (and FHST field dumps) under cfg.output_dir, and
// returns the process exit code:
//   0  success
//   2  configuration problem (reported by the caller via exceptions)
//   3  hypothesis violation under --strict
//   4  solver nonconvergence under --strict
//   5  verification / finite-difference check failure
// Manifests contain no timestamps or machine identifiers and print doubles
// with 17 significant digits, so identical (config, seed) reruns are
// byte-identical.

#include <string>

#include "fracperiod/io.hpp"

namespace fracperiod {

struct CommandFlags {
    bool strict = false;    // promote hypothesis violations / nonconvergence
    bool emit_csv = false;  // also write plotting-friendly CSV tables
};

int cmd_spectrum(const RunConfig& cfg, const CommandFlags& flags);
int cmd_check(const RunConfig& cfg, const CommandFlags& flags);
int cmd_solve(const RunConfig& cfg, const CommandFlags& flags);
int cmd_extend(const RunConfig& cfg, const CommandFlags& flags);
int cmd_verify(const RunConfig& cfg, const CommandFlags& flags);
int cmd_gradcheck(const RunConfig& cfg, const CommandFlags& flags);

}  // namespace fracperiod
