#pragma once
// Cross-module invariant suite behind the `verify` command. Every check is a
// named scalar defect compared against a fixed tolerance; the suite is a pure
// function of (config, seed) and needs only a scratch directory for the file
// round-trip checks.

#include <string>
#include <vector>

#include "fracperiod/io.hpp"

namespace fracperiod {

struct VerifyCheck {
    std::string name;
    double measured = 0.0;   // defect; smaller is better
    double tolerance = 0.0;  // pass iff measured <= tolerance
    bool pass = false;
};

struct VerifyReport {
    std::vector<VerifyCheck> checks;
    bool all_pass = true;
};

// Runs every applicable invariant check on the configured problem. Checks that
// need a certified spectral window beyond what the configured lattice provides
// are skipped rather than failed; everything else is evaluated.
VerifyReport run_verification(const RunConfig& cfg, const std::string& scratch_dir);

}  // namespace fracperiod
