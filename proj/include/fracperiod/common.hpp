#pragma once
// Shared error types and small utilities used across the library.

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace fracperiod {

// Thrown when an input container does not match the expected dimensions.
struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Thrown when a scalar or structural parameter is out of its admissible range.
struct ParameterError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Thrown when a run configuration file is malformed or inconsistent.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown when a query exceeds the certified part of an enumerated spectrum.
struct SpectrumRangeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown on unreadable or structurally invalid binary field files.
struct FileFormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown when a solve is requested under hypotheses the checker rejects
// (resonant λ∞, failed gap condition) and no override was given.
struct HypothesisError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// All stochastic pieces (restarts, random test fields) draw from this engine
// so a run is reproducible from a single seed.
using Rng = std::mt19937_64;

inline constexpr double kPi = 3.141592653589793238462643383279502884;

// Worker cap for parallel sweeps: FRACPERIOD_THREADS, default 1.
// With a cap of 1 every sweep is sequential and bitwise deterministic.
int worker_thread_cap();

}  // namespace fracperiod
