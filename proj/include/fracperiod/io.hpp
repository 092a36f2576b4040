#pragma once
// Run configuration (one JSON document), the FHST binary field format, and a
// deterministic JSON emitter. Everything a run writes is a pure function of
// (config, seed): doubles are printed with 17 significant digits, object keys
// keep insertion order, and no clocks or machine identifiers leak in.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "fracperiod/energy.hpp"
#include "fracperiod/solver.hpp"
#include "fracperiod/torus.hpp"

namespace fracperiod {

// ---------------------------------------------------------------------------
// Deterministic JSON document builder.

class JsonValue;
using JsonArray = std::vector<JsonValue>;
// Insertion-ordered object: emitted exactly in the order keys were added.
using JsonObject = std::vector<std::pair<std::string, JsonValue>>;

class JsonValue {
  public:
    JsonValue() : data_(nullptr) {}
    JsonValue(std::nullptr_t) : data_(nullptr) {}
    JsonValue(bool b) : data_(b) {}
    JsonValue(int v) : data_(static_cast<long long>(v)) {}
    JsonValue(long long v) : data_(v) {}
    JsonValue(unsigned long long v) : data_(static_cast<long long>(v)) {}
    JsonValue(std::size_t v) : data_(static_cast<long long>(v)) {}
    JsonValue(double v);  // requires a finite value
    JsonValue(const char* s) : data_(std::string(s)) {}
    JsonValue(std::string s) : data_(std::move(s)) {}
    JsonValue(JsonArray a) : data_(std::move(a)) {}
    JsonValue(JsonObject o) : data_(std::move(o)) {}

    // Two-space indented dump with a trailing newline at the top level.
    std::string dump() const;

  private:
    void write(std::string& out, int indent) const;
    std::variant<std::nullptr_t, bool, long long, double, std::string, JsonArray,
                 JsonObject>
        data_;
};

// Fixed 17-significant-digit decimal form (round-trips any finite double).
std::string format_double(double v);

// ---------------------------------------------------------------------------
// FHST binary field format: magic "FHST", u32 version = 1, u32 N, N × u64
// grid sizes, f64 period, f64 mass, f64 s, then row-major little-endian f64
// samples. The extended variant (cylinder dumps) inserts a y-axis block
// (u64 count, count × f64 nodes) between the header and the samples; samples
// are then y-major: one full x-grid per node, slowest index first.

struct FieldFile {
    std::uint32_t dim = 0;
    std::vector<std::uint64_t> grid_sizes;
    double period = 0.0;
    double mass = 0.0;
    double s = 0.0;
    std::vector<double> samples;

    std::size_t grid_point_count() const;
};

struct ExtendedFieldFile {
    FieldFile base;               // samples hold y_count × grid_point_count
    std::vector<double> y_nodes;  // heights, in file order
};

void write_field_file(const std::string& path, const FieldFile& file);
FieldFile read_field_file(const std::string& path);
void write_extended_field_file(const std::string& path, const ExtendedFieldFile& file);
ExtendedFieldFile read_extended_field_file(const std::string& path);

// Synthesize u on its collocation grid and package it with the torus data.
FieldFile to_field_file(const FourierField& u, const TorusConfig& cfg);
// Re-analyze a sample dump. The file must match the given torus data and
// lattice exactly; throws FileFormatError otherwise.
FourierField from_field_file(const FieldFile& file, const TorusConfig& cfg,
                             const ModeLattice& lattice);

// ---------------------------------------------------------------------------
// Run configuration.

struct NonlinearitySpec {
    std::string kind = "zero";  // zero | rational_odd | rational_odd_modulated | custom
    double a = 0.0;
    double b = 0.0;
    double omega = 1.0;
    double t_max = 0.0;
    double lambda0 = 0.0;
    bool odd = true;
    std::vector<double> f_samples;

    Nonlinearity build() const;
};

// Seed field description shared by solve initialization and extend sources.
struct FieldSpec {
    std::string kind = "constant";  // constant | eigenmode | random | file
    double value = 0.6;             // constant value
    int rank = 1;                   // eigenmode rank (1-based)
    double amplitude = 0.5;         // eigenmode/random scale
    double sign = 1.0;
    std::string path;               // FHST file for kind = "file"

    FourierField build(const TorusConfig& cfg, const ModeLattice& lattice,
                       Rng& rng) const;
};

struct RunConfig {
    TorusConfig torus;
    std::vector<int> grid;  // per-dimension collocation sizes, odd, ≥ 3
    NonlinearitySpec nonlinearity;
    SolverOptions solver;
    std::string output_dir = "out";
    unsigned long long seed = 0;

    int spectrum_count = 30;

    std::string solve_mode = "auto";  // auto | newton | direct_min | multiplicity
    FieldSpec initial;

    struct ExtendBlock {
        FieldSpec source;
        std::vector<double> y_nodes;  // explicit nodes, or
        int y_count = 9;              // uniform spacing up to y_max
        double y_max = 4.0;
    } extend;

    struct GradCheckBlock {
        int trials = 100;
        double step = 1e-5;
        double sigma = 0.5;
        double tolerance = 1e-6;
    } gradcheck;

    ModeLattice lattice() const;
    std::vector<double> extend_nodes() const;  // resolved y grid, ascending
};

// Parses and validates a config document; unknown keys are rejected with the
// offending key named. Throws ConfigError.
RunConfig parse_run_config_text(const std::string& text, const std::string& origin);
RunConfig parse_run_config(const std::string& path);

}  // namespace fracperiod
