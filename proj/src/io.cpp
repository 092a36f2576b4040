#include "fracperiod/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "fracperiod/common.hpp"
#include "fracperiod/fractional_operator.hpp"

namespace fracperiod {

// ---------------------------------------------------------------------------
// JSON emission.

std::string format_double(double v) {
    if (!std::isfinite(v)) throw std::logic_error("non-finite value in JSON output");
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

JsonValue::JsonValue(double v) : data_(v) {
    if (!std::isfinite(v)) throw std::logic_error("non-finite value in JSON output");
}

namespace {

void write_escaped(std::string& out, const std::string& s) {
    out += '"';
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof buf, "\\u%04x", c);
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
    out += '"';
}

void indent_to(std::string& out, int indent) {
    out.append(static_cast<std::size_t>(indent) * 2, ' ');
}

}  // namespace

void JsonValue::write(std::string& out, int indent) const {
    if (std::holds_alternative<std::nullptr_t>(data_)) {
        out += "null";
    } else if (const bool* b = std::get_if<bool>(&data_)) {
        out += *b ? "true" : "false";
    } else if (const long long* i = std::get_if<long long>(&data_)) {
        out += std::to_string(*i);
    } else if (const double* d = std::get_if<double>(&data_)) {
        out += format_double(*d);
    } else if (const std::string* s = std::get_if<std::string>(&data_)) {
        write_escaped(out, *s);
    } else if (const JsonArray* a = std::get_if<JsonArray>(&data_)) {
        if (a->empty()) {
            out += "[]";
            return;
        }
        out += "[\n";
        for (std::size_t i = 0; i < a->size(); ++i) {
            indent_to(out, indent + 1);
            (*a)[i].write(out, indent + 1);
            if (i + 1 < a->size()) out += ',';
            out += '\n';
        }
        indent_to(out, indent);
        out += ']';
    } else {
        const JsonObject& o = std::get<JsonObject>(data_);
        if (o.empty()) {
            out += "{}";
            return;
        }
        out += "{\n";
        for (std::size_t i = 0; i < o.size(); ++i) {
            indent_to(out, indent + 1);
            write_escaped(out, o[i].first);
            out += ": ";
            o[i].second.write(out, indent + 1);
            if (i + 1 < o.size()) out += ',';
            out += '\n';
        }
        indent_to(out, indent);
        out += '}';
    }
}

std::string JsonValue::dump() const {
    std::string out;
    write(out, 0);
    out += '\n';
    return out;
}

// ---------------------------------------------------------------------------
// FHST binary format.

namespace {

void put_u32(std::string& buf, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf += static_cast<char>((v >> (8 * i)) & 0xff);
}

void put_u64(std::string& buf, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf += static_cast<char>((v >> (8 * i)) & 0xff);
}

void put_f64(std::string& buf, double v) {
    put_u64(buf, std::bit_cast<std::uint64_t>(v));
}

struct Cursor {
    const unsigned char* p;
    std::size_t left;
    std::string origin;

    void need(std::size_t n) const {
        if (left < n) throw FileFormatError(origin + ": truncated field file");
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
        p += 4;
        left -= 4;
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
        p += 8;
        left -= 8;
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
};

std::string read_all(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FileFormatError(path + ": cannot open");
    std::string data((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    return data;
}

void write_all(const std::string& path, const std::string& data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FileFormatError(path + ": cannot open for writing");
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) throw FileFormatError(path + ": write failed");
}

std::string encode_header(const FieldFile& file) {
    std::string buf;
    buf += "FHST";
    put_u32(buf, 1);
    put_u32(buf, file.dim);
    for (std::uint64_t n : file.grid_sizes) put_u64(buf, n);
    put_f64(buf, file.period);
    put_f64(buf, file.mass);
    put_f64(buf, file.s);
    return buf;
}

FieldFile decode_header(Cursor& c) {
    c.need(4);
    if (std::memcmp(c.p, "FHST", 4) != 0)
        throw FileFormatError(c.origin + ": bad magic, not an FHST file");
    c.p += 4;
    c.left -= 4;
    const std::uint32_t version = c.u32();
    if (version != 1)
        throw FileFormatError(c.origin + ": unsupported FHST version " +
                              std::to_string(version));
    FieldFile file;
    file.dim = c.u32();
    if (file.dim == 0 || file.dim > 16)
        throw FileFormatError(c.origin + ": implausible dimension");
    file.grid_sizes.resize(file.dim);
    for (auto& n : file.grid_sizes) {
        n = c.u64();
        if (n == 0 || n > (1u << 24))
            throw FileFormatError(c.origin + ": implausible grid size");
    }
    file.period = c.f64();
    file.mass = c.f64();
    file.s = c.f64();
    return file;
}

void read_samples(Cursor& c, std::vector<double>& out, std::size_t count) {
    out.resize(count);
    for (auto& v : out) v = c.f64();
}

}  // namespace

std::size_t FieldFile::grid_point_count() const {
    std::size_t n = 1;
    for (std::uint64_t g : grid_sizes) n *= static_cast<std::size_t>(g);
    return n;
}

void write_field_file(const std::string& path, const FieldFile& file) {
    if (file.samples.size() != file.grid_point_count())
        throw ShapeError("field file samples do not match its grid");
    std::string buf = encode_header(file);
    for (double v : file.samples) put_f64(buf, v);
    write_all(path, buf);
}

FieldFile read_field_file(const std::string& path) {
    const std::string data = read_all(path);
    Cursor c{reinterpret_cast<const unsigned char*>(data.data()), data.size(), path};
    FieldFile file = decode_header(c);
    read_samples(c, file.samples, file.grid_point_count());
    if (c.left != 0) throw FileFormatError(path + ": trailing bytes");
    return file;
}

void write_extended_field_file(const std::string& path,
                               const ExtendedFieldFile& file) {
    const std::size_t per_slice = file.base.grid_point_count();
    if (file.base.samples.size() != per_slice * file.y_nodes.size())
        throw ShapeError("extended field file samples do not match y × grid");
    std::string buf = encode_header(file.base);
    put_u64(buf, file.y_nodes.size());
    for (double y : file.y_nodes) put_f64(buf, y);
    for (double v : file.base.samples) put_f64(buf, v);
    write_all(path, buf);
}

ExtendedFieldFile read_extended_field_file(const std::string& path) {
    const std::string data = read_all(path);
    Cursor c{reinterpret_cast<const unsigned char*>(data.data()), data.size(), path};
    ExtendedFieldFile file;
    file.base = decode_header(c);
    const std::uint64_t y_count = c.u64();
    if (y_count > (1u << 24)) throw FileFormatError(path + ": implausible y count");
    file.y_nodes.resize(y_count);
    for (auto& y : file.y_nodes) y = c.f64();
    read_samples(c, file.base.samples,
                 file.base.grid_point_count() * static_cast<std::size_t>(y_count));
    if (c.left != 0) throw FileFormatError(path + ": trailing bytes");
    return file;
}

FieldFile to_field_file(const FourierField& u, const TorusConfig& cfg) {
    FieldFile file;
    const ModeLattice& lat = u.lattice();
    file.dim = static_cast<std::uint32_t>(lat.dim());
    for (int n : lat.grid_sizes)
        file.grid_sizes.push_back(static_cast<std::uint64_t>(n));
    file.period = cfg.period;
    file.mass = cfg.mass;
    file.s = cfg.s;
    file.samples = synthesize(u, cfg);
    return file;
}

FourierField from_field_file(const FieldFile& file, const TorusConfig& cfg,
                             const ModeLattice& lattice) {
    if (file.dim != static_cast<std::uint32_t>(lattice.dim()))
        throw FileFormatError("field file dimension does not match the run");
    for (int i = 0; i < lattice.dim(); ++i)
        if (file.grid_sizes[static_cast<std::size_t>(i)] !=
            static_cast<std::uint64_t>(lattice.grid_sizes[static_cast<std::size_t>(i)]))
            throw FileFormatError("field file grid does not match the run");
    if (file.period != cfg.period || file.mass != cfg.mass || file.s != cfg.s)
        throw FileFormatError("field file torus parameters do not match the run");
    return analyze(file.samples, lattice, cfg);
}

// ---------------------------------------------------------------------------
// Config parsing.

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& where, const std::string& what) {
    throw ConfigError("config error at \"" + where + "\": " + what);
}

void expect_keys(const json& obj, const std::string& where,
                 std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* k : allowed)
            if (it.key() == k) {
                known = true;
                break;
            }
        if (!known) bad(where.empty() ? it.key() : where + "." + it.key(),
                        "unknown key");
    }
}

const json* find(const json& obj, const char* key) {
    auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

double as_double(const json& v, const std::string& where) {
    if (!v.is_number()) bad(where, "expected a number");
    return v.get<double>();
}

double get_double(const json& obj, const std::string& where, const char* key,
                  double fallback) {
    const json* v = find(obj, key);
    return v ? as_double(*v, where + "." + key) : fallback;
}

double need_double(const json& obj, const std::string& where, const char* key) {
    const json* v = find(obj, key);
    if (!v) bad(where + "." + key, "missing required key");
    return as_double(*v, where + "." + key);
}

long long as_int(const json& v, const std::string& where) {
    if (!v.is_number_integer()) bad(where, "expected an integer");
    return v.get<long long>();
}

long long get_int(const json& obj, const std::string& where, const char* key,
                  long long fallback) {
    const json* v = find(obj, key);
    return v ? as_int(*v, where + "." + key) : fallback;
}

bool get_bool(const json& obj, const std::string& where, const char* key,
              bool fallback) {
    const json* v = find(obj, key);
    if (!v) return fallback;
    if (!v->is_boolean()) bad(where + "." + key, "expected a boolean");
    return v->get<bool>();
}

std::string get_string(const json& obj, const std::string& where, const char* key,
                       const std::string& fallback) {
    const json* v = find(obj, key);
    if (!v) return fallback;
    if (!v->is_string()) bad(where + "." + key, "expected a string");
    return v->get<std::string>();
}

std::vector<double> as_double_array(const json& v, const std::string& where) {
    if (!v.is_array()) bad(where, "expected an array of numbers");
    std::vector<double> out;
    out.reserve(v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        out.push_back(as_double(v[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

FieldSpec parse_field_spec(const json& obj, const std::string& where) {
    expect_keys(obj, where, {"kind", "value", "rank", "amplitude", "sign", "path"});
    FieldSpec spec;
    spec.kind = get_string(obj, where, "kind", "constant");
    if (spec.kind != "constant" && spec.kind != "eigenmode" && spec.kind != "random" &&
        spec.kind != "file")
        bad(where + ".kind", "expected constant, eigenmode, random or file");
    spec.value = get_double(obj, where, "value", 0.6);
    spec.rank = static_cast<int>(get_int(obj, where, "rank", 1));
    spec.amplitude = get_double(obj, where, "amplitude", 0.5);
    spec.sign = get_double(obj, where, "sign", 1.0);
    if (spec.sign != 1.0 && spec.sign != -1.0) bad(where + ".sign", "expected ±1");
    if (spec.rank < 1) bad(where + ".rank", "ranks are 1-based");
    spec.path = get_string(obj, where, "path", "");
    if (spec.kind == "file" && spec.path.empty())
        bad(where + ".path", "file initialization needs a path");
    return spec;
}

}  // namespace

Nonlinearity NonlinearitySpec::build() const {
    if (kind == "zero") return Nonlinearity::zero();
    if (kind == "rational_odd") return Nonlinearity::rational_odd(a);
    if (kind == "rational_odd_modulated")
        return Nonlinearity::rational_odd_modulated(a, b, omega);
    if (kind == "custom")
        return Nonlinearity::custom(f_samples, t_max, lambda0, odd);
    throw ConfigError("unknown nonlinearity kind \"" + kind + "\"");
}

FourierField FieldSpec::build(const TorusConfig& cfg, const ModeLattice& lattice,
                              Rng& rng) const {
    if (kind == "constant") return constant_field(lattice, cfg, value);
    if (kind == "eigenmode") {
        const auto basis = real_eigenbasis(cfg, lattice, rank);
        FourierField u = basis[static_cast<std::size_t>(rank - 1)];
        u *= sign * amplitude;
        return u;
    }
    if (kind == "random") return random_real_field(lattice, rng, amplitude);
    if (kind == "file")
        return from_field_file(read_field_file(path), cfg, lattice);
    throw ConfigError("unknown field kind \"" + kind + "\"");
}

ModeLattice RunConfig::lattice() const {
    std::vector<int> halves;
    halves.reserve(grid.size());
    for (int n : grid) halves.push_back((n - 1) / 2);
    return ModeLattice::make(std::move(halves), grid);
}

std::vector<double> RunConfig::extend_nodes() const {
    if (!extend.y_nodes.empty()) return extend.y_nodes;
    std::vector<double> nodes;
    nodes.reserve(static_cast<std::size_t>(extend.y_count));
    for (int j = 0; j < extend.y_count; ++j)
        nodes.push_back(extend.y_max * static_cast<double>(j) /
                        static_cast<double>(extend.y_count - 1));
    return nodes;
}

RunConfig parse_run_config_text(const std::string& text, const std::string& origin) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(origin + ": " + e.what());
    }
    if (!doc.is_object()) throw ConfigError(origin + ": top level must be an object");
    expect_keys(doc, "",
                {"torus", "grid", "nonlinearity", "solver", "output_dir", "seed",
                 "spectrum", "solve", "extend", "gradcheck"});

    RunConfig cfg;

    const json* torus = find(doc, "torus");
    if (!torus || !torus->is_object()) bad("torus", "missing required block");
    expect_keys(*torus, "torus", {"period", "dim", "mass", "s", "lambda_inf"});
    const double period = need_double(*torus, "torus", "period");
    const long long dim = get_int(*torus, "torus", "dim", 0);
    if (dim < 1 || dim > 3) bad("torus.dim", "expected dimension 1, 2 or 3");
    const double mass = need_double(*torus, "torus", "mass");
    const double s = need_double(*torus, "torus", "s");
    const double lambda_inf = need_double(*torus, "torus", "lambda_inf");
    try {
        cfg.torus = TorusConfig::checked(period, static_cast<int>(dim), mass, s,
                                         lambda_inf);
    } catch (const ParameterError& e) {
        bad("torus", e.what());
    }

    const json* grid = find(doc, "grid");
    if (!grid || !grid->is_array()) bad("grid", "missing per-dimension grid sizes");
    if (static_cast<long long>(grid->size()) != dim)
        bad("grid", "expected one size per dimension");
    for (std::size_t i = 0; i < grid->size(); ++i) {
        const long long n = as_int((*grid)[i], "grid[" + std::to_string(i) + "]");
        if (n < 3 || n % 2 == 0)
            bad("grid[" + std::to_string(i) + "]",
                "grid sizes must be odd and at least 3");
        cfg.grid.push_back(static_cast<int>(n));
    }

    if (const json* nl = find(doc, "nonlinearity")) {
        if (!nl->is_object()) bad("nonlinearity", "expected an object");
        expect_keys(*nl, "nonlinearity",
                    {"kind", "a", "b", "omega", "t_max", "lambda0", "odd",
                     "f_samples"});
        cfg.nonlinearity.kind = get_string(*nl, "nonlinearity", "kind", "zero");
        cfg.nonlinearity.a = get_double(*nl, "nonlinearity", "a", 0.0);
        cfg.nonlinearity.b = get_double(*nl, "nonlinearity", "b", 0.0);
        cfg.nonlinearity.omega =
            get_double(*nl, "nonlinearity", "omega", cfg.torus.omega());
        cfg.nonlinearity.t_max = get_double(*nl, "nonlinearity", "t_max", 0.0);
        cfg.nonlinearity.lambda0 = get_double(*nl, "nonlinearity", "lambda0", 0.0);
        cfg.nonlinearity.odd = get_bool(*nl, "nonlinearity", "odd", true);
        if (const json* samples = find(*nl, "f_samples"))
            cfg.nonlinearity.f_samples =
                as_double_array(*samples, "nonlinearity.f_samples");
        try {
            (void)cfg.nonlinearity.build();
        } catch (const ParameterError& e) {
            bad("nonlinearity", e.what());
        }
    }

    if (const json* solver = find(doc, "solver")) {
        if (!solver->is_object()) bad("solver", "expected an object");
        expect_keys(*solver, "solver",
                    {"gradient_tolerance", "max_newton_iterations", "linear_tolerance",
                     "max_linear_iterations", "max_line_search_backtracks",
                     "distinctness_tolerance", "use_deflation", "hypothesis_override",
                     "compute_morse_index", "seed_amplitudes"});
        SolverOptions& o = cfg.solver;
        o.gradient_tolerance =
            get_double(*solver, "solver", "gradient_tolerance", o.gradient_tolerance);
        o.max_newton_iterations = static_cast<int>(get_int(
            *solver, "solver", "max_newton_iterations", o.max_newton_iterations));
        o.linear_tolerance =
            get_double(*solver, "solver", "linear_tolerance", o.linear_tolerance);
        o.max_linear_iterations = static_cast<int>(get_int(
            *solver, "solver", "max_linear_iterations", o.max_linear_iterations));
        o.max_line_search_backtracks = static_cast<int>(
            get_int(*solver, "solver", "max_line_search_backtracks",
                    o.max_line_search_backtracks));
        o.distinctness_tolerance = get_double(*solver, "solver",
                                              "distinctness_tolerance",
                                              o.distinctness_tolerance);
        o.use_deflation = get_bool(*solver, "solver", "use_deflation", o.use_deflation);
        o.hypothesis_override =
            get_bool(*solver, "solver", "hypothesis_override", o.hypothesis_override);
        o.compute_morse_index = get_bool(*solver, "solver", "compute_morse_index",
                                         o.compute_morse_index);
        if (const json* amps = find(*solver, "seed_amplitudes"))
            o.seed_amplitudes = as_double_array(*amps, "solver.seed_amplitudes");
        try {
            o.validate();
        } catch (const ParameterError& e) {
            bad("solver", e.what());
        }
    }

    cfg.output_dir = get_string(doc, "", "output_dir", cfg.output_dir);
    {
        const long long seed = get_int(doc, "", "seed", 0);
        if (seed < 0) bad("seed", "expected a non-negative integer");
        cfg.seed = static_cast<unsigned long long>(seed);
    }

    if (const json* spectrum = find(doc, "spectrum")) {
        if (!spectrum->is_object()) bad("spectrum", "expected an object");
        expect_keys(*spectrum, "spectrum", {"count"});
        cfg.spectrum_count =
            static_cast<int>(get_int(*spectrum, "spectrum", "count", 30));
        if (cfg.spectrum_count < 1) bad("spectrum.count", "expected at least 1");
    }

    if (const json* solve = find(doc, "solve")) {
        if (!solve->is_object()) bad("solve", "expected an object");
        expect_keys(*solve, "solve", {"mode", "initial"});
        cfg.solve_mode = get_string(*solve, "solve", "mode", "auto");
        if (cfg.solve_mode != "auto" && cfg.solve_mode != "newton" &&
            cfg.solve_mode != "direct_min" && cfg.solve_mode != "multiplicity")
            bad("solve.mode", "expected auto, newton, direct_min or multiplicity");
        if (const json* init = find(*solve, "initial"))
            cfg.initial = parse_field_spec(*init, "solve.initial");
    }

    if (const json* extend = find(doc, "extend")) {
        if (!extend->is_object()) bad("extend", "expected an object");
        expect_keys(*extend, "extend", {"source", "y_nodes", "y_count", "y_max"});
        if (const json* source = find(*extend, "source"))
            cfg.extend.source = parse_field_spec(*source, "extend.source");
        if (const json* nodes = find(*extend, "y_nodes")) {
            cfg.extend.y_nodes = as_double_array(*nodes, "extend.y_nodes");
            for (std::size_t i = 0; i < cfg.extend.y_nodes.size(); ++i) {
                if (cfg.extend.y_nodes[i] < 0.0)
                    bad("extend.y_nodes", "heights must be non-negative");
                if (i > 0 && cfg.extend.y_nodes[i] <= cfg.extend.y_nodes[i - 1])
                    bad("extend.y_nodes", "heights must increase strictly");
            }
            if (cfg.extend.y_nodes.empty())
                bad("extend.y_nodes", "need at least one height");
        }
        cfg.extend.y_count =
            static_cast<int>(get_int(*extend, "extend", "y_count", cfg.extend.y_count));
        cfg.extend.y_max = get_double(*extend, "extend", "y_max", cfg.extend.y_max);
        if (cfg.extend.y_nodes.empty()) {
            if (cfg.extend.y_count < 2) bad("extend.y_count", "expected at least 2");
            if (!(cfg.extend.y_max > 0.0)) bad("extend.y_max", "expected > 0");
        }
    }

    if (const json* gradcheck = find(doc, "gradcheck")) {
        if (!gradcheck->is_object()) bad("gradcheck", "expected an object");
        expect_keys(*gradcheck, "gradcheck", {"trials", "step", "sigma", "tolerance"});
        cfg.gradcheck.trials =
            static_cast<int>(get_int(*gradcheck, "gradcheck", "trials", 100));
        cfg.gradcheck.step = get_double(*gradcheck, "gradcheck", "step", 1e-5);
        cfg.gradcheck.sigma = get_double(*gradcheck, "gradcheck", "sigma", 0.5);
        cfg.gradcheck.tolerance =
            get_double(*gradcheck, "gradcheck", "tolerance", 1e-6);
        if (cfg.gradcheck.trials < 1) bad("gradcheck.trials", "expected at least 1");
        if (!(cfg.gradcheck.step > 0.0)) bad("gradcheck.step", "expected > 0");
        if (!(cfg.gradcheck.sigma > 0.0)) bad("gradcheck.sigma", "expected > 0");
        if (!(cfg.gradcheck.tolerance > 0.0))
            bad("gradcheck.tolerance", "expected > 0");
    }

    return cfg;
}

RunConfig parse_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open config file");
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    return parse_run_config_text(text, path);
}

}  // namespace fracperiod
