#include "fracperiod/fractional_operator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace fracperiod {

double mode_mu(const TorusConfig& cfg, long k_squared) {
    double w = cfg.omega();
    return w * w * static_cast<double>(k_squared) + cfg.mass * cfg.mass;
}

double mode_multiplier(const TorusConfig& cfg, long k_squared) {
    return std::pow(mode_mu(cfg, k_squared), cfg.s);
}

namespace {

// Applies β_k ← μ_k^{p·s} β_k with p = ±1.
FourierField scaled_by_multiplier(const FourierField& u, const TorusConfig& cfg,
                                  double power) {
    const ModeLattice& lat = u.lattice();
    if (cfg.dim != lat.dim()) throw ShapeError("config and lattice dimension differ");
    FourierField out = u;
    auto c = out.coeffs();
    for (std::size_t idx = 0; idx < c.size(); ++idx)
        c[idx] *= std::pow(mode_mu(cfg, lat.k_squared(idx)), power);
    return out;
}

}  // namespace

FourierField apply_operator(const FourierField& u, const TorusConfig& cfg) {
    return scaled_by_multiplier(u, cfg, cfg.s);
}

FourierField apply_inverse(const FourierField& g, const TorusConfig& cfg) {
    return scaled_by_multiplier(g, cfg, -cfg.s);
}

double hs_norm(const FourierField& u, const TorusConfig& cfg, int sign) {
    if (sign != 1 && sign != -1) throw ParameterError("norm sign must be +1 or -1");
    const ModeLattice& lat = u.lattice();
    double acc = 0.0;
    auto c = u.coeffs();
    for (std::size_t idx = 0; idx < c.size(); ++idx)
        acc += std::pow(mode_mu(cfg, lat.k_squared(idx)), sign * cfg.s) * std::norm(c[idx]);
    return std::sqrt(acc);
}

double hs_inner(const FourierField& u, const FourierField& w, const TorusConfig& cfg) {
    if (!(u.lattice() == w.lattice())) throw ShapeError("fields live on different lattices");
    const ModeLattice& lat = u.lattice();
    double acc = 0.0;
    auto cu = u.coeffs();
    auto cw = w.coeffs();
    for (std::size_t idx = 0; idx < cu.size(); ++idx) {
        double weight = std::pow(mode_mu(cfg, lat.k_squared(idx)), cfg.s);
        acc += weight * (cu[idx].real() * cw[idx].real() + cu[idx].imag() * cw[idx].imag());
    }
    return acc;
}

double SpectrumTable::eigenvalue(int rank) const {
    return level_of_rank(rank).lambda;
}

const SpectrumLevel& SpectrumTable::level_of_rank(int rank) const {
    if (rank < 1 || rank > total_ranks)
        throw SpectrumRangeError("eigenvalue rank outside the certified table");
    for (const SpectrumLevel& level : levels)
        if (rank <= level.last_rank) return level;
    throw SpectrumRangeError("eigenvalue rank outside the certified table");
}

SpectrumTable enumerate_spectrum(const TorusConfig& cfg, const ModeLattice& lattice,
                                 int count) {
    if (cfg.dim != lattice.dim()) throw ShapeError("config and lattice dimension differ");
    if (count < 1) throw ParameterError("eigenvalue count must be positive");

    const long certified_k2 =
        static_cast<long>(lattice.min_half_extent()) * lattice.min_half_extent();

    // Bucket every lattice mode inside the certified ball by |k|². Using the
    // integer |k|² as the key makes equal eigenvalues match exactly.
    std::map<long, std::vector<std::vector<int>>> buckets;
    const std::size_t nmodes = lattice.mode_count();
    for (std::size_t idx = 0; idx < nmodes; ++idx) {
        long k2 = lattice.k_squared(idx);
        if (k2 <= certified_k2) buckets[k2].push_back(lattice.mode(idx));
    }

    SpectrumTable table;
    table.certified_lambda_max = mode_multiplier(cfg, certified_k2);
    int rank = 1;
    for (auto& [k2, modes] : buckets) {
        std::sort(modes.begin(), modes.end());
        SpectrumLevel level;
        level.k_squared = k2;
        level.mu = mode_mu(cfg, k2);
        level.lambda = mode_multiplier(cfg, k2);
        level.multiplicity = static_cast<int>(modes.size());
        level.first_rank = rank;
        level.last_rank = rank + level.multiplicity - 1;
        level.modes = std::move(modes);
        rank = level.last_rank + 1;
        table.levels.push_back(std::move(level));
    }
    table.total_ranks = rank - 1;
    if (table.total_ranks < count)
        throw SpectrumRangeError(
            "requested eigenvalue count exceeds the certified radius of the lattice");
    return table;
}

ResonanceCheck is_resonant(double lambda, const SpectrumTable& table, double tolerance) {
    if (table.levels.empty()) throw SpectrumRangeError("empty spectrum table");
    if (lambda > table.certified_lambda_max)
        throw SpectrumRangeError("lambda exceeds the certified spectral radius");
    ResonanceCheck out;
    out.distance = std::numeric_limits<double>::infinity();
    for (const SpectrumLevel& level : table.levels) {
        double d = std::abs(lambda - level.lambda);
        if (d < out.distance) {
            out.distance = d;
            out.nearest_lambda = level.lambda;
        }
    }
    out.resonant = out.distance <= tolerance;
    return out;
}

double rayleigh_quotient(const FourierField& u, const TorusConfig& cfg) {
    double denom = inner_l2(u, u);
    if (denom == 0.0) throw ParameterError("Rayleigh quotient of the zero field");
    double num = hs_norm(u, cfg, +1);
    return num * num / denom;
}

namespace {

// Canonical representative of a ±k pair: the one whose first nonzero entry is
// positive. k = 0 is its own representative.
bool is_canonical(const std::vector<int>& k) {
    for (int v : k) {
        if (v > 0) return true;
        if (v < 0) return false;
    }
    return true;  // k = 0
}

std::vector<int> negated(const std::vector<int>& k) {
    std::vector<int> out(k.size());
    for (std::size_t i = 0; i < k.size(); ++i) out[i] = -k[i];
    return out;
}

}  // namespace

std::vector<FourierField> real_eigenbasis(const TorusConfig& cfg,
                                          const ModeLattice& lattice, int count) {
    SpectrumTable table = enumerate_spectrum(cfg, lattice, count);
    std::vector<FourierField> basis;
    basis.reserve(static_cast<std::size_t>(count));
    constexpr std::complex<double> iunit(0.0, 1.0);
    const double inv_r2 = 0.7071067811865476;  // 1/√2

    for (const SpectrumLevel& level : table.levels) {
        for (const std::vector<int>& k : level.modes) {
            if (!is_canonical(k)) continue;
            std::vector<int> mk = negated(k);
            if (level.k_squared == 0) {
                // Constant eigenfunction 1/√(T^N).
                FourierField v(lattice, true);
                v.set_coeff(k, 1.0);
                basis.push_back(std::move(v));
            } else {
                // √2 cos(ωk·x)/√(T^N): β_{±k} = 1/√2.
                FourierField vc(lattice, true);
                vc.set_coeff(k, inv_r2);
                vc.set_coeff(mk, inv_r2);
                basis.push_back(std::move(vc));
                // √2 sin(ωk·x)/√(T^N): β_k = -i/√2, β_{-k} = i/√2.
                FourierField vs(lattice, true);
                vs.set_coeff(k, -iunit * inv_r2);
                vs.set_coeff(mk, iunit * inv_r2);
                basis.push_back(std::move(vs));
            }
        }
        if (static_cast<int>(basis.size()) >= count) break;
    }
    // A level boundary may overshoot `count` by one when it splits a ± pair.
    basis.resize(static_cast<std::size_t>(count), FourierField(lattice, true));
    return basis;
}

EigenspaceSplit eigenspace_split(const TorusConfig& cfg, const ModeLattice& lattice,
                                 int h) {
    if (h < 1) throw ParameterError("eigenspace split index must be at least 1");
    EigenspaceSplit split;
    split.h = h;
    split.basis = real_eigenbasis(cfg, lattice, h);
    return split;
}

FourierField project(const FourierField& u, const EigenspaceSplit& split,
                     Subspace which) {
    FourierField low(u.lattice(), true);
    for (const FourierField& v : split.basis) {
        double a = inner_l2(u, v);
        FourierField term = v;
        term *= a;
        low += term;
    }
    if (which == Subspace::Low) return low;
    FourierField high = u;
    high -= low;
    return high;
}

}  // namespace fracperiod
