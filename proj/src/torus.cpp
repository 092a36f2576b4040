#include "fracperiod/torus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>

#include "fft_engine.hpp"

namespace fracperiod {

int worker_thread_cap() {
    static const int cap = [] {
        const char* env = std::getenv("FRACPERIOD_THREADS");
        if (env == nullptr) return 1;
        int v = std::atoi(env);
        return v >= 1 ? v : 1;
    }();
    return cap;
}

double TorusConfig::volume() const { return std::pow(period, dim); }

double TorusConfig::kappa_s() const {
    return std::pow(2.0, 1.0 - 2.0 * s) * std::tgamma(1.0 - s) / std::tgamma(s);
}

double TorusConfig::critical_exponent() const {
    double denom = dim - 2.0 * s;
    if (denom <= 0.0) return std::numeric_limits<double>::infinity();
    return 2.0 * dim / denom;
}

TorusConfig TorusConfig::checked(double period, int dim, double mass, double s,
                                 double lambda_inf) {
    if (!(period > 0.0)) throw ParameterError("period must be positive");
    if (dim < 1) throw ParameterError("dimension must be at least 1");
    if (!(mass > 0.0)) throw ParameterError("mass must be positive");
    if (!(s > 0.0 && s < 1.0)) throw ParameterError("fractional order must lie in (0,1)");
    if (!std::isfinite(lambda_inf)) throw ParameterError("lambda_inf must be finite");
    return TorusConfig{period, dim, mass, s, lambda_inf};
}

ModeLattice ModeLattice::cubic(int dim, int half_extent) {
    if (dim < 1) throw ParameterError("lattice dimension must be at least 1");
    if (half_extent < 0) throw ParameterError("half extent must be non-negative");
    ModeLattice lat;
    lat.half_extents.assign(dim, half_extent);
    lat.grid_sizes.assign(dim, 2 * half_extent + 1);
    return lat;
}

ModeLattice ModeLattice::make(std::vector<int> half_extents, std::vector<int> grid_sizes) {
    if (half_extents.empty()) throw ParameterError("lattice dimension must be at least 1");
    if (half_extents.size() != grid_sizes.size())
        throw ShapeError("half_extents and grid_sizes must have equal length");
    for (std::size_t i = 0; i < half_extents.size(); ++i) {
        if (half_extents[i] < 0) throw ParameterError("half extent must be non-negative");
        if (grid_sizes[i] < 2 * half_extents[i] + 1)
            throw ParameterError("grid size must be at least 2M+1 to avoid aliasing");
    }
    ModeLattice lat;
    lat.half_extents = std::move(half_extents);
    lat.grid_sizes = std::move(grid_sizes);
    return lat;
}

std::size_t ModeLattice::mode_count() const {
    std::size_t n = 1;
    for (int m : half_extents) n *= static_cast<std::size_t>(2 * m + 1);
    return n;
}

std::size_t ModeLattice::grid_point_count() const {
    std::size_t n = 1;
    for (int g : grid_sizes) n *= static_cast<std::size_t>(g);
    return n;
}

std::vector<int> ModeLattice::mode(std::size_t index) const {
    std::vector<int> k(half_extents.size());
    for (int i = dim() - 1; i >= 0; --i) {
        int width = 2 * half_extents[i] + 1;
        k[i] = static_cast<int>(index % width) - half_extents[i];
        index /= width;
    }
    return k;
}

std::size_t ModeLattice::index_of(std::span<const int> k) const {
    if (static_cast<int>(k.size()) != dim()) throw ShapeError("mode index has wrong dimension");
    std::size_t idx = 0;
    for (int i = 0; i < dim(); ++i) {
        if (std::abs(k[i]) > half_extents[i]) throw ParameterError("mode outside lattice");
        idx = idx * static_cast<std::size_t>(2 * half_extents[i] + 1) +
              static_cast<std::size_t>(k[i] + half_extents[i]);
    }
    return idx;
}

bool ModeLattice::contains(std::span<const int> k) const {
    if (static_cast<int>(k.size()) != dim()) return false;
    for (int i = 0; i < dim(); ++i)
        if (std::abs(k[i]) > half_extents[i]) return false;
    return true;
}

long ModeLattice::k_squared(std::size_t index) const {
    long acc = 0;
    for (int i = dim() - 1; i >= 0; --i) {
        int width = 2 * half_extents[i] + 1;
        long ki = static_cast<long>(index % width) - half_extents[i];
        acc += ki * ki;
        index /= width;
    }
    return acc;
}

int ModeLattice::min_half_extent() const {
    return *std::min_element(half_extents.begin(), half_extents.end());
}

ModeLattice ModeLattice::refined(int factor) const {
    if (factor < 1) throw ParameterError("refinement factor must be at least 1");
    ModeLattice lat = *this;
    for (int& g : lat.grid_sizes) g *= factor;
    return lat;
}

FourierField::FourierField(ModeLattice lattice, bool real)
    : lattice_(std::move(lattice)), coeffs_(lattice_.mode_count()), real_(real) {}

std::complex<double> FourierField::coeff(std::span<const int> k) const {
    return coeffs_[lattice_.index_of(k)];
}

void FourierField::set_coeff(std::span<const int> k, std::complex<double> value) {
    coeffs_[lattice_.index_of(k)] = value;
}

double FourierField::hermitian_defect() const {
    double worst = 0.0;
    const std::size_t n = coeffs_.size();
    for (std::size_t i = 0; i < n; ++i) {
        // The lattice is symmetric, so index(-k) = n-1 - index(k).
        std::complex<double> d = coeffs_[i] - std::conj(coeffs_[n - 1 - i]);
        worst = std::max(worst, std::abs(d));
    }
    return worst;
}

void FourierField::enforce_hermitian() {
    const std::size_t n = coeffs_.size();
    for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
        std::complex<double> avg = 0.5 * (coeffs_[i] + std::conj(coeffs_[n - 1 - i]));
        coeffs_[i] = avg;
        coeffs_[n - 1 - i] = std::conj(avg);
    }
}

namespace {
void require_same_lattice(const FourierField& a, const FourierField& b) {
    if (!(a.lattice() == b.lattice())) throw ShapeError("fields live on different lattices");
}
}  // namespace

FourierField& FourierField::operator+=(const FourierField& other) {
    require_same_lattice(*this, other);
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += other.coeffs_[i];
    real_ = real_ && other.real_;
    return *this;
}

FourierField& FourierField::operator-=(const FourierField& other) {
    require_same_lattice(*this, other);
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= other.coeffs_[i];
    real_ = real_ && other.real_;
    return *this;
}

FourierField& FourierField::operator*=(double scale) {
    for (auto& c : coeffs_) c *= scale;
    return *this;
}

FourierField FourierField::operator-() const {
    FourierField out = *this;
    for (auto& c : out.coeffs_) c = -c;
    return out;
}

double inner_l2(const FourierField& a, const FourierField& b) {
    require_same_lattice(a, b);
    double acc = 0.0;
    auto ca = a.coeffs();
    auto cb = b.coeffs();
    for (std::size_t i = 0; i < ca.size(); ++i)
        acc += ca[i].real() * cb[i].real() + ca[i].imag() * cb[i].imag();
    return acc;
}

double l2_norm(const FourierField& u) { return std::sqrt(inner_l2(u, u)); }

std::vector<double> grid_point(const ModeLattice& lattice, const TorusConfig& cfg,
                               std::size_t flat_index) {
    std::vector<double> x(lattice.dim());
    for (int i = lattice.dim() - 1; i >= 0; --i) {
        int n = lattice.grid_sizes[i];
        x[i] = cfg.period * static_cast<double>(flat_index % n) / n;
        flat_index /= n;
    }
    return x;
}

namespace {

// Flat DFT bin indices (k_i mod n_i) for every lattice mode, in mode order.
// Walks the lattice with an odometer to avoid per-mode allocation.
std::vector<std::size_t> dft_bins(const ModeLattice& lat) {
    const int dim = lat.dim();
    std::vector<int> k(dim);
    for (int i = 0; i < dim; ++i) k[i] = -lat.half_extents[i];
    std::vector<std::size_t> bins;
    bins.reserve(lat.mode_count());
    const std::size_t count = lat.mode_count();
    for (std::size_t idx = 0; idx < count; ++idx) {
        std::size_t bin = 0;
        for (int i = 0; i < dim; ++i) {
            int n = lat.grid_sizes[i];
            int b = k[i] >= 0 ? k[i] : k[i] + n;
            bin = bin * static_cast<std::size_t>(n) + static_cast<std::size_t>(b);
        }
        bins.push_back(bin);
        for (int i = dim - 1; i >= 0; --i) {
            if (k[i] < lat.half_extents[i]) {
                ++k[i];
                break;
            }
            k[i] = -lat.half_extents[i];
        }
    }
    return bins;
}

}  // namespace

FourierField analyze(std::span<const double> samples, const ModeLattice& lattice,
                     const TorusConfig& cfg) {
    if (cfg.dim != lattice.dim()) throw ShapeError("config and lattice dimension differ");
    const std::size_t npts = lattice.grid_point_count();
    if (samples.size() != npts) throw ShapeError("sample array does not match the grid");

    detail::FftBuffer in(npts), out(npts);
    for (std::size_t j = 0; j < npts; ++j) in.data()[j] = samples[j];
    detail::fft(lattice.grid_sizes, in.data(), out.data(), -1);

    // β_k = √(T^N) / Π n_i · DFT_k on retained modes.
    const double scale = std::sqrt(cfg.volume()) / static_cast<double>(npts);
    FourierField u(lattice, true);
    const std::vector<std::size_t> bins = dft_bins(lattice);
    for (std::size_t idx = 0; idx < bins.size(); ++idx)
        u.coeffs()[idx] = scale * out.data()[bins[idx]];
    // Real input means Hermitian output mathematically, but the FFT's
    // round-off breaks the symmetry by ~1 ulp per call; long iterative
    // solves accumulate that drift, so pin the symmetry here.
    u.enforce_hermitian();
    return u;
}

std::vector<std::complex<double>> synthesize_complex(const FourierField& u,
                                                     const TorusConfig& cfg) {
    const ModeLattice& lat = u.lattice();
    if (cfg.dim != lat.dim()) throw ShapeError("config and lattice dimension differ");
    const std::size_t npts = lat.grid_point_count();

    detail::FftBuffer in(npts), out(npts);
    for (std::size_t j = 0; j < npts; ++j) in.data()[j] = 0.0;
    const double scale = 1.0 / std::sqrt(cfg.volume());
    const std::vector<std::size_t> bins = dft_bins(lat);
    for (std::size_t idx = 0; idx < bins.size(); ++idx)
        in.data()[bins[idx]] = scale * u.coeffs()[idx];
    detail::fft(lat.grid_sizes, in.data(), out.data(), +1);
    return std::vector<std::complex<double>>(out.data(), out.data() + npts);
}

std::vector<double> synthesize(const FourierField& u, const TorusConfig& cfg) {
    if (!u.is_real()) throw ParameterError("synthesize requires a real field");
    auto values = synthesize_complex(u, cfg);
    std::vector<double> out(values.size());
    double scale = 0.0;
    for (const auto& c : values) scale = std::max(scale, std::abs(c));
    const double tol = 1e-10 * std::max(1.0, scale);
    for (std::size_t j = 0; j < values.size(); ++j) {
        if (std::abs(values[j].imag()) > tol)
            throw ParameterError("field marked real has a complex reconstruction");
        out[j] = values[j].real();
    }
    return out;
}

FourierField constant_field(const ModeLattice& lattice, const TorusConfig& cfg,
                            double value) {
    FourierField u(lattice, true);
    std::vector<int> zero(lattice.dim(), 0);
    u.set_coeff(zero, value * std::sqrt(cfg.volume()));
    return u;
}

FourierField random_real_field(const ModeLattice& lattice, Rng& rng, double sigma) {
    std::normal_distribution<double> gauss(0.0, sigma);
    std::vector<double> dof(lattice.mode_count());
    for (double& d : dof) d = gauss(rng);
    return unpack_real(dof, lattice);
}

std::vector<double> pack_real(const FourierField& u) {
    const std::size_t n = u.lattice().mode_count();
    const std::size_t half = n / 2;  // n is odd; index `half` is k = 0
    std::vector<double> dof;
    dof.reserve(n);
    auto c = u.coeffs();
    dof.push_back(c[half].real());
    constexpr double r2 = 1.4142135623730951;
    // Canonical representatives are the first half of the index range; the
    // mirror index of i is n-1-i. √2 weights make the packing an isometry.
    for (std::size_t i = 0; i < half; ++i) {
        dof.push_back(r2 * c[i].real());
        dof.push_back(r2 * c[i].imag());
    }
    return dof;
}

FourierField unpack_real(std::span<const double> dof, const ModeLattice& lattice) {
    const std::size_t n = lattice.mode_count();
    if (dof.size() != n) throw ShapeError("degree-of-freedom vector has wrong length");
    FourierField u(lattice, true);
    auto c = u.coeffs();
    const std::size_t half = n / 2;
    c[half] = dof[0];
    constexpr double inv_r2 = 0.7071067811865476;
    for (std::size_t i = 0; i < half; ++i) {
        std::complex<double> b(dof[1 + 2 * i] * inv_r2, dof[2 + 2 * i] * inv_r2);
        c[i] = b;
        c[n - 1 - i] = std::conj(b);
    }
    return u;
}

}  // namespace fracperiod
