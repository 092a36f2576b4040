#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "fracperiod/torus.hpp"
#include "oracles.hpp"

using namespace fracperiod;

namespace {
const TorusConfig kCfg = TorusConfig::checked(2.0 * kPi, 2, 1.0, 0.5, 2.0);
}

TEST_CASE("config validation and derived constants") {
    CHECK(kCfg.omega() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(kCfg.volume() == doctest::Approx(4.0 * kPi * kPi).epsilon(1e-15));
    // κ_s is exactly 1 at s = 1/2.
    CHECK(kCfg.kappa_s() == 1.0);
    // 2N/(N-2s) at N=2, s=1/2 equals 4.
    CHECK(kCfg.critical_exponent() == doctest::Approx(4.0).epsilon(1e-15));

    CHECK_THROWS_AS(TorusConfig::checked(-1.0, 2, 1.0, 0.5, 0.0), ParameterError);
    CHECK_THROWS_AS(TorusConfig::checked(1.0, 0, 1.0, 0.5, 0.0), ParameterError);
    CHECK_THROWS_AS(TorusConfig::checked(1.0, 2, 0.0, 0.5, 0.0), ParameterError);
    CHECK_THROWS_AS(TorusConfig::checked(1.0, 2, 1.0, 1.0, 0.0), ParameterError);
    CHECK_THROWS_AS(TorusConfig::checked(1.0, 2, 1.0, 0.0, 0.0), ParameterError);
}

TEST_CASE("kappa_s against series-free closed form values") {
    // Direct Γ-function evaluations, frozen here.
    TorusConfig c = kCfg;
    c.s = 0.25;
    CHECK(c.kappa_s() == doctest::Approx(std::sqrt(2.0) * std::tgamma(0.75) / std::tgamma(0.25))
                             .epsilon(1e-15));
    c.s = 0.75;
    CHECK(c.kappa_s() ==
          doctest::Approx(std::pow(2.0, -0.5) * std::tgamma(0.25) / std::tgamma(0.75))
              .epsilon(1e-15));
}

TEST_CASE("lattice indexing round-trips and symmetry") {
    ModeLattice lat = ModeLattice::make({2, 3}, {5, 9});
    CHECK(lat.mode_count() == 35);
    CHECK(lat.grid_point_count() == 45);
    for (std::size_t idx = 0; idx < lat.mode_count(); ++idx) {
        auto k = lat.mode(idx);
        CHECK(lat.index_of(k) == idx);
        // index(-k) mirrors index(k).
        std::vector<int> mk = {-k[0], -k[1]};
        CHECK(lat.index_of(mk) == lat.mode_count() - 1 - idx);
    }
    CHECK_THROWS_AS(ModeLattice::make({2}, {3}), ParameterError);
    CHECK_THROWS_AS(ModeLattice::make({2}, {5, 5}), ShapeError);
}

TEST_CASE("analyze matches the direct transform on random data") {
    ModeLattice lat = ModeLattice::make({2, 2}, {5, 6});
    Rng rng(2024);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    std::vector<double> samples(lat.grid_point_count());
    for (double& v : samples) v = unif(rng);

    FourierField u = analyze(samples, lat, kCfg);
    auto ref = oracle::analyze_direct(samples, lat, kCfg);
    for (std::size_t idx = 0; idx < lat.mode_count(); ++idx)
        CHECK(std::abs(u.coeffs()[idx] - ref[idx]) < 1e-12);
}

TEST_CASE("synthesize matches the direct inverse transform") {
    ModeLattice lat = ModeLattice::cubic(2, 3);
    Rng rng(99);
    FourierField u = random_real_field(lat, rng);
    auto values = synthesize(u, kCfg);
    auto ref = oracle::synthesize_direct(
        std::vector<std::complex<double>>(u.coeffs().begin(), u.coeffs().end()),
        lat, kCfg);
    for (std::size_t j = 0; j < values.size(); ++j)
        CHECK(values[j] == doctest::Approx(ref[j].real()).epsilon(1e-12));
}

TEST_CASE("analyze-synthesize round trip is the identity on band-limited fields") {
    ModeLattice lat = ModeLattice::make({3, 2}, {8, 5});
    Rng rng(7);
    FourierField u = random_real_field(lat, rng);
    auto samples = synthesize(u, kCfg);
    FourierField back = analyze(samples, lat, kCfg);
    for (std::size_t i = 0; i < u.coeffs().size(); ++i)
        CHECK(std::abs(u.coeffs()[i] - back.coeffs()[i]) < 1e-12);
}

TEST_CASE("constant field and its transform") {
    ModeLattice lat = ModeLattice::cubic(2, 4);
    std::vector<double> ones(lat.grid_point_count(), 1.0);
    FourierField u = analyze(ones, lat, kCfg);
    std::vector<int> zero = {0, 0};
    // β_0 = √(T^N) = 2π here; all other coefficients vanish.
    CHECK(u.coeff(zero).real() == doctest::Approx(2.0 * kPi).epsilon(1e-14));
    for (std::size_t idx = 0; idx < lat.mode_count(); ++idx)
        if (idx != lat.index_of(zero)) CHECK(std::abs(u.coeffs()[idx]) < 1e-12);

    auto back = synthesize(constant_field(lat, kCfg, 1.0), kCfg);
    for (double v : back) CHECK(v == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("cosine mode has the expected pair of coefficients") {
    ModeLattice lat = ModeLattice::cubic(2, 3);
    std::vector<double> samples(lat.grid_point_count());
    for (std::size_t j = 0; j < samples.size(); ++j)
        samples[j] = std::cos(kCfg.omega() * grid_point(lat, kCfg, j)[0]);
    FourierField u = analyze(samples, lat, kCfg);
    std::vector<int> p = {1, 0}, m = {-1, 0};
    // β_{±(1,0)} = √(T^N)/2 = π.
    CHECK(u.coeff(p).real() == doctest::Approx(kPi).epsilon(1e-13));
    CHECK(u.coeff(m).real() == doctest::Approx(kPi).epsilon(1e-13));
    CHECK(std::abs(u.coeff(p).imag()) < 1e-12);
}

TEST_CASE("Parseval: grid quadrature of u² equals the coefficient sum") {
    ModeLattice lat = ModeLattice::make({3, 3}, {7, 9});
    Rng rng(5150);
    FourierField u = random_real_field(lat, rng);
    auto samples = synthesize(u, kCfg);
    double quad = oracle::grid_integral(samples, lat, kCfg, [](double v) { return v * v; });
    CHECK(l2_norm(u) == doctest::Approx(std::sqrt(quad)).epsilon(1e-12));
}

TEST_CASE("l2_norm of cos(ωx₁) on the 2-torus") {
    ModeLattice lat = ModeLattice::cubic(2, 3);
    std::vector<double> samples(lat.grid_point_count());
    for (std::size_t j = 0; j < samples.size(); ++j)
        samples[j] = std::cos(kCfg.omega() * grid_point(lat, kCfg, j)[0]);
    FourierField u = analyze(samples, lat, kCfg);
    // |cos(ωx₁)|_{L²}² = T^N/2 = 2π².
    CHECK(l2_norm(u) == doctest::Approx(std::sqrt(2.0 * kPi * kPi)).epsilon(1e-13));
}

TEST_CASE("shape errors on mismatched inputs") {
    ModeLattice lat = ModeLattice::cubic(2, 2);
    std::vector<double> wrong(7, 0.0);
    CHECK_THROWS_AS(analyze(wrong, lat, kCfg), ShapeError);
    TorusConfig cfg1 = kCfg;
    cfg1.dim = 1;
    FourierField u(lat, true);
    CHECK_THROWS_AS(synthesize(u, cfg1), ShapeError);
}

TEST_CASE("hermitian bookkeeping") {
    ModeLattice lat = ModeLattice::cubic(1, 3);
    FourierField u(lat, true);
    std::vector<int> one = {1};
    u.set_coeff(one, {0.5, 0.25});
    CHECK(u.hermitian_defect() > 0.0);
    u.enforce_hermitian();
    CHECK(u.hermitian_defect() == 0.0);
    std::vector<int> mone = {-1};
    CHECK(u.coeff(mone) == std::conj(u.coeff(one)));
}

TEST_CASE("pack/unpack is an L²-isometry and a bijection") {
    ModeLattice lat = ModeLattice::make({2, 2}, {5, 5});
    Rng rng(31);
    FourierField u = random_real_field(lat, rng, 0.7);
    auto dof = pack_real(u);
    CHECK(dof.size() == lat.mode_count());
    double euclid = 0.0;
    for (double d : dof) euclid += d * d;
    CHECK(std::sqrt(euclid) == doctest::Approx(l2_norm(u)).epsilon(1e-13));
    FourierField back = unpack_real(dof, lat);
    for (std::size_t i = 0; i < u.coeffs().size(); ++i)
        CHECK(std::abs(u.coeffs()[i] - back.coeffs()[i]) < 1e-14);
}

TEST_CASE("refined lattice keeps modes and enlarges the grid") {
    ModeLattice lat = ModeLattice::cubic(2, 2);
    ModeLattice fine = lat.refined(2);
    CHECK(fine.mode_count() == lat.mode_count());
    CHECK(fine.grid_sizes[0] == 10);
    // A band-limited field synthesized on the finer grid analyzes back exactly.
    Rng rng(12);
    FourierField u = random_real_field(lat, rng);
    FourierField uf(fine, true);
    for (std::size_t i = 0; i < u.coeffs().size(); ++i) uf.coeffs()[i] = u.coeffs()[i];
    auto fine_samples = synthesize(uf, kCfg);
    FourierField back = analyze(fine_samples, fine, kCfg);
    for (std::size_t i = 0; i < u.coeffs().size(); ++i)
        CHECK(std::abs(u.coeffs()[i] - back.coeffs()[i]) < 1e-12);
}
