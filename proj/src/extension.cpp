#include "fracperiod/extension.hpp"

#include <boost/math/special_functions/bessel.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

namespace fracperiod {

namespace {

double kappa_of(double s) {
    return std::pow(2.0, 1.0 - 2.0 * s) * std::tgamma(1.0 - s) / std::tgamma(s);
}

}  // namespace

ThetaProfile::ThetaProfile(double s) : s_(s) {
    if (!(s > 0.0 && s < 1.0)) throw ParameterError("profile order must lie in (0,1)");
    front_ = std::pow(2.0, 1.0 - s) / std::tgamma(s);
}

double ThetaProfile::value(double y) const {
    if (y < 0.0) throw ParameterError("profile argument must be non-negative");
    if (y == 0.0) return 1.0;          // lim y^s K_s(y) = 2^{s-1} Γ(s)
    if (y > 700.0) return 0.0;         // K_s underflows; θ < 1e-300 here
    return front_ * std::pow(y, s_) * boost::math::cyl_bessel_k(s_, y);
}

double ThetaProfile::derivative(double y) const {
    if (!(y > 0.0)) throw ParameterError("profile derivative needs y > 0");
    if (y > 700.0) return 0.0;
    // d/dy [y^s K_s(y)] = -y^s K_{s-1}(y) and K_{s-1} = K_{1-s}.
    return -front_ * std::pow(y, s_) * boost::math::cyl_bessel_k(1.0 - s_, y);
}

double ThetaProfile::weighted_slope(double y) const {
    if (!(y > 0.0)) throw ParameterError("weighted slope needs y > 0");
    if (y > 700.0) return 0.0;
    // -y^{1-2s} θ'(y) = 2^{1-s}/Γ(s) · y^{1-s} K_{1-s}(y); stays finite at 0.
    return front_ * std::pow(y, 1.0 - s_) * boost::math::cyl_bessel_k(1.0 - s_, y);
}

namespace {

// Two-sided Frobenius expansion about y = 0 with indicial exponents {0, 2s}:
//   θ(y) = Σ a_n y^{2n} + C y^{2s} Σ b_n y^{2n},  C = -κ_s/(2s),
//   a_{n+1} = a_n / (4(n+1)(n+1-s)),  b_{n+1} = b_n / (4(n+1)(n+1+s)).
// Both series are entire in y²; usable wherever cancellation stays mild.
struct FrobeniusTheta {
    double s;
    double C;
    explicit FrobeniusTheta(double order) : s(order), C(-kappa_of(order) / (2.0 * order)) {}

    void eval(double y, double& theta, double& dtheta) const {
        double a = 1.0, b = 1.0;
        double sum_a = a, sum_b = b;
        double dsum_a = 0.0, dsum_b = 0.0;  // Σ a_n 2n y^{2n-1}, Σ b_n 2n y^{2n-1}
        const double y2 = y * y;
        double pow_a = 1.0;  // y^{2n}
        for (int n = 0; n < 60; ++n) {
            double a_next = a / (4.0 * (n + 1) * (n + 1 - s));
            double b_next = b / (4.0 * (n + 1) * (n + 1 + s));
            double pow_next = pow_a * y2;
            sum_a += a_next * pow_next;
            sum_b += b_next * pow_next;
            dsum_a += a_next * 2.0 * (n + 1) * pow_next / y;
            dsum_b += b_next * 2.0 * (n + 1) * pow_next / y;
            a = a_next;
            b = b_next;
            pow_a = pow_next;
            if (std::abs(a * pow_a) < 1e-18 * std::abs(sum_a) &&
                std::abs(b * pow_a) < 1e-18 * std::abs(sum_b))
                break;
        }
        const double ys = std::pow(y, 2.0 * s);
        theta = sum_a + C * ys * sum_b;
        dtheta = dsum_a + C * (ys * dsum_b + 2.0 * s * ys / y * sum_b);
    }
};

}  // namespace

std::vector<double> theta_via_ode(double s, std::span<const double> y_points) {
    if (!(s > 0.0 && s < 1.0)) throw ParameterError("profile order must lie in (0,1)");
    for (double y : y_points)
        if (!(y > 0.0)) throw ParameterError("ODE cross-check needs positive query points");

    FrobeniusTheta series(s);
    std::vector<std::size_t> order(y_points.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return y_points[a] < y_points[b]; });

    std::vector<double> out(y_points.size());
    const double y_switch = 1.0;  // series below, RK4 above
    std::size_t pos = 0;
    while (pos < order.size() && y_points[order[pos]] <= y_switch) {
        double th, dth;
        series.eval(y_points[order[pos]], th, dth);
        out[order[pos]] = th;
        ++pos;
    }
    if (pos == order.size()) return out;

    // RK4 on (θ, θ') from y_switch outward. Forward integration of the
    // decaying branch is exponentially unstable, so callers should stay below
    // y ≈ 10 for tight comparisons.
    double y = y_switch;
    double th, dth;
    series.eval(y, th, dth);
    auto rhs = [s](double t, double v, double dv, double& out_dv, double& out_ddv) {
        out_dv = dv;
        out_ddv = v - (1.0 - 2.0 * s) / t * dv;
    };
    const double h0 = 5.0e-4;
    for (; pos < order.size(); ++pos) {
        const double target = y_points[order[pos]];
        while (y < target) {
            double h = std::min(h0, target - y);
            double k1v, k1a, k2v, k2a, k3v, k3a, k4v, k4a;
            rhs(y, th, dth, k1v, k1a);
            rhs(y + 0.5 * h, th + 0.5 * h * k1v, dth + 0.5 * h * k1a, k2v, k2a);
            rhs(y + 0.5 * h, th + 0.5 * h * k2v, dth + 0.5 * h * k2a, k3v, k3a);
            rhs(y + h, th + h * k3v, dth + h * k3a, k4v, k4a);
            th += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
            dth += h / 6.0 * (k1a + 2.0 * k2a + 2.0 * k3a + k4a);
            y += h;
        }
        out[order[pos]] = th;
    }
    return out;
}

namespace {

// Trapezoid on the log line for ∫_a^b y^{1-2s} F(y) dy: substitute y = e^x,
// integrand e^{(2-2s)x} F(e^x), uniform step in x. Exponentially accurate for
// integrands smooth on the open interval; endpoint contributions must be
// negligible (singular weight at 0 and exponential decay at ∞ both qualify).
template <typename F>
double log_trapezoid(F&& f, double s, double a, double b, double dx) {
    const double xa = std::log(a), xb = std::log(b);
    const int n = std::max(8, static_cast<int>(std::ceil((xb - xa) / dx)));
    const double h = (xb - xa) / n;
    double acc = 0.0;
    for (int i = 0; i <= n; ++i) {
        double x = xa + h * i;
        double y = std::exp(x);
        double w = (i == 0 || i == n) ? 0.5 : 1.0;
        acc += w * std::exp((2.0 - 2.0 * s) * x) * f(y);
    }
    return acc * h;
}

double lower_cutoff(double s) {
    // Truncated mass below t_min is O(t_min^{2s}) + O(t_min^{2-2s}).
    double p = std::min(2.0 * s, 2.0 - 2.0 * s);
    return std::exp(std::max(-400.0, -40.0 / p));
}

}  // namespace

double theta_energy_integral(double s) {
    if (!(s > 0.0 && s < 1.0)) throw ParameterError("order must lie in (0,1)");
    static std::mutex mutex;
    static std::map<double, double>& cache = *new std::map<double, double>();
    {
        std::lock_guard<std::mutex> lock(mutex);
        auto it = cache.find(s);
        if (it != cache.end()) return it->second;
    }
    ThetaProfile theta(s);
    auto integrand = [&](double y) {
        double t = theta.value(y);
        double d = theta.derivative(y);
        return t * t + d * d;
    };
    double value = log_trapezoid(integrand, s, lower_cutoff(s), 45.0, 0.01);
    std::lock_guard<std::mutex> lock(mutex);
    cache.emplace(s, value);
    return value;
}

ExtendedField::ExtendedField(FourierField trace, TorusConfig cfg)
    : trace_(std::move(trace)), cfg_(cfg), theta_(cfg.s) {
    if (!trace_.is_real()) throw ParameterError("extension requires a real trace");
    if (cfg_.dim != trace_.lattice().dim())
        throw ShapeError("config and lattice dimension differ");
}

FourierField ExtendedField::slice(double y) const {
    FourierField out = trace_;
    const ModeLattice& lat = trace_.lattice();
    auto c = out.coeffs();
    for (std::size_t idx = 0; idx < c.size(); ++idx)
        c[idx] *= theta_.value(std::sqrt(mode_mu(cfg_, lat.k_squared(idx))) * y);
    return out;
}

FourierField ExtendedField::dy_slice(double y) const {
    if (!(y > 0.0)) throw ParameterError("vertical derivative needs y > 0");
    FourierField out = trace_;
    const ModeLattice& lat = trace_.lattice();
    auto c = out.coeffs();
    for (std::size_t idx = 0; idx < c.size(); ++idx) {
        double root_mu = std::sqrt(mode_mu(cfg_, lat.k_squared(idx)));
        c[idx] *= root_mu * theta_.derivative(root_mu * y);
    }
    return out;
}

double ExtendedField::value_at(std::span<const double> x, double y) const {
    const ModeLattice& lat = trace_.lattice();
    if (static_cast<int>(x.size()) != lat.dim())
        throw ShapeError("evaluation point has wrong dimension");
    std::complex<double> acc = 0.0;
    const double w = cfg_.omega();
    for (std::size_t idx = 0; idx < lat.mode_count(); ++idx) {
        std::vector<int> k = lat.mode(idx);
        double phase = 0.0;
        for (int i = 0; i < lat.dim(); ++i) phase += w * k[i] * x[i];
        double root_mu = std::sqrt(mode_mu(cfg_, lat.k_squared(idx)));
        acc += trace_.coeffs()[idx] * theta_.value(root_mu * y) *
               std::complex<double>(std::cos(phase), std::sin(phase));
    }
    return acc.real() / std::sqrt(cfg_.volume());
}

ExtendedField extend(const FourierField& u, const TorusConfig& cfg) {
    return ExtendedField(u, cfg);
}

double cylinder_energy(const ExtendedField& v) {
    const TorusConfig& cfg = v.config();
    const FourierField& u = v.trace();
    const ModeLattice& lat = u.lattice();
    const double integral = theta_energy_integral(cfg.s);
    double acc = 0.0;
    for (std::size_t idx = 0; idx < lat.mode_count(); ++idx)
        acc += std::norm(u.coeffs()[idx]) * std::pow(mode_mu(cfg, lat.k_squared(idx)), cfg.s);
    return acc * integral;
}

FourierField conormal_derivative(const ExtendedField& v, std::span<const double> y_seq) {
    if (y_seq.size() < 3)
        throw ParameterError("conormal extrapolation needs at least three heights");
    for (std::size_t j = 0; j + 1 < y_seq.size(); ++j)
        if (!(y_seq[j] > y_seq[j + 1]) || !(y_seq[j + 1] > 0.0))
            throw ParameterError("height sequence must decrease strictly to 0");

    const TorusConfig& cfg = v.config();
    const double s = cfg.s;

    // g(y) = -y^{1-2s} ∂_y v(·,y) has the expansion L + c₁ y^{2-2s} + c₂ y² + …
    // Two Richardson stages with known exponents remove c₁ then c₂.
    std::vector<FourierField> g;
    g.reserve(y_seq.size());
    for (double y : y_seq) {
        FourierField w = v.dy_slice(y);
        w *= -std::pow(y, 1.0 - 2.0 * s);
        g.push_back(std::move(w));
    }
    std::vector<double> ys(y_seq.begin(), y_seq.end());
    for (double p : {2.0 - 2.0 * s, 2.0}) {
        std::vector<FourierField> next;
        std::vector<double> ys_next;
        for (std::size_t j = 0; j + 1 < g.size(); ++j) {
            double wa = std::pow(ys[j], p), wb = std::pow(ys[j + 1], p);
            // Eliminates the y^p term: (wa·g_{j+1} - wb·g_j)/(wa - wb).
            FourierField combo = g[j + 1] * (wa / (wa - wb)) - g[j] * (wb / (wa - wb));
            next.push_back(std::move(combo));
            ys_next.push_back(ys[j + 1]);
        }
        g = std::move(next);
        ys = std::move(ys_next);
    }
    return g.back();
}

namespace {

// C¹ compactly supported bump b(y) = 1 - cos(2πy/Y) on [0, Y], with
// b(0) = b(Y) = b'(0) = b'(Y) = 0.
struct CosineBump {
    double span;
    double value(double y) const {
        if (y <= 0.0 || y >= span) return 0.0;
        return 1.0 - std::cos(2.0 * kPi * y / span);
    }
    double slope(double y) const {
        if (y <= 0.0 || y >= span) return 0.0;
        return 2.0 * kPi / span * std::sin(2.0 * kPi * y / span);
    }
};

}  // namespace

TraceGap trace_inequality_check(const ExtendedField& v, const BumpPerturbation& bump) {
    const TorusConfig& cfg = v.config();
    const FourierField& u = v.trace();
    const ModeLattice& lat = u.lattice();
    if (!lat.contains(bump.x_mode))
        throw ParameterError("bump carrier mode lies outside the lattice");
    if (!(bump.y_span > 0.0)) throw ParameterError("bump span must be positive");

    const double s = cfg.s;
    const double kappa = cfg.kappa_s();
    const ThetaProfile& theta = v.profile();
    const CosineBump b{bump.y_span};

    // Coefficients of the normalized real carrier e(x). γ = 1 at k = 0,
    // else 1/√2 (cos) or ∓i/√2 (sin) at ±k.
    std::vector<int> kzero(lat.dim(), 0);
    const bool constant_carrier = bump.x_mode == kzero;
    std::vector<int> mirror(lat.dim());
    for (int i = 0; i < lat.dim(); ++i) mirror[i] = -bump.x_mode[i];
    std::map<std::size_t, std::complex<double>> carrier;
    constexpr std::complex<double> iunit(0.0, 1.0);
    if (constant_carrier) {
        carrier[lat.index_of(kzero)] = 1.0;
    } else if (bump.sine) {
        carrier[lat.index_of(bump.x_mode)] = -iunit * 0.7071067811865476;
        carrier[lat.index_of(mirror)] = iunit * 0.7071067811865476;
    } else {
        carrier[lat.index_of(bump.x_mode)] = 0.7071067811865476;
        carrier[lat.index_of(mirror)] = 0.7071067811865476;
    }

    const double hs = hs_norm(u, cfg, +1);
    TraceGap out;
    out.lhs = kappa * hs * hs;

    const double integral = theta_energy_integral(s);
    const double t_min = lower_cutoff(s);
    const double t_max = std::max(45.0, 2.0 * bump.y_span);
    double rhs = 0.0;
    for (std::size_t idx = 0; idx < lat.mode_count(); ++idx) {
        const double mu = mode_mu(cfg, lat.k_squared(idx));
        auto it = carrier.find(idx);
        if (it == carrier.end() || bump.amplitude == 0.0) {
            rhs += std::norm(u.coeffs()[idx]) * std::pow(mu, s) * integral;
            continue;
        }
        // Perturbed vertical coefficient ζ(y) = β θ(√μ y) + A b(y) γ.
        const std::complex<double> beta = u.coeffs()[idx];
        const std::complex<double> gamma = it->second;
        const double root_mu = std::sqrt(mu);
        auto density = [&](double y) {
            std::complex<double> zeta =
                beta * theta.value(root_mu * y) + bump.amplitude * b.value(y) * gamma;
            std::complex<double> dzeta = beta * root_mu * theta.derivative(root_mu * y) +
                                         bump.amplitude * b.slope(y) * gamma;
            return std::norm(dzeta) + mu * std::norm(zeta);
        };
        // Piecewise in y with a node pinned at the support edge: b is only C¹
        // there and the trapezoid would otherwise lose accuracy.
        rhs += log_trapezoid(density, s, t_min, bump.y_span, 0.005) +
               log_trapezoid(density, s, bump.y_span, t_max, 0.005);
    }
    out.rhs = rhs;
    out.gap = out.rhs - out.lhs;
    return out;
}

}  // namespace fracperiod
