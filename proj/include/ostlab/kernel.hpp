#pragma once

#include <boost/math/special_functions/trigamma.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <variant>
#include <vector>

#include "ostlab/errors.hpp"
#include "ostlab/quadrature.hpp"
#include "ostlab/spectral_core.hpp"

namespace ostlab {

enum class KernelMethod { TRANSFORM, OSCILLATORY_QUAD, IBP_REDUCED };

inline std::string_view to_string(KernelMethod m) {
    switch (m) {
    case KernelMethod::TRANSFORM: return "TRANSFORM";
    case KernelMethod::OSCILLATORY_QUAD: return "OSCILLATORY_QUAD";
    case KernelMethod::IBP_REDUCED: return "IBP_REDUCED";
    }
    return "?";
}

struct KernelSamples {
    Field field;
    double truncation_bound;   // bound on the dropped spectrum beyond the Nyquist frequency
    double imaginary_residue;  // max |Im| of the complex synthesis
};

struct PointValue {
    double value;
    double error;
};

struct TailCoefficient {
    double t;
    double eta;
    double A;
    Convention convention;
    double error;
    std::vector<double> x;       // sample abscissae x0 * 2^k
    std::vector<double> scaled;  // x^2 K(t, x) at those abscissae
    std::vector<double> diagonal;
};

namespace detail {

// Synthesis prefactor P and wavenumber factor kappa: K(x) = P int e^{i kappa x xi} f(xi) dxi.
inline double synthesis_prefactor(Convention c) {
    return c == Convention::PAPER_2PI ? 1.0 : 1.0 / (2.0 * std::numbers::pi);
}

inline void require_time(double t) {
    if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("kernel: t must be positive");
}

inline void require_nyquist(const SymbolSpec& spec, double t, const Grid& grid) {
    const double xn = grid.nyquist_frequency(spec.convention());
    if (std::abs(symbol(spec, t, xn)) >= 1e-14)
        throw ResolutionError("grid too coarse: symbol modulus at the Nyquist frequency is not below 1e-14");
}

// Bound on P int_{|xi| > xi_n} |xi|^order |f| dxi using |f| <= e^{-eta t xi^3 / 2} for xi > sqrt 2.
inline double truncation_bound(const SymbolSpec& spec, double t, const Grid& grid, int order) {
    const double xn = std::max(std::abs(grid.nyquist_frequency(spec.convention())), std::sqrt(2.0));
    const double et = spec.eta() * t;
    const double tail = std::exp(-et * xn * xn * xn / 2.0) / (1.5 * et * xn * xn);
    const double w = order == 0 ? 1.0 : wavenumber_scale(spec.convention()) * xn;
    return 2.0 * synthesis_prefactor(spec.convention()) * w * tail;
}

inline KernelSamples synthesize_kernel(const SymbolSpec& spec, double t, const Grid& grid, int order) {
    require_time(t);
    require_nyquist(spec, t, grid);
    const std::size_t n = grid.size();
    const Convention c = spec.convention();
    Spectrum s{std::vector<cplx>(n)};
    for (std::size_t k = 0; k < n; ++k) {
        const double xi = grid.frequency(k, c);
        cplx f = symbol(spec, t, xi);
        if (order == 1) f *= cplx{0.0, wavenumber_scale(c) * xi};
        // Nyquist bin stands for both +xi_n and -xi_n: keep the average, i.e. the real part.
        if (k == grid.nyquist_bin()) f = order == 1 ? cplx{} : cplx{f.real(), 0.0};
        s.bins[k] = f;
    }
    const auto z = dft_inverse_complex(s, grid);
    std::vector<double> v(n);
    for (std::size_t j = 0; j < n; ++j) v[j] = z[j].real();
    return {Field(grid, t, std::move(v)), truncation_bound(spec, t, grid, order), max_imaginary(z)};
}

// |phi'(xi)| bound used to size panels against the integrand's own variation.
inline double exponent_rate(const SymbolSpec& spec, double t, double xi) {
    const double a = std::abs(xi);
    const double disp = spec.family() == Family::OST ? 3.0 * a * a : 2.0 * a;
    return t * (disp + spec.eta() * (3.0 * a * a + 1.0));
}

// Upper end of the half-line integration: beyond it the integrand envelope is negligible.
template <class H>
double integration_extent(const SymbolSpec& spec, double t, H& envelope, double abs_tol) {
    double xi = 1.5;
    for (int it = 0; it < 4000; ++it, xi *= 1.05) {
        const double mod = std::abs(symbol(spec, t, xi));
        if (mod >= 1e-16) continue;
        const double env = envelope(xi);
        const double decay = 3.0 * spec.eta() * t * xi * xi;
        if (env / decay < 1e-3 * abs_tol) return xi;
    }
    throw ConvergenceError("kernel quadrature: integrand does not decay");
}

// int_{-inf}^{inf} e^{i k xi} h(xi) dxi with h smooth on each half-line (possibly jumping at 0).
template <class H>
quad::QuadResult<cplx> fourier_integral(const SymbolSpec& spec, double t, double k, H&& h, double abs_tol) {
    auto envelope = [&](double xi) { return std::abs(h(xi)) + std::abs(h(-xi)); };
    const double extent = integration_extent(spec, t, envelope, abs_tol);

    std::vector<double> breaks{0.0};
    const double w0 = (std::numbers::pi / 2.0) / (std::abs(k) + exponent_rate(spec, t, 0.0) + 1.0);
    for (int j = 6; j >= 1; --j) breaks.push_back(w0 * std::ldexp(1.0, -j));
    double xi = w0;
    while (xi < extent) {
        breaks.push_back(xi);
        const double w1 = (std::numbers::pi / 2.0) / (std::abs(k) + exponent_rate(spec, t, xi) + 1.0);
        const double w2 = (std::numbers::pi / 2.0) / (std::abs(k) + exponent_rate(spec, t, xi + w1) + 1.0);
        xi += std::min(w1, w2);
    }
    breaks.push_back(extent);

    auto right = [&](double x) { return std::polar(1.0, k * x) * h(x); };
    auto left = [&](double x) { return std::polar(1.0, -k * x) * h(-x); };
    const auto r = quad::integrate<cplx>(right, breaks, abs_tol / 2.0);
    const auto l = quad::integrate<cplx>(left, breaks, abs_tol / 2.0);
    return {r.value + l.value, r.error + l.error, r.intervals + l.intervals};
}

inline void require_point(double x) {
    if (x == 0.0 || !std::isfinite(x)) throw DomainError("kernel point evaluation requires x != 0");
}

}  // namespace detail

inline KernelSamples kernel_grid(const SymbolSpec& spec, double t, const Grid& grid) {
    return detail::synthesize_kernel(spec, t, grid, 0);
}

inline KernelSamples kernel_dx_grid(const SymbolSpec& spec, double t, const Grid& grid) {
    return detail::synthesize_kernel(spec, t, grid, 1);
}

// Boundary term of the twice-integrated representation: the x^-2 coefficient of K.
inline double tail_coefficient_boundary(const SymbolSpec& spec, double t) {
    const double kappa = wavenumber_scale(spec.convention());
    return -detail::synthesis_prefactor(spec.convention()) * 2.0 * spec.eta() * t / (kappa * kappa);
}

// Remainder after two integrations by parts: int e^{i kappa x xi} f''(xi) dxi.
inline quad::QuadResult<cplx> remainder_integral(const SymbolSpec& spec, double t, double x, double abs_tol) {
    detail::require_time(t);
    detail::require_point(x);
    const double k = wavenumber_scale(spec.convention()) * x;
    return detail::fourier_integral(spec, t, k, [&](double xi) { return symbol_derivative(spec, t, xi, 2); },
                                    abs_tol);
}

inline PointValue kernel_point_eval(const SymbolSpec& spec, double t, double x, double tol,
                                    KernelMethod method = KernelMethod::IBP_REDUCED) {
    detail::require_time(t);
    detail::require_point(x);
    if (!(tol > 0.0)) throw DomainError("kernel_point: tol must be positive");
    const double P = detail::synthesis_prefactor(spec.convention());
    const double k = wavenumber_scale(spec.convention()) * x;
    switch (method) {
    case KernelMethod::IBP_REDUCED: {
        // K = P (jump f' + int e^{ik xi} f'') / (ik)^2, jump f' = 2 eta t.
        const double scale = P / (k * k);
        const auto J = remainder_integral(spec, t, x, tol / scale);
        const cplx v = -scale * (2.0 * spec.eta() * t + J.value);
        return {v.real(), scale * J.error};
    }
    case KernelMethod::OSCILLATORY_QUAD: {
        const auto J = detail::fourier_integral(spec, t, k, [&](double xi) { return symbol(spec, t, xi); }, tol / P);
        return {P * J.value.real(), P * J.error};
    }
    case KernelMethod::TRANSFORM: break;
    }
    throw DomainError("kernel_point: TRANSFORM is a grid method");
}

inline double kernel_point(const SymbolSpec& spec, double t, double x, double tol) {
    return kernel_point_eval(spec, t, x, tol).value;
}

inline PointValue kernel_dx_point_eval(const SymbolSpec& spec, double t, double x, double tol,
                                       KernelMethod method = KernelMethod::IBP_REDUCED) {
    detail::require_time(t);
    detail::require_point(x);
    if (!(tol > 0.0)) throw DomainError("kernel_dx_point: tol must be positive");
    const Convention c = spec.convention();
    const double P = detail::synthesis_prefactor(c);
    const double kappa = wavenumber_scale(c);
    const double k = kappa * x;
    const cplx D{0.0, kappa};
    switch (method) {
    case KernelMethod::IBP_REDUCED: {
        // g = D xi f; g, g' continuous at 0, g'' jumps by 4 D eta t.
        // dK/dx = -P (jump g'' + int e^{ik xi} g''') / (ik)^3.
        const cplx ik3 = std::pow(cplx{0.0, k}, 3);
        const double scale = P / std::abs(ik3);
        auto g3 = [&](double xi) {
            const auto j = symbol_jet(spec, t, xi);
            return D * (3.0 * j.d2 + xi * j.d3);
        };
        const auto J = detail::fourier_integral(spec, t, k, g3, tol / scale);
        const cplx v = -P * (D * 4.0 * spec.eta() * t + J.value) / ik3;
        return {v.real(), scale * J.error};
    }
    case KernelMethod::OSCILLATORY_QUAD: {
        auto g = [&](double xi) { return D * xi * symbol(spec, t, xi); };
        const auto J = detail::fourier_integral(spec, t, k, g, tol / P);
        return {P * J.value.real(), P * J.error};
    }
    case KernelMethod::TRANSFORM: break;
    }
    throw DomainError("kernel_dx_point: TRANSFORM is a grid method");
}

inline double kernel_dx_point(const SymbolSpec& spec, double t, double x, double tol) {
    return kernel_dx_point_eval(spec, t, x, tol).value;
}

struct KernelEvalRequest {
    SymbolSpec spec;
    double t;
    std::variant<Grid, std::vector<double>> target;
    KernelMethod method = KernelMethod::IBP_REDUCED;
    double tol = 1e-12;
};

// Uniform front end: grid targets use synthesis, point lists use the chosen quadrature.
inline std::vector<PointValue> evaluate(const KernelEvalRequest& req) {
    std::vector<PointValue> out;
    if (const auto* g = std::get_if<Grid>(&req.target)) {
        if (req.method != KernelMethod::TRANSFORM) throw DomainError("grid targets require TRANSFORM");
        const auto s = kernel_grid(req.spec, req.t, *g);
        const double err = s.truncation_bound + s.imaginary_residue;
        for (double v : s.field.values()) out.push_back({v, err});
        return out;
    }
    for (double x : std::get<std::vector<double>>(req.target))
        out.push_back(kernel_point_eval(req.spec, req.t, x, req.tol, req.method));
    return out;
}

// Estimated contribution of periodic images to grid samples at x, from the x^-2 tail law:
// |A| sum_{m != 0} (x + 2Lm)^-2 = |A| (psi1(1 - x/2L) + psi1(1 + x/2L)) / (4 L^2).
inline double image_alias_estimate(const SymbolSpec& spec, double t, const Grid& grid, double x) {
    const double L = grid.half_length();
    const double a = x / (2.0 * L);
    if (std::abs(a) >= 1.0) throw DomainError("image estimate requires |x| < 2L");
    using boost::math::trigamma;
    return std::abs(tail_coefficient_boundary(spec, t)) * (trigamma(1.0 - a) + trigamma(1.0 + a)) / (4.0 * L * L);
}

// Limit of x^2 K(t, x) by Richardson extrapolation in 1/x along x = x0 2^k, k = 0..levels-1.
inline TailCoefficient tail_coefficient(const SymbolSpec& spec, double t, double x0 = 8.0, int levels = 7) {
    detail::require_time(t);
    if (levels < 3) throw DomainError("tail_coefficient: need at least 3 levels");
    const double scale = std::abs(tail_coefficient_boundary(spec, t));
    TailCoefficient tc{t, spec.eta(), 0.0, spec.convention(), 0.0, {}, {}, {}};
    double qerr = 0.0;
    for (int k = 0; k < levels; ++k) {
        const double x = x0 * std::ldexp(1.0, k);
        const auto pv = kernel_point_eval(spec, t, x, 1e-11 * scale / (x * x));
        tc.x.push_back(x);
        tc.scaled.push_back(x * x * pv.value);
        qerr = std::max(qerr, x * x * pv.error);
    }
    const auto ex = quad::richardson(tc.scaled, 2.0, 1);
    tc.A = ex.limit;
    tc.diagonal = ex.diagonal;
    // Table entries amplify sample errors by at most prod (1 + 2/(2^p - 1)) < 10 for p >= 1.
    tc.error = ex.error + 10.0 * qerr;
    const std::size_t n = ex.diagonal.size();
    const double first = std::abs(ex.diagonal[1] - ex.diagonal[0]);
    const double last = std::abs(ex.diagonal[n - 1] - ex.diagonal[n - 2]);
    if (!std::isfinite(tc.A) || (last > first && last > 1e-3 * std::abs(tc.A)))
        throw ConvergenceError("tail_coefficient: extrapolation does not settle");
    return tc;
}

// int (1 + |xi|^m) |f(t, xi)| dxi over the real line.
inline double weighted_symbol_l1(const SymbolSpec& spec, double t, double m) {
    detail::require_time(t);
    if (!(m > -1.0)) throw DomainError("weighted_symbol_l1: m must exceed -1");
    const double et = spec.eta() * t;
    auto g = [&](double xi) { return (1.0 + std::pow(xi, m)) * std::exp(et * (xi - xi * xi * xi)); };

    double extent = 2.0;
    while (g(extent) > 1e-300 && (1.0 + std::pow(extent, m)) * std::exp(et * (extent - extent * extent * extent)) /
                                         (3.0 * et * extent * extent) > 1e-22)
        extent *= 1.05;

    // Geometric panels toward 0 resolve |xi|^m for non-integer m; the innermost sliver is exact.
    const double inner = std::ldexp(1.0, -60);
    std::vector<double> breaks{inner};
    for (int j = 59; j >= 0; --j) breaks.push_back(std::ldexp(1.0, -j));
    for (double x = 1.0 + 0.25; x < extent; x += 0.25) breaks.push_back(x);
    breaks.push_back(extent);
    const double sliver = inner + std::pow(inner, m + 1.0) / (m + 1.0);

    const auto rough = quad::integrate<double>(g, breaks, 1e-6);
    const auto fine = quad::integrate<double>(g, breaks, 1e-15 * std::abs(rough.value));
    return 2.0 * (fine.value + sliver);
}

}  // namespace ostlab
