#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ostlab/errors.hpp"
#include "ostlab/fft.hpp"

namespace ostlab {

using cplx = std::complex<double>;

enum class Family { OST, NPBO };

// PAPER_2PI: synthesis f(x) = int e^{2 pi i x xi} F(xi) dxi, xi in cycles per unit length.
// ANGULAR:   synthesis f(x) = (1/2pi) int e^{i x xi} F(xi) dxi.
enum class Convention { PAPER_2PI, ANGULAR };

inline std::string_view to_string(Family f) { return f == Family::OST ? "OST" : "NPBO"; }
inline std::string_view to_string(Convention c) {
    return c == Convention::PAPER_2PI ? "PAPER_2PI" : "ANGULAR";
}

class SymbolSpec {
public:
    SymbolSpec(Family family, double eta, Convention convention = Convention::PAPER_2PI)
        : family_(family), eta_(eta), convention_(convention) {
        if (!(eta > 0.0) || !std::isfinite(eta)) throw DomainError("eta must be positive and finite");
    }

    Family family() const noexcept { return family_; }
    double eta() const noexcept { return eta_; }
    Convention convention() const noexcept { return convention_; }

    SymbolSpec with_convention(Convention c) const { return {family_, eta_, c}; }
    SymbolSpec with_eta(double eta) const { return {family_, eta, convention_}; }

    bool operator==(const SymbolSpec&) const = default;

private:
    Family family_;
    double eta_;
    Convention convention_;
};

// Angular wavenumber per unit of the convention's frequency variable: x-derivative is
// multiplication by i * wavenumber_scale * xi.
inline double wavenumber_scale(Convention c) {
    return c == Convention::PAPER_2PI ? 2.0 * std::numbers::pi : 1.0;
}

namespace detail {

inline double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

// Real part of the exponent: eta t (|xi| - |xi|^3).
inline double growth_exponent(double eta, double t, double a) { return eta * t * (a - a * a * a); }

// Imaginary part of the exponent.
inline double phase(Family f, double t, double xi) {
    const double a = std::abs(xi);
    return f == Family::OST ? sign(xi) * a * a * a * t : sign(xi) * a * a * t;
}

}  // namespace detail

inline cplx symbol(const SymbolSpec& spec, double t, double xi) {
    if (!(t >= 0.0)) throw DomainError("symbol: t must be nonnegative");
    const double a = std::abs(xi);
    return std::polar(std::exp(detail::growth_exponent(spec.eta(), t, a)),
                      detail::phase(spec.family(), t, xi));
}

// Derivatives of the exponent phi(xi) with symbol = e^{phi}, valid for xi != 0.
struct ExponentDerivatives {
    cplx d1, d2, d3;
};

inline ExponentDerivatives exponent_derivatives(const SymbolSpec& spec, double t, double xi) {
    if (xi == 0.0) throw DomainError("symbol is not differentiable at xi = 0");
    const double s = detail::sign(xi);
    const double eta = spec.eta();
    const cplx i{0.0, 1.0};
    if (spec.family() == Family::OST) {
        const double x2 = xi * xi;
        return {t * (3.0 * i * x2 - eta * s * (3.0 * x2 - 1.0)),
                6.0 * t * xi * (i - eta * s),
                6.0 * t * (i - eta * s)};
    }
    const double a = std::abs(xi);
    return {t * (2.0 * i * a + eta * s * (1.0 - 3.0 * xi * xi)),
            t * (2.0 * i * s - 6.0 * eta * a),
            cplx{-6.0 * eta * s * t, 0.0}};
}

// All derivatives of the symbol up to order 3 at once: {f, f', f'', f'''}.
struct SymbolJet {
    cplx f, d1, d2, d3;
};

inline SymbolJet symbol_jet(const SymbolSpec& spec, double t, double xi) {
    const cplx f = symbol(spec, t, xi);
    const auto [p1, p2, p3] = exponent_derivatives(spec, t, xi);
    return {f, f * p1, f * (p1 * p1 + p2), f * (p1 * p1 * p1 + 3.0 * p1 * p2 + p3)};
}

inline cplx symbol_derivative(const SymbolSpec& spec, double t, double xi, int order) {
    if (order < 1 || order > 3) throw DomainError("symbol_derivative: order must be 1, 2 or 3");
    const auto jet = symbol_jet(spec, t, xi);
    return order == 1 ? jet.d1 : (order == 2 ? jet.d2 : jet.d3);
}

// Maximum of the symbol modulus over all xi: attained at |xi| = 1/sqrt(3).
inline double symbol_modulus_max(const SymbolSpec& spec, double t) {
    return std::exp(spec.eta() * t * 2.0 / (3.0 * std::sqrt(3.0)));
}

class Grid {
public:
    Grid(double half_length, std::size_t n_points) : L_(half_length), n_(n_points) {
        if (!(half_length > 0.0) || !std::isfinite(half_length))
            throw DomainError("grid half-length must be positive");
        if (n_points < 4 || !std::has_single_bit(n_points))
            throw DomainError("grid point count must be a power of two >= 4");
    }

    double half_length() const noexcept { return L_; }
    std::size_t size() const noexcept { return n_; }
    double dx() const noexcept { return 2.0 * L_ / static_cast<double>(n_); }

    // x_j = -L + j dx, written so that x_{N/2 + k} = -x_{N/2 - k} exactly.
    double x(std::size_t j) const noexcept {
        return (static_cast<double>(j) - static_cast<double>(n_ / 2)) * dx();
    }
    std::vector<double> points() const {
        std::vector<double> xs(n_);
        for (std::size_t j = 0; j < n_; ++j) xs[j] = x(j);
        return xs;
    }

    // Index of the grid point nearest to x (clamped).
    std::size_t index_of(double xv) const {
        const double j = std::round(xv / dx() + static_cast<double>(n_ / 2));
        return static_cast<std::size_t>(std::clamp(j, 0.0, static_cast<double>(n_ - 1)));
    }

    double frequency_spacing(Convention c) const {
        return c == Convention::PAPER_2PI ? 1.0 / (2.0 * L_) : std::numbers::pi / L_;
    }

    // Signed mode number of FFT bin k: 0..N/2 then -N/2+1..-1. Bin N/2 is the Nyquist bin.
    long mode(std::size_t bin) const noexcept {
        return bin <= n_ / 2 ? static_cast<long>(bin) : static_cast<long>(bin) - static_cast<long>(n_);
    }
    std::size_t nyquist_bin() const noexcept { return n_ / 2; }

    double frequency(std::size_t bin, Convention c) const {
        return static_cast<double>(mode(bin)) * frequency_spacing(c);
    }
    std::vector<double> frequencies(Convention c) const {
        std::vector<double> xi(n_);
        for (std::size_t k = 0; k < n_; ++k) xi[k] = frequency(k, c);
        return xi;
    }
    double nyquist_frequency(Convention c) const { return frequency(nyquist_bin(), c); }

    // Highest mode kept by the two-thirds rule.
    std::size_t dealias_cutoff() const noexcept { return n_ / 3; }

    bool operator==(const Grid&) const = default;

private:
    double L_;
    std::size_t n_;
};

class Field {
public:
    Field(Grid grid, double t, std::vector<double> values)
        : grid_(grid), t_(t), values_(std::move(values)) {
        if (values_.size() != grid_.size()) throw ResolutionError("field size does not match grid");
        if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("field time must be nonnegative");
        for (double v : values_)
            if (!std::isfinite(v)) throw DomainError("field contains non-finite values");
    }

    const Grid& grid() const noexcept { return grid_; }
    double time() const noexcept { return t_; }
    std::span<const double> values() const noexcept { return values_; }
    double operator[](std::size_t j) const { return values_[j]; }
    std::size_t size() const noexcept { return values_.size(); }

    double mass() const {
        double s = 0.0;
        for (double v : values_) s += v;
        return s * grid_.dx();
    }
    double sup_norm() const {
        double m = 0.0;
        for (double v : values_) m = std::max(m, std::abs(v));
        return m;
    }

private:
    Grid grid_;
    double t_;
    std::vector<double> values_;
};

// Continuum-normalized spectrum on all N bins: u_hat(xi_m) = dx (-1)^m sum_j u_j e^{-2 pi i jm/N}.
// The same numbers serve both conventions; only the frequency labels differ.
struct Spectrum {
    std::vector<cplx> bins;
};

namespace detail {
inline double parity(long m) { return (m % 2 == 0) ? 1.0 : -1.0; }
}  // namespace detail

inline Spectrum dft_forward(const Field& field) {
    const Grid& g = field.grid();
    const std::size_t n = g.size();
    std::vector<cplx> in(n);
    for (std::size_t j = 0; j < n; ++j) in[j] = field[j];
    Spectrum s{std::vector<cplx>(n)};
    fft::forward(in, s.bins);
    for (std::size_t k = 0; k < n; ++k) s.bins[k] *= g.dx() * detail::parity(g.mode(k));
    return s;
}

// Complex synthesis (1/2L) sum_m u_hat_m (-1)^m e^{2 pi i jm/N}.
inline std::vector<cplx> dft_inverse_complex(const Spectrum& spectrum, const Grid& grid) {
    const std::size_t n = grid.size();
    if (spectrum.bins.size() != n) throw ResolutionError("spectrum size does not match grid");
    std::vector<cplx> in(n), out(n);
    for (std::size_t k = 0; k < n; ++k) in[k] = spectrum.bins[k] * detail::parity(grid.mode(k));
    fft::backward(in, out);
    const double scale = 1.0 / (2.0 * grid.half_length());
    for (auto& v : out) v *= scale;
    return out;
}

inline double max_imaginary(std::span<const cplx> values) {
    double m = 0.0;
    for (const auto& v : values) m = std::max(m, std::abs(v.imag()));
    return m;
}

// Real part of the synthesis; use dft_inverse_complex to inspect the imaginary residue.
inline Field dft_inverse(const Spectrum& spectrum, const Grid& grid, double t = 0.0) {
    const auto z = dft_inverse_complex(spectrum, grid);
    std::vector<double> v(z.size());
    for (std::size_t j = 0; j < z.size(); ++j) v[j] = z[j].real();
    return Field(grid, t, std::move(v));
}

// Raw (unnormalized) half-spectrum helpers used by the solvers.
using HalfSpectrum = std::vector<cplx>;

inline HalfSpectrum half_forward(std::span<const double> values) {
    HalfSpectrum out(values.size() / 2 + 1);
    fft::r2c(values, out);
    return out;
}

inline std::vector<double> half_inverse(std::span<const cplx> half, std::size_t n) {
    std::vector<double> out(n);
    fft::c2r(half, out);
    const double inv = 1.0 / static_cast<double>(n);
    for (auto& v : out) v *= inv;
    return out;
}

// Weight of half-spectrum bin m in full-spectrum sums: 1 for DC and Nyquist, 2 otherwise.
inline double half_weight(std::size_t m, std::size_t n) { return (m == 0 || m == n / 2) ? 1.0 : 2.0; }

inline Field spectral_dx(const Field& field, bool dealias) {
    const Grid& g = field.grid();
    const std::size_t n = g.size();
    auto half = half_forward(field.values());
    const double dk = g.frequency_spacing(Convention::ANGULAR);
    const std::size_t cutoff = g.dealias_cutoff();
    for (std::size_t m = 0; m < half.size(); ++m) {
        const bool drop = (m == n / 2) || (dealias && m > cutoff);
        half[m] = drop ? cplx{} : half[m] * cplx{0.0, dk * static_cast<double>(m)};
    }
    return Field(g, field.time(), half_inverse(half, n));
}

}  // namespace ostlab
