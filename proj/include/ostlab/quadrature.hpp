#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <queue>
#include <span>
#include <type_traits>
#include <utility>
#include <vector>

#include "ostlab/errors.hpp"

namespace ostlab::quad {

template <class T>
struct QuadResult {
    T value{};
    double error = 0.0;
    std::size_t intervals = 0;
};

namespace detail {

// Kronrod abscissae on [0,1] (mirrored), Kronrod weights, and the embedded 7-point Gauss weights
// (Gauss nodes are xgk[1], xgk[3], xgk[5], xgk[7]).
inline constexpr std::array<double, 8> xgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
inline constexpr std::array<double, 8> wgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> wg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class T>
struct Segment {
    double a, b;
    T value;
    double error;
    double magnitude;  // integral of |f|, used for the roundoff floor
};

template <class T, class F>
Segment<T> gk15(F& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const T fc = f(c);
    T kron = fc * wgk[7];
    T gauss = fc * wg[3];
    double mag = std::abs(fc) * wgk[7];
    for (int k = 0; k < 7; ++k) {
        const T f1 = f(c - h * xgk[k]);
        const T f2 = f(c + h * xgk[k]);
        kron += (f1 + f2) * wgk[k];
        mag += (std::abs(f1) + std::abs(f2)) * wgk[k];
        if (k % 2 == 1) gauss += (f1 + f2) * wg[k / 2];
    }
    return {a, b, kron * h, std::abs((kron - gauss) * h), mag * std::abs(h)};
}

template <class T>
T neumaier_sum(const std::vector<Segment<T>>& segs) {
    T sum{}, comp{};
    for (const auto& s : segs) {
        const T t = sum + s.value;
        if constexpr (std::is_floating_point_v<T>) {
            comp += std::abs(sum) >= std::abs(s.value) ? (sum - t) + s.value : (s.value - t) + sum;
        } else {
            const auto part = [](double big, double small, double tt) {
                return std::abs(big) >= std::abs(small) ? (big - tt) + small : (small - tt) + big;
            };
            comp += T{part(sum.real(), s.value.real(), t.real()), part(sum.imag(), s.value.imag(), t.imag())};
        }
        sum = t;
    }
    return sum + comp;
}

}  // namespace detail

// Globally adaptive Gauss-Kronrod (7,15) quadrature over the panels defined by sorted breakpoints.
// Segments whose error estimate is at the roundoff level of their own magnitude stop refining.
template <class T, class F>
QuadResult<T> integrate(F&& f, std::span<const double> breaks, double abs_tol,
                        std::size_t max_intervals = 1u << 20) {
    using Seg = detail::Segment<T>;
    if (breaks.size() < 2) return {};
    std::vector<Seg> segs;
    segs.reserve(breaks.size() * 2);
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i)
        if (breaks[i + 1] > breaks[i]) segs.push_back(detail::gk15<T>(f, breaks[i], breaks[i + 1]));

    constexpr double eps = std::numeric_limits<double>::epsilon();
    auto refinable = [&](const Seg& s) {
        const double width_floor = 1e3 * eps * std::max(std::abs(s.a), std::abs(s.b));
        return s.error > 50.0 * eps * s.magnitude && (s.b - s.a) > width_floor;
    };
    auto cmp = [&](std::size_t i, std::size_t j) { return segs[i].error < segs[j].error; };
    std::priority_queue<std::size_t, std::vector<std::size_t>, decltype(cmp)> heap(cmp);
    double total = 0.0;
    for (std::size_t i = 0; i < segs.size(); ++i) {
        total += segs[i].error;
        if (refinable(segs[i])) heap.push(i);
    }

    while (total > abs_tol && !heap.empty()) {
        const std::size_t i = heap.top();
        heap.pop();
        if (segs.size() >= max_intervals)
            throw ConvergenceError("adaptive quadrature exceeded its panel budget");
        const Seg parent = segs[i];
        const double mid = 0.5 * (parent.a + parent.b);
        segs[i] = detail::gk15<T>(f, parent.a, mid);
        segs.push_back(detail::gk15<T>(f, mid, parent.b));
        total += segs[i].error + segs.back().error - parent.error;
        if (refinable(segs[i])) heap.push(i);
        if (refinable(segs.back())) heap.push(segs.size() - 1);
        if (total <= abs_tol) {
            total = 0.0;
            for (const auto& s : segs) total += s.error;
        }
    }
    double err = 0.0;
    for (const auto& s : segs) err += s.error;
    return {detail::neumaier_sum(segs), err, segs.size()};
}

template <class T, class F>
QuadResult<T> integrate(F&& f, double a, double b, double abs_tol, std::size_t max_intervals = 1u << 20) {
    const std::array<double, 2> br{a, b};
    return integrate<T>(std::forward<F>(f), std::span<const double>(br), abs_tol, max_intervals);
}

struct Extrapolation {
    double limit = 0.0;
    double error = 0.0;
    std::vector<double> diagonal;
};

// Richardson table for values sampled at h_k = h_0 / ratio^k whose error expands in powers
// h^{p}, h^{p+step}, ... starting at p = first_order.
inline Extrapolation richardson(std::span<const double> values, double ratio, int first_order,
                                int order_step = 1) {
    const std::size_t n = values.size();
    if (n < 2) throw DomainError("richardson: need at least two values");
    std::vector<std::vector<double>> table(n);
    for (std::size_t k = 0; k < n; ++k) {
        table[k].resize(k + 1);
        table[k][0] = values[k];
        for (std::size_t j = 1; j <= k; ++j) {
            const double p = first_order + static_cast<double>((j - 1) * order_step);
            const double factor = std::pow(ratio, p) - 1.0;
            table[k][j] = table[k][j - 1] + (table[k][j - 1] - table[k - 1][j - 1]) / factor;
        }
    }
    Extrapolation out;
    for (std::size_t k = 0; k < n; ++k) out.diagonal.push_back(table[k][k]);
    out.limit = table[n - 1][n - 1];
    out.error = std::abs(table[n - 1][n - 1] - table[n - 1][n - 2]);
    return out;
}

}  // namespace ostlab::quad
