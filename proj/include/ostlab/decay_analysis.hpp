#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <future>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ostlab/errors.hpp"
#include "ostlab/evolution.hpp"
#include "ostlab/kernel.hpp"
#include "ostlab/spectral_core.hpp"

namespace ostlab {

enum class Side { LEFT, RIGHT, BOTH };

inline std::string_view to_string(Side s) {
    switch (s) {
    case Side::LEFT: return "LEFT";
    case Side::RIGHT: return "RIGHT";
    case Side::BOTH: return "BOTH";
    }
    return "?";
}

struct Window {
    double lo;
    double hi;
};

inline constexpr double kConclusiveR2 = 0.98;

struct DecayFit {
    double exponent = 0.0;
    double log_amplitude = 0.0;
    double r_squared = 0.0;
    Window window{1.0, 2.0};
    Side side = Side::RIGHT;
    std::size_t samples = 0;
    bool conclusive = false;
};

// Least-squares fit of log|u| = log_amplitude - exponent log|x| over the given samples.
inline DecayFit fit_power_law(std::span<const double> x, std::span<const double> u, Window w = {0.0, 0.0},
                              Side side = Side::RIGHT) {
    if (x.size() != u.size()) throw DomainError("fit_power_law: x and u differ in length");
    std::vector<double> X, Y;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] == 0.0 || u[i] == 0.0) continue;
        X.push_back(std::log(std::abs(x[i])));
        Y.push_back(std::log(std::abs(u[i])));
    }
    if (X.size() < 2) throw DomainError("fit_power_law: need at least two nonzero samples");
    const double n = static_cast<double>(X.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < X.size(); ++i) {
        mx += X[i];
        my += Y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < X.size(); ++i) {
        sxx += (X[i] - mx) * (X[i] - mx);
        sxy += (X[i] - mx) * (Y[i] - my);
        syy += (Y[i] - my) * (Y[i] - my);
    }
    if (!(sxx > 0.0)) throw DomainError("fit_power_law: abscissae are degenerate");
    const double slope = sxy / sxx;
    double sse = 0.0;
    for (std::size_t i = 0; i < X.size(); ++i) {
        const double r = Y[i] - (my + slope * (X[i] - mx));
        sse += r * r;
    }
    DecayFit f;
    f.exponent = -slope;
    f.log_amplitude = my - slope * mx;
    f.r_squared = syy > 0.0 ? std::clamp(1.0 - sse / syy, 0.0, 1.0) : 1.0;
    if (w.hi <= w.lo) {
        const auto [lo, hi] = std::minmax_element(X.begin(), X.end());
        w = {std::exp(*lo), std::exp(*hi)};
    }
    f.window = w;
    f.side = side;
    f.samples = X.size();
    f.conclusive = f.r_squared >= kConclusiveR2;
    return f;
}

namespace detail {

inline bool on_side(double x, Window w, Side side) {
    switch (side) {
    case Side::RIGHT: return x >= w.lo && x <= w.hi;
    case Side::LEFT: return -x >= w.lo && -x <= w.hi;
    case Side::BOTH: return std::abs(x) >= w.lo && std::abs(x) <= w.hi;
    }
    return false;
}

inline double trusted_extent(const Grid& g) { return g.half_length() / 4.0; }

inline void require_window(const Grid& g, Window w) {
    if (!(w.lo >= 1.0) || !(w.hi > w.lo)) throw DomainError("window must satisfy 1 <= lo < hi");
    if (w.hi > trusted_extent(g) * (1.0 + 1e-12)) throw DomainError("window leaves the trusted region |x| <= L/4");
}

}  // namespace detail

inline DecayFit fit_tail_exponent(const Field& u, Window w, Side side = Side::RIGHT) {
    const Grid& g = u.grid();
    detail::require_window(g, w);
    const double floor = 1e2 * std::numeric_limits<double>::epsilon() * u.sup_norm();
    std::vector<double> xs, us;
    for (std::size_t j = 0; j < u.size(); ++j) {
        const double x = g.x(j);
        if (detail::on_side(x, w, side) && std::abs(u[j]) > floor) {
            xs.push_back(x);
            us.push_back(u[j]);
        }
    }
    if (xs.size() < 16) throw DomainError("fit_tail_exponent: fewer than 16 samples above the noise floor");
    return fit_power_law(xs, us, w, side);
}

// Window starts L/8, L/16, ... down to min_start, in ascending order.
inline std::vector<double> dyadic_starts(const Grid& g, double min_start = 8.0) {
    std::vector<double> s;
    for (double a = g.half_length() / 8.0; a >= min_start; a /= 2.0) s.push_back(a);
    std::reverse(s.begin(), s.end());
    return s;
}

// Fits [start, L/4] for each dyadic start and keeps the first conclusive one; otherwise the best r^2.
inline DecayFit fit_tail_auto(const Field& u, Side side = Side::RIGHT, double min_start = 8.0) {
    const double hi = detail::trusted_extent(u.grid());
    std::optional<DecayFit> best;
    for (double a : dyadic_starts(u.grid(), min_start)) {
        DecayFit f;
        try {
            f = fit_tail_exponent(u, {a, hi}, side);
        } catch (const DomainError&) {
            continue;
        }
        if (f.conclusive) return f;
        if (!best || f.r_squared > best->r_squared) best = f;
    }
    if (!best) throw DomainError("fit_tail_auto: no window has enough samples above the noise floor");
    return *best;
}

struct UpperLawResult {
    bool holds;
    double max_ratio;
    double argmax;
};

// max |u(x)| (1 + |x|^exponent) / envelope over the points with |x| <= extent.
inline UpperLawResult check_upper_law(std::span<const double> x, std::span<const double> u, double envelope,
                                      double exponent) {
    if (!(envelope > 0.0)) throw DomainError("check_upper_law: envelope constant must be positive");
    UpperLawResult r{true, 0.0, 0.0};
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double q = std::abs(u[i]) * (1.0 + std::pow(std::abs(x[i]), exponent)) / envelope;
        if (q > r.max_ratio) {
            r.max_ratio = q;
            r.argmax = x[i];
        }
    }
    r.holds = r.max_ratio <= 1.0;
    return r;
}

inline UpperLawResult check_upper_law(const Field& u, double envelope, double exponent,
                                      std::optional<double> extent = std::nullopt) {
    const double e = extent.value_or(detail::trusted_extent(u.grid()));
    std::vector<double> xs, us;
    for (std::size_t j = 0; j < u.size(); ++j)
        if (std::abs(u.grid().x(j)) <= e) {
            xs.push_back(u.grid().x(j));
            us.push_back(u[j]);
        }
    return check_upper_law(xs, us, envelope, exponent);
}

struct LowerBoundReport {
    bool pass = false;
    Window window{0.0, 0.0};
    double margin = 0.0;         // min x^2 |u| / (|A| |mass| / 2) on the window
    double min_scaled = 0.0;     // min x^2 |u| / (t |mass|) on the window
    double mass = 0.0;
    double A = 0.0;              // measured tail coefficient in the solver convention
    double A_error = 0.0;
    std::vector<double> starts;  // candidate window starts
    std::vector<double> margins; // margin for each candidate
};

// Searches for M with |u(t, x)| >= (|A| / 2) |mass| / x^2 on [M, L/4].
inline LowerBoundReport lower_bound_check(const Field& solution, const Field& u0, const SymbolSpec& spec,
                                          Side side = Side::RIGHT) {
    const double mass = u0.mass();
    if (!(std::abs(mass) > 1e-6)) throw DomainError("lower_bound_check: |mass| must exceed 1e-6");
    const double t = solution.time();
    if (!(t > 0.0)) throw DomainError("lower_bound_check: solution time must be positive");
    const auto tc = tail_coefficient(spec.with_convention(Convention::ANGULAR), t);
    LowerBoundReport rep;
    rep.mass = mass;
    rep.A = tc.A;
    rep.A_error = tc.error;
    const double hi = detail::trusted_extent(solution.grid());
    const double level = std::abs(tc.A) * std::abs(mass) / 2.0;
    for (double a : dyadic_starts(solution.grid())) {
        double m = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < solution.size(); ++j) {
            const double x = solution.grid().x(j);
            if (detail::on_side(x, {a, hi}, side)) m = std::min(m, x * x * std::abs(solution[j]));
        }
        rep.starts.push_back(a);
        rep.margins.push_back(m / level);
        if (!rep.pass && m / level >= 1.0) {
            rep.pass = true;
            rep.window = {a, hi};
            rep.margin = m / level;
            rep.min_scaled = m / (t * std::abs(mass));
        }
    }
    if (!rep.pass && !rep.margins.empty()) {
        const auto it = std::max_element(rep.margins.begin(), rep.margins.end());
        const auto k = static_cast<std::size_t>(it - rep.margins.begin());
        rep.window = {rep.starts[k], hi};
        rep.margin = *it;
        rep.min_scaled = *it * level / (t * std::abs(mass));
    }
    return rep;
}

struct AsymptoticReport {
    double mass = 0.0;
    double datum_exponent = 0.0;  // fitted u0 tail exponent; +inf when below the noise floor
    std::vector<double> x;         // grid abscissae in the window
    std::vector<double> residual;  // x^2 (u - mass K)
    std::vector<double> points;    // doubling points
    std::vector<double> point_residual;
    std::vector<double> ratios;    // |r(p_k)| / |r(p_{k+1})|
    std::vector<double> correction;  // x^2 int_0^t K(t - tau, x) (int u u_y) dtau at the doubling points
    std::vector<double> nonlinear_times;
    std::vector<double> nonlinear_integrals;  // int u u_y dy
    double max_nonlinear_integral = 0.0;
    double sup_residual = 0.0;
    bool decreasing = false;
};

namespace detail {

inline double u_ux_integral(const Field& u) {
    const Field d = spectral_dx(u, false);
    double s = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) s += u[j] * d[j];
    return s * u.grid().dx();
}

}  // namespace detail

// Profile residual x^2 (u - mass K) on [first, L/4] with doubling points first 2^k.
// `first` defaults to L/32, giving three doublings up to L/4.
inline AsymptoticReport asymptotic_residual(const Field& solution, const Field& u0, const SymbolSpec& spec,
                                            const Trajectory* trajectory = nullptr, Side side = Side::RIGHT,
                                            std::optional<double> first = std::nullopt) {
    const Grid& g = solution.grid();
    const double t = solution.time();
    if (!(t > 0.0)) throw DomainError("asymptotic_residual: solution time must be positive");
    const double hi = detail::trusted_extent(g);
    const double p0 = first.value_or(hi / 8.0);
    detail::require_window(g, {p0, hi});

    AsymptoticReport rep;
    rep.mass = u0.mass();
    try {
        rep.datum_exponent = fit_tail_exponent(u0, {p0, hi}, Side::BOTH).exponent;
    } catch (const DomainError&) {
        rep.datum_exponent = std::numeric_limits<double>::infinity();
    }
    if (!(rep.datum_exponent > 2.05))
        throw HypothesisError("asymptotic_residual: datum must decay faster than |x|^-2 (fitted exponent " +
                              std::to_string(rep.datum_exponent) + ")");

    const SymbolSpec ang = spec.with_convention(Convention::ANGULAR);
    const Field K = kernel_grid(ang, t, g).field;
    for (std::size_t j = 0; j < g.size(); ++j) {
        const double x = g.x(j);
        if (!detail::on_side(x, {p0, hi}, side)) continue;
        const double r = x * x * (solution[j] - rep.mass * K[j]);
        rep.x.push_back(x);
        rep.residual.push_back(r);
        rep.sup_residual = std::max(rep.sup_residual, std::abs(r));
    }
    for (double p = p0; p <= hi * (1.0 + 1e-12); p *= 2.0) {
        const double x = side == Side::LEFT ? -p : p;
        const std::size_t j = g.index_of(x);
        const double xj = g.x(j);
        rep.points.push_back(xj);
        rep.point_residual.push_back(xj * xj * (solution[j] - rep.mass * K[j]));
    }
    rep.decreasing = rep.point_residual.size() >= 2;
    for (std::size_t k = 0; k + 1 < rep.point_residual.size(); ++k) {
        const double ratio = std::abs(rep.point_residual[k]) / std::abs(rep.point_residual[k + 1]);
        rep.ratios.push_back(ratio);
        if (!(ratio >= 1.5)) rep.decreasing = false;
    }

    if (trajectory) {
        for (std::size_t i = 0; i < trajectory->times.size(); ++i) {
            const double v = detail::u_ux_integral(trajectory->field(i));
            rep.nonlinear_times.push_back(trajectory->times[i]);
            rep.nonlinear_integrals.push_back(v);
            rep.max_nonlinear_integral = std::max(rep.max_nonlinear_integral, std::abs(v));
        }
        // Trapezoid in tau on at most 64 stored times; the tau = t node carries K(0, x) = 0 for x != 0.
        const std::size_t n = rep.nonlinear_times.size();
        const std::size_t stride = n > 64 ? (n + 63) / 64 : 1;
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < n; i += stride) idx.push_back(i);
        if (idx.back() != n - 1) idx.push_back(n - 1);
        for (double xp : rep.points) {
            double s = 0.0;
            for (std::size_t k = 0; k + 1 < idx.size(); ++k) {
                const double ta = rep.nonlinear_times[idx[k]], tb = rep.nonlinear_times[idx[k + 1]];
                const double fa = t - ta > 0.0 ? kernel_point(ang, t - ta, xp, 1e-12) * rep.nonlinear_integrals[idx[k]] : 0.0;
                const double fb = t - tb > 0.0 ? kernel_point(ang, t - tb, xp, 1e-12) * rep.nonlinear_integrals[idx[k + 1]] : 0.0;
                s += 0.5 * (tb - ta) * (fa + fb);
            }
            rep.correction.push_back(xp * xp * s);
        }
    }
    return rep;
}

struct ZeroMeanMember {
    std::string name;
    Field u0;
    double epsilon;  // declared decay excess: |u0| <~ |x|^-(2 + epsilon)
};

struct ZeroMeanRow {
    std::string name;
    double epsilon;
    double mass;
    DecayFit fit;
    double lower;
    double upper;
    bool pass;
};

inline constexpr double kNonlinearCeiling = 3.2;

// Evolves each zero-mean member to t and checks 2 + epsilon - 0.15 <= fitted exponent <= 3.2.
inline std::vector<ZeroMeanRow> zero_mean_improvement_scan(const std::vector<ZeroMeanMember>& members, double t,
                                                           const SymbolSpec& spec, const ETDConfig& cfg = {},
                                                           Side side = Side::RIGHT, unsigned jobs = 1,
                                                           double min_start = 8.0) {
    for (const auto& m : members) {
        if (!(m.epsilon > 0.0 && m.epsilon <= 1.0))
            throw HypothesisError("zero_mean_improvement_scan: " + m.name + " declares epsilon outside (0, 1]");
        if (!(std::abs(m.u0.mass()) <= 1e-10))
            throw HypothesisError("zero_mean_improvement_scan: " + m.name + " is not zero-mean to 1e-10");
    }
    auto run = [&](const ZeroMeanMember& m) {
        const auto rep = etd_solve(m.u0, t, cfg, spec);
        ZeroMeanRow row{m.name, m.epsilon, rep.final_field.mass(), fit_tail_auto(rep.final_field, side, min_start),
                        2.0 + m.epsilon - 0.15, kNonlinearCeiling, false};
        row.pass = row.fit.conclusive && row.fit.exponent >= row.lower && row.fit.exponent <= row.upper;
        return row;
    };
    std::vector<ZeroMeanRow> rows;
    rows.reserve(members.size());
    if (jobs <= 1) {
        for (const auto& m : members) rows.push_back(run(m));
        return rows;
    }
    for (std::size_t b = 0; b < members.size(); b += jobs) {
        std::vector<std::future<ZeroMeanRow>> batch;
        for (std::size_t i = b; i < std::min(members.size(), b + jobs); ++i)
            batch.push_back(std::async(std::launch::async, run, std::cref(members[i])));
        for (auto& f : batch) rows.push_back(f.get());
    }
    return rows;
}

}  // namespace ostlab
