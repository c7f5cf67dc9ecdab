#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "ostlab/errors.hpp"
#include "ostlab/evolution.hpp"
#include "ostlab/kernel.hpp"
#include "ostlab/spectral_core.hpp"

namespace ostlab {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// q with 1 + 1/p = 1/q + 2/p, i.e. the conjugate exponent of p.
inline double holder_exponent(double p) {
    if (!(p >= 1.0)) throw DomainError("holder_exponent: p must be at least 1");
    if (std::isinf(p)) return 1.0;
    if (p == 1.0) return kInf;
    return p / (p - 1.0);
}

// (sum |u|^p dx)^{1/p}; p = inf is the discrete max norm.
inline double lp_norm(std::span<const double> u, double dx, double p) {
    if (!(p >= 1.0)) throw DomainError("lp_norm: p must be at least 1");
    double m = 0.0;
    for (double v : u) m = std::max(m, std::abs(v));
    if (std::isinf(p) || m == 0.0) return m;
    double s = 0.0;
    for (double v : u) s += std::pow(std::abs(v) / m, p);
    return m * std::pow(s * dx, 1.0 / p);
}

inline double lp_norm(const Field& u, double p) { return lp_norm(u.values(), u.grid().dx(), p); }

// Geometric grid of 16 times on [T/16, T].
inline std::vector<double> weight_times(double T) {
    std::vector<double> t(16);
    for (int k = 0; k < 16; ++k) t[k] = T / 16.0 * std::pow(16.0, k / 15.0);
    t.back() = T;
    return t;
}

struct ThresholdConstants {
    double c_hat = 0.0;  // max t^{1/3} e^{-5 eta t} ||K(t)||_1
    double C_hat = 0.0;  // max t^{2/3} e^{-6 eta t} ||d_x K(t)||_q
    double q = 1.0;
    std::vector<double> times;
    std::vector<double> kernel_norms;
    std::vector<double> dkernel_norms;
};

inline ThresholdConstants measure_threshold_constants(const SymbolSpec& spec, const Grid& grid, double p, double T) {
    if (!(T > 0.0)) throw DomainError("measure_threshold_constants: T must be positive");
    const SymbolSpec ang = spec.with_convention(Convention::ANGULAR);
    const double eta = spec.eta();
    ThresholdConstants c;
    c.q = holder_exponent(p);
    c.times = weight_times(T);
    for (double t : c.times) {
        const double k1 = lp_norm(kernel_grid(ang, t, grid).field, 1.0);
        const double kq = lp_norm(kernel_dx_grid(ang, t, grid).field, c.q);
        c.kernel_norms.push_back(k1);
        c.dkernel_norms.push_back(kq);
        c.c_hat = std::max(c.c_hat, std::cbrt(t) * std::exp(-5.0 * eta * t) * k1);
        c.C_hat = std::max(c.C_hat, std::pow(t, 2.0 / 3.0) * std::exp(-6.0 * eta * t) * kq);
    }
    return c;
}

inline double smallness_threshold(const ThresholdConstants& c, double eta, double T) {
    if (!(c.c_hat > 0.0) || !(c.C_hat > 0.0)) throw DomainError("smallness_threshold: constants must be positive");
    return 1.0 / (4.0 * c.c_hat * c.C_hat * std::exp(11.0 * eta * T));
}

struct LpConfig {
    double p = 2.0;
    double T = 1.0;
    ThresholdConstants constants;
    double tol = 1e-14;
    int n_max = 60;
    int time_quad_nodes = 128;
    double grading = 3.0;
    bool dealias = true;
};

struct LpReport {
    SolveReport solve;
    double delta = 0.0;
    double datum_norm = 0.0;              // ||u0||_p
    double weighted_norm = 0.0;           // max_k t_k^{1/3} ||u(t_k)||_p
    double linear_bound = 0.0;            // c_hat e^{5 eta T} ||u0||_p
    double contraction_factor = 0.0;
    std::vector<double> weight_times;
    std::vector<double> weighted_samples;  // t_k^{1/3} ||u(t_k)||_p
};

namespace detail {

struct LpSetup {
    SpectralModel model;
    std::vector<double> wt;
    std::vector<double> tau;
    std::vector<std::size_t> idx;  // positions of wt inside tau
};

inline LpSetup lp_setup(const Field& u0, const LpConfig& cfg, const SymbolSpec& spec) {
    if (!(cfg.T > 0.0)) throw DomainError("picard_lp: T must be positive");
    if (!(cfg.p >= 1.0)) throw DomainError("picard_lp: p must be at least 1");
    LpSetup s{SpectralModel(u0.grid(), spec, cfg.dealias, true), weight_times(cfg.T), {}, {}};
    s.tau = graded_nodes(cfg.T, cfg.time_quad_nodes, cfg.grading, s.wt);
    for (double t : s.wt) {
        const auto it = std::min_element(s.tau.begin(), s.tau.end(),
                                         [t](double a, double b) { return std::abs(a - t) < std::abs(b - t); });
        s.idx.push_back(static_cast<std::size_t>(it - s.tau.begin()));
    }
    return s;
}

inline std::vector<double> weighted_samples(const LpSetup& s, const std::vector<HalfSpectrum>& traj, double p) {
    std::vector<double> w;
    for (std::size_t k = 0; k < s.idx.size(); ++k)
        w.push_back(std::cbrt(s.tau[s.idx[k]]) * lp_norm(s.model.physical(traj[s.idx[k]]), s.model.grid().dx(), p));
    return w;
}

inline double weighted_norm(const LpSetup& s, const std::vector<HalfSpectrum>& traj, double p) {
    const auto w = weighted_samples(s, traj, p);
    return *std::max_element(w.begin(), w.end());
}

inline PicardOutcome lp_iterate(const LpSetup& s, const DuhamelMap& map, std::vector<HalfSpectrum> start,
                                const LpConfig& cfg, double divergence_level) {
    const TrajectoryNorm norm = [&](const DuhamelMap&, const std::vector<HalfSpectrum>& d) {
        return weighted_norm(s, d, cfg.p);
    };
    const IterateMonitor monitor = [&](const std::vector<HalfSpectrum>& it) {
        if (weighted_norm(s, it, cfg.p) > divergence_level)
            throw ConvergenceError("picard_lp: weighted norm exceeded 10x the linear bound");
    };
    return picard_iterate(map, std::move(start), cfg.n_max, cfg.tol, norm, 1e6, monitor);
}

}  // namespace detail

inline LpReport picard_lp(const Field& u0, const LpConfig& cfg, const SymbolSpec& spec) {
    const auto s = detail::lp_setup(u0, cfg, spec);
    const detail::DuhamelMap map(s.model, s.tau, s.model.forward(u0.values()));
    LpReport rep{SolveReport{Field(u0.grid(), cfg.T, std::vector<double>(u0.size()))}};
    rep.datum_norm = lp_norm(u0, cfg.p);
    rep.delta = smallness_threshold(cfg.constants, spec.eta(), cfg.T);
    rep.linear_bound = cfg.constants.c_hat * std::exp(5.0 * spec.eta() * cfg.T) * rep.datum_norm;
    if (rep.datum_norm >= rep.delta)
        rep.solve.warnings.push_back("||u0||_p >= delta: smallness is sufficient only, contraction not guaranteed");

    auto run = detail::lp_iterate(s, map, {}, cfg, 10.0 * rep.linear_bound);
    rep.weight_times = s.wt;
    rep.weighted_samples = detail::weighted_samples(s, run.iterate, cfg.p);
    rep.weighted_norm = *std::max_element(rep.weighted_samples.begin(), rep.weighted_samples.end());
    const double floor = 1e3 * std::numeric_limits<double>::epsilon() * rep.weighted_norm;
    for (std::size_t n = 1; n < run.residuals.size(); ++n)
        if (run.residuals[n - 1] > floor && run.residuals[n] > floor)
            rep.contraction_factor = std::max(rep.contraction_factor, run.residuals[n] / run.residuals[n - 1]);

    rep.solve.final_field = Field(u0.grid(), cfg.T, s.model.physical(run.iterate.back()));
    rep.solve.iterations = run.iterations;
    rep.solve.steps = s.tau.size() - 1;
    rep.solve.residuals = run.residuals;
    rep.solve.times = s.tau;
    for (const auto& v : run.iterate) {
        rep.solve.mass.push_back(s.model.mass(v));
        rep.solve.l2.push_back(std::sqrt(s.model.l2_squared(v)));
    }
    return rep;
}

struct UniquenessReport {
    double gap = 0.0;  // weighted norm of the difference of the two limits
    std::size_t iterations_from_zero = 0;
    std::size_t iterations_from_linear = 0;
    double start_distance = 0.0;  // weighted distance between the two starting iterates
    bool within_bound = true;     // gap <= 2 tol
};

// Iterates from 0 and from the linear term plus a seeded low-mode perturbation toward the same fixed point.
inline UniquenessReport uniqueness_witness(const Field& u0, const LpConfig& cfg, const SymbolSpec& spec,
                                           std::uint64_t seed, bool strict = true) {
    const auto s = detail::lp_setup(u0, cfg, spec);
    const detail::DuhamelMap map(s.model, s.tau, s.model.forward(u0.values()));
    const double level = 10.0 * cfg.constants.c_hat * std::exp(5.0 * spec.eta() * cfg.T) * lp_norm(u0, cfg.p);

    std::mt19937_64 rng(seed);
    auto unit = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53 * 2.0 - 1.0; };
    const double n = static_cast<double>(u0.size());
    const double scale = 0.5 * u0.sup_norm() * n / 16.0;
    HalfSpectrum bump(s.model.half());
    for (std::size_t m = 1; m <= 8 && m < bump.size(); ++m) {
        const double re = unit(), im = unit();
        bump[m] = scale * cplx{re, im};
    }
    std::vector<HalfSpectrum> startB = map.linear_term();
    for (auto& v : startB)
        for (std::size_t m = 0; m < v.size(); ++m) v[m] += bump[m];

    UniquenessReport rep;
    rep.start_distance = detail::weighted_norm(s, startB, cfg.p);
    const auto a = detail::lp_iterate(s, map, {}, cfg, level);
    const auto b = detail::lp_iterate(s, map, std::move(startB), cfg, level);
    rep.iterations_from_zero = a.iterations;
    rep.iterations_from_linear = b.iterations;
    rep.gap = detail::weighted_norm(s, detail::difference(a.iterate, b.iterate), cfg.p);
    rep.within_bound = rep.gap <= 2.0 * cfg.tol;
    if (strict && rep.gap > 10.0 * cfg.tol) throw ConvergenceError("uniqueness_witness: gap exceeds 10 tol");
    return rep;
}

}  // namespace ostlab
