#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ostlab/constants.hpp"
#include "ostlab/errors.hpp"
#include "ostlab/spectral_core.hpp"

namespace ostlab {

enum class EtdScheme { EXP_EULER, ETD_RK2, ETD_RK4 };

inline std::string_view to_string(EtdScheme s) {
    switch (s) {
    case EtdScheme::EXP_EULER: return "EXP_EULER";
    case EtdScheme::ETD_RK2: return "ETD_RK2";
    case EtdScheme::ETD_RK4: return "ETD_RK4";
    }
    return "?";
}

struct ETDConfig {
    double dt = 1e-3;
    EtdScheme scheme = EtdScheme::ETD_RK4;
    bool dealias = true;
    bool nonlinear = true;  // test hook: false drops -1/2 (u^2)_x
    bool keep_spectra = false;
    double blowup_threshold = 1e6;
};

struct PicardConfig {
    int n_max = 60;
    double tol = 1e-12;
    int time_quad_nodes = 128;  // time steps of the graded grid on [0, t]
    double grading = 3.0;       // clustering exponent at both ends of [0, t]
    bool dealias = true;
    bool nonlinear = true;  // test hook
    bool keep_trajectory = false;
    std::vector<double> output_times;  // merged into the time grid
    double blowup_threshold = 1e6;
};

// Unnormalized r2c coefficients of u at each stored time.
struct Trajectory {
    Grid grid;
    SymbolSpec spec;
    std::vector<double> times;
    std::vector<HalfSpectrum> spectra;

    Field field(std::size_t i) const { return Field(grid, times.at(i), half_inverse(spectra.at(i), grid.size())); }
};

struct SolveReport {
    Field final_field;
    std::size_t iterations = 0;
    std::size_t steps = 0;
    std::vector<double> residuals;
    std::vector<double> times;
    std::vector<double> mass;
    std::vector<double> l2;
    std::vector<std::string> warnings;
    std::vector<std::string> notes;
    std::optional<Trajectory> trajectory;
};

namespace detail {

// phi_0 = e^z, phi_{k+1}(z) = (phi_k(z) - 1/k!) / z.
struct PhiValues {
    cplx e, p1, p2, p3;
};

inline PhiValues phi_functions(cplx z) {
    if (std::abs(z) < 1.0) {
        // phi_k(z) = sum_j z^j / (j + k)!
        cplx p1{}, p2{}, p3{};
        cplx zj{1.0, 0.0};
        double f1 = 1.0, f2 = 0.5, f3 = 1.0 / 6.0;  // 1/(j+1)!, 1/(j+2)!, 1/(j+3)!
        for (int j = 0; j < 24; ++j) {
            p1 += zj * f1;
            p2 += zj * f2;
            p3 += zj * f3;
            zj *= z;
            f1 /= (j + 2);
            f2 /= (j + 3);
            f3 /= (j + 4);
        }
        return {1.0 + z * p1, p1, p2, p3};
    }
    const cplx e = std::exp(z);
    const cplx p1 = (e - 1.0) / z;
    const cplx p2 = (p1 - 1.0) / z;
    const cplx p3 = (p2 - 0.5) / z;
    return {e, p1, p2, p3};
}

// Angular-convention spectral model of u_t = L u - 1/2 (u^2)_x on a periodic grid, in raw
// r2c coefficients v_m, m = 0..N/2.
class SpectralModel {
public:
    SpectralModel(const Grid& grid, const SymbolSpec& spec, bool dealias, bool nonlinear)
        : grid_(grid), spec_(spec), dealias_(dealias), nonlinear_(nonlinear) {
        if (spec.convention() != Convention::ANGULAR)
            throw DomainError("solvers operate in the ANGULAR convention");
        const std::size_t h = half();
        xi_.resize(h);
        lin_.resize(h);
        const double dk = grid.frequency_spacing(Convention::ANGULAR);
        for (std::size_t m = 0; m < h; ++m) {
            const double xi = dk * static_cast<double>(m);
            xi_[m] = xi;
            const double disp = spec.family() == Family::OST ? xi * xi * xi : xi * xi;
            lin_[m] = cplx{spec.eta() * (xi - xi * xi * xi), disp};
        }
        // The Nyquist mode represents +-xi_n together; its dispersive phase averages out.
        lin_[h - 1] = cplx{lin_[h - 1].real(), 0.0};
        cutoff_ = dealias ? grid.dealias_cutoff() : h - 1;
    }

    const Grid& grid() const noexcept { return grid_; }
    const SymbolSpec& spec() const noexcept { return spec_; }
    std::size_t half() const noexcept { return grid_.size() / 2 + 1; }
    std::size_t active() const noexcept { return nonlinear_ ? cutoff_ + 1 : 0; }  // modes with forcing
    bool nonlinear() const noexcept { return nonlinear_; }
    double xi(std::size_t m) const { return xi_[m]; }
    cplx linear(std::size_t m) const { return lin_[m]; }

    // Raw coefficients of -1/2 (u^2)_x, two-thirds truncated before and after squaring.
    HalfSpectrum nonlinear_term(const HalfSpectrum& v) const {
        const std::size_t h = half();
        HalfSpectrum out(h);
        if (!nonlinear_) return out;
        HalfSpectrum w(h);
        for (std::size_t m = 0; m <= cutoff_ && m < h; ++m) w[m] = v[m];
        if (!dealias_) w[h - 1] = cplx{w[h - 1].real(), 0.0};
        auto u = half_inverse(w, grid_.size());
        for (auto& x : u) x *= x;
        auto sq = half_forward(u);
        for (std::size_t m = 0; m <= cutoff_ && m < h; ++m) out[m] = cplx{0.0, -0.5 * xi_[m]} * sq[m];
        if (!dealias_) out[h - 1] = {};
        return out;
    }

    HalfSpectrum forward(std::span<const double> u) const { return half_forward(u); }
    std::vector<double> physical(const HalfSpectrum& v) const { return half_inverse(v, grid_.size()); }

    double mass(const HalfSpectrum& v) const { return grid_.dx() * v[0].real(); }

    // ||u||_2^2 by Parseval.
    double l2_squared(const HalfSpectrum& v) const {
        double s = 0.0;
        for (std::size_t m = 0; m < v.size(); ++m) s += half_weight(m, grid_.size()) * std::norm(v[m]);
        return s * grid_.dx() / static_cast<double>(grid_.size());
    }

    // eta int (|xi| - |xi|^3) |u_hat|^2 dxi / 2pi: the linear part of d/dt (1/2)||u||^2.
    double quadratic_form(const HalfSpectrum& v) const {
        double s = 0.0;
        for (std::size_t m = 0; m < v.size(); ++m)
            s += half_weight(m, grid_.size()) * lin_[m].real() * std::norm(v[m]);
        return s * grid_.dx() / static_cast<double>(grid_.size());
    }

    double sup(const HalfSpectrum& v) const {
        double s = 0.0;
        for (double x : physical(v)) s = std::max(s, std::abs(x));
        return s;
    }

private:
    Grid grid_;
    SymbolSpec spec_;
    bool dealias_;
    bool nonlinear_;
    std::size_t cutoff_;
    std::vector<double> xi_;
    std::vector<cplx> lin_;
};

inline void require_finite_solution(double sup, double threshold) {
    if (!std::isfinite(sup) || sup > threshold) throw ConvergenceError("blow-up guard: sup norm exceeded threshold");
}

// Graded grid on [0, t]: tau = t g(s), g(s) = (2s)^p / 2 on [0, 1/2], mirrored on [1/2, 1].
inline std::vector<double> graded_nodes(double t, int steps, double grading, std::span<const double> extra) {
    std::vector<double> tau;
    tau.reserve(static_cast<std::size_t>(steps) + extra.size() + 1);
    for (int i = 0; i <= steps; ++i) {
        const double s = static_cast<double>(i) / steps;
        const double g = s <= 0.5 ? 0.5 * std::pow(2.0 * s, grading) : 1.0 - 0.5 * std::pow(2.0 * (1.0 - s), grading);
        tau.push_back(t * g);
    }
    for (double e : extra)
        if (e > 0.0 && e < t) tau.push_back(e);
    std::sort(tau.begin(), tau.end());
    std::vector<double> out;
    for (double v : tau)
        if (out.empty() || v - out.back() > 1e-12 * t) out.push_back(v);
    out.back() = t;
    return out;
}

// Product-integration form of the Duhamel map on a fixed time grid:
// v(tau_i) = E(tau_i) v0 + D_i,  D_i = E(h_i) D_{i-1} + h_i [(phi1 - phi2) N_{i-1} + phi2 N_i],
// with N_i the nonlinear term of the current iterate at tau_i (piecewise-linear in time).
class DuhamelMap {
public:
    DuhamelMap(const SpectralModel& model, std::vector<double> tau, HalfSpectrum v0)
        : model_(model), tau_(std::move(tau)), v0_(std::move(v0)) {
        const std::size_t h = model_.half();
        linear_.resize(tau_.size());
        for (std::size_t i = 0; i < tau_.size(); ++i) {
            linear_[i].resize(h);
            for (std::size_t m = 0; m < h; ++m) linear_[i][m] = std::exp(model_.linear(m) * tau_[i]) * v0_[m];
        }
    }

    const std::vector<double>& times() const noexcept { return tau_; }
    const std::vector<HalfSpectrum>& linear_term() const noexcept { return linear_; }
    const SpectralModel& model() const noexcept { return model_; }

    std::vector<HalfSpectrum> apply(const std::vector<HalfSpectrum>& iterate) const {
        const std::size_t h = model_.half();
        const std::size_t act = model_.active();
        std::vector<HalfSpectrum> out = linear_;
        if (act == 0) return out;
        HalfSpectrum D(h), prevN = model_.nonlinear_term(iterate[0]);
        for (std::size_t i = 1; i < tau_.size(); ++i) {
            const HalfSpectrum N = model_.nonlinear_term(iterate[i]);
            const double step = tau_[i] - tau_[i - 1];
            for (std::size_t m = 0; m < act; ++m) {
                const auto ph = phi_functions(model_.linear(m) * step);
                D[m] = ph.e * D[m] + step * ((ph.p1 - ph.p2) * prevN[m] + ph.p2 * N[m]);
                out[i][m] += D[m];
            }
            prevN = N;
        }
        return out;
    }

private:
    const SpectralModel& model_;
    std::vector<double> tau_;
    HalfSpectrum v0_;
    std::vector<HalfSpectrum> linear_;
};

struct PicardOutcome {
    std::vector<HalfSpectrum> iterate;
    std::vector<double> residuals;
    std::size_t iterations = 0;
};

using TrajectoryNorm = std::function<double(const DuhamelMap&, const std::vector<HalfSpectrum>&)>;
using IterateMonitor = std::function<void(const std::vector<HalfSpectrum>&)>;

inline double sup_over_nodes(const DuhamelMap& map, const std::vector<HalfSpectrum>& diff) {
    double r = 0.0;
    for (const auto& v : diff) r = std::max(r, map.model().sup(v));
    return r;
}

inline std::vector<HalfSpectrum> difference(const std::vector<HalfSpectrum>& a, const std::vector<HalfSpectrum>& b) {
    std::vector<HalfSpectrum> d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        d[i].resize(a[i].size());
        for (std::size_t m = 0; m < a[i].size(); ++m) d[i][m] = a[i][m] - b[i][m];
    }
    return d;
}

// Successive substitution u_{n+1} = Phi(u_n) starting from `start` (zero trajectory if empty).
inline PicardOutcome picard_iterate(const DuhamelMap& map, std::vector<HalfSpectrum> start, int n_max, double tol,
                                    const TrajectoryNorm& norm, double blowup,
                                    const IterateMonitor& monitor = {}) {
    if (n_max < 1) throw DomainError("picard: n_max must be at least 1");
    if (!(tol > 0.0)) throw DomainError("picard: tol must be positive");
    const std::size_t h = map.model().half();
    if (start.empty()) start.assign(map.times().size(), HalfSpectrum(h));
    PicardOutcome out{std::move(start), {}, 0};
    int rising = 0;
    for (int n = 1; n <= n_max; ++n) {
        auto next = map.apply(out.iterate);
        const double r = norm(map, difference(next, out.iterate));
        out.iterate = std::move(next);
        out.iterations = static_cast<std::size_t>(n);
        if (!out.residuals.empty()) rising = r > out.residuals.back() ? rising + 1 : 0;
        out.residuals.push_back(r);
        require_finite_solution(map.model().sup(out.iterate.back()), blowup);
        if (monitor) monitor(out.iterate);
        if (r < tol) return out;
        // Without the nonlinearity the map is constant, so its first image is the fixed point.
        if (!map.model().nonlinear()) return out;
        if (rising >= 3) throw ConvergenceError("picard: residuals increased on 3 consecutive iterations");
    }
    throw ConvergenceError("picard: iteration cap reached before the tolerance");
}

inline double weighted_sup(const Field& u) {
    double s = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) {
        const double x = u.grid().x(j);
        s = std::max(s, (1.0 + x * x) * std::abs(u[j]));
    }
    return s;
}

}  // namespace detail

inline SolveReport duhamel_picard(const Field& u0, double t, const PicardConfig& cfg, const SymbolSpec& spec) {
    if (!(t > 0.0)) throw DomainError("duhamel_picard: t must be positive");
    if (cfg.time_quad_nodes < 4) throw DomainError("duhamel_picard: time_quad_nodes must be at least 4");
    const detail::SpectralModel model(u0.grid(), spec, cfg.dealias, cfg.nonlinear);
    auto tau = detail::graded_nodes(t, cfg.time_quad_nodes, cfg.grading, cfg.output_times);
    const detail::DuhamelMap map(model, tau, model.forward(u0.values()));

    std::vector<std::string> warnings;
    const double factor = C2_eta(spec.eta()) * std::exp(5.0 * spec.eta() * t) *
                          std::max(std::pow(t, 2.0 / 3.0), std::sqrt(t)) * detail::weighted_sup(u0);
    if (cfg.nonlinear && factor >= 1.0)
        warnings.push_back("contraction estimate C2 e^{5 eta T} max(T^{2/3}, T^{1/2}) ||(1+x^2)u0|| = " +
                           std::to_string(factor) + " >= 1; convergence is not guaranteed by the estimate");

    auto run = detail::picard_iterate(map, {}, cfg.n_max, cfg.tol, detail::sup_over_nodes, cfg.blowup_threshold);

    SolveReport rep{Field(u0.grid(), t, model.physical(run.iterate.back()))};
    rep.iterations = run.iterations;
    rep.steps = tau.size() - 1;
    rep.residuals = std::move(run.residuals);
    rep.times = tau;
    for (const auto& v : run.iterate) {
        rep.mass.push_back(model.mass(v));
        rep.l2.push_back(std::sqrt(model.l2_squared(v)));
    }
    rep.warnings = std::move(warnings);
    if (cfg.keep_trajectory) rep.trajectory = Trajectory{u0.grid(), spec, tau, std::move(run.iterate)};
    return rep;
}

inline SolveReport etd_solve(const Field& u0, double T, const ETDConfig& cfg, const SymbolSpec& spec) {
    if (!(T > 0.0)) throw DomainError("etd_solve: T must be positive");
    if (!(cfg.dt > 0.0) || cfg.dt > T * (1.0 + 1e-12)) throw DomainError("etd_solve: step size rejected (need 0 < dt <= T)");
    const detail::SpectralModel model(u0.grid(), spec, cfg.dealias, cfg.nonlinear);
    const std::size_t n_steps = static_cast<std::size_t>(std::ceil(T / cfg.dt - 1e-9));
    const double h = T / static_cast<double>(n_steps);
    const std::size_t H = model.half();

    SolveReport rep{Field(u0.grid(), T, std::vector<double>(u0.size()))};
    if (std::abs(h - cfg.dt) > 1e-12 * cfg.dt) rep.notes.push_back("dt adjusted to " + std::to_string(h) + " to land on T");
    const double phase = h * std::abs(model.linear(H - 2).imag());
    if (phase > 3.14159265358979323846)
        rep.notes.push_back("linear phase per step exceeds pi at the highest resolved mode; the exponential "
                            "propagator is exact so no filtering is applied");

    std::vector<cplx> E(H), E2(H), p1h(H), f0(H), f1(H), f2(H), f3(H);
    for (std::size_t m = 0; m < H; ++m) {
        const auto full = detail::phi_functions(model.linear(m) * h);
        const auto half = detail::phi_functions(model.linear(m) * (h / 2.0));
        E[m] = full.e;
        E2[m] = half.e;
        p1h[m] = half.p1;
        switch (cfg.scheme) {
        case EtdScheme::EXP_EULER: f0[m] = full.p1; break;
        case EtdScheme::ETD_RK2:
            f0[m] = full.p1;
            f1[m] = full.p2;
            break;
        case EtdScheme::ETD_RK4:
            f0[m] = full.p1 - 3.0 * full.p2 + 4.0 * full.p3;
            f1[m] = 2.0 * (full.p2 - 2.0 * full.p3);
            f3[m] = 4.0 * full.p3 - full.p2;
            break;
        }
    }

    HalfSpectrum v = model.forward(u0.values());
    Trajectory traj{u0.grid(), spec, {}, {}};
    auto record = [&](double t) {
        rep.times.push_back(t);
        rep.mass.push_back(model.mass(v));
        rep.l2.push_back(std::sqrt(model.l2_squared(v)));
        if (cfg.keep_spectra) {
            traj.times.push_back(t);
            traj.spectra.push_back(v);
        }
    };
    record(0.0);

    HalfSpectrum a(H), b(H), c(H);
    for (std::size_t s = 0; s < n_steps; ++s) {
        const HalfSpectrum Nv = model.nonlinear_term(v);
        switch (cfg.scheme) {
        case EtdScheme::EXP_EULER:
            for (std::size_t m = 0; m < H; ++m) v[m] = E[m] * v[m] + h * f0[m] * Nv[m];
            break;
        case EtdScheme::ETD_RK2: {
            for (std::size_t m = 0; m < H; ++m) a[m] = E[m] * v[m] + h * f0[m] * Nv[m];
            const HalfSpectrum Na = model.nonlinear_term(a);
            for (std::size_t m = 0; m < H; ++m) v[m] = a[m] + h * f1[m] * (Na[m] - Nv[m]);
            break;
        }
        case EtdScheme::ETD_RK4: {
            for (std::size_t m = 0; m < H; ++m) a[m] = E2[m] * v[m] + 0.5 * h * p1h[m] * Nv[m];
            const HalfSpectrum Na = model.nonlinear_term(a);
            for (std::size_t m = 0; m < H; ++m) b[m] = E2[m] * v[m] + 0.5 * h * p1h[m] * Na[m];
            const HalfSpectrum Nb = model.nonlinear_term(b);
            for (std::size_t m = 0; m < H; ++m) c[m] = E2[m] * a[m] + 0.5 * h * p1h[m] * (2.0 * Nb[m] - Nv[m]);
            const HalfSpectrum Nc = model.nonlinear_term(c);
            for (std::size_t m = 0; m < H; ++m)
                v[m] = E[m] * v[m] + h * (f0[m] * Nv[m] + f1[m] * (Na[m] + Nb[m]) + f3[m] * Nc[m]);
            break;
        }
        }
        detail::require_finite_solution(model.sup(v), cfg.blowup_threshold);
        record(T * static_cast<double>(s + 1) / static_cast<double>(n_steps));
    }
    rep.final_field = Field(u0.grid(), T, model.physical(v));
    rep.steps = n_steps;
    if (cfg.keep_spectra) rep.trajectory = std::move(traj);
    return rep;
}

namespace detail {

// Finite-difference weights for the first derivative at z from arbitrary nodes (Fornberg).
inline std::vector<double> derivative_weights(double z, std::span<const double> nodes) {
    const std::size_t n = nodes.size();
    std::vector<std::vector<double>> c(n, std::vector<double>(2, 0.0));
    double c1 = 1.0, c4 = nodes[0] - z;
    c[0][0] = 1.0;
    for (std::size_t i = 1; i < n; ++i) {
        const std::size_t mn = std::min<std::size_t>(i, 1);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = nodes[i] - z;
        for (std::size_t j = 0; j < i; ++j) {
            const double c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if (j == i - 1) {
                for (std::size_t k = mn; k >= 1; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for (std::size_t k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = c[i][1];
    return w;
}

}  // namespace detail

// Balance d/dt (1/2)||u||^2 = Q(u), Q the linear quadratic form (the dealiased nonlinearity does
// not exchange energy). The derivative is a centered five-point difference, so only samples with
// two neighbours on each side are checked. The defect is normalized by the gross exchange rate
// eta sum ||xi| - |xi|^3| |u_hat|^2, which stays positive where Q changes sign.
inline double l2_balance_check(const Trajectory& traj) {
    const std::size_t n = traj.spectra.size();
    if (n < 5) throw DomainError("l2_balance_check: need at least 5 snapshots");
    const detail::SpectralModel model(traj.grid, traj.spec, true, false);
    const std::size_t N = traj.grid.size();
    std::vector<double> E(n), Q(n), G(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& v = traj.spectra[i];
        E[i] = 0.5 * model.l2_squared(v);
        Q[i] = model.quadratic_form(v);
        double g = 0.0;
        for (std::size_t m = 0; m < v.size(); ++m) g += half_weight(m, N) * std::abs(model.linear(m).real()) * std::norm(v[m]);
        G[i] = g * traj.grid.dx() / static_cast<double>(N);
    }
    double worst = 0.0;
    for (std::size_t i = 2; i + 2 < n; ++i) {
        if (G[i] == 0.0) continue;
        const auto w = detail::derivative_weights(traj.times[i], std::span<const double>(traj.times).subspan(i - 2, 5));
        double d = 0.0;
        for (std::size_t k = 0; k < 5; ++k) d += w[k] * E[i - 2 + k];
        worst = std::max(worst, std::abs(d - Q[i]) / G[i]);
    }
    return worst;
}

}  // namespace ostlab
