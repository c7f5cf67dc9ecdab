#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <utility>
#include <vector>

#include "ostlab/errors.hpp"

namespace ostlab {

// c_eta = C / eta^{1/3} (1 + (1/eta + 2)^2).
inline double c_eta(double eta, double C = 1.0) {
    if (!(eta > 0.0)) throw DomainError("c_eta: eta must be positive");
    const double b = 1.0 / eta + 2.0;
    return C / std::cbrt(eta) * (1.0 + b * b);
}

inline double C1_eta(double eta, double c = 1.0, double C = 1.0) { return c_eta(eta, C) + c; }
inline double C2_eta(double eta, double c = 1.0, double C = 1.0) { return c_eta(eta, C) + c / std::sqrt(eta); }

// Theta(t) = sum_k c_k t^{sigma k}, c_0 = 1, c_{k+1} / c_k = Gamma(k sigma + 1) / Gamma(k sigma + beta + gamma).
class ThetaSeries {
public:
    ThetaSeries(double beta, double gamma) : beta_(beta), gamma_(gamma) {
        if (!(beta > 0.0) || !(gamma > 0.0) || !(beta + gamma > 1.0))
            throw DomainError("theta series requires beta, gamma > 0 and beta + gamma > 1");
        log_c_.push_back(0.0);
    }

    double beta() const noexcept { return beta_; }
    double gamma() const noexcept { return gamma_; }
    double sigma() const noexcept { return beta_ + gamma_ - 1.0; }

    double log_ratio(std::size_t k) const {
        const double ks = static_cast<double>(k) * sigma();
        return std::lgamma(ks + 1.0) - std::lgamma(ks + beta_ + gamma_);
    }
    double ratio(std::size_t k) const { return std::exp(log_ratio(k)); }

    double log_coefficient(std::size_t k) const {
        while (log_c_.size() <= k) log_c_.push_back(log_c_.back() + log_ratio(log_c_.size() - 1));
        return log_c_[k];
    }
    double coefficient(std::size_t k) const { return std::exp(log_coefficient(k)); }

private:
    double beta_, gamma_;
    mutable std::vector<double> log_c_;
};

struct ThetaValue {
    double log_value;  // authoritative; value may overflow
    double value;
    std::size_t terms;
    double tail_bound;  // relative
};

// Sums in log space until the geometric bound on the remaining tail drops below target_rel_err.
inline ThetaValue theta_eval_detail(const ThetaSeries& series, double t, double target_rel_err = 1e-15,
                                    std::size_t max_terms = 200'000'000) {
    if (!(t >= 0.0)) throw DomainError("theta_eval: t must be nonnegative");
    if (t == 0.0) return {0.0, 1.0, 1, 0.0};
    const double log_s = series.sigma() * std::log(t);
    double log_c = 0.0;
    double log_sum = 0.0;  // log of the running sum, starting from the k = 0 term
    double log_r = series.log_ratio(0);
    for (std::size_t k = 0; k < max_terms; ++k) {
        const double lr = log_r + log_s;  // log(term_{k+1} / term_k)
        log_c += log_r;
        const double log_next = log_c + static_cast<double>(k + 1) * log_s;
        if (!std::isfinite(log_next)) throw ConvergenceError("theta_eval: coefficients lost precision");
        log_sum = std::max(log_sum, log_next) + std::log1p(std::exp(-std::abs(log_sum - log_next)));
        log_r = series.log_ratio(k + 1);
        // Ratios decrease in k, so once below 1 the tail is dominated by a geometric series.
        const double next_lr = log_r + log_s;
        if (lr < 0.0 && next_lr < 0.0 && next_lr <= lr) {
            const double rho = std::exp(next_lr);
            const double log_tail = log_next + next_lr - std::log1p(-rho);
            const double rel = std::exp(log_tail - log_sum);
            if (rel < target_rel_err) {
                const double value = log_sum < 700.0 ? std::exp(log_sum) : std::numeric_limits<double>::infinity();
                return {log_sum, value, k + 2, rel};
            }
        }
    }
    throw ConvergenceError("theta_eval: term budget exhausted");
}

inline double theta_eval(const ThetaSeries& series, double t, double target_rel_err = 1e-15) {
    return theta_eval_detail(series, t, target_rel_err).value;
}

// a Theta(b^{1/sigma} t).
inline double gronwall_closure(double a, double b, const ThetaSeries& series, double t) {
    if (!(a >= 0.0) || !(b >= 0.0)) throw DomainError("gronwall_closure: a, b must be nonnegative");
    if (a == 0.0) return 0.0;
    return a * theta_eval(series, std::pow(b, 1.0 / series.sigma()) * t);
}

// int_0^t (t - s)^p s^q ds = t^{p+q+1} B(p+1, q+1).
inline double beta_integral(double t, double p, double q) {
    if (!(p > -1.0) || !(q > -1.0)) throw DomainError("beta_integral: pole at p <= -1 or q <= -1");
    if (!(t > 0.0)) throw DomainError("beta_integral: t must be positive");
    const double log_b = std::lgamma(p + 1.0) + std::lgamma(q + 1.0) - std::lgamma(p + q + 2.0);
    return std::exp((p + q + 1.0) * std::log(t) + log_b);
}

// int dy / ((1 + (x - y)^2)(1 + y^2)) = 2 pi / (4 + x^2).
inline double lorentz_conv(double x) { return 2.0 * std::numbers::pi / (4.0 + x * x); }

struct EnvelopeInputs {
    double eta;
    double T;
    double weighted_u0_norm;  // sup (1 + x^2) |u0|
    double h2_proxy;          // sup over snapshots of the discrete H^2 norm
    double free_constant = 1.0;
    double C = 1.0;  // constant inside c_eta
};

struct ConstantLedger {
    double eta, T, free_constant;
    double c_eta, C1_eta, C2_eta;
    double frak_C0, frak_C1, frak_C2;
    double theta_argument;  // frak_C2^3 T
    double log_theta;
    double log_envelope_prefactor;  // log(frak_C0 Theta(frak_C2^3 T))

    double log_envelope(double t) const { return log_envelope_prefactor - std::log(t) / 3.0; }
    // May be +inf when the prefactor exceeds double range; log_envelope is exact.
    double envelope(double t) const {
        const double l = log_envelope(t);
        return l < 709.0 ? std::exp(l) : std::numeric_limits<double>::infinity();
    }
};

inline ConstantLedger build_ledger(const EnvelopeInputs& in) {
    if (!(in.eta > 0.0) || !(in.T > 0.0) || !(in.weighted_u0_norm > 0.0) || !(in.h2_proxy > 0.0) ||
        !(in.free_constant > 0.0))
        throw DomainError("constant ledger inputs must be positive");
    ConstantLedger L{};
    L.eta = in.eta;
    L.T = in.T;
    L.free_constant = in.free_constant;
    L.c_eta = c_eta(in.eta, in.C);
    L.C1_eta = C1_eta(in.eta, in.free_constant, in.C);
    L.C2_eta = C2_eta(in.eta, in.free_constant, in.C);
    const double growth = std::exp(5.0 * in.eta * in.T);
    L.frak_C0 = L.C1_eta * growth * in.weighted_u0_norm;
    L.frak_C1 = in.h2_proxy;
    L.frak_C2 = L.c_eta * std::cbrt(in.T) * growth * in.h2_proxy;
    L.theta_argument = L.frak_C2 * L.frak_C2 * L.frak_C2 * in.T;
    const ThetaSeries theta(2.0 / 3.0, 2.0 / 3.0);
    L.log_theta = theta_eval_detail(theta, L.theta_argument, 1e-12).log_value;
    L.log_envelope_prefactor = std::log(L.frak_C0) + L.log_theta;
    return L;
}

inline double envelope_constant(const EnvelopeInputs& in, double t) {
    if (!(t > 0.0)) throw DomainError("envelope_constant: t must be positive");
    return build_ledger(in).envelope(t);
}

// Smallest free constant for which the envelope dominates every measured (t, sup (1+x^2)|u|) pair.
// Returns 0 when the constant part c_eta alone already suffices.
inline double calibrate_free_constant(const EnvelopeInputs& in, const std::vector<std::pair<double, double>>& measured) {
    EnvelopeInputs probe = in;
    probe.free_constant = 1.0;
    const ConstantLedger L = build_ledger(probe);
    // envelope = (c_eta + c) e^{5 eta T} w Theta / t^{1/3}; solve for c in log space.
    const double log_rest = L.log_envelope_prefactor - std::log(L.C1_eta);
    double need = 0.0;
    for (const auto& [t, m] : measured) {
        const double log_c1 = std::log(m) + std::log(t) / 3.0 - log_rest;
        const double c = log_c1 < 700.0 ? std::exp(log_c1) - L.c_eta : std::numeric_limits<double>::infinity();
        need = std::max(need, c);
    }
    return need;
}

}  // namespace ostlab
