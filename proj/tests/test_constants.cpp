#include <cmath>
#include <numbers>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <gtest/gtest.h>

#include "ostlab/constants.hpp"

using namespace ostlab;

namespace {

using big = boost::multiprecision::cpp_bin_float_50;

const ThetaSeries kTheta(2.0 / 3.0, 2.0 / 3.0);

// Independent product of gamma ratios in 50-digit arithmetic.
big coefficient_oracle(int k) {
    big c = 1;
    const big s = big(1) / 3, bg = big(4) / 3;
    for (int j = 0; j < k; ++j) c *= boost::multiprecision::tgamma(j * s + 1) / boost::multiprecision::tgamma(j * s + bg);
    return c;
}

}  // namespace

TEST(CEta, FormulaValues) {
    EXPECT_DOUBLE_EQ(c_eta(1.0), 10.0);
    EXPECT_NEAR(c_eta(0.125), 202.0, 1e-12);
    EXPECT_NEAR(c_eta(1e9) * std::cbrt(1e9), 5.0, 1e-6);
    EXPECT_DOUBLE_EQ(c_eta(1.0, 2.0), 20.0);
}

TEST(Theta, ZeroArgument) { EXPECT_EQ(theta_eval(kTheta, 0.0), 1.0); }

TEST(Theta, FirstCoefficients) {
    EXPECT_NEAR(kTheta.coefficient(1), 1.0 / std::tgamma(4.0 / 3.0), 1e-14);
    EXPECT_NEAR(kTheta.coefficient(1), 1.11985, 1e-5);
    EXPECT_NEAR(kTheta.coefficient(2), 1.10773, 1e-5);
}

TEST(Theta, CoefficientsMatchHighPrecisionOracle) {
    for (int k = 0; k <= 60; ++k) {
        const double rel = static_cast<double>(abs(big(kTheta.coefficient(k)) / coefficient_oracle(k) - 1));
        EXPECT_LT(rel, 1e-12) << "k=" << k;
    }
}

TEST(Theta, MonotoneAndAboveTwoAtOne) {
    double prev = 0.0;
    for (double t : {0.0, 0.1, 0.5, 1.0, 2.0, 10.0}) {
        const double v = theta_eval(kTheta, t);
        EXPECT_GT(v, prev);
        prev = v;
    }
    EXPECT_GT(theta_eval(kTheta, 1.0), 2.0);
}

TEST(Theta, PartialSumOracle) {
    long double s = 0.0L;
    for (int k = 0; k < 400; ++k) s += static_cast<long double>(coefficient_oracle(k)) * std::pow(0.7L, k / 3.0L);
    EXPECT_NEAR(theta_eval(kTheta, 0.7), static_cast<double>(s), 1e-13 * static_cast<double>(s));
}

TEST(Theta, LogValueSurvivesOverflow) {
    const auto v = theta_eval_detail(kTheta, 1e6, 1e-12);
    EXPECT_TRUE(std::isfinite(v.log_value));
    EXPECT_GT(v.log_value, 709.0);
}

TEST(Theta, RejectsNegativeArgument) { EXPECT_THROW(theta_eval(kTheta, -1.0), DomainError); }

TEST(GronwallClosure, TrivialCases) {
    EXPECT_EQ(gronwall_closure(0.0, 5.0, kTheta, 3.0), 0.0);
    EXPECT_EQ(gronwall_closure(2.5, 0.0, kTheta, 3.0), 2.5);
    EXPECT_DOUBLE_EQ(gronwall_closure(1.0, 1.0, kTheta, 1.0), theta_eval(kTheta, 1.0));
}

TEST(BetaIntegral, ThirdThird) {
    EXPECT_NEAR(beta_integral(1.0, -2.0 / 3.0, -2.0 / 3.0), 5.2999, 1e-3);
    const double g13 = std::tgamma(1.0 / 3.0);
    EXPECT_NEAR(beta_integral(1.0, -2.0 / 3.0, -2.0 / 3.0), g13 * g13 / std::tgamma(2.0 / 3.0), 1e-12);
}

TEST(BetaIntegral, UnitAndScaling) {
    EXPECT_NEAR(beta_integral(1.0, 0.0, 0.0), 1.0, 1e-15);
    const double p = -1.0 / 3.0, q = 0.5;
    EXPECT_NEAR(beta_integral(2.0, p, q) / beta_integral(1.0, p, q), std::pow(2.0, p + q + 1.0), 1e-13);
}

TEST(BetaIntegral, RejectsPole) { EXPECT_THROW(beta_integral(1.0, -1.0, 0.0), DomainError); }

TEST(LorentzConv, MatchesQuadrature) {
    boost::math::quadrature::tanh_sinh<double> ts;
    for (double x : {0.0, 1.0, 3.5}) {
        const auto f = [x](double y) { return 1.0 / ((1.0 + (x - y) * (x - y)) * (1.0 + y * y)); };
        const double inf = std::numeric_limits<double>::infinity();
        EXPECT_NEAR(lorentz_conv(x), ts.integrate(f, -inf, inf), 1e-10) << "x=" << x;
    }
    EXPECT_NEAR(lorentz_conv(0.0), std::numbers::pi / 2.0, 1e-15);
}

TEST(LorentzConv, AsymptoticsAndBound) {
    EXPECT_NEAR(1e8 * lorentz_conv(1e4), 2.0 * std::numbers::pi, 1e-6);
    for (double x = 0.0; x < 100.0; x += 0.25) EXPECT_LE(lorentz_conv(x) * (1.0 + x * x), 2.0 * std::numbers::pi);
}

TEST(Envelope, SmallTimeScaling) {
    const EnvelopeInputs in{1.0, 0.5, 0.05, 0.1};
    EXPECT_NEAR(envelope_constant(in, 1e-3) / envelope_constant(in, 8e-3), 2.0, 1e-12);
}

TEST(Envelope, LinearInWeightedDatumNorm) {
    EnvelopeInputs a{1.0, 0.5, 0.05, 0.1};
    EnvelopeInputs b = a;
    b.weighted_u0_norm *= 2.0;
    EXPECT_NEAR(build_ledger(b).frak_C0 / build_ledger(a).frak_C0, 2.0, 1e-14);
    EXPECT_NEAR(envelope_constant(b, 0.3) / envelope_constant(a, 0.3), 2.0, 1e-12);
}

TEST(Envelope, CalibrationMakesEnvelopeDominate) {
    const EnvelopeInputs in{1.0, 0.5, 0.05, 0.1};
    const std::vector<std::pair<double, double>> measured{{0.1, 10.0 * envelope_constant(in, 0.1)},
                                                          {0.5, 3.0 * envelope_constant(in, 0.5)}};
    const double c = calibrate_free_constant(in, measured);
    EXPECT_GT(c, in.free_constant);
    EnvelopeInputs cal = in;
    cal.free_constant = c;
    for (const auto& [t, m] : measured) EXPECT_GE(envelope_constant(cal, t) * (1.0 + 1e-12), m);
}

TEST(Envelope, RejectsNonPositiveInputs) {
    EXPECT_THROW(build_ledger({1.0, 0.5, 0.0, 0.1}), DomainError);
    EXPECT_THROW(envelope_constant({1.0, 0.5, 0.05, 0.1}, 0.0), DomainError);
}
