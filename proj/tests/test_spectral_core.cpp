#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "ostlab/datum.hpp"
#include "ostlab/spectral_core.hpp"

using namespace ostlab;

namespace {

const SymbolSpec kOst(Family::OST, 1.0, Convention::PAPER_2PI);
const SymbolSpec kNpbo(Family::NPBO, 1.0, Convention::PAPER_2PI);

Field sampled(const Grid& g, auto f) {
    std::vector<double> v(g.size());
    for (std::size_t j = 0; j < g.size(); ++j) v[j] = f(g.x(j));
    return Field(g, 0.0, std::move(v));
}

}  // namespace

TEST(Symbol, ValueAtOriginIsOne) {
    const cplx s = symbol(kOst, 1.0, 0.0);
    EXPECT_DOUBLE_EQ(s.real(), 1.0);
    EXPECT_DOUBLE_EQ(s.imag(), 0.0);
}

TEST(Symbol, UnitFrequencyIsPurePhase) {
    const cplx s = symbol(kOst, 1.0, 1.0);
    EXPECT_NEAR(std::abs(s), 1.0, 1e-15);
    EXPECT_NEAR(std::arg(s), 1.0, 1e-15);
}

TEST(Symbol, ModulusAtTwo) { EXPECT_NEAR(std::abs(symbol(kOst, 1.0, 2.0)), std::exp(-6.0), 1e-16); }

TEST(Symbol, ZeroTimeIsIdentity) { EXPECT_EQ(symbol(kOst, 0.0, 3.7), cplx(1.0, 0.0)); }

TEST(Symbol, ModulusAgreesAcrossFamilies) {
    for (double xi : {-2.5, -0.3, 0.4, 1.7})
        EXPECT_NEAR(std::abs(symbol(kOst, 0.7, xi)), std::abs(symbol(kNpbo, 0.7, xi)), 1e-15);
}

TEST(Symbol, HermitianSymmetry) {
    for (const auto& spec : {kOst, kNpbo})
        for (double xi : {0.1, 0.9, 2.3, 5.0}) EXPECT_EQ(symbol(spec, 0.8, -xi), std::conj(symbol(spec, 0.8, xi)));
}

TEST(Symbol, ModulusMaximumAtInverseRootThree) {
    const double t = 0.9;
    const double expected = std::exp(t * 2.0 / (3.0 * std::sqrt(3.0)));
    EXPECT_NEAR(symbol_modulus_max(kOst, t), expected, 1e-15);
    EXPECT_NEAR(std::abs(symbol(kOst, t, 1.0 / std::sqrt(3.0))), expected, 1e-14);
    double scan = 0.0;
    for (double xi = 0.0; xi < 3.0; xi += 1e-4) scan = std::max(scan, std::abs(symbol(kOst, t, xi)));
    EXPECT_LE(scan, expected * (1.0 + 1e-15));
    EXPECT_NEAR(scan, expected, 1e-7);
}

TEST(SymbolDerivative, FirstOrderClosedForm) {
    const cplx expected = symbol(kOst, 1.0, 1.0) * cplx(-2.0, 3.0);
    EXPECT_NEAR(std::abs(symbol_derivative(kOst, 1.0, 1.0, 1) - expected), 0.0, 1e-14);
}

TEST(SymbolDerivative, SecondOrderClosedForm) {
    const cplx a(-2.0, 3.0);
    const cplx expected = symbol(kOst, 1.0, 1.0) * (a * a + 6.0 * cplx(-1.0, 1.0));
    EXPECT_NEAR(std::abs(symbol_derivative(kOst, 1.0, 1.0, 2) - expected), 0.0, 1e-13);
}

TEST(SymbolDerivative, MatchesCentralDifferences) {
    const double h = 1e-6;
    for (const auto& spec : {kOst, kNpbo})
        for (double xi : {0.5, -0.5, 1.3}) {
            for (int order = 1; order <= 3; ++order) {
                const auto f = [&](double x) {
                    return order == 1 ? symbol(spec, 1.0, x) : symbol_derivative(spec, 1.0, x, order - 1);
                };
                const cplx fd = (f(xi + h) - f(xi - h)) / (2.0 * h);
                const cplx d = symbol_derivative(spec, 1.0, xi, order);
                EXPECT_LE(std::abs(fd - d), 1e-6 * std::max(1.0, std::abs(d))) << "order " << order << " xi " << xi;
            }
        }
}

TEST(SymbolDerivative, RejectsOrigin) { EXPECT_THROW(symbol_derivative(kOst, 1.0, 0.0, 1), DomainError); }

TEST(Grid, RejectsNonPowerOfTwo) {
    EXPECT_THROW(Grid(10.0, 1000), DomainError);
    EXPECT_THROW(Grid(-1.0, 1024), DomainError);
}

TEST(Grid, PointsAreSymmetric) {
    const Grid g(10.0, 64);
    EXPECT_EQ(g.x(32), 0.0);
    for (std::size_t k = 1; k < 32; ++k) EXPECT_EQ(g.x(32 + k), -g.x(32 - k));
    EXPECT_DOUBLE_EQ(g.x(0), -10.0);
}

TEST(Dft, ConstantConcentratesAtZero) {
    const Grid g(8.0, 64);
    const auto s = dft_forward(sampled(g, [](double) { return 1.0; }));
    EXPECT_NEAR(std::abs(s.bins[0]), 16.0, 1e-12);
    for (std::size_t k = 1; k < g.size(); ++k) EXPECT_LT(std::abs(s.bins[k]), 1e-12);
}

TEST(Dft, CosineHasTwoSymmetricBins) {
    const Grid g(std::numbers::pi, 64);
    const auto s = dft_forward(sampled(g, [](double x) { return std::cos(3.0 * x); }));
    for (std::size_t k = 0; k < g.size(); ++k) {
        const long m = g.mode(k);
        if (m == 3 || m == -3)
            EXPECT_GT(std::abs(s.bins[k]), 1.0);
        else
            EXPECT_LT(std::abs(s.bins[k]), 1e-12);
    }
}

TEST(Dft, RandomRoundTrip) {
    const Grid g(20.0, 1024);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> v(g.size());
    for (double& x : v) x = u(rng);
    const Field f(g, 0.0, v);
    const Field back = dft_inverse(dft_forward(f), g);
    double err = 0.0, mag = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) {
        err = std::max(err, std::abs(back[j] - f[j]));
        mag = std::max(mag, std::abs(f[j]));
    }
    EXPECT_LT(err / mag, 1e-12);
    EXPECT_LT(max_imaginary(dft_inverse_complex(dft_forward(f), g)), 1e-12);
}

TEST(Dft, SizeMismatchIsRejected) {
    const Grid g(20.0, 64);
    const auto s = dft_forward(sampled(g, [](double x) { return std::exp(-x * x); }));
    EXPECT_THROW(dft_inverse(s, Grid(20.0, 128)), ResolutionError);
}

TEST(SpectralDx, SineDerivative) {
    const Grid g(std::numbers::pi, 128);
    const auto d = spectral_dx(sampled(g, [](double x) { return std::sin(5.0 * x); }), true);
    for (std::size_t j = 0; j < g.size(); ++j) EXPECT_NEAR(d[j], 5.0 * std::cos(5.0 * g.x(j)), 1e-10);
}

TEST(SpectralDx, ConstantHasZeroDerivative) {
    const Grid g(3.0, 64);
    const auto d = spectral_dx(sampled(g, [](double) { return 2.5; }), false);
    EXPECT_LT(d.sup_norm(), 1e-13);
}

TEST(SpectralDx, GaussianDerivative) {
    const Grid g(20.0, 512);
    const auto d = spectral_dx(sampled(g, [](double x) { return std::exp(-x * x); }), false);
    for (std::size_t j = 0; j < g.size(); ++j) {
        const double x = g.x(j);
        EXPECT_NEAR(d[j], -2.0 * x * std::exp(-x * x), 1e-8);
    }
}

TEST(SpectralDx, DealiasingRemovesTopThird) {
    const Grid g(std::numbers::pi, 64);
    const auto d = spectral_dx(sampled(g, [](double x) { return std::sin(25.0 * x); }), true);
    EXPECT_LT(d.sup_norm(), 1e-12);
}

TEST(Datum, LorentzPowerHasPositiveMass) {
    const auto d = datum_build({DatumFamily::LORENTZ_POWER, 1.0, 3.0}, Grid(200.0, 4096));
    EXPECT_GT(d.mass, 0.0);
    EXPECT_EQ(d.decay_rate, 3.0);
    EXPECT_FALSE(d.zero_mean_family);
}

TEST(Datum, OddPowerHasZeroMass) {
    const auto d = datum_build({DatumFamily::ODD_POWER, 1.0, 3.0}, Grid(200.0, 4096));
    EXPECT_LT(std::abs(d.mass), 1e-14);
}

TEST(Datum, GaussianDerivativeIsSuperAlgebraic) {
    const auto d = datum_build({DatumFamily::GAUSSIAN_DERIVATIVE, 1.0, 2.0}, Grid(200.0, 4096));
    EXPECT_LT(std::abs(d.mass), 1e-14);
    EXPECT_TRUE(std::isinf(d.decay_rate));
    EXPECT_EQ(d.tail_class, "super-algebraic");
}

TEST(Datum, RejectsNonIntegrableTail) {
    EXPECT_THROW(datum_build({DatumFamily::LORENTZ_POWER, 1.0, 1.0}, Grid(10.0, 64)), DomainError);
}
