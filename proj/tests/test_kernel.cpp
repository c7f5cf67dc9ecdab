#include <cmath>
#include <numbers>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <gtest/gtest.h>

#include "ostlab/decay_analysis.hpp"
#include "ostlab/kernel.hpp"

using namespace ostlab;

namespace {

const SymbolSpec kSpec(Family::OST, 1.0, Convention::PAPER_2PI);
const double kA = -1.0 / (2.0 * std::numbers::pi * std::numbers::pi);

// Wide grid so that periodic images sit far away.
const Grid kWide(2048.0, 32768);

double grid_value(const KernelSamples& s, const Grid& g, double x) {
    const std::size_t j = g.index_of(x);
    EXPECT_NEAR(g.x(j), x, 1e-12);
    return s.field[j];
}

}  // namespace

TEST(KernelGrid, IntegratesToOne) {
    for (double t : {0.1, 1.0}) {
        const Grid g(64.0, 8192);
        const auto s = kernel_grid(kSpec, t, g);
        EXPECT_NEAR(s.field.mass(), 1.0, 1e-8);
        EXPECT_LT(s.imaginary_residue, 1e-12);
    }
}

TEST(KernelGrid, AngularConventionIntegratesToOne) {
    const auto s = kernel_grid(kSpec.with_convention(Convention::ANGULAR), 1.0, Grid(200.0, 4096));
    EXPECT_NEAR(s.field.mass(), 1.0, 1e-8);
}

TEST(KernelGrid, RejectsUnderResolvedGrid) {
    EXPECT_THROW(kernel_grid(kSpec, 0.01, Grid(1000.0, 64)), ResolutionError);
}

TEST(KernelGrid, WeightedSupIsFinite) {
    const Grid g(64.0, 8192);
    for (double eta : {0.5, 1.0, 2.0})
        for (double t : {0.1, 0.5, 1.0}) {
            const auto s = kernel_grid(kSpec.with_eta(eta), t, g);
            double m = 0.0;
            for (std::size_t j = 0; j < g.size(); ++j) m = std::max(m, (1.0 + g.x(j) * g.x(j)) * std::abs(s.field[j]));
            EXPECT_TRUE(std::isfinite(m));
        }
}

// The supremum sits at the core; its t^{-1/3} rate is clean once eta t is small.
TEST(KernelGrid, WeightedSupRateAtSmallTimes) {
    const Grid g(64.0, 65536);
    for (double eta : {0.5, 1.0, 2.0}) {
        std::vector<double> ts, sups;
        for (double t : {1e-4, 3e-4, 1e-3, 3e-3, 1e-2}) {
            const auto s = kernel_grid(kSpec.with_eta(eta), t, g);
            double m = 0.0;
            for (std::size_t j = 0; j < g.size(); ++j)
                if (std::abs(g.x(j)) <= 16.0) m = std::max(m, (1.0 + g.x(j) * g.x(j)) * std::abs(s.field[j]));
            ts.push_back(t);
            sups.push_back(m);
        }
        EXPECT_NEAR(fit_power_law(ts, sups).exponent, 1.0 / 3.0, 0.02) << "eta=" << eta;
    }
}

TEST(KernelGrid, MatchesOscillatoryQuadrature) {
    const auto s = kernel_grid(kSpec, 1.0, kWide);
    for (double x : {5.0, 10.0, 20.0}) {
        const double g = grid_value(s, kWide, x) - std::copysign(image_alias_estimate(kSpec, 1.0, kWide, x), kA);
        const auto q = kernel_point_eval(kSpec, 1.0, x, 1e-12, KernelMethod::OSCILLATORY_QUAD);
        EXPECT_NEAR(g, q.value, 1e-6) << "x=" << x;
    }
}

TEST(KernelPoint, MatchesGridAtEight) {
    const auto s = kernel_grid(kSpec, 1.0, kWide);
    const double g = grid_value(s, kWide, 8.0) - std::copysign(image_alias_estimate(kSpec, 1.0, kWide, 8.0), kA);
    EXPECT_NEAR(kernel_point(kSpec, 1.0, 8.0, 1e-13), g, 1e-8);
}

TEST(KernelPoint, ReducedFormMatchesDirectQuadrature) {
    for (double x : {3.0, -7.0, 40.0}) {
        const double a = kernel_point(kSpec, 0.5, x, 1e-12);
        const double b = kernel_point_eval(kSpec, 0.5, x, 1e-12, KernelMethod::OSCILLATORY_QUAD).value;
        EXPECT_NEAR(a, b, 1e-9) << "x=" << x;
    }
}

TEST(KernelPoint, RejectsOrigin) { EXPECT_THROW(kernel_point(kSpec, 1.0, 0.0, 1e-10), DomainError); }

TEST(TailCoefficient, MatchesBoundaryTerm) {
    const auto tc = tail_coefficient(kSpec, 1.0);
    EXPECT_NEAR(tc.A / kA, 1.0, 0.02);
    EXPECT_DOUBLE_EQ(tail_coefficient_boundary(kSpec, 1.0), kA);
}

TEST(TailCoefficient, LinearInTime) {
    const double a1 = tail_coefficient(kSpec, 0.5).A;
    const double a2 = tail_coefficient(kSpec, 1.0).A;
    EXPECT_NEAR(a2 / a1, 2.0, 0.02);
}

TEST(TailCoefficient, NonzeroOnLattice) {
    for (double eta : {0.5, 1.0, 2.0})
        for (double t : {0.1, 0.5, 1.0}) EXPECT_NE(tail_coefficient(kSpec.with_eta(eta), t).A, 0.0);
}

TEST(KernelTail, FittedExponentIsTwo) {
    std::vector<double> xs, ks, dks;
    for (int i = 0; i < 32; ++i) {
        const double x = 20.0 * std::pow(10.0, i / 31.0);
        xs.push_back(x);
        ks.push_back(kernel_point(kSpec, 1.0, x, 1e-10 * std::abs(kA) / (x * x)));
        dks.push_back(kernel_dx_point(kSpec, 1.0, x, 1e-10 * std::abs(kA) / (x * x * x)));
    }
    EXPECT_NEAR(fit_power_law(xs, ks).exponent, 2.0, 0.1);
    EXPECT_NEAR(fit_power_law(xs, dks).exponent, 3.0, 0.15);
}

TEST(KernelDx, IntegratesToZero) {
    const Grid g(64.0, 8192);
    EXPECT_NEAR(kernel_dx_grid(kSpec, 1.0, g).field.mass(), 0.0, 1e-8);
}

TEST(KernelDx, MatchesFiniteDifferenceOfKernel) {
    const Grid g(64.0, 8192);
    const auto k = kernel_grid(kSpec, 1.0, g).field;
    const auto d = kernel_dx_grid(kSpec, 1.0, g).field;
    const double h = g.dx();
    double worst = 0.0;
    for (std::size_t j = 3; j + 3 < g.size(); ++j) {
        const double fd = (-k[j - 3] + 9.0 * k[j - 2] - 45.0 * k[j - 1] + 45.0 * k[j + 1] - 9.0 * k[j + 2] + k[j + 3]) /
                          (60.0 * h);
        worst = std::max(worst, std::abs(fd - d[j]));
    }
    EXPECT_LT(worst, 1e-6);
}

TEST(KernelDx, PointMatchesGrid) {
    const auto s = kernel_dx_grid(kSpec, 1.0, kWide);
    for (double x : {6.0, 12.0}) EXPECT_NEAR(kernel_dx_point(kSpec, 1.0, x, 1e-13), grid_value(s, kWide, x), 1e-8);
}

// |xi|^m decreases in m on |xi| < 1, so the value is log-convex in m rather than monotone.
TEST(WeightedSymbolL1, LogConvexInM) {
    std::vector<double> v;
    for (double m : {0.0, 1.0, 2.0, 3.0, 4.0, 5.0}) v.push_back(std::log(weighted_symbol_l1(kSpec, 1.0, m)));
    for (std::size_t i = 1; i + 1 < v.size(); ++i) EXPECT_LE(v[i], 0.5 * (v[i - 1] + v[i + 1]) + 1e-12);
}

TEST(WeightedSymbolL1, MatchesIndependentQuadrature) {
    boost::math::quadrature::exp_sinh<double> es;
    const double q = 4.0 * es.integrate([](double xi) { return std::exp(xi - xi * xi * xi); }, 0.0,
                                        std::numeric_limits<double>::infinity());
    EXPECT_NEAR(weighted_symbol_l1(kSpec, 1.0, 0.0), q, 1e-10 * q);
}

TEST(WeightedSymbolL1, Reproducible) {
    EXPECT_EQ(weighted_symbol_l1(kSpec, 1.0, 0.0), weighted_symbol_l1(kSpec, 1.0, 0.0));
}

TEST(WeightedSymbolL1, SmallTimeBlowUpRate) {
    double lo = 1e300, hi = 0.0;
    for (double t : {0.01, 0.03, 0.1, 0.3, 1.0}) {
        const double v = weighted_symbol_l1(kSpec, t, 0.0) * std::cbrt(t);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    EXPECT_LT(hi / lo, 2.0);
}

TEST(WeightedSymbolL1, RejectsSmallM) { EXPECT_THROW(weighted_symbol_l1(kSpec, 1.0, -1.0), DomainError); }
