#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "onsager/fit.hpp"
#include "onsager/flux.hpp"
#include "onsager/synth.hpp"

using namespace onsager;
constexpr double kPi = std::numbers::pi;

namespace {

std::vector<double> phases(std::uint64_t seed, int levels) {
    std::mt19937_64 rng(seed);
    std::vector<double> ph;
    for (int j = 0; j <= levels; ++j) ph.push_back(2.0 * kPi * static_cast<double>(rng() >> 11) * 0x1.0p-53);
    return ph;
}

/// L2 norm of the x1-increment of the lacunary series, summed mode by mode:
/// |delta (a cos(k x + phi))|_2^2 = 2 a^2 sin^2(k s / 2) |Omega|.
double weierstrass_increment_oracle(double theta, int levels, double s) {
    double acc = 0.0;
    for (int j = 0; j <= levels; ++j) {
        const double a = std::pow(2.0, -j * theta);
        const double sn = std::sin(kPi * std::ldexp(1.0, j) * s);
        acc += 2.0 * a * a * sn * sn;
    }
    return std::sqrt(acc);
}

} // namespace

TEST(TaylorGreen, IsAnExactSteadySolution) {
    const Grid g = Grid::square(64);
    const FieldPair tg = taylor_green(g);
    ASSERT_TRUE(tg.p.has_value());
    EXPECT_TRUE(tg.exact_solution);
    EXPECT_LE(max_abs(divergence(tg.u)), 1e-8);
    EXPECT_LE(max_abs(momentum_residual(tg.u, *tg.p)), 1e-8);
    EXPECT_NEAR(mean(*tg.p, 0), 0.0, 1e-15);
    EXPECT_NEAR(mean(tg.u, 0), 0.0, 1e-15);
}

TEST(TaylorGreen, PressureSignMatters) {
    const Grid g = Grid::square(64);
    const FieldPair tg = taylor_green(g);
    EXPECT_GT(max_abs(momentum_residual(tg.u, scaled(*tg.p, -1.0))), 0.1);
}

TEST(TaylorGreen, Preconditions) {
    EXPECT_THROW(taylor_green(Grid::cube(8)), PreconditionError);
    const std::array<int, 2> n{16, 16};
    const std::array<double, 2> L{1.0, 2.0};
    EXPECT_THROW(taylor_green(Grid::make(n, L)), PreconditionError);
}

TEST(ShearLayer, SharpValues) {
    const Grid g = Grid::square(16);
    const FieldPair sh = shear_layer(1.0, -1.0, 0.0, g);
    for (std::size_t n = 0; n < g.size(); ++n) {
        const Index3 idx = g.unravel(n);
        EXPECT_EQ(sh.u(n, 0), idx[1] < 8 ? 1.0 : -1.0);
        EXPECT_EQ(sh.u(n, 1), 0.0);
    }
    EXPECT_EQ(max_abs(*sh.p), 0.0);
}

TEST(ShearLayer, SmoothedIsDivergenceFreeSolution) {
    const Grid g = Grid::square(128);
    const FieldPair sh = shear_layer(1.0, -1.0, 16 * g.spacing(1), g);
    EXPECT_TRUE(sh.exact_solution);
    EXPECT_EQ(max_abs(divergence(sh.u)), 0.0);
    EXPECT_LE(max_abs(momentum_residual(sh.u, *sh.p)), 1e-12);
    // the ramp reaches both states away from the interfaces
    EXPECT_EQ(sh.u(g.ravel({0, 32, 0}), 0), 1.0);
    EXPECT_EQ(sh.u(g.ravel({0, 96, 0}), 0), -1.0);
}

TEST(ShearLayer, WidthMustBeBelowQuarterBox) {
    const Grid g = Grid::square(16);
    EXPECT_THROW(shear_layer(1.0, -1.0, 0.25, g), PreconditionError);
    EXPECT_THROW(shear_layer(1.0, -1.0, -0.1, g), PreconditionError);
    EXPECT_THROW(shear_layer(NAN, -1.0, 0.0, g), PreconditionError);
}

TEST(TranslatingSheet, InterfaceMovesWithSpeed) {
    const Grid g = Grid::square(32);
    const double h = g.spacing(1);
    const FieldPair s = translating_sheet(1.0, -1.0, 0.5, 4 * h, g);
    // interfaces now at x2 = 2h and 16h + 2h
    for (int j = 0; j < 32; ++j) {
        const double expect = (j >= 2 && j < 18) ? 1.0 : -1.0;
        EXPECT_EQ(s.u(g.ravel({3, j, 0}), 0), expect) << j;
        EXPECT_EQ(s.u(g.ravel({3, j, 0}), 1), 0.5);
    }
}

TEST(Weierstrass, IncrementsMatchSeriesOracle) {
    const Grid g = Grid::square(256);
    const double theta = 0.5;
    const int N = 5;
    const FieldPair w = weierstrass_field(theta, N, 11, g);
    for (int m : {1, 2, 4, 8, 16, 32}) {
        const double got = lp_norm(increment(w.u, {m, 0, 0}), 2.0);
        EXPECT_NEAR(got, weierstrass_increment_oracle(theta, N, m * g.spacing(0)), 1e-12) << m;
    }
}

TEST(Weierstrass, ValuesMatchDirectSeries) {
    const Grid g = Grid::square(64);
    const FieldPair w = weierstrass_field(0.3, 4, 3, g);
    const auto ph = phases(3, 4);
    for (int i : {0, 5, 17, 63}) {
        double s = 0.0;
        for (int j = 0; j <= 4; ++j) s += std::pow(2.0, -0.3 * j) * std::cos(2.0 * kPi * (1 << j) * i / 64.0 + ph[j]);
        EXPECT_NEAR(w.u(g.ravel({i, 7, 0}), 0), s, 1e-13);
    }
}

TEST(Weierstrass, HolderExponentAcrossScales) {
    // the field depends on x1 only, so a thin strip carries the full 4096-point resolution
    const Grid g = Grid::make(std::vector<int>{4096, 8}, std::vector<double>{1.0, 8.0 / 4096.0});
    const FieldPair w = weierstrass_field(0.5, 10, 1, g);
    std::vector<double> s, v;
    for (int k = 0; k <= 9; ++k) {
        const int m = 1 << k;
        s.push_back(m * g.spacing(0));
        v.push_back(lp_norm(increment(w.u, {m, 0, 0}), 3.0));
    }
    EXPECT_NEAR(fit_power_law(s, v).slope, 0.5, 0.05);
}

TEST(Weierstrass, BoundAndDegenerateLevel) {
    const Grid g = Grid::square(64);
    const double theta = 0.25;
    const FieldPair w = weierstrass_field(theta, 3, 0, g);
    double bound = 0.0;
    for (int j = 0; j <= 3; ++j) bound += std::pow(2.0, -j * theta);
    EXPECT_LE(max_abs(w.u), bound);
    const FieldPair w0 = weierstrass_field(theta, 0, 0, g);
    EXPECT_NEAR(lp_norm(w0.u, 2.0), std::sqrt(0.5), 1e-14);
    EXPECT_FALSE(w.warnings.empty());
    EXPECT_FALSE(w.p.has_value());
}

TEST(Weierstrass, UnresolvedTopModeRejected) {
    EXPECT_THROW(weierstrass_field(0.5, 5, 0, Grid::square(64)), PreconditionError);
    EXPECT_NO_THROW(weierstrass_field(0.5, 4, 0, Grid::square(64)));
    EXPECT_THROW(weierstrass_field(1.0, 2, 0, Grid::square(64)), PreconditionError);
}

TEST(RandomFourier, SolenoidalNormalizedDeterministic) {
    const Grid g = Grid::square(64);
    const FieldPair a = random_fourier_field(1.0 / 3.0, 42, g);
    const FieldPair b = random_fourier_field(1.0 / 3.0, 42, g);
    const FieldPair c = random_fourier_field(1.0 / 3.0, 43, g);
    EXPECT_LE(max_abs(divergence(a.u)), 1e-12);
    EXPECT_NEAR(lp_norm(a.u, 2.0), 1.0, 1e-14);
    EXPECT_NEAR(mean(a.u, 0), 0.0, 1e-15);
    EXPECT_NEAR(mean(a.u, 1), 0.0, 1e-15);
    EXPECT_EQ(max_abs(a.u - b.u), 0.0);
    EXPECT_GT(max_abs(a.u - c.u), 0.1);
}

TEST(RandomFourier, StructureFunctionExponent) {
    const Grid g = Grid::square(512);
    for (double theta : {0.25, 0.5}) {
        const FieldPair r = random_fourier_field(theta, 2, g);
        std::vector<double> s, v;
        for (int m : {4, 8, 16, 32}) {
            s.push_back(m * g.spacing(0));
            v.push_back(lp_norm(increment(r.u, {m, 0, 0}), 3.0));
        }
        EXPECT_NEAR(fit_power_law(s, v).slope, theta, 0.1) << theta;
    }
}

TEST(BurgersShock, JumpAndDivergenceConcentration) {
    const Grid g = Grid::square(128);
    const double h = g.spacing(0);
    const FieldPair b = burgers_shock(1.0, -1.0, 2 * h, g);
    EXPECT_FALSE(b.p.has_value());
    EXPECT_EQ(b.u(g.ravel({32, 0, 0}), 0), 1.0);
    EXPECT_EQ(b.u(g.ravel({96, 0, 0}), 0), -1.0);
    const GridField div = divergence(b.u);
    // fraction of |div u| within 8h of the two shock planes
    double inside = 0.0, total = 0.0;
    for (std::size_t n = 0; n < g.size(); ++n) {
        const double x = g.unravel(n)[0] * h;
        const double d = std::min({std::abs(x - 0.5), x, 1.0 - x});
        total += std::abs(div(n, 0));
        if (d <= 8 * h) inside += std::abs(div(n, 0));
    }
    EXPECT_GE(inside / total, 0.9);
}

TEST(BurgersShock, NonEntropicWarns) {
    const Grid g = Grid::square(16);
    EXPECT_TRUE(burgers_shock(1.0, -1.0, 0.0, g).warnings.empty());
    EXPECT_FALSE(burgers_shock(-1.0, 1.0, 0.0, g).warnings.empty());
}

TEST(Generate, KindAliases) {
    EXPECT_EQ(canonical_kind("tg"), "taylor_green");
    EXPECT_EQ(canonical_kind("random-fourier"), "random_fourier");
    EXPECT_EQ(canonical_kind("burgers"), "burgers_shock");
    EXPECT_THROW(canonical_kind("vortex"), PreconditionError);
    FieldSpec spec;
    spec.kind = "sheet";
    spec.w = 0.1; // ignored: the vortex sheet is always sharp
    const FieldPair s = generate(spec, Grid::square(16));
    EXPECT_EQ(s.u(Grid::square(16).ravel({0, 7, 0}), 0), 1.0);
    EXPECT_EQ(s.u(Grid::square(16).ravel({0, 8, 0}), 0), -1.0);
    FieldSpec w;
    w.kind = "weier";
    w.levels = 1;
    EXPECT_THROW(generate(w, Grid::square(64)), PreconditionError);
}
