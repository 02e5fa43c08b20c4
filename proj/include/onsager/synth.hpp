#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "onsager/pressure.hpp"
#include "onsager/spectral.hpp"

namespace onsager {

/// Generated velocity, the pressure when the generator defines one, and any
/// non-fatal diagnostics.
struct FieldPair {
    GridField u;
    std::optional<GridField> p;
    bool exact_solution = false;
    std::vector<std::string> warnings;
};

namespace synth_detail {

inline double psi(double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }

/// C-infinity ramp: 0 for t <= 0, 1 for t >= 1.
inline double smooth_ramp(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    const double a = psi(t), b = psi(1.0 - t);
    return a / (a + b);
}

/// Periodic two-interface profile on [0, L): value `lo` below L/2, `hi`
/// above, with the mirrored hi -> lo transition at 0. For w = 0 a node lying
/// exactly on an interface takes the value of the side it opens onto.
inline double step_profile(double x, double len, double lo, double hi, double w) {
    x = std::fmod(x, len);
    if (x < 0.0) x += len;
    if (w == 0.0) return x < 0.5 * len ? lo : hi;
    if (std::abs(x - 0.5 * len) < 0.25 * len) return lo + (hi - lo) * smooth_ramp((x - 0.5 * len) / w + 0.5);
    const double y = x > 0.5 * len ? x - len : x; // signed distance to the seam
    return hi + (lo - hi) * smooth_ramp(y / w + 0.5);
}

/// Uniform double in [0, 1) from the top 53 bits, independent of the
/// standard library's distribution implementations.
inline double unit_uniform(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline void require_2d(const Grid& g, const char* who) {
    if (g.dim != 2) throw PreconditionError(std::string(who) + ": requires d = 2");
}

} // namespace synth_detail

/// Steady Taylor-Green vortex on a square box of side L:
/// u = (sin kx cos ky, -cos kx sin ky), p = (cos 2kx + cos 2ky)/4, k = 2 pi / L.
inline FieldPair taylor_green(const Grid& g) {
    synth_detail::require_2d(g, "taylor_green");
    if (g.length[0] != g.length[1]) throw PreconditionError("taylor_green: requires L1 = L2");
    const double k = 2.0 * std::numbers::pi / g.length[0];
    FieldPair out;
    out.u = sample_function(g, 2, [&](const Point3& x, std::span<double> v) {
        v[0] = std::sin(k * x[0]) * std::cos(k * x[1]);
        v[1] = -std::cos(k * x[0]) * std::sin(k * x[1]);
    });
    out.p = sample_function(g, 1, [&](const Point3& x, std::span<double> v) {
        v[0] = 0.25 * (std::cos(2.0 * k * x[0]) + std::cos(2.0 * k * x[1]));
    });
    out.exact_solution = true;
    return out;
}

/// u = (phi(x2), 0), p = 0: phi goes from a to b across x2 = L2/2 (and back
/// across x2 = 0) over width w; w = 0 gives a sharp vortex sheet.
inline FieldPair shear_layer(double a, double b, double w, const Grid& g) {
    synth_detail::require_2d(g, "shear_layer");
    if (!std::isfinite(a) || !std::isfinite(b)) throw PreconditionError("shear_layer: jump values must be finite");
    if (!(w >= 0.0) || !(w < 0.25 * g.length[1]))
        throw PreconditionError("shear_layer: width must satisfy 0 <= w < L2/4");
    FieldPair out;
    out.u = sample_function(g, 2, [&](const Point3& x, std::span<double> v) {
        v[0] = synth_detail::step_profile(x[1], g.length[1], a, b, w);
        v[1] = 0.0;
    });
    out.p = GridField::zeros(g, 1);
    out.exact_solution = true;
    return out;
}

/// Sheet translated with the flow: u = (phi(x2 - c t), c) with phi the sharp
/// a/b profile. Exact solution with p = 0; interfaces at x2 = c t and L2/2 + c t.
inline FieldPair translating_sheet(double a, double b, double c, double t, const Grid& g) {
    synth_detail::require_2d(g, "translating_sheet");
    FieldPair out;
    out.u = sample_function(g, 2, [&](const Point3& x, std::span<double> v) {
        v[0] = synth_detail::step_profile(x[1] - c * t, g.length[1], a, b, 0.0);
        v[1] = c;
    });
    out.p = GridField::zeros(g, 1);
    out.exact_solution = true;
    return out;
}

/// Lacunary series u1 = sum_{j=0..N} 2^{-j theta} cos(2 pi 2^j x1 / L1 + phi_j),
/// u2 = 0, with phases drawn from a seeded Mersenne twister.
/// Depends on x1 only, so it is not divergence-free.
inline FieldPair weierstrass_field(double theta, int levels, std::uint64_t seed, const Grid& g) {
    synth_detail::require_2d(g, "weierstrass_field");
    if (!(theta > 0.0 && theta < 1.0)) throw PreconditionError("weierstrass_field: theta must lie in (0,1)");
    if (levels < 0 || levels > 30) throw PreconditionError("weierstrass_field: level count out of range");
    if ((std::int64_t{1} << levels) * 4 > g.n[0])
        throw PreconditionError("weierstrass_field: top mode 2^N exceeds n1/4 (unresolved)");
    std::mt19937_64 rng(seed);
    std::vector<double> phase(static_cast<std::size_t>(levels + 1));
    for (double& ph : phase) ph = 2.0 * std::numbers::pi * synth_detail::unit_uniform(rng);
    FieldPair out;
    out.u = sample_function(g, 2, [&](const Point3& x, std::span<double> v) {
        double s = 0.0;
        for (int j = 0; j <= levels; ++j)
            s += std::pow(2.0, -j * theta) *
                 std::cos(2.0 * std::numbers::pi * std::ldexp(1.0, j) * x[0] / g.length[0] + phase[j]);
        v[0] = s;
        v[1] = 0.0;
    });
    out.warnings.push_back("weierstrass_field: u = (f(x1), 0) is compressible (div u = f')");
    return out;
}

/// Divergence-free random field with |u_hat(k)| ~ |k|^{-theta-1}, built from a
/// stream function with Hermitian-paired random phases; mean zero, unit L2 norm.
inline FieldPair random_fourier_field(double theta, std::uint64_t seed, const Grid& g) {
    synth_detail::require_2d(g, "random_fourier_field");
    if (!(theta > 0.0 && theta < 1.0)) throw PreconditionError("random_fourier_field: theta must lie in (0,1)");
    std::mt19937_64 rng(seed);
    Spectrum psi(g.size(), Complex(0.0, 0.0));
    const int n0 = g.n[0], n1 = g.n[1];
    for (int i0 = 0; i0 < n0; ++i0) {
        for (int i1 = 0; i1 < n1; ++i1) {
            if (is_nyquist(i0, n0) || is_nyquist(i1, n1)) continue;
            const int m0 = mode_number(i0, n0), m1 = mode_number(i1, n1);
            if (!(m0 > 0 || (m0 == 0 && m1 > 0))) continue; // canonical half; partner filled below
            const double kx = m0 / g.length[0], ky = m1 / g.length[1];
            const double kk = std::sqrt(kx * kx + ky * ky);
            const double amp = std::pow(kk, -theta - 2.0);
            const double ph = 2.0 * std::numbers::pi * synth_detail::unit_uniform(rng);
            const Complex c = std::polar(amp, ph);
            psi[g.ravel({i0, i1, 0})] = c;
            psi[g.ravel({-i0, -i1, 0})] = std::conj(c);
        }
    }
    Spectrum u0(g.size()), u1(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        const Index3 idx = g.unravel(i);
        u0[i] = Complex(0.0, derivative_wavenumber(g, 1, idx[1])) * psi[i];
        u1[i] = -Complex(0.0, derivative_wavenumber(g, 0, idx[0])) * psi[i];
    }
    GridField u = leray_project(pack_components(g, {inverse_transform(g, u0), inverse_transform(g, u1)}));
    const std::array<double, 2> mu{-mean(u, 0), -mean(u, 1)};
    u = shifted(u, mu);
    FieldPair out;
    out.u = scaled(u, 1.0 / lp_norm(u, 2.0));
    return out;
}

/// u = (psi(x1), 0): steps from uL to uR across x1 = L1/2 (mirrored at 0).
/// Compressible by design; pressure is left undefined.
inline FieldPair burgers_shock(double uL, double uR, double w, const Grid& g) {
    synth_detail::require_2d(g, "burgers_shock");
    if (!std::isfinite(uL) || !std::isfinite(uR)) throw PreconditionError("burgers_shock: states must be finite");
    if (!(w >= 0.0) || !(w < 0.25 * g.length[0]))
        throw PreconditionError("burgers_shock: width must satisfy 0 <= w < L1/4");
    FieldPair out;
    out.u = sample_function(g, 2, [&](const Point3& x, std::span<double> v) {
        v[0] = synth_detail::step_profile(x[0], g.length[0], uL, uR, w);
        v[1] = 0.0;
    });
    if (!(uL > uR)) out.warnings.push_back("burgers_shock: u_L <= u_R is not entropic");
    return out;
}

/// Parameters for any generator, as accepted by the command line.
struct FieldSpec {
    std::string kind = "taylor_green";
    double a = 1.0, b = -1.0, w = 0.0;
    double theta = 1.0 / 3.0;
    int levels = 5;
    std::uint64_t seed = 0;
};

/// Canonical generator name for a kind string; accepts short aliases.
inline std::string canonical_kind(std::string k) {
    std::replace(k.begin(), k.end(), '-', '_');
    if (k == "tg" || k == "taylor_green") return "taylor_green";
    if (k == "shear" || k == "shear_layer") return "shear_layer";
    if (k == "sheet" || k == "vortex_sheet") return "vortex_sheet";
    if (k == "weier" || k == "weierstrass") return "weierstrass";
    if (k == "random" || k == "random_fourier") return "random_fourier";
    if (k == "burgers" || k == "burgers_shock") return "burgers_shock";
    throw PreconditionError("unknown field kind '" + k + "'");
}

inline FieldPair generate(const FieldSpec& s, const Grid& g) {
    const std::string k = canonical_kind(s.kind);
    if (k == "taylor_green") return taylor_green(g);
    if (k == "shear_layer") return shear_layer(s.a, s.b, s.w, g);
    if (k == "vortex_sheet") return shear_layer(s.a, s.b, 0.0, g);
    if (k == "weierstrass") {
        if (s.levels < 2) throw PreconditionError("generate: weierstrass needs at least levels = 2");
        return weierstrass_field(s.theta, s.levels, s.seed, g);
    }
    if (k == "random_fourier") return random_fourier_field(s.theta, s.seed, g);
    return burgers_shock(s.a, s.b, s.w, g);
}

} // namespace onsager
