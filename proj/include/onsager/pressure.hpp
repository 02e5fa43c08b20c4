#pragma once

#include <string>
#include <vector>

#include "onsager/spectral.hpp"

namespace onsager {

namespace detail {

inline std::array<double, 3> wavevector(const Grid& g, std::size_t mode) {
    const Index3 idx = g.unravel(mode);
    return {derivative_wavenumber(g, 0, idx[0]), derivative_wavenumber(g, 1, idx[1]),
            derivative_wavenumber(g, 2, idx[2])};
}

} // namespace detail

/// Spectral Leray projection onto divergence-free fields. Uses the same
/// wavevectors as divergence(), so the projected field has zero spectral
/// divergence up to rounding.
inline GridField leray_project(const GridField& u) {
    const Grid& g = u.grid();
    const int d = g.dim;
    if (u.components() != d) throw PreconditionError("leray_project: needs a vector field with m = d");
    std::vector<Spectrum> s;
    for (int c = 0; c < d; ++c) s.push_back(forward_transform(u, c));
    for (std::size_t i = 0; i < g.size(); ++i) {
        const auto k = detail::wavevector(g, i);
        double k2 = 0.0;
        for (int a = 0; a < d; ++a) k2 += k[a] * k[a];
        if (k2 == 0.0) continue;
        Complex kdotu(0.0, 0.0);
        for (int a = 0; a < d; ++a) kdotu += k[a] * s[a][i];
        for (int a = 0; a < d; ++a) s[a][i] -= k[a] * kdotu / k2;
    }
    std::vector<std::vector<double>> comps;
    for (int c = 0; c < d; ++c) comps.push_back(inverse_transform(g, std::move(s[c])));
    return pack_components(g, comps);
}

/// Zero-mean pressure solving -Lap p = d_i d_j (u_i u_j) spectrally.
/// If `warnings` is given, a note is appended when u is visibly compressible.
inline GridField solve_pressure(const GridField& u, std::vector<std::string>* warnings = nullptr) {
    const Grid& g = u.grid();
    const int d = g.dim;
    if (u.components() != d) throw PreconditionError("solve_pressure: needs a vector field with m = d");
    if (warnings) {
        const double div = max_abs(divergence(u));
        if (div > 1e-6)
            warnings->push_back("solve_pressure: input divergence " + std::to_string(div) +
                                " exceeds 1e-6; result is the Leray pressure of a compressible field");
    }
    const GridField uu = outer(u, u);
    Spectrum acc(g.size(), Complex(0.0, 0.0));
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            const Spectrum q = forward_transform(uu, i * d + j);
            for (std::size_t n = 0; n < g.size(); ++n) {
                const auto k = detail::wavevector(g, n);
                acc[n] += k[i] * k[j] * q[n];
            }
        }
    }
    for (std::size_t n = 0; n < g.size(); ++n) {
        const auto k = detail::wavevector(g, n);
        double k2 = 0.0;
        for (int a = 0; a < d; ++a) k2 += k[a] * k[a];
        acc[n] = k2 == 0.0 ? Complex(0.0, 0.0) : -acc[n] / k2;
    }
    std::vector<double> p = inverse_transform(g, std::move(acc));
    // the transform leaves a rounding-level mean; remove it exactly
    double m = 0.0;
    for (double v : p) m += v;
    m /= static_cast<double>(p.size());
    for (double& v : p) v -= m;
    return GridField(g, 1, std::move(p));
}

} // namespace onsager
