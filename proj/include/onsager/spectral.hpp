#pragma once

#include <fftw3.h>

#include <complex>
#include <mutex>
#include <numbers>
#include <vector>

#include "onsager/grid.hpp"

namespace onsager {

using Complex = std::complex<double>;
using Spectrum = std::vector<Complex>;

namespace detail {

inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

/// In-place complex DFT over the grid's active axes (unnormalized).
inline void dft_in_place(const Grid& g, Spectrum& buf, int sign) {
    fftw_plan plan;
    {
        // The FFTW planner is not re-entrant.
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        auto* p = reinterpret_cast<fftw_complex*>(buf.data());
        plan = fftw_plan_dft(g.dim, g.n.data(), p, p, sign, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        fftw_destroy_plan(plan);
    }
}

} // namespace detail

inline Spectrum forward_transform(const GridField& u, int c) {
    Spectrum s(u.nodes());
    for (std::size_t i = 0; i < u.nodes(); ++i) s[i] = Complex(u(i, c), 0.0);
    detail::dft_in_place(u.grid(), s, FFTW_FORWARD);
    return s;
}

/// Inverse transform with 1/N normalization; returns the real part.
inline std::vector<double> inverse_transform(const Grid& g, Spectrum s) {
    detail::dft_in_place(g, s, FFTW_BACKWARD);
    const double inv = 1.0 / static_cast<double>(g.size());
    std::vector<double> out(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) out[i] = s[i].real() * inv;
    return out;
}

/// Signed integer mode number of DFT index idx on an axis with n samples.
inline int mode_number(int idx, int n) { return idx <= n / 2 ? idx : idx - n; }

inline bool is_nyquist(int idx, int n) { return n % 2 == 0 && idx == n / 2; }

/// Angular wavenumber 2 pi k / L used for differentiation; the Nyquist mode
/// is mapped to zero so derivatives of real fields stay real and odd.
inline double derivative_wavenumber(const Grid& g, int axis, int idx) {
    if (axis >= g.dim || is_nyquist(idx, g.n[axis])) return 0.0;
    return 2.0 * std::numbers::pi * mode_number(idx, g.n[axis]) / g.length[axis];
}

/// Packs per-component scalar arrays (all of grid size) into a GridField.
inline GridField pack_components(const Grid& g, const std::vector<std::vector<double>>& comps) {
    const int m = static_cast<int>(comps.size());
    std::vector<double> d(g.size() * static_cast<std::size_t>(m));
    for (int c = 0; c < m; ++c)
        for (std::size_t i = 0; i < g.size(); ++i) d[i * m + c] = comps[c][i];
    return GridField(g, m, std::move(d));
}

namespace detail {

inline std::vector<double> differentiate(const Grid& g, const Spectrum& s, int axis) {
    Spectrum t(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double k = derivative_wavenumber(g, axis, g.unravel(i)[axis]);
        t[i] = Complex(0.0, k) * s[i];
    }
    return inverse_transform(g, std::move(t));
}

} // namespace detail

/// Fourier-differentiated gradient. Output component c*d + j holds d u_c / d x_j.
inline GridField spectral_gradient(const GridField& u) {
    const Grid& g = u.grid();
    const int d = g.dim;
    std::vector<std::vector<double>> comps;
    comps.reserve(static_cast<std::size_t>(u.components() * d));
    for (int c = 0; c < u.components(); ++c) {
        const Spectrum s = forward_transform(u, c);
        for (int j = 0; j < d; ++j) comps.push_back(detail::differentiate(g, s, j));
    }
    return pack_components(g, comps);
}

/// Symmetric part (grad u + grad u^T)/2 as a d x d field, row-major.
inline GridField sym_gradient(const GridField& u) {
    const int d = u.dim();
    if (u.components() != d) throw PreconditionError("sym_gradient: needs a vector field with m = d");
    const GridField grad = spectral_gradient(u);
    std::vector<double> out(u.nodes() * static_cast<std::size_t>(d * d));
    for (std::size_t n = 0; n < u.nodes(); ++n) {
        for (int i = 0; i < d; ++i) {
            for (int j = i; j < d; ++j) {
                const double e = 0.5 * (grad(n, i * d + j) + grad(n, j * d + i));
                out[n * d * d + i * d + j] = e;
                out[n * d * d + j * d + i] = e;
            }
        }
    }
    return GridField(u.grid(), d * d, std::move(out));
}

/// Spectral divergence of a vector field (m = d).
inline GridField divergence(const GridField& u) {
    const Grid& g = u.grid();
    const int d = g.dim;
    if (u.components() != d) throw PreconditionError("divergence: needs a vector field with m = d");
    Spectrum acc(u.nodes(), Complex(0.0, 0.0));
    for (int j = 0; j < d; ++j) {
        const Spectrum s = forward_transform(u, j);
        for (std::size_t i = 0; i < s.size(); ++i)
            acc[i] += Complex(0.0, derivative_wavenumber(g, j, g.unravel(i)[j])) * s[i];
    }
    return GridField(g, 1, inverse_transform(g, std::move(acc)));
}

/// Row divergence of a d x d tensor field: (div T)_i = sum_j d_j T_ij.
inline GridField tensor_divergence(const GridField& t) {
    const Grid& g = t.grid();
    const int d = g.dim;
    if (t.components() != d * d) throw PreconditionError("tensor_divergence: needs d*d components");
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < d; ++i) {
        Spectrum acc(t.nodes(), Complex(0.0, 0.0));
        for (int j = 0; j < d; ++j) {
            const Spectrum s = forward_transform(t, i * d + j);
            for (std::size_t n = 0; n < s.size(); ++n)
                acc[n] += Complex(0.0, derivative_wavenumber(g, j, g.unravel(n)[j])) * s[n];
        }
        rows.push_back(inverse_transform(g, std::move(acc)));
    }
    return pack_components(g, rows);
}

/// Outer product field a (x) b with components i*mb + j.
inline GridField outer(const GridField& a, const GridField& b) {
    if (!(a.grid() == b.grid())) throw PreconditionError("outer: grid mismatch");
    const int ma = a.components(), mb = b.components();
    std::vector<double> d(a.nodes() * static_cast<std::size_t>(ma * mb));
    for (std::size_t n = 0; n < a.nodes(); ++n)
        for (int i = 0; i < ma; ++i)
            for (int j = 0; j < mb; ++j) d[n * ma * mb + i * mb + j] = a(n, i) * b(n, j);
    return GridField(a.grid(), ma * mb, std::move(d));
}

/// Spectral gradient of a scalar field as a d-vector.
inline GridField scalar_gradient(const GridField& p) {
    if (p.components() != 1) throw PreconditionError("scalar_gradient: needs a scalar field");
    return spectral_gradient(p);
}

/// Steady momentum residual div(u (x) u) + grad p (forcing zero).
inline GridField momentum_residual(const GridField& u, const GridField& p) {
    if (!(u.grid() == p.grid()) || p.components() != 1 || u.components() != u.dim())
        throw PreconditionError("momentum_residual: expects vector u and scalar p on one grid");
    return tensor_divergence(outer(u, u)) + scalar_gradient(p);
}

} // namespace onsager
