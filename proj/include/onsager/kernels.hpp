#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "onsager/grid.hpp"
#include "onsager/spectral.hpp"

namespace onsager {

enum class ProfileId { Bump, Quartic };

inline std::string to_string(ProfileId id) { return id == ProfileId::Bump ? "bump" : "quartic"; }

inline ProfileId parse_profile(const std::string& s) {
    if (s == "bump") return ProfileId::Bump;
    if (s == "quartic") return ProfileId::Quartic;
    throw PreconditionError("unknown kernel profile '" + s + "' (expected bump or quartic)");
}

/// Radial, even, compactly supported mollifier normalized to unit mass on the
/// unit ball of R^d.
class KernelProfile {
public:
    KernelProfile(ProfileId id, int dim) : id_(id), dim_(dim) {
        if (dim != 2 && dim != 3) throw PreconditionError("kernel profile: dimension must be 2 or 3");
        const double sphere = dim == 2 ? 2.0 * std::numbers::pi : 4.0 * std::numbers::pi;
        auto radial = [&](double r) { return raw(r * r) * std::pow(r, dim - 1); };
        const double integral = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(radial, 0.0, 1.0, 15, 1e-15);
        norm_ = sphere * integral;
    }

    ProfileId id() const { return id_; }
    int dim() const { return dim_; }
    double normalization() const { return norm_; }

    /// rho(z) for |z|^2 = r2.
    double value(double r2) const { return raw(r2) / norm_; }

    /// grad rho(z) = radial_factor(|z|^2) * z.
    double radial_factor(double r2) const {
        if (r2 >= 1.0) return 0.0;
        const double s = 1.0 - r2;
        switch (id_) {
        case ProfileId::Bump: return -2.0 * std::exp(-1.0 / s) / (s * s) / norm_;
        case ProfileId::Quartic: return -4.0 * s / norm_;
        }
        return 0.0;
    }

private:
    double raw(double r2) const {
        if (r2 >= 1.0) return 0.0;
        const double s = 1.0 - r2;
        switch (id_) {
        case ProfileId::Bump: return std::exp(-1.0 / s);
        case ProfileId::Quartic: return s * s;
        }
        return 0.0;
    }

    ProfileId id_;
    int dim_;
    double norm_ = 1.0;
};

/// Grid-aligned discretization of rho at scale ell.
///
/// Offsets are grouped into reflection orbits {(+-k_0, +-k_1, +-k_2)}; member
/// j of an orbit carries a negative sign on the b-th nonzero axis iff bit b of
/// j is set. Sums over offsets are reduced pairwise inside each orbit, so any
/// summand that is odd under a single-axis reflection cancels exactly.
class DiscreteKernel {
public:
    struct Orbit {
        std::size_t first;
        int count;
    };

    DiscreteKernel(ProfileId profile, double scale, const Grid& grid) : profile_(profile), scale_(scale), grid_(grid) {
        const double hmax = grid.max_spacing();
        std::array<int, 3> reach{0, 0, 0};
        for (int a = 0; a < grid.dim; ++a) {
            const double ratio = scale / grid.spacing(a);
            const double rounded = std::round(ratio);
            if (std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio))
                throw PreconditionError("kernel: scale " + std::to_string(scale) +
                                        " is not an integer multiple of spacing on axis " + std::to_string(a));
            reach[a] = static_cast<int>(rounded);
        }
        if (scale < 2.0 * hmax * (1.0 - 1e-12))
            throw PreconditionError("kernel: scale " + std::to_string(scale) +
                                    " too small (fewer than 3 offsets per axis)");
        if (!(2.0 * scale < grid.min_length()))
            throw PreconditionError("kernel: scale " + std::to_string(scale) + " too large versus domain");

        const KernelProfile prof(profile, grid.dim);
        volume_ = 1.0;
        for (int a = 0; a < grid.dim; ++a) volume_ *= grid.spacing(a) / scale;

        for (int k0 = 0; k0 <= reach[0]; ++k0) {
            for (int k1 = 0; k1 <= reach[1]; ++k1) {
                for (int k2 = 0; k2 <= reach[2]; ++k2) {
                    const Offset rep{k0, k1, k2};
                    double r2 = 0.0;
                    for (int a = 0; a < grid.dim; ++a) {
                        const double z = rep[a] * grid.spacing(a) / scale;
                        r2 += z * z;
                    }
                    if (r2 >= 1.0) continue; // rho and grad rho vanish on and beyond the unit sphere
                    add_orbit(rep, prof);
                }
            }
        }
        double total = 0.0;
        for (double w : weights_) total += w;
        for (double& w : weights_) w /= total;
        // grad samples: (g_k - g_{-k}) / 2, pairing each member with its point reflection
        std::vector<Point3> anti(grads_.size());
        for (const Orbit& o : orbits_) {
            for (int j = 0; j < o.count; ++j) {
                const int mirror = (o.count - 1) ^ j;
                for (int a = 0; a < 3; ++a)
                    anti[o.first + j][a] = 0.5 * (grads_[o.first + j][a] - grads_[o.first + mirror][a]);
            }
        }
        grads_ = std::move(anti);
    }

    ProfileId profile() const { return profile_; }
    double scale() const { return scale_; }
    const Grid& grid() const { return grid_; }
    /// Quadrature cell volume (h/ell)^d shared by every offset.
    double quadrature_volume() const { return volume_; }

    std::size_t size() const { return offsets_.size(); }
    const std::vector<Offset>& offsets() const { return offsets_; }
    const std::vector<double>& weights() const { return weights_; }
    const std::vector<Point3>& gradients() const { return grads_; }
    const std::vector<Orbit>& orbits() const { return orbits_; }

    /// z_k = k h / ell on one axis.
    double unit_offset(std::size_t i, int axis) const {
        return axis < grid_.dim ? offsets_[i][axis] * grid_.spacing(axis) / scale_ : 0.0;
    }

    /// Sum of term(i) over all offsets with orbit-wise pairwise reduction.
    template <class Term>
    double symmetric_sum(Term&& term) const {
        double total = 0.0;
        double vals[8];
        for (const Orbit& o : orbits_) {
            for (int j = 0; j < o.count; ++j) vals[j] = term(o.first + j);
            for (int len = o.count; len > 1; len /= 2)
                for (int j = 0; j < len / 2; ++j) vals[j] = vals[2 * j] + vals[2 * j + 1];
            total += vals[0];
        }
        return total;
    }

    double second_moment(int axis) const {
        return symmetric_sum([&](std::size_t i) {
            const double z = unit_offset(i, axis);
            return weights_[i] * z * z;
        });
    }

    void require_grid(const Grid& g, const char* who) const {
        if (!(g == grid_)) throw PreconditionError(std::string(who) + ": kernel was built for a different grid");
    }

private:
    void add_orbit(const Offset& rep, const KernelProfile& prof) {
        std::array<int, 3> axes{};
        int nz = 0;
        for (int a = 0; a < grid_.dim; ++a)
            if (rep[a] != 0) axes[nz++] = a;
        const int count = 1 << nz;
        orbits_.push_back({offsets_.size(), count});
        for (int j = 0; j < count; ++j) {
            Offset k = rep;
            for (int b = 0; b < nz; ++b)
                if (j & (1 << b)) k[axes[b]] = -k[axes[b]];
            Point3 z{0.0, 0.0, 0.0};
            double r2 = 0.0;
            for (int a = 0; a < grid_.dim; ++a) {
                z[a] = k[a] * grid_.spacing(a) / scale_;
                r2 += z[a] * z[a];
            }
            const double f = prof.radial_factor(r2);
            offsets_.push_back(k);
            weights_.push_back(prof.value(r2) * volume_);
            grads_.push_back({f * z[0], f * z[1], f * z[2]});
        }
    }

    ProfileId profile_;
    double scale_;
    Grid grid_;
    double volume_ = 1.0;
    std::vector<Offset> offsets_;
    std::vector<double> weights_;
    std::vector<Point3> grads_;
    std::vector<Orbit> orbits_;
};

inline DiscreteKernel build_discrete_kernel(ProfileId profile, double scale, const Grid& grid) {
    return DiscreteKernel(profile, scale, grid);
}

/// u_ell(x) = sum_k w_k u(x + k h), by direct summation.
inline GridField mollify(const GridField& u, const DiscreteKernel& K) {
    K.require_grid(u.grid(), "mollify");
    const Grid& g = u.grid();
    const PeriodicIndexer nb(g);
    const int m = u.components();
    const auto& offs = K.offsets();
    const auto& w = K.weights();
    std::vector<double> out(u.data().size(), 0.0);
    std::vector<double> acc(static_cast<std::size_t>(m));
    for (std::size_t i = 0; i < g.size(); ++i) {
        const Index3 base = g.unravel(i);
        std::fill(acc.begin(), acc.end(), 0.0);
        for (std::size_t k = 0; k < offs.size(); ++k) {
            const std::size_t j = nb(base, offs[k]);
            for (int c = 0; c < m; ++c) acc[c] += w[k] * u(j, c);
        }
        std::copy(acc.begin(), acc.end(), out.begin() + static_cast<std::ptrdiff_t>(i * m));
    }
    return GridField(g, m, std::move(out));
}

/// Fourier multiplier of the discrete kernel: sum_k w_k exp(2 pi i m.k / n).
/// Real because the weights are even.
inline std::vector<double> kernel_transfer(const DiscreteKernel& K) {
    const Grid& g = K.grid();
    Spectrum s(g.size(), Complex(0.0, 0.0));
    for (std::size_t k = 0; k < K.size(); ++k) s[g.ravel(K.offsets()[k])] += K.weights()[k];
    detail::dft_in_place(g, s, FFTW_FORWARD);
    std::vector<double> t(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) t[i] = s[i].real();
    return t;
}

/// Mollification as a Fourier multiplier; agrees with mollify() to rounding.
inline GridField mollify_spectral(const GridField& u, const DiscreteKernel& K) {
    K.require_grid(u.grid(), "mollify_spectral");
    const std::vector<double> t = kernel_transfer(K);
    std::vector<std::vector<double>> comps;
    for (int c = 0; c < u.components(); ++c) {
        Spectrum s = forward_transform(u, c);
        for (std::size_t i = 0; i < s.size(); ++i) s[i] *= t[i];
        comps.push_back(inverse_transform(u.grid(), std::move(s)));
    }
    return pack_components(u.grid(), comps);
}

} // namespace onsager
