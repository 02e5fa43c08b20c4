#pragma once

#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "onsager/grid.hpp"

namespace onsager {

/// Oriented plane {x . nu = c0 + s t} in a periodic box, with unit spatial
/// normal nu and normal speed s.
///
/// Only coordinate-aligned normals (nu = +-e_a) are supported: those are the
/// planes that close up on the torus and carry a lattice of base points.
class Interface {
public:
    Interface(int dim, std::span<const double> normal, double offset, double speed = 0.0)
        : dim_(dim), c0_(offset), s_(speed) {
        if (dim != 2 && dim != 3) throw PreconditionError("interface: dimension must be 2 or 3");
        if (static_cast<int>(normal.size()) != dim)
            throw PreconditionError("interface: normal must have d components");
        if (!std::isfinite(offset) || !std::isfinite(speed))
            throw PreconditionError("interface: offset and speed must be finite");
        double norm2 = 0.0;
        for (double v : normal) norm2 += v * v;
        if (!(norm2 > 0.0)) throw PreconditionError("interface: degenerate (zero) spatial normal");
        int nonzero = 0;
        for (int a = 0; a < dim; ++a) {
            nu_[a] = normal[a] / std::sqrt(norm2);
            if (normal[a] != 0.0) {
                ++nonzero;
                axis_ = a;
            }
        }
        if (nonzero != 1) throw PreconditionError("interface: only coordinate-aligned normals are supported");
        nu_[axis_] = normal[axis_] > 0.0 ? 1.0 : -1.0;
        const double scale = 1.0 / std::sqrt(1.0 + s_ * s_);
        for (int a = 0; a < dim; ++a) nx_[a] = nu_[a] * scale;
        nt_ = s_ == 0.0 ? 0.0 : -s_ * scale; // no signed zero for static planes
    }

    /// Plane through x_axis = position with normal sign * e_axis.
    static Interface axis_plane(int dim, int axis, double position, double sign = 1.0, double speed = 0.0) {
        std::array<double, 3> nu{0.0, 0.0, 0.0};
        nu[axis] = sign >= 0.0 ? 1.0 : -1.0;
        return Interface(dim, std::span<const double>(nu.data(), static_cast<std::size_t>(dim)),
                         nu[axis] * position, speed);
    }

    int dim() const { return dim_; }
    const Point3& normal() const { return nu_; }
    int axis() const { return axis_; }
    double orientation() const { return nu_[axis_]; }
    double offset() const { return c0_; }
    double speed() const { return s_; }
    const Point3& n_x() const { return nx_; }
    double n_t() const { return nt_; }

    /// Same plane with nu -> -nu (and consequently s -> -s, c0 -> -c0).
    Interface reversed() const {
        std::array<double, 3> nu{-nu_[0], -nu_[1], -nu_[2]};
        return Interface(dim_, std::span<const double>(nu.data(), static_cast<std::size_t>(dim_)), -c0_, -s_);
    }

    /// Coordinate of the plane on its normal axis at time t, wrapped into [0, L).
    double position(const Grid& g, double t = 0.0) const {
        check_grid(g);
        const double len = g.length[axis_];
        double q = std::fmod(orientation() * (c0_ + s_ * t), len);
        if (q < 0.0) q += len;
        return q;
    }

    /// Periodic signed distance of x from the plane, positive on the +nu side.
    double signed_distance(const Grid& g, const Point3& x, double t = 0.0) const {
        const double len = g.length[axis_];
        double dx = std::fmod(x[axis_] - position(g, t), len);
        if (dx < -0.5 * len) dx += len;
        if (dx >= 0.5 * len) dx -= len;
        return orientation() * dx;
    }

    /// Base points: the plane's intersection with the tangential node lattice.
    std::vector<Point3> base_points(const Grid& g, double t = 0.0) const {
        check_grid(g);
        const double q = position(g, t);
        std::vector<Point3> pts;
        std::array<int, 3> cnt{1, 1, 1};
        for (int a = 0; a < dim_; ++a) cnt[a] = a == axis_ ? 1 : g.n[a];
        for (int i = 0; i < cnt[0]; ++i)
            for (int j = 0; j < cnt[1]; ++j)
                for (int k = 0; k < cnt[2]; ++k) {
                    Point3 x = g.position(Index3{i, j, k});
                    x[axis_] = q;
                    pts.push_back(x);
                }
        return pts;
    }

    /// Tangential measure carried by one base point (product of the other spacings).
    double surface_element(const Grid& g) const {
        double dh = 1.0;
        for (int a = 0; a < dim_; ++a)
            if (a != axis_) dh *= g.spacing(a);
        return dh;
    }

    /// Measure of the plane inside the box.
    double area(const Grid& g) const {
        double m = 1.0;
        for (int a = 0; a < dim_; ++a)
            if (a != axis_) m *= g.length[a];
        return m;
    }

    void check_grid(const Grid& g) const {
        if (g.dim != dim_) throw PreconditionError("interface: dimension differs from the grid's");
    }

private:
    int dim_;
    int axis_ = 0;
    double c0_;
    double s_;
    Point3 nu_{0.0, 0.0, 0.0};
    Point3 nx_{0.0, 0.0, 0.0};
    double nt_ = 0.0;
};

} // namespace onsager
