#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "onsager/error.hpp"

namespace onsager {

using Index3 = std::array<int, 3>;
using Offset = std::array<int, 3>;
using Point3 = std::array<double, 3>;

/// Periodic box discretized by a uniform lattice. Two- and three-dimensional
/// grids share one representation; for d = 2 the third axis is a singleton.
struct Grid {
    int dim = 2;
    std::array<int, 3> n{1, 1, 1};
    std::array<double, 3> length{1.0, 1.0, 1.0};

    static Grid make(std::span<const int> counts, std::span<const double> lengths) {
        if (counts.size() != lengths.size())
            throw PreconditionError("grid: counts and lengths differ in dimension");
        if (counts.size() != 2 && counts.size() != 3)
            throw PreconditionError("grid: dimension must be 2 or 3");
        Grid g;
        g.dim = static_cast<int>(counts.size());
        for (int a = 0; a < g.dim; ++a) {
            if (counts[a] < 4)
                throw PreconditionError("grid: axis " + std::to_string(a) + " needs at least 4 samples");
            if (!(lengths[a] > 0.0) || !std::isfinite(lengths[a]))
                throw PreconditionError("grid: axis " + std::to_string(a) + " length must be positive");
            g.n[a] = counts[a];
            g.length[a] = lengths[a];
        }
        return g;
    }

    static Grid square(int count, double len = 1.0) {
        const std::array<int, 2> c{count, count};
        const std::array<double, 2> l{len, len};
        return make(c, l);
    }

    static Grid cube(int count, double len = 1.0) {
        const std::array<int, 3> c{count, count, count};
        const std::array<double, 3> l{len, len, len};
        return make(c, l);
    }

    double spacing(int axis) const { return length[axis] / n[axis]; }

    double min_spacing() const {
        double h = spacing(0);
        for (int a = 1; a < dim; ++a) h = std::min(h, spacing(a));
        return h;
    }

    double max_spacing() const {
        double h = spacing(0);
        for (int a = 1; a < dim; ++a) h = std::max(h, spacing(a));
        return h;
    }

    double min_length() const {
        double l = length[0];
        for (int a = 1; a < dim; ++a) l = std::min(l, length[a]);
        return l;
    }

    std::size_t size() const {
        return static_cast<std::size_t>(n[0]) * n[1] * n[2];
    }

    double cell_volume() const {
        double v = 1.0;
        for (int a = 0; a < dim; ++a) v *= spacing(a);
        return v;
    }

    double volume() const {
        double v = 1.0;
        for (int a = 0; a < dim; ++a) v *= length[a];
        return v;
    }

    Index3 unravel(std::size_t idx) const {
        Index3 k{0, 0, 0};
        k[2] = static_cast<int>(idx % n[2]);
        idx /= n[2];
        k[1] = static_cast<int>(idx % n[1]);
        k[0] = static_cast<int>(idx / n[1]);
        return k;
    }

    /// Linear index of a node; out-of-range indices wrap periodically.
    std::size_t ravel(const Index3& k) const {
        std::size_t idx = 0;
        for (int a = 0; a < 3; ++a) {
            int i = k[a] % n[a];
            if (i < 0) i += n[a];
            idx = idx * n[a] + static_cast<std::size_t>(i);
        }
        return idx;
    }

    Point3 position(const Index3& k) const {
        Point3 x{0.0, 0.0, 0.0};
        for (int a = 0; a < dim; ++a) x[a] = k[a] * spacing(a);
        return x;
    }

    Point3 position(std::size_t idx) const { return position(unravel(idx)); }

    bool operator==(const Grid& o) const {
        return dim == o.dim && n == o.n && length == o.length;
    }
};

/// Periodic neighbour lookup with precomputed wrap tables, valid for offsets
/// with |k[a]| < n[a].
class PeriodicIndexer {
public:
    explicit PeriodicIndexer(const Grid& g) : grid_(g) {
        for (int a = 0; a < 3; ++a) {
            const int na = g.n[a];
            wrap_[a].resize(static_cast<std::size_t>(3 * na));
            for (int i = -na; i < 2 * na; ++i) wrap_[a][i + na] = ((i % na) + na) % na;
        }
    }

    std::size_t operator()(const Index3& base, const Offset& off) const {
        const int i0 = wrap_[0][base[0] + off[0] + grid_.n[0]];
        const int i1 = wrap_[1][base[1] + off[1] + grid_.n[1]];
        const int i2 = wrap_[2][base[2] + off[2] + grid_.n[2]];
        return (static_cast<std::size_t>(i0) * grid_.n[1] + i1) * grid_.n[2] + i2;
    }

private:
    Grid grid_;
    std::array<std::vector<int>, 3> wrap_;
};

/// Periodic m-component field sampled on a Grid. Samples are stored node by
/// node with components fastest-varying, nodes in row-major order.
class GridField {
public:
    GridField() = default;

    GridField(Grid grid, int components, std::vector<double> data)
        : grid_(grid), m_(components), data_(std::move(data)) {
        if (m_ < 1) throw PreconditionError("field: component count must be >= 1");
        if (data_.size() != grid_.size() * static_cast<std::size_t>(m_))
            throw PreconditionError("field: data length does not match grid size times components");
        for (std::size_t i = 0; i < data_.size(); ++i) {
            if (!std::isfinite(data_[i]))
                throw PreconditionError("field: non-finite sample at node " +
                                        std::to_string(i / m_) + " component " +
                                        std::to_string(i % m_));
        }
    }

    static GridField zeros(const Grid& grid, int components) {
        return GridField(grid, components,
                         std::vector<double>(grid.size() * static_cast<std::size_t>(components), 0.0));
    }

    static GridField constant(const Grid& grid, std::span<const double> value) {
        std::vector<double> d(grid.size() * value.size());
        for (std::size_t i = 0; i < grid.size(); ++i)
            std::copy(value.begin(), value.end(), d.begin() + static_cast<std::ptrdiff_t>(i * value.size()));
        return GridField(grid, static_cast<int>(value.size()), std::move(d));
    }

    const Grid& grid() const { return grid_; }
    int components() const { return m_; }
    int dim() const { return grid_.dim; }
    std::size_t nodes() const { return grid_.size(); }

    std::span<const double> data() const { return data_; }
    double operator()(std::size_t node, int c) const { return data_[node * m_ + c]; }
    std::span<const double> at(std::size_t node) const {
        return {data_.data() + node * m_, static_cast<std::size_t>(m_)};
    }

    GridField component(int c) const {
        std::vector<double> d(nodes());
        for (std::size_t i = 0; i < nodes(); ++i) d[i] = (*this)(i, c);
        return GridField(grid_, 1, std::move(d));
    }

    bool same_shape(const GridField& o) const { return grid_ == o.grid_ && m_ == o.m_; }

private:
    Grid grid_;
    int m_ = 1;
    std::vector<double> data_;
};

/// Sequence of snapshots of one field at strictly increasing times.
class TimeSeriesField {
public:
    TimeSeriesField(std::vector<double> times, std::vector<GridField> snapshots)
        : times_(std::move(times)), snapshots_(std::move(snapshots)) {
        if (times_.empty() || times_.size() != snapshots_.size())
            throw PreconditionError("time series: need one snapshot per time, at least one");
        for (std::size_t i = 1; i < times_.size(); ++i) {
            if (!(times_[i] > times_[i - 1]))
                throw PreconditionError("time series: times must be strictly increasing");
            if (!snapshots_[i].same_shape(snapshots_[0]))
                throw PreconditionError("time series: snapshots differ in shape");
        }
    }

    explicit TimeSeriesField(GridField still) : TimeSeriesField({0.0}, {std::move(still)}) {}

    std::span<const double> times() const { return times_; }
    const GridField& snapshot(std::size_t i) const { return snapshots_[i]; }
    std::size_t size() const { return times_.size(); }
    const Grid& grid() const { return snapshots_[0].grid(); }
    int components() const { return snapshots_[0].components(); }

private:
    std::vector<double> times_;
    std::vector<GridField> snapshots_;
};

/// Samples f at every node: f(x, out) writes the m components at position x.
template <class F>
GridField sample_function(const Grid& grid, int components, F&& f) {
    if (components < 1) throw PreconditionError("sample_function: component count must be >= 1");
    std::vector<double> d(grid.size() * static_cast<std::size_t>(components));
    for (std::size_t i = 0; i < grid.size(); ++i) {
        std::span<double> out(d.data() + i * components, static_cast<std::size_t>(components));
        f(grid.position(i), out);
        for (int c = 0; c < components; ++c) {
            if (!std::isfinite(out[c])) {
                const Index3 k = grid.unravel(i);
                throw PreconditionError("sample_function: non-finite value at node (" +
                                        std::to_string(k[0]) + "," + std::to_string(k[1]) + "," +
                                        std::to_string(k[2]) + ") component " + std::to_string(c));
            }
        }
    }
    return GridField(grid, components, std::move(d));
}

inline void check_offset(const Grid& g, const Offset& k) {
    for (int a = 0; a < 3; ++a) {
        if (a >= g.dim && k[a] != 0)
            throw PreconditionError("offset has a component beyond the grid dimension");
        if (std::abs(k[a]) >= g.n[a])
            throw PreconditionError("offset exceeds grid extent on axis " + std::to_string(a));
    }
}

/// delta_k u(x) = u(x + k h) - u(x), periodic.
inline GridField increment(const GridField& u, const Offset& k) {
    const Grid& g = u.grid();
    check_offset(g, k);
    const PeriodicIndexer nb(g);
    const int m = u.components();
    std::vector<double> d(u.data().size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        const std::size_t j = nb(g.unravel(i), k);
        for (int c = 0; c < m; ++c) d[i * m + c] = u(j, c) - u(i, c);
    }
    return GridField(g, m, std::move(d));
}

/// Euclidean magnitude over components at one node.
inline double magnitude(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

/// L^p norm with cell-volume quadrature; p = infinity gives the max norm.
inline double lp_norm(const GridField& u, double p) {
    if (!(p >= 1.0)) throw PreconditionError("lp_norm: exponent must be >= 1");
    if (std::isinf(p)) {
        double mx = 0.0;
        for (std::size_t i = 0; i < u.nodes(); ++i) mx = std::max(mx, magnitude(u.at(i)));
        return mx;
    }
    double s = 0.0;
    for (std::size_t i = 0; i < u.nodes(); ++i) s += std::pow(magnitude(u.at(i)), p);
    return std::pow(s * u.grid().cell_volume(), 1.0 / p);
}

inline double max_abs(const GridField& u) {
    double mx = 0.0;
    for (double v : u.data()) mx = std::max(mx, std::abs(v));
    return mx;
}

inline double mean(const GridField& u, int c) {
    double s = 0.0;
    for (std::size_t i = 0; i < u.nodes(); ++i) s += u(i, c);
    return s / static_cast<double>(u.nodes());
}

// Pointwise arithmetic.

inline GridField linear_combination(double alpha, const GridField& a, double beta, const GridField& b) {
    if (!a.same_shape(b)) throw PreconditionError("linear_combination: shape mismatch");
    std::vector<double> d(a.data().size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = alpha * a.data()[i] + beta * b.data()[i];
    return GridField(a.grid(), a.components(), std::move(d));
}

inline GridField operator+(const GridField& a, const GridField& b) { return linear_combination(1.0, a, 1.0, b); }
inline GridField operator-(const GridField& a, const GridField& b) { return linear_combination(1.0, a, -1.0, b); }

inline GridField scaled(const GridField& a, double alpha) {
    std::vector<double> d(a.data().begin(), a.data().end());
    for (double& v : d) v *= alpha;
    return GridField(a.grid(), a.components(), std::move(d));
}

/// Adds a constant vector to every node.
inline GridField shifted(const GridField& a, std::span<const double> c) {
    if (c.size() != static_cast<std::size_t>(a.components()))
        throw PreconditionError("shifted: constant has wrong component count");
    std::vector<double> d(a.data().begin(), a.data().end());
    const int m = a.components();
    for (std::size_t i = 0; i < a.nodes(); ++i)
        for (int k = 0; k < m; ++k) d[i * m + k] += c[k];
    return GridField(a.grid(), m, std::move(d));
}

/// Pointwise product of two scalar fields.
inline GridField product(const GridField& a, const GridField& b) {
    if (!a.same_shape(b) || a.components() != 1) throw PreconditionError("product: expects matching scalar fields");
    std::vector<double> d(a.data().size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = a.data()[i] * b.data()[i];
    return GridField(a.grid(), 1, std::move(d));
}

} // namespace onsager
