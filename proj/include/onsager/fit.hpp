#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "onsager/error.hpp"

namespace onsager {

struct PowerLawFit {
    double slope = 0.0;
    double intercept = 0.0; // log(value) at log(scale) = 0
    double r2 = 0.0;
    std::size_t points = 0;
};

/// Least-squares line through (log x, log y). Requires >= 2 positive points.
/// A perfect fit (including constant data) has r2 = 1.
inline PowerLawFit fit_power_law(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw PreconditionError("fit_power_law: size mismatch");
    if (x.size() < 2) throw PreconditionError("fit_power_law: needs at least 2 points");
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0))
            throw PreconditionError("fit_power_law: log-log fit needs positive data");
        lx.push_back(std::log(x[i]));
        ly.push_back(std::log(y[i]));
    }
    const double n = static_cast<double>(lx.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
        syy += (ly[i] - my) * (ly[i] - my);
    }
    if (sxx == 0.0) throw PreconditionError("fit_power_law: scales must be distinct");
    PowerLawFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double sse = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        const double r = ly[i] - (f.intercept + f.slope * lx[i]);
        sse += r * r;
    }
    f.r2 = syy <= 1e-300 ? 1.0 : 1.0 - sse / syy;
    f.points = lx.size();
    return f;
}

/// Which scales of a decreasing list enter a fit: the `drop_largest` largest
/// and `drop_smallest` smallest are excluded. When fewer than 3 scales would
/// remain the window is widened to all scales.
struct FitWindow {
    int drop_largest = 2;
    int drop_smallest = 1;

    static FitWindow all() { return {0, 0}; }

    /// [first, last) range into a list of `count` scales sorted decreasing.
    std::pair<std::size_t, std::size_t> range(std::size_t count) const {
        const std::size_t lo = static_cast<std::size_t>(std::max(drop_largest, 0));
        const std::size_t cut = static_cast<std::size_t>(std::max(drop_smallest, 0));
        if (lo + cut + 3 > count) return {0, count};
        return {lo, count - cut};
    }
};

} // namespace onsager
