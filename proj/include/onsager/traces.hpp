#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "onsager/interface.hpp"
#include "onsager/kernels.hpp"
#include "onsager/spectral.hpp"

namespace onsager {

enum class Side { Plus, Minus };

struct TraceOptions {
    std::vector<double> radii;  // at least two; sorted decreasing internally
    double cauchy_tol = 1e-8;   // bound on |A(r_{K-1}) - A(r_K)| for the smallest pair
    double t0 = 0.0;            // time at which the interface is sampled
};

/// One-sided half-ball averages at one base point.
struct TraceSample {
    Point3 base{0.0, 0.0, 0.0};
    std::vector<double> radii;                // decreasing
    std::vector<std::vector<double>> averages; // one m-vector per radius
    std::vector<double> trace;                // value at the smallest radius
    bool converged = false;
};

namespace detail {

inline std::vector<double> checked_trace_radii(const Grid& g, std::vector<double> radii) {
    if (radii.size() < 2) throw PreconditionError("traces: need at least two radii for the Cauchy test");
    std::sort(radii.begin(), radii.end(), std::greater<>());
    for (std::size_t i = 0; i < radii.size(); ++i) {
        const double r = radii[i];
        if (i > 0 && !(r < radii[i - 1])) throw PreconditionError("traces: radii must be distinct");
        for (int a = 0; a < g.dim; ++a) {
            const double ratio = r / g.spacing(a);
            if (std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio))
                throw PreconditionError("traces: radius " + std::to_string(r) + " is not grid-aligned");
        }
        if (r < 2.0 * g.max_spacing() * (1.0 - 1e-12))
            throw PreconditionError("traces: radius " + std::to_string(r) + " below 2h");
        if (r > 0.25 * g.min_length() * (1.0 + 1e-12))
            throw PreconditionError("traces: radius " + std::to_string(r) + " above L/4");
    }
    return radii;
}

/// Snapshot indices whose times fall within the space-time ball around t0.
inline std::vector<std::size_t> time_window(const TimeSeriesField& data, double t0, double r) {
    std::vector<std::size_t> out;
    const auto t = data.times();
    for (std::size_t j = 0; j < t.size(); ++j)
        if (std::abs(t[j] - t0) <= r * (1.0 + 1e-12)) out.push_back(j);
    return out;
}

inline void check_time_series(const TimeSeriesField& data, const Interface& I, const TraceOptions& opt,
                              const std::vector<double>& radii) {
    if (data.size() == 1) {
        if (I.speed() != 0.0) throw PreconditionError("traces: a moving interface needs a time series");
        return;
    }
    const auto t = data.times();
    const double rmin = radii.back(), rmax = radii.front();
    for (std::size_t j = 1; j < t.size(); ++j)
        if (t[j] - t[j - 1] > 0.25 * rmin * (1.0 + 1e-12))
            throw PreconditionError("traces: snapshot spacing exceeds r/4 for the smallest radius");
    if (opt.t0 - rmax < t.front() - 1e-12 || opt.t0 + rmax > t.back() + 1e-12)
        throw PreconditionError("traces: time series does not cover [t0 - r, t0 + r]");
}

/// Average over the open half-ball on `side` of the space-time normal.
inline std::vector<double> half_ball_average(const TimeSeriesField& data, const Interface& I, Side side,
                                             const Point3& x, double t0, double r) {
    const Grid& g = data.grid();
    const int d = g.dim;
    const int m = data.components();
    const double sign = side == Side::Plus ? 1.0 : -1.0;
    const double tol = 1e-9 * g.min_spacing();
    const Point3& nx = I.n_x();
    std::vector<double> acc(static_cast<std::size_t>(m), 0.0);
    std::size_t count = 0;
    const bool stationary = data.size() == 1;
    std::vector<std::size_t> snaps = stationary ? std::vector<std::size_t>{0} : time_window(data, t0, r);
    for (std::size_t j : snaps) {
        const double dt = stationary ? 0.0 : data.times()[j] - t0;
        const double rho2 = r * r * (1.0 + 1e-12) - dt * dt;
        if (rho2 < 0.0) continue;
        const double rho = std::sqrt(rho2);
        std::array<int, 3> lo{0, 0, 0}, hi{0, 0, 0};
        for (int a = 0; a < d; ++a) {
            lo[a] = static_cast<int>(std::ceil((x[a] - rho) / g.spacing(a) - 1e-9));
            hi[a] = static_cast<int>(std::floor((x[a] + rho) / g.spacing(a) + 1e-9));
        }
        const GridField& f = data.snapshot(j);
        for (int i0 = lo[0]; i0 <= hi[0]; ++i0)
            for (int i1 = lo[1]; i1 <= hi[1]; ++i1)
                for (int i2 = lo[2]; i2 <= hi[2]; ++i2) {
                    const Index3 k{i0, i1, i2};
                    double dist2 = 0.0, s = I.n_t() * dt;
                    for (int a = 0; a < d; ++a) {
                        const double dz = k[a] * g.spacing(a) - x[a];
                        dist2 += dz * dz;
                        s += nx[a] * dz;
                    }
                    if (dist2 > rho2 || sign * s <= tol) continue;
                    const std::size_t n = g.ravel(k);
                    for (int c = 0; c < m; ++c) acc[c] += f(n, c);
                    ++count;
                }
    }
    if (count == 0) throw PreconditionError("traces: empty half-ball (radius too small)");
    for (double& v : acc) v /= static_cast<double>(count);
    return acc;
}

inline double distance(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

} // namespace detail

/// One-sided traces along the interface's base points: half-ball averages per
/// radius, the smallest-radius value as the trace, and a Cauchy flag on the
/// last pair of radii.
inline std::vector<TraceSample> half_ball_trace(const TimeSeriesField& data, const Interface& I, Side side,
                                                const TraceOptions& opt) {
    const Grid& g = data.grid();
    I.check_grid(g);
    const std::vector<double> radii = detail::checked_trace_radii(g, opt.radii);
    detail::check_time_series(data, I, opt, radii);
    std::vector<TraceSample> out;
    for (const Point3& x : I.base_points(g, opt.t0)) {
        TraceSample s;
        s.base = x;
        s.radii = radii;
        for (double r : radii) s.averages.push_back(detail::half_ball_average(data, I, side, x, opt.t0, r));
        s.trace = s.averages.back();
        s.converged = detail::distance(s.averages[s.averages.size() - 2], s.averages.back()) <= opt.cauchy_tol;
        out.push_back(std::move(s));
    }
    return out;
}

inline std::vector<TraceSample> half_ball_trace(const GridField& data, const Interface& I, Side side,
                                                const TraceOptions& opt) {
    return half_ball_trace(TimeSeriesField({opt.t0}, {data}), I, side, opt);
}

enum class SigmaClass { S1, S2, S3 };

inline std::string to_string(SigmaClass c) {
    switch (c) {
    case SigmaClass::S1: return "S1";
    case SigmaClass::S2: return "S2";
    case SigmaClass::S3: return "S3";
    }
    return "?";
}

struct JumpSample {
    Point3 base{0.0, 0.0, 0.0};
    std::vector<double> u_plus, u_minus;
    double p_plus = 0.0, p_minus = 0.0;
    double un_plus = 0.0, un_minus = 0.0;
    double r_inc = 0.0;
    std::vector<double> r_mom;
    double r_p = 0.0;
    double d_sigma = 0.0;
    SigmaClass cls = SigmaClass::S2;
    bool converged = false;
};

struct JumpReport {
    Point3 n_x{0.0, 0.0, 0.0};
    double n_t = 0.0;
    double surface_element = 0.0; // tangential measure per sample
    bool mirrored = false;        // aggregates doubled for the mirrored twin interface
    std::vector<JumpSample> samples;
    double agg_inc = 0.0;     // int |R_inc| dH
    double agg_mom = 0.0;     // int |R_mom| dH
    double agg_p = 0.0;       // int |R_p| dH
    double agg_dsigma = 0.0;  // int |D_Sigma| dH
    std::size_t converged_count = 0;

    bool all_converged() const { return converged_count == samples.size(); }
};

/// Sigma_1: n_x != 0 and u_n != 0 on some side; Sigma_2: n_x != 0, u_n = 0;
/// Sigma_3: n_x = 0.
inline void classify_points(JumpReport& rep, double tol_n = 1e-8, double tol_u = 1e-8) {
    double nx = 0.0;
    for (double v : rep.n_x) nx += v * v;
    nx = std::sqrt(nx);
    for (JumpSample& s : rep.samples) {
        if (!(nx > tol_n))
            s.cls = SigmaClass::S3;
        else if (std::max(std::abs(s.un_plus), std::abs(s.un_minus)) > tol_u)
            s.cls = SigmaClass::S1;
        else
            s.cls = SigmaClass::S2;
    }
}

/// Evaluates traces and every jump residual without enforcing convergence.
/// A missing pressure is taken as p = 0.
inline JumpReport compute_jump_report(const TimeSeriesField& u, const std::optional<TimeSeriesField>& p,
                                      const Interface& I, const TraceOptions& opt, bool mirrored = false) {
    const Grid& g = u.grid();
    const int d = g.dim;
    if (u.components() != d) throw PreconditionError("jump residuals: u must be a vector field with m = d");
    if (p && (p->components() != 1 || !(p->grid() == g) || p->size() != u.size()))
        throw PreconditionError("jump residuals: p must be a scalar series matching u");
    const auto up = half_ball_trace(u, I, Side::Plus, opt);
    const auto um = half_ball_trace(u, I, Side::Minus, opt);
    std::optional<std::vector<TraceSample>> pp, pm;
    if (p) {
        pp = half_ball_trace(*p, I, Side::Plus, opt);
        pm = half_ball_trace(*p, I, Side::Minus, opt);
    }
    JumpReport rep;
    rep.n_x = I.n_x();
    rep.n_t = I.n_t();
    rep.surface_element = I.surface_element(g);
    rep.mirrored = mirrored;
    const double nt = I.n_t();
    for (std::size_t i = 0; i < up.size(); ++i) {
        JumpSample s;
        s.base = up[i].base;
        s.u_plus = up[i].trace;
        s.u_minus = um[i].trace;
        s.converged = up[i].converged && um[i].converged;
        if (p) {
            s.p_plus = (*pp)[i].trace[0];
            s.p_minus = (*pm)[i].trace[0];
            s.converged = s.converged && (*pp)[i].converged && (*pm)[i].converged;
        }
        double ep = 0.0, em = 0.0;
        for (int a = 0; a < d; ++a) {
            s.un_plus += s.u_plus[a] * rep.n_x[a];
            s.un_minus += s.u_minus[a] * rep.n_x[a];
            ep += s.u_plus[a] * s.u_plus[a];
            em += s.u_minus[a] * s.u_minus[a];
        }
        s.r_inc = s.un_plus - s.un_minus;
        s.r_p = s.p_plus - s.p_minus;
        s.r_mom.resize(static_cast<std::size_t>(d));
        for (int a = 0; a < d; ++a) {
            const double mp = s.u_plus[a] * s.un_plus + s.p_plus * rep.n_x[a] + s.u_plus[a] * nt;
            const double mm = s.u_minus[a] * s.un_minus + s.p_minus * rep.n_x[a] + s.u_minus[a] * nt;
            s.r_mom[a] = mp - mm;
        }
        const double vp = (0.5 * ep + s.p_plus) * s.un_plus + 0.5 * ep * nt;
        const double vm = (0.5 * em + s.p_minus) * s.un_minus + 0.5 * em * nt;
        s.d_sigma = vp - vm;
        if (s.converged) ++rep.converged_count;
        rep.samples.push_back(std::move(s));
    }
    const double w = rep.surface_element * (mirrored ? 2.0 : 1.0);
    for (const JumpSample& s : rep.samples) {
        rep.agg_inc += std::abs(s.r_inc) * w;
        rep.agg_mom += magnitude(s.r_mom) * w;
        rep.agg_p += std::abs(s.r_p) * w;
        rep.agg_dsigma += std::abs(s.d_sigma) * w;
    }
    classify_points(rep);
    return rep;
}

inline void require_converged(const JumpReport& rep, double fraction = 0.95) {
    if (static_cast<double>(rep.converged_count) >= fraction * static_cast<double>(rep.samples.size())) return;
    std::string msg = "traces did not converge on " + std::to_string(rep.samples.size() - rep.converged_count) +
                      " of " + std::to_string(rep.samples.size()) + " samples (first failing:";
    int listed = 0;
    for (std::size_t i = 0; i < rep.samples.size() && listed < 5; ++i)
        if (!rep.samples[i].converged) {
            msg += " " + std::to_string(i);
            ++listed;
        }
    throw ConvergenceError(msg + ")");
}

/// Jump residuals of the incompressibility, momentum and pressure legs.
/// Throws ConvergenceError unless at least 95% of samples have Cauchy traces.
inline JumpReport jump_residuals(const TimeSeriesField& u, const std::optional<TimeSeriesField>& p, const Interface& I,
                                 const TraceOptions& opt, bool mirrored = false) {
    JumpReport rep = compute_jump_report(u, p, I, opt, mirrored);
    require_converged(rep);
    return rep;
}

inline JumpReport jump_residuals(const GridField& u, const std::optional<GridField>& p, const Interface& I,
                                 const TraceOptions& opt, bool mirrored = false) {
    std::optional<TimeSeriesField> ps;
    if (p) ps = TimeSeriesField({opt.t0}, {*p});
    return jump_residuals(TimeSeriesField({opt.t0}, {u}), ps, I, opt, mirrored);
}

struct SurfaceDissipation {
    double total = 0.0; // int |D_Sigma| dH (doubled when mirrored)
    std::vector<double> densities;
};

inline SurfaceDissipation surface_dissipation(const GridField& u, const std::optional<GridField>& p,
                                              const Interface& I, const TraceOptions& opt, bool mirrored = false) {
    const JumpReport rep = jump_residuals(u, p, I, opt, mirrored);
    SurfaceDissipation out;
    out.total = rep.agg_dsigma;
    for (const JumpSample& s : rep.samples) out.densities.push_back(s.d_sigma);
    return out;
}

enum class Composition { SquareNorm, NormalProduct };

struct CompositionReport {
    std::vector<double> radii;              // decreasing
    std::vector<double> max_discrepancy;    // per radius, over samples and both sides
    double discrepancy = 0.0;               // at the smallest radius
};

/// Compares the trace of g(V) with g applied to the trace of V, where
/// g(V) = |V|^2/2 or V . n_x.
inline CompositionReport composition_check(const GridField& V, Composition gid, const Interface& I,
                                           const TraceOptions& opt) {
    const Grid& g = V.grid();
    const int m = V.components();
    if (gid == Composition::NormalProduct && m != g.dim)
        throw PreconditionError("composition_check: product with the normal needs m = d");
    const Point3 nx = I.n_x();
    auto apply = [&](std::span<const double> v) {
        double s = 0.0;
        for (int c = 0; c < m; ++c) s += gid == Composition::SquareNorm ? 0.5 * v[c] * v[c] : v[c] * nx[c];
        return s;
    };
    std::vector<double> gv(V.nodes());
    for (std::size_t n = 0; n < V.nodes(); ++n) gv[n] = apply(V.at(n));
    const GridField G(g, 1, std::move(gv));
    CompositionReport rep;
    for (Side side : {Side::Plus, Side::Minus}) {
        const auto tv = half_ball_trace(V, I, side, opt);
        const auto tg = half_ball_trace(G, I, side, opt);
        for (std::size_t i = 0; i < tv.size(); ++i) {
            if (!tv[i].converged)
                throw ConvergenceError("composition_check: trace of V not converged at sample " + std::to_string(i));
            if (rep.radii.empty()) {
                rep.radii = tv[i].radii;
                rep.max_discrepancy.assign(rep.radii.size(), 0.0);
            }
            for (std::size_t k = 0; k < rep.radii.size(); ++k) {
                const double e = std::abs(tg[i].averages[k][0] - apply(tv[i].averages[k]));
                rep.max_discrepancy[k] = std::max(rep.max_discrepancy[k], e);
            }
        }
    }
    rep.discrepancy = rep.max_discrepancy.back();
    return rep;
}

struct BdJumpRow {
    double eps;
    double tube_mass;  // int over |dist| <= eps of |E u_eps|
    double jump_mass;  // int_Sigma |sym((u+ - u-) (x) nu)| dH
    double ratio;
};

/// Tube mass of the mollified symmetric gradient against the jump-part
/// prediction from one-sided traces, per eps.
inline std::vector<BdJumpRow> bd_jump_formula_check(const GridField& u, const Interface& I, std::vector<double> eps,
                                                    const TraceOptions& opt, ProfileId profile = ProfileId::Bump) {
    const Grid& g = u.grid();
    const int d = g.dim;
    if (u.components() != d) throw PreconditionError("bd_jump_formula_check: needs a vector field with m = d");
    if (eps.empty()) throw PreconditionError("bd_jump_formula_check: empty eps list");
    const auto tp = half_ball_trace(u, I, Side::Plus, opt);
    const auto tm = half_ball_trace(u, I, Side::Minus, opt);
    const Point3& nu = I.normal();
    double jump = 0.0;
    for (std::size_t i = 0; i < tp.size(); ++i) {
        if (!tp[i].converged || !tm[i].converged)
            throw ConvergenceError("bd_jump_formula_check: traces not converged at sample " + std::to_string(i));
        double f2 = 0.0;
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b) {
                const double e = 0.5 * ((tp[i].trace[a] - tm[i].trace[a]) * nu[b] + nu[a] * (tp[i].trace[b] - tm[i].trace[b]));
                f2 += e * e;
            }
        jump += std::sqrt(f2) * I.surface_element(g);
    }
    std::sort(eps.begin(), eps.end(), std::greater<>());
    std::vector<BdJumpRow> rows;
    for (double e : eps) {
        const DiscreteKernel K = build_discrete_kernel(profile, e, g);
        const GridField E = sym_gradient(mollify(u, K));
        double tube = 0.0;
        for (std::size_t n = 0; n < g.size(); ++n)
            if (std::abs(I.signed_distance(g, g.position(n), opt.t0)) <= e * (1.0 + 1e-12)) tube += magnitude(E.at(n));
        tube *= g.cell_volume();
        rows.push_back({e, tube, jump, jump > 0.0 ? tube / jump : 0.0});
    }
    return rows;
}

} // namespace onsager
