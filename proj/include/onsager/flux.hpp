#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "onsager/fit.hpp"
#include "onsager/interface.hpp"
#include "onsager/kernels.hpp"
#include "onsager/pressure.hpp"
#include "onsager/spectral.hpp"

namespace onsager {

enum class FluxVariant { DR, CET, Balance };

inline std::string to_string(FluxVariant v) {
    switch (v) {
    case FluxVariant::DR: return "dr";
    case FluxVariant::CET: return "cet";
    case FluxVariant::Balance: return "balance";
    }
    return "?";
}

/// Pointwise flux approximation at one scale. `scale` and `kernel` are unset
/// for the balance form, which involves no mollification.
struct FluxField {
    FluxVariant variant;
    std::optional<double> scale;
    std::optional<ProfileId> kernel;
    GridField values;

    double l1() const { return lp_norm(values, 1.0); }
    double integral() const {
        double s = 0.0;
        for (double v : values.data()) s += v;
        return s * values.grid().cell_volume();
    }
};

namespace detail {

inline void require_vector_fields(std::initializer_list<const GridField*> fs, const char* who) {
    const GridField& first = **fs.begin();
    for (const GridField* f : fs) {
        if (!(f->grid() == first.grid())) throw PreconditionError(std::string(who) + ": fields live on different grids");
        if (f->components() != f->dim()) throw PreconditionError(std::string(who) + ": needs vector fields with m = d");
    }
}

} // namespace detail

/// T_DR[v1,v2,v3](x) = sum_k vol * g_k . (delta_k v1 / 4 ell) (delta_k v2 . delta_k v3).
inline FluxField trilinear_dr(const GridField& v1, const GridField& v2, const GridField& v3, const DiscreteKernel& K) {
    detail::require_vector_fields({&v1, &v2, &v3}, "trilinear_dr");
    K.require_grid(v1.grid(), "trilinear_dr");
    const Grid& g = v1.grid();
    const int d = g.dim;
    const PeriodicIndexer nb(g);
    const auto& offs = K.offsets();
    const auto& grads = K.gradients();
    const double pref = K.quadrature_volume() / (4.0 * K.scale());
    const std::span<const double> a = v1.data(), b = v2.data(), c = v3.data();
    std::vector<double> out(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        const Index3 base = g.unravel(i);
        const double* a0 = a.data() + i * d;
        const double* b0 = b.data() + i * d;
        const double* c0 = c.data() + i * d;
        out[i] = pref * K.symmetric_sum([&](std::size_t k) {
            const std::size_t j = nb(base, offs[k]);
            const double* aj = a.data() + j * d;
            const double* bj = b.data() + j * d;
            const double* cj = c.data() + j * d;
            double gda = 0.0, dbdc = 0.0;
            for (int q = 0; q < d; ++q) {
                gda += grads[k][q] * (aj[q] - a0[q]);
                dbdc += (bj[q] - b0[q]) * (cj[q] - c0[q]);
            }
            return gda * dbdc;
        });
    }
    return {FluxVariant::DR, K.scale(), K.profile(), GridField(g, 1, std::move(out))};
}

/// Duchon-Robert approximation D_DR = T_DR[u,u,u].
inline FluxField flux_dr(const GridField& u, const DiscreteKernel& K) { return trilinear_dr(u, u, u, K); }

/// T_CET[v1,v2,v3] = ((v1)_l (x) (v2)_l - (v1 (x) v2)_l) : grad (v3)_l,
/// with (grad v)_ij = d_j v_i.
inline FluxField trilinear_cet(const GridField& v1, const GridField& v2, const GridField& v3, const DiscreteKernel& K) {
    detail::require_vector_fields({&v1, &v2, &v3}, "trilinear_cet");
    K.require_grid(v1.grid(), "trilinear_cet");
    const Grid& g = v1.grid();
    const int d = g.dim;
    const GridField a = mollify_spectral(v1, K);
    const GridField b = mollify_spectral(v2, K);
    const GridField ab = mollify_spectral(outer(v1, v2), K);
    const GridField grad = spectral_gradient(mollify_spectral(v3, K));
    std::vector<double> out(g.size());
    for (std::size_t n = 0; n < g.size(); ++n) {
        double s = 0.0;
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) s += (a(n, i) * b(n, j) - ab(n, i * d + j)) * grad(n, i * d + j);
        out[n] = s;
    }
    return {FluxVariant::CET, K.scale(), K.profile(), GridField(g, 1, std::move(out))};
}

/// Constantin-E-Titi approximation D_CET = R_l : E u_l, R_l = u_l (x) u_l - (u (x) u)_l.
inline FluxField flux_cet(const GridField& u, const DiscreteKernel& K) {
    detail::require_vector_fields({&u}, "flux_cet");
    K.require_grid(u.grid(), "flux_cet");
    const Grid& g = u.grid();
    const int d = g.dim;
    const GridField ul = mollify_spectral(u, K);
    const GridField uul = mollify_spectral(outer(u, u), K);
    const GridField e = sym_gradient(ul);
    std::vector<double> out(g.size());
    for (std::size_t n = 0; n < g.size(); ++n) {
        double s = 0.0;
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) s += (ul(n, i) * ul(n, j) - uul(n, i * d + j)) * e(n, i * d + j);
        out[n] = s;
    }
    return {FluxVariant::CET, K.scale(), K.profile(), GridField(g, 1, std::move(out))};
}

/// Spectral div((|u|^2/2 + p) u).
inline FluxField balance_flux(const GridField& u, const GridField& p) {
    detail::require_vector_fields({&u}, "balance_flux");
    if (!(p.grid() == u.grid()) || p.components() != 1)
        throw PreconditionError("balance_flux: p must be a scalar field on u's grid");
    const int d = u.dim();
    std::vector<double> q(u.data().size());
    for (std::size_t n = 0; n < u.nodes(); ++n) {
        double e = 0.0;
        for (int c = 0; c < d; ++c) e += u(n, c) * u(n, c);
        const double bern = 0.5 * e + p(n, 0);
        for (int c = 0; c < d; ++c) q[n * d + c] = bern * u(n, c);
    }
    return {FluxVariant::Balance, std::nullopt, std::nullopt, divergence(GridField(u.grid(), d, std::move(q)))};
}

/// Whether (u, p) is a steady incompressible Euler solution with zero forcing.
struct SolutionCheck {
    double divergence_residual = 0.0; // max |div u|
    double momentum_residual = 0.0;   // max |div(u (x) u) + grad p|
    bool leray_pressure = false;      // p was recovered, not supplied
    bool nonsolution = false;

    static constexpr double kTolerance = 1e-4;
};

inline SolutionCheck check_solution(const GridField& u, const std::optional<GridField>& p) {
    SolutionCheck s;
    s.divergence_residual = max_abs(divergence(u));
    s.leray_pressure = !p.has_value();
    const GridField pp = p ? *p : solve_pressure(u);
    s.momentum_residual = max_abs(momentum_residual(u, pp));
    s.nonsolution = s.divergence_residual > SolutionCheck::kTolerance || s.momentum_residual > SolutionCheck::kTolerance;
    return s;
}

/// Flux L1 norms over a list of scales with log-log fits.
struct SweepResult {
    std::vector<double> scales; // strictly decreasing
    std::vector<double> l1_dr;
    std::vector<double> l1_cet;
    std::optional<double> l1_balance;
    ProfileId kernel = ProfileId::Bump;
    SolutionCheck solution;
    std::size_t fit_first = 0, fit_last = 0; // fitted scales: [fit_first, fit_last)
    std::optional<PowerLawFit> fit_dr;
    std::optional<PowerLawFit> fit_cet;
    std::vector<std::string> notes;
};

namespace detail {

inline std::vector<double> sorted_scales(std::vector<double> scales) {
    if (scales.size() < 3) throw PreconditionError("sweep: needs at least 3 scales");
    std::sort(scales.begin(), scales.end(), std::greater<>());
    for (std::size_t i = 1; i < scales.size(); ++i)
        if (!(scales[i] < scales[i - 1])) throw PreconditionError("sweep: scales must be distinct");
    return scales;
}

inline std::optional<PowerLawFit> fit_range(const std::vector<double>& x, const std::vector<double>& y, std::size_t lo,
                                            std::size_t hi, const std::string& name, std::vector<std::string>& notes) {
    std::vector<double> xs(x.begin() + lo, x.begin() + hi), ys(y.begin() + lo, y.begin() + hi);
    for (double v : ys) {
        if (!(v > 0.0)) {
            notes.push_back(name + ": zero norm at some fitted scale, no power law");
            return std::nullopt;
        }
    }
    return fit_power_law(xs, ys);
}

inline void finish_sweep(SweepResult& r, const FitWindow& window) {
    std::tie(r.fit_first, r.fit_last) = window.range(r.scales.size());
    const bool trims = window.drop_largest > 0 || window.drop_smallest > 0;
    if (trims && r.fit_first == 0 && r.fit_last == r.scales.size())
        r.notes.push_back("fit window widened to all " + std::to_string(r.scales.size()) +
                          " scales (too few would remain after trimming)");
    r.fit_dr = fit_range(r.scales, r.l1_dr, r.fit_first, r.fit_last, "dr", r.notes);
    r.fit_cet = fit_range(r.scales, r.l1_cet, r.fit_first, r.fit_last, "cet", r.notes);
}

} // namespace detail

/// Per-scale DR and CET L1 norms of a single snapshot, plus the balance form
/// when p is supplied.
inline SweepResult sweep(const GridField& u, const std::optional<GridField>& p, ProfileId profile,
                         std::vector<double> scales, const FitWindow& window = {}) {
    SweepResult r;
    r.scales = detail::sorted_scales(std::move(scales));
    r.kernel = profile;
    std::vector<DiscreteKernel> ks;
    for (double l : r.scales) ks.push_back(build_discrete_kernel(profile, l, u.grid())); // validate all first
    for (const DiscreteKernel& K : ks) {
        r.l1_dr.push_back(flux_dr(u, K).l1());
        r.l1_cet.push_back(flux_cet(u, K).l1());
    }
    if (p) r.l1_balance = balance_flux(u, *p).l1();
    r.solution = check_solution(u, p);
    if (r.solution.leray_pressure) r.notes.push_back("momentum residual uses the Leray pressure of u");
    detail::finish_sweep(r, window);
    return r;
}

/// Time-series sweep: per-snapshot L1 norms integrated in time by the
/// trapezoid rule (a single snapshot contributes its value unweighted).
/// Mollification is spatial only. Solution residuals are steady residuals,
/// maximized over snapshots.
inline SweepResult sweep(const TimeSeriesField& u, const std::optional<TimeSeriesField>& p, ProfileId profile,
                         std::vector<double> scales, const FitWindow& window = {}) {
    if (p && (p->size() != u.size() || p->components() != 1))
        throw PreconditionError("sweep: pressure series must match the velocity series");
    SweepResult r;
    r.scales = detail::sorted_scales(std::move(scales));
    r.kernel = profile;
    std::vector<DiscreteKernel> ks;
    for (double l : r.scales) ks.push_back(build_discrete_kernel(profile, l, u.grid()));
    const auto t = u.times();
    auto integrate = [&](const std::vector<double>& f) {
        if (f.size() == 1) return f[0];
        double s = 0.0;
        for (std::size_t i = 1; i < f.size(); ++i) s += 0.5 * (f[i] + f[i - 1]) * (t[i] - t[i - 1]);
        return s;
    };
    for (const DiscreteKernel& K : ks) {
        std::vector<double> dr, cet;
        for (std::size_t i = 0; i < u.size(); ++i) {
            dr.push_back(flux_dr(u.snapshot(i), K).l1());
            cet.push_back(flux_cet(u.snapshot(i), K).l1());
        }
        r.l1_dr.push_back(integrate(dr));
        r.l1_cet.push_back(integrate(cet));
    }
    std::vector<double> bal;
    for (std::size_t i = 0; i < u.size(); ++i) {
        std::optional<GridField> pi;
        if (p) {
            pi = p->snapshot(i);
            bal.push_back(balance_flux(u.snapshot(i), *pi).l1());
        }
        const SolutionCheck c = check_solution(u.snapshot(i), pi);
        r.solution.divergence_residual = std::max(r.solution.divergence_residual, c.divergence_residual);
        r.solution.momentum_residual = std::max(r.solution.momentum_residual, c.momentum_residual);
        r.solution.leray_pressure = c.leray_pressure;
        r.solution.nonsolution = r.solution.nonsolution || c.nonsolution;
    }
    if (p) r.l1_balance = integrate(bal);
    if (r.solution.leray_pressure) r.notes.push_back("momentum residual uses the Leray pressure of u");
    detail::finish_sweep(r, window);
    return r;
}

/// sum over nodes within `width` of the plane of |F| * cell volume.
inline double tube_mass(const FluxField& F, const Interface& I, double width, double t = 0.0) {
    const Grid& g = F.values.grid();
    if (width < 2.0 * g.max_spacing() * (1.0 - 1e-12))
        throw PreconditionError("tube_mass: width below 2h resolution");
    I.check_grid(g);
    double s = 0.0;
    for (std::size_t n = 0; n < g.size(); ++n)
        if (std::abs(I.signed_distance(g, g.position(n), t)) <= width * (1.0 + 1e-12)) s += std::abs(F.values(n, 0));
    return s * g.cell_volume();
}

/// One row of the density-mechanism table.
struct DensityRow {
    double delta;
    double ell;
    double t_full;       // ||T[u,u,u]||_1
    double t_smooth_leg; // ||T[u_delta,u,u]||_1
    double t_remainder;  // ||T[u - u_delta,u,u]||_1
    double telescoping_error; // max|T[u,u,u] - T[u_d,u,u] - T[u-u_d,u,u]| / max(1, max|T[u,u,u]|)
};

/// Splits u = u_delta + (u - u_delta) and evaluates the DR trilinear form of
/// each piece in the first slot across the flux scales.
inline std::vector<DensityRow> density_mechanism(const GridField& u, ProfileId profile, std::vector<double> deltas,
                                                 std::vector<double> ells) {
    if (deltas.empty() || ells.empty()) throw PreconditionError("density_mechanism: empty scale list");
    std::sort(deltas.begin(), deltas.end(), std::greater<>());
    std::sort(ells.begin(), ells.end(), std::greater<>());
    std::vector<DiscreteKernel> kd, kl;
    for (double d : deltas) kd.push_back(build_discrete_kernel(profile, d, u.grid()));
    for (double l : ells) kl.push_back(build_discrete_kernel(profile, l, u.grid()));
    std::vector<FluxField> full;
    for (const DiscreteKernel& K : kl) full.push_back(flux_dr(u, K));
    std::vector<DensityRow> rows;
    for (std::size_t a = 0; a < deltas.size(); ++a) {
        const GridField ud = mollify(u, kd[a]);
        const GridField rest = u - ud;
        for (std::size_t b = 0; b < ells.size(); ++b) {
            const FluxField smooth = trilinear_dr(ud, u, u, kl[b]);
            const FluxField remainder = trilinear_dr(rest, u, u, kl[b]);
            const GridField defect = full[b].values - (smooth.values + remainder.values);
            rows.push_back({deltas[a], ells[b], full[b].l1(), smooth.l1(), remainder.l1(),
                            max_abs(defect) / std::max(1.0, max_abs(full[b].values))});
        }
    }
    return rows;
}

} // namespace onsager
