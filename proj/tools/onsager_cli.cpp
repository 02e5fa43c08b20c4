// Command-line front end: field generation, flux sweeps, traces, norms and
// the density-mechanism table.

#include <algorithm>
#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "onsager/flux.hpp"
#include "onsager/norms.hpp"
#include "onsager/onsf.hpp"
#include "onsager/pressure.hpp"
#include "onsager/synth.hpp"
#include "onsager/traces.hpp"

namespace {

using namespace onsager;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitValidation = 2;

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Writes `text` to `path`, or to stdout when the path is empty or "-".
void emit(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        std::cout.flush();
        return;
    }
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw FormatError(FormatError::Kind::Io, "cannot open " + path + " for writing");
    f << text;
    if (!f) throw FormatError(FormatError::Kind::Io, "write failed for " + path);
}

/// Physical scales from explicit values or from multiples of the largest spacing.
std::vector<double> resolve_scales(const Grid& g, const std::vector<double>& physical, const std::vector<int>& in_h,
                                   const std::vector<double>& fallback) {
    if (!physical.empty() && !in_h.empty()) throw PreconditionError("give scales either physically or in units of h");
    if (!physical.empty()) return physical;
    if (in_h.empty()) return fallback;
    std::vector<double> out;
    for (int k : in_h) out.push_back(k * g.max_spacing());
    return out;
}

/// Dyadic ell = 2h, 4h, ... with 2 ell < min L.
std::vector<double> dyadic_scales(const Grid& g) {
    std::vector<double> out;
    for (double l = 2.0 * g.max_spacing(); 2.0 * l < g.min_length(); l *= 2.0) out.push_back(l);
    return out;
}

std::vector<Offset> parse_directions(const std::string& text, int dim) {
    std::vector<Offset> out;
    std::stringstream groups(text);
    std::string group;
    while (std::getline(groups, group, ';')) {
        Offset o{0, 0, 0};
        std::stringstream parts(group);
        std::string part;
        int a = 0;
        while (std::getline(parts, part, ',')) {
            if (a >= dim) throw PreconditionError("direction '" + group + "' has more than d components");
            o[a++] = std::stoi(part);
        }
        if (a != dim) throw PreconditionError("direction '" + group + "' needs d components");
        out.push_back(o);
    }
    return out;
}

struct GenArgs {
    FieldSpec spec;
    int n = 64;
    double length = 1.0;
    std::string out = "field.onsf";
    std::string p_out;
    std::optional<int> levels;
};

int run_gen(GenArgs a) {
    const Grid g = Grid::square(a.n, a.length);
    // without --levels, take the finest lacunary level the grid resolves (at most 5)
    int resolved = 0;
    while ((8 << resolved) <= a.n && resolved < 5) ++resolved;
    a.spec.levels = a.levels.value_or(resolved);
    const FieldPair f = generate(a.spec, g);
    onsf::write_field(a.out, f.u);
    std::string p_path;
    if (f.p) {
        p_path = a.p_out;
        if (p_path.empty()) {
            const auto dot = a.out.rfind(".onsf");
            p_path = (dot == std::string::npos ? a.out : a.out.substr(0, dot)) + ".p.onsf";
        }
        if (p_path == a.out) throw PreconditionError("gen: u and p paths must differ");
        onsf::write_field(p_path, *f.p);
    }
    const SolutionCheck chk = check_solution(f.u, f.p);
    const std::string kind = canonical_kind(a.spec.kind);
    json params = json::object();
    if (kind == "shear_layer" || kind == "vortex_sheet" || kind == "burgers_shock") {
        params["a"] = a.spec.a;
        params["b"] = a.spec.b;
        params["w"] = kind == "vortex_sheet" ? 0.0 : a.spec.w;
    }
    if (kind == "weierstrass" || kind == "random_fourier") params["theta"] = a.spec.theta;
    if (kind == "weierstrass") params["levels"] = a.spec.levels;
    json prov = {{"kind", kind},
                 {"n", a.n},
                 {"L", a.length},
                 {"params", params},
                 {"seed", a.spec.seed},
                 {"u_path", a.out},
                 {"p_path", p_path.empty() ? json(nullptr) : json(p_path)},
                 {"divergence_residual", chk.divergence_residual},
                 {"momentum_residual", chk.momentum_residual},
                 {"pressure", chk.leray_pressure ? "leray" : "generator"},
                 {"exact_solution", f.exact_solution},
                 {"warnings", f.warnings}};
    std::cout << prov.dump() << "\n";
    return kExitOk;
}

struct SweepArgs {
    std::string u, p, out, format = "csv", kernel = "bump";
    std::vector<double> scales;
    std::vector<int> scales_h;
    int drop_largest = 2, drop_smallest = 1;
};

int run_sweep(const SweepArgs& a) {
    const GridField u = onsf::read_field(a.u);
    std::optional<GridField> p;
    if (!a.p.empty()) p = onsf::read_field(a.p);
    const auto scales = resolve_scales(u.grid(), a.scales, a.scales_h, dyadic_scales(u.grid()));
    const SweepResult r = sweep(u, p, parse_profile(a.kernel), scales, FitWindow{a.drop_largest, a.drop_smallest});
    const std::string flag = r.solution.nonsolution ? "true" : "false";
    std::string text;
    if (a.format == "json") {
        json j;
        j["kernel"] = to_string(r.kernel);
        j["nonsolution_flag"] = r.solution.nonsolution;
        j["divergence_residual"] = r.solution.divergence_residual;
        j["momentum_residual"] = r.solution.momentum_residual;
        j["pressure"] = r.solution.leray_pressure ? "leray" : "supplied";
        j["rows"] = json::array();
        for (std::size_t i = 0; i < r.scales.size(); ++i)
            j["rows"].push_back({{"ell", r.scales[i]},
                                 {"l1_dr", r.l1_dr[i]},
                                 {"l1_cet", r.l1_cet[i]},
                                 {"l1_balance", r.l1_balance ? json(*r.l1_balance) : json(nullptr)}});
        auto fit = [](const std::optional<PowerLawFit>& f) {
            return f ? json{{"slope", f->slope}, {"intercept", f->intercept}, {"r2", f->r2}} : json(nullptr);
        };
        j["fit"] = {{"dr", fit(r.fit_dr)}, {"cet", fit(r.fit_cet)}};
        j["fit_scales"] = std::vector<double>(r.scales.begin() + static_cast<std::ptrdiff_t>(r.fit_first),
                                              r.scales.begin() + static_cast<std::ptrdiff_t>(r.fit_last));
        j["notes"] = r.notes;
        text = j.dump(2) + "\n";
    } else {
        text = "ell,l1_dr,l1_cet,l1_balance,kernel,nonsolution_flag\n";
        for (std::size_t i = 0; i < r.scales.size(); ++i)
            text += num(r.scales[i]) + "," + num(r.l1_dr[i]) + "," + num(r.l1_cet[i]) + "," +
                    (r.l1_balance ? num(*r.l1_balance) : "") + "," + to_string(r.kernel) + "," + flag + "\n";
        text += "\nvariant,slope,intercept,r2\n";
        auto line = [&](const char* name, const std::optional<PowerLawFit>& f) {
            text += std::string(name) + "," + (f ? num(f->slope) + "," + num(f->intercept) + "," + num(f->r2) : ",,") +
                    "\n";
        };
        line("dr", r.fit_dr);
        line("cet", r.fit_cet);
    }
    emit(a.out, text);
    for (const auto& n : r.notes) std::cerr << "note: " << n << "\n";
    return kExitOk;
}

struct FluxArgs {
    std::string u, p, out, variant = "dr", kernel = "bump";
    double scale = 0.0;
    int scale_h = 0;
};

int run_flux(const FluxArgs& a) {
    const GridField u = onsf::read_field(a.u);
    std::optional<FluxField> F;
    if (a.variant == "balance") {
        if (a.p.empty()) throw PreconditionError("flux: the balance form needs --p");
        F = balance_flux(u, onsf::read_field(a.p));
    } else {
        const double l = a.scale_h > 0 ? a.scale_h * u.grid().max_spacing() : a.scale;
        const DiscreteKernel K = build_discrete_kernel(parse_profile(a.kernel), l, u.grid());
        if (a.variant == "dr")
            F = flux_dr(u, K);
        else if (a.variant == "cet")
            F = flux_cet(u, K);
        else
            throw PreconditionError("flux: unknown variant '" + a.variant + "'");
    }
    if (!a.out.empty()) onsf::write_field(a.out, F->values);
    json j = {{"variant", to_string(F->variant)},
              {"ell", F->scale ? json(*F->scale) : json(nullptr)},
              {"kernel", F->kernel ? json(to_string(*F->kernel)) : json(nullptr)},
              {"l1", F->l1()},
              {"integral", F->integral()},
              {"max_abs", max_abs(F->values)}};
    std::cout << j.dump() << "\n";
    return kExitOk;
}

struct TraceArgs {
    std::vector<std::string> u, p;
    std::vector<double> times;
    std::string out;
    int axis = 1;
    double position = 0.5, orientation = 1.0, speed = 0.0, t0 = 0.0;
    std::vector<double> radii;
    std::vector<int> radii_h{8, 4, 2};
    double cauchy_tol = 1e-8, tol_n = 1e-8, tol_u = 1e-8;
    bool mirrored = false;
};

TimeSeriesField load_series(const std::vector<std::string>& paths, std::vector<double> times, double t0) {
    std::vector<GridField> snaps;
    for (const auto& p : paths) snaps.push_back(onsf::read_field(p));
    if (times.empty()) {
        if (snaps.size() != 1) throw PreconditionError("trace: several snapshots need --times");
        times = {t0};
    }
    return TimeSeriesField(std::move(times), std::move(snaps));
}

int run_trace(const TraceArgs& a) {
    const TimeSeriesField u = load_series(a.u, a.times, a.t0);
    std::optional<TimeSeriesField> p;
    if (!a.p.empty()) p = load_series(a.p, a.times, a.t0);
    const Grid& g = u.grid();
    if (a.axis < 0 || a.axis >= g.dim) throw PreconditionError("trace: axis out of range");
    const Interface I = Interface::axis_plane(g.dim, a.axis, a.position, a.orientation, a.speed);
    TraceOptions opt;
    opt.radii = a.radii.empty() ? resolve_scales(g, {}, a.radii_h, {}) : a.radii;
    opt.cauchy_tol = a.cauchy_tol;
    opt.t0 = a.t0;
    JumpReport rep = compute_jump_report(u, p, I, opt, a.mirrored);
    classify_points(rep, a.tol_n, a.tol_u);
    json samples = json::array();
    for (const JumpSample& s : rep.samples) {
        samples.push_back({{"point", std::vector<double>(s.base.begin(), s.base.begin() + g.dim)},
                           {"u_plus", s.u_plus},
                           {"u_minus", s.u_minus},
                           {"p_plus", s.p_plus},
                           {"p_minus", s.p_minus},
                           {"R_inc", s.r_inc},
                           {"R_mom", s.r_mom},
                           {"R_p", s.r_p},
                           {"D_sigma", s.d_sigma},
                           {"class", to_string(s.cls)},
                           {"converged", s.converged}});
    }
    json j = {{"interface",
               {{"normal", std::vector<double>(I.normal().begin(), I.normal().begin() + g.dim)},
                {"offset", I.offset()},
                {"speed", I.speed()},
                {"n_x", std::vector<double>(rep.n_x.begin(), rep.n_x.begin() + g.dim)},
                {"n_t", rep.n_t}}},
              {"radii", detail::checked_trace_radii(g, opt.radii)},
              {"pressure", p ? "supplied" : "zero"},
              {"mirrored", rep.mirrored},
              {"aggregates",
               {{"R_inc", rep.agg_inc}, {"R_p", rep.agg_p}, {"R_mom", rep.agg_mom}, {"D_sigma_total", rep.agg_dsigma}}},
              {"converged", rep.converged_count},
              {"samples_total", rep.samples.size()},
              {"samples", samples}};
    emit(a.out, j.dump(2) + "\n");
    return rep.all_converged() ? kExitOk : kExitValidation;
}

struct NormsArgs {
    std::string u, out, kind = "all";
    std::vector<int> radii_h{2, 4, 8};
    std::vector<int> eps_h{2, 4, 8};
    double alpha = 1.0 / 3.0, p = 3.0;
    int bmo_p = 1;
    std::string directions;
};

int run_norms(const NormsArgs& a) {
    const GridField u = onsf::read_field(a.u);
    const Grid& g = u.grid();
    const auto radii = resolve_scales(g, {}, a.radii_h, {});
    std::string text = "kind,scale,value\n";
    auto rows = [&](const NormReport& r, const std::string& kind) {
        for (std::size_t i = 0; i < r.values.size(); ++i) text += kind + "," + num(r.scales[i]) + "," + num(r.values[i]) + "\n";
    };
    const bool all = a.kind == "all";
    bool known = all;
    if (all || a.kind == "bmo") {
        known = true;
        const NormReport r = bmo_norm(u, radii, a.bmo_p);
        rows(r, r.kind);
        text += r.kind + "_sup,," + num(r.sup) + "\n";
    }
    if (all || a.kind == "vmo") {
        known = true;
        const NormReport r = vmo_modulus(u, radii);
        rows(r, r.kind);
        if (r.exponent) text += "vmo_exponent,," + num(*r.exponent) + "\n";
        text += std::string("vmo_vanishing,,") + (*r.verdict ? "1" : "0") + "\n";
    }
    if (all || a.kind == "besov") {
        known = true;
        const NormReport r = besov_seminorm(u, a.alpha, a.p, radii);
        rows(r, r.kind);
        text += "besov_sup,," + num(r.sup) + "\n";
        if (r.exponent) text += "besov_increment_exponent,," + num(*r.exponent) + "\n";
    }
    if ((all || a.kind == "bd") && u.components() == g.dim) {
        known = true;
        const std::string dirs = a.directions.empty() ? (g.dim == 2 ? "1,0;0,1;1,1" : "1,0,0;0,1,0;0,0,1;1,1,0")
                                                      : a.directions;
        const auto d = parse_directions(dirs, g.dim);
        // eps must be a multiple of |dir h| for every direction: use multiples of each step length
        for (const Offset& dir : d) {
            double step = 0.0;
            for (int ax = 0; ax < g.dim; ++ax) step += std::pow(dir[ax] * g.spacing(ax), 2);
            step = std::sqrt(step);
            std::vector<double> eps;
            for (int k : a.eps_h) eps.push_back(k * step);
            const BdReport r = bd_longitudinal(u, eps, {dir});
            // the label joins components with ',' which would split the CSV row
            std::string tag = "[" + direction_label(dir, g.dim) + "]";
            std::replace(tag.begin(), tag.end(), ',', ' ');
            for (std::size_t i = 0; i < r.longitudinal.values.size(); ++i) {
                text += "bd_longitudinal" + tag + "," + num(r.longitudinal.scales[i]) + "," +
                        num(r.longitudinal.values[i]) + "\n";
                text += "bd_transverse" + tag + "," + num(r.longitudinal.scales[i]) + "," + num(r.transverse[i]) + "\n";
            }
        }
    }
    if (!known) throw PreconditionError("norms: unknown kind '" + a.kind + "'");
    emit(a.out, text);
    return kExitOk;
}

struct DensityArgs {
    std::string u, out, kernel = "bump";
    std::vector<int> deltas_h{32, 16, 8};
    std::vector<int> ells_h{16, 8, 4};
};

int run_density(const DensityArgs& a) {
    const GridField u = onsf::read_field(a.u);
    const Grid& g = u.grid();
    const auto rows = density_mechanism(u, parse_profile(a.kernel), resolve_scales(g, {}, a.deltas_h, {}),
                                        resolve_scales(g, {}, a.ells_h, {}));
    std::string text = "delta,ell,t_full,t_smooth_leg,t_remainder\n";
    double worst = 0.0;
    for (const DensityRow& r : rows) {
        text += num(r.delta) + "," + num(r.ell) + "," + num(r.t_full) + "," + num(r.t_smooth_leg) + "," +
                num(r.t_remainder) + "\n";
        worst = std::max(worst, r.telescoping_error);
    }
    emit(a.out, text);
    if (worst > 1e-12) {
        std::cerr << "telescoping identity violated: relative defect " << worst << "\n";
        return kExitValidation;
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Energy-flux, critical-norm and interface-trace analysis of periodic velocity fields"};
    app.require_subcommand(1);

    GenArgs gen;
    auto* c_gen = app.add_subcommand("gen", "generate a synthetic field as ONSF");
    c_gen->add_option("--kind", gen.spec.kind,
                      "taylor-green | shear | sheet | weier | random | burgers")->required();
    c_gen->add_option("--n", gen.n, "samples per axis")->check(CLI::Range(4, 1 << 14));
    c_gen->add_option("--L", gen.length, "box side length");
    c_gen->add_option("--a", gen.spec.a, "left/lower state (shear a, burgers u_L)");
    c_gen->add_option("--b", gen.spec.b, "right/upper state (shear b, burgers u_R)");
    c_gen->add_option("--w", gen.spec.w, "transition width (0 = sharp)");
    c_gen->add_option("--theta", gen.spec.theta, "Hoelder exponent in (0,1)");
    c_gen->add_option("--levels", gen.levels, "lacunary series top level N (default: finest resolved, at most 5)");
    c_gen->add_option("--seed", gen.spec.seed, "random seed");
    c_gen->add_option("--out", gen.out, "velocity output path");
    c_gen->add_option("--p-out", gen.p_out, "pressure output path (default <out>.p.onsf)");

    SweepArgs sw;
    auto* c_sweep = app.add_subcommand("sweep", "flux L1 norms over scales with power-law fits");
    c_sweep->add_option("--u", sw.u, "velocity ONSF")->required();
    c_sweep->add_option("--p", sw.p, "pressure ONSF (enables l1_balance)");
    c_sweep->add_option("--kernel", sw.kernel, "bump | quartic");
    c_sweep->add_option("--scales", sw.scales, "physical scales")->delimiter(',');
    c_sweep->add_option("--scales-h", sw.scales_h, "scales as multiples of h")->delimiter(',');
    c_sweep->add_option("--fit-drop-largest", sw.drop_largest, "largest scales excluded from fits");
    c_sweep->add_option("--fit-drop-smallest", sw.drop_smallest, "smallest scales excluded from fits");
    c_sweep->add_option("--format", sw.format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
    c_sweep->add_option("--out", sw.out, "report path (default stdout)");

    FluxArgs fx;
    auto* c_flux = app.add_subcommand("flux", "pointwise flux field at one scale");
    c_flux->add_option("--u", fx.u, "velocity ONSF")->required();
    c_flux->add_option("--p", fx.p, "pressure ONSF (balance form)");
    c_flux->add_option("--variant", fx.variant, "dr | cet | balance");
    c_flux->add_option("--kernel", fx.kernel, "bump | quartic");
    c_flux->add_option("--scale", fx.scale, "physical scale");
    c_flux->add_option("--scale-h", fx.scale_h, "scale as a multiple of h");
    c_flux->add_option("--out", fx.out, "flux field ONSF output");

    TraceArgs tr;
    auto* c_trace = app.add_subcommand("trace", "one-sided traces and jump residuals on a plane");
    c_trace->add_option("--u", tr.u, "velocity ONSF (several with --times)")->required();
    c_trace->add_option("--p", tr.p, "pressure ONSF (default p = 0)");
    c_trace->add_option("--times", tr.times, "snapshot times")->delimiter(',');
    c_trace->add_option("--axis", tr.axis, "normal axis (0-based)");
    c_trace->add_option("--position", tr.position, "plane coordinate at t0");
    c_trace->add_option("--orientation", tr.orientation, "+1 or -1");
    c_trace->add_option("--speed", tr.speed, "normal speed");
    c_trace->add_option("--t0", tr.t0, "sampling time");
    c_trace->add_option("--radii", tr.radii, "physical radii")->delimiter(',');
    c_trace->add_option("--radii-h", tr.radii_h, "radii as multiples of h")->delimiter(',');
    c_trace->add_option("--cauchy-tol", tr.cauchy_tol, "Cauchy tolerance on the smallest radius pair");
    c_trace->add_option("--tol-n", tr.tol_n, "classification tolerance on |n_x|");
    c_trace->add_option("--tol-u", tr.tol_u, "classification tolerance on |u.n_x|");
    c_trace->add_flag("--mirrored", tr.mirrored, "double aggregates for the mirrored twin interface");
    c_trace->add_option("--out", tr.out, "report path (default stdout)");

    NormsArgs nm;
    auto* c_norms = app.add_subcommand("norms", "BMO, VMO, Besov and BD estimates");
    c_norms->add_option("--u", nm.u, "field ONSF")->required();
    c_norms->add_option("--kind", nm.kind, "bmo | vmo | besov | bd | all");
    c_norms->add_option("--radii-h", nm.radii_h, "radii / scales as multiples of h")->delimiter(',');
    c_norms->add_option("--eps-h", nm.eps_h, "BD eps as multiples of the direction step")->delimiter(',');
    c_norms->add_option("--alpha", nm.alpha, "Besov smoothness");
    c_norms->add_option("--p", nm.p, "Besov integrability");
    c_norms->add_option("--bmo-p", nm.bmo_p, "BMO exponent variant (1, 2, 3)");
    c_norms->add_option("--directions", nm.directions, "lattice directions, e.g. \"1,0;1,1\"");
    c_norms->add_option("--out", nm.out, "report path (default stdout)");

    DensityArgs dn;
    auto* c_density = app.add_subcommand("density", "smooth-leg / remainder split of the DR trilinear form");
    c_density->add_option("--u", dn.u, "velocity ONSF")->required();
    c_density->add_option("--kernel", dn.kernel, "bump | quartic");
    c_density->add_option("--deltas-h", dn.deltas_h, "smoothing scales as multiples of h")->delimiter(',');
    c_density->add_option("--ells-h", dn.ells_h, "flux scales as multiples of h")->delimiter(',');
    c_density->add_option("--out", dn.out, "report path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*c_gen) return run_gen(gen);
        if (*c_sweep) return run_sweep(sw);
        if (*c_flux) return run_flux(fx);
        if (*c_trace) return run_trace(tr);
        if (*c_norms) return run_norms(nm);
        if (*c_density) return run_density(dn);
    } catch (const ConvergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
