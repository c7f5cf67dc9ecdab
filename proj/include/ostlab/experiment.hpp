#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <numbers>
#include <string>
#include <vector>

#include "json.hpp"

#include "ostlab/config.hpp"
#include "ostlab/constants.hpp"
#include "ostlab/datum.hpp"
#include "ostlab/decay_analysis.hpp"
#include "ostlab/evolution.hpp"
#include "ostlab/kernel.hpp"
#include "ostlab/lwp.hpp"
#include "ostlab/spectral_core.hpp"

namespace ostlab {

using json = nlohmann::ordered_json;

// RFC 4180 table: CRLF line ends, fields quoted when they contain a comma, quote, CR or LF.
struct CsvTable {
    std::string name;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    static std::string num(double v) { return cfg_detail::fmt(v); }

    void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }

    static std::string escape(const std::string& f) {
        if (f.find_first_of(",\"\r\n") == std::string::npos) return f;
        std::string out = "\"";
        for (char c : f) {
            if (c == '"') out += '"';
            out += c;
        }
        return out + "\"";
    }

    std::string str() const {
        std::string out;
        const auto line = [&](const std::vector<std::string>& r) {
            for (std::size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + escape(r[i]);
            out += "\r\n";
        };
        line(header);
        for (const auto& r : rows) line(r);
        return out;
    }
};

struct ExperimentOutcome {
    json results = json::object();
    json checks = json::array();
    std::vector<CsvTable> tables;
    bool pass = true;

    // Records a bounded quantity; only enforced checks affect the verdict.
    bool check(const std::string& name, double value, double lo, double hi, bool enforced = true) {
        const bool ok = std::isfinite(value) && value >= lo && value <= hi;
        json c;
        c["name"] = name;
        c["value"] = value;
        c["lower"] = lo;
        c["upper"] = hi;
        c["pass"] = ok;
        c["enforced"] = enforced;
        checks.push_back(std::move(c));
        if (enforced && !ok) pass = false;
        return ok;
    }
    bool check_flag(const std::string& name, bool ok, bool enforced = true) {
        json c;
        c["name"] = name;
        c["pass"] = ok;
        c["enforced"] = enforced;
        checks.push_back(std::move(c));
        if (enforced && !ok) pass = false;
        return ok;
    }
};

namespace exp_detail {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Runs fn(0..n-1) on up to `jobs` concurrent workers, preserving result order.
template <class F>
auto parallel_map(std::size_t n, unsigned jobs, F fn) -> std::vector<decltype(fn(std::size_t{}))> {
    using R = decltype(fn(std::size_t{}));
    std::vector<R> out;
    out.reserve(n);
    const std::size_t width = std::max(1u, jobs);
    for (std::size_t b = 0; b < n; b += width) {
        std::vector<std::future<R>> batch;
        for (std::size_t i = b; i < std::min(n, b + width); ++i)
            batch.push_back(std::async(width == 1 ? std::launch::deferred : std::launch::async, fn, i));
        for (auto& f : batch) out.push_back(f.get());
    }
    return out;
}

inline std::string label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

inline std::vector<double> geometric(double a, double b, int n) {
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) v[static_cast<std::size_t>(k)] = a * std::pow(b / a, static_cast<double>(k) / (n - 1));
    v.back() = b;
    return v;
}

inline json fit_json(const DecayFit& f) {
    return json{{"exponent", f.exponent},          {"log_amplitude", f.log_amplitude}, {"r_squared", f.r_squared},
                {"window", {f.window.lo, f.window.hi}}, {"side", to_string(f.side)},   {"samples", f.samples},
                {"conclusive", f.conclusive}};
}

inline json config_json(const ExperimentConfig& c) {
    json j;
    j["experiment"] = {{"kind", c.experiment.kind}, {"seed", c.experiment.seed}, {"output_dir", c.experiment.output_dir}};
    j["symbol"] = {{"family", to_string(c.symbol.family)}, {"convention", to_string(c.symbol.convention)},
                   {"eta", c.symbol.eta}};
    j["grid"] = {{"L", c.grid.L}, {"N", c.grid.N}};
    const auto datum = [](const DatumDescriptor& d) {
        return json{{"family", to_string(d.family)}, {"amplitude", d.amplitude}, {"parameter", d.parameter}};
    };
    j["datum"] = datum(c.datum);
    json members = json::object();
    for (const auto& [name, m] : c.members) {
        auto d = datum(m.datum);
        d["epsilon"] = m.epsilon;
        members[name] = d;
    }
    j["members"] = members;
    const auto& k = c.kernel;
    j["kernel"] = {{"times", k.times},       {"etas", k.etas},           {"method", to_string(k.method)},
                   {"tol", k.tol},           {"tail_x0", k.tail_x0},     {"tail_levels", k.tail_levels},
                   {"fit_lo", k.fit_lo},     {"fit_hi", k.fit_hi},       {"fit_points", k.fit_points},
                   {"profile", k.profile},   {"check_slope", k.check_slope}, {"slope_t_min", k.slope_t_min},
                   {"slope_t_max", k.slope_t_max}, {"slope_points", k.slope_points}, {"slope_L", k.slope_L},
                   {"slope_N", k.slope_N}};
    const auto& s = c.solver;
    j["solver"] = {{"method", s.method},
                   {"T", s.T},
                   {"dt", s.dt},
                   {"scheme", to_string(s.scheme)},
                   {"dealias", s.dealias},
                   {"nonlinear", s.nonlinear},
                   {"time_quad_nodes", s.time_quad_nodes},
                   {"grading", s.grading},
                   {"n_max", s.n_max},
                   {"tol", s.tol},
                   {"blowup_threshold", s.blowup_threshold},
                   {"gap_tol", s.gap_tol},
                   {"mass_tol", s.mass_tol},
                   {"l2_tol", s.l2_tol}};
    const auto& a = c.analysis;
    j["analysis"] = {{"side", to_string(a.side)},     {"min_start", a.min_start},
                     {"expected_exponent", a.expected_exponent}, {"exponent_tol", a.exponent_tol},
                     {"lower_bound", a.lower_bound}, {"nonlinear_tol", a.nonlinear_tol},
                     {"min_ratio", a.min_ratio}};
    const auto& l = c.lwp;
    json ps = json::array();
    for (double p : l.p) ps.push_back(std::isinf(p) ? json("inf") : json(p));
    j["lwp"] = {{"p", ps},
                {"T", l.T},
                {"fraction", l.fraction},
                {"tol", l.tol},
                {"n_max", l.n_max},
                {"time_quad_nodes", l.time_quad_nodes},
                {"grading", l.grading},
                {"factor_max", l.factor_max},
                {"agreement_tol", l.agreement_tol}};
    const auto& q = c.constants;
    j["constants"] = {{"free_constant", q.free_constant}, {"C", q.C},
                      {"calibrate", q.calibrate},         {"theta_terms", q.theta_terms},
                      {"theta_beta", q.theta_beta},       {"theta_gamma", q.theta_gamma}};
    return j;
}

inline Field scaled(const Field& f, double s) {
    std::vector<double> v(f.values().begin(), f.values().end());
    for (auto& x : v) x *= s;
    return Field(f.grid(), f.time(), std::move(v));
}

inline double sup_difference(const Field& a, const Field& b) {
    double m = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) m = std::max(m, std::abs(a[j] - b[j]));
    return m;
}

inline double mass_drift(const std::vector<double>& mass) {
    if (mass.empty()) return 0.0;
    double d = 0.0;
    for (double m : mass) d = std::max(d, std::abs(m - mass.front()));
    return std::abs(mass.front()) > 1e-12 ? d / std::abs(mass.front()) : d;
}

// Discrete H^2 norm by Parseval in the angular convention.
inline double h2_norm(const Field& u) {
    const auto v = half_forward(u.values());
    const std::size_t n = u.size();
    const double dk = u.grid().frequency_spacing(Convention::ANGULAR);
    double s = 0.0;
    for (std::size_t m = 0; m < v.size(); ++m) {
        const double xi = dk * static_cast<double>(m);
        s += half_weight(m, n) * (1.0 + xi * xi) * (1.0 + xi * xi) * std::norm(v[m]);
    }
    return std::sqrt(s * u.grid().dx() / static_cast<double>(n));
}

inline void profile_rows(CsvTable& t, const Field& f, const std::vector<std::string>& prefix) {
    for (std::size_t j = 0; j < f.size(); ++j) {
        auto row = prefix;
        row.push_back(CsvTable::num(f.grid().x(j)));
        row.push_back(CsvTable::num(f[j]));
        t.add(std::move(row));
    }
}

}  // namespace exp_detail

inline ExperimentOutcome run_kernel(const ExperimentConfig& c, unsigned jobs = 1) {
    using exp_detail::fit_json;
    const auto& k = c.kernel;
    ExperimentOutcome out;
    const Grid grid = c.make_grid();
    const std::vector<double> etas = k.etas.empty() ? std::vector<double>{c.symbol.eta} : k.etas;

    struct EtaResult {
        json tails = json::array();
        json slope;
        std::vector<std::vector<std::string>> profile;
        std::vector<std::vector<std::string>> fits;
        std::vector<double> k_exp, dk_exp, sups;
        double slope_value = 0.0;
    };
    auto study = [&](std::size_t e) {
        const SymbolSpec spec = c.spec().with_eta(etas[e]);
        const std::string conv(to_string(spec.convention()));
        const std::string method(to_string(k.method));
        EtaResult r;
        for (double t : k.times) {
            const std::vector<std::string> meta{CsvTable::num(spec.eta()), CsvTable::num(t), conv};
            if (k.profile) {
                const auto s = kernel_grid(spec, t, grid);
                for (std::size_t j = 0; j < grid.size(); ++j) {
                    auto row = meta;
                    row.insert(row.end(), {"TRANSFORM", CsvTable::num(s.truncation_bound + s.imaginary_residue),
                                           CsvTable::num(grid.x(j)), CsvTable::num(s.field[j])});
                    r.profile.push_back(std::move(row));
                }
            }
            const auto tc = tail_coefficient(spec, t, k.tail_x0, k.tail_levels);
            const double Ab = std::abs(tail_coefficient_boundary(spec, t));
            std::vector<double> xs = exp_detail::geometric(k.fit_lo, k.fit_hi, k.fit_points), kv, dkv;
            for (double x : xs) {
                const auto p = kernel_point_eval(spec, t, x, k.tol * Ab / (x * x), k.method);
                const auto d = kernel_dx_point_eval(spec, t, x, k.tol * Ab / (x * x * x), k.method);
                kv.push_back(p.value);
                dkv.push_back(d.value);
                auto row = meta;
                row.insert(row.end(), {method, CsvTable::num(std::max(p.error, d.error)), CsvTable::num(x),
                                       CsvTable::num(p.value), CsvTable::num(d.value)});
                r.fits.push_back(std::move(row));
            }
            const auto fk = fit_power_law(xs, kv, {k.fit_lo, k.fit_hi});
            const auto fd = fit_power_law(xs, dkv, {k.fit_lo, k.fit_hi});
            r.k_exp.push_back(fk.exponent);
            r.dk_exp.push_back(fd.exponent);
            r.tails.push_back({{"t", t},
                               {"A", tc.A},
                               {"A_error", tc.error},
                               {"A_boundary", tail_coefficient_boundary(spec, t)},
                               {"scaled_samples", tc.scaled},
                               {"kernel_fit", fit_json(fk)},
                               {"dx_kernel_fit", fit_json(fd)}});
        }
        // sup_x (1 + x^2) |K(t, x)| over |x| <= L/4 on the slope grid, against t.
        const Grid sg(k.slope_L, k.slope_N);
        const auto ts = exp_detail::geometric(k.slope_t_min, k.slope_t_max, k.slope_points);
        for (double t : ts) {
            const auto s = kernel_grid(spec, t, sg);
            double m = 0.0;
            for (std::size_t j = 0; j < sg.size(); ++j) {
                const double x = sg.x(j);
                if (std::abs(x) <= sg.half_length() / 4.0) m = std::max(m, (1.0 + x * x) * std::abs(s.field[j]));
            }
            r.sups.push_back(m);
        }
        const auto fs = fit_power_law(ts, r.sups);
        r.slope_value = -fs.exponent;
        r.slope = {{"eta", spec.eta()}, {"times", ts}, {"weighted_sup", r.sups}, {"slope", r.slope_value},
                   {"r_squared", fs.r_squared}};
        return r;
    };
    const auto results = exp_detail::parallel_map(etas.size(), jobs, study);

    CsvTable profile{"kernel_profile.csv", {"eta", "t", "convention", "method", "error_bound", "x", "K"}, {}};
    CsvTable fits{"kernel_tail.csv", {"eta", "t", "convention", "method", "error_estimate", "x", "K", "dK"}, {}};
    json per_eta = json::array();
    for (std::size_t e = 0; e < etas.size(); ++e) {
        const auto& r = results[e];
        for (const auto& row : r.profile) profile.add(row);
        for (const auto& row : r.fits) fits.add(row);
        per_eta.push_back({{"eta", etas[e]}, {"tails", r.tails}, {"upper_law_slope", r.slope}});
        const std::string tag = "eta=" + exp_detail::label(etas[e]);
        for (std::size_t i = 0; i < k.times.size(); ++i) {
            const std::string tt = tag + " t=" + exp_detail::label(k.times[i]);
            out.check("kernel tail exponent " + tt, r.k_exp[i], 1.9, 2.1);
            out.check("dx kernel tail exponent " + tt, r.dk_exp[i], 2.85, 3.15);
            out.check_flag("tail coefficient nonzero " + tt, r.tails[i]["A"].get<double>() != 0.0);
        }
        for (std::size_t i = 0; i < r.sups.size(); ++i)
            out.check_flag("weighted sup finite " + tag + " t=" + exp_detail::label(r.slope["times"][i].get<double>()),
                           std::isfinite(r.sups[i]));
        out.check("upper law slope " + tag, r.slope_value, -1.0 / 3.0 - 0.1, -1.0 / 3.0 + 0.1, k.check_slope);
    }
    out.results["kernel"] = per_eta;
    if (k.profile) out.tables.push_back(std::move(profile));
    out.tables.push_back(std::move(fits));
    return out;
}

namespace exp_detail {

struct Evolution {
    std::optional<SolveReport> etd;
    std::optional<SolveReport> picard;
    const SolveReport& primary() const { return etd ? *etd : *picard; }
};

inline Evolution evolve(const ExperimentConfig& c, const Field& u0, double T, bool keep) {
    const SymbolSpec spec = c.spec();
    Evolution e;
    if (c.solver.method != "picard") e.etd = etd_solve(u0, T, c.solver.etd(keep), spec);
    if (c.solver.method != "etd") e.picard = duhamel_picard(u0, T, c.solver.picard(keep), spec);
    return e;
}

inline json solve_json(const SolveReport& r) {
    return json{{"iterations", r.iterations}, {"steps", r.steps},       {"residuals", r.residuals},
                {"mass_drift", mass_drift(r.mass)}, {"final_mass", r.final_field.mass()},
                {"final_sup", r.final_field.sup_norm()}, {"warnings", r.warnings}, {"notes", r.notes}};
}

}  // namespace exp_detail

inline ExperimentOutcome run_evolve(const ExperimentConfig& c) {
    ExperimentOutcome out;
    const Grid grid = c.make_grid();
    const Datum d = datum_build(c.datum, grid);
    const auto ev = exp_detail::evolve(c, d.field, c.solver.T, true);
    out.results["datum"] = {{"mass", d.mass}, {"tail_class", d.tail_class}};
    CsvTable prof{"evolve_profile.csv", {"x", "u0"}, {}};
    if (ev.etd) prof.header.push_back("u_etd");
    if (ev.picard) prof.header.push_back("u_picard");
    for (std::size_t j = 0; j < grid.size(); ++j) {
        std::vector<std::string> row{CsvTable::num(grid.x(j)), CsvTable::num(d.field[j])};
        if (ev.etd) row.push_back(CsvTable::num(ev.etd->final_field[j]));
        if (ev.picard) row.push_back(CsvTable::num(ev.picard->final_field[j]));
        prof.add(std::move(row));
    }
    out.tables.push_back(std::move(prof));
    if (ev.etd) {
        out.results["etd"] = exp_detail::solve_json(*ev.etd);
        out.check("etd relative mass drift", exp_detail::mass_drift(ev.etd->mass), 0.0, c.solver.mass_tol);
        const double defect = l2_balance_check(*ev.etd->trajectory);
        out.results["etd"]["l2_balance_defect"] = defect;
        out.check("etd L2 balance defect", defect, 0.0, c.solver.l2_tol);
    }
    if (ev.picard) {
        out.results["picard"] = exp_detail::solve_json(*ev.picard);
        out.check("picard relative mass drift", exp_detail::mass_drift(ev.picard->mass), 0.0, c.solver.mass_tol);
        const double defect = l2_balance_check(*ev.picard->trajectory);
        out.results["picard"]["l2_balance_defect"] = defect;
        out.check("picard L2 balance defect", defect, 0.0, c.solver.l2_tol, false);
    }
    if (ev.etd && ev.picard) {
        const double gap = exp_detail::sup_difference(ev.etd->final_field, ev.picard->final_field);
        out.results["cross_solver_gap"] = gap;
        out.check("cross-solver sup gap", gap, 0.0, c.solver.gap_tol);
    }
    return out;
}

inline ExperimentOutcome run_decay_scan(const ExperimentConfig& c, unsigned jobs = 1) {
    ExperimentOutcome out;
    const Grid grid = c.make_grid();
    const SymbolSpec spec = c.spec();
    const auto& a = c.analysis;
    CsvTable fits{"decay_fits.csv",
                  {"name", "mass", "exponent", "r_squared", "window_lo", "window_hi", "lower", "upper", "pass"},
                  {}};

    const Datum control = datum_build(c.datum, grid);
    const auto sol = etd_solve(control.field, c.solver.T, c.solver.etd(), spec);
    const auto fit = fit_tail_auto(sol.final_field, a.side, a.min_start);
    const double lo = a.expected_exponent - a.exponent_tol, hi = a.expected_exponent + a.exponent_tol;
    out.results["control"] = {{"datum", to_string(c.datum.family)}, {"mass", control.mass},
                              {"fit", exp_detail::fit_json(fit)}};
    out.check("control tail exponent", fit.exponent, lo, hi);
    out.check("control fit r_squared", fit.r_squared, kConclusiveR2, 1.0);
    fits.add({"control", CsvTable::num(control.mass), CsvTable::num(fit.exponent), CsvTable::num(fit.r_squared),
              CsvTable::num(fit.window.lo), CsvTable::num(fit.window.hi), CsvTable::num(lo), CsvTable::num(hi),
              fit.exponent >= lo && fit.exponent <= hi && fit.conclusive ? "true" : "false"});

    std::vector<ZeroMeanMember> members;
    for (const auto& [name, m] : c.members) members.push_back({name, datum_build(m.datum, grid).field, m.epsilon});
    const auto rows = zero_mean_improvement_scan(members, c.solver.T, spec, c.solver.etd(), a.side, jobs, a.min_start);
    json scan = json::array();
    for (const auto& r : rows) {
        scan.push_back({{"name", r.name}, {"epsilon", r.epsilon}, {"mass", r.mass}, {"fit", exp_detail::fit_json(r.fit)},
                        {"lower", r.lower}, {"upper", r.upper}, {"pass", r.pass}});
        out.check("zero-mean exponent " + r.name, r.fit.exponent, r.lower, r.upper);
        out.check("zero-mean fit r_squared " + r.name, r.fit.r_squared, kConclusiveR2, 1.0);
        fits.add({r.name, CsvTable::num(r.mass), CsvTable::num(r.fit.exponent), CsvTable::num(r.fit.r_squared),
                  CsvTable::num(r.fit.window.lo), CsvTable::num(r.fit.window.hi), CsvTable::num(r.lower),
                  CsvTable::num(r.upper), r.pass ? "true" : "false"});
    }
    out.results["zero_mean_scan"] = scan;
    out.tables.push_back(std::move(fits));
    return out;
}

inline ExperimentOutcome run_asymptotic(const ExperimentConfig& c) {
    ExperimentOutcome out;
    const Grid grid = c.make_grid();
    const SymbolSpec spec = c.spec();
    const auto& a = c.analysis;
    const Datum d = datum_build(c.datum, grid);
    if (a.lower_bound && !(std::abs(d.mass) > 1e-6))
        throw ConfigError("analysis.lower_bound", "the lower-bound check needs a datum with |mass| > 1e-6");
    const auto ev = exp_detail::evolve(c, d.field, c.solver.T, true);
    const SolveReport& sol = ev.primary();

    if (a.lower_bound) {
        const auto lb = lower_bound_check(sol.final_field, d.field, spec, a.side);
        out.results["lower_bound"] = {{"pass", lb.pass},          {"window", {lb.window.lo, lb.window.hi}},
                                      {"margin", lb.margin},      {"min_scaled", lb.min_scaled},
                                      {"mass", lb.mass},          {"A", lb.A},
                                      {"A_error", lb.A_error},    {"starts", lb.starts},
                                      {"margins", lb.margins}};
        out.check("lower bound margin", lb.margin, 1.0, exp_detail::kInfinity);
    }
    const auto ar = asymptotic_residual(sol.final_field, d.field, spec, &*sol.trajectory, a.side);
    out.results["profile"] = {{"mass", ar.mass},
                              {"datum_exponent", std::isinf(ar.datum_exponent) ? json("inf") : json(ar.datum_exponent)},
                              {"points", ar.points},
                              {"residual", ar.point_residual},
                              {"ratios", ar.ratios},
                              {"correction", ar.correction},
                              {"sup_residual", ar.sup_residual},
                              {"max_nonlinear_integral", ar.max_nonlinear_integral}};
    for (std::size_t k = 0; k < ar.ratios.size(); ++k)
        out.check("residual ratio at x=" + exp_detail::label(ar.points[k]), ar.ratios[k], a.min_ratio,
                  exp_detail::kInfinity);
    out.check("max |int u u_y|", ar.max_nonlinear_integral, 0.0, a.nonlinear_tol);

    CsvTable res{"asymptotic_residual.csv", {"x", "residual"}, {}};
    for (std::size_t i = 0; i < ar.x.size(); ++i) res.add({CsvTable::num(ar.x[i]), CsvTable::num(ar.residual[i])});
    CsvTable nl{"nonlinear_integral.csv", {"t", "int_u_uy"}, {}};
    for (std::size_t i = 0; i < ar.nonlinear_times.size(); ++i)
        nl.add({CsvTable::num(ar.nonlinear_times[i]), CsvTable::num(ar.nonlinear_integrals[i])});
    out.tables.push_back(std::move(res));
    out.tables.push_back(std::move(nl));
    return out;
}

inline ExperimentOutcome run_lwp(const ExperimentConfig& c, unsigned jobs = 1) {
    ExperimentOutcome out;
    const Grid grid = c.make_grid();
    const SymbolSpec spec = c.spec();
    const auto& l = c.lwp;
    const Field base = datum_build(c.datum, grid).field;

    struct PResult {
        double p, q, holder_residual, delta, norm, W, bound, factor, gap, agreement;
        std::size_t iterations;
        ThresholdConstants k;
        std::vector<double> wt, ws;
        std::vector<std::string> warnings;
    };
    auto one = [&](std::size_t i) {
        PResult r{};
        r.p = l.p[i];
        LpConfig cfg;
        cfg.p = r.p;
        cfg.T = l.T;
        cfg.tol = l.tol;
        cfg.n_max = l.n_max;
        cfg.time_quad_nodes = l.time_quad_nodes;
        cfg.grading = l.grading;
        cfg.constants = measure_threshold_constants(spec, grid, r.p, l.T);
        r.k = cfg.constants;
        r.q = cfg.constants.q;
        const double ip = std::isinf(r.p) ? 0.0 : 1.0 / r.p, iq = std::isinf(r.q) ? 0.0 : 1.0 / r.q;
        r.holder_residual = std::abs(1.0 + ip - (iq + 2.0 * ip));
        r.delta = smallness_threshold(cfg.constants, spec.eta(), l.T);
        const Field u0 = exp_detail::scaled(base, l.fraction * r.delta / lp_norm(base, r.p));
        r.norm = lp_norm(u0, r.p);
        const auto rep = picard_lp(u0, cfg, spec);
        r.W = rep.weighted_norm;
        r.bound = 2.0 * rep.linear_bound;
        r.factor = rep.contraction_factor;
        r.iterations = rep.solve.iterations;
        r.wt = rep.weight_times;
        r.ws = rep.weighted_samples;
        r.warnings = rep.solve.warnings;
        r.gap = uniqueness_witness(u0, cfg, spec, c.experiment.seed, false).gap;
        r.agreement = -1.0;
        if (r.p == 2.0) {
            PicardConfig pc;
            pc.n_max = l.n_max;
            pc.tol = l.tol;
            pc.time_quad_nodes = l.time_quad_nodes;
            pc.grading = l.grading;
            r.agreement = exp_detail::sup_difference(duhamel_picard(u0, l.T, pc, spec).final_field, rep.solve.final_field);
        }
        return r;
    };
    const auto results = exp_detail::parallel_map(l.p.size(), jobs, one);

    CsvTable tab{"lwp_weighted_norms.csv", {"p", "t", "weighted_norm"}, {}};
    json runs = json::array();
    for (const auto& r : results) {
        const std::string tag = "p=" + exp_detail::label(r.p);
        const json pj = std::isinf(r.p) ? json("inf") : json(r.p);
        const json qj = std::isinf(r.q) ? json("inf") : json(r.q);
        json j = {{"p", pj},
                  {"q", qj},
                  {"c_hat", r.k.c_hat},
                  {"C_hat", r.k.C_hat},
                  {"delta", r.delta},
                  {"datum_norm", r.norm},
                  {"weighted_norm", r.W},
                  {"weighted_bound", r.bound},
                  {"contraction_factor", r.factor},
                  {"iterations", r.iterations},
                  {"uniqueness_gap", r.gap},
                  {"warnings", r.warnings}};
        if (r.agreement >= 0.0) j["evolution_agreement"] = r.agreement;
        runs.push_back(std::move(j));
        out.check("holder identity residual " + tag, r.holder_residual, 0.0, 1e-14);
        out.check("contraction factor " + tag, r.factor, 0.0, l.factor_max);
        out.check("weighted norm over bound " + tag, r.W / r.bound, 0.0, 1.0);
        out.check("uniqueness gap " + tag, r.gap, 0.0, 2.0 * l.tol);
        if (r.agreement >= 0.0) out.check("agreement with evolution " + tag, r.agreement, 0.0, l.agreement_tol);
        for (std::size_t k = 0; k < r.wt.size(); ++k)
            tab.add({cfg_detail::fmt(r.p), CsvTable::num(r.wt[k]), CsvTable::num(r.ws[k])});
    }
    out.results["lwp"] = runs;
    out.tables.push_back(std::move(tab));
    return out;
}

inline ExperimentOutcome run_constants(const ExperimentConfig& c) {
    ExperimentOutcome out;
    const Grid grid = c.make_grid();
    const auto& q = c.constants;
    const Datum d = datum_build(c.datum, grid);
    const double T = c.solver.T;
    const auto sol = etd_solve(d.field, T, c.solver.etd(true), c.spec());
    const auto& traj = *sol.trajectory;

    std::vector<std::pair<double, double>> measured;
    double h2 = 0.0;
    const std::size_t stride = std::max<std::size_t>(1, traj.times.size() / 200);
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        if (i % stride != 0 && i + 1 != traj.times.size()) continue;
        const Field u = traj.field(i);
        h2 = std::max(h2, exp_detail::h2_norm(u));
        if (traj.times[i] > 0.0) measured.emplace_back(traj.times[i], detail::weighted_sup(u));
    }
    EnvelopeInputs in{c.symbol.eta, T, detail::weighted_sup(d.field), h2, q.free_constant, q.C};
    const auto ledger = build_ledger(in);
    const double need = calibrate_free_constant(in, measured);

    double worst = -exp_detail::kInfinity;  // max over samples of log(measured / envelope)
    for (const auto& [t, m] : measured) worst = std::max(worst, std::log(m) - ledger.log_envelope(t));

    out.results["ledger"] = {{"eta", ledger.eta},
                             {"T", ledger.T},
                             {"free_constant", ledger.free_constant},
                             {"c_eta", ledger.c_eta},
                             {"C1_eta", ledger.C1_eta},
                             {"C2_eta", ledger.C2_eta},
                             {"frak_C0", ledger.frak_C0},
                             {"frak_C1", ledger.frak_C1},
                             {"frak_C2", ledger.frak_C2},
                             {"theta_argument", ledger.theta_argument},
                             {"log_theta", ledger.log_theta},
                             {"log_envelope_prefactor", ledger.log_envelope_prefactor}};
    out.results["calibrated_free_constant"] = need;
    out.results["max_log_measured_over_envelope"] = worst;
    out.results["beta_third_third"] = beta_integral(1.0, -2.0 / 3.0, -2.0 / 3.0);
    out.results["lorentz_conv_0"] = lorentz_conv(0.0);
    if (q.calibrate) out.check("calibrated free constant within configured", need, 0.0, q.free_constant);
    out.check("envelope dominates measured weighted sup (log ratio)", worst, -exp_detail::kInfinity, 0.0);

    const ThetaSeries theta(q.theta_beta, q.theta_gamma);
    CsvTable tab{"theta_coefficients.csv", {"k", "log_coefficient", "coefficient"}, {}};
    for (int k = 0; k <= q.theta_terms; ++k)
        tab.add({std::to_string(k), CsvTable::num(theta.log_coefficient(static_cast<std::size_t>(k))),
                 CsvTable::num(theta.coefficient(static_cast<std::size_t>(k)))});
    out.tables.push_back(std::move(tab));
    CsvTable env{"envelope.csv", {"t", "weighted_sup", "log_envelope"}, {}};
    for (const auto& [t, m] : measured) env.add({CsvTable::num(t), CsvTable::num(m), CsvTable::num(ledger.log_envelope(t))});
    out.tables.push_back(std::move(env));
    return out;
}

inline ExperimentOutcome run_experiment(const ExperimentConfig& c, unsigned jobs = 1) {
    const auto& k = c.experiment.kind;
    if (k == "kernel") return run_kernel(c, jobs);
    if (k == "evolve") return run_evolve(c);
    if (k == "decay-scan") return run_decay_scan(c, jobs);
    if (k == "asymptotic") return run_asymptotic(c);
    if (k == "lwp-check") return run_lwp(c, jobs);
    if (k == "constants") return run_constants(c);
    throw ConfigError("experiment.kind", "unknown experiment kind '" + k + "'");
}

inline std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// Deterministic apart from the "timestamp" field.
inline json make_report(const ExperimentConfig& c, const ExperimentOutcome& o, const std::string& timestamp) {
    json r;
    r["tool"] = kToolVersion;
    r["kind"] = c.experiment.kind;
    r["pass"] = o.pass;
    r["config"] = exp_detail::config_json(c);
    r["config_ini"] = to_ini(c);
    r["checks"] = o.checks;
    r["results"] = o.results;
    std::vector<std::string> files;
    for (const auto& t : o.tables) files.push_back(t.name);
    r["data_files"] = files;
    r["timestamp"] = timestamp;
    return r;
}

inline void write_outputs(const std::filesystem::path& dir, const ExperimentConfig& c, const ExperimentOutcome& o,
                          const std::string& timestamp) {
    std::filesystem::create_directories(dir);
    const auto write = [&](const std::string& name, const std::string& text) {
        std::ofstream f(dir / name, std::ios::binary);
        f << text;
        if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
    };
    write("report.json", make_report(c, o, timestamp).dump(2) + "\n");
    for (const auto& t : o.tables) write(t.name, t.str());
}

}  // namespace ostlab
