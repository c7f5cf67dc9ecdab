#pragma once

#include <algorithm>
#include <bit>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "ostlab/datum.hpp"
#include "ostlab/decay_analysis.hpp"
#include "ostlab/errors.hpp"
#include "ostlab/evolution.hpp"
#include "ostlab/kernel.hpp"
#include "ostlab/spectral_core.hpp"

namespace ostlab {

inline constexpr std::string_view kToolVersion = "ost-lab 0.1.0";

inline const std::vector<std::string>& experiment_kinds() {
    static const std::vector<std::string> k{"kernel", "evolve", "decay-scan", "asymptotic", "lwp-check", "constants"};
    return k;
}

struct ExperimentSection {
    std::string kind = "kernel";
    std::uint64_t seed = 0;
    std::string output_dir = "out";
    bool operator==(const ExperimentSection&) const = default;
};

struct SymbolSection {
    Family family = Family::OST;
    Convention convention = Convention::ANGULAR;
    double eta = 1.0;
    bool operator==(const SymbolSection&) const = default;
};

struct GridSection {
    double L = 200.0;
    std::size_t N = 4096;
    bool operator==(const GridSection&) const = default;
};

struct MemberDatum {
    DatumDescriptor datum;
    double epsilon = 1.0;
    bool operator==(const MemberDatum&) const = default;
};

struct KernelSection {
    std::vector<double> times{1.0};
    std::vector<double> etas;  // empty: the symbol eta
    KernelMethod method = KernelMethod::IBP_REDUCED;
    double tol = 1e-10;  // relative to the tail scale |A| / x^2 (|A| / x^3 for d_x K)
    double tail_x0 = 8.0;
    int tail_levels = 7;
    double fit_lo = 20.0;
    double fit_hi = 200.0;
    int fit_points = 64;
    bool profile = true;
    bool check_slope = false;
    double slope_t_min = 0.01;
    double slope_t_max = 1.0;
    int slope_points = 9;
    double slope_L = 64.0;
    std::size_t slope_N = 8192;
    bool operator==(const KernelSection&) const = default;
};

struct SolverSection {
    std::string method = "etd";  // etd | picard | both
    double T = 1.0;
    double dt = 1e-3;
    EtdScheme scheme = EtdScheme::ETD_RK4;
    bool dealias = true;
    bool nonlinear = true;
    int time_quad_nodes = 128;
    double grading = 3.0;
    int n_max = 60;
    double tol = 1e-12;
    double blowup_threshold = 1e6;
    double gap_tol = 1e-5;
    double mass_tol = 1e-8;
    double l2_tol = 1e-4;
    bool operator==(const SolverSection&) const = default;

    ETDConfig etd(bool keep = false) const {
        ETDConfig c;
        c.dt = dt;
        c.scheme = scheme;
        c.dealias = dealias;
        c.nonlinear = nonlinear;
        c.keep_spectra = keep;
        c.blowup_threshold = blowup_threshold;
        return c;
    }
    PicardConfig picard(bool keep = false) const {
        PicardConfig c;
        c.n_max = n_max;
        c.tol = tol;
        c.time_quad_nodes = time_quad_nodes;
        c.grading = grading;
        c.dealias = dealias;
        c.nonlinear = nonlinear;
        c.keep_trajectory = keep;
        c.blowup_threshold = blowup_threshold;
        return c;
    }
};

struct AnalysisSection {
    Side side = Side::RIGHT;
    double min_start = 8.0;
    double expected_exponent = 2.0;
    double exponent_tol = 0.15;
    bool lower_bound = true;
    double nonlinear_tol = 1e-10;
    double min_ratio = 1.5;
    bool operator==(const AnalysisSection&) const = default;
};

struct LwpSection {
    std::vector<double> p{1.0, 2.0, 4.0, std::numeric_limits<double>::infinity()};
    double T = 1.0;
    double fraction = 0.5;  // ||u0||_p = fraction * delta
    double tol = 1e-14;
    int n_max = 60;
    int time_quad_nodes = 128;
    double grading = 3.0;
    double factor_max = 0.6;
    double agreement_tol = 1e-6;
    bool operator==(const LwpSection&) const = default;
};

struct ConstantsSection {
    double free_constant = 1.0;
    double C = 1.0;
    bool calibrate = true;
    int theta_terms = 60;
    double theta_beta = 2.0 / 3.0;
    double theta_gamma = 2.0 / 3.0;
    bool operator==(const ConstantsSection&) const = default;
};

struct ExperimentConfig {
    ExperimentSection experiment;
    SymbolSection symbol;
    GridSection grid;
    DatumDescriptor datum;
    std::map<std::string, MemberDatum> members;  // [datum.NAME] sections
    KernelSection kernel;
    SolverSection solver;
    AnalysisSection analysis;
    LwpSection lwp;
    ConstantsSection constants;
    bool operator==(const ExperimentConfig&) const = default;

    SymbolSpec spec() const { return SymbolSpec(symbol.family, symbol.eta, symbol.convention); }
    Grid make_grid() const { return Grid(grid.L, grid.N); }
};

namespace cfg_detail {

inline std::string fmt(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string fmt_list(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i]);
    return s;
}

inline std::string trim(std::string s) {
    const auto ws = [](unsigned char c) { return std::isspace(c) != 0; };
    s.erase(s.begin(), std::find_if_not(s.begin(), s.end(), ws));
    s.erase(std::find_if_not(s.rbegin(), s.rend(), ws).base(), s.end());
    return s;
}

inline std::string upper(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return s;
}

inline double parse_double(const std::string& key, const std::string& raw) {
    const std::string s = trim(raw);
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE || std::isnan(v))
        throw ConfigError(key, "expected a number, got '" + raw + "'");
    return v;
}

inline long long parse_int(const std::string& key, const std::string& raw) {
    const std::string s = trim(raw);
    errno = 0;
    char* end = nullptr;
    const long long v = std::strtoll(s.c_str(), &end, 10);
    if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE)
        throw ConfigError(key, "expected an integer, got '" + raw + "'");
    return v;
}

inline bool parse_bool(const std::string& key, const std::string& raw) {
    const std::string s = upper(trim(raw));
    if (s == "TRUE" || s == "YES" || s == "ON" || s == "1") return true;
    if (s == "FALSE" || s == "NO" || s == "OFF" || s == "0") return false;
    throw ConfigError(key, "expected a boolean, got '" + raw + "'");
}

inline std::vector<double> parse_list(const std::string& key, const std::string& raw) {
    std::vector<double> out;
    std::stringstream ss(raw);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_double(key, item));
    if (out.empty()) throw ConfigError(key, "expected a comma-separated list of numbers");
    return out;
}

template <class E, std::size_t K>
E parse_enum(const std::string& key, const std::string& raw, const E (&options)[K]) {
    const std::string s = upper(trim(raw));
    for (E e : options)
        if (upper(std::string(to_string(e))) == s) return e;
    std::string names;
    for (E e : options) names += (names.empty() ? "" : ", ") + std::string(to_string(e));
    throw ConfigError(key, "unknown value '" + raw + "' (expected one of " + names + ")");
}

inline DatumFamily parse_family(const std::string& key, const std::string& raw) {
    static const DatumFamily opts[] = {DatumFamily::LORENTZ_POWER, DatumFamily::ODD_POWER,
                                       DatumFamily::GAUSSIAN_DERIVATIVE};
    return parse_enum(key, raw, opts);
}

using ptree = boost::property_tree::ptree;

// Reads one section, rejecting keys outside the allowed set.
class SectionReader {
public:
    SectionReader(const ptree& sec, std::string name, std::set<std::string> allowed)
        : sec_(sec), name_(std::move(name)) {
        for (const auto& [k, v] : sec_) {
            if (!v.empty()) throw ConfigError(name_ + "." + k, "nested keys are not supported");
            if (!allowed.count(k)) throw ConfigError(name_ + "." + k, "unknown key");
        }
    }

    template <class F>
    void read(const std::string& key, F&& apply) const {
        if (const auto v = sec_.get_optional<std::string>(ptree::path_type(key, '\0')))
            apply(name_ + "." + key, *v);
    }

    void num(const std::string& key, double& out) const {
        read(key, [&](const std::string& k, const std::string& v) { out = parse_double(k, v); });
    }
    void integer(const std::string& key, int& out) const {
        read(key, [&](const std::string& k, const std::string& v) { out = static_cast<int>(parse_int(k, v)); });
    }
    void size(const std::string& key, std::size_t& out) const {
        read(key, [&](const std::string& k, const std::string& v) {
            const auto n = parse_int(k, v);
            if (n <= 0) throw ConfigError(k, "must be positive");
            out = static_cast<std::size_t>(n);
        });
    }
    void flag(const std::string& key, bool& out) const {
        read(key, [&](const std::string& k, const std::string& v) { out = parse_bool(k, v); });
    }
    void text(const std::string& key, std::string& out) const {
        read(key, [&](const std::string&, const std::string& v) { out = trim(v); });
    }
    void list(const std::string& key, std::vector<double>& out) const {
        read(key, [&](const std::string& k, const std::string& v) { out = parse_list(k, v); });
    }

private:
    const ptree& sec_;
    std::string name_;
};

inline void read_datum(const SectionReader& r, DatumDescriptor& d) {
    r.read("family", [&](const std::string& k, const std::string& v) { d.family = parse_family(k, v); });
    r.num("amplitude", d.amplitude);
    r.num("parameter", d.parameter);
}

inline void require(bool ok, const std::string& key, const std::string& what) {
    if (!ok) throw ConfigError(key, what);
}

inline void validate(const ExperimentConfig& c) {
    const auto& kinds = experiment_kinds();
    require(std::find(kinds.begin(), kinds.end(), c.experiment.kind) != kinds.end(), "experiment.kind",
            "unknown experiment kind '" + c.experiment.kind + "'");
    require(c.symbol.eta > 0.0 && std::isfinite(c.symbol.eta), "symbol.eta", "must be positive");
    require(c.grid.L > 0.0, "grid.L", "must be positive");
    require(c.grid.N >= 4 && std::has_single_bit(c.grid.N), "grid.N", "must be a power of two >= 4");
    try {
        ostlab::validate(c.datum);
    } catch (const DomainError& e) {
        throw ConfigError("datum.parameter", e.what());
    }
    for (const auto& [name, m] : c.members) {
        try {
            ostlab::validate(m.datum);
        } catch (const DomainError& e) {
            throw ConfigError("datum." + name + ".parameter", e.what());
        }
        require(m.epsilon > 0.0 && m.epsilon <= 1.0, "datum." + name + ".epsilon", "must lie in (0, 1]");
    }
    require(!c.kernel.times.empty(), "kernel.times", "must not be empty");
    for (double t : c.kernel.times) require(t > 0.0, "kernel.times", "times must be positive");
    for (double e : c.kernel.etas) require(e > 0.0, "kernel.etas", "etas must be positive");
    require(c.kernel.tol > 0.0, "kernel.tol", "must be positive");
    require(c.kernel.tail_levels >= 3, "kernel.tail_levels", "must be at least 3");
    require(c.kernel.fit_lo >= 1.0 && c.kernel.fit_hi > c.kernel.fit_lo, "kernel.fit_hi", "need 1 <= fit_lo < fit_hi");
    require(c.kernel.fit_points >= 4, "kernel.fit_points", "must be at least 4");
    require(c.kernel.slope_t_min > 0.0 && c.kernel.slope_t_max > c.kernel.slope_t_min, "kernel.slope_t_max",
            "need 0 < slope_t_min < slope_t_max");
    require(c.kernel.slope_points >= 2, "kernel.slope_points", "must be at least 2");
    require(c.kernel.slope_L > 0.0, "kernel.slope_L", "must be positive");
    require(c.kernel.slope_N >= 4 && std::has_single_bit(c.kernel.slope_N), "kernel.slope_N",
            "must be a power of two >= 4");
    require(c.solver.method == "etd" || c.solver.method == "picard" || c.solver.method == "both", "solver.method",
            "expected etd, picard or both");
    require(c.solver.T > 0.0, "solver.T", "must be positive");
    require(c.solver.dt > 0.0 && c.solver.dt <= c.solver.T, "solver.dt", "need 0 < dt <= T");
    require(c.solver.time_quad_nodes >= 4, "solver.time_quad_nodes", "must be at least 4");
    require(c.solver.grading >= 1.0, "solver.grading", "must be at least 1");
    require(c.solver.n_max >= 1, "solver.n_max", "must be at least 1");
    require(c.solver.tol > 0.0, "solver.tol", "must be positive");
    require(c.analysis.min_start >= 1.0, "analysis.min_start", "must be at least 1");
    require(!c.lwp.p.empty(), "lwp.p", "must not be empty");
    for (double p : c.lwp.p) require(p >= 1.0, "lwp.p", "exponents must be at least 1");
    require(c.lwp.T > 0.0, "lwp.T", "must be positive");
    require(c.lwp.fraction > 0.0, "lwp.fraction", "must be positive");
    require(c.lwp.tol > 0.0, "lwp.tol", "must be positive");
    require(c.lwp.time_quad_nodes >= 4, "lwp.time_quad_nodes", "must be at least 4");
    require(c.constants.free_constant > 0.0, "constants.free_constant", "must be positive");
    require(c.constants.theta_terms >= 1, "constants.theta_terms", "must be at least 1");
}

}  // namespace cfg_detail

inline ExperimentConfig parse_config_string(const std::string& text) {
    using namespace cfg_detail;
    ptree root;
    std::istringstream in(text);
    try {
        boost::property_tree::ini_parser::read_ini(in, root);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError("line " + std::to_string(e.line()), e.message());
    }
    ExperimentConfig c;
    static const std::set<std::string> datum_keys{"family", "amplitude", "parameter"};
    for (const auto& [name, sec] : root) {
        if (sec.empty() && !sec.data().empty()) throw ConfigError(name, "key outside of any section");
        if (name == "experiment") {
            const SectionReader r(sec, name, {"kind", "seed", "output_dir"});
            r.text("kind", c.experiment.kind);
            r.read("seed", [&](const std::string& k, const std::string& v) {
                const auto s = parse_int(k, v);
                if (s < 0) throw ConfigError(k, "must be nonnegative");
                c.experiment.seed = static_cast<std::uint64_t>(s);
            });
            r.text("output_dir", c.experiment.output_dir);
        } else if (name == "symbol") {
            const SectionReader r(sec, name, {"family", "convention", "eta"});
            static const Family fams[] = {Family::OST, Family::NPBO};
            static const Convention convs[] = {Convention::PAPER_2PI, Convention::ANGULAR};
            r.read("family", [&](const std::string& k, const std::string& v) { c.symbol.family = parse_enum(k, v, fams); });
            r.read("convention",
                   [&](const std::string& k, const std::string& v) { c.symbol.convention = parse_enum(k, v, convs); });
            r.num("eta", c.symbol.eta);
        } else if (name == "grid") {
            const SectionReader r(sec, name, {"L", "N"});
            r.num("L", c.grid.L);
            r.size("N", c.grid.N);
        } else if (name == "datum") {
            read_datum(SectionReader(sec, name, datum_keys), c.datum);
        } else if (name.rfind("datum.", 0) == 0 && name.size() > 6) {
            const SectionReader r(sec, name, {"family", "amplitude", "parameter", "epsilon"});
            MemberDatum m;
            read_datum(r, m.datum);
            r.num("epsilon", m.epsilon);
            c.members[name.substr(6)] = m;
        } else if (name == "kernel") {
            const SectionReader r(sec, name,
                                  {"times", "etas", "method", "tol", "tail_x0", "tail_levels", "fit_lo", "fit_hi",
                                   "fit_points", "profile", "check_slope", "slope_t_min", "slope_t_max",
                                   "slope_points", "slope_L", "slope_N"});
            static const KernelMethod methods[] = {KernelMethod::TRANSFORM, KernelMethod::OSCILLATORY_QUAD,
                                                   KernelMethod::IBP_REDUCED};
            auto& k = c.kernel;
            r.list("times", k.times);
            r.list("etas", k.etas);
            r.read("method", [&](const std::string& key, const std::string& v) { k.method = parse_enum(key, v, methods); });
            r.num("tol", k.tol);
            r.num("tail_x0", k.tail_x0);
            r.integer("tail_levels", k.tail_levels);
            r.num("fit_lo", k.fit_lo);
            r.num("fit_hi", k.fit_hi);
            r.integer("fit_points", k.fit_points);
            r.flag("profile", k.profile);
            r.flag("check_slope", k.check_slope);
            r.num("slope_t_min", k.slope_t_min);
            r.num("slope_t_max", k.slope_t_max);
            r.integer("slope_points", k.slope_points);
            r.num("slope_L", k.slope_L);
            r.size("slope_N", k.slope_N);
        } else if (name == "solver") {
            const SectionReader r(sec, name,
                                  {"method", "T", "dt", "scheme", "dealias", "nonlinear", "time_quad_nodes", "grading",
                                   "n_max", "tol", "blowup_threshold", "gap_tol", "mass_tol", "l2_tol"});
            static const EtdScheme schemes[] = {EtdScheme::EXP_EULER, EtdScheme::ETD_RK2, EtdScheme::ETD_RK4};
            auto& s = c.solver;
            r.text("method", s.method);
            r.num("T", s.T);
            r.num("dt", s.dt);
            r.read("scheme", [&](const std::string& k, const std::string& v) { s.scheme = parse_enum(k, v, schemes); });
            r.flag("dealias", s.dealias);
            r.flag("nonlinear", s.nonlinear);
            r.integer("time_quad_nodes", s.time_quad_nodes);
            r.num("grading", s.grading);
            r.integer("n_max", s.n_max);
            r.num("tol", s.tol);
            r.num("blowup_threshold", s.blowup_threshold);
            r.num("gap_tol", s.gap_tol);
            r.num("mass_tol", s.mass_tol);
            r.num("l2_tol", s.l2_tol);
        } else if (name == "analysis") {
            const SectionReader r(sec, name,
                                  {"side", "min_start", "expected_exponent", "exponent_tol", "lower_bound",
                                   "nonlinear_tol", "min_ratio"});
            static const Side sides[] = {Side::LEFT, Side::RIGHT, Side::BOTH};
            auto& a = c.analysis;
            r.read("side", [&](const std::string& k, const std::string& v) { a.side = parse_enum(k, v, sides); });
            r.num("min_start", a.min_start);
            r.num("expected_exponent", a.expected_exponent);
            r.num("exponent_tol", a.exponent_tol);
            r.flag("lower_bound", a.lower_bound);
            r.num("nonlinear_tol", a.nonlinear_tol);
            r.num("min_ratio", a.min_ratio);
        } else if (name == "lwp") {
            const SectionReader r(sec, name,
                                  {"p", "T", "fraction", "tol", "n_max", "time_quad_nodes", "grading", "factor_max",
                                   "agreement_tol"});
            auto& l = c.lwp;
            r.list("p", l.p);
            r.num("T", l.T);
            r.num("fraction", l.fraction);
            r.num("tol", l.tol);
            r.integer("n_max", l.n_max);
            r.integer("time_quad_nodes", l.time_quad_nodes);
            r.num("grading", l.grading);
            r.num("factor_max", l.factor_max);
            r.num("agreement_tol", l.agreement_tol);
        } else if (name == "constants") {
            const SectionReader r(sec, name,
                                  {"free_constant", "C", "calibrate", "theta_terms", "theta_beta", "theta_gamma"});
            auto& k = c.constants;
            r.num("free_constant", k.free_constant);
            r.num("C", k.C);
            r.flag("calibrate", k.calibrate);
            r.integer("theta_terms", k.theta_terms);
            r.num("theta_beta", k.theta_beta);
            r.num("theta_gamma", k.theta_gamma);
        } else {
            throw ConfigError(name, "unknown section");
        }
    }
    validate(c);
    return c;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("", "cannot read config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_string(ss.str());
}

// Fully resolved config; parse_config_string(to_ini(c)) == c.
inline std::string to_ini(const ExperimentConfig& c) {
    using cfg_detail::fmt;
    using cfg_detail::fmt_list;
    std::ostringstream o;
    const auto b = [](bool v) { return v ? "true" : "false"; };
    o << "[experiment]\nkind = " << c.experiment.kind << "\nseed = " << c.experiment.seed
      << "\noutput_dir = " << c.experiment.output_dir << "\n\n";
    o << "[symbol]\nfamily = " << to_string(c.symbol.family) << "\nconvention = " << to_string(c.symbol.convention)
      << "\neta = " << fmt(c.symbol.eta) << "\n\n";
    o << "[grid]\nL = " << fmt(c.grid.L) << "\nN = " << c.grid.N << "\n\n";
    const auto datum = [&](const DatumDescriptor& d) {
        o << "family = " << to_string(d.family) << "\namplitude = " << fmt(d.amplitude)
          << "\nparameter = " << fmt(d.parameter) << "\n";
    };
    o << "[datum]\n";
    datum(c.datum);
    o << "\n";
    for (const auto& [name, m] : c.members) {
        o << "[datum." << name << "]\n";
        datum(m.datum);
        o << "epsilon = " << fmt(m.epsilon) << "\n\n";
    }
    const auto& k = c.kernel;
    o << "[kernel]\ntimes = " << fmt_list(k.times) << "\n";
    if (!k.etas.empty()) o << "etas = " << fmt_list(k.etas) << "\n";
    o << "method = " << to_string(k.method) << "\ntol = " << fmt(k.tol) << "\ntail_x0 = " << fmt(k.tail_x0)
      << "\ntail_levels = " << k.tail_levels << "\nfit_lo = " << fmt(k.fit_lo) << "\nfit_hi = " << fmt(k.fit_hi)
      << "\nfit_points = " << k.fit_points << "\nprofile = " << b(k.profile) << "\ncheck_slope = " << b(k.check_slope)
      << "\nslope_t_min = " << fmt(k.slope_t_min) << "\nslope_t_max = " << fmt(k.slope_t_max)
      << "\nslope_points = " << k.slope_points << "\nslope_L = " << fmt(k.slope_L) << "\nslope_N = " << k.slope_N
      << "\n\n";
    const auto& s = c.solver;
    o << "[solver]\nmethod = " << s.method << "\nT = " << fmt(s.T) << "\ndt = " << fmt(s.dt)
      << "\nscheme = " << to_string(s.scheme) << "\ndealias = " << b(s.dealias) << "\nnonlinear = " << b(s.nonlinear)
      << "\ntime_quad_nodes = " << s.time_quad_nodes << "\ngrading = " << fmt(s.grading) << "\nn_max = " << s.n_max
      << "\ntol = " << fmt(s.tol) << "\nblowup_threshold = " << fmt(s.blowup_threshold)
      << "\ngap_tol = " << fmt(s.gap_tol) << "\nmass_tol = " << fmt(s.mass_tol) << "\nl2_tol = " << fmt(s.l2_tol)
      << "\n\n";
    const auto& a = c.analysis;
    o << "[analysis]\nside = " << to_string(a.side) << "\nmin_start = " << fmt(a.min_start)
      << "\nexpected_exponent = " << fmt(a.expected_exponent) << "\nexponent_tol = " << fmt(a.exponent_tol)
      << "\nlower_bound = " << b(a.lower_bound) << "\nnonlinear_tol = " << fmt(a.nonlinear_tol)
      << "\nmin_ratio = " << fmt(a.min_ratio) << "\n\n";
    const auto& l = c.lwp;
    o << "[lwp]\np = " << fmt_list(l.p) << "\nT = " << fmt(l.T) << "\nfraction = " << fmt(l.fraction)
      << "\ntol = " << fmt(l.tol) << "\nn_max = " << l.n_max << "\ntime_quad_nodes = " << l.time_quad_nodes
      << "\ngrading = " << fmt(l.grading) << "\nfactor_max = " << fmt(l.factor_max)
      << "\nagreement_tol = " << fmt(l.agreement_tol) << "\n\n";
    const auto& q = c.constants;
    o << "[constants]\nfree_constant = " << fmt(q.free_constant) << "\nC = " << fmt(q.C)
      << "\ncalibrate = " << b(q.calibrate) << "\ntheta_terms = " << q.theta_terms
      << "\ntheta_beta = " << fmt(q.theta_beta) << "\ntheta_gamma = " << fmt(q.theta_gamma) << "\n";
    return o.str();
}

}  // namespace ostlab
