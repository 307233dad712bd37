// Command-line driver: pressure curves, dimension spectra, orbit statistics,
// graph-directed subsystems, conformal measures, oscillation schedules, and
// the selftest battery.  Exit codes: 0 ok, 1 selftest failure, 2 config
// error, 3 numeric degradation, 4 search failure.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lyapspec/acceptance.hpp"
#include "lyapspec/conformal.hpp"
#include "lyapspec/gds.hpp"
#include "lyapspec/io.hpp"
#include "lyapspec/orbit.hpp"
#include "lyapspec/pressure.hpp"
#include "lyapspec/schedule.hpp"
#include "lyapspec/svg.hpp"

using nlohmann::json;

namespace lyap {
namespace {

struct Options {
    std::string config;
    std::string out = "out";
    int threads = 1;
    std::string precision = "double";
    uint64_t seed = 20240901ULL;

    int extended_bits() const { return precision == "extended" ? 192 : 0; }
};

std::string dir_of(const std::string& path) {
    size_t pos = path.find_last_of('/');
    return pos == std::string::npos ? std::string(".") : path.substr(0, pos);
}

void check_keys(const json& obj, const char* what, std::initializer_list<const char*> allowed) {
    for (const auto& item : obj.items()) {
        bool known = false;
        for (const char* k : allowed)
            if (item.key() == k) {
                known = true;
                break;
            }
        if (!known) throw ConfigError(std::string("unknown key \"") + item.key() + "\" in " + what);
    }
}

json load_config(const std::string& path, std::initializer_list<const char*> allowed) {
    if (path.empty()) throw ConfigError("--config is required for this command");
    std::string text;
    try {
        text = read_file(path);
    } catch (const std::exception&) {
        throw ConfigError("cannot read config file: " + path);
    }
    json cfg;
    try {
        cfg = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError("config parse error in " + path + ": " + e.what());
    }
    if (!cfg.is_object()) throw ConfigError("config root must be a JSON object");
    if (!cfg.contains("version")) throw ConfigError("config is missing the \"version\" field");
    if (!cfg["version"].is_number_integer() || cfg["version"].get<int>() != 1)
        throw ConfigError("unsupported config version (this build reads version 1)");
    check_keys(cfg, "config", allowed);
    return cfg;
}

double get_number(const json& obj, const char* key) {
    if (!obj.contains(key)) throw ConfigError(std::string("missing \"") + key + "\"");
    if (!obj.at(key).is_number()) throw ConfigError(std::string("\"") + key + "\" must be a number");
    return obj.at(key).get<double>();
}

double get_number(const json& obj, const char* key, double fallback) {
    return obj.contains(key) ? get_number(obj, key) : fallback;
}

int get_int(const json& obj, const char* key, int fallback, int lo, int hi) {
    if (!obj.contains(key)) return fallback;
    if (!obj.at(key).is_number_integer())
        throw ConfigError(std::string("\"") + key + "\" must be an integer");
    int v = obj.at(key).get<int>();
    if (v < lo || v > hi)
        throw ConfigError(std::string("\"") + key + "\" must lie in [" + std::to_string(lo) +
                          ", " + std::to_string(hi) + "]");
    return v;
}

Complex get_complex(const json& v, const char* what) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
        throw ConfigError(std::string(what) + " must be a [re, im] pair");
    return Complex(v[0].get<double>(), v[1].get<double>());
}

RationalMap parse_map(const json& cfg, const std::string& config_dir) {
    if (cfg.contains("map_file")) {
        std::string p = cfg.at("map_file").get<std::string>();
        if (!p.empty() && p[0] != '/') p = config_dir + "/" + p;
        return RationalMap::from_json_file(p);
    }
    if (!cfg.contains("map")) throw ConfigError("config needs \"map\" or \"map_file\"");
    return RationalMap::from_json_text(cfg.at("map").dump());
}

std::vector<double> linspace(double lo, double hi, int count) {
    std::vector<double> grid;
    for (int i = 0; i < count; ++i)
        grid.push_back(lo + (hi - lo) * static_cast<double>(i) / (count - 1));
    return grid;
}

std::vector<double> parse_grid(const json& cfg, const char* key, double lo_def, double hi_def,
                               int count_def) {
    double lo = lo_def, hi = hi_def;
    int count = count_def;
    if (cfg.contains(key)) {
        const json& g = cfg.at(key);
        check_keys(g, key, {"lo", "hi", "count"});
        lo = get_number(g, "lo", lo);
        hi = get_number(g, "hi", hi);
        count = get_int(g, "count", count, 2, 20000);
    }
    if (!(hi > lo)) throw ConfigError(std::string("\"") + key + "\": hi must exceed lo");
    return linspace(lo, hi, count);
}

GdsVertex parse_vertex(const json& v) {
    check_keys(v, "disk", {"center", "radius", "witness"});
    GdsVertex out;
    out.center = get_complex(v.at("center"), "disk center");
    out.radius = get_number(v, "radius");
    if (!(out.radius > 0.0)) throw ConfigError("disk radius must be positive");
    out.witness = v.contains("witness") ? get_complex(v.at("witness"), "disk witness") : out.center;
    return out;
}

std::vector<GdsVertex> parse_disks(const json& arr) {
    if (!arr.is_array() || arr.empty()) throw ConfigError("\"disks\" must be a nonempty array");
    std::vector<GdsVertex> out;
    for (const json& v : arr) out.push_back(parse_vertex(v));
    return out;
}

PressureMethod parse_method(const json& cfg, const RationalMap& map, Complex base) {
    std::string m = cfg.contains("method") ? cfg.at("method").get<std::string>() : "auto";
    if (m == "tree") return PressureMethod::Tree;
    if (m == "periodic") return PressureMethod::Periodic;
    if (m == "auto") return default_method(map, base);
    throw ConfigError("\"method\" must be tree, periodic, or auto");
}

void save_pressure_csv(const std::string& path, const PressureCurve& curve) {
    CsvWriter csv({"d", "pressure", "err"});
    for (size_t i = 0; i < curve.d.size(); ++i)
        csv.row({fmt_double(curve.d[i]), fmt_double(curve.P[i]), fmt_double(curve.err[i])});
    csv.save(path);
}

void save_spectrum_csv(const std::string& path, const SpectrumCurve& spec) {
    CsvWriter csv({"alpha", "F"});
    for (size_t i = 0; i < spec.alpha.size(); ++i)
        if (std::isfinite(spec.F[i])) csv.row({fmt_double(spec.alpha[i]), fmt_double(spec.F[i])});
    csv.save(path);
}

// Bowen root on the curve's grid interval, if the pressure changes sign there.
json bowen_root_or_null(const PressureCurve& curve) {
    for (size_t i = 0; i + 1 < curve.P.size(); ++i)
        if (curve.P[i] > 0.0 && curve.P[i + 1] <= 0.0)
            return bowen_root(*curve.evaluator, curve.d[i], curve.d[i + 1]);
    return nullptr;
}

json curve_summary(const PressureCurve& curve) {
    json j;
    j["method"] = curve.method;
    j["depth"] = curve.depth;
    j["degraded"] = curve.degraded;
    j["max_dropped"] = curve.max_dropped;
    j["alpha_minus"] = curve.evaluator->alpha_minus();
    j["alpha_plus"] = curve.evaluator->alpha_plus();
    j["bowen_root"] = bowen_root_or_null(curve);
    return j;
}

int cmd_pressure(const Options& opt) {
    json cfg = load_config(opt.config,
                           {"version", "map", "map_file", "method", "depth", "d_grid", "base"});
    RationalMap map = parse_map(cfg, dir_of(opt.config));
    Complex base = cfg.contains("base") ? get_complex(cfg.at("base"), "base") : auto_base(map);
    int depth = get_int(cfg, "depth", 8, 2, 20);
    std::vector<double> grid = parse_grid(cfg, "d_grid", -1.0, 2.0, 31);
    PressureCurve curve =
        pressure_curve(map, grid, parse_method(cfg, map, base), depth, base, opt.extended_bits());

    ensure_directory(opt.out);
    save_pressure_csv(opt.out + "/pressure.csv", curve);
    atomic_write(opt.out + "/pressure.json", curve_summary(curve).dump(2) + "\n");
    SvgPlot plot("pressure curve", "d", "P(d)");
    plot.add_series({curve.d, curve.P, "#1f77b4", false, curve.method + " depth " +
                                                             std::to_string(curve.depth)});
    plot.add_hline(0.0, "#888888", "");
    atomic_write(opt.out + "/pressure.svg", plot.render());

    std::printf("pressure: %s depth %d on %zu grid points -> %s/pressure.{csv,json,svg}%s\n",
                curve.method.c_str(), curve.depth, curve.d.size(), opt.out.c_str(),
                curve.degraded ? "  [degraded]" : "");
    return curve.degraded ? 3 : 0;
}

int cmd_spectrum(const Options& opt) {
    json cfg = load_config(opt.config, {"version", "map", "map_file", "method", "depth", "d_grid",
                                        "base", "alpha_points"});
    RationalMap map = parse_map(cfg, dir_of(opt.config));
    Complex base = cfg.contains("base") ? get_complex(cfg.at("base"), "base") : auto_base(map);
    int depth = get_int(cfg, "depth", 10, 2, 20);
    int alpha_points = get_int(cfg, "alpha_points", 129, 3, 20000);
    std::vector<double> grid = parse_grid(cfg, "d_grid", -1.0, 2.0, 61);
    PressureCurve curve =
        pressure_curve(map, grid, parse_method(cfg, map, base), depth, base, opt.extended_bits());
    SpectrumCurve spec = legendre_spectrum_auto(curve, alpha_points);
    DualityReport duality = duality_check(curve, spec);

    ensure_directory(opt.out);
    save_pressure_csv(opt.out + "/pressure.csv", curve);
    save_spectrum_csv(opt.out + "/spectrum.csv", spec);
    json j = curve_summary(curve);
    j["alpha_minus"] = spec.alpha_minus;
    j["alpha_plus"] = spec.alpha_plus;
    j["d0"] = spec.d0;
    j["alpha_star"] = spec.alpha_star;
    j["F_max"] = spec.F_max;
    j["narrow_flags"] = spec.narrow_flags;
    j["duality"] = {{"legendre_residual", duality.legendre_residual},
                    {"double_transform_residual", duality.double_transform_residual},
                    {"alphaF_concave", duality.alphaF_concave},
                    {"fmax_vs_d0", duality.fmax_vs_d0}};
    atomic_write(opt.out + "/spectrum.json", j.dump(2) + "\n");

    std::vector<double> ax, fy;
    for (size_t i = 0; i < spec.alpha.size(); ++i)
        if (std::isfinite(spec.F[i])) {
            ax.push_back(spec.alpha[i]);
            fy.push_back(spec.F[i]);
        }
    SvgPlot plot("dimension spectrum", "alpha", "F(alpha)");
    plot.add_series({ax, fy, "#1f77b4", false, curve.method + " depth " +
                                                   std::to_string(curve.depth)});
    plot.add_vline(spec.alpha_minus, "#888888", "alpha-");
    plot.add_vline(spec.alpha_plus, "#888888", "alpha+");
    plot.add_hline(spec.d0, "#2ca02c", "d0");
    atomic_write(opt.out + "/spectrum.svg", plot.render());

    std::printf("spectrum: alpha in [%s, %s], d0 = %s -> %s/spectrum.{csv,json,svg}%s\n",
                fmt_g12(spec.alpha_minus).c_str(), fmt_g12(spec.alpha_plus).c_str(),
                fmt_g12(spec.d0).c_str(), opt.out.c_str(), curve.degraded ? "  [degraded]" : "");
    return curve.degraded ? 3 : 0;
}

int cmd_orbit(const Options& opt) {
    json cfg = load_config(opt.config, {"version", "map", "map_file", "start", "length", "sigma",
                                        "conical", "census"});
    RationalMap map = parse_map(cfg, dir_of(opt.config));
    if (!cfg.contains("start")) throw ConfigError("orbit config needs \"start\"");
    Complex start = get_complex(cfg.at("start"), "start");
    int length = get_int(cfg, "length", 200, 1, 2000000);
    double sigma = get_number(cfg, "sigma", 0.3);

    OrbitTrace tr = trace_orbit(map, start, length);
    HyperbolicTimeSet ht = hyperbolic_times(tr.steps, sigma);

    ensure_directory(opt.out);
    CsvWriter csv({"k", "step", "running_avg", "hyperbolic"});
    size_t next_time = 0;
    for (int k = 1; k <= tr.length(); ++k) {
        bool hyp = next_time < ht.times.size() && ht.times[next_time] == k;
        if (hyp) ++next_time;
        csv.row({fmt_double(k), fmt_double(tr.steps[k - 1]), fmt_double(tr.running_avg[k - 1]),
                 hyp ? "1" : "0"});
    }
    csv.save(opt.out + "/orbit.csv");

    json j;
    j["length"] = tr.length();
    j["escape_index"] = tr.escape_index ? json(*tr.escape_index) : json(nullptr);
    j["final_running_avg"] = tr.running_avg.empty() ? json(nullptr) : json(tr.running_avg.back());
    j["sigma"] = sigma;
    j["hyperbolic_count"] = ht.times.size();
    j["hyperbolic_density"] = ht.density;
    double mean = 0.0, mx = -1e300;
    for (double s : tr.steps) {
        mean += s;
        mx = std::max(mx, s);
    }
    mean /= std::max(1, tr.length());
    j["pliss_bound"] = mean > sigma ? json(pliss_density_bound(mean, mx, sigma)) : json(nullptr);

    if (cfg.contains("conical")) {
        const json& c = cfg.at("conical");
        check_keys(c, "conical", {"radius", "n_max", "distortion_cap"});
        double r = get_number(c, "radius", 0.3);
        int n_max = get_int(c, "n_max", std::min(length, 40), 1, 2000);
        double cap = get_number(c, "distortion_cap", 1e12);
        std::vector<DistortionReport> reps = conical_probe(map, start, r, n_max, cap);
        int ok_count = 0;
        double worst = 1.0;
        for (const DistortionReport& rep : reps)
            if (rep.ok) {
                ++ok_count;
                worst = std::max(worst, rep.distortion);
            }
        j["conical"] = {{"radius", r},
                        {"n_max", n_max},
                        {"ok_times", ok_count},
                        {"max_distortion", worst}};
    }

    if (cfg.contains("census")) {
        const json& c = cfg.at("census");
        check_keys(c, "census", {"base", "n", "radius"});
        Complex base = c.contains("base") ? get_complex(c.at("base"), "census base") : start;
        int n = get_int(c, "n", 8, 1, 22);
        double radius = get_number(c, "radius", 0.5);
        PullbackCensus census = pullback_census(map, base, n, radius, opt.threads);
        CsvWriter ccsv({"re", "im", "k"});
        for (const CensusEntry& e : census.entries)
            ccsv.row({fmt_double(e.anchor.real()), fmt_double(e.anchor.imag()), fmt_double(e.k)});
        ccsv.save(opt.out + "/census.csv");
        j["census"] = {{"n", n},
                       {"radius", radius},
                       {"classes", census.count()},
                       {"growth_exponent", std::log(std::max(1, census.count())) / n}};
    }
    atomic_write(opt.out + "/orbit.json", j.dump(2) + "\n");

    std::printf("orbit: %d steps%s, %zu hyperbolic times (density %s) -> %s/orbit.{csv,json}\n",
                tr.length(), tr.escape_index ? " (escaped)" : "", ht.times.size(),
                fmt_g12(ht.density).c_str(), opt.out.c_str());
    return 0;
}

int cmd_gds(const Options& opt) {
    json cfg = load_config(opt.config,
                           {"version", "map", "map_file", "disks", "system_file", "sample",
                            "refine", "d_grid", "alpha_points", "bridge_with", "convergence"});
    RationalMap map = parse_map(cfg, dir_of(opt.config));

    GdsSystem sys;
    if (cfg.contains("system_file")) {
        std::string p = cfg.at("system_file").get<std::string>();
        if (!p.empty() && p[0] != '/') p = dir_of(opt.config) + "/" + p;
        sys = GdsSystem::from_json_text(read_file(p));
    } else if (cfg.contains("disks")) {
        sys = gds_on_disks(map, parse_disks(cfg.at("disks")));
    } else if (cfg.contains("sample")) {
        const json& s = cfg.at("sample");
        check_keys(s, "sample", {"points", "r"});
        if (!s.contains("points") || !s.at("points").is_array())
            throw ConfigError("\"sample\" needs a \"points\" array");
        std::vector<Complex> pts;
        for (const json& p : s.at("points")) pts.push_back(get_complex(p, "sample point"));
        sys = gds_from_sample(map, pts, get_number(s, "r", 0.1));
    } else {
        throw ConfigError("gds config needs \"disks\", \"system_file\", or \"sample\"");
    }
    int refine_level = get_int(cfg, "refine", 1, 1, 8);
    if (refine_level > 1) sys = refine(sys, map, refine_level);

    ensure_directory(opt.out);
    GdsValidation val = validate_gds(sys, map);
    json vj;
    vj["separation"] = val.separation;
    vj["containment"] = val.containment;
    vj["unique_edges"] = val.unique_edges;
    vj["degrees"] = val.degrees;
    vj["notes"] = val.notes;
    vj["transitive"] = is_transitive(sys);
    atomic_write(opt.out + "/validation.json", vj.dump(2) + "\n");
    atomic_write(opt.out + "/system.json", sys.to_json_text());
    if (!val.pass())
        throw NumericError("system fails validation; see " + opt.out + "/validation.json");

    std::vector<double> d_grid = parse_grid(cfg, "d_grid", 0.0, 1.5, 31);
    int alpha_points = get_int(cfg, "alpha_points", 129, 3, 20000);
    std::shared_ptr<PressureEvaluator> eval = gds_evaluator(sys);
    std::vector<double> alpha_grid =
        linspace(eval->alpha_minus(), eval->alpha_plus(), alpha_points);
    SubsystemSpectrum ss = subsystem_spectrum(sys, d_grid, alpha_grid);

    save_pressure_csv(opt.out + "/pressure.csv", ss.curve);
    save_spectrum_csv(opt.out + "/spectrum.csv", ss.spectrum);
    json j;
    j["vertices"] = sys.vertices.size();
    j["edges"] = sys.edges.size();
    j["iterate"] = sys.iterate;
    j["refine"] = refine_level;
    j["error_bar_per_d"] = gds_error_bar(sys);
    j["alpha_minus"] = ss.spectrum.alpha_minus;
    j["alpha_plus"] = ss.spectrum.alpha_plus;
    j["bowen_root"] = bowen_root_or_null(ss.curve);

    if (cfg.contains("bridge_with")) {
        const json& b = cfg.at("bridge_with");
        check_keys(b, "bridge_with", {"disks", "search_depth"});
        if (!b.contains("disks")) throw ConfigError("\"bridge_with\" needs \"disks\"");
        GdsSystem other = gds_on_disks(map, parse_disks(b.at("disks")));
        BridgeSpec found;
        GdsSystem merged = bridge(sys, other, map, get_int(b, "search_depth", 6, 1, 16), &found);
        atomic_write(opt.out + "/bridge_system.json", merged.to_json_text());
        json paths;
        for (const Complex& p : found.path1) paths["path1"].push_back({p.real(), p.imag()});
        for (const Complex& p : found.path2) paths["path2"].push_back({p.real(), p.imag()});
        paths["shrink_depth"] = found.shrink_depth;
        paths["transitive"] = is_transitive(merged);
        atomic_write(opt.out + "/bridge_paths.json", paths.dump(2) + "\n");
        j["bridge"] = {{"vertices", merged.vertices.size()}, {"edges", merged.edges.size()}};
    }

    if (cfg.contains("convergence")) {
        const json& c = cfg.at("convergence");
        check_keys(c, "convergence", {"levels", "reference_depth"});
        int levels = get_int(c, "levels", 4, 1, 8);
        int ref_depth = get_int(c, "reference_depth", 10, 2, 18);
        std::vector<GdsSystem> family;
        for (int m = 1; m <= levels; ++m) family.push_back(refine(sys, map, m));
        ConvergenceReport rep = convergence_report(family, map, d_grid, ref_depth);
        json cj;
        cj["d"] = rep.d;
        cj["reference"] = rep.reference;
        cj["reference_err"] = rep.reference_err;
        cj["pressures"] = rep.pressures;
        cj["running_sup"] = rep.running_sup;
        cj["alpha_minus"] = rep.alpha_minus;
        cj["alpha_plus"] = rep.alpha_plus;
        cj["F_gap"] = rep.F_gap;
        cj["pressure_excess"] = rep.pressure_excess;
        cj["final_gap"] = rep.final_gap;
        cj["sup_monotone"] = rep.sup_monotone;
        atomic_write(opt.out + "/convergence.json", cj.dump(2) + "\n");
        j["convergence"] = {{"levels", levels},
                            {"final_gap", rep.final_gap},
                            {"sup_monotone", rep.sup_monotone}};
    }
    atomic_write(opt.out + "/gds.json", j.dump(2) + "\n");

    SvgPlot plot("subsystem pressure", "d", "P(d)");
    plot.add_series({ss.curve.d, ss.curve.P, "#1f77b4", false,
                     std::to_string(sys.vertices.size()) + " vertices / " +
                         std::to_string(sys.edges.size()) + " edges"});
    plot.add_hline(0.0, "#888888", "");
    atomic_write(opt.out + "/pressure.svg", plot.render());

    std::printf("gds: %zu vertices, %zu edges, alpha in [%s, %s] -> %s/\n", sys.vertices.size(),
                sys.edges.size(), fmt_g12(ss.spectrum.alpha_minus).c_str(),
                fmt_g12(ss.spectrum.alpha_plus).c_str(), opt.out.c_str());
    return 0;
}

int cmd_conformal(const Options& opt) {
    json cfg = load_config(opt.config, {"version", "map", "map_file", "d", "base", "depth",
                                        "pressure", "jacobian", "test_disks", "dim_bound"});
    RationalMap map = parse_map(cfg, dir_of(opt.config));
    double d = get_number(cfg, "d");
    Complex base = cfg.contains("base") ? get_complex(cfg.at("base"), "base") : auto_base(map);
    int depth = get_int(cfg, "depth", 8, 0, 16);

    double P;
    if (!cfg.contains("pressure") || (cfg.at("pressure").is_string() &&
                                      cfg.at("pressure").get<std::string>() == "auto")) {
        P = tree_pressure(map, d, auto_base(map), 10);
    } else if (cfg.at("pressure").is_number()) {
        P = cfg.at("pressure").get<double>();
    } else {
        throw ConfigError("\"pressure\" must be a number or \"auto\"");
    }

    ConformalEstimate est = estimate_conformal(map, d, base, depth, P);
    ensure_directory(opt.out);
    atomic_write(opt.out + "/atoms.csv", est.to_csv_text());

    json j;
    j["d"] = d;
    j["pressure"] = P;
    j["depth"] = depth;
    j["atoms"] = est.atoms.size();
    j["partition_sum"] = est.Z;
    j["degraded"] = est.degraded;

    std::vector<Disk> sets;
    if (cfg.contains("test_disks")) {
        for (const json& v : cfg.at("test_disks")) {
            check_keys(v, "test disk", {"center", "radius"});
            sets.push_back({get_complex(v.at("center"), "test disk center"),
                            get_number(v, "radius")});
        }
    } else if (cfg.contains("jacobian")) {
        // evenly indexed atoms as centers
        const json& a = cfg.at("jacobian");
        check_keys(a, "jacobian", {"sets", "radius"});
        int want = get_int(a, "sets", 16, 1, 4096);
        double radius = get_number(a, "radius", 0.25);
        int stride = std::max<int>(1, static_cast<int>(est.atoms.size()) / want);
        for (size_t i = 0; i < est.atoms.size() && static_cast<int>(sets.size()) < want;
             i += stride)
            sets.push_back({est.atoms[i].point, radius});
    }
    if (!sets.empty()) {
        JacobianReport jr = jacobian_residual_detail(est, map, sets);
        j["jacobian"] = {{"residual", jr.residual},
                         {"evaluated", jr.evaluated},
                         {"skipped", jr.skipped},
                         {"per_set", jr.per_set},
                         {"warnings", jr.warnings}};
    }

    if (cfg.contains("dim_bound")) {
        const json& b = cfg.at("dim_bound");
        check_keys(b, "dim_bound", {"x", "q", "delta", "n", "atom_depth", "bits"});
        Complex x = b.contains("x") ? get_complex(b.at("x"), "dim_bound x") : base;
        double q = get_number(b, "q");
        double delta = get_number(b, "delta", 0.3);
        std::vector<int> n_list;
        if (b.contains("n"))
            for (const json& v : b.at("n")) n_list.push_back(v.get<int>());
        else
            n_list = {60, 80, 100, 120};
        int atom_depth = get_int(b, "atom_depth", 8, 0, 16);
        int bits = get_int(b, "bits", 256, 64, 8192);
        DimBoundReport dr = pointwise_dim_report(map, d, q, P, x, delta, n_list, atom_depth, bits);
        CsvWriter csv({"n", "log_measure", "log_diam", "ratio", "ball_mass"});
        for (size_t i = 0; i < dr.n.size(); ++i)
            csv.row({fmt_double(dr.n[i]), fmt_double(dr.log_measure[i]),
                     fmt_double(dr.log_diam[i]), fmt_double(dr.ratio[i]),
                     fmt_double(dr.ball_mass[i])});
        csv.save(opt.out + "/dim_bound.csv");
        j["dim_bound"] = {{"bound", dr.bound}, {"ok", dr.ok}, {"ratio", dr.ratio}};
    }
    atomic_write(opt.out + "/conformal.json", j.dump(2) + "\n");

    std::printf("conformal: %zu atoms at depth %d (Z = %s)%s -> %s/\n", est.atoms.size(), depth,
                fmt_g12(est.Z).c_str(), est.degraded ? "  [degraded]" : "", opt.out.c_str());
    return est.degraded ? 3 : 0;
}

int cmd_wmeasure(const Options& opt) {
    json cfg = load_config(opt.config, {"version", "map", "map_file", "subsystems", "eps_seed",
                                        "depth", "C", "bridge_search_depth", "control"});
    RationalMap map = parse_map(cfg, dir_of(opt.config));
    if (!cfg.contains("subsystems") || !cfg.at("subsystems").is_array() ||
        cfg.at("subsystems").empty())
        throw ConfigError("wmeasure config needs a nonempty \"subsystems\" array");
    std::vector<GdsSystem> systems;
    for (const json& s : cfg.at("subsystems")) {
        check_keys(s, "subsystem", {"disks"});
        if (!s.contains("disks")) throw ConfigError("each subsystem needs \"disks\"");
        systems.push_back(gds_on_disks(map, parse_disks(s.at("disks"))));
    }
    double eps_seed = get_number(cfg, "eps_seed", 0.1);
    int depth = get_int(cfg, "depth", 6, 0, 24);
    double C = get_number(cfg, "C", 10.0);
    int search_depth = get_int(cfg, "bridge_search_depth", 6, 1, 16);
    bool control = cfg.contains("control") ? cfg.at("control").get<bool>() : true;

    WSchedule sch = build_schedule(map, systems, {}, eps_seed, depth, C, search_depth);
    RunTrace trace = synthesize_trace(sch, map);
    OscillationReport rep = verify_oscillation(trace, sch);

    ensure_directory(opt.out);
    atomic_write(opt.out + "/schedule.json", sch.to_json_text());
    atomic_write(opt.out + "/oscillation.json", rep.to_json_text(sch));

    std::vector<double> head = trace.prefix_values(2048);
    CsvWriter csv({"k", "step", "running_avg"});
    double sum = 0.0;
    for (size_t k = 0; k < head.size(); ++k) {
        sum += head[k];
        csv.row({fmt_double(k + 1), fmt_double(head[k]), fmt_double(sum / (k + 1))});
    }
    csv.save(opt.out + "/trace_head.csv");

    if (control) {
        WSchedule cut = sch.truncated_copy();
        RunTrace cut_trace = synthesize_trace(cut, map);
        atomic_write(opt.out + "/oscillation_truncated.json",
                     verify_oscillation(cut_trace, cut).to_json_text(cut));
    }

    std::printf(
        "wmeasure: %d blocks, checkpoints %s, liminf %s, limsup %s -> %s/\n", depth,
        rep.all_pass ? "all pass" : (std::to_string(rep.failed) + " failed").c_str(),
        fmt_g12(rep.liminf_estimate).c_str(), fmt_g12(rep.limsup_estimate).c_str(),
        opt.out.c_str());
    return 0;
}

int cmd_selftest(const Options& opt) {
    std::vector<CriterionResult> results = run_acceptance(opt.out, opt.seed);
    std::string summary = acceptance_summary(results);
    std::fputs(summary.c_str(), stdout);
    return all_pass(results) ? 0 : 1;
}

}  // namespace
}  // namespace lyap

int main(int argc, char** argv) {
    CLI::App app{"Lyapunov spectra of rational maps via thermodynamic formalism"};
    app.require_subcommand(1);
    lyap::Options opt;

    auto add_common = [&](CLI::App* cmd, bool needs_config) {
        if (needs_config)
            cmd->add_option("--config", opt.config, "JSON config file")->required();
        cmd->add_option("--out", opt.out, "output directory (default: out)");
        cmd->add_option("--threads", opt.threads, "worker threads")->check(CLI::Range(1, 256));
        cmd->add_option("--precision", opt.precision, "double | extended")
            ->check(CLI::IsMember({"double", "extended"}));
    };

    CLI::App* c_pressure = app.add_subcommand("pressure", "pressure curve P(d) of a rational map");
    add_common(c_pressure, true);
    CLI::App* c_spectrum =
        app.add_subcommand("spectrum", "Legendre dimension spectrum F(alpha)");
    add_common(c_spectrum, true);
    CLI::App* c_orbit =
        app.add_subcommand("orbit", "orbit trace, hyperbolic times, pullback census");
    add_common(c_orbit, true);
    CLI::App* c_gds =
        app.add_subcommand("gds", "graph-directed subsystems: validation, pressure, bridges");
    add_common(c_gds, true);
    CLI::App* c_conformal =
        app.add_subcommand("conformal", "conformal measure estimate and dimension bounds");
    add_common(c_conformal, true);
    CLI::App* c_wmeasure =
        app.add_subcommand("wmeasure", "oscillating Birkhoff averages from block schedules");
    add_common(c_wmeasure, true);
    CLI::App* c_selftest = app.add_subcommand("selftest", "run the full verification battery");
    add_common(c_selftest, false);
    c_selftest->add_option("--seed", opt.seed, "seed for the randomized properties");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (c_pressure->parsed()) return lyap::cmd_pressure(opt);
        if (c_spectrum->parsed()) return lyap::cmd_spectrum(opt);
        if (c_orbit->parsed()) return lyap::cmd_orbit(opt);
        if (c_gds->parsed()) return lyap::cmd_gds(opt);
        if (c_conformal->parsed()) return lyap::cmd_conformal(opt);
        if (c_wmeasure->parsed()) return lyap::cmd_wmeasure(opt);
        if (c_selftest->parsed()) return lyap::cmd_selftest(opt);
    } catch (const lyap::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const lyap::NumericError& e) {
        std::fprintf(stderr, "numeric error: %s\n", e.what());
        return 3;
    } catch (const lyap::SearchError& e) {
        std::fprintf(stderr, "search failure: %s\n", e.what());
        return 4;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
    return 0;
}
