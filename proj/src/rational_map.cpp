#include "lyapspec/rational_map.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace lyap {

namespace {
constexpr double kPointTol = 1e-8;

bool same_point(const SpherePoint& a, const SpherePoint& b) {
    if (a.at_inf || b.at_inf) return a.at_inf && b.at_inf;
    return std::abs(a.z - b.z) <= kPointTol * (1.0 + std::max(std::abs(a.z), std::abs(b.z)));
}

bool contains_point(const std::vector<SpherePoint>& set, const SpherePoint& p) {
    for (const SpherePoint& s : set)
        if (same_point(s, p)) return true;
    return false;
}

void insert_point(std::vector<SpherePoint>& set, const SpherePoint& p) {
    if (!contains_point(set, p)) set.push_back(p);
}
}  // namespace

RationalMap::RationalMap(Poly num, Poly den) : num_(std::move(num)), den_(std::move(den)) {
    if (den_.is_zero()) throw ConfigError("rational map: zero denominator");
    degree_ = std::max(num_.degree(), den_.degree());
    if (degree_ < 2) throw ConfigError("rational map: degree must be >= 2");
    if (std::abs(num_.leading()) == 0.0) throw ConfigError("rational map: zero leading coefficient");
    if (num_.degree() >= 1 && den_.degree() >= 1 && root_separation(num_, den_) < 1e-9)
        throw ConfigError("rational map: numerator and denominator share a root (vanishing resultant)");
    wronskian_ = num_.derivative() * den_ - num_ * den_.derivative();
    if (wronskian_.is_zero()) throw ConfigError("rational map: derivative vanishes identically");
}

RationalMap RationalMap::from_json_text(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    auto parse_poly = [](const nlohmann::json& arr) {
        std::vector<Complex> coef;
        for (const auto& pair : arr) {
            if (!pair.is_array() || pair.size() != 2)
                throw ConfigError("map json: coefficients must be [re, im] pairs");
            coef.emplace_back(pair[0].get<double>(), pair[1].get<double>());
        }
        return Poly(std::move(coef));
    };
    if (!j.contains("num") || !j.contains("den")) throw ConfigError("map json: requires 'num' and 'den'");
    for (auto& [key, value] : j.items()) {
        (void)value;
        if (key != "num" && key != "den") throw ConfigError("map json: unknown key '" + key + "'");
    }
    return RationalMap(parse_poly(j["num"]), parse_poly(j["den"]));
}

RationalMap RationalMap::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open map file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json_text(ss.str());
}

std::string RationalMap::to_json_text() const {
    nlohmann::json j;
    auto dump_poly = [](const Poly& p) {
        nlohmann::json arr = nlohmann::json::array();
        for (const Complex& c : p.coefficients()) arr.push_back({c.real(), c.imag()});
        return arr;
    };
    j["num"] = dump_poly(num_);
    j["den"] = dump_poly(den_);
    return j.dump();
}

SpherePoint RationalMap::evaluate(const SpherePoint& z) const {
    const int dp = num_.degree(), dq = den_.degree();
    if (z.at_inf) {
        if (dp > dq) return SpherePoint::infinity();
        if (dp < dq) return SpherePoint(Complex(0.0, 0.0));
        return SpherePoint(num_.leading() / den_.leading());
    }
    if (std::abs(z.z) > kChartBound) {
        // Work in the w = 1/z chart: f(z) = z^(dp-dq) * numrev(w)/denrev(w).
        Complex w = 1.0 / z.z;
        Complex nr = num_.eval_reversed(w);
        Complex dr = den_.eval_reversed(w);
        if (std::abs(dr) == 0.0) return SpherePoint::infinity();
        Complex ratio = nr / dr;
        double log_mag = std::log(std::abs(z.z)) * (dp - dq) + std::log(std::max(std::abs(ratio), 1e-300));
        if (log_mag > std::log(1e300)) return SpherePoint::infinity();
        Complex zpow(1.0, 0.0);
        if (dp >= dq)
            for (int i = 0; i < dp - dq; ++i) zpow *= z.z;
        else
            for (int i = 0; i < dq - dp; ++i) zpow /= z.z;
        return SpherePoint(zpow * ratio);
    }
    Complex pv = num_.eval(z.z);
    Complex qv = den_.eval(z.z);
    double scale = std::max(num_.coefficient_scale(), den_.coefficient_scale()) *
                   std::max(1.0, std::pow(std::abs(z.z), degree_));
    if (std::abs(qv) == 0.0 || std::abs(pv / qv) > 1e300) {
        if (std::abs(pv) <= 1e-14 * scale && std::abs(qv) <= 1e-14 * scale)
            throw NumericError("evaluate: numerator and denominator vanish together");
        return SpherePoint::infinity();
    }
    return SpherePoint(pv / qv);
}

double RationalMap::log_deriv_modulus(const SpherePoint& z) const {
    if (z.at_inf) {
        if (is_polynomial()) return neg_infinity();  // superattracting fixed point
        // Spherical derivative at infinity, probed just inside the chart bound.
        SpherePoint probe(Complex(kChartBound * 0.99, 0.0));
        return log_deriv_modulus(probe);
    }
    Complex wv = wronskian_.eval(z.z);
    if (std::abs(wv) == 0.0) return neg_infinity();
    Complex qv = den_.eval(z.z);
    double planar = std::log(std::abs(wv)) - 2.0 * std::log(std::abs(qv));
    if (std::abs(z.z) <= 1.0e6) return planar;
    // Near the chart bound switch to the spherical derivative, which stays
    // finite for orbits passing by infinity.
    SpherePoint img = evaluate(z);
    double num_metric = std::log1p(std::norm(z.z));
    double den_metric = img.at_inf ? 2.0 * std::log(kChartBound) : std::log1p(std::norm(img.z));
    return planar + num_metric - den_metric;
}

std::vector<SpherePoint> RationalMap::critical_points() const {
    std::vector<SpherePoint> crit;
    if (wronskian_.degree() >= 1) {
        for (const Complex& r : poly_roots(wronskian_)) crit.emplace_back(r);
    }
    int inf_mult = 2 * degree_ - 2 - wronskian_.degree();
    for (int i = 0; i < inf_mult; ++i) crit.push_back(SpherePoint::infinity());
    return crit;
}

std::vector<Complex> RationalMap::preimage_step(Complex z) const {
    Poly shifted = num_ - den_.scaled(z);
    if (shifted.degree() < 1) throw NumericError("preimage_step: constant fiber equation");
    std::vector<Complex> roots = poly_roots(shifted);
    std::sort(roots.begin(), roots.end(), complex_less);
    return roots;
}

std::vector<Complex> RationalMap::finite_fixed_points() const {
    Poly zpoly{Complex(0.0, 0.0), Complex(1.0, 0.0)};
    Poly fixeq = num_ - zpoly * den_;
    if (fixeq.degree() < 1) return {};
    return poly_roots(fixeq);
}

ExceptionalReport RationalMap::detect_exceptional(int orbit_depth, int pool_cap) const {
    ExceptionalReport report;

    std::vector<SpherePoint> crit = critical_points();
    std::vector<SpherePoint> pool;
    // Forward orbits of critical points seed the pool: any finite invariant
    // set must consist of points with critically degenerate backward orbits.
    for (const SpherePoint& c : crit) {
        SpherePoint p = c;
        insert_point(pool, p);
        for (int i = 0; i < orbit_depth; ++i) {
            p = evaluate(p);
            insert_point(pool, p);
        }
    }
    for (const Complex& fp : finite_fixed_points()) insert_point(pool, SpherePoint(fp));
    if (is_polynomial()) insert_point(pool, SpherePoint::infinity());
    if (static_cast<int>(pool.size()) > pool_cap) {
        pool.resize(pool_cap);
        report.pool_truncated = true;
    }

    // Full backward step on the sphere: finite solutions plus infinity when
    // the fiber degenerates (or the target is the image of infinity).
    auto full_preimage = [&](const SpherePoint& s) {
        std::vector<SpherePoint> pre;
        if (s.at_inf) {
            if (den_.degree() >= 1)
                for (const Complex& r : poly_roots(den_)) insert_point(pre, SpherePoint(r));
            if (num_.degree() > den_.degree()) insert_point(pre, SpherePoint::infinity());
        } else {
            Poly shifted = num_ - den_.scaled(s.z);
            if (shifted.degree() >= 1)
                for (const Complex& r : poly_roots(shifted)) insert_point(pre, SpherePoint(r));
            if (shifted.degree() < degree_) insert_point(pre, SpherePoint::infinity());
        }
        return pre;
    };

    // A candidate set is invariant when pulling it back and removing the
    // critical points reproduces the set exactly.
    auto verify = [&](const std::vector<SpherePoint>& sigma) {
        std::vector<SpherePoint> pre;
        for (const SpherePoint& s : sigma)
            for (const SpherePoint& q : full_preimage(s)) insert_point(pre, q);
        std::vector<SpherePoint> reduced;
        for (const SpherePoint& q : pre)
            if (!contains_point(crit, q)) insert_point(reduced, q);
        if (reduced.size() != sigma.size()) return false;
        for (const SpherePoint& s : sigma)
            if (!contains_point(reduced, s)) return false;
        return true;
    };

    // Exhaustive subsets of size 1..4 from the pool.
    const int n = static_cast<int>(pool.size());
    std::vector<std::vector<SpherePoint>> valid;
    std::vector<int> idx;
    auto search = [&](auto&& self, int start, int remaining) -> void {
        if (!idx.empty()) {
            std::vector<SpherePoint> sigma;
            for (int i : idx) sigma.push_back(pool[i]);
            if (verify(sigma)) valid.push_back(sigma);
        }
        if (remaining == 0) return;
        for (int i = start; i < n; ++i) {
            idx.push_back(i);
            self(self, i + 1, remaining - 1);
            idx.pop_back();
        }
    };
    search(search, 0, 4);

    if (valid.empty()) return report;

    // Largest invariant set: take the union of all valid candidates and
    // re-verify; if the union fails, fall back to the biggest single witness.
    std::vector<SpherePoint> unioned;
    for (const auto& sigma : valid)
        for (const SpherePoint& s : sigma) insert_point(unioned, s);
    if (verify(unioned)) {
        report.sigma = unioned;
    } else {
        report.union_inconsistent = true;
        size_t best = 0;
        for (size_t i = 1; i < valid.size(); ++i)
            if (valid[i].size() > valid[best].size()) best = i;
        report.sigma = valid[best];
    }
    std::sort(report.sigma.begin(), report.sigma.end(), sphere_less);
    report.exceptional = true;
    return report;
}

}  // namespace lyap
