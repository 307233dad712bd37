#include "lyapspec/pressure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>

#include "lyapspec/bigcomplex.hpp"
#include "lyapspec/io.hpp"

namespace lyap {

namespace {

bool finite_c(Complex z) {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
}

// num' * den - num * den'; f' = wronskian / den^2 in the planar chart.
Poly wronskian_of(const RationalMap& map) {
    return map.num().derivative() * map.den() - map.num() * map.den().derivative();
}

}  // namespace

// ---------------------------------------------------------------------------
// Preimage trees

PreimageTree preimage_tree(const RationalMap& map, Complex base, int depth, int extended_bits) {
    if (depth < 0) throw ConfigError("preimage tree depth must be nonnegative");
    if (std::pow(static_cast<double>(map.degree()), depth) > 2e6)
        throw ConfigError("preimage tree would exceed 2e6 leaves; lower the depth");

    std::vector<Complex> crit;
    for (const SpherePoint& c : map.critical_points())
        if (c.finite()) crit.push_back(c.z);
    auto near_critical = [&crit](Complex w) {
        for (Complex c : crit)
            if (std::abs(w - c) <= 1e-9 * (1.0 + std::abs(c))) return true;
        return false;
    };

    PreimageTree tree;
    tree.base = base;
    tree.depth = depth;

    PreimageNode root;
    root.point = base;
    root.log_deriv = map.log_deriv_modulus(SpherePoint(base));
    tree.levels.push_back({root});

    const bool big = extended_bits > 0;
    const Poly wr = wronskian_of(map);
    std::vector<BigComplex> prev_big;
    if (big) prev_big.emplace_back(base, extended_bits);

    for (int level = 1; level <= depth; ++level) {
        const std::vector<PreimageNode>& parents = tree.levels.back();
        std::vector<PreimageNode> next;
        next.reserve(parents.size() * static_cast<size_t>(map.degree()));
        std::vector<BigComplex> next_big;

        for (size_t p = 0; p < parents.size(); ++p) {
            const PreimageNode& par = parents[p];
            if (big) {
                std::vector<BigComplex> kids = preimage_step_big(map, prev_big[p]);
                for (BigComplex& wb : kids) {
                    PreimageNode node;
                    node.point = wb.to_std();
                    node.parent = static_cast<int>(p);
                    node.log_deriv = eval_poly_big(wr, wb).log_abs() -
                                     2.0 * eval_poly_big(map.den(), wb).log_abs();
                    SpherePoint fw = map.evaluate(SpherePoint(node.point));
                    double res = fw.finite() ? std::abs(fw.z - par.point)
                                             : std::numeric_limits<double>::infinity();
                    node.flagged = par.flagged || near_critical(node.point) ||
                                   res > 1e-9 * (1.0 + std::abs(par.point)) ||
                                   !std::isfinite(node.log_deriv);
                    if (node.flagged) ++tree.flagged_nodes;
                    next.push_back(node);
                    next_big.push_back(std::move(wb));
                }
            } else {
                for (Complex w : map.preimage_step(par.point)) {
                    PreimageNode node;
                    node.point = w;
                    node.parent = static_cast<int>(p);
                    node.log_deriv = map.log_deriv_modulus(SpherePoint(w));
                    SpherePoint fw = map.evaluate(SpherePoint(w));
                    double res = fw.finite() ? std::abs(fw.z - par.point)
                                             : std::numeric_limits<double>::infinity();
                    node.flagged = par.flagged || near_critical(w) ||
                                   res > 1e-9 * (1.0 + std::abs(par.point)) ||
                                   !std::isfinite(node.log_deriv);
                    if (node.flagged) ++tree.flagged_nodes;
                    next.push_back(node);
                }
            }
        }
        if (next.empty())
            throw NumericError("preimage tree died out: every branch left the finite chart");
        tree.levels.push_back(std::move(next));
        if (big) prev_big = std::move(next_big);
    }
    return tree;
}

// ---------------------------------------------------------------------------
// Weight families

double WeightFamily::pressure(double d) const {
    if (sums.empty()) throw NumericError("pressure of an empty weight family");
    if (n <= 0) throw NumericError("weight family carries no orbit length");
    double m = -std::numeric_limits<double>::infinity();
    for (double s : sums) {
        if (!std::isfinite(s)) throw NumericError("non-finite Birkhoff sum in weight family");
        m = std::max(m, -d * s);
    }
    double acc = 0.0;
    for (double s : sums) acc += std::exp(-d * s - m);
    return (m + std::log(acc)) / n;
}

double WeightFamily::mean_step(double d) const {
    if (sums.empty()) throw NumericError("mean step of an empty weight family");
    double m = -std::numeric_limits<double>::infinity();
    for (double s : sums) m = std::max(m, -d * s);
    double num = 0.0, den = 0.0;
    for (double s : sums) {
        double w = std::exp(-d * s - m);
        num += w * (s / n);
        den += w;
    }
    return num / den;
}

double WeightFamily::dropped_mass(double d) const {
    if (dropped_sums.empty()) return 0.0;
    if (sums.empty()) return 1.0;
    double m = -std::numeric_limits<double>::infinity();
    for (double s : sums) m = std::max(m, -d * s);
    for (double s : dropped_sums)
        if (std::isfinite(s)) m = std::max(m, -d * s);
    double kept = 0.0, dropped = 0.0;
    for (double s : sums) kept += std::exp(-d * s - m);
    for (double s : dropped_sums) {
        if (std::isfinite(s)) {
            dropped += std::exp(-d * s - m);
        } else {
            // a sum of -inf means the branch ran through a critical point;
            // its formal weight dominates everything for d > 0
            if (d > 0.0) return 1.0;
            if (d == 0.0) dropped += std::exp(-m);
        }
    }
    return dropped / (kept + dropped);
}

double WeightFamily::alpha_min() const {
    if (sums.empty()) throw NumericError("alpha range of an empty weight family");
    return *std::min_element(sums.begin(), sums.end()) / n;
}

double WeightFamily::alpha_max() const {
    if (sums.empty()) throw NumericError("alpha range of an empty weight family");
    return *std::max_element(sums.begin(), sums.end()) / n;
}

WeightFamily tree_weights(const RationalMap& map, Complex base, int depth, int extended_bits) {
    if (depth < 1) throw ConfigError("tree weights need depth >= 1");
    PreimageTree tree = preimage_tree(map, base, depth, extended_bits);

    // Birkhoff sums along forward orbits leaf -> base accumulate the node
    // log-derivatives of every level except the base itself.
    std::vector<double> running(1, 0.0);
    for (int level = 1; level <= depth; ++level) {
        const std::vector<PreimageNode>& nodes = tree.levels[level];
        std::vector<double> next(nodes.size());
        for (size_t i = 0; i < nodes.size(); ++i)
            next[i] = running[nodes[i].parent] + nodes[i].log_deriv;
        running = std::move(next);
    }

    WeightFamily fam;
    fam.n = depth;
    const std::vector<PreimageNode>& leaves = tree.leaves();
    for (size_t i = 0; i < leaves.size(); ++i) {
        if (leaves[i].flagged || !std::isfinite(running[i]))
            fam.dropped_sums.push_back(running[i]);
        else
            fam.sums.push_back(running[i]);
    }
    return fam;
}

double tree_pressure(const RationalMap& map, double d, Complex base, int depth) {
    return tree_weights(map, base, depth).pressure(d);
}

// ---------------------------------------------------------------------------
// Periodic points

namespace {

struct IterateGap {
    Complex g{0.0, 0.0};   // f^n(z) - z
    Complex gp{0.0, 0.0};  // (f^n)'(z) - 1
    bool ok = false;
};

IterateGap iterate_gap(const RationalMap& map, const Poly& wr, Complex z, int n) {
    Complex w = z, dw(1.0, 0.0);
    for (int j = 0; j < n; ++j) {
        Complex q = map.den().eval(w);
        if (std::abs(q) == 0.0) return {};
        Complex fp = wr.eval(w) / (q * q);
        dw *= fp;
        w = map.num().eval(w) / q;
        if (!finite_c(w) || !finite_c(dw) || std::abs(w) > RationalMap::kChartBound) return {};
    }
    IterateGap out;
    out.g = w - z;
    out.gp = dw - Complex(1.0, 0.0);
    out.ok = true;
    return out;
}

std::optional<Complex> newton_periodic(const RationalMap& map, const Poly& wr, Complex z, int n) {
    for (int it = 0; it < 80; ++it) {
        IterateGap r = iterate_gap(map, wr, z, n);
        if (!r.ok || std::abs(r.gp) < 1e-300) return std::nullopt;
        Complex step = r.g / r.gp;
        z -= step;
        if (!finite_c(z) || std::abs(z) > RationalMap::kChartBound) return std::nullopt;
        if (std::abs(step) <= 1e-12 * (1.0 + std::abs(z))) {
            IterateGap check = iterate_gap(map, wr, z, n);
            if (!check.ok) return std::nullopt;
            // |g'| can be enormous at strongly repelling points, so the
            // closing tolerance has to scale with it: Newton stalls at
            // |g| ~ eps * |g'| * |z| no matter how true the root is.
            if (std::abs(check.g) <= 1e-9 * (1.0 + std::abs(check.gp)) * (1.0 + std::abs(z)))
                return z;
            return std::nullopt;
        }
    }
    return std::nullopt;
}

// Clusters points that agree to relative 1e-8; keyed by real part so lookup
// stays cheap when thousands of roots accumulate.
bool cluster_insert(std::multimap<double, Complex>& found, Complex z) {
    double tol = 1e-8 * (1.0 + std::abs(z));
    auto lo = found.lower_bound(z.real() - 2.0 * tol);
    auto hi = found.upper_bound(z.real() + 2.0 * tol);
    for (auto it = lo; it != hi; ++it) {
        double t = std::max(tol, 1e-8 * (1.0 + std::abs(it->second)));
        if (std::abs(it->second - z) <= t) return false;
    }
    found.emplace(z.real(), z);
    return true;
}

}  // namespace

PeriodicPoints periodic_points(const RationalMap& map, int n, uint64_t seed) {
    if (n < 1) throw ConfigError("period must be at least 1");
    double total = std::pow(static_cast<double>(map.degree()), n);
    if (total > 5e5)
        throw ConfigError("degree^n exceeds 5e5: the periodic solver would not terminate in time");

    // Fixed-point count of f^n on the sphere is degree^n + 1; points at
    // infinity are not representable here, so subtract the orbit of infinity
    // when it closes up.
    SpherePoint inf_orbit = SpherePoint::infinity();
    for (int j = 0; j < n; ++j) inf_orbit = map.evaluate(inf_orbit);
    const int expected = static_cast<int>(std::llround(total)) + (inf_orbit.at_inf ? 0 : 1);

    const Poly wr = wronskian_of(map);
    const Complex base = auto_base(map);
    std::multimap<double, Complex> found;

    // Backward branches of a generic point shadow the periodic orbits.  A
    // depth-n tree puts one seed per orbit, but the seed-to-root offset can
    // reach a constant fraction of the root spacing (the branch angles and the
    // root angles wrap at slightly different rates), so a few seeds near the
    // wrap land in the wrong Newton basin.  Oversampling a few levels deeper
    // places several seeds per root, each well inside its basin.
    {
        int seed_depth = n;
        double leaves = total;
        const double leaf_cap = std::max(8.0 * total, 512.0);
        while (seed_depth - n < 3 && leaves * map.degree() <= leaf_cap &&
               leaves * map.degree() <= 1.5e6) {
            ++seed_depth;
            leaves *= map.degree();
        }
        PreimageTree tree = preimage_tree(map, base, seed_depth);
        for (const PreimageNode& leaf : tree.leaves()) {
            if (std::optional<Complex> z = newton_periodic(map, wr, leaf.point, n))
                cluster_insert(found, *z);
        }
    }

    // Random restarts for stragglers; stop when a few rounds in a row add
    // nothing new.
    Rng rng(seed);
    const int per_round = std::max(64, expected / 8);
    int stall = 0;
    for (int round = 0; round < 200 && static_cast<int>(found.size()) < expected && stall < 8;
         ++round) {
        double reach = 0.0;
        for (const auto& kv : found) reach = std::max(reach, std::abs(kv.second));
        // Keep the samples concentrated where roots were already seen: remote
        // samples rarely sit in the basin of a missing root.
        const double radius = std::max(1.5 * (0.5 + reach), 1.0 + std::abs(base));
        size_t before = found.size();
        for (int i = 0; i < per_round; ++i) {
            Complex z0(rng.uniform(-radius, radius), rng.uniform(-radius, radius));
            if (std::optional<Complex> z = newton_periodic(map, wr, z0, n))
                cluster_insert(found, *z);
        }
        stall = (found.size() == before) ? stall + 1 : 0;
    }

    std::vector<Complex> unique;
    unique.reserve(found.size());
    for (const auto& kv : found) unique.push_back(kv.second);
    std::sort(unique.begin(), unique.end(), complex_less);

    PeriodicPoints out;
    out.n = n;
    out.expected = expected;
    out.complete = static_cast<int>(unique.size()) >= expected;
    for (Complex z : unique) {
        // Multiplier along the cycle via spherical derivatives: the chart
        // factors telescope, so the total equals log|(f^n)'| even when the
        // orbit passes near infinity.
        SpherePoint w(z);
        double mlog = 0.0;
        bool usable = true;
        for (int j = 0; j < n; ++j) {
            double ld = map.log_deriv_modulus(w);
            if (!std::isfinite(ld)) {
                usable = false;  // superattracting: runs through a critical point
                break;
            }
            mlog += ld;
            w = map.evaluate(w);
        }
        if (!usable || mlog <= std::log1p(1e-6)) {
            ++out.excluded_nonrepelling;
            continue;
        }
        out.points.push_back(z);
        out.multiplier_log.push_back(mlog);
    }
    return out;
}

WeightFamily periodic_weights(const PeriodicPoints& pts) {
    WeightFamily fam;
    fam.n = pts.n;
    fam.sums = pts.multiplier_log;
    return fam;
}

double periodic_pressure(const RationalMap& map, double d, int n) {
    return periodic_weights(periodic_points(map, n)).pressure(d);
}

// ---------------------------------------------------------------------------
// Evaluators and curves

namespace {

class FamilyEvaluator : public PressureEvaluator {
  public:
    explicit FamilyEvaluator(WeightFamily fam) : fam_(std::move(fam)) {}
    double pressure(double d) const override { return fam_.pressure(d); }
    double alpha_minus() const override { return fam_.alpha_min(); }
    double alpha_plus() const override { return fam_.alpha_max(); }
    double dropped_mass(double d) const override { return fam_.dropped_mass(d); }

  private:
    WeightFamily fam_;
};

}  // namespace

std::shared_ptr<PressureEvaluator> make_family_evaluator(WeightFamily family) {
    return std::make_shared<FamilyEvaluator>(std::move(family));
}

bool PressureCurve::convex_within_tolerance() const {
    if (d.size() < 3) return true;
    double scale = 1.0;
    for (double p : P) scale = std::max(scale, std::fabs(p));
    for (size_t i = 1; i + 1 < d.size(); ++i) {
        double h1 = d[i] - d[i - 1], h2 = d[i + 1] - d[i];
        if (h1 <= 0.0 || h2 <= 0.0) return false;
        double s1 = (P[i] - P[i - 1]) / h1;
        double s2 = (P[i + 1] - P[i]) / h2;
        if (s2 - s1 < -1e-6 * scale) return false;
    }
    return true;
}

PressureCurve pressure_curve(const RationalMap& map, const std::vector<double>& d_grid,
                             PressureMethod method, int depth, Complex base,
                             int extended_bits) {
    if (depth < 2) throw ConfigError("pressure curve needs depth >= 2 for its error bars");

    PressureCurve curve;
    curve.depth = depth;
    WeightFamily deep, shallow;
    if (method == PressureMethod::Tree) {
        curve.method = "tree";
        deep = tree_weights(map, base, depth, extended_bits);
        shallow = tree_weights(map, base, depth - 1, extended_bits);
    } else {
        curve.method = "periodic";
        PeriodicPoints fine = periodic_points(map, depth);
        PeriodicPoints coarse = periodic_points(map, depth - 1);
        deep = periodic_weights(fine);
        shallow = periodic_weights(coarse);
        int located = static_cast<int>(fine.points.size()) + fine.excluded_nonrepelling;
        if ((fine.expected - located) * 100 > fine.expected) curve.degraded = true;
    }

    curve.d = d_grid;
    curve.P.reserve(d_grid.size());
    curve.err.reserve(d_grid.size());
    for (double d : d_grid) {
        curve.P.push_back(deep.pressure(d));
        curve.err.push_back(std::fabs(curve.P.back() - shallow.pressure(d)));
        curve.max_dropped = std::max(curve.max_dropped, deep.dropped_mass(d));
    }
    if (curve.max_dropped > 1e-3) curve.degraded = true;
    curve.evaluator = make_family_evaluator(std::move(deep));
    if (!curve.convex_within_tolerance()) curve.degraded = true;
    return curve;
}

PressureCurve curve_from_evaluator(std::shared_ptr<PressureEvaluator> eval,
                                   const std::vector<double>& d_grid, std::string method,
                                   int depth, double err_bar) {
    if (!eval) throw NumericError("curve_from_evaluator needs an evaluator");
    PressureCurve curve;
    curve.method = std::move(method);
    curve.depth = depth;
    curve.d = d_grid;
    for (double d : d_grid) {
        curve.P.push_back(eval->pressure(d));
        curve.err.push_back(err_bar * std::fabs(d));
        curve.max_dropped = std::max(curve.max_dropped, eval->dropped_mass(d));
    }
    curve.evaluator = std::move(eval);
    if (!curve.convex_within_tolerance()) curve.degraded = true;
    return curve;
}

PressureMethod default_method(const RationalMap& map, Complex base) {
    // Proxy for the backward-orbit closure: leaves of a modest preimage tree.
    int depth = 8;
    while (depth > 2 && std::pow(static_cast<double>(map.degree()), depth) > 4096.0) --depth;
    PreimageTree tree = preimage_tree(map, base, depth);
    const std::vector<PreimageNode>& leaves = tree.leaves();

    for (const SpherePoint& c : map.critical_points()) {
        SpherePoint w = c;
        for (int step = 0; step < 48; ++step) {
            w = map.evaluate(w);
            if (!w.finite() || std::abs(w.z) > 1e6) break;  // escapes: harmless for the tree
            if (step < 8) continue;
            for (const PreimageNode& leaf : leaves) {
                if (std::abs(w.z - leaf.point) < 5e-2) return PressureMethod::Periodic;
            }
        }
    }
    return PressureMethod::Tree;
}

// ---------------------------------------------------------------------------
// Legendre transform

double legendre_value(const PressureCurve& curve, double alpha) {
    if (curve.d.empty()) throw NumericError("legendre transform of an empty pressure curve");
    double v = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < curve.d.size(); ++i)
        v = std::min(v, curve.P[i] + curve.d[i] * alpha);
    return v;
}

double bowen_root(const PressureEvaluator& eval, double d_lo, double d_hi, double tol) {
    if (!(d_lo < d_hi)) throw ConfigError("bowen_root needs d_lo < d_hi");
    double plo = eval.pressure(d_lo);
    double phi = eval.pressure(d_hi);
    if (plo == 0.0) return d_lo;
    if (phi == 0.0) return d_hi;
    if ((plo > 0.0) == (phi > 0.0))
        throw SearchError("pressure does not change sign on the given interval");
    while (d_hi - d_lo > tol) {
        double mid = 0.5 * (d_lo + d_hi);
        double pm = eval.pressure(mid);
        if (pm == 0.0) return mid;
        if ((pm > 0.0) == (plo > 0.0)) {
            d_lo = mid;
            plo = pm;
        } else {
            d_hi = mid;
        }
    }
    return 0.5 * (d_lo + d_hi);
}

SpectrumCurve legendre_spectrum(const PressureCurve& curve, const std::vector<double>& alpha_grid) {
    if (!curve.evaluator) throw NumericError("pressure curve carries no evaluator");
    if (curve.d.empty()) throw NumericError("legendre spectrum needs a nonempty d grid");

    SpectrumCurve s;
    s.alpha_minus = curve.evaluator->alpha_minus();
    s.alpha_plus = curve.evaluator->alpha_plus();
    s.d0 = bowen_root(*curve.evaluator, curve.d.front(), curve.d.back());

    const double h = 1e-5;
    double slope = -(curve.evaluator->pressure(s.d0 + h) - curve.evaluator->pressure(s.d0 - h)) /
                   (2.0 * h);
    s.alpha_star = std::clamp(slope, s.alpha_minus, s.alpha_plus);

    std::vector<double> grid = alpha_grid;
    grid.push_back(s.alpha_star);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    s.F_max = neg_infinity();
    for (double a : grid) {
        const double wtol = 1e-9 * (1.0 + std::fabs(a));
        double F;
        if (a < s.alpha_minus - wtol || a > s.alpha_plus + wtol) {
            // outside the slope range the infimum runs away along the
            // extreme-slope extension
            F = neg_infinity();
        } else if (std::fabs(a) <= 1e-12) {
            F = s.d0;  // removable singularity of G(alpha)/alpha
        } else {
            double v = std::numeric_limits<double>::infinity();
            size_t arg = 0;
            for (size_t i = 0; i < curve.d.size(); ++i) {
                double t = curve.P[i] + curve.d[i] * a;
                if (t < v) {
                    v = t;
                    arg = i;
                }
            }
            F = v / a;
            bool interior = a > s.alpha_minus + wtol && a < s.alpha_plus - wtol;
            if (interior && (arg == 0 || arg + 1 == curve.d.size())) ++s.narrow_flags;
        }
        s.alpha.push_back(a);
        s.F.push_back(F);
        if (std::isfinite(F)) s.F_max = std::max(s.F_max, F);
    }
    return s;
}

SpectrumCurve legendre_spectrum_auto(const PressureCurve& curve, int points) {
    if (!curve.evaluator) throw NumericError("pressure curve carries no evaluator");
    double am = curve.evaluator->alpha_minus();
    double ap = curve.evaluator->alpha_plus();
    std::vector<double> grid;
    if (!(ap - am > 1e-12) || points <= 1) {
        grid.push_back(0.5 * (am + ap));
    } else {
        grid.reserve(points);
        for (int i = 0; i < points; ++i)
            grid.push_back(am + (ap - am) * static_cast<double>(i) / (points - 1));
    }
    return legendre_spectrum(curve, grid);
}

EquilibriumStats equilibrium_stats(const PressureCurve& curve, double d) {
    if (!curve.evaluator) throw NumericError("pressure curve carries no evaluator");
    EquilibriumStats st;
    st.d = d;
    const double step = 1e-5 * (1.0 + std::fabs(d));
    double pp = curve.evaluator->pressure(d + step);
    double pm = curve.evaluator->pressure(d - step);
    st.alpha = -(pp - pm) / (2.0 * step);
    st.h = curve.evaluator->pressure(d) + d * st.alpha;
    st.err = step;
    if (!curve.d.empty() && (d - step < curve.d.front() || d + step > curve.d.back()))
        st.err *= 10.0;  // one-sided information only: the scheme loses an order
    return st;
}

DualityReport duality_check(const PressureCurve& curve, const SpectrumCurve& spectrum) {
    DualityReport rep;

    // At every interior knot the tangent slope is an admissible alpha and the
    // transform must touch the supporting line there.
    for (size_t i = 1; i + 1 < curve.d.size(); ++i) {
        EquilibriumStats st = equilibrium_stats(curve, curve.d[i]);
        double a = std::clamp(st.alpha, spectrum.alpha_minus, spectrum.alpha_plus);
        double g = legendre_value(curve, a);
        rep.legendre_residual =
            std::max(rep.legendre_residual, std::fabs(g - (curve.P[i] + curve.d[i] * a)));
    }

    // Transforming back must recover the pressure knots.
    for (size_t i = 0; i < curve.d.size(); ++i) {
        double best = neg_infinity();
        for (size_t j = 0; j < spectrum.alpha.size(); ++j) {
            if (!std::isfinite(spectrum.F[j])) continue;
            best = std::max(best,
                            spectrum.alpha[j] * spectrum.F[j] - curve.d[i] * spectrum.alpha[j]);
        }
        if (std::isfinite(best))
            rep.double_transform_residual =
                std::max(rep.double_transform_residual, std::fabs(best - curve.P[i]));
    }

    // alpha * F(alpha) is a minimum of affine functions, hence concave.
    std::vector<double> as, gs;
    for (size_t j = 0; j < spectrum.alpha.size(); ++j) {
        if (!std::isfinite(spectrum.F[j])) continue;
        as.push_back(spectrum.alpha[j]);
        gs.push_back(spectrum.alpha[j] * spectrum.F[j]);
    }
    rep.alphaF_concave = true;
    double scale = 1.0;
    for (double g : gs) scale = std::max(scale, std::fabs(g));
    for (size_t j = 1; j + 1 < as.size(); ++j) {
        double h1 = as[j] - as[j - 1], h2 = as[j + 1] - as[j];
        if (h1 <= 0.0 || h2 <= 0.0) continue;
        double s1 = (gs[j] - gs[j - 1]) / h1;
        double s2 = (gs[j + 1] - gs[j]) / h2;
        if (s2 - s1 > 1e-9 * scale) {
            rep.alphaF_concave = false;
            break;
        }
    }

    rep.fmax_vs_d0 = std::fabs(spectrum.F_max - spectrum.d0);
    return rep;
}

Complex auto_base(const RationalMap& map) {
    const Complex offset(0.11, 0.0731);
    std::vector<Complex> fps = map.finite_fixed_points();
    if (fps.empty()) return Complex(0.31, 0.17) + offset;
    std::sort(fps.begin(), fps.end(), complex_less);
    Complex best = fps.front();
    double best_ld = -std::numeric_limits<double>::infinity();
    for (Complex z : fps) {
        double ld = map.log_deriv_modulus(SpherePoint(z));
        if (ld > best_ld) {
            best_ld = ld;
            best = z;
        }
    }
    return best + offset;
}

}  // namespace lyap
