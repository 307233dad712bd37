#include "lyapspec/orbit.hpp"

#include <algorithm>
#include <cmath>
#include <future>

namespace lyap {

OrbitTrace trace_orbit(const RationalMap& map, Complex x, int n) {
    OrbitTrace trace;
    trace.start = x;
    trace.points.push_back(x);
    SpherePoint p(x);
    for (int k = 1; k <= n; ++k) {
        trace.steps.push_back(map.log_deriv_modulus(p));
        p = map.evaluate(p);
        if (p.at_inf || std::abs(p.z) > RationalMap::kChartBound) {
            trace.escape_index = k;
            trace.points.push_back(p.at_inf ? Complex(0.0, 0.0) : p.z);
            break;
        }
        trace.points.push_back(p.z);
    }
    finish_trace(trace);
    return trace;
}

void finish_trace(OrbitTrace& trace) {
    trace.running_avg.resize(trace.steps.size());
    double sum = 0.0;
    for (size_t k = 0; k < trace.steps.size(); ++k) {
        sum += trace.steps[k];
        trace.running_avg[k] = sum / static_cast<double>(k + 1);
    }
}

HyperbolicTimeSet hyperbolic_times(const std::vector<double>& steps, double sigma) {
    HyperbolicTimeSet out;
    out.sigma = sigma;
    // T_n = S_n - n*sigma; n is hyperbolic iff T_n >= T_j for all j < n.
    double running = 0.0;
    double best = 0.0;  // T_0
    for (size_t i = 0; i < steps.size(); ++i) {
        running += steps[i] - sigma;
        if (running >= best) {
            out.times.push_back(static_cast<int>(i) + 1);
            best = running;
        }
    }
    if (!steps.empty()) out.density = static_cast<double>(out.times.size()) / steps.size();
    return out;
}

HyperbolicTimeSet hyperbolic_times_bruteforce(const std::vector<double>& steps, double sigma) {
    HyperbolicTimeSet out;
    out.sigma = sigma;
    const int n = static_cast<int>(steps.size());
    for (int t = 1; t <= n; ++t) {
        bool ok = true;
        double suffix = 0.0;
        for (int k = 1; k <= t; ++k) {
            suffix += steps[t - k];
            if (suffix < k * sigma) {
                ok = false;
                break;
            }
        }
        if (ok) out.times.push_back(t);
    }
    if (n > 0) out.density = static_cast<double>(out.times.size()) / n;
    return out;
}

double pliss_density_bound(double mean, double max_step, double sigma) {
    if (!(mean > sigma) || !(max_step > sigma)) return 0.0;
    return (mean - sigma) / (max_step - sigma);
}

namespace {

struct DiskHull {
    Complex center{0.0, 0.0};
    double radius = 0.0;
};

DiskHull hull_of(const std::vector<Complex>& pts) {
    Complex c(0.0, 0.0);
    for (const Complex& p : pts) c += p;
    c /= static_cast<double>(pts.size());
    double r = 0.0;
    for (const Complex& p : pts) r = std::max(r, std::abs(p - c));
    return {c, r};
}

// Hull-disk proxy with the 1.1 safety inflation used for all membership
// tests on pulled-back regions.
bool hull_contains(const DiskHull& h, Complex p) { return std::abs(p - h.center) <= 1.1 * h.radius; }

std::vector<Complex> boundary_samples(Complex center, double r, int count) {
    std::vector<Complex> pts;
    pts.reserve(count + 1);
    for (int i = 0; i < count; ++i) {
        double th = 2.0 * M_PI * i / count;
        pts.push_back(center + r * Complex(std::cos(th), std::sin(th)));
    }
    pts.push_back(center);
    return pts;
}

// Pulls one sample back through the branch passing through `anchor`
// (the known exact preimage of the region's reference point).  Returns
// nullopt when the nearest-candidate choice is ambiguous.
std::optional<Complex> pull_sample(const RationalMap& map, Complex sample, Complex anchor) {
    std::vector<Complex> cand = map.preimage_step(sample);
    if (cand.empty()) return std::nullopt;
    size_t best = 0;
    double d0 = std::abs(cand[0] - anchor);
    for (size_t i = 1; i < cand.size(); ++i) {
        double d = std::abs(cand[i] - anchor);
        if (d < d0) {
            d0 = d;
            best = i;
        }
    }
    // Ambiguity test: another candidate nearly as close means the branch
    // disks have merged and the selection is unreliable.
    for (size_t i = 0; i < cand.size(); ++i) {
        if (i == best) continue;
        if (std::abs(cand[i] - anchor) < 2.0 * d0 + 1e-12) return std::nullopt;
    }
    return cand[best];
}

}  // namespace

std::vector<DistortionReport> conical_probe(const RationalMap& map, Complex x, double r, int n_max,
                                            double distortion_cap) {
    std::vector<DistortionReport> reports;
    OrbitTrace orbit = trace_orbit(map, x, n_max);
    if (orbit.escape_index) n_max = std::min(n_max, *orbit.escape_index - 1);

    std::vector<SpherePoint> crit = map.critical_points();
    std::vector<Complex> finite_crit;
    for (const SpherePoint& c : crit)
        if (c.finite()) finite_crit.push_back(c.z);

    for (int n = 1; n <= n_max; ++n) {
        DistortionReport rep;
        rep.n = n;
        std::vector<Complex> samples = boundary_samples(orbit.points[n], r, 32);
        std::vector<double> logderiv_sums(samples.size(), 0.0);
        bool ok = true;
        for (int level = n; level >= 1 && ok; --level) {
            Complex anchor = orbit.points[level - 1];
            for (size_t s = 0; s < samples.size() && ok; ++s) {
                std::optional<Complex> pulled = pull_sample(map, samples[s], anchor);
                if (!pulled) {
                    ok = false;
                    break;
                }
                samples[s] = *pulled;
                logderiv_sums[s] += map.log_deriv_modulus(SpherePoint(samples[s]));
            }
            if (!ok) break;
            DiskHull h = hull_of(samples);
            for (const Complex& c : finite_crit)
                if (hull_contains(h, c)) {
                    ok = false;
                    break;
                }
        }
        rep.ok = ok;
        if (ok) {
            double lo = logderiv_sums[0], hi = logderiv_sums[0];
            for (double v : logderiv_sums) {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            rep.distortion = std::exp(hi - lo);
            double diam = 0.0;
            for (size_t i = 0; i < samples.size(); ++i)
                for (size_t j = i + 1; j < samples.size(); ++j)
                    diam = std::max(diam, std::abs(samples[i] - samples[j]));
            rep.diameter = diam;
            rep.center = samples.back();  // last entry is the pulled-back center
            if (rep.distortion > distortion_cap) rep.ok = false;
        }
        reports.push_back(rep);
    }
    return reports;
}

void check_census_base(const RationalMap& map, Complex y, int n, double tol) {
    for (const SpherePoint& c : map.critical_points()) {
        SpherePoint p = c;
        for (int i = 0; i <= n; ++i) {
            if (p.finite() && std::abs(p.z - y) < tol)
                throw NumericError("pullback census: base point lies on the critical orbit (step " +
                                   std::to_string(i) + ")");
            p = map.evaluate(p);
        }
    }
}

PullbackCensus pullback_census(const RationalMap& map, Complex y, int n, double radius, int threads) {
    check_census_base(map, y, n);
    PullbackCensus census;
    census.base = y;
    census.n = n;
    census.radius = radius;

    std::vector<Complex> finite_crit;
    for (const SpherePoint& c : map.critical_points())
        if (c.finite()) finite_crit.push_back(c.z);

    // Iterative DFS carrying (backward point, pulled region, anchor, anchor index).
    struct Node {
        Complex point;
        std::vector<Complex> region;
        Complex anchor;
        int anchor_index;
        int depth;  // backward steps taken so far
    };
    std::vector<CensusEntry> raw;
    auto expand = [&](const Node& node, std::vector<Node>& stack_out) {
        std::vector<Complex> children = map.preimage_step(node.point);
        for (const Complex& child : children) {
            Node next;
            next.point = child;
            next.depth = node.depth + 1;
            next.anchor = node.anchor;
            next.anchor_index = node.anchor_index;
            bool ok = true;
            next.region.reserve(node.region.size());
            for (const Complex& s : node.region) {
                std::optional<Complex> pulled = pull_sample(map, s, child);
                if (!pulled) {
                    ok = false;
                    break;
                }
                next.region.push_back(*pulled);
            }
            bool encounter = !ok;
            if (ok) {
                DiskHull h = hull_of(next.region);
                for (const Complex& c : finite_crit)
                    if (hull_contains(h, c)) {
                        encounter = true;
                        break;
                    }
            }
            if (encounter) {
                next.anchor = child;
                next.anchor_index = next.depth;
                next.region = boundary_samples(child, radius, 12);
            }
            stack_out.push_back(std::move(next));
        }
    };
    auto run_subtree = [&](Node root) {
        std::vector<CensusEntry> local;
        std::vector<Node> stack;
        stack.push_back(std::move(root));
        while (!stack.empty()) {
            Node node = std::move(stack.back());
            stack.pop_back();
            if (node.depth == n) {
                local.push_back({node.anchor, node.anchor_index});
                continue;
            }
            expand(node, stack);
        }
        return local;
    };

    Node root{y, boundary_samples(y, radius, 12), y, 0, 0};
    if (threads <= 1 || n < 2) {
        raw = run_subtree(std::move(root));
    } else {
        // Split at the first backward level; merge in deterministic order.
        std::vector<Node> level1;
        expand(root, level1);
        std::sort(level1.begin(), level1.end(),
                  [](const Node& a, const Node& b) { return complex_less(a.point, b.point); });
        std::vector<std::future<std::vector<CensusEntry>>> futs;
        for (Node& nd : level1)
            futs.push_back(std::async(std::launch::async, run_subtree, std::move(nd)));
        for (auto& f : futs) {
            std::vector<CensusEntry> part = f.get();
            raw.insert(raw.end(), part.begin(), part.end());
        }
    }

    // Deduplicate Z: same (anchor within 1e-8, k) counts once.
    std::sort(raw.begin(), raw.end(), [](const CensusEntry& a, const CensusEntry& b) {
        if (a.k != b.k) return a.k < b.k;
        return complex_less(a.anchor, b.anchor);
    });
    for (const CensusEntry& e : raw) {
        bool dup = false;
        for (auto it = census.entries.rbegin(); it != census.entries.rend(); ++it) {
            if (it->k != e.k) break;
            if (std::abs(it->anchor - e.anchor) <= 1e-8 * (1.0 + std::abs(e.anchor))) {
                dup = true;
                break;
            }
        }
        if (!dup) census.entries.push_back(e);
    }
    return census;
}

}  // namespace lyap
