#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "lyapspec/io.hpp"
#include "lyapspec/orbit.hpp"
#include "lyapspec/rational_map.hpp"

using namespace lyap;

namespace {

// Oracle: literal O(n^2) scan of the suffix inequalities
//   sum of the last k steps >= k * sigma for every k = 1..t.
std::vector<int> suffix_times_oracle(const std::vector<double>& steps, double sigma) {
    std::vector<int> times;
    for (int t = 1; t <= static_cast<int>(steps.size()); ++t) {
        bool ok = true;
        double acc = 0.0;
        for (int k = 1; k <= t && ok; ++k) {
            acc += steps[t - k];
            if (acc < k * sigma) ok = false;
        }
        if (ok) times.push_back(t);
    }
    return times;
}

// Oracle: depth-first pullback census mirroring the published construction
// formula for formula (12-sample rings, nearest-preimage branch selection
// with an ambiguity guard, centroid hulls inflated by 1.1, re-anchoring on
// critical encounters), written without reference to the library internals.
std::vector<CensusEntry> census_oracle(const RationalMap& map, Complex y, int n, double radius) {
    std::vector<Complex> finite_crit;
    for (const SpherePoint& c : map.critical_points())
        if (c.finite()) finite_crit.push_back(c.z);

    auto ring = [&](Complex center) {
        std::vector<Complex> pts;
        for (int i = 0; i < 12; ++i) {
            double th = 2.0 * M_PI * i / 12;
            pts.push_back(center + radius * Complex(std::cos(th), std::sin(th)));
        }
        pts.push_back(center);
        return pts;
    };
    auto pull_nearest = [&](Complex sample, Complex anchor) -> std::optional<Complex> {
        std::vector<Complex> cand = map.preimage_step(sample);
        if (cand.empty()) return std::nullopt;
        size_t best = 0;
        double d0 = std::abs(cand[0] - anchor);
        for (size_t i = 1; i < cand.size(); ++i)
            if (std::abs(cand[i] - anchor) < d0) {
                d0 = std::abs(cand[i] - anchor);
                best = i;
            }
        for (size_t i = 0; i < cand.size(); ++i)
            if (i != best && std::abs(cand[i] - anchor) < 2.0 * d0 + 1e-12) return std::nullopt;
        return cand[best];
    };

    std::vector<CensusEntry> raw;
    std::function<void(Complex, const std::vector<Complex>&, Complex, int, int)> walk =
        [&](Complex point, const std::vector<Complex>& region, Complex anchor, int k, int depth) {
            if (depth == n) {
                raw.push_back({anchor, k});
                return;
            }
            for (const Complex& child : map.preimage_step(point)) {
                std::vector<Complex> pulled;
                pulled.reserve(region.size());
                bool ok = true;
                for (const Complex& s : region) {
                    std::optional<Complex> p = pull_nearest(s, child);
                    if (!p) {
                        ok = false;
                        break;
                    }
                    pulled.push_back(*p);
                }
                bool encounter = !ok;
                if (ok) {
                    Complex c(0.0, 0.0);
                    for (const Complex& p : pulled) c += p;
                    c /= static_cast<double>(pulled.size());
                    double r = 0.0;
                    for (const Complex& p : pulled) r = std::max(r, std::abs(p - c));
                    for (const Complex& cp : finite_crit)
                        if (std::abs(cp - c) <= 1.1 * r) {
                            encounter = true;
                            break;
                        }
                }
                if (encounter) walk(child, ring(child), child, depth + 1, depth + 1);
                else walk(child, pulled, anchor, k, depth + 1);
            }
        };
    walk(y, ring(y), y, 0, 0);

    std::sort(raw.begin(), raw.end(), [](const CensusEntry& a, const CensusEntry& b) {
        if (a.k != b.k) return a.k < b.k;
        return complex_less(a.anchor, b.anchor);
    });
    std::vector<CensusEntry> entries;
    for (const CensusEntry& e : raw) {
        bool dup = false;
        for (auto it = entries.rbegin(); it != entries.rend(); ++it) {
            if (it->k != e.k) break;
            if (std::abs(it->anchor - e.anchor) <= 1e-8 * (1.0 + std::abs(e.anchor))) {
                dup = true;
                break;
            }
        }
        if (!dup) entries.push_back(e);
    }
    return entries;
}

RationalMap quad(double c) {
    return RationalMap(Poly{c, 0.0, 1.0}, Poly{1.0});
}

}  // namespace

TEST_CASE("worked example: one growth time in three steps") {
    // steps log(1/2), log 4, log 4 with sigma = log 2: only t = 3 satisfies
    // every suffix inequality (t = 3 with equality at the full window).
    std::vector<double> steps{std::log(0.5), std::log(4.0), std::log(4.0)};
    HyperbolicTimeSet ht = hyperbolic_times(steps, std::log(2.0));
    REQUIRE(ht.times.size() == 1);
    CHECK(ht.times[0] == 3);
    CHECK(ht.density == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("fast scan matches quadratic oracle on random traces") {
    Rng rng(2024u);
    for (int trial = 0; trial < 300; ++trial) {
        int n = rng.uniform_int(1, 120);
        double sigma = rng.uniform(0.0, 1.0);
        std::vector<double> steps;
        for (int i = 0; i < n; ++i) steps.push_back(rng.uniform(-0.5, 1.5));
        HyperbolicTimeSet fast = hyperbolic_times(steps, sigma);
        std::vector<int> oracle = suffix_times_oracle(steps, sigma);
        REQUIRE(fast.times == oracle);
        HyperbolicTimeSet slow = hyperbolic_times_bruteforce(steps, sigma);
        REQUIRE(slow.times == oracle);
    }
}

TEST_CASE("density dominates the Pliss bound when the mean exceeds sigma") {
    Rng rng(55u);
    int tested = 0;
    for (int trial = 0; trial < 200; ++trial) {
        int n = rng.uniform_int(20, 150);
        double sigma = rng.uniform(0.0, 0.4);
        std::vector<double> steps;
        double mean = 0.0, mx = -1e300;
        for (int i = 0; i < n; ++i) {
            steps.push_back(rng.uniform(-0.25, 1.25));
            mean += steps.back();
            mx = std::max(mx, steps.back());
        }
        mean /= n;
        if (!(mean > sigma)) continue;
        ++tested;
        double bound = pliss_density_bound(mean, mx, sigma);
        CHECK(hyperbolic_times(steps, sigma).density + 1e-12 >= bound);
    }
    CHECK(tested > 50);
}

TEST_CASE("orbit trace on the squaring map") {
    RationalMap f = quad(0.0);

    OrbitTrace circle = trace_orbit(f, Complex(1.0, 0.0), 50);
    CHECK(!circle.escape_index);
    REQUIRE(circle.length() == 50);
    // |f'| = 2|z| = 2 on the whole orbit
    for (double s : circle.steps) CHECK(s == doctest::Approx(std::log(2.0)));
    CHECK(circle.running_avg.back() == doctest::Approx(std::log(2.0)));

    OrbitTrace out = trace_orbit(f, Complex(2.0, 0.0), 50);
    REQUIRE(out.escape_index.has_value());
    CHECK(*out.escape_index == 5);  // 2 -> 4 -> 16 -> 256 -> 65536 -> 4.3e9
    CHECK(out.length() == 5);
    CHECK(out.steps[0] == doctest::Approx(std::log(4.0)));
}

TEST_CASE("finish_trace recomputes running averages") {
    OrbitTrace tr;
    tr.steps = {1.0, 3.0, 5.0};
    finish_trace(tr);
    REQUIRE(tr.running_avg.size() == 3);
    CHECK(tr.running_avg[0] == doctest::Approx(1.0));
    CHECK(tr.running_avg[1] == doctest::Approx(2.0));
    CHECK(tr.running_avg[2] == doctest::Approx(3.0));
}

TEST_CASE("conical pullbacks on the circle repeller have bounded distortion") {
    RationalMap f = quad(0.0);
    std::vector<DistortionReport> reps = conical_probe(f, Complex(1.0, 0.0), 0.25, 12);
    REQUIRE(reps.size() == 12);
    for (const DistortionReport& r : reps) {
        CHECK(r.ok);
        CHECK(r.distortion < 4.0);
        CHECK(std::abs(r.center - Complex(1.0, 0.0)) < 1e-9);
    }
    // diameters contract roughly by the derivative modulus each step
    CHECK(reps[11].diameter < reps[0].diameter);
    CHECK(reps[11].diameter < 0.25 * std::pow(2.0, -10));
}

TEST_CASE("conical pullbacks fail once the ball swallows a critical value") {
    // orbit of 0.5 under z^2 tends to the superattracting fixed point 0, so
    // B(f^n(x), 0.3) contains the critical point and the branch is ambiguous
    RationalMap f = quad(0.0);
    std::vector<DistortionReport> reps = conical_probe(f, Complex(0.5, 0.0), 0.3, 6);
    bool any_bad = false;
    for (const DistortionReport& r : reps) any_bad = any_bad || !r.ok;
    CHECK(any_bad);
}

TEST_CASE("pullback census matches the depth-first oracle") {
    RationalMap cheb = quad(-2.0);
    Complex y(0.0, 0.7);
    for (int n = 1; n <= 6; ++n) {
        PullbackCensus lib = pullback_census(cheb, y, n, 0.6);
        std::vector<CensusEntry> oracle = census_oracle(cheb, y, n, 0.6);
        REQUIRE(lib.entries.size() == oracle.size());
        for (size_t i = 0; i < oracle.size(); ++i) {
            CHECK(lib.entries[i].k == oracle[i].k);
            CHECK(lib.entries[i].anchor == oracle[i].anchor);
        }
    }
}

TEST_CASE("census is independent of the thread count") {
    RationalMap cheb = quad(-2.0);
    Complex y(0.0, 0.7);
    PullbackCensus one = pullback_census(cheb, y, 7, 0.6, 1);
    PullbackCensus four = pullback_census(cheb, y, 7, 0.6, 4);
    REQUIRE(one.entries.size() == four.entries.size());
    for (size_t i = 0; i < one.entries.size(); ++i) {
        CHECK(one.entries[i].k == four.entries[i].k);
        CHECK(one.entries[i].anchor == four.entries[i].anchor);
    }
}

TEST_CASE("census away from the critical orbit stays a single class") {
    // z^2 - 6: the invariant set keeps distance sqrt(3) from the critical
    // point, so no branch ever re-anchors and the census collapses to one row
    RationalMap f = quad(-6.0);
    PullbackCensus census = pullback_census(f, Complex(3.0, 0.0), 8, 0.6);
    REQUIRE(census.count() == 1);
    CHECK(census.entries[0].k == 0);
    CHECK(std::abs(census.entries[0].anchor - Complex(3.0, 0.0)) < 1e-12);
}

TEST_CASE("census base check rejects bases on the critical orbit") {
    RationalMap cheb = quad(-2.0);
    // the critical value -2 is a forward image of 0; a base sitting on it fails
    CHECK_THROWS_AS(check_census_base(cheb, Complex(-2.0, 0.0), 5), NumericError);
    CHECK_NOTHROW(check_census_base(cheb, Complex(0.0, 0.7), 10));
}
