#pragma once

#include <optional>
#include <vector>

#include "lyapspec/rational_map.hpp"

namespace lyap {

// Forward orbit record: points, per-step log-derivative moduli, and running
// Birkhoff averages l_k = (1/k) * sum of the first k steps.
struct OrbitTrace {
    Complex start{0.0, 0.0};
    std::vector<Complex> points;       // x, f(x), ..., f^n(x)  (n+1 entries)
    std::vector<double> steps;         // log|f'(f^(k-1) x)|, k = 1..n
    std::vector<double> running_avg;   // l_k
    std::optional<int> escape_index;   // first k with |f^k(x)| beyond the chart bound

    int length() const { return static_cast<int>(steps.size()); }
};

OrbitTrace trace_orbit(const RationalMap& map, Complex x, int n);

// Recomputes running averages from steps; used by traces assembled by hand.
void finish_trace(OrbitTrace& trace);

struct HyperbolicTimeSet {
    double sigma = 0.0;
    std::vector<int> times;  // 1-based indices n with suffix growth >= e^(k*sigma)
    double density = 0.0;    // |times| / n
};

// n is a hyperbolic time when every suffix product of the last k steps is at
// least e^(k*sigma).  Equivalent to T_n = S_n - n*sigma being a running
// maximum of T_0 = 0, T_1, ..., so one left-to-right pass suffices.
HyperbolicTimeSet hyperbolic_times(const std::vector<double>& steps, double sigma);

// Reference O(n^2) scan of the defining suffix inequalities.
HyperbolicTimeSet hyperbolic_times_bruteforce(const std::vector<double>& steps, double sigma);

// Lower bound on the density of hyperbolic times for a trace with mean m,
// per-step maximum M and exponent sigma < m (Pliss-type estimate).
double pliss_density_bound(double mean, double max_step, double sigma);

struct DistortionReport {
    int n = 0;
    bool ok = false;            // pullback stayed away from the critical set
    double distortion = 1.0;    // sup/inf of |(f^n)'| over the pulled-back region
    double diameter = 0.0;      // diameter of the pulled-back region
    Complex center{0.0, 0.0};   // pullback of the ball center (equals the orbit start)
};

// Pulls B(f^n(x), r) back along the orbit branch of x for each n = 1..n_max,
// tracking 32 boundary samples + center.  A pullback that approaches the
// critical set (ambiguous branch or critical point inside the inflated disk
// hull), or whose sampled distortion exceeds the cap, is reported not-ok.
std::vector<DistortionReport> conical_probe(const RationalMap& map, Complex x, double r, int n_max,
                                            double distortion_cap = 1e12);

struct CensusEntry {
    Complex anchor{0.0, 0.0};  // y_k, the latest re-anchoring point of the branch
    int k = 0;                 // 0 when the branch never met the critical set
};

struct PullbackCensus {
    Complex base{0.0, 0.0};
    int n = 0;
    double radius = 0.0;
    std::vector<CensusEntry> entries;  // deduplicated set Z
    int count() const { return static_cast<int>(entries.size()); }
};

// Walks every backward branch of length n from y.  Along a branch the ball
// B(anchor, R) is pulled back step by step; the first time the pulled-back
// region (disk hull of boundary samples, inflated by 1.1) contains a
// critical point, the construction re-anchors at the current backward point
// and continues.  Each branch contributes its final (anchor, step) pair;
// branches that never meet the critical set contribute (y, 0).
PullbackCensus pullback_census(const RationalMap& map, Complex y, int n, double radius,
                               int threads = 1);

// Precondition check for the census: y must stay clear of the forward orbit
// of the critical set for n steps.  Throws NumericError on violation.
void check_census_base(const RationalMap& map, Complex y, int n, double tol = 1e-8);

}  // namespace lyap
