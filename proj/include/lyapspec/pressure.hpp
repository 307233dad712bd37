#pragma once

#include <memory>
#include <string>
#include <vector>

#include "lyapspec/rational_map.hpp"

namespace lyap {

// ---------------------------------------------------------------------------
// Preimage trees

struct PreimageNode {
    Complex point{0.0, 0.0};
    double log_deriv = 0.0;  // log|f'(point)|
    int parent = -1;
    bool flagged = false;    // fiber residual too large or critically degenerate
};

struct PreimageTree {
    Complex base{0.0, 0.0};
    int depth = 0;
    std::vector<std::vector<PreimageNode>> levels;  // levels[0] = {base}
    int flagged_nodes = 0;

    const std::vector<PreimageNode>& leaves() const { return levels.back(); }
};

// Full backward tree of depth n over f; children are sorted deterministically.
// A node is flagged when its fiber residual exceeds 1e-9 (relative) or it
// collides with a critical point; flags propagate to descendants.
// extended_bits > 0 polishes every node in extended precision.
PreimageTree preimage_tree(const RationalMap& map, Complex base, int depth, int extended_bits = 0);

// ---------------------------------------------------------------------------
// Pressure estimators

// A finite family of Birkhoff sums S_i over orbit segments of common length n
// induces the estimator P(d) = (1/n) log sum_i exp(-d * S_i).  Dropped sums
// come from flagged tree leaves; they are excluded but tracked.
struct WeightFamily {
    int n = 0;
    std::vector<double> sums;
    std::vector<double> dropped_sums;

    double pressure(double d) const;      // overflow-safe log-sum-exp
    double mean_step(double d) const;     // weighted mean of S_i/n at parameter d
    double dropped_mass(double d) const;  // weight share of the dropped sums
    double alpha_min() const;             // min_i S_i / n  (slope limit d -> +inf)
    double alpha_max() const;             // max_i S_i / n  (slope limit d -> -inf)
};

WeightFamily tree_weights(const RationalMap& map, Complex base, int depth, int extended_bits = 0);
double tree_pressure(const RationalMap& map, double d, Complex base, int depth);

struct PeriodicPoints {
    int n = 0;
    int expected = 0;
    bool complete = false;
    std::vector<Complex> points;        // repelling points of Fix(f^n)
    std::vector<double> multiplier_log; // log|(f^n)'| per point
    int excluded_nonrepelling = 0;
};

// All fixed points of f^n via Newton's method on the iterated map, seeded by
// a depth-n preimage tree of a generic base point (every backward branch
// shadows one periodic orbit) plus seeded random restarts for stragglers.
PeriodicPoints periodic_points(const RationalMap& map, int n, uint64_t seed = 20240901ULL);

WeightFamily periodic_weights(const PeriodicPoints& pts);
double periodic_pressure(const RationalMap& map, double d, int n);

// ---------------------------------------------------------------------------
// Pressure curves and spectra

// Continuous-in-d access to a pressure estimator; the exact asymptotic slope
// limits give the Lyapunov interval endpoints of the estimator.
class PressureEvaluator {
  public:
    virtual ~PressureEvaluator() = default;
    virtual double pressure(double d) const = 0;
    virtual double alpha_minus() const = 0;
    virtual double alpha_plus() const = 0;
    virtual double dropped_mass(double d) const { (void)d; return 0.0; }
};

std::shared_ptr<PressureEvaluator> make_family_evaluator(WeightFamily family);

enum class PressureMethod { Tree, Periodic };

struct PressureCurve {
    std::vector<double> d;
    std::vector<double> P;
    std::vector<double> err;   // |P_depth - P_(depth-1)| per grid point
    std::string method;        // "tree", "periodic" or "gds"
    int depth = 0;
    bool degraded = false;     // convexity violation, dropped mass, or missing roots
    double max_dropped = 0.0;
    std::shared_ptr<PressureEvaluator> evaluator;

    // Discrete second differences >= -1e-6 * scale on the grid.
    bool convex_within_tolerance() const;
};

PressureCurve pressure_curve(const RationalMap& map, const std::vector<double>& d_grid,
                             PressureMethod method, int depth, Complex base,
                             int extended_bits = 0);

// Same grid machinery over an arbitrary evaluator (used by graph-subsystem
// pressure curves); err_bar is attached uniformly.
PressureCurve curve_from_evaluator(std::shared_ptr<PressureEvaluator> eval,
                                   const std::vector<double>& d_grid, std::string method,
                                   int depth, double err_bar);

// Chooses the tree estimator when the critical orbits look disjoint from the
// backward-orbit closure (safe base), periodic sums otherwise.
PressureMethod default_method(const RationalMap& map, Complex base);

struct SpectrumCurve {
    std::vector<double> alpha;
    std::vector<double> F;        // -inf outside the admissible slope range
    double alpha_minus = 0.0;
    double alpha_plus = 0.0;
    double d0 = 0.0;              // Bowen root: zero of P on the grid interval
    double alpha_star = 0.0;      // slope at d0; F attains its maximum there
    double F_max = 0.0;
    int narrow_flags = 0;         // alpha values whose infimum pinned a grid edge
};

// Legendre transform F(alpha) = (1/alpha) inf_d (P(d) + d*alpha) over the
// curve knots.  Outside the open slope interval the infimum diverges along
// the extreme-slope extension and F is -inf; F(0) is defined through d0.
// alpha_star is injected into the grid so max F = d0 holds on the output.
SpectrumCurve legendre_spectrum(const PressureCurve& curve, const std::vector<double>& alpha_grid);

// Uniform alpha grid over the admissible interval (plus alpha_star).
SpectrumCurve legendre_spectrum_auto(const PressureCurve& curve, int points);

// Continuous Legendre value alpha*F(alpha) = min over knots of (P_i + d_i*alpha).
double legendre_value(const PressureCurve& curve, double alpha);

double bowen_root(const PressureEvaluator& eval, double d_lo, double d_hi, double tol = 1e-8);

struct EquilibriumStats {
    double d = 0.0;
    double alpha = 0.0;  // -dP/dd by symmetric difference
    double h = 0.0;      // P(d) + d*alpha(d), entropy of the equilibrium state
    double err = 0.0;    // difference-scheme error scale (widened at grid edges)
};

EquilibriumStats equilibrium_stats(const PressureCurve& curve, double d);

struct DualityReport {
    double legendre_residual = 0.0;         // max |alpha(d)*F(alpha(d)) - (P + d*alpha(d))|
    double double_transform_residual = 0.0; // max |sup_a(a*F(a) - d*a) - P(d)|
    bool alphaF_concave = false;
    double fmax_vs_d0 = 0.0;                // |max F - d0|
};

DualityReport duality_check(const PressureCurve& curve, const SpectrumCurve& spectrum);

// Generic base point near the dynamically active region: the most expanding
// fixed point nudged off the real axis (keeps backward orbits clear of the
// critical set for real maps).
Complex auto_base(const RationalMap& map);

}  // namespace lyap
