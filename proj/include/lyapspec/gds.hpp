#pragma once

#include <memory>
#include <string>
#include <vector>

#include "lyapspec/pressure.hpp"
#include "lyapspec/rational_map.hpp"

namespace lyap {

// ---------------------------------------------------------------------------
// Graph-directed systems of inverse branches.
//
// A system is a finite family of closed disks U_k with pairwise disjoint
// closures together with inverse branches of f^a: the edge (from, to) stands
// for the branch g that maps the closure of U_to into U_from.  Forward
// dynamics therefore steps from -> to, and admissible vertex words
// (k_1, k_2, ...) follow the arrows.

struct GdsVertex {
    Complex center{0.0, 0.0};
    double radius = 0.0;
    Complex witness{0.0, 0.0};  // marked point inside the disk, used for weights
};

struct GdsEdge {
    int from = 0;  // disk the branch maps into
    int to = 0;    // disk the branch is defined on
    Complex witness{0.0, 0.0};  // g(witness of `to`), identifies the branch
    double weight = 1.0;        // |(f^a)'| at the edge witness (expansion)
    double distortion = 1.0;    // sampled sup/inf of |(f^a)'| over the branch cell
};

struct GdsSystem {
    std::vector<GdsVertex> vertices;
    std::vector<GdsEdge> edges;
    int iterate = 1;  // the system lives over f^iterate

    std::string to_json_text() const;
    static GdsSystem from_json_text(const std::string& text);
};

bool operator==(const GdsVertex& a, const GdsVertex& b);
bool operator==(const GdsEdge& a, const GdsEdge& b);
bool operator==(const GdsSystem& a, const GdsSystem& b);

// ---------------------------------------------------------------------------
// Validation

struct GdsValidation {
    bool separation = false;    // pairwise disjoint disk closures
    bool containment = false;   // sampled branch pullbacks land inside their disks
    bool unique_edges = false;  // at most one edge per ordered pair
    bool degrees = false;       // every vertex has in- and out-degree >= 1
    std::vector<std::string> notes;

    bool pass() const { return separation && containment && unique_edges && degrees; }
};

GdsValidation validate_gds(const GdsSystem& sys, const RationalMap& map);

// Strong connectivity of the transition graph.
bool is_transitive(const GdsSystem& sys);

// Applies the edge's inverse branch to a point of the source disk: the
// preimage of z under f^a nearest to the edge witness.
Complex apply_branch(const GdsSystem& sys, const RationalMap& map, const GdsEdge& edge,
                     Complex z);

// ---------------------------------------------------------------------------
// Construction helpers

// Derives the full edge set over the given disks: for every ordered pair, the
// inverse branch (if any) that carries the source witness into the target
// disk, with sampled weight/distortion and verified containment.
GdsSystem gds_on_disks(const RationalMap& map, std::vector<GdsVertex> vertices);

// Vertices from connected components of the union of r-balls around sample
// points, edges as in gds_on_disks.
GdsSystem gds_from_sample(const RationalMap& map, const std::vector<Complex>& sample, double r);

// Cylinder centers: composition images of vertex witnesses along all
// admissible words of the given length.
std::vector<Complex> sample_limit_set(const GdsSystem& sys, const RationalMap& map, int depth);

// Higher-block presentation: vertices become admissible words of length m
// (domains are disk hulls of the composed pullbacks), edges the one-step
// overlaps.  The iterate is unchanged; weights are re-estimated at the deeper
// witness points, which is what makes refinements converge.
GdsSystem refine(const GdsSystem& sys, const RationalMap& map, int m);

// Longest simple cycle of the transition graph (deterministic tie-break) and
// the periodic point of the composed inverse branch around such a cycle.
// These anchor bridge searches and schedule blocks.
std::vector<int> anchor_cycle(const GdsSystem& sys);
Complex cycle_fixed_point(const GdsSystem& sys, const RationalMap& map,
                          const std::vector<int>& cycle);

// ---------------------------------------------------------------------------
// Bridges

struct BridgeSpec {
    Complex p1{0.0, 0.0}, p2{0.0, 0.0};  // anchor periodic points
    std::vector<Complex> path1, path2;   // backward orbits y_{i,0..t_i}, y_{i,0} = p_i
    int shrink_depth = 0;
};

// Connects two disjoint validated transitive systems: searches backward
// orbits of an anchor periodic point of each system until a pulled-back disk
// lands inside the other system's domain union, with all intermediate disks
// avoiding both unions and the critical set.  Returns the merged system
// (strongly connected, contains both inputs); the paths used are reported
// through `found` when given.
GdsSystem bridge(const GdsSystem& sys1, const GdsSystem& sys2, const RationalMap& map,
                 int search_depth, BridgeSpec* found = nullptr);

// ---------------------------------------------------------------------------
// Pressure and spectra

struct SubsystemPressure {
    double value = 0.0;    // (1/a) log spectral_radius(weight^{-d} adjacency)
    double err_bar = 0.0;  // (1/a) * |d| * log(max distortion)
    bool reducible = false;  // graph not strongly connected: dominant component used
};

SubsystemPressure subsystem_pressure_detail(const GdsSystem& sys, double d);
double subsystem_pressure(const GdsSystem& sys, double d);

// Pressure evaluator backed by the system matrix; slope limits come from
// minimum/maximum cycle means of the edge log-weights.
std::shared_ptr<PressureEvaluator> gds_evaluator(const GdsSystem& sys);

// (1/a) log of the largest edge distortion: the half-width of the honest
// error band around the witness-point pressure.
double gds_error_bar(const GdsSystem& sys);

struct SubsystemSpectrum {
    PressureCurve curve;
    SpectrumCurve spectrum;
};

SubsystemSpectrum subsystem_spectrum(const GdsSystem& sys, const std::vector<double>& d_grid,
                                     const std::vector<double>& alpha_grid);

// ---------------------------------------------------------------------------
// Convergence of a family of subsystems toward the full map

struct ConvergenceReport {
    std::vector<double> d;
    std::vector<double> reference;      // tree pressure of the full map
    std::vector<double> reference_err;
    std::vector<std::vector<double>> pressures;    // per system, per grid point
    std::vector<std::vector<double>> running_sup;  // sup over systems seen so far
    std::vector<double> alpha_minus, alpha_plus;   // per system
    std::vector<double> F_gap;  // per system: max gap to the reference spectrum
    int pressure_excess = 0;    // (system, d) pairs above reference + error budget
    double final_gap = 0.0;     // max_d |reference - final running sup|
    bool sup_monotone = true;
};

ConvergenceReport convergence_report(const std::vector<GdsSystem>& systems,
                                     const RationalMap& map, const std::vector<double>& d_grid,
                                     int reference_depth = 10);

}  // namespace lyap
