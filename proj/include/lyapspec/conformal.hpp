#pragma once

#include <string>
#include <vector>

#include "lyapspec/pressure.hpp"
#include "lyapspec/rational_map.hpp"

namespace lyap {

struct Disk {
    Complex center{0.0, 0.0};
    double radius = 0.0;
};

struct ConformalAtom {
    Complex point{0.0, 0.0};
    double weight = 0.0;
};

// Atomic measure on f^{-n}(x): weights proportional to e^{-nP} |(f^n)'|^{-d},
// the discrete stand-in for a measure with Jacobian e^{P + d log|f'|}.
// Weights are positive and sum to 1; Z is the unnormalized partition sum.
struct ConformalEstimate {
    double d = 0.0;
    double P = 0.0;
    Complex base{0.0, 0.0};
    int depth = 0;
    std::vector<ConformalAtom> atoms;
    double Z = 0.0;
    bool degraded = false;  // flagged tree nodes entered (or were cut from) the sum

    // Mass of the closed disk under the atomic measure.
    double mass_in(const Disk& ball) const;
    // Largest distance from an atom to the reference sample (diagnostic for
    // how far the support strays from an independent repeller sample).
    double max_distance_to(const std::vector<Complex>& reference) const;
    std::string to_csv_text() const;  // columns re, im, weight
};

// Patterson-style estimate at depth n over the preimage tree of x.  P is an
// input so that downstream residuals isolate conformality error from
// pressure error.  Negative d requires a map without an invariant finite set
// near the repeller (refused otherwise).
ConformalEstimate estimate_conformal(const RationalMap& map, double d, Complex x, int n,
                                     double P);

struct JacobianReport {
    double residual = 0.0;        // max relative defect over evaluated sets
    std::vector<double> per_set;  // aligned with the input; NaN when skipped
    std::vector<std::string> warnings;
    int evaluated = 0;
    int skipped = 0;
};

// Tests nu(f(A)) = sum_{atoms in A} e^{P + d log|f'|} * weight on each disk A.
// The A-side mass is represented one level deeper (the estimate refined once)
// so that the identity is exact atom-by-atom for an exactly conformal family;
// the residual then measures genuine conformality defect.  Sets on which f is
// not injective (a critical point inside, or two atoms sharing an image) are
// skipped with a warning.
JacobianReport jacobian_residual_detail(const ConformalEstimate& estimate,
                                        const RationalMap& map,
                                        const std::vector<Disk>& test_sets);
double jacobian_residual(const ConformalEstimate& estimate, const RationalMap& map,
                         const std::vector<Disk>& test_sets);

struct DimBoundReport {
    double bound = 0.0;  // P/q + d
    std::vector<int> n;
    std::vector<double> log_measure;  // log of the transported pullback-ball mass
    std::vector<double> log_diam;     // log diameter of the pulled-back ball
    std::vector<double> ratio;        // log_measure / log_diam
    std::vector<double> ball_mass;    // atomic mass of B(f^n(x), delta)
    std::vector<bool> flagged;        // pullback failures
    bool ok = false;                  // every entry evaluated and finite
};

// Upper bound P/q + d for the lower pointwise dimension at x, together with
// the empirical mass/diameter ratios of backward-iterated balls along n_list.
// Ball masses are transported to depth n through the conformal scaling
// e^{-nP} |(f^n)'(x)|^{-d}; diameters come from extended-precision pullbacks
// of boundary samples (they shrink far below double resolution near x).
DimBoundReport pointwise_dim_report(const RationalMap& map, double d, double q, double P,
                                    Complex x, double delta, const std::vector<int>& n_list,
                                    int atom_depth = 8, int bits = 256);
double pointwise_dim_bound(const RationalMap& map, double d, double q, double P, Complex x,
                           double delta, const std::vector<int>& n_list);

}  // namespace lyap
