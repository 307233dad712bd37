#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lyapspec/poly.hpp"
#include "lyapspec/sphere.hpp"

namespace lyap {

// Error categories map onto CLI exit codes (config 2, numeric 3, search 4).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SearchError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ExceptionalReport {
    bool exceptional = false;
    std::vector<SpherePoint> sigma;   // the invariant finite set, when found
    bool pool_truncated = false;      // candidate pool hit its cap
    bool union_inconsistent = false;  // union of valid sets failed re-verification
};

// A rational self-map of the Riemann sphere, degree >= 2, given by
// numerator/denominator coefficient lists.  The planar chart is used for all
// derivative bookkeeping; the chart at infinity only enters evaluation and
// the critical-point count.
class RationalMap {
  public:
    RationalMap(Poly num, Poly den);

    // Parses {"num": [[re,im],...], "den": [[re,im],...]} (ascending order).
    static RationalMap from_json_text(const std::string& text);
    static RationalMap from_json_file(const std::string& path);
    std::string to_json_text() const;

    int degree() const { return degree_; }
    bool is_polynomial() const { return den_.degree() == 0; }
    const Poly& num() const { return num_; }
    const Poly& den() const { return den_; }

    SpherePoint evaluate(const SpherePoint& z) const;

    // log |f'(z)| in the planar chart; -infinity exactly at critical points.
    // Points at or beyond the chart bound fall back to the spherical
    // derivative so the value stays meaningful near infinity.
    double log_deriv_modulus(const SpherePoint& z) const;

    // Critical points with multiplicity (repeated entries), including the
    // point at infinity when it is critical.  Total count is 2*degree - 2.
    std::vector<SpherePoint> critical_points() const;

    // All finite solutions of f(w) = z, sorted deterministically.  If the
    // count falls short of degree(), the missing preimages are at infinity.
    std::vector<Complex> preimage_step(Complex z) const;

    // Finite fixed points (roots of num - z*den).  Infinity is fixed exactly
    // when the map is a polynomial.
    std::vector<Complex> finite_fixed_points() const;

    ExceptionalReport detect_exceptional(int orbit_depth = 4, int pool_cap = 24) const;

    static constexpr double kChartBound = 1e8;

  private:
    Poly num_, den_;
    Poly wronskian_;  // num' * den - num * den', the derivative numerator
    int degree_;
};

}  // namespace lyap
