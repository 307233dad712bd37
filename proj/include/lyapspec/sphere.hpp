#pragma once

#include <cmath>
#include <complex>
#include <limits>

namespace lyap {

using Complex = std::complex<double>;

// A point on the Riemann sphere: either a finite complex number or the
// point at infinity.  Finite values keep full double precision; infinity is
// an explicit sentinel rather than an IEEE inf so that arithmetic on finite
// points never silently produces the sentinel.
struct SpherePoint {
    Complex z{0.0, 0.0};
    bool at_inf = false;

    SpherePoint() = default;
    SpherePoint(Complex value) : z(value) {
        if (!std::isfinite(value.real()) || !std::isfinite(value.imag())) {
            at_inf = true;
            z = Complex(0.0, 0.0);
        }
    }
    SpherePoint(double re, double im) : SpherePoint(Complex(re, im)) {}

    static SpherePoint infinity() {
        SpherePoint p;
        p.at_inf = true;
        return p;
    }

    bool finite() const { return !at_inf; }

    // Chordal distance on the sphere, range [0, 2].
    double chordal(const SpherePoint& other) const {
        if (at_inf && other.at_inf) return 0.0;
        if (at_inf || other.at_inf) {
            const Complex& w = at_inf ? other.z : z;
            return 2.0 / std::sqrt(1.0 + std::norm(w));
        }
        return 2.0 * std::abs(z - other.z) /
               (std::sqrt(1.0 + std::norm(z)) * std::sqrt(1.0 + std::norm(other.z)));
    }

    bool close_to(const SpherePoint& other, double tol) const {
        return chordal(other) <= tol;
    }
};

inline double neg_infinity() { return -std::numeric_limits<double>::infinity(); }

// Deterministic total order for complex values (real part, then imaginary).
inline bool complex_less(const Complex& a, const Complex& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
}

inline bool sphere_less(const SpherePoint& a, const SpherePoint& b) {
    if (a.at_inf != b.at_inf) return !a.at_inf;  // finite points first
    if (a.at_inf) return false;
    return complex_less(a.z, b.z);
}

}  // namespace lyap
