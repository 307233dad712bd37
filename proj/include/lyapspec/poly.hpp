#pragma once

#include <initializer_list>
#include <vector>

#include "lyapspec/sphere.hpp"

namespace lyap {

// Dense univariate polynomial with complex coefficients in ascending order:
// c[0] + c[1] z + ... + c[n] z^n.
class Poly {
  public:
    Poly() : coef_{Complex(0.0, 0.0)} {}
    explicit Poly(std::vector<Complex> coef);
    Poly(std::initializer_list<Complex> coef) : Poly(std::vector<Complex>(coef)) {}

    int degree() const { return static_cast<int>(coef_.size()) - 1; }
    const std::vector<Complex>& coefficients() const { return coef_; }
    Complex leading() const { return coef_.back(); }
    bool is_zero() const { return coef_.size() == 1 && coef_[0] == Complex(0.0, 0.0); }

    Complex eval(Complex z) const;
    // Evaluates p(1/w) * w^degree (the reversed-coefficient polynomial), used
    // for stable evaluation in the chart at infinity.
    Complex eval_reversed(Complex w) const;

    Poly derivative() const;
    double coefficient_scale() const;  // max |c_i|

    Poly operator+(const Poly& other) const;
    Poly operator-(const Poly& other) const;
    Poly operator*(const Poly& other) const;
    Poly scaled(Complex s) const;

  private:
    std::vector<Complex> coef_;
};

// All complex roots, with multiplicity (a k-fold root appears k times, as a
// cluster of nearly equal values).  Closed forms for degree <= 2, otherwise
// Durand-Kerner iteration with Newton polishing.  Throws on the zero
// polynomial; returns empty for constants.
std::vector<Complex> poly_roots(const Poly& p);

// Smallest distance between a root of p and a root of q, normalized by the
// root magnitude scale.  Used to reject rational maps whose numerator and
// denominator share a factor (a vanishing resultant shows up as a root
// collision).
double root_separation(const Poly& p, const Poly& q);

}  // namespace lyap
