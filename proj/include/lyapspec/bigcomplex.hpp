#pragma once

#include <mpfr.h>

#include <complex>
#include <vector>
#include <string>

#include "lyapspec/sphere.hpp"

namespace lyap {

// Arbitrary-precision real, thin RAII wrapper over MPFR.  Only the handful
// of operations needed for deep backward iteration are exposed.
class BigReal {
  public:
    explicit BigReal(int bits = 128) { mpfr_init2(v_, bits); mpfr_set_d(v_, 0.0, MPFR_RNDN); }
    BigReal(double x, int bits) { mpfr_init2(v_, bits); mpfr_set_d(v_, x, MPFR_RNDN); }
    BigReal(const BigReal& o) { mpfr_init2(v_, mpfr_get_prec(o.v_)); mpfr_set(v_, o.v_, MPFR_RNDN); }
    BigReal(BigReal&& o) noexcept { mpfr_init2(v_, mpfr_get_prec(o.v_)); mpfr_swap(v_, o.v_); }
    BigReal& operator=(const BigReal& o) {
        if (this != &o) { mpfr_set_prec(v_, mpfr_get_prec(o.v_)); mpfr_set(v_, o.v_, MPFR_RNDN); }
        return *this;
    }
    BigReal& operator=(BigReal&& o) noexcept { mpfr_swap(v_, o.v_); return *this; }
    ~BigReal() { mpfr_clear(v_); }

    int bits() const { return static_cast<int>(mpfr_get_prec(v_)); }
    double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }
    bool negative() const { return mpfr_sgn(v_) < 0; }
    bool zero() const { return mpfr_zero_p(v_); }

    friend BigReal operator+(const BigReal& a, const BigReal& b) { BigReal r(prec2(a, b)); mpfr_add(r.v_, a.v_, b.v_, MPFR_RNDN); return r; }
    friend BigReal operator-(const BigReal& a, const BigReal& b) { BigReal r(prec2(a, b)); mpfr_sub(r.v_, a.v_, b.v_, MPFR_RNDN); return r; }
    friend BigReal operator*(const BigReal& a, const BigReal& b) { BigReal r(prec2(a, b)); mpfr_mul(r.v_, a.v_, b.v_, MPFR_RNDN); return r; }
    friend BigReal operator/(const BigReal& a, const BigReal& b) { BigReal r(prec2(a, b)); mpfr_div(r.v_, a.v_, b.v_, MPFR_RNDN); return r; }
    friend bool operator<(const BigReal& a, const BigReal& b) { return mpfr_cmp(a.v_, b.v_) < 0; }

    BigReal neg() const { BigReal r(bits()); mpfr_neg(r.v_, v_, MPFR_RNDN); return r; }
    BigReal abs() const { BigReal r(bits()); mpfr_abs(r.v_, v_, MPFR_RNDN); return r; }
    BigReal sqrt() const { BigReal r(bits()); mpfr_sqrt(r.v_, v_, MPFR_RNDN); return r; }
    double log_to_double() const;  // log of a positive value, exponent-safe

  private:
    static int prec2(const BigReal& a, const BigReal& b) { return std::max(a.bits(), b.bits()); }
    mpfr_t v_;
};

// Complex number over BigReal; supports the arithmetic used by backward
// branch iteration (add, mul, div, sqrt, modulus).
class BigComplex {
  public:
    explicit BigComplex(int bits = 128) : re_(0.0, bits), im_(0.0, bits) {}
    BigComplex(const Complex& z, int bits) : re_(z.real(), bits), im_(z.imag(), bits) {}
    BigComplex(BigReal re, BigReal im) : re_(std::move(re)), im_(std::move(im)) {}

    const BigReal& re() const { return re_; }
    const BigReal& im() const { return im_; }
    int bits() const { return re_.bits(); }
    Complex to_std() const { return Complex(re_.to_double(), im_.to_double()); }

    friend BigComplex operator+(const BigComplex& a, const BigComplex& b) { return {a.re_ + b.re_, a.im_ + b.im_}; }
    friend BigComplex operator-(const BigComplex& a, const BigComplex& b) { return {a.re_ - b.re_, a.im_ - b.im_}; }
    friend BigComplex operator*(const BigComplex& a, const BigComplex& b) {
        return {a.re_ * b.re_ - a.im_ * b.im_, a.re_ * b.im_ + a.im_ * b.re_};
    }
    friend BigComplex operator/(const BigComplex& a, const BigComplex& b) {
        BigReal n = b.re_ * b.re_ + b.im_ * b.im_;
        return {(a.re_ * b.re_ + a.im_ * b.im_) / n, (a.im_ * b.re_ - a.re_ * b.im_) / n};
    }

    BigReal norm() const { return re_ * re_ + im_ * im_; }
    BigReal abs() const { return norm().sqrt(); }
    // Principal square root via the half-angle algebraic identities (no trig).
    BigComplex sqrt() const;
    double log_abs() const { return 0.5 * norm().log_to_double(); }

  private:
    BigReal re_, im_;
};

// Distance |a - b| as a double, accurate even when both are nearly equal.
double big_distance(const BigComplex& a, const BigComplex& b);

class Poly;
class RationalMap;

// Horner evaluation of p at z, carried out at the precision of z.
BigComplex eval_poly_big(const Poly& p, const BigComplex& z);

// Finite preimages f^{-1}(z): double-precision roots of the fiber polynomial
// refined by big-float Newton steps until the precision of z is exhausted.
// Order matches RationalMap::preimage_step on the rounded point.
std::vector<BigComplex> preimage_step_big(const RationalMap& map, const BigComplex& z);

}  // namespace lyap
