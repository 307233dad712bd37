#include "lyapspec/bigcomplex.hpp"

#include <cmath>
#include <stdexcept>

#include "lyapspec/poly.hpp"
#include "lyapspec/rational_map.hpp"

namespace lyap {

double BigReal::log_to_double() const {
    if (mpfr_sgn(v_) <= 0) return -std::numeric_limits<double>::infinity();
    mpfr_t tmp;
    mpfr_init2(tmp, 64);
    mpfr_log(tmp, v_, MPFR_RNDN);
    double out = mpfr_get_d(tmp, MPFR_RNDN);
    mpfr_clear(tmp);
    return out;
}

BigComplex BigComplex::sqrt() const {
    const int bits = re_.bits();
    BigReal r = abs();
    if (r.zero()) return BigComplex(Complex(0.0, 0.0), bits);
    BigReal two(2.0, bits);
    BigReal ax = re_.abs();
    // u = sqrt((|z| + |x|)/2) is always well conditioned.
    BigReal u = ((r + ax) / two).sqrt();
    if (!re_.negative()) {
        BigReal w_im = im_ / (u * two);
        return BigComplex(u, std::move(w_im));
    }
    BigReal v = im_.abs() / (u * two);
    if (im_.negative()) return BigComplex(std::move(v), u.neg());
    return BigComplex(std::move(v), std::move(u));
}

double big_distance(const BigComplex& a, const BigComplex& b) {
    BigComplex d = a - b;
    BigReal n = d.norm();
    if (n.zero()) return 0.0;
    return std::exp(0.5 * n.log_to_double());
}

BigComplex eval_poly_big(const Poly& p, const BigComplex& z) {
    const std::vector<Complex>& c = p.coefficients();
    const int bits = z.bits();
    BigComplex acc(c.back(), bits);
    for (int i = static_cast<int>(c.size()) - 2; i >= 0; --i)
        acc = acc * z + BigComplex(c[i], bits);
    return acc;
}

std::vector<BigComplex> preimage_step_big(const RationalMap& map, const BigComplex& z) {
    const std::vector<Complex> rough = map.preimage_step(z.to_std());
    const Poly dnum = map.num().derivative();
    const Poly dden = map.den().derivative();
    const int bits = z.bits();
    // Newton doubles the correct digits per step; the doubles carry ~53.
    const int steps = 2 + bits / 50;
    std::vector<BigComplex> out;
    out.reserve(rough.size());
    for (const Complex& r : rough) {
        BigComplex w(r, bits);
        for (int it = 0; it < steps; ++it) {
            BigComplex g = eval_poly_big(map.num(), w) - z * eval_poly_big(map.den(), w);
            BigComplex gp = eval_poly_big(dnum, w) - z * eval_poly_big(dden, w);
            if (gp.norm().zero()) break;  // degenerate fiber; keep the double root
            w = w - g / gp;
        }
        out.push_back(w);
    }
    return out;
}

}  // namespace lyap
