#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "lyapspec/io.hpp"
#include "lyapspec/poly.hpp"
#include "lyapspec/rational_map.hpp"

using namespace lyap;

namespace {

// Oracle: textbook Horner evaluation, independent of Poly::eval.
Complex horner(const std::vector<Complex>& c, Complex z) {
    Complex acc(0.0, 0.0);
    for (size_t i = c.size(); i-- > 0;) acc = acc * z + c[i];
    return acc;
}

// Oracle: expand prod (z - r_i) coefficient by coefficient.
std::vector<Complex> from_roots(const std::vector<Complex>& roots) {
    std::vector<Complex> c{Complex(1.0, 0.0)};
    for (Complex r : roots) {
        std::vector<Complex> next(c.size() + 1, Complex(0.0, 0.0));
        for (size_t i = 0; i < c.size(); ++i) {
            next[i + 1] += c[i];
            next[i] -= r * c[i];
        }
        c = next;
    }
    return c;
}

RationalMap quad(double c) {
    return RationalMap(Poly{c, 0.0, 1.0}, Poly{1.0});
}

}  // namespace

TEST_CASE("polynomial evaluation matches Horner oracle") {
    Rng rng(7u);
    for (int trial = 0; trial < 50; ++trial) {
        int deg = rng.uniform_int(0, 6);
        std::vector<Complex> c;
        for (int i = 0; i <= deg; ++i) c.emplace_back(rng.uniform(-2, 2), rng.uniform(-2, 2));
        if (std::abs(c.back()) < 0.1) c.back() += Complex(1.0, 0.0);
        Poly p((std::vector<Complex>(c)));
        for (int k = 0; k < 5; ++k) {
            Complex z(rng.uniform(-3, 3), rng.uniform(-3, 3));
            CHECK(std::abs(p.eval(z) - horner(c, z)) < 1e-12 * (1.0 + std::abs(horner(c, z))));
        }
    }
}

TEST_CASE("reversed evaluation agrees with p(1/w) * w^deg") {
    Poly p{1.0, -2.0, 0.0, 3.0};
    for (double w : {0.5, -1.25, 2.0}) {
        Complex direct = p.eval(Complex(1.0 / w, 0.0)) * std::pow(Complex(w, 0.0), 3);
        CHECK(std::abs(p.eval_reversed(Complex(w, 0.0)) - direct) < 1e-12);
    }
}

TEST_CASE("derivative of z^3 - 2z is 3z^2 - 2") {
    Poly p{0.0, -2.0, 0.0, 1.0};
    Poly dp = p.derivative();
    for (double x : {-1.5, 0.0, 0.7, 2.0}) {
        Complex z(x, 0.3);
        CHECK(std::abs(dp.eval(z) - (3.0 * z * z - 2.0)) < 1e-12);
    }
}

TEST_CASE("roots recovered from random factored polynomials") {
    Rng rng(11u);
    for (int trial = 0; trial < 40; ++trial) {
        int deg = rng.uniform_int(1, 6);
        std::vector<Complex> roots;
        while (static_cast<int>(roots.size()) < deg) {
            Complex r(rng.uniform(-2, 2), rng.uniform(-2, 2));
            bool clear = true;
            for (Complex s : roots)
                if (std::abs(r - s) < 0.15) clear = false;
            if (clear) roots.push_back(r);
        }
        std::vector<Complex> found = poly_roots(Poly(from_roots(roots)));
        REQUIRE(found.size() == roots.size());
        std::sort(roots.begin(), roots.end(), complex_less);
        std::sort(found.begin(), found.end(), complex_less);
        for (size_t i = 0; i < roots.size(); ++i) CHECK(std::abs(found[i] - roots[i]) < 1e-7);
    }
}

TEST_CASE("cubic with integer roots") {
    std::vector<Complex> r = poly_roots(Poly{6.0, -7.0, 0.0, 1.0});  // (z-1)(z-2)(z+3)
    REQUIRE(r.size() == 3);
    std::sort(r.begin(), r.end(), complex_less);
    CHECK(std::abs(r[0] - Complex(-3.0, 0.0)) < 1e-9);
    CHECK(std::abs(r[1] - Complex(1.0, 0.0)) < 1e-9);
    CHECK(std::abs(r[2] - Complex(2.0, 0.0)) < 1e-9);
}

TEST_CASE("double root reported with multiplicity") {
    std::vector<Complex> r = poly_roots(Poly{1.0, -2.0, 1.0});  // (z-1)^2
    REQUIRE(r.size() == 2);
    CHECK(std::abs(r[0] - Complex(1.0, 0.0)) < 1e-5);
    CHECK(std::abs(r[1] - Complex(1.0, 0.0)) < 1e-5);
}

TEST_CASE("squaring map basics") {
    RationalMap f = quad(0.0);
    CHECK(f.degree() == 2);
    CHECK(f.is_polynomial());
    SpherePoint img = f.evaluate(SpherePoint(2.0, 1.0));
    REQUIRE(img.finite());
    CHECK(std::abs(img.z - Complex(3.0, 4.0)) < 1e-12);
    CHECK(f.evaluate(SpherePoint::infinity()).at_inf);

    CHECK(f.log_deriv_modulus(SpherePoint(1.0, 0.0)) == doctest::Approx(std::log(2.0)));
    CHECK(f.log_deriv_modulus(SpherePoint(0.0, 0.0)) == neg_infinity());

    std::vector<Complex> pre = f.preimage_step(Complex(4.0, 0.0));
    REQUIRE(pre.size() == 2);
    std::sort(pre.begin(), pre.end(), complex_less);
    CHECK(std::abs(pre[0] - Complex(-2.0, 0.0)) < 1e-10);
    CHECK(std::abs(pre[1] - Complex(2.0, 0.0)) < 1e-10);

    std::vector<Complex> fix = f.finite_fixed_points();
    REQUIRE(fix.size() == 2);
    std::sort(fix.begin(), fix.end(), complex_less);
    CHECK(std::abs(fix[0]) < 1e-10);
    CHECK(std::abs(fix[1] - Complex(1.0, 0.0)) < 1e-10);

    std::vector<SpherePoint> crit = f.critical_points();
    CHECK(crit.size() == 2);  // 2*deg - 2
    bool has_zero = false, has_inf = false;
    for (const SpherePoint& c : crit) {
        if (c.at_inf) has_inf = true;
        else if (std::abs(c.z) < 1e-10) has_zero = true;
    }
    CHECK(has_zero);
    CHECK(has_inf);
}

TEST_CASE("interval map fixed points and preimages") {
    RationalMap f = quad(-2.0);
    std::vector<Complex> fix = f.finite_fixed_points();
    REQUIRE(fix.size() == 2);
    std::sort(fix.begin(), fix.end(), complex_less);
    CHECK(std::abs(fix[0] - Complex(-1.0, 0.0)) < 1e-10);
    CHECK(std::abs(fix[1] - Complex(2.0, 0.0)) < 1e-10);

    // critical value: both preimages of -2 collapse to 0
    std::vector<Complex> pre = f.preimage_step(Complex(-2.0, 0.0));
    REQUIRE(pre.size() == 2);
    CHECK(std::abs(pre[0]) < 1e-6);
    CHECK(std::abs(pre[1]) < 1e-6);
}

TEST_CASE("true rational map sends poles to infinity") {
    // f(z) = (z^2 + 1) / (z^2 - 1)
    RationalMap f(Poly{1.0, 0.0, 1.0}, Poly{-1.0, 0.0, 1.0});
    CHECK(!f.is_polynomial());
    CHECK(f.degree() == 2);
    CHECK(f.evaluate(SpherePoint(1.0, 0.0)).at_inf);
    SpherePoint at_inf = f.evaluate(SpherePoint::infinity());
    REQUIRE(at_inf.finite());
    CHECK(std::abs(at_inf.z - Complex(1.0, 0.0)) < 1e-12);
}

TEST_CASE("json round trip preserves the map") {
    RationalMap f(Poly{Complex(0.25, -0.5), 0.0, 1.0}, Poly{1.0});
    RationalMap g = RationalMap::from_json_text(f.to_json_text());
    Rng rng(3u);
    for (int k = 0; k < 10; ++k) {
        SpherePoint z(rng.uniform(-2, 2), rng.uniform(-2, 2));
        SpherePoint a = f.evaluate(z), b = g.evaluate(z);
        REQUIRE(a.finite() == b.finite());
        if (a.finite()) CHECK(std::abs(a.z - b.z) < 1e-14);
    }
}

TEST_CASE("map json rejects malformed input") {
    CHECK_THROWS_AS(RationalMap::from_json_text("{\"num\": [[0,0],[0,0],[1,0]]}"), ConfigError);
    CHECK_THROWS_AS(RationalMap::from_json_text(
                        "{\"num\": [[0,0],[0,0],[1,0]], \"den\": [[1,0]], \"extra\": 1}"),
                    ConfigError);
    CHECK_THROWS_AS(RationalMap::from_json_text("not json at all"), std::exception);
}

TEST_CASE("constructor rejects degenerate data") {
    CHECK_THROWS_AS(RationalMap(Poly{0.0, 1.0}, Poly{1.0}), ConfigError);           // degree 1
    CHECK_THROWS_AS(RationalMap(Poly{1.0, 0.0, 1.0}, Poly{0.0}), ConfigError);      // zero den
    CHECK_THROWS_AS(RationalMap(Poly{-1.0, 0.0, 1.0}, Poly{-1.0, 1.0}), ConfigError);  // shared root
}

TEST_CASE("invariant finite sets off the critical locus") {
    // the detector looks for finite sets with sigma = f^-1(sigma) minus the
    // critical points.  For z^2 the candidates 0 and infinity are themselves
    // critical, so nothing qualifies.
    CHECK(!quad(0.0).detect_exceptional().exceptional);

    // the interval endpoints {-2, 2} pull back to {0, -2, 2} and dropping the
    // critical point 0 reproduces them: the classical obstruction set
    ExceptionalReport interval = quad(-2.0).detect_exceptional();
    REQUIRE(interval.exceptional);
    REQUIRE(interval.sigma.size() == 2);
    CHECK(std::abs(interval.sigma[0].z - Complex(-2.0, 0.0)) < 1e-9);
    CHECK(std::abs(interval.sigma[1].z - Complex(2.0, 0.0)) < 1e-9);

    CHECK(!quad(-6.0).detect_exceptional().exceptional);

    RationalMap f(Poly{1.0, 0.0, 1.0}, Poly{-1.0, 0.0, 1.0});
    CHECK(!f.detect_exceptional().exceptional);
}

TEST_CASE("chordal metric sanity") {
    SpherePoint zero(0.0, 0.0);
    CHECK(zero.chordal(SpherePoint::infinity()) == doctest::Approx(2.0));
    CHECK(SpherePoint::infinity().chordal(SpherePoint::infinity()) == 0.0);
    CHECK(zero.chordal(zero) == 0.0);
    // symmetry
    SpherePoint a(1.0, 2.0), b(-0.5, 0.25);
    CHECK(a.chordal(b) == doctest::Approx(b.chordal(a)));
}
