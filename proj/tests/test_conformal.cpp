#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "lyapspec/conformal.hpp"
#include "lyapspec/pressure.hpp"
#include "lyapspec/rational_map.hpp"

using namespace lyap;

namespace {

constexpr double kLog2 = 0.6931471805599453;

// Oracle: direct recursive enumeration of f^-n(x) with running derivative
// sums, normalized by hand.  No tree bookkeeping, no flag machinery.
struct OracleAtom {
    Complex z;
    double weight;
};

std::vector<OracleAtom> conformal_oracle(const RationalMap& map, double d, Complex x, int n,
                                         double P) {
    std::vector<OracleAtom> atoms;
    std::function<void(Complex, double, int)> walk = [&](Complex point, double logsum, int depth) {
        if (depth == n) {
            atoms.push_back({point, -static_cast<double>(n) * P - d * logsum});
            return;
        }
        for (const Complex& w : map.preimage_step(point))
            walk(w, logsum + map.log_deriv_modulus(SpherePoint(w)), depth + 1);
    };
    walk(x, 0.0, 0);
    double mx = -1e300;
    for (const OracleAtom& a : atoms) mx = std::max(mx, a.weight);
    double Z = 0.0;
    for (OracleAtom& a : atoms) Z += std::exp(a.weight - mx);
    for (OracleAtom& a : atoms) a.weight = std::exp(a.weight - mx) / Z;
    return atoms;
}

// Oracle mass of a disk, by matching each library atom to nothing -- just sum
// the oracle weights inside.
double oracle_mass(const std::vector<OracleAtom>& atoms, const Disk& ball) {
    double m = 0.0;
    for (const OracleAtom& a : atoms)
        if (std::abs(a.z - ball.center) <= ball.radius) m += a.weight;
    return m;
}

RationalMap quad(double c) {
    return RationalMap(Poly{c, 0.0, 1.0}, Poly{1.0});
}

}  // namespace

TEST_CASE("depth zero estimate is a unit point mass") {
    ConformalEstimate est = estimate_conformal(quad(0.0), 1.0, Complex(1.0, 0.0), 0, 0.0);
    REQUIRE(est.atoms.size() == 1);
    CHECK(est.atoms[0].weight == doctest::Approx(1.0));
    CHECK(est.Z == doctest::Approx(1.0));
    CHECK(!est.degraded);
}

TEST_CASE("squaring map atoms are uniform on the circle") {
    // |(f^n)'| = 2^n at every depth-n preimage of a circle point, so the
    // measure is uniform for every exponent
    for (double d : {-0.5, 0.0, 1.0}) {
        double P = (1.0 - d) * kLog2;
        ConformalEstimate est = estimate_conformal(quad(0.0), d, Complex(1.0, 0.0), 8, P);
        REQUIRE(est.atoms.size() == 256);
        CHECK(!est.degraded);
        for (const ConformalAtom& a : est.atoms) {
            CHECK(a.weight == doctest::Approx(1.0 / 256).epsilon(1e-10));
            CHECK(std::abs(std::abs(a.point) - 1.0) < 1e-10);
        }
        // with the exact pressure, the partition sum is exactly 1
        CHECK(est.Z == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("library weights match the recursive oracle") {
    RationalMap f = quad(-6.0);
    Complex base = auto_base(f);
    double d = 0.45;
    double P = tree_pressure(f, d, base, 8);
    ConformalEstimate est = estimate_conformal(f, d, base, 7, P);
    std::vector<OracleAtom> oracle = conformal_oracle(f, d, base, 7, P);
    REQUIRE(est.atoms.size() == oracle.size());

    // compare as measures through disk masses at several scales
    for (const Complex& c : {Complex(3.0, 0.0), Complex(-2.0, 0.0), Complex(2.2, 0.4)})
        for (double r : {0.3, 0.8, 2.0}) {
            Disk ball{c, r};
            CHECK(est.mass_in(ball) == doctest::Approx(oracle_mass(oracle, ball)).epsilon(1e-9));
        }
    CHECK(est.mass_in({Complex(0.0, 0.0), 10.0}) == doctest::Approx(1.0));
}

TEST_CASE("deepening the estimate moves disk masses only slightly") {
    RationalMap f = quad(-6.0);
    Complex base = auto_base(f);
    double d = 0.438693;
    double P = tree_pressure(f, d, base, 10);
    ConformalEstimate ten = estimate_conformal(f, d, base, 10, P);
    std::vector<OracleAtom> eleven = conformal_oracle(f, d, base, 11, P);
    for (const Complex& c : {Complex(2.45, 0.0), Complex(-2.45, 0.0)})
        for (double r : {0.9, 1.4}) {
            Disk ball{c, r};
            CHECK(std::abs(ten.mass_in(ball) - oracle_mass(eleven, ball)) < 5e-2);
        }
}

TEST_CASE("jacobian residual vanishes for the exactly conformal family") {
    RationalMap f = quad(0.0);
    ConformalEstimate est = estimate_conformal(f, 1.0, Complex(1.0, 0.0), 8, 0.0);
    std::vector<Disk> arcs;
    for (int k = 0; k < 8; ++k) {
        double th = 2.0 * M_PI * k / 8;
        arcs.push_back({Complex(std::cos(th), std::sin(th)), 0.3});
    }
    JacobianReport rep = jacobian_residual_detail(est, f, arcs);
    CHECK(rep.evaluated == 8);
    CHECK(rep.skipped == 0);
    CHECK(rep.residual < 1e-9);
    CHECK(jacobian_residual(est, f, arcs) == doctest::Approx(rep.residual));
}

TEST_CASE("jacobian skips sets where the map folds") {
    RationalMap f = quad(0.0);
    ConformalEstimate est = estimate_conformal(f, 1.0, Complex(1.0, 0.0), 8, 0.0);
    // a disk centered at the critical point catches antipodal atom pairs with
    // equal images, so it cannot be evaluated honestly
    JacobianReport rep = jacobian_residual_detail(est, f, {{Complex(0.0, 0.0), 1.05}});
    CHECK(rep.skipped == 1);
    CHECK(rep.evaluated == 0);
    CHECK(!rep.warnings.empty());
}

TEST_CASE("wrong pressure shows up as a jacobian defect") {
    RationalMap f = quad(0.0);
    // feed a pressure that is off by 0.1: the transported mass picks up a
    // factor e^0.1 per step
    ConformalEstimate est = estimate_conformal(f, 1.0, Complex(1.0, 0.0), 8, 0.1);
    std::vector<Disk> arcs;
    for (int k = 0; k < 8; ++k) {
        double th = 2.0 * M_PI * k / 8;
        arcs.push_back({Complex(std::cos(th), std::sin(th)), 0.3});
    }
    JacobianReport rep = jacobian_residual_detail(est, f, arcs);
    CHECK(rep.residual > 0.05);
}

TEST_CASE("negative exponents are refused when an invariant set sits on the repeller") {
    // the interval endpoints {-2, 2} survive backward iteration of z^2 - 2,
    // so a negative-exponent measure would concentrate escaping mass there
    CHECK_THROWS_AS(estimate_conformal(quad(-2.0), -0.5, Complex(0.0, 0.7), 5, 0.8), ConfigError);
    // the squaring map has no such set away from the critical points
    CHECK_NOTHROW(estimate_conformal(quad(0.0), -0.5, Complex(1.0, 0.0), 5, 1.5 * kLog2));
}

TEST_CASE("support stays near an independent repeller sample") {
    RationalMap f = quad(-6.0);
    Complex base = auto_base(f);
    ConformalEstimate est = estimate_conformal(f, 0.44, base, 9, 0.0);
    // reference: deep preimages of the other fixed point
    std::vector<OracleAtom> ref = conformal_oracle(f, 0.44, Complex(-2.0, 0.001), 9, 0.0);
    std::vector<Complex> pts;
    for (const OracleAtom& a : ref) pts.push_back(a.z);
    CHECK(est.max_distance_to(pts) < 0.1);
}

TEST_CASE("pointwise bound formula and ratio columns") {
    RationalMap f = quad(0.0);
    DimBoundReport rep = pointwise_dim_report(f, 1.0, kLog2, 0.0, Complex(1.0, 0.0), 0.3,
                                              {40, 60}, 8, 192);
    CHECK(rep.bound == doctest::Approx(1.0).epsilon(1e-12));  // P/q + d = 0/log2 + 1
    CHECK(rep.ok);
    REQUIRE(rep.ratio.size() == 2);
    for (double r : rep.ratio) CHECK(r == doctest::Approx(1.0).epsilon(0.1));
    // deeper pullbacks tighten the ratio toward the bound
    CHECK(std::abs(rep.ratio[1] - 1.0) < std::abs(rep.ratio[0] - 1.0));
}

TEST_CASE("pointwise bound rejects bad inputs") {
    RationalMap f = quad(0.0);
    CHECK_THROWS_AS(pointwise_dim_report(f, 1.0, -0.1, 0.0, Complex(1.0, 0.0), 0.3, {10}),
                    ConfigError);
    CHECK_THROWS_AS(pointwise_dim_report(f, 1.0, kLog2, 0.0, Complex(1.0, 0.0), -1.0, {10}),
                    ConfigError);
    CHECK_THROWS_AS(pointwise_dim_report(f, 1.0, kLog2, 0.0, Complex(1.0, 0.0), 0.3, {0}),
                    ConfigError);
}

TEST_CASE("csv export carries one row per atom") {
    ConformalEstimate est = estimate_conformal(quad(0.0), 1.0, Complex(1.0, 0.0), 4, 0.0);
    std::string text = est.to_csv_text();
    size_t rows = static_cast<size_t>(std::count(text.begin(), text.end(), '\n'));
    CHECK(rows == est.atoms.size() + 1);  // header + atoms
    CHECK(text.rfind("re,im,weight", 0) == 0);
}
