#include "lyapspec/poly.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lyap {

Poly::Poly(std::vector<Complex> coef) : coef_(std::move(coef)) {
    if (coef_.empty()) coef_.push_back(Complex(0.0, 0.0));
    // Trim exact-zero leading coefficients so degree() is meaningful.
    while (coef_.size() > 1 && coef_.back() == Complex(0.0, 0.0)) coef_.pop_back();
}

Complex Poly::eval(Complex z) const {
    Complex acc(0.0, 0.0);
    for (auto it = coef_.rbegin(); it != coef_.rend(); ++it) acc = acc * z + *it;
    return acc;
}

Complex Poly::eval_reversed(Complex w) const {
    Complex acc(0.0, 0.0);
    for (const Complex& c : coef_) acc = acc * w + c;
    return acc;
}

Poly Poly::derivative() const {
    if (coef_.size() == 1) return Poly{Complex(0.0, 0.0)};
    std::vector<Complex> d(coef_.size() - 1);
    for (size_t i = 1; i < coef_.size(); ++i) d[i - 1] = coef_[i] * static_cast<double>(i);
    return Poly(std::move(d));
}

double Poly::coefficient_scale() const {
    double s = 0.0;
    for (const Complex& c : coef_) s = std::max(s, std::abs(c));
    return s;
}

Poly Poly::operator+(const Poly& other) const {
    std::vector<Complex> out(std::max(coef_.size(), other.coef_.size()), Complex(0.0, 0.0));
    for (size_t i = 0; i < coef_.size(); ++i) out[i] += coef_[i];
    for (size_t i = 0; i < other.coef_.size(); ++i) out[i] += other.coef_[i];
    return Poly(std::move(out));
}

Poly Poly::operator-(const Poly& other) const {
    return *this + other.scaled(Complex(-1.0, 0.0));
}

Poly Poly::operator*(const Poly& other) const {
    std::vector<Complex> out(coef_.size() + other.coef_.size() - 1, Complex(0.0, 0.0));
    for (size_t i = 0; i < coef_.size(); ++i)
        for (size_t j = 0; j < other.coef_.size(); ++j) out[i + j] += coef_[i] * other.coef_[j];
    return Poly(std::move(out));
}

Poly Poly::scaled(Complex s) const {
    std::vector<Complex> out(coef_);
    for (Complex& c : out) c *= s;
    return Poly(std::move(out));
}

namespace {

std::vector<Complex> quadratic_roots(Complex a, Complex b, Complex c) {
    // Numerically stable form: pick the sign that avoids cancellation in -b +- sqrt(disc).
    Complex disc = std::sqrt(b * b - 4.0 * a * c);
    Complex q = (std::real(std::conj(b) * disc) >= 0.0) ? -0.5 * (b + disc) : -0.5 * (b - disc);
    std::vector<Complex> roots;
    if (std::abs(q) > 0.0) {
        roots.push_back(q / a);
        roots.push_back(c / q);
    } else {
        roots.push_back(Complex(0.0, 0.0));
        roots.push_back(-b / a);
    }
    if (complex_less(roots[1], roots[0])) std::swap(roots[0], roots[1]);
    return roots;
}

// One Newton step evaluated through Horner, returning p(z)/p'(z).
Complex newton_ratio(const std::vector<Complex>& c, Complex z) {
    Complex p(0.0, 0.0), dp(0.0, 0.0);
    for (auto it = c.rbegin(); it != c.rend(); ++it) {
        dp = dp * z + p;
        p = p * z + *it;
    }
    if (std::abs(dp) == 0.0) return Complex(0.0, 0.0);
    return p / dp;
}

}  // namespace

std::vector<Complex> poly_roots(const Poly& p) {
    if (p.is_zero()) throw std::invalid_argument("poly_roots: zero polynomial");
    const int n = p.degree();
    if (n == 0) return {};
    const std::vector<Complex>& c = p.coefficients();
    if (n == 1) return {-c[0] / c[1]};
    if (n == 2) return quadratic_roots(c[2], c[1], c[0]);

    // Durand-Kerner on the monic normalization.
    std::vector<Complex> m(c.begin(), c.end());
    for (Complex& v : m) v /= c.back();
    double radius = 0.0;
    for (int i = 0; i < n; ++i) radius = std::max(radius, std::abs(m[i]));
    radius = 1.0 + radius;  // Cauchy bound

    std::vector<Complex> z(n);
    for (int i = 0; i < n; ++i) {
        double theta = 2.0 * M_PI * i / n + 0.41;  // offset breaks symmetry ties
        z[i] = 0.7 * radius * Complex(std::cos(theta), std::sin(theta));
    }
    Poly monic{std::vector<Complex>(m)};
    for (int iter = 0; iter < 600; ++iter) {
        double max_step = 0.0;
        for (int i = 0; i < n; ++i) {
            Complex denom(1.0, 0.0);
            for (int j = 0; j < n; ++j)
                if (j != i) denom *= (z[i] - z[j]);
            if (std::abs(denom) == 0.0) {
                z[i] += Complex(1e-8, 1e-8);
                continue;
            }
            Complex step = monic.eval(z[i]) / denom;
            z[i] -= step;
            max_step = std::max(max_step, std::abs(step));
        }
        if (max_step < 1e-14 * radius) break;
    }
    // Newton polish sharpens simple roots to full precision.
    for (Complex& zi : z)
        for (int k = 0; k < 4; ++k) zi -= newton_ratio(m, zi);
    std::sort(z.begin(), z.end(), complex_less);
    return z;
}

double root_separation(const Poly& p, const Poly& q) {
    if (p.degree() < 1 || q.degree() < 1) return std::numeric_limits<double>::infinity();
    std::vector<Complex> rp = poly_roots(p);
    std::vector<Complex> rq = poly_roots(q);
    double scale = 1.0;
    for (const Complex& r : rp) scale = std::max(scale, std::abs(r));
    for (const Complex& r : rq) scale = std::max(scale, std::abs(r));
    double best = std::numeric_limits<double>::infinity();
    for (const Complex& a : rp)
        for (const Complex& b : rq) best = std::min(best, std::abs(a - b));
    return best / scale;
}

}  // namespace lyap
