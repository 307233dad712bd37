#include "lyapspec/conformal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lyapspec/bigcomplex.hpp"
#include "lyapspec/io.hpp"

namespace lyap {

namespace {

// Negative d is only meaningful when no invariant finite set sits on the
// repeller; proxy the repeller by a shallow backward tree and insist every
// detected invariant point keeps its distance.
void guard_negative_d(const RationalMap& map, double d) {
    if (d >= 0.0) return;
    ExceptionalReport rep = map.detect_exceptional();
    if (!rep.exceptional) return;
    int depth = 6;
    while (depth > 2 && std::pow(static_cast<double>(map.degree()), depth) > 4096.0) --depth;
    PreimageTree tree = preimage_tree(map, auto_base(map), depth);
    for (const SpherePoint& s : rep.sigma) {
        if (!s.finite()) continue;  // the plane chart carries the repeller here
        for (const PreimageNode& leaf : tree.leaves()) {
            if (std::abs(s.z - leaf.point) < 5e-2)
                throw ConfigError(
                    "negative d refused: an invariant finite set touches the repeller");
        }
    }
}

}  // namespace

double ConformalEstimate::mass_in(const Disk& ball) const {
    double acc = 0.0;
    for (const ConformalAtom& a : atoms)
        if (std::abs(a.point - ball.center) <= ball.radius) acc += a.weight;
    return acc;
}

double ConformalEstimate::max_distance_to(const std::vector<Complex>& reference) const {
    if (reference.empty() || atoms.empty()) return std::numeric_limits<double>::quiet_NaN();
    double worst = 0.0;
    for (const ConformalAtom& a : atoms) {
        double best = std::numeric_limits<double>::infinity();
        for (Complex r : reference) best = std::min(best, std::abs(a.point - r));
        worst = std::max(worst, best);
    }
    return worst;
}

std::string ConformalEstimate::to_csv_text() const {
    CsvWriter csv({"re", "im", "weight"});
    for (const ConformalAtom& a : atoms)
        csv.row({fmt_double(a.point.real()), fmt_double(a.point.imag()),
                 fmt_double(a.weight)});
    return csv.text;
}

ConformalEstimate estimate_conformal(const RationalMap& map, double d, Complex x, int n,
                                     double P) {
    if (n < 0) throw ConfigError("estimate depth must be >= 0");
    guard_negative_d(map, d);

    ConformalEstimate est;
    est.d = d;
    est.P = P;
    est.base = x;
    est.depth = n;
    if (n == 0) {
        est.atoms.push_back({x, 1.0});
        est.Z = 1.0;
        return est;
    }

    PreimageTree tree = preimage_tree(map, x, n);
    est.degraded = tree.flagged_nodes > 0;

    // cumulative log|(f^k)'| along each branch; the base's own derivative is
    // not part of (f^n)'(leaf)
    std::vector<double> cum{0.0};
    for (int level = 1; level <= n; ++level) {
        std::vector<double> next(tree.levels[level].size());
        for (size_t i = 0; i < tree.levels[level].size(); ++i) {
            const PreimageNode& node = tree.levels[level][i];
            next[i] = cum[node.parent] + node.log_deriv;
        }
        cum.swap(next);
    }

    const std::vector<PreimageNode>& leaves = tree.leaves();
    std::vector<double> lw(leaves.size());
    double shift = neg_infinity();
    for (size_t i = 0; i < leaves.size(); ++i) {
        lw[i] = -n * P - d * cum[i];
        if (std::isfinite(lw[i])) shift = std::max(shift, lw[i]);
    }
    if (!std::isfinite(shift))
        throw NumericError("every preimage branch degenerated; no measure to normalize");

    double raw_sum = 0.0;
    std::vector<double> w(leaves.size(), 0.0);
    for (size_t i = 0; i < leaves.size(); ++i) {
        if (!std::isfinite(lw[i])) {
            est.degraded = true;  // branch through a critical value: atom cut
            continue;
        }
        w[i] = std::exp(lw[i] - shift);
        raw_sum += w[i];
    }
    est.Z = std::exp(shift) * raw_sum;

    for (size_t i = 0; i < leaves.size(); ++i) {
        if (w[i] <= 0.0) continue;
        est.atoms.push_back({leaves[i].point, w[i] / raw_sum});
    }

    double total = 0.0;
    for (const ConformalAtom& a : est.atoms) total += a.weight;
    if (!(std::fabs(total - 1.0) <= 1e-10))
        throw NumericError("atom weights failed to normalize");
    return est;
}

// ---------------------------------------------------------------------------
// Jacobian test

JacobianReport jacobian_residual_detail(const ConformalEstimate& estimate,
                                        const RationalMap& map,
                                        const std::vector<Disk>& test_sets) {
    JacobianReport rep;
    rep.per_set.assign(test_sets.size(), std::numeric_limits<double>::quiet_NaN());
    if (test_sets.empty()) return rep;

    ConformalEstimate fine =
        estimate_conformal(map, estimate.d, estimate.base, estimate.depth + 1, estimate.P);

    // image of each fine atom resolved to a coarse atom index
    std::vector<int> image(fine.atoms.size(), -1);
    for (size_t i = 0; i < fine.atoms.size(); ++i) {
        SpherePoint y = map.evaluate(SpherePoint(fine.atoms[i].point));
        if (!y.finite()) continue;
        double best = std::numeric_limits<double>::infinity();
        for (size_t j = 0; j < estimate.atoms.size(); ++j) {
            double dist = std::abs(y.z - estimate.atoms[j].point);
            if (dist < best) {
                best = dist;
                image[i] = static_cast<int>(j);
            }
        }
        if (best > 1e-6 * (1.0 + std::abs(y.z))) image[i] = -1;
    }

    std::vector<Complex> crit;
    for (const SpherePoint& c : map.critical_points())
        if (c.finite()) crit.push_back(c.z);

    for (size_t s = 0; s < test_sets.size(); ++s) {
        const Disk& A = test_sets[s];
        bool skip = false;
        for (Complex c : crit) {
            if (std::abs(c - A.center) <= A.radius) {
                rep.warnings.push_back("test set " + std::to_string(s) +
                                       " contains a critical point; skipped");
                skip = true;
                break;
            }
        }
        if (skip) {
            ++rep.skipped;
            continue;
        }

        std::vector<int> members;
        for (size_t i = 0; i < fine.atoms.size(); ++i)
            if (std::abs(fine.atoms[i].point - A.center) <= A.radius)
                members.push_back(static_cast<int>(i));

        // injectivity on atoms: two distinct members must not share an image
        for (size_t a = 0; a < members.size() && !skip; ++a) {
            for (size_t b = a + 1; b < members.size(); ++b) {
                if (image[members[a]] >= 0 && image[members[a]] == image[members[b]] &&
                    std::abs(fine.atoms[members[a]].point - fine.atoms[members[b]].point) >
                        1e-6) {
                    rep.warnings.push_back("f is not injective on test set " +
                                           std::to_string(s) + "; skipped");
                    skip = true;
                    break;
                }
            }
        }
        if (skip) {
            ++rep.skipped;
            continue;
        }

        double lhs = 0.0, rhs = 0.0, nu_a = 0.0;
        std::vector<char> hit(estimate.atoms.size(), 0);
        bool unresolved = false;
        for (int i : members) {
            if (image[i] < 0) {
                unresolved = true;
                break;
            }
            if (!hit[image[i]]) {
                hit[image[i]] = 1;
                lhs += estimate.atoms[image[i]].weight;
            }
            double jac = std::exp(estimate.P + estimate.d * map.log_deriv_modulus(
                                                    SpherePoint(fine.atoms[i].point)));
            rhs += jac * fine.atoms[i].weight;
            nu_a += fine.atoms[i].weight;
        }
        if (unresolved) {
            rep.warnings.push_back("test set " + std::to_string(s) +
                                   " holds an atom with no resolvable image; skipped");
            ++rep.skipped;
            continue;
        }

        double rel = nu_a > 0.0 ? std::fabs(lhs - rhs) / nu_a : 0.0;
        rep.per_set[s] = rel;
        rep.residual = std::max(rep.residual, rel);
        ++rep.evaluated;
    }
    return rep;
}

double jacobian_residual(const ConformalEstimate& estimate, const RationalMap& map,
                         const std::vector<Disk>& test_sets) {
    return jacobian_residual_detail(estimate, map, test_sets).residual;
}

// ---------------------------------------------------------------------------
// Pointwise dimension bound

DimBoundReport pointwise_dim_report(const RationalMap& map, double d, double q, double P,
                                    Complex x, double delta, const std::vector<int>& n_list,
                                    int atom_depth, int bits) {
    if (!(q > 0.0)) throw ConfigError("the sampled exponent q must be positive");
    if (!(delta > 0.0)) throw ConfigError("ball radius delta must be positive");
    if (bits < 64) throw ConfigError("pullback precision must be at least 64 bits");
    guard_negative_d(map, d);

    DimBoundReport rep;
    rep.bound = P / q + d;

    int n_max = 0;
    for (int n : n_list) {
        if (n < 1) throw ConfigError("pullback depths must be >= 1");
        n_max = std::max(n_max, n);
    }

    // forward orbit of x with running log|(f^k)'|
    std::vector<Complex> orbit{x};
    std::vector<double> logdf{0.0};
    {
        SpherePoint w(x);
        for (int j = 0; j < n_max; ++j) {
            if (!w.finite()) break;
            double step = map.log_deriv_modulus(w);
            w = map.evaluate(w);
            if (!w.finite()) break;
            logdf.push_back(logdf.back() + step);
            orbit.push_back(w.z);
        }
    }

    ConformalEstimate est = estimate_conformal(map, d, x, atom_depth, P);

    for (int n : n_list) {
        rep.n.push_back(n);
        if (n >= static_cast<int>(orbit.size())) {
            rep.log_measure.push_back(std::numeric_limits<double>::quiet_NaN());
            rep.log_diam.push_back(std::numeric_limits<double>::quiet_NaN());
            rep.ratio.push_back(std::numeric_limits<double>::quiet_NaN());
            rep.ball_mass.push_back(0.0);
            rep.flagged.push_back(true);
            continue;
        }
        double mass = est.mass_in({orbit[n], delta});
        rep.ball_mass.push_back(mass);
        double log_measure = -n * P - d * logdf[n] + std::log(mass);
        rep.log_measure.push_back(log_measure);

        // pull boundary samples of B(f^n(x), delta) back along the orbit branch
        bool failed = false;
        std::vector<BigComplex> pulled;
        try {
            std::vector<Complex> samples{orbit[n]};
            for (int t = 0; t < 16; ++t) {
                double phi = 2.0 * M_PI * t / 16;
                samples.push_back(orbit[n] + delta * Complex(std::cos(phi), std::sin(phi)));
            }
            for (Complex s0 : samples) {
                BigComplex z(s0, bits);
                for (int j = n - 1; j >= 0; --j) {
                    std::vector<BigComplex> pre = preimage_step_big(map, z);
                    if (pre.empty()) throw NumericError("pullback lost every preimage");
                    size_t pick = 0;
                    double best = std::numeric_limits<double>::infinity();
                    for (size_t i = 0; i < pre.size(); ++i) {
                        double dist = std::abs(pre[i].to_std() - orbit[j]);
                        if (dist < best) {
                            best = dist;
                            pick = i;
                        }
                    }
                    z = pre[pick];
                }
                pulled.push_back(z);
            }
        } catch (const NumericError&) {
            failed = true;
        }

        double diam = 0.0;
        if (!failed) {
            for (size_t i = 0; i < pulled.size(); ++i)
                for (size_t j = i + 1; j < pulled.size(); ++j)
                    diam = std::max(diam, big_distance(pulled[i], pulled[j]));
        }
        if (failed || !(diam > 0.0)) {
            rep.log_diam.push_back(std::numeric_limits<double>::quiet_NaN());
            rep.ratio.push_back(std::numeric_limits<double>::quiet_NaN());
            rep.flagged.push_back(true);
            continue;
        }
        double log_diam = std::log(diam);
        rep.log_diam.push_back(log_diam);
        rep.ratio.push_back(log_measure / log_diam);
        rep.flagged.push_back(false);
    }

    rep.ok = true;
    for (size_t i = 0; i < rep.ratio.size(); ++i)
        if (rep.flagged[i] || !std::isfinite(rep.ratio[i])) rep.ok = false;
    return rep;
}

double pointwise_dim_bound(const RationalMap& map, double d, double q, double P, Complex x,
                           double delta, const std::vector<int>& n_list) {
    return pointwise_dim_report(map, d, q, P, x, delta, n_list).bound;
}

}  // namespace lyap
