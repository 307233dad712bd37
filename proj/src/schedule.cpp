#include "lyapspec/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "lyapspec/io.hpp"

namespace lyap {

double count_to_double(BigCount n) { return static_cast<double>(n); }

std::string count_to_string(BigCount n) {
    if (n == 0) return "0";
    std::string digits;
    while (n > 0) {
        digits.push_back(static_cast<char>('0' + static_cast<int>(n % 10)));
        n /= 10;
    }
    std::reverse(digits.begin(), digits.end());
    return digits;
}

// ---------------------------------------------------------------------------
// RunTrace

void RunTrace::push(BigCount repeats, std::vector<double> values) {
    if (repeats == 0 || values.empty()) return;
    runs.push_back({repeats, std::move(values)});
}

void RunTrace::finalize() {
    steps_before_.clear();
    sum_before_.clear();
    prefix_.clear();
    pattern_sum_.clear();
    total = 0;
    double sum = 0.0;
    for (const TraceRun& run : runs) {
        steps_before_.push_back(total);
        sum_before_.push_back(sum);
        std::vector<double> pre{0.0};
        for (double v : run.values) pre.push_back(pre.back() + v);
        double per = pre.back();
        prefix_.push_back(std::move(pre));
        pattern_sum_.push_back(per);
        total += run.repeats * static_cast<BigCount>(run.values.size());
        sum += count_to_double(run.repeats) * per;
    }
}

double RunTrace::birkhoff(BigCount n) const {
    if (runs.empty() || n == 0) return 0.0;
    if (n > total) n = total;
    // last run starting at or before n-1
    size_t lo = 0, hi = runs.size() - 1;
    while (lo < hi) {
        size_t mid = (lo + hi + 1) / 2;
        if (steps_before_[mid] < n) lo = mid;
        else hi = mid - 1;
    }
    BigCount offset = n - steps_before_[lo];
    BigCount len = static_cast<BigCount>(runs[lo].values.size());
    BigCount reps = offset / len;
    size_t rem = static_cast<size_t>(offset % len);
    return sum_before_[lo] + count_to_double(reps) * pattern_sum_[lo] + prefix_[lo][rem];
}

double RunTrace::ell(BigCount n) const {
    if (n == 0) return 0.0;
    return birkhoff(n) / count_to_double(n);
}

std::vector<double> RunTrace::prefix_values(size_t limit) const {
    std::vector<double> out;
    for (const TraceRun& run : runs) {
        for (BigCount r = 0; r < run.repeats && out.size() < limit; ++r)
            for (double v : run.values) {
                if (out.size() >= limit) break;
                out.push_back(v);
            }
        if (out.size() >= limit) break;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Schedule construction

namespace {

const GdsEdge* find_edge(const GdsSystem& sys, int from, int to) {
    for (const GdsEdge& e : sys.edges)
        if (e.from == from && e.to == to) return &e;
    return nullptr;
}

SubsystemScheduleStats make_stats(const GdsSystem& sys, const RationalMap& map) {
    SubsystemScheduleStats st;
    st.a = sys.iterate;
    st.cycle = anchor_cycle(sys);
    st.anchor = cycle_fixed_point(sys, map, st.cycle);

    SpherePoint w(st.anchor);
    size_t steps = st.cycle.size() * static_cast<size_t>(sys.iterate);
    for (size_t t = 0; t < steps; ++t) {
        if (!w.finite()) throw NumericError("anchor cycle left the finite chart");
        st.cycle_values.push_back(map.log_deriv_modulus(w));
        w = map.evaluate(w);
    }
    double sum = 0.0;
    for (double v : st.cycle_values) sum += v;
    st.chi = sum / static_cast<double>(steps);

    std::shared_ptr<PressureEvaluator> eval = gds_evaluator(sys);
    double p0 = eval->pressure(0.0);
    if (std::fabs(p0) <= 1e-12) {
        st.dim = 0.0;
    } else {
        double hi = 1.0;
        while (eval->pressure(hi) > 0.0 && hi < 16.0) hi *= 2.0;
        st.dim = bowen_root(*eval, 0.0, hi);
    }
    double h = 1e-5;
    st.chi_eq = -(eval->pressure(st.dim + h) - eval->pressure(st.dim - h)) / (2.0 * h);
    st.h = st.dim * st.chi_eq;
    return st;
}

int landing_phase(const GdsSystem& sys, const SubsystemScheduleStats& st, Complex y) {
    int vertex = -1;
    for (size_t v = 0; v < sys.vertices.size(); ++v) {
        if (std::abs(y - sys.vertices[v].center) <= sys.vertices[v].radius) {
            vertex = static_cast<int>(v);
            break;
        }
    }
    if (vertex < 0) throw NumericError("bridge departure point lies outside the subsystem");
    for (size_t p = 0; p < st.cycle.size(); ++p)
        if (st.cycle[p] == vertex) return static_cast<int>(p);
    throw NumericError("bridge departs from a vertex off the anchor cycle; unsupported");
}

}  // namespace

WSchedule build_schedule(const RationalMap& map, const std::vector<GdsSystem>& subsystems,
                         std::vector<BridgeSpec> bridges, double eps_seed, int depth, double C,
                         int bridge_search_depth) {
    if (subsystems.empty()) throw ConfigError("schedule needs at least one subsystem");
    if (depth < 0) throw ConfigError("schedule depth must be >= 0");
    if (!(eps_seed > 0.0) || !(eps_seed <= 1.0))
        throw ConfigError("eps seed must lie in (0, 1]");
    if (!(C > 0.0)) throw ConfigError("growth constant C must be positive");

    WSchedule sch;
    sch.subsystems = subsystems;
    sch.C = C;
    sch.eps_seed = eps_seed;
    const int S = static_cast<int>(subsystems.size());

    for (int k = 0; k < S; ++k) {
        if (!validate_gds(subsystems[k], map).pass())
            throw ConfigError("subsystem " + std::to_string(k) + " fails validation");
        sch.stats.push_back(make_stats(subsystems[k], map));
    }

    // one bridge per ordered cyclic pair k -> k+1; path2 of
    // bridge(sys_k, sys_{k+1}) is the backward orbit from the target anchor
    // landing inside sys_k, i.e. the forward transition k -> k+1
    std::vector<BridgeSpec> pair_spec(S);
    if (!bridges.empty() && static_cast<int>(bridges.size()) != S)
        throw ConfigError("need one bridge per cyclic subsystem pair");
    if (S == 1 && bridges.empty()) {
        pair_spec[0].p1 = pair_spec[0].p2 = sch.stats[0].anchor;
        pair_spec[0].path1 = pair_spec[0].path2 = {sch.stats[0].anchor};
    } else if (!bridges.empty()) {
        pair_spec = std::move(bridges);
    } else {
        for (int k = 0; k < S; ++k) {
            try {
                BridgeSpec spec;
                bridge(subsystems[k], subsystems[(k + 1) % S], map, bridge_search_depth, &spec);
                pair_spec[k] = spec;
            } catch (const SearchError& e) {
                throw SearchError("no bridge for subsystem pair (" + std::to_string(k) + ", " +
                                  std::to_string((k + 1) % S) + "): " + e.what());
            }
        }
    }

    struct PairData {
        std::vector<Complex> points;  // forward order
        std::vector<double> values;
        double w = 1.0;
        double khat = 1.0;
        int phase = 0;  // cycle phase of the departure vertex
    };
    std::vector<PairData> pairs(S);
    sch.W = 1.0;
    for (int k = 0; k < S; ++k) {
        const std::vector<Complex>& path = pair_spec[k].path2;
        if (path.empty()) throw ConfigError("bridge path for pair " + std::to_string(k) +
                                            " is empty");
        PairData& pd = pairs[k];
        for (size_t j = path.size(); j-- > 1;) {
            pd.points.push_back(path[j]);
            pd.values.push_back(map.log_deriv_modulus(SpherePoint(path[j])));
        }
        double lo = 0.0;
        for (size_t j = 0; j < pd.values.size(); ++j)
            lo = j == 0 ? pd.values[j] : std::min(lo, pd.values[j]);
        pd.w = pd.values.empty() ? 1.0 : std::exp(lo);
        for (double v : pd.values) sch.W = std::max(sch.W, std::exp(v));
        double distortion = 1.0;
        for (const GdsEdge& e : subsystems[k].edges) distortion = std::max(distortion, e.distortion);
        for (const GdsEdge& e : subsystems[(k + 1) % S].edges)
            distortion = std::max(distortion, e.distortion);
        pd.khat = distortion;
        pd.phase = pd.points.empty()
                       ? 0
                       : landing_phase(subsystems[k], sch.stats[k], pd.points.front());
    }

    BigCount m_prev = 0;
    double chi_prev = 0.0;
    for (int i = 1; i <= depth; ++i) {
        int s = (i - 1) % S;
        const PairData& pd = pairs[s];
        ScheduleBlock blk;
        blk.subsystem = s;
        blk.eps = eps_seed / std::pow(2.0, i);
        blk.b = static_cast<int>(pd.points.size());
        blk.bridge_points = pd.points;
        blk.bridge_values = pd.values;
        blk.w = pd.w;
        blk.khat = pd.khat;
        blk.chi_target = sch.stats[s].chi;

        GrowthPredicate& pred = blk.predicate;
        pred.i = i;
        pred.history_term = count_to_double(m_prev) * (std::fabs(chi_prev) + 1.0);
        pred.bridge_term = blk.b * std::fabs(std::log(blk.w));
        pred.distortion_term = std::log(blk.khat);
        pred.rhs = C * (pred.history_term + pred.bridge_term + pred.distortion_term);

        double a = static_cast<double>(sch.stats[s].a);
        double n_needed = pred.rhs / (a * blk.eps);
        if (!(n_needed < 1e30))
            throw ConfigError("block " + std::to_string(i) +
                              " length overflows the planner; lower the depth");
        BigCount n = static_cast<BigCount>(std::ceil(n_needed * (1.0 + 1e-12))) + 1;
        // align the block end with the bridge departure phase on the cycle
        BigCount L = static_cast<BigCount>(sch.stats[s].cycle.size());
        BigCount want = static_cast<BigCount>(pd.phase);
        n += (want + L - n % L) % L;
        blk.n = n;

        pred.lhs = a * count_to_double(n) * blk.eps;
        pred.pass = pred.lhs >= pred.rhs;

        m_prev = m_prev + static_cast<BigCount>(sch.stats[s].a) * n +
                 static_cast<BigCount>(blk.b);
        blk.m = m_prev;
        chi_prev = blk.chi_target;
        sch.blocks.push_back(blk);
    }
    return sch;
}

WSchedule WSchedule::truncated_copy() const {
    WSchedule cut = *this;
    cut.truncated = true;
    if (cut.blocks.empty()) return cut;
    BigCount n1 = cut.blocks.front().n;
    BigCount m = 0;
    double chi_prev = 0.0;
    for (size_t idx = 0; idx < cut.blocks.size(); ++idx) {
        ScheduleBlock& blk = cut.blocks[idx];
        const SubsystemScheduleStats& st = stats[blk.subsystem];
        BigCount L = static_cast<BigCount>(st.cycle.size());
        BigCount want = blk.n % L;  // keep the original departure phase
        BigCount n = n1 + (want + L - n1 % L) % L;
        blk.n = n;

        GrowthPredicate& pred = blk.predicate;
        pred.history_term = count_to_double(m) * (std::fabs(chi_prev) + 1.0);
        pred.bridge_term = blk.b * std::fabs(std::log(blk.w));
        pred.distortion_term = std::log(blk.khat);
        pred.rhs = C * (pred.history_term + pred.bridge_term + pred.distortion_term);
        pred.lhs = static_cast<double>(st.a) * count_to_double(n) * blk.eps;
        pred.pass = pred.lhs >= pred.rhs;

        m = m + static_cast<BigCount>(st.a) * n + static_cast<BigCount>(blk.b);
        blk.m = m;
        chi_prev = blk.chi_target;
    }
    return cut;
}

// ---------------------------------------------------------------------------
// Trace synthesis

RunTrace synthesize_trace(const WSchedule& schedule, const RationalMap& map) {
    RunTrace trace;
    if (schedule.blocks.empty()) {
        trace.finalize();
        return trace;
    }

    bool start_set = false;
    for (const ScheduleBlock& blk : schedule.blocks) {
        const GdsSystem& sys = schedule.subsystems[blk.subsystem];
        const SubsystemScheduleStats& st = schedule.stats[blk.subsystem];
        const BigCount L = static_cast<BigCount>(st.cycle.size());
        const int a = st.a;

        // backward-iterated junction: the last K cycle words before the bridge
        BigCount K = blk.n < 48 ? blk.n : static_cast<BigCount>(48);
        Complex q = blk.bridge_points.empty() ? st.anchor : blk.bridge_points.front();
        std::vector<Complex> exit_points;  // positions n-1 down to n-K
        for (BigCount k = 1; k <= K; ++k) {
            BigCount pos = blk.n - k;
            int phase = static_cast<int>(pos % L);
            int from = st.cycle[phase];
            int to = st.cycle[(phase + 1) % st.cycle.size()];
            const GdsEdge* e = find_edge(sys, from, to);
            if (!e) throw NumericError("anchor cycle lost an edge");
            q = apply_branch(sys, map, *e, q);
            exit_points.push_back(q);
        }

        BigCount interior = blk.n - K;
        if (!start_set) {
            trace.start = interior > 0 ? st.anchor
                          : !exit_points.empty()
                              ? exit_points.back()
                              : (blk.bridge_points.empty() ? st.anchor
                                                           : blk.bridge_points.front());
            start_set = true;
        }

        if (interior > 0) {
            BigCount full = interior / L;
            BigCount part = interior % L;
            trace.push(full, st.cycle_values);
            if (part > 0) {
                std::vector<double> head(st.cycle_values.begin(),
                                         st.cycle_values.begin() +
                                             static_cast<size_t>(part) * a);
                trace.push(1, std::move(head));
            }
        }

        // exit values in forward order (positions n-K .. n-1, a steps each)
        std::vector<double> exit_values;
        for (auto it = exit_points.rbegin(); it != exit_points.rend(); ++it) {
            SpherePoint w(*it);
            for (int j = 0; j < a; ++j) {
                if (!w.finite()) throw NumericError("junction orbit left the finite chart");
                exit_values.push_back(map.log_deriv_modulus(w));
                w = map.evaluate(w);
            }
        }
        trace.push(1, std::move(exit_values));

        if (!blk.bridge_values.empty()) trace.push(1, blk.bridge_values);
    }
    trace.finalize();
    return trace;
}

// ---------------------------------------------------------------------------
// Oscillation verification

OscillationReport verify_oscillation(const RunTrace& trace, const WSchedule& schedule) {
    OscillationReport rep;
    const size_t depth = schedule.blocks.size();
    if (depth == 0) return rep;

    for (size_t idx = 0; idx < depth; ++idx) {
        const ScheduleBlock& blk = schedule.blocks[idx];
        CheckpointRecord cp;
        cp.i = static_cast<int>(idx + 1);
        cp.m = blk.m;
        cp.ell = trace.ell(blk.m);
        cp.target = blk.chi_target;
        cp.eps = blk.eps;
        cp.residual = std::fabs(cp.ell - cp.target);
        cp.pass = cp.residual < 2.0 * cp.eps;
        if (!cp.pass) ++rep.failed;
        rep.checkpoints.push_back(cp);
    }

    for (size_t idx = 0; idx + 1 < depth; ++idx) {
        const CheckpointRecord& lo = rep.checkpoints[idx];
        const ScheduleBlock& next = schedule.blocks[idx + 1];
        InterpolationRecord ir;
        ir.i = lo.i;
        ir.tolerance = 2.0 * (lo.eps + next.eps);
        double m_lo = count_to_double(lo.m);
        double m_hi = count_to_double(next.m);
        double ratio = m_hi / m_lo;
        const int kSamples = 48;
        for (int t = 1; t < kSamples; ++t) {
            double nd = m_lo * std::pow(ratio, static_cast<double>(t) / kSamples);
            BigCount n = static_cast<BigCount>(nd);
            if (n <= lo.m || n >= next.m) continue;
            double target = (count_to_double(lo.m) / count_to_double(n)) * lo.target +
                            (count_to_double(n - lo.m) / count_to_double(n)) * next.chi_target;
            double residual = std::fabs(trace.ell(n) - target);
            ir.max_residual = std::max(ir.max_residual, residual);
            ++ir.samples;
        }
        ir.pass = ir.max_residual < ir.tolerance;
        rep.interpolation.push_back(ir);
    }

    size_t tail_start = depth / 2;  // indices tail_start..depth-1
    rep.liminf_estimate = std::numeric_limits<double>::infinity();
    rep.limsup_estimate = -std::numeric_limits<double>::infinity();
    rep.certificate_liminf = std::numeric_limits<double>::infinity();
    rep.certificate_limsup = -std::numeric_limits<double>::infinity();
    for (size_t idx = tail_start; idx < depth; ++idx) {
        rep.liminf_estimate = std::min(rep.liminf_estimate, rep.checkpoints[idx].ell);
        rep.limsup_estimate = std::max(rep.limsup_estimate, rep.checkpoints[idx].ell);
        double dim = schedule.stats[schedule.blocks[idx].subsystem].dim;
        rep.certificate_liminf = std::min(rep.certificate_liminf, dim);
        rep.certificate_limsup = std::max(rep.certificate_limsup, dim);
    }

    rep.all_pass = rep.failed == 0;
    for (const InterpolationRecord& ir : rep.interpolation)
        if (!ir.pass) rep.all_pass = false;
    return rep;
}

// ---------------------------------------------------------------------------
// JSON export

namespace {

nlohmann::json json_finite(double x) {
    if (std::isfinite(x)) return x;
    return nullptr;
}

}  // namespace

std::string WSchedule::to_json_text() const {
    nlohmann::json j;
    j["C"] = C;
    j["eps_seed"] = eps_seed;
    j["W"] = W;
    j["truncated"] = truncated;
    j["subsystems"] = nlohmann::json::array();
    for (const SubsystemScheduleStats& st : stats) {
        j["subsystems"].push_back({{"chi", st.chi},
                                   {"chi_eq", st.chi_eq},
                                   {"h", st.h},
                                   {"dim", st.dim},
                                   {"a", st.a},
                                   {"anchor", {st.anchor.real(), st.anchor.imag()}},
                                   {"cycle", st.cycle}});
    }
    j["blocks"] = nlohmann::json::array();
    for (const ScheduleBlock& blk : blocks) {
        j["blocks"].push_back(
            {{"subsystem", blk.subsystem},
             {"n", count_to_string(blk.n)},
             {"b", blk.b},
             {"eps", blk.eps},
             {"m", count_to_string(blk.m)},
             {"chi", blk.chi_target},
             {"w", blk.w},
             {"khat", blk.khat},
             {"predicate",
              {{"lhs", blk.predicate.lhs},
               {"rhs", blk.predicate.rhs},
               {"history", blk.predicate.history_term},
               {"bridge", blk.predicate.bridge_term},
               {"distortion", blk.predicate.distortion_term},
               {"pass", blk.predicate.pass}}}});
    }
    return j.dump(2) + "\n";
}

std::string OscillationReport::to_json_text(const WSchedule& schedule) const {
    nlohmann::json j;
    j["convention"] =
        "growth quantified as a*n*eps >= C*(m_prev*(|chi_prev|+1) + b*|log w| + log khat), C=" +
        fmt_double(schedule.C);
    j["checkpoints"] = nlohmann::json::array();
    for (const CheckpointRecord& cp : checkpoints) {
        j["checkpoints"].push_back({{"i", cp.i},
                                    {"m", count_to_string(cp.m)},
                                    {"ell", json_finite(cp.ell)},
                                    {"target", cp.target},
                                    {"eps", cp.eps},
                                    {"residual", json_finite(cp.residual)},
                                    {"pass", cp.pass}});
    }
    j["interpolation"] = nlohmann::json::array();
    for (const InterpolationRecord& ir : interpolation) {
        j["interpolation"].push_back({{"after_checkpoint", ir.i},
                                      {"max_residual", json_finite(ir.max_residual)},
                                      {"tolerance", ir.tolerance},
                                      {"samples", ir.samples},
                                      {"pass", ir.pass}});
    }
    j["liminf_estimate"] = json_finite(liminf_estimate);
    j["limsup_estimate"] = json_finite(limsup_estimate);
    j["certificate"] = {json_finite(certificate_liminf), json_finite(certificate_limsup)};
    j["certificate_meaning"] =
        "liminf/limsup of the subsystem Bowen dimensions; theorem-side lower bounds, "
        "not measured dimensions";
    j["failed"] = failed;
    j["all_pass"] = all_pass;
    return j.dump(2) + "\n";
}

}  // namespace lyap
