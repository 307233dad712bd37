#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "lyapspec/gds.hpp"
#include "lyapspec/io.hpp"
#include "lyapspec/rational_map.hpp"
#include "lyapspec/schedule.hpp"

using namespace lyap;

namespace {

// Oracle: expand a run-length trace into an explicit vector and take plain
// prefix sums.  Usable only for small totals, which is the point.
std::vector<double> expand_runs(const RunTrace& trace) {
    std::vector<double> steps;
    for (const TraceRun& run : trace.runs)
        for (BigCount r = 0; r < run.repeats; ++r)
            for (double v : run.values) steps.push_back(v);
    return steps;
}

RationalMap quad(double c) {
    return RationalMap(Poly{c, 0.0, 1.0}, Poly{1.0});
}

GdsSystem loop_at(const RationalMap& map, Complex center, double radius) {
    return gds_on_disks(map, {{center, radius, center}});
}

WSchedule two_loop_schedule(const RationalMap& map, int depth) {
    std::vector<GdsSystem> systems{loop_at(map, Complex(3.0, 0.0), 0.3),
                                   loop_at(map, Complex(-2.0, 0.0), 0.35)};
    return build_schedule(map, systems, {}, 0.1, depth, 10.0, 6);
}

}  // namespace

TEST_CASE("run trace birkhoff sums match the expanded oracle") {
    Rng rng(17u);
    for (int trial = 0; trial < 60; ++trial) {
        RunTrace trace;
        int runs = rng.uniform_int(1, 6);
        for (int r = 0; r < runs; ++r) {
            int len = rng.uniform_int(1, 5);
            std::vector<double> vals;
            for (int i = 0; i < len; ++i) vals.push_back(rng.uniform(-1.0, 2.0));
            trace.push(static_cast<BigCount>(rng.uniform_int(1, 7)), vals);
        }
        trace.finalize();

        std::vector<double> flat = expand_runs(trace);
        REQUIRE(trace.total == static_cast<BigCount>(flat.size()));
        double acc = 0.0;
        for (size_t n = 1; n <= flat.size(); ++n) {
            acc += flat[n - 1];
            CHECK(trace.birkhoff(static_cast<BigCount>(n)) == doctest::Approx(acc).epsilon(1e-12));
            CHECK(trace.ell(static_cast<BigCount>(n)) ==
                  doctest::Approx(acc / static_cast<double>(n)).epsilon(1e-12));
        }
        CHECK(trace.birkhoff(0) == 0.0);
        CHECK(trace.ell(0) == 0.0);
        // queries beyond the end clamp to the total
        CHECK(trace.birkhoff(trace.total + 10) == doctest::Approx(acc));
        std::vector<double> head = trace.prefix_values(flat.size() + 5);
        REQUIRE(head.size() == flat.size());
        for (size_t i = 0; i < flat.size(); ++i) CHECK(head[i] == flat[i]);
    }
}

TEST_CASE("push skips empty and zero-repeat runs") {
    RunTrace trace;
    trace.push(0, {1.0});
    trace.push(3, {});
    trace.push(2, {0.5, 0.25});
    trace.finalize();
    CHECK(trace.runs.size() == 1);
    CHECK(trace.total == 4);
    CHECK(trace.birkhoff(4) == doctest::Approx(1.5));
}

TEST_CASE("count conversions") {
    CHECK(count_to_string(BigCount(0)) == "0");
    CHECK(count_to_string(BigCount(907)) == "907");
    BigCount big = 1;
    for (int i = 0; i < 25; ++i) big *= 10;  // 10^25 overflows 64 bits
    CHECK(count_to_string(big) == "10000000000000000000000000");
    CHECK(count_to_double(big) == doctest::Approx(1e25));
}

TEST_CASE("two loop schedule satisfies its own growth arithmetic") {
    RationalMap f = quad(-6.0);
    WSchedule sch = two_loop_schedule(f, 4);
    REQUIRE(sch.blocks.size() == 4);
    REQUIRE(sch.stats.size() == 2);

    CHECK(sch.stats[0].chi == doctest::Approx(std::log(6.0)).epsilon(1e-9));
    CHECK(sch.stats[1].chi == doctest::Approx(std::log(4.0)).epsilon(1e-9));
    CHECK(sch.stats[0].dim == doctest::Approx(0.0));  // single loops carry no entropy
    CHECK(sch.stats[1].dim == doctest::Approx(0.0));
    CHECK(sch.W >= 1.0);

    BigCount m_prev = 0;
    double chi_prev = 0.0;
    for (size_t i = 0; i < sch.blocks.size(); ++i) {
        const ScheduleBlock& blk = sch.blocks[i];
        CHECK(blk.subsystem == static_cast<int>(i % 2));  // alternating
        CHECK(blk.eps == doctest::Approx(0.1 / std::pow(2.0, i + 1)));
        CHECK(blk.chi_target ==
              doctest::Approx(sch.stats[blk.subsystem].chi).epsilon(1e-12));

        const SubsystemScheduleStats& st = sch.stats[blk.subsystem];
        // recompute the predicate from scratch
        double history = count_to_double(m_prev) * (std::abs(chi_prev) + 1.0);
        double rhs = sch.C * (history + blk.b * std::abs(std::log(blk.w)) + std::log(blk.khat));
        double lhs = st.a * count_to_double(blk.n) * blk.eps;
        CHECK(blk.predicate.pass);
        CHECK(blk.predicate.lhs == doctest::Approx(lhs).epsilon(1e-9));
        CHECK(blk.predicate.rhs == doctest::Approx(rhs).epsilon(1e-6));
        CHECK(lhs >= rhs);

        // bookkeeping: the checkpoint accumulates a*n + b steps
        CHECK(blk.m == m_prev + static_cast<BigCount>(st.a) * blk.n +
                           static_cast<BigCount>(blk.b));
        // bridge data is coherent
        CHECK(blk.bridge_points.size() == static_cast<size_t>(blk.b));
        CHECK(blk.bridge_values.size() == static_cast<size_t>(blk.b));
        for (double v : blk.bridge_values) CHECK(std::exp(v) >= blk.w - 1e-9);

        m_prev = blk.m;
        chi_prev = blk.chi_target;
    }
}

TEST_CASE("schedule construction is deterministic") {
    RationalMap f = quad(-6.0);
    WSchedule a = two_loop_schedule(f, 3);
    WSchedule b = two_loop_schedule(f, 3);
    CHECK(a.to_json_text() == b.to_json_text());
}

TEST_CASE("schedule json is machine readable") {
    RationalMap f = quad(-6.0);
    WSchedule sch = two_loop_schedule(f, 3);
    nlohmann::json j = nlohmann::json::parse(sch.to_json_text());
    REQUIRE(j.contains("blocks"));
    REQUIRE(j["blocks"].is_array());
    CHECK(j["blocks"].size() == 3);
    // 128-bit counters travel as decimal strings
    CHECK(j["blocks"][0]["n"].is_string());
    CHECK(j["C"].get<double>() == 10.0);
}

TEST_CASE("synthesized trace oscillates between the loop exponents") {
    RationalMap f = quad(-6.0);
    WSchedule sch = two_loop_schedule(f, 4);
    RunTrace trace = synthesize_trace(sch, f);
    CHECK(trace.total == sch.blocks.back().m);

    // every logged step comes from the disks or the connecting paths, so the
    // values live in a narrow band around log 4 .. log 6
    for (double v : trace.prefix_values(4096)) {
        CHECK(v > 1.0);
        CHECK(v < 2.0);
    }

    OscillationReport rep = verify_oscillation(trace, sch);
    CHECK(rep.all_pass);
    CHECK(rep.failed == 0);
    REQUIRE(rep.checkpoints.size() == 4);
    for (const CheckpointRecord& cp : rep.checkpoints) {
        CHECK(cp.pass);
        CHECK(cp.residual < 2.0 * cp.eps);
        CHECK(cp.ell == doctest::Approx(trace.ell(cp.m)));
    }
    for (const InterpolationRecord& ir : rep.interpolation) CHECK(ir.pass);

    // tail blocks are 3 (chi = log 6) and 4 (chi = log 4)
    CHECK(rep.liminf_estimate == doctest::Approx(std::log(4.0)).epsilon(0.03));
    CHECK(rep.limsup_estimate == doctest::Approx(std::log(6.0)).epsilon(0.03));
    CHECK(rep.certificate_liminf == 0.0);
    CHECK(rep.certificate_limsup == 0.0);
}

TEST_CASE("single subsystem schedules converge instead of oscillating") {
    RationalMap f = quad(-6.0);
    WSchedule sch = build_schedule(f, {loop_at(f, Complex(3.0, 0.0), 0.3)}, {}, 0.1, 3, 10.0, 6);
    REQUIRE(sch.blocks.size() == 3);
    for (const ScheduleBlock& blk : sch.blocks) {
        CHECK(blk.subsystem == 0);
        CHECK(blk.b == 0);  // no bridges needed
    }
    RunTrace trace = synthesize_trace(sch, f);
    // the distinguished point is the fixed point itself: constant steps
    for (double v : trace.prefix_values(512))
        CHECK(v == doctest::Approx(std::log(6.0)).epsilon(1e-9));
    OscillationReport rep = verify_oscillation(trace, sch);
    CHECK(rep.all_pass);
    CHECK(rep.liminf_estimate == doctest::Approx(std::log(6.0)).epsilon(1e-6));
    CHECK(rep.limsup_estimate == doctest::Approx(std::log(6.0)).epsilon(1e-6));
}

TEST_CASE("negative control with clamped blocks fails verification") {
    RationalMap f = quad(-6.0);
    WSchedule sch = two_loop_schedule(f, 4);
    WSchedule cut = sch.truncated_copy();
    CHECK(cut.truncated);
    REQUIRE(cut.blocks.size() == sch.blocks.size());
    // all block lengths collapse to (roughly) the first one
    for (const ScheduleBlock& blk : cut.blocks)
        CHECK(count_to_double(blk.n) <=
              count_to_double(cut.blocks[0].n) + static_cast<double>(cut.blocks.size()));

    bool some_predicate_fails = false;
    for (const ScheduleBlock& blk : cut.blocks)
        some_predicate_fails = some_predicate_fails || !blk.predicate.pass;
    CHECK(some_predicate_fails);

    RunTrace trace = synthesize_trace(cut, f);
    OscillationReport rep = verify_oscillation(trace, cut);
    CHECK(!rep.all_pass);
    CHECK(rep.failed >= 1);
}

TEST_CASE("supplied bridges are used instead of searching") {
    RationalMap f = quad(-6.0);
    GdsSystem s1 = loop_at(f, Complex(3.0, 0.0), 0.3);
    GdsSystem s2 = loop_at(f, Complex(-2.0, 0.0), 0.35);
    BridgeSpec b1, b2;
    bridge(s1, s2, f, 6, &b1);
    bridge(s2, s1, f, 6, &b2);
    WSchedule sch = build_schedule(f, {s1, s2}, {b1, b2}, 0.1, 3, 10.0, 6);
    WSchedule searched = build_schedule(f, {s1, s2}, {}, 0.1, 3, 10.0, 6);
    CHECK(sch.to_json_text() == searched.to_json_text());
}

TEST_CASE("schedule guards reject bad input") {
    RationalMap f = quad(-6.0);
    std::vector<GdsSystem> systems{loop_at(f, Complex(3.0, 0.0), 0.3)};
    CHECK_THROWS_AS(build_schedule(f, {}, {}, 0.1, 3), ConfigError);
    CHECK_THROWS_AS(build_schedule(f, systems, {}, -0.5, 3), ConfigError);
    CHECK_THROWS_AS(build_schedule(f, systems, {}, 0.1, -1), ConfigError);
    // a wrong number of supplied bridges is inconsistent
    BridgeSpec lone;
    CHECK_THROWS_AS(build_schedule(f, systems, {lone, lone, lone}, 0.1, 3), ConfigError);
}

TEST_CASE("oscillation report json carries the convention note") {
    RationalMap f = quad(-6.0);
    WSchedule sch = two_loop_schedule(f, 3);
    RunTrace trace = synthesize_trace(sch, f);
    OscillationReport rep = verify_oscillation(trace, sch);
    nlohmann::json j = nlohmann::json::parse(rep.to_json_text(sch));
    CHECK(j.contains("convention"));
    CHECK(j.contains("checkpoints"));
    CHECK(j["checkpoints"].size() == 3);
    CHECK(j.contains("certificate_meaning"));
}
