#pragma once

#include <string>
#include <vector>

#include "lyapspec/gds.hpp"
#include "lyapspec/orbit.hpp"

namespace lyap {

// Block lengths explode doubly-exponentially (the growth predicates force
// n_i ~ m_{i-1}/eps_i), so step counts are 128-bit and traces are stored as
// repeated patterns instead of explicit steps.
using BigCount = unsigned __int128;

double count_to_double(BigCount n);
std::string count_to_string(BigCount n);

// ---------------------------------------------------------------------------
// Run-length orbit traces

struct TraceRun {
    BigCount repeats = 0;
    std::vector<double> values;  // log|f'| pattern cycled `repeats` times
};

// Birkhoff-sum queries over a pattern-compressed trace.  The encoded
// sequence is exactly the forward orbit of `start` rounded to doubles; runs
// merge seamlessly because backward iteration converges below double
// resolution within each block.
struct RunTrace {
    Complex start{0.0, 0.0};
    std::vector<TraceRun> runs;
    BigCount total = 0;

    void push(BigCount repeats, std::vector<double> values);
    void finalize();                  // builds the prefix index
    double birkhoff(BigCount n) const;  // sum of the first n steps
    double ell(BigCount n) const;       // birkhoff(n) / n

    // Explicit prefix for plotting/CSV; points are not reconstructed.
    std::vector<double> prefix_values(size_t limit) const;

  private:
    std::vector<BigCount> steps_before_;
    std::vector<double> sum_before_;
    std::vector<std::vector<double>> prefix_;  // per run: value prefix sums
    std::vector<double> pattern_sum_;
};

// ---------------------------------------------------------------------------
// Schedules

struct GrowthPredicate {
    int i = 0;
    double lhs = 0.0;       // a_i * n_i * eps_i
    double rhs = 0.0;       // C * (m_{i-1}(|chi_{i-1}|+1) + b_i|log w_i| + log khat_i)
    double history_term = 0.0;
    double bridge_term = 0.0;
    double distortion_term = 0.0;
    bool pass = false;
};

struct SubsystemScheduleStats {
    double chi = 0.0;    // per-step exponent of the anchor cycle (block target)
    double chi_eq = 0.0;  // equilibrium slope -P'(d0)
    double h = 0.0;       // entropy at the Bowen parameter: d0 * chi_eq
    double dim = 0.0;     // Bowen root d0 of the subsystem pressure
    int a = 1;
    Complex anchor{0.0, 0.0};
    std::vector<int> cycle;             // vertex cycle the blocks follow
    std::vector<double> cycle_values;   // log|f'| along the cycle orbit (length |cycle| * a)
};

struct ScheduleBlock {
    int subsystem = 0;    // index into stats/subsystems
    BigCount n = 0;       // f^a-steps in the block
    int b = 0;            // bridge steps appended after the block
    double eps = 0.0;
    BigCount m = 0;       // checkpoint: total steps through this block's bridge
    double chi_target = 0.0;
    GrowthPredicate predicate;
    std::vector<Complex> bridge_points;  // forward order, ending at the next anchor
    std::vector<double> bridge_values;   // log|f'| at bridge_points[0..b-1]
    double w = 1.0;     // min |f'| along the bridge
    double khat = 1.0;  // distortion constant entering the predicate
};

struct WSchedule {
    std::vector<GdsSystem> subsystems;
    std::vector<SubsystemScheduleStats> stats;
    std::vector<ScheduleBlock> blocks;
    double C = 10.0;
    double eps_seed = 0.1;
    double W = 1.0;           // max |f'| over all bridges
    bool truncated = false;   // negative-control variant (growth predicates off)

    // Negative control: every block length clamped to the first block's,
    // predicates re-evaluated (and expected to fail past the first blocks).
    WSchedule truncated_copy() const;

    std::string to_json_text() const;
};

// Builds `depth` blocks cycling through the subsystems, with eps_i =
// eps_seed / 2^i and the smallest n_i satisfying
//   a_i n_i eps_i >= C ( m_{i-1}(|chi_{i-1}|+1) + b_i |log w_i| + log khat_i ).
// Bridges may be supplied (one per ordered cyclic pair (k, k+1 mod S), as
// returned by gds bridge(sys_k, sys_{k+1})); missing ones are searched on
// demand.  The quantification of the proof-side "big enough" choices through
// the constant C is one admissible choice and is recorded in every report.
WSchedule build_schedule(const RationalMap& map, const std::vector<GdsSystem>& subsystems,
                         std::vector<BridgeSpec> bridges, double eps_seed, int depth,
                         double C = 10.0, int bridge_search_depth = 6);

// The forward orbit of the schedule's distinguished point (leftmost symbolic
// branch of the nested construction): exact anchor-cycle values in block
// interiors, backward-iterated junction values where blocks hand over to
// bridges.  depth 0 gives an empty trace.
RunTrace synthesize_trace(const WSchedule& schedule, const RationalMap& map);

// ---------------------------------------------------------------------------
// Verification

struct CheckpointRecord {
    int i = 0;
    BigCount m = 0;
    double ell = 0.0;
    double target = 0.0;
    double eps = 0.0;
    double residual = 0.0;
    bool pass = false;  // residual < 2 eps
};

struct InterpolationRecord {
    int i = 0;               // window (m_i, m_{i+1})
    double max_residual = 0.0;
    double tolerance = 0.0;  // 2 (eps_i + eps_{i+1})
    int samples = 0;
    bool pass = false;
};

struct OscillationReport {
    std::vector<CheckpointRecord> checkpoints;
    std::vector<InterpolationRecord> interpolation;
    double liminf_estimate = 0.0;   // min ell(m_i) over the tail checkpoints
    double limsup_estimate = 0.0;
    double certificate_liminf = 0.0;  // liminf/limsup of the subsystem dims d_i;
    double certificate_limsup = 0.0;  // theorem-side dimension lower bounds
    int failed = 0;
    bool all_pass = false;

    std::string to_json_text(const WSchedule& schedule) const;
};

// Checks |ell(m_i) - chi_i| < 2 eps_i at every checkpoint and the linear
// interpolation bound 2(eps_i + eps_{i+1}) between consecutive checkpoints
// (sampled geometrically; windows are far too long to sweep).
OscillationReport verify_oscillation(const RunTrace& trace, const WSchedule& schedule);

}  // namespace lyap
