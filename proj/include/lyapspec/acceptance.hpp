#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace lyap {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    double seconds = 0.0;
    std::vector<std::string> details;  // one "ok/FAIL <metric>" line per check
};

// Full verification battery: closed-form suites, oracle comparisons, and
// property checks over every module, with CSV/JSON/SVG artifacts written
// under out_dir (created if needed).  Deterministic for a fixed seed; the
// CLI selftest command runs exactly this.
std::vector<CriterionResult> run_acceptance(const std::string& out_dir,
                                            uint64_t seed = 20240901ULL);

bool all_pass(const std::vector<CriterionResult>& results);

// One PASS/FAIL line per criterion with indented detail lines, then a verdict.
std::string acceptance_summary(const std::vector<CriterionResult>& results);

}  // namespace lyap
