// Severity-weighted correctness scoring for fault-localization reports, plus
// the trivial binary score of a judgment.

#pragma once

#include <cstdint>
#include <stdexcept>

#include "codejudge/model.hpp"

namespace codejudge {

// Penalty points per inconsistency severity, with a saturation cap.
// Defaults reproduce the published setting: 5 / 50 / 100 capped at 100.
// Negligible inconsistencies never carry weight.
struct SeverityWeights {
    std::int64_t small = 5;
    std::int64_t major = 50;
    std::int64_t fatal = 100;
    std::int64_t cap = 100;

    bool operator==(const SeverityWeights&) const = default;
};

class InvalidWeights : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Requires 0 < small <= major <= fatal and cap > 0; throws InvalidWeights.
void validate_weights(const SeverityWeights& weights);

// penalty = min(cap, small_count*small + major_count*major + fatal_count*fatal)
// value   = 1 - penalty / cap
// Integer arithmetic throughout; the division happens once at the end.
CorrectnessScore score_report(const InconsistencyReport& report,
                              const SeverityWeights& weights = {});

// correct -> 1, incorrect -> 0.
int score_judgment(const Judgment& judgment);

}  // namespace codejudge
