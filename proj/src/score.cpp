#include "codejudge/score.hpp"

#include <algorithm>

namespace codejudge {

void validate_weights(const SeverityWeights& weights) {
    if (weights.small <= 0 || weights.small > weights.major || weights.major > weights.fatal) {
        throw InvalidWeights("severity weights must satisfy 0 < small <= major <= fatal");
    }
    if (weights.cap <= 0) {
        throw InvalidWeights("penalty cap must be positive");
    }
}

CorrectnessScore score_report(const InconsistencyReport& report,
                              const SeverityWeights& weights) {
    validate_weights(weights);

    CorrectnessScore score;
    for (const auto& entry : report.entries) {
        switch (entry.severity) {
            case SeverityLevel::negligible: break;
            case SeverityLevel::small: ++score.small_count; break;
            case SeverityLevel::major: ++score.major_count; break;
            case SeverityLevel::fatal: ++score.fatal_count; break;
        }
    }

    const std::int64_t total = score.small_count * weights.small +
                               score.major_count * weights.major +
                               score.fatal_count * weights.fatal;
    score.penalty_points = std::min(weights.cap, total);
    score.value = 1.0 - static_cast<double>(score.penalty_points) /
                            static_cast<double>(weights.cap);
    return score;
}

int score_judgment(const Judgment& judgment) {
    return judgment.verdict == Verdict::correct ? 1 : 0;
}

}  // namespace codejudge
