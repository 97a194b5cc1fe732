// Core domain types shared by every module: tasks, candidates, labels,
// judgments, inconsistency reports and correctness scores.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace codejudge {

enum class BinaryLabel { correct, incorrect };

// Human usefulness rating in [0, 4].
struct GradedLabel {
    double value = 0.0;

    bool operator==(const GradedLabel&) const = default;
};

// Exactly one of the two label kinds; enforced by the variant itself.
using GroundTruthLabel = std::variant<BinaryLabel, GradedLabel>;

inline bool is_binary(const GroundTruthLabel& label) {
    return std::holds_alternative<BinaryLabel>(label);
}

// One generated code snippet under evaluation. Empty code is valid input:
// models do emit empty completions.
struct Candidate {
    std::string candidate_id;
    std::string code;
    GroundTruthLabel label;

    bool operator==(const Candidate&) const = default;
};

// A code generation task: natural-language description plus the candidates
// produced for it. The reference solution is optional; its absence defines
// the harder reference-free evaluation regime.
struct CodeTask {
    std::string task_id;
    std::string language;
    std::string description;
    std::optional<std::string> reference_code;
    std::vector<Candidate> candidates;

    bool operator==(const CodeTask&) const = default;
};

enum class Method {
    analyze_summarize,
    fault_localization,
    vanilla_binary,
    vanilla_graded,
};

std::string to_string(Method method);
std::optional<Method> method_from_string(const std::string& name);

struct EvaluationMode {
    Method method = Method::analyze_summarize;
    bool with_reference = false;

    bool operator==(const EvaluationMode&) const = default;
};

enum class Verdict { correct, incorrect };

// Outcome of the binary (analyze-then-summarize or vanilla) evaluation of one
// candidate in one run. The verdict comes from the summarization parser only,
// never from reading analysis_text.
struct Judgment {
    std::string candidate_id;
    int run_index = 0;
    std::string analysis_text;
    Verdict verdict = Verdict::incorrect;
    std::string raw_summary_text;

    bool operator==(const Judgment&) const = default;
};

// Severity bands, totally ordered negligible < small < major < fatal.
enum class SeverityLevel { negligible, small, major, fatal };

std::string to_string(SeverityLevel level);
// Case-insensitive; surrounding whitespace ignored. nullopt for anything
// outside the four levels.
std::optional<SeverityLevel> severity_from_string(const std::string& name);

struct InconsistencyEntry {
    std::string description;
    SeverityLevel severity = SeverityLevel::negligible;

    bool operator==(const InconsistencyEntry&) const = default;
};

// Parsed fault-localization output. entries is empty only when the raw text
// carried the explicit no-inconsistency sentinel; a parse failure is
// represented upstream as an error outcome, never as an empty report.
struct InconsistencyReport {
    std::string candidate_id;
    int run_index = 0;
    std::vector<InconsistencyEntry> entries;
    std::string raw_text;

    bool operator==(const InconsistencyReport&) const = default;
};

// Severity-weighted correctness score in [0, 1].
// value = 1 - penalty_points / cap with penalty_points computed in integer
// arithmetic, so 1.0 and 0.0 are exact.
struct CorrectnessScore {
    double value = 1.0;
    std::int64_t small_count = 0;
    std::int64_t major_count = 0;
    std::int64_t fatal_count = 0;
    std::int64_t penalty_points = 0;

    bool operator==(const CorrectnessScore&) const = default;
};

// A single validation complaint; violations are data, not exceptions.
struct Violation {
    std::string field;
    std::string message;

    bool operator==(const Violation&) const = default;
};

struct ValidationOutcome {
    std::vector<Violation> violations;

    bool ok() const { return violations.empty(); }
};

// Structural checks for one task under a given mode: non-empty task_id and
// description, non-empty candidate list, unique candidate ids, and a
// reference solution whenever the mode demands one.
ValidationOutcome validate_task(const CodeTask& task, const EvaluationMode& mode);

}  // namespace codejudge
