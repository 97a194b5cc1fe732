// Postprocessing of raw LLM text: Yes/No verdicts, fault-localization JSON
// lists, and 0-4 ratings. All parsers are total: every input maps to exactly
// one outcome variant, never an exception.

#pragma once

#include <optional>
#include <string>

#include "codejudge/model.hpp"

namespace codejudge {

struct VerdictParseOutcome {
    enum class Kind { verdict, ambiguous, no_signal };

    Kind kind = Kind::no_signal;
    Verdict verdict = Verdict::incorrect;  // meaningful only when kind == verdict
    std::string raw;

    bool is_verdict() const { return kind == Kind::verdict; }
};

// Whole-word, case-insensitive scan for "yes" and "no" tokens (word
// characters are [A-Za-z0-9_], so "nothing" and "yesterday" never match).
//   yes only  -> correct
//   no only   -> incorrect
//   both      -> ambiguous
//   neither   -> no_signal
VerdictParseOutcome parse_verdict(const std::string& raw);

struct FaultListParseOutcome {
    // report populated on success, reason on failure; exactly one is active.
    std::optional<InconsistencyReport> report;
    std::string failure_reason;
    std::string raw;

    bool ok() const { return report.has_value(); }
};

// Extracts the first balanced JSON array in raw that validates as a fault
// list (code fences and surrounding prose are skipped by construction; JSON
// arrays that do not validate, e.g. a "[1]" citation, are passed over).
// Each element must be an object with string fields "inconsistency" and
// "severity"; severities map case-insensitively onto the four levels. The
// sentinel {"inconsistency": "None", "severity": "Negligible"} marks correct
// code and produces an empty-entries report. An empty array is not the
// sentinel and does not parse.
FaultListParseOutcome parse_fault_list(const std::string& raw);

struct GradedParseOutcome {
    std::optional<double> rating;  // populated iff a number in [0,4] was found
    std::string raw;

    bool ok() const { return rating.has_value(); }
};

// First standalone number in raw; accepted iff it lies in [0,4].
GradedParseOutcome parse_graded(const std::string& raw);

}  // namespace codejudge
