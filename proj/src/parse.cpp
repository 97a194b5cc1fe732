#include "codejudge/parse.hpp"

#include <cctype>
#include <cstdlib>

#include <nlohmann/json.hpp>

namespace codejudge {

namespace {

using nlohmann::json;

bool is_word_char(unsigned char c) {
    return std::isalnum(c) != 0 || c == '_';
}

char lower(char c) {
    return static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
}

bool equals_ignore_case(const std::string& a, const char* b) {
    std::size_t i = 0;
    for (; i < a.size(); ++i) {
        if (b[i] == '\0' || lower(a[i]) != b[i]) return false;
    }
    return b[i] == '\0';
}

// Finds the index one past the ']' matching the '[' at start, honoring JSON
// string literals and escapes. npos when unbalanced.
std::size_t balanced_array_end(const std::string& text, std::size_t start) {
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = start; i < text.size(); ++i) {
        const char c = text[i];
        if (in_string) {
            if (escaped) {
                escaped = false;
            } else if (c == '\\') {
                escaped = true;
            } else if (c == '"') {
                in_string = false;
            }
            continue;
        }
        if (c == '"') {
            in_string = true;
        } else if (c == '[') {
            ++depth;
        } else if (c == ']') {
            --depth;
            if (depth == 0) return i + 1;
        }
    }
    return std::string::npos;
}

struct FaultListValidation {
    std::optional<std::vector<InconsistencyEntry>> entries;
    std::string reason;
};

// The no-inconsistency sentinel the prompt asks for on correct code.
bool is_sentinel(const std::string& description, SeverityLevel severity) {
    return equals_ignore_case(description, "none") &&
           severity == SeverityLevel::negligible;
}

FaultListValidation validate_fault_array(const json& array) {
    if (array.empty()) {
        return {std::nullopt, "empty JSON array (no-inconsistency must use the sentinel element)"};
    }
    std::vector<InconsistencyEntry> entries;
    bool sentinel_seen = false;
    for (const auto& element : array) {
        if (!element.is_object()) {
            return {std::nullopt, "array element is not an object"};
        }
        const auto inconsistency = element.find("inconsistency");
        const auto severity = element.find("severity");
        if (inconsistency == element.end() || !inconsistency->is_string()) {
            return {std::nullopt, "element lacks string field \"inconsistency\""};
        }
        if (severity == element.end() || !severity->is_string()) {
            return {std::nullopt, "element lacks string field \"severity\""};
        }
        const auto level = severity_from_string(severity->get<std::string>());
        if (!level.has_value()) {
            return {std::nullopt,
                    "unknown severity \"" + severity->get<std::string>() + "\""};
        }
        const auto description = inconsistency->get<std::string>();
        if (is_sentinel(description, *level)) {
            sentinel_seen = true;
            continue;
        }
        entries.push_back({description, *level});
    }
    if (entries.empty() && !sentinel_seen) {
        // Unreachable given the emptiness check above; kept as a guard.
        return {std::nullopt, "array carried no entries and no sentinel"};
    }
    return {std::move(entries), {}};
}

}  // namespace

VerdictParseOutcome parse_verdict(const std::string& raw) {
    bool saw_yes = false;
    bool saw_no = false;

    std::size_t i = 0;
    while (i < raw.size()) {
        if (!is_word_char(static_cast<unsigned char>(raw[i]))) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < raw.size() && is_word_char(static_cast<unsigned char>(raw[j]))) ++j;
        const std::size_t len = j - i;
        if (len == 3 && lower(raw[i]) == 'y' && lower(raw[i + 1]) == 'e' &&
            lower(raw[i + 2]) == 's') {
            saw_yes = true;
        } else if (len == 2 && lower(raw[i]) == 'n' && lower(raw[i + 1]) == 'o') {
            saw_no = true;
        }
        i = j;
    }

    VerdictParseOutcome outcome;
    outcome.raw = raw;
    if (saw_yes && saw_no) {
        outcome.kind = VerdictParseOutcome::Kind::ambiguous;
    } else if (saw_yes) {
        outcome.kind = VerdictParseOutcome::Kind::verdict;
        outcome.verdict = Verdict::correct;
    } else if (saw_no) {
        outcome.kind = VerdictParseOutcome::Kind::verdict;
        outcome.verdict = Verdict::incorrect;
    } else {
        outcome.kind = VerdictParseOutcome::Kind::no_signal;
    }
    return outcome;
}

FaultListParseOutcome parse_fault_list(const std::string& raw) {
    FaultListParseOutcome outcome;
    outcome.raw = raw;

    std::string first_reason;
    for (std::size_t start = raw.find('['); start != std::string::npos;
         start = raw.find('[', start + 1)) {
        const std::size_t end = balanced_array_end(raw, start);
        if (end == std::string::npos) continue;

        const json parsed = json::parse(raw.begin() + static_cast<std::ptrdiff_t>(start),
                                        raw.begin() + static_cast<std::ptrdiff_t>(end),
                                        nullptr, /*allow_exceptions=*/false);
        if (parsed.is_discarded() || !parsed.is_array()) continue;

        auto validation = validate_fault_array(parsed);
        if (validation.entries.has_value()) {
            InconsistencyReport report;
            report.entries = std::move(*validation.entries);
            report.raw_text = raw;
            outcome.report = std::move(report);
            return outcome;
        }
        if (first_reason.empty()) first_reason = validation.reason;
    }

    outcome.failure_reason =
        first_reason.empty() ? "no JSON array found" : first_reason;
    return outcome;
}

GradedParseOutcome parse_graded(const std::string& raw) {
    GradedParseOutcome outcome;
    outcome.raw = raw;

    const auto blocked_before = [](char c) {
        return is_word_char(static_cast<unsigned char>(c)) || c == '.';
    };

    std::size_t i = 0;
    while (i < raw.size()) {
        if (std::isdigit(static_cast<unsigned char>(raw[i])) == 0) {
            ++i;
            continue;
        }
        std::size_t start = i;
        bool negative = false;
        if (start > 0 && raw[start - 1] == '-') {
            negative = true;
            --start;
        }
        const bool embedded = start > 0 && blocked_before(raw[start - 1]);

        std::size_t j = i;
        while (j < raw.size() && std::isdigit(static_cast<unsigned char>(raw[j])) != 0) ++j;
        if (j + 1 < raw.size() && raw[j] == '.' &&
            std::isdigit(static_cast<unsigned char>(raw[j + 1])) != 0) {
            ++j;
            while (j < raw.size() && std::isdigit(static_cast<unsigned char>(raw[j])) != 0) ++j;
        }
        const bool glued_after =
            j < raw.size() && is_word_char(static_cast<unsigned char>(raw[j]));

        if (!embedded && !glued_after) {
            const std::string token = raw.substr(start, j - start);
            const double value = std::strtod(token.c_str(), nullptr);
            if (!negative && value >= 0.0 && value <= 4.0) {
                outcome.rating = value;
            }
            // First standalone number decides; out-of-range means no signal.
            return outcome;
        }
        i = j;
    }
    return outcome;
}

}  // namespace codejudge
