#include "codejudge/model.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_set>

namespace codejudge {

namespace {

std::string lower_trimmed(const std::string& text) {
    auto begin = text.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return {};
    auto end = text.find_last_not_of(" \t\r\n");
    std::string out = text.substr(begin, end - begin + 1);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

}  // namespace

std::string to_string(Method method) {
    switch (method) {
        case Method::analyze_summarize: return "analyze-summarize";
        case Method::fault_localization: return "fault-localization";
        case Method::vanilla_binary: return "vanilla-binary";
        case Method::vanilla_graded: return "vanilla-graded";
    }
    return "unknown";
}

std::optional<Method> method_from_string(const std::string& name) {
    if (name == "analyze-summarize") return Method::analyze_summarize;
    if (name == "fault-localization") return Method::fault_localization;
    if (name == "vanilla-binary") return Method::vanilla_binary;
    if (name == "vanilla-graded") return Method::vanilla_graded;
    return std::nullopt;
}

std::string to_string(SeverityLevel level) {
    switch (level) {
        case SeverityLevel::negligible: return "Negligible";
        case SeverityLevel::small: return "Small";
        case SeverityLevel::major: return "Major";
        case SeverityLevel::fatal: return "Fatal";
    }
    return "Negligible";
}

std::optional<SeverityLevel> severity_from_string(const std::string& name) {
    const std::string key = lower_trimmed(name);
    if (key == "negligible") return SeverityLevel::negligible;
    if (key == "small") return SeverityLevel::small;
    if (key == "major") return SeverityLevel::major;
    if (key == "fatal") return SeverityLevel::fatal;
    return std::nullopt;
}

ValidationOutcome validate_task(const CodeTask& task, const EvaluationMode& mode) {
    ValidationOutcome outcome;
    auto flag = [&](std::string field, std::string message) {
        outcome.violations.push_back({std::move(field), std::move(message)});
    };

    if (task.task_id.empty()) flag("task_id", "task_id is empty");
    if (task.description.empty()) flag("description", "description is empty");
    if (task.candidates.empty()) flag("candidates", "task has no candidates");

    if (mode.with_reference && !task.reference_code.has_value()) {
        flag("reference_code", "missing reference_code but mode requires one");
    }

    std::unordered_set<std::string> seen;
    for (const auto& candidate : task.candidates) {
        if (candidate.candidate_id.empty()) {
            flag("candidate_id", "candidate_id is empty");
        } else if (!seen.insert(candidate.candidate_id).second) {
            flag("candidate_id", "duplicate candidate_id: " + candidate.candidate_id);
        }
    }
    return outcome;
}

}  // namespace codejudge
