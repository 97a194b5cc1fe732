#include "codejudge/dataset.hpp"

#include <fstream>
#include <unordered_set>

namespace codejudge {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string require_string(const json& record, const char* field) {
    const auto it = record.find(field);
    if (it == record.end() || !it->is_string()) {
        throw std::runtime_error(std::string("missing or non-string field \"") + field +
                                 "\"");
    }
    return it->get<std::string>();
}

GroundTruthLabel label_from_json(const json& candidate) {
    const bool has_binary = candidate.contains("label_binary");
    const bool has_graded = candidate.contains("label_graded");
    if (has_binary == has_graded) {
        throw std::runtime_error(
            "candidate must carry exactly one of label_binary / label_graded");
    }
    if (has_binary) {
        if (!candidate["label_binary"].is_boolean()) {
            throw std::runtime_error("label_binary must be a boolean");
        }
        return candidate["label_binary"].get<bool>() ? BinaryLabel::correct
                                                     : BinaryLabel::incorrect;
    }
    if (!candidate["label_graded"].is_number()) {
        throw std::runtime_error("label_graded must be a number");
    }
    const double value = candidate["label_graded"].get<double>();
    if (value < 0.0 || value > 4.0) {
        throw std::runtime_error("label_graded must lie in [0, 4]");
    }
    return GradedLabel{value};
}

}  // namespace

CodeTask task_from_json(const json& record) {
    if (!record.is_object()) {
        throw std::runtime_error("record is not a JSON object");
    }
    CodeTask task;
    task.task_id = require_string(record, "task_id");
    task.language = require_string(record, "language");
    task.description = require_string(record, "description");
    if (record.contains("reference_code")) {
        if (!record["reference_code"].is_string()) {
            throw std::runtime_error("reference_code must be a string when present");
        }
        task.reference_code = record["reference_code"].get<std::string>();
    }

    const auto candidates = record.find("candidates");
    if (candidates == record.end() || !candidates->is_array() || candidates->empty()) {
        throw std::runtime_error("candidates must be a non-empty array");
    }
    for (const auto& entry : *candidates) {
        if (!entry.is_object()) {
            throw std::runtime_error("candidate is not a JSON object");
        }
        Candidate candidate;
        candidate.candidate_id = require_string(entry, "candidate_id");
        candidate.code = require_string(entry, "code");  // empty code is valid input
        candidate.label = label_from_json(entry);
        task.candidates.push_back(std::move(candidate));
    }

    const auto outcome = validate_task(task, EvaluationMode{});
    if (!outcome.ok()) {
        throw std::runtime_error(outcome.violations.front().message);
    }
    return task;
}

ordered_json task_to_json(const CodeTask& task) {
    ordered_json record;
    record["task_id"] = task.task_id;
    record["language"] = task.language;
    record["description"] = task.description;
    if (task.reference_code.has_value()) {
        record["reference_code"] = *task.reference_code;
    }
    record["candidates"] = ordered_json::array();
    for (const auto& candidate : task.candidates) {
        ordered_json entry;
        entry["candidate_id"] = candidate.candidate_id;
        entry["code"] = candidate.code;
        if (const auto* binary = std::get_if<BinaryLabel>(&candidate.label)) {
            entry["label_binary"] = (*binary == BinaryLabel::correct);
        } else {
            entry["label_graded"] = std::get<GradedLabel>(candidate.label).value;
        }
        record["candidates"].push_back(std::move(entry));
    }
    return record;
}

std::vector<CodeTask> load_dataset(const std::filesystem::path& path) {
    std::ifstream input(path);
    if (!input) {
        throw DatasetError("cannot open dataset file: " + path.string());
    }

    std::vector<CodeTask> tasks;
    std::unordered_set<std::string> task_ids;
    bool label_kind_known = false;
    bool labels_binary = false;

    std::string line;
    int line_number = 0;
    while (std::getline(input, line)) {
        ++line_number;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;

        const json record = json::parse(line, nullptr, /*allow_exceptions=*/false);
        if (record.is_discarded()) {
            throw ParseError(line_number, "invalid JSON");
        }
        CodeTask task;
        try {
            task = task_from_json(record);
        } catch (const std::exception& e) {
            throw ParseError(line_number, e.what());
        }
        if (!task_ids.insert(task.task_id).second) {
            throw DuplicateTaskId("duplicate task_id: " + task.task_id);
        }
        for (const auto& candidate : task.candidates) {
            const bool binary = is_binary(candidate.label);
            if (!label_kind_known) {
                label_kind_known = true;
                labels_binary = binary;
            } else if (binary != labels_binary) {
                throw MixedLabelKinds(
                    "dataset mixes binary and graded labels (first mismatch at line " +
                    std::to_string(line_number) + ")");
            }
        }
        tasks.push_back(std::move(task));
    }
    return tasks;
}

void save_dataset(const std::vector<CodeTask>& tasks, const std::filesystem::path& path) {
    std::ofstream output(path, std::ios::binary);
    if (!output) {
        throw DatasetError("cannot open file for writing: " + path.string());
    }
    for (const auto& task : tasks) {
        output << task_to_json(task).dump() << '\n';
    }
}

}  // namespace codejudge
