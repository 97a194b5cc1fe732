// JSONL dataset ingestion. One task-with-candidates record per line; field
// names are frozen: task_id, language, description, reference_code,
// candidates[{candidate_id, code, label_binary | label_graded}].

#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "codejudge/model.hpp"

namespace codejudge {

class DatasetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public DatasetError {
public:
    ParseError(int line, const std::string& reason)
        : DatasetError("line " + std::to_string(line) + ": " + reason), line_(line) {}

    int line() const { return line_; }

private:
    int line_;
};

// A file must be all-binary or all-graded.
class MixedLabelKinds : public DatasetError {
public:
    using DatasetError::DatasetError;
};

class DuplicateTaskId : public DatasetError {
public:
    using DatasetError::DatasetError;
};

// Throws the reason as std::runtime_error on structural problems; the JSONL
// loader wraps it with the line number.
CodeTask task_from_json(const nlohmann::json& record);

nlohmann::ordered_json task_to_json(const CodeTask& task);

std::vector<CodeTask> load_dataset(const std::filesystem::path& path);

// JSONL, one task per line, stable field order. Inverse of load_dataset on
// valid data.
void save_dataset(const std::vector<CodeTask>& tasks, const std::filesystem::path& path);

}  // namespace codejudge
