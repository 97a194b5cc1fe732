// Evaluation report assembly and serialization. Reports are written with a
// stable key order and no wall-clock data, so two identical runs produce
// byte-identical files.

#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "codejudge/model.hpp"
#include "codejudge/stats.hpp"

namespace codejudge {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// One candidate in one run: raw texts in the order received (a parse retry
// appends a second response), the parsed outcome, and audit flags.
struct RunRecord {
    int run_index = 0;
    std::vector<std::string> analysis_texts;   // analyze-summarize only
    std::vector<std::string> response_texts;   // summarization / fault list / vanilla
    std::optional<std::string> verdict;        // "correct" / "incorrect"
    std::optional<double> score;               // deviation score or graded rating
    std::optional<int> prediction;             // the {0,1} or real value fed to stats
    std::vector<std::string> audit_flags;
    std::optional<std::string> error;          // gateway failure message
    bool excluded_from_stats = false;
};

struct CandidateRecord {
    std::string task_id;
    std::string candidate_id;
    std::optional<bool> label_binary;
    std::optional<double> label_graded;
    std::vector<RunRecord> runs;
};

struct Report {
    nlohmann::ordered_json config;  // run configuration echo, assembled upstream
    std::vector<CandidateRecord> candidates;
    std::vector<RunStatistics> run_stats;
    AggregateStatistics aggregate;
    bool transcripts_redirected = false;  // raw texts live in the sidecar instead
};

nlohmann::ordered_json report_to_json(const Report& report);

// Deterministic serialization (stable key order, trailing newline).
void write_report(const Report& report, const std::filesystem::path& path);

// Plain-text summary mirroring the published table layout: one method row
// with tau / rho / accuracy columns as mean +/- std.
std::string summary_table(const Report& report);

// ---------------------------------------------------------------------------
// Transcripts sidecar: raw LLM outputs frozen for offline re-scoring.

struct TranscriptRecord {
    std::string task_id;
    std::string candidate_id;
    int run_index = 0;
    Method method = Method::analyze_summarize;
    bool with_reference = false;
    std::optional<bool> label_binary;
    std::optional<double> label_graded;
    std::vector<std::string> analysis_texts;
    std::vector<std::string> response_texts;
};

void write_transcripts(const std::vector<TranscriptRecord>& records,
                       const std::filesystem::path& path);

std::vector<TranscriptRecord> load_transcripts(const std::filesystem::path& path);

}  // namespace codejudge
