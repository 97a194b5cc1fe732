#include "codejudge/report.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace codejudge {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

ordered_json run_record_to_json(const RunRecord& record, bool include_texts) {
    ordered_json out;
    out["run_index"] = record.run_index;
    if (include_texts) {
        if (!record.analysis_texts.empty()) out["analysis_texts"] = record.analysis_texts;
        if (!record.response_texts.empty()) out["response_texts"] = record.response_texts;
    }
    if (record.verdict.has_value()) out["verdict"] = *record.verdict;
    if (record.score.has_value()) out["score"] = *record.score;
    if (record.prediction.has_value()) out["prediction"] = *record.prediction;
    if (!record.audit_flags.empty()) out["audit_flags"] = record.audit_flags;
    if (record.error.has_value()) out["error"] = *record.error;
    out["excluded_from_stats"] = record.excluded_from_stats;
    return out;
}

ordered_json mean_std_to_json(const std::optional<MeanStd>& value) {
    if (!value.has_value()) return nullptr;
    ordered_json out;
    out["mean"] = value->mean;
    out["std"] = value->std_dev;
    return out;
}

ordered_json optional_to_json(const std::optional<double>& value) {
    if (!value.has_value()) return nullptr;
    return *value;
}

std::string format_mean_std(const std::optional<MeanStd>& value, bool percent) {
    if (!value.has_value()) return "-";
    std::ostringstream out;
    out << std::fixed << std::setprecision(percent ? 2 : 4);
    if (percent) {
        out << value->mean * 100.0 << " +/- " << value->std_dev * 100.0;
    } else {
        out << value->mean << " +/- " << value->std_dev;
    }
    return out.str();
}

}  // namespace

ordered_json report_to_json(const Report& report) {
    ordered_json out;
    out["config"] = report.config;

    out["candidates"] = ordered_json::array();
    for (const auto& candidate : report.candidates) {
        ordered_json record;
        record["task_id"] = candidate.task_id;
        record["candidate_id"] = candidate.candidate_id;
        if (candidate.label_binary.has_value()) record["label_binary"] = *candidate.label_binary;
        if (candidate.label_graded.has_value()) record["label_graded"] = *candidate.label_graded;
        record["runs"] = ordered_json::array();
        for (const auto& run : candidate.runs) {
            record["runs"].push_back(
                run_record_to_json(run, !report.transcripts_redirected));
        }
        out["candidates"].push_back(std::move(record));
    }

    out["runs"] = ordered_json::array();
    for (const auto& run : report.run_stats) {
        ordered_json stats;
        stats["accuracy"] = optional_to_json(run.accuracy);
        stats["kendall_tau"] = optional_to_json(run.kendall_tau);
        stats["spearman_rho"] = optional_to_json(run.spearman_rho);
        stats["excluded_count"] = run.excluded_count;
        out["runs"].push_back(std::move(stats));
    }

    ordered_json aggregate;
    aggregate["run_count"] = report.aggregate.run_count;
    aggregate["accuracy"] = mean_std_to_json(report.aggregate.accuracy);
    aggregate["kendall_tau"] = mean_std_to_json(report.aggregate.kendall_tau);
    aggregate["spearman_rho"] = mean_std_to_json(report.aggregate.spearman_rho);
    out["aggregate"] = std::move(aggregate);
    return out;
}

void write_report(const Report& report, const std::filesystem::path& path) {
    std::ofstream output(path, std::ios::binary);
    if (!output) {
        throw IoError("cannot open report file for writing: " + path.string());
    }
    output << report_to_json(report).dump(2) << '\n';
    if (!output) {
        throw IoError("failed while writing report file: " + path.string());
    }
}

std::string summary_table(const Report& report) {
    std::ostringstream out;
    const std::string method =
        report.config.contains("method") ? report.config["method"].get<std::string>()
                                         : "?";
    const bool with_ref = report.config.value("with_reference", false);

    int total_excluded = 0;
    for (const auto& run : report.run_stats) total_excluded += run.excluded_count;

    out << "method                         tau                rho                accuracy (%)\n";
    out << std::left << std::setw(30)
        << (method + (with_ref ? " (w/ ref)" : " (w/o ref)")) << ' ';
    out << std::left << std::setw(18) << format_mean_std(report.aggregate.kendall_tau, false)
        << ' ';
    out << std::left << std::setw(18)
        << format_mean_std(report.aggregate.spearman_rho, false) << ' ';
    out << format_mean_std(report.aggregate.accuracy, true) << '\n';
    out << "runs: " << report.aggregate.run_count
        << "   excluded candidate-runs: " << total_excluded << '\n';
    return out.str();
}

void write_transcripts(const std::vector<TranscriptRecord>& records,
                       const std::filesystem::path& path) {
    std::ofstream output(path, std::ios::binary);
    if (!output) {
        throw IoError("cannot open transcripts file for writing: " + path.string());
    }
    for (const auto& record : records) {
        ordered_json line;
        line["task_id"] = record.task_id;
        line["candidate_id"] = record.candidate_id;
        line["run_index"] = record.run_index;
        line["method"] = to_string(record.method);
        line["with_reference"] = record.with_reference;
        if (record.label_binary.has_value()) line["label_binary"] = *record.label_binary;
        if (record.label_graded.has_value()) line["label_graded"] = *record.label_graded;
        if (!record.analysis_texts.empty()) line["analysis_texts"] = record.analysis_texts;
        line["response_texts"] = record.response_texts;
        output << line.dump() << '\n';
    }
}

std::vector<TranscriptRecord> load_transcripts(const std::filesystem::path& path) {
    std::ifstream input(path);
    if (!input) {
        throw IoError("cannot open transcripts file: " + path.string());
    }

    std::vector<TranscriptRecord> records;
    std::string line;
    int line_number = 0;
    while (std::getline(input, line)) {
        ++line_number;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const json parsed = json::parse(line, nullptr, /*allow_exceptions=*/false);
        if (parsed.is_discarded() || !parsed.is_object()) {
            throw IoError("transcripts line " + std::to_string(line_number) +
                          ": invalid JSON");
        }
        TranscriptRecord record;
        try {
            record.task_id = parsed.at("task_id").get<std::string>();
            record.candidate_id = parsed.at("candidate_id").get<std::string>();
            record.run_index = parsed.at("run_index").get<int>();
            const auto method = method_from_string(parsed.at("method").get<std::string>());
            if (!method.has_value()) throw std::runtime_error("unknown method");
            record.method = *method;
            record.with_reference = parsed.value("with_reference", false);
            if (parsed.contains("label_binary")) {
                record.label_binary = parsed["label_binary"].get<bool>();
            }
            if (parsed.contains("label_graded")) {
                record.label_graded = parsed["label_graded"].get<double>();
            }
            if (parsed.contains("analysis_texts")) {
                record.analysis_texts =
                    parsed["analysis_texts"].get<std::vector<std::string>>();
            }
            record.response_texts =
                parsed.at("response_texts").get<std::vector<std::string>>();
        } catch (const std::exception& e) {
            throw IoError("transcripts line " + std::to_string(line_number) + ": " +
                          e.what());
        }
        records.push_back(std::move(record));
    }
    return records;
}

}  // namespace codejudge
