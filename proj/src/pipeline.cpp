#include "codejudge/pipeline.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "codejudge/dataset.hpp"

namespace codejudge {

namespace {

constexpr const char* kFlagParseRetry = "parse_retry";
constexpr const char* kFlagUnresolvedVerdict = "unresolved_verdict";
constexpr const char* kFlagUnparseableFaultList = "unparseable_fault_list";
constexpr const char* kFlagUnparseableRating = "unparseable_rating";
constexpr const char* kFlagEmptyAnalysis = "empty_analysis";

bool labels_are_binary(const std::vector<CodeTask>& tasks) {
    bool known = false;
    bool binary = false;
    for (const auto& task : tasks) {
        for (const auto& candidate : task.candidates) {
            const bool candidate_binary = is_binary(candidate.label);
            if (!known) {
                known = true;
                binary = candidate_binary;
            } else if (binary != candidate_binary) {
                throw MixedLabelKinds("dataset mixes binary and graded labels");
            }
        }
    }
    if (!known) {
        throw ConfigError("dataset has no candidates");
    }
    return binary;
}

void check_mode_compatibility(Method method, bool binary_labels) {
    // Binary-label data takes the binary judges plus fault localization
    // (thresholded per the full-score rule); graded data takes the two
    // deviation judges.
    const bool ok = binary_labels
                        ? (method == Method::analyze_summarize ||
                           method == Method::vanilla_binary ||
                           method == Method::fault_localization)
                        : (method == Method::fault_localization ||
                           method == Method::vanilla_graded);
    if (!ok) {
        throw ConfigError("method " + to_string(method) + " is incompatible with " +
                          (binary_labels ? "binary" : "graded") + " ground-truth labels");
    }
}

// Everything run() needs from one candidate x run work item.
struct ResolvedRecord {
    RunRecord record;
    std::optional<double> prediction_value;  // feeds correlations on graded labels
    std::optional<int> prediction_binary;    // feeds accuracy/correlations on binary labels
};

ResolvedRecord resolve_record(Method method, bool binary_labels,
                              const SeverityWeights& weights, int run_index,
                              std::vector<std::string> analysis_texts,
                              std::vector<std::string> response_texts,
                              std::optional<std::string> gateway_error) {
    ResolvedRecord out;
    RunRecord& record = out.record;
    record.run_index = run_index;
    record.analysis_texts = std::move(analysis_texts);
    record.response_texts = std::move(response_texts);

    if (gateway_error.has_value()) {
        record.error = std::move(gateway_error);
        record.excluded_from_stats = true;
        return out;
    }

    if (record.response_texts.size() > 1) {
        record.audit_flags.push_back(kFlagParseRetry);
    }

    switch (method) {
        case Method::analyze_summarize:
        case Method::vanilla_binary: {
            if (method == Method::analyze_summarize &&
                (record.analysis_texts.empty() || record.analysis_texts.back().empty())) {
                record.audit_flags.push_back(kFlagEmptyAnalysis);
            }
            const auto resolution = resolve_verdict(record.response_texts);
            if (!resolution.resolved) {
                record.audit_flags.push_back(kFlagUnresolvedVerdict);
            }
            record.verdict =
                resolution.verdict == Verdict::correct ? "correct" : "incorrect";
            out.prediction_binary = resolution.verdict == Verdict::correct ? 1 : 0;
            record.prediction = out.prediction_binary;
            break;
        }
        case Method::fault_localization: {
            const auto resolution = resolve_fault_list(record.response_texts);
            if (!resolution.report.has_value()) {
                record.audit_flags.push_back(kFlagUnparseableFaultList);
                record.excluded_from_stats = true;
                break;
            }
            const CorrectnessScore score = score_report(*resolution.report, weights);
            record.score = score.value;
            if (binary_labels) {
                out.prediction_binary = grade_to_binary(score);
                record.prediction = out.prediction_binary;
            } else {
                out.prediction_value = score.value;
            }
            break;
        }
        case Method::vanilla_graded: {
            const auto resolution = resolve_graded(record.response_texts);
            if (!resolution.rating.has_value()) {
                record.audit_flags.push_back(kFlagUnparseableRating);
                record.excluded_from_stats = true;
                break;
            }
            record.score = *resolution.rating;
            out.prediction_value = *resolution.rating;
            break;
        }
    }
    return out;
}

std::optional<double> try_metric(const std::function<double()>& compute) {
    try {
        return compute();
    } catch (const StatsError&) {
        return std::nullopt;
    }
}

// Drops metrics that are not present in every run, so aggregate_runs sees a
// homogeneous set; per-run values stay visible in the report either way.
std::vector<RunStatistics> homogenized(std::vector<RunStatistics> stats) {
    auto strip_if_partial = [&](auto field) {
        const bool everywhere = std::all_of(stats.begin(), stats.end(), [&](const auto& s) {
            return (s.*field).has_value();
        });
        if (!everywhere) {
            for (auto& s : stats) (s.*field).reset();
        }
    };
    strip_if_partial(&RunStatistics::accuracy);
    strip_if_partial(&RunStatistics::kendall_tau);
    strip_if_partial(&RunStatistics::spearman_rho);
    return stats;
}

}  // namespace

VerdictResolution resolve_verdict(const std::vector<std::string>& response_texts) {
    for (const auto& text : response_texts) {
        const auto outcome = parse_verdict(text);
        if (outcome.is_verdict()) {
            return {outcome.verdict, true};
        }
    }
    return {Verdict::incorrect, false};
}

FaultResolution resolve_fault_list(const std::vector<std::string>& response_texts) {
    FaultResolution resolution;
    for (const auto& text : response_texts) {
        auto outcome = parse_fault_list(text);
        if (outcome.ok()) {
            resolution.report = std::move(outcome.report);
            resolution.failure_reason.clear();
            return resolution;
        }
        resolution.failure_reason = outcome.failure_reason;
    }
    if (resolution.failure_reason.empty()) {
        resolution.failure_reason = "no response to parse";
    }
    return resolution;
}

GradedResolution resolve_graded(const std::vector<std::string>& response_texts) {
    for (const auto& text : response_texts) {
        const auto outcome = parse_graded(text);
        if (outcome.ok()) return {outcome.rating};
    }
    return {std::nullopt};
}

Pipeline::Pipeline(TemplateLibrary templates, std::shared_ptr<Transport> transport,
                   PipelineConfig config)
    : templates_(std::move(templates)),
      gateway_(std::move(transport)),
      config_(std::move(config)) {
    if (config_.repeats < 1) {
        throw ConfigError("repeats must be >= 1");
    }
    if (config_.concurrency_limit < 1) {
        throw ConfigError("concurrency_limit must be >= 1");
    }
    validate_model_config(config_.model);
    validate_weights(config_.weights);
}

CompletionResult Pipeline::complete_text(const RenderedPrompt& prompt,
                                         const std::string& tag) {
    return gateway_.complete(CompletionRequest{prompt, config_.model, tag});
}

Pipeline::BinaryOutcome Pipeline::evaluate_binary(const CodeTask& task,
                                                  const Candidate& candidate,
                                                  int run_index) {
    const std::string tag = task.task_id + "/" + candidate.candidate_id + "/run" +
                            std::to_string(run_index);

    const auto analysis_prompt =
        templates_.render_analysis(task, candidate, config_.mode.with_reference);
    const std::string analysis_text = complete_text(analysis_prompt, tag + "/analysis").text;

    std::vector<std::string> summary_texts;
    if (!analysis_text.empty()) {
        const auto summary_prompt = templates_.render_summarization(analysis_text);
        summary_texts.push_back(complete_text(summary_prompt, tag + "/summary").text);
        if (!resolve_verdict(summary_texts).resolved && config_.retry_on_parse_failure) {
            summary_texts.push_back(
                complete_text(summary_prompt, tag + "/summary-retry").text);
        }
    }

    BinaryOutcome outcome;
    const auto resolved =
        resolve_record(Method::analyze_summarize, true, config_.weights, run_index,
                       {analysis_text}, summary_texts, std::nullopt);
    outcome.summary_texts = resolved.record.response_texts;
    outcome.audit_flags = resolved.record.audit_flags;
    outcome.judgment = Judgment{
        candidate.candidate_id, run_index, analysis_text,
        resolved.record.verdict == "correct" ? Verdict::correct : Verdict::incorrect,
        summary_texts.empty() ? std::string{} : summary_texts.back()};
    return outcome;
}

Pipeline::DeviationOutcome Pipeline::evaluate_deviation(const CodeTask& task,
                                                        const Candidate& candidate,
                                                        int run_index) {
    const std::string tag = task.task_id + "/" + candidate.candidate_id + "/run" +
                            std::to_string(run_index) + "/faults";
    const auto prompt =
        templates_.render_fault_localization(task, candidate, config_.mode.with_reference);

    std::vector<std::string> fault_texts;
    fault_texts.push_back(complete_text(prompt, tag).text);
    if (!resolve_fault_list(fault_texts).report.has_value() &&
        config_.retry_on_parse_failure) {
        fault_texts.push_back(complete_text(prompt, tag + "-retry").text);
    }

    DeviationOutcome outcome;
    outcome.fault_texts = fault_texts;
    auto resolution = resolve_fault_list(fault_texts);
    if (resolution.report.has_value()) {
        resolution.report->candidate_id = candidate.candidate_id;
        resolution.report->run_index = run_index;
        outcome.score = score_report(*resolution.report, config_.weights);
        outcome.report = std::move(resolution.report);
    } else {
        outcome.audit_flags.push_back(kFlagUnparseableFaultList);
    }
    if (fault_texts.size() > 1) {
        outcome.audit_flags.push_back(kFlagParseRetry);
    }
    return outcome;
}

Pipeline::BinaryOutcome Pipeline::evaluate_vanilla_binary(const CodeTask& task,
                                                          const Candidate& candidate,
                                                          int run_index) {
    const std::string tag = task.task_id + "/" + candidate.candidate_id + "/run" +
                            std::to_string(run_index) + "/vanilla";
    const auto prompt = templates_.render_vanilla(task, candidate, /*graded=*/false,
                                                  config_.mode.with_reference);

    std::vector<std::string> texts;
    texts.push_back(complete_text(prompt, tag).text);
    if (!resolve_verdict(texts).resolved && config_.retry_on_parse_failure) {
        texts.push_back(complete_text(prompt, tag + "-retry").text);
    }

    BinaryOutcome outcome;
    const auto resolved = resolve_record(Method::vanilla_binary, true, config_.weights,
                                         run_index, {}, texts, std::nullopt);
    outcome.summary_texts = resolved.record.response_texts;
    outcome.audit_flags = resolved.record.audit_flags;
    outcome.judgment = Judgment{
        candidate.candidate_id, run_index, std::string{},
        resolved.record.verdict == "correct" ? Verdict::correct : Verdict::incorrect,
        texts.back()};
    return outcome;
}

Pipeline::GradedOutcome Pipeline::evaluate_vanilla_graded(const CodeTask& task,
                                                          const Candidate& candidate,
                                                          int run_index) {
    const std::string tag = task.task_id + "/" + candidate.candidate_id + "/run" +
                            std::to_string(run_index) + "/vanilla";
    const auto prompt = templates_.render_vanilla(task, candidate, /*graded=*/true,
                                                  config_.mode.with_reference);

    std::vector<std::string> texts;
    texts.push_back(complete_text(prompt, tag).text);
    if (!resolve_graded(texts).rating.has_value() && config_.retry_on_parse_failure) {
        texts.push_back(complete_text(prompt, tag + "-retry").text);
    }

    GradedOutcome outcome;
    outcome.response_texts = texts;
    outcome.rating = resolve_graded(texts).rating;
    if (!outcome.rating.has_value()) {
        outcome.audit_flags.push_back(kFlagUnparseableRating);
    }
    if (texts.size() > 1) {
        outcome.audit_flags.push_back(kFlagParseRetry);
    }
    return outcome;
}

Pipeline::RunOutput Pipeline::run(const std::vector<CodeTask>& tasks) {
    // Everything that can be rejected is rejected before the first call.
    std::set<std::string> task_ids;
    for (const auto& task : tasks) {
        const auto outcome = validate_task(task, config_.mode);
        if (!outcome.ok()) {
            throw ConfigError("task " + task.task_id + ": " +
                              outcome.violations.front().message);
        }
        if (!task_ids.insert(task.task_id).second) {
            throw DuplicateTaskId("duplicate task_id: " + task.task_id);
        }
    }
    const bool binary_labels = labels_are_binary(tasks);
    check_mode_compatibility(config_.mode.method, binary_labels);

    struct WorkItem {
        const CodeTask* task;
        const Candidate* candidate;
    };
    std::vector<WorkItem> items;
    for (const auto& task : tasks) {
        for (const auto& candidate : task.candidates) {
            items.push_back({&task, &candidate});
        }
    }

    Pipeline::RunOutput output;
    auto& report = output.report;
    report.candidates.reserve(items.size());
    for (const auto& item : items) {
        CandidateRecord record;
        record.task_id = item.task->task_id;
        record.candidate_id = item.candidate->candidate_id;
        if (const auto* binary = std::get_if<BinaryLabel>(&item.candidate->label)) {
            record.label_binary = (*binary == BinaryLabel::correct);
        } else {
            record.label_graded = std::get<GradedLabel>(item.candidate->label).value;
        }
        report.candidates.push_back(std::move(record));
    }

    for (int run_index = 0; run_index < config_.repeats; ++run_index) {
        std::vector<ResolvedRecord> resolved(items.size());

        bounded_parallel_for(items.size(), config_.concurrency_limit, [&](std::size_t i) {
            const CodeTask& task = *items[i].task;
            const Candidate& candidate = *items[i].candidate;
            std::vector<std::string> analysis_texts;
            std::vector<std::string> response_texts;
            std::optional<std::string> gateway_error;
            try {
                switch (config_.mode.method) {
                    case Method::analyze_summarize: {
                        auto outcome = evaluate_binary(task, candidate, run_index);
                        analysis_texts.push_back(outcome.judgment.analysis_text);
                        response_texts = std::move(outcome.summary_texts);
                        break;
                    }
                    case Method::fault_localization: {
                        auto outcome = evaluate_deviation(task, candidate, run_index);
                        response_texts = std::move(outcome.fault_texts);
                        break;
                    }
                    case Method::vanilla_binary: {
                        auto outcome = evaluate_vanilla_binary(task, candidate, run_index);
                        response_texts = std::move(outcome.summary_texts);
                        break;
                    }
                    case Method::vanilla_graded: {
                        auto outcome = evaluate_vanilla_graded(task, candidate, run_index);
                        response_texts = std::move(outcome.response_texts);
                        break;
                    }
                }
            } catch (const std::exception& e) {
                gateway_error = e.what();
            }
            resolved[i] = resolve_record(config_.mode.method, binary_labels,
                                         config_.weights, run_index,
                                         std::move(analysis_texts),
                                         std::move(response_texts),
                                         std::move(gateway_error));
        });

        // Deterministic ordered join: statistics and records in input order.
        std::vector<int> predictions_binary;
        std::vector<int> labels_binary_vec;
        std::vector<double> predictions_value;
        std::vector<double> labels_value;
        RunStatistics run_stats;
        for (std::size_t i = 0; i < items.size(); ++i) {
            const auto& entry = resolved[i];
            if (entry.record.excluded_from_stats) {
                ++run_stats.excluded_count;
            } else if (binary_labels) {
                predictions_binary.push_back(entry.prediction_binary.value_or(0));
                labels_binary_vec.push_back(
                    std::get<BinaryLabel>(items[i].candidate->label) == BinaryLabel::correct
                        ? 1
                        : 0);
            } else {
                predictions_value.push_back(entry.prediction_value.value_or(0.0));
                labels_value.push_back(
                    std::get<GradedLabel>(items[i].candidate->label).value);
            }

            TranscriptRecord transcript;
            transcript.task_id = items[i].task->task_id;
            transcript.candidate_id = items[i].candidate->candidate_id;
            transcript.run_index = run_index;
            transcript.method = config_.mode.method;
            transcript.with_reference = config_.mode.with_reference;
            transcript.label_binary = report.candidates[i].label_binary;
            transcript.label_graded = report.candidates[i].label_graded;
            transcript.analysis_texts = entry.record.analysis_texts;
            transcript.response_texts = entry.record.response_texts;
            output.transcripts.push_back(std::move(transcript));

            report.candidates[i].runs.push_back(entry.record);
        }

        if (binary_labels) {
            run_stats.accuracy = try_metric(
                [&] { return accuracy(predictions_binary, labels_binary_vec); });
            PairedSample sample;
            sample.predictions.assign(predictions_binary.begin(), predictions_binary.end());
            sample.labels.assign(labels_binary_vec.begin(), labels_binary_vec.end());
            run_stats.kendall_tau = try_metric([&] { return kendall_tau(sample); });
            run_stats.spearman_rho = try_metric([&] { return spearman_rho(sample); });
        } else {
            PairedSample sample{predictions_value, labels_value};
            run_stats.kendall_tau = try_metric([&] { return kendall_tau(sample); });
            run_stats.spearman_rho = try_metric([&] { return spearman_rho(sample); });
        }
        report.run_stats.push_back(run_stats);
    }

    report.aggregate = aggregate_runs(homogenized(report.run_stats));

    nlohmann::ordered_json config_echo;
    config_echo["method"] = to_string(config_.mode.method);
    config_echo["with_reference"] = config_.mode.with_reference;
    config_echo["backend"] = to_string(gateway_.transport().kind());
    nlohmann::ordered_json model;
    model["model_name"] = config_.model.model_name;
    model["endpoint_url"] = config_.model.endpoint_url;
    model["api_key_env"] = config_.model.api_key_env;
    model["temperature"] = config_.model.temperature;
    model["top_p"] = config_.model.top_p;
    model["max_output_tokens"] = config_.model.max_output_tokens;
    model["max_retries"] = config_.model.max_retries;
    config_echo["model"] = std::move(model);
    config_echo["repeats"] = config_.repeats;
    config_echo["concurrency"] = config_.concurrency_limit;
    nlohmann::ordered_json weights;
    weights["small"] = config_.weights.small;
    weights["major"] = config_.weights.major;
    weights["fatal"] = config_.weights.fatal;
    weights["cap"] = config_.weights.cap;
    config_echo["weights"] = std::move(weights);
    config_echo["retry_on_parse_failure"] = config_.retry_on_parse_failure;
    report.config = std::move(config_echo);

    return output;
}

Pipeline::RunOutput score_offline(const std::vector<TranscriptRecord>& records,
                                  const SeverityWeights& weights) {
    if (records.empty()) {
        throw EmptySample("transcripts file holds no records");
    }
    validate_weights(weights);

    const Method method = records.front().method;
    for (const auto& record : records) {
        if (record.method != method) {
            throw ConfigError("transcripts mix evaluation methods");
        }
    }
    const bool binary_labels = records.front().label_binary.has_value();
    for (const auto& record : records) {
        if (record.label_binary.has_value() != binary_labels) {
            throw MixedLabelKinds("transcripts mix binary and graded labels");
        }
    }

    // Candidates in first-appearance order; run indices sorted.
    std::vector<std::pair<std::string, std::string>> candidate_keys;
    std::map<std::pair<std::string, std::string>, std::size_t> candidate_index;
    std::set<int> run_indices;
    for (const auto& record : records) {
        const auto key = std::make_pair(record.task_id, record.candidate_id);
        if (candidate_index.emplace(key, candidate_keys.size()).second) {
            candidate_keys.push_back(key);
        }
        run_indices.insert(record.run_index);
    }

    Pipeline::RunOutput output;
    auto& report = output.report;
    report.candidates.resize(candidate_keys.size());
    for (std::size_t i = 0; i < candidate_keys.size(); ++i) {
        report.candidates[i].task_id = candidate_keys[i].first;
        report.candidates[i].candidate_id = candidate_keys[i].second;
    }

    std::map<std::pair<int, std::size_t>, const TranscriptRecord*> by_run_and_candidate;
    for (const auto& record : records) {
        const auto key = std::make_pair(record.task_id, record.candidate_id);
        by_run_and_candidate[{record.run_index, candidate_index.at(key)}] = &record;
        auto& candidate = report.candidates[candidate_index.at(key)];
        candidate.label_binary = record.label_binary;
        candidate.label_graded = record.label_graded;
    }

    for (int run_index : run_indices) {
        std::vector<int> predictions_binary;
        std::vector<int> labels_binary_vec;
        std::vector<double> predictions_value;
        std::vector<double> labels_value;
        RunStatistics run_stats;

        for (std::size_t i = 0; i < candidate_keys.size(); ++i) {
            const auto found = by_run_and_candidate.find({run_index, i});
            if (found == by_run_and_candidate.end()) {
                RunRecord missing;
                missing.run_index = run_index;
                missing.error = "no transcript for this run";
                missing.excluded_from_stats = true;
                report.candidates[i].runs.push_back(std::move(missing));
                ++run_stats.excluded_count;
                continue;
            }
            const TranscriptRecord& transcript = *found->second;
            auto resolved =
                resolve_record(method, binary_labels, weights, run_index,
                               transcript.analysis_texts, transcript.response_texts,
                               std::nullopt);
            if (resolved.record.excluded_from_stats) {
                ++run_stats.excluded_count;
            } else if (binary_labels) {
                predictions_binary.push_back(resolved.prediction_binary.value_or(0));
                labels_binary_vec.push_back(*transcript.label_binary ? 1 : 0);
            } else {
                predictions_value.push_back(resolved.prediction_value.value_or(0.0));
                labels_value.push_back(*transcript.label_graded);
            }
            report.candidates[i].runs.push_back(std::move(resolved.record));
        }

        if (binary_labels) {
            run_stats.accuracy = try_metric(
                [&] { return accuracy(predictions_binary, labels_binary_vec); });
            PairedSample sample;
            sample.predictions.assign(predictions_binary.begin(), predictions_binary.end());
            sample.labels.assign(labels_binary_vec.begin(), labels_binary_vec.end());
            run_stats.kendall_tau = try_metric([&] { return kendall_tau(sample); });
            run_stats.spearman_rho = try_metric([&] { return spearman_rho(sample); });
        } else {
            PairedSample sample{predictions_value, labels_value};
            run_stats.kendall_tau = try_metric([&] { return kendall_tau(sample); });
            run_stats.spearman_rho = try_metric([&] { return spearman_rho(sample); });
        }
        report.run_stats.push_back(run_stats);
    }

    report.aggregate = aggregate_runs(homogenized(report.run_stats));

    nlohmann::ordered_json config_echo;
    config_echo["method"] = to_string(method);
    config_echo["with_reference"] = records.front().with_reference;
    config_echo["backend"] = "offline";
    nlohmann::ordered_json weights_echo;
    weights_echo["small"] = weights.small;
    weights_echo["major"] = weights.major;
    weights_echo["fatal"] = weights.fatal;
    weights_echo["cap"] = weights.cap;
    config_echo["weights"] = std::move(weights_echo);
    config_echo["repeats"] = static_cast<int>(run_indices.size());
    report.config = std::move(config_echo);

    return output;
}

}  // namespace codejudge
