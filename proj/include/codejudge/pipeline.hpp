// Orchestrates a full evaluation: prompt rendering, gateway calls, parsing,
// scoring, per-run statistics and report assembly.

#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "codejudge/gateway.hpp"
#include "codejudge/model.hpp"
#include "codejudge/parse.hpp"
#include "codejudge/prompt.hpp"
#include "codejudge/report.hpp"
#include "codejudge/score.hpp"
#include "codejudge/stats.hpp"

namespace codejudge {

struct PipelineConfig {
    EvaluationMode mode;
    ModelConfig model;
    int repeats = 3;
    int concurrency_limit = 4;
    SeverityWeights weights;
    bool retry_on_parse_failure = true;  // one extra completion on parse failure
};

// ---------------------------------------------------------------------------
// Parse-resolution policy shared by the live pipeline and offline re-scoring:
// walk the stored responses in order, first parseable one wins.

struct VerdictResolution {
    Verdict verdict = Verdict::incorrect;  // conservative default when unresolved
    bool resolved = false;
};

VerdictResolution resolve_verdict(const std::vector<std::string>& response_texts);

struct FaultResolution {
    std::optional<InconsistencyReport> report;
    std::string failure_reason;
};

FaultResolution resolve_fault_list(const std::vector<std::string>& response_texts);

struct GradedResolution {
    std::optional<double> rating;
};

GradedResolution resolve_graded(const std::vector<std::string>& response_texts);

// ---------------------------------------------------------------------------

class Pipeline {
public:
    Pipeline(TemplateLibrary templates, std::shared_ptr<Transport> transport,
             PipelineConfig config);

    struct BinaryOutcome {
        Judgment judgment;
        std::vector<std::string> summary_texts;
        std::vector<std::string> audit_flags;
    };

    struct DeviationOutcome {
        std::optional<CorrectnessScore> score;
        std::optional<InconsistencyReport> report;
        std::vector<std::string> fault_texts;
        std::vector<std::string> audit_flags;
    };

    struct GradedOutcome {
        std::optional<double> rating;
        std::vector<std::string> response_texts;
        std::vector<std::string> audit_flags;
    };

    // Analyze then summarize: two sequential completions; the summarization
    // prompt sees only the analysis text. On an ambiguous or missing verdict
    // the summarization call alone is reissued once; an unresolved verdict
    // defaults to incorrect with an audit flag.
    BinaryOutcome evaluate_binary(const CodeTask& task, const Candidate& candidate,
                                  int run_index);

    // Taxonomy-guided fault localization: one completion, parsed into an
    // inconsistency list and scored. Unparseable after the retry means an
    // absent score (excluded from correlations, never silently dropped).
    DeviationOutcome evaluate_deviation(const CodeTask& task, const Candidate& candidate,
                                        int run_index);

    BinaryOutcome evaluate_vanilla_binary(const CodeTask& task, const Candidate& candidate,
                                          int run_index);

    GradedOutcome evaluate_vanilla_graded(const CodeTask& task, const Candidate& candidate,
                                          int run_index);

    struct RunOutput {
        Report report;
        std::vector<TranscriptRecord> transcripts;
    };

    // Full evaluation over a validated dataset: repeats x candidates work
    // items under bounded concurrency, deterministic ordered join, per-run
    // statistics, aggregates. Throws ConfigError / validation errors before
    // any gateway call; per-candidate gateway failures are recorded, not
    // fatal.
    RunOutput run(const std::vector<CodeTask>& tasks);

    const PipelineConfig& config() const { return config_; }

private:
    CompletionResult complete_text(const RenderedPrompt& prompt, const std::string& tag);

    TemplateLibrary templates_;
    Gateway gateway_;
    PipelineConfig config_;
};

// Re-parses and re-scores frozen transcripts without any gateway call, e.g.
// to re-run the penalty computation under different weights. All records
// must share one method; labels must be homogeneous.
Pipeline::RunOutput score_offline(const std::vector<TranscriptRecord>& records,
                                  const SeverityWeights& weights);

}  // namespace codejudge
