// Prompt rendering for the four prompt families (analysis, summarization,
// fault localization, vanilla). Templates are data files shipped with the
// artifact, one UTF-8 file per template id, so prompt audits diff cleanly.

#pragma once

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "codejudge/model.hpp"

namespace codejudge {

enum class TemplateId {
    analysis,
    analysis_with_ref,
    summarization,
    fault_localization,
    fault_localization_with_ref,
    vanilla_binary,
    vanilla_binary_with_ref,
    vanilla_graded,
    vanilla_graded_with_ref,
};

std::string to_string(TemplateId id);
const std::vector<TemplateId>& all_template_ids();

// Placeholder names ({LANGUAGE}, {PROBLEM}, {CODE}, {REFERENCE}, {ANALYSIS})
// each template must contain, exactly.
const std::vector<std::string>& required_placeholders(TemplateId id);

class TemplateError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A required field for the chosen template is absent (e.g. rendering a
// with-reference template for a task without reference code).
class MissingBinding : public TemplateError {
public:
    using TemplateError::TemplateError;
};

struct PromptTemplate {
    TemplateId id = TemplateId::analysis;
    std::string body;
};

using Bindings = std::map<std::string, std::string>;

struct RenderedPrompt {
    TemplateId template_id = TemplateId::analysis;
    std::string text;
    Bindings bindings;
};

// Loads `<template_id>.txt` for all nine ids from one directory and
// validates that each body carries exactly its declared placeholders.
// Rendering substitutes in a single pass: binding values are inserted
// opaquely and never rescanned, so braces or placeholder-looking text inside
// a value pass through literally.
class TemplateLibrary {
public:
    static TemplateLibrary load_directory(const std::filesystem::path& dir);

    const PromptTemplate& get(TemplateId id) const;

    // Throws MissingBinding when a placeholder of the template has no binding.
    RenderedPrompt render(TemplateId id, const Bindings& bindings) const;

    RenderedPrompt render_analysis(const CodeTask& task, const Candidate& candidate,
                                   bool with_reference) const;
    // analysis_text must be non-empty; there is nothing to summarize otherwise.
    RenderedPrompt render_summarization(const std::string& analysis_text) const;
    RenderedPrompt render_fault_localization(const CodeTask& task,
                                             const Candidate& candidate,
                                             bool with_reference) const;
    RenderedPrompt render_vanilla(const CodeTask& task, const Candidate& candidate,
                                  bool graded, bool with_reference) const;

private:
    std::map<TemplateId, PromptTemplate> templates_;
};

}  // namespace codejudge
