#include "codejudge/prompt.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace codejudge {

namespace {

const std::vector<std::string> kKnownPlaceholders = {
    "LANGUAGE", "PROBLEM", "CODE", "REFERENCE", "ANALYSIS"};

// Scans body for {NAME} tokens where NAME is one of the known placeholders.
// Other brace content (JSON literals in the fault-localization body, code in
// substituted values) is not a placeholder.
std::set<std::string> placeholders_in(const std::string& body) {
    std::set<std::string> found;
    for (std::size_t pos = body.find('{'); pos != std::string::npos;
         pos = body.find('{', pos + 1)) {
        for (const auto& name : kKnownPlaceholders) {
            const std::string token = "{" + name + "}";
            if (body.compare(pos, token.size(), token) == 0) {
                found.insert(name);
                break;
            }
        }
    }
    return found;
}

Bindings base_bindings(const CodeTask& task, const Candidate& candidate,
                       bool with_reference) {
    Bindings bindings = {{"PROBLEM", task.description}, {"CODE", candidate.code}};
    if (with_reference && task.reference_code.has_value()) {
        bindings.emplace("REFERENCE", *task.reference_code);
    }
    return bindings;
}

}  // namespace

std::string to_string(TemplateId id) {
    switch (id) {
        case TemplateId::analysis: return "analysis";
        case TemplateId::analysis_with_ref: return "analysis_with_ref";
        case TemplateId::summarization: return "summarization";
        case TemplateId::fault_localization: return "fault_localization";
        case TemplateId::fault_localization_with_ref: return "fault_localization_with_ref";
        case TemplateId::vanilla_binary: return "vanilla_binary";
        case TemplateId::vanilla_binary_with_ref: return "vanilla_binary_with_ref";
        case TemplateId::vanilla_graded: return "vanilla_graded";
        case TemplateId::vanilla_graded_with_ref: return "vanilla_graded_with_ref";
    }
    return "analysis";
}

const std::vector<TemplateId>& all_template_ids() {
    static const std::vector<TemplateId> ids = {
        TemplateId::analysis,
        TemplateId::analysis_with_ref,
        TemplateId::summarization,
        TemplateId::fault_localization,
        TemplateId::fault_localization_with_ref,
        TemplateId::vanilla_binary,
        TemplateId::vanilla_binary_with_ref,
        TemplateId::vanilla_graded,
        TemplateId::vanilla_graded_with_ref,
    };
    return ids;
}

const std::vector<std::string>& required_placeholders(TemplateId id) {
    static const std::vector<std::string> analysis = {"LANGUAGE", "PROBLEM", "CODE"};
    static const std::vector<std::string> analysis_ref = {"LANGUAGE", "PROBLEM",
                                                          "REFERENCE", "CODE"};
    static const std::vector<std::string> summarization = {"ANALYSIS"};
    static const std::vector<std::string> problem_code = {"PROBLEM", "CODE"};
    static const std::vector<std::string> problem_ref_code = {"PROBLEM", "REFERENCE",
                                                              "CODE"};
    switch (id) {
        case TemplateId::analysis: return analysis;
        case TemplateId::analysis_with_ref: return analysis_ref;
        case TemplateId::summarization: return summarization;
        case TemplateId::fault_localization: return problem_code;
        case TemplateId::fault_localization_with_ref: return problem_ref_code;
        case TemplateId::vanilla_binary: return problem_code;
        case TemplateId::vanilla_binary_with_ref: return problem_ref_code;
        case TemplateId::vanilla_graded: return problem_code;
        case TemplateId::vanilla_graded_with_ref: return problem_ref_code;
    }
    return problem_code;
}

TemplateLibrary TemplateLibrary::load_directory(const std::filesystem::path& dir) {
    TemplateLibrary library;
    for (TemplateId id : all_template_ids()) {
        const auto path = dir / (to_string(id) + ".txt");
        std::ifstream input(path, std::ios::binary);
        if (!input) {
            throw TemplateError("cannot open template file: " + path.string());
        }
        std::ostringstream buffer;
        buffer << input.rdbuf();
        PromptTemplate tmpl{id, buffer.str()};

        const auto found = placeholders_in(tmpl.body);
        const auto& required = required_placeholders(id);
        const std::set<std::string> expected(required.begin(), required.end());
        if (found != expected) {
            throw TemplateError("template " + to_string(id) +
                                " does not carry exactly its declared placeholders");
        }
        library.templates_.emplace(id, std::move(tmpl));
    }
    return library;
}

const PromptTemplate& TemplateLibrary::get(TemplateId id) const {
    return templates_.at(id);
}

RenderedPrompt TemplateLibrary::render(TemplateId id, const Bindings& bindings) const {
    const PromptTemplate& tmpl = get(id);

    RenderedPrompt rendered;
    rendered.template_id = id;
    rendered.text.reserve(tmpl.body.size());

    std::size_t pos = 0;
    while (pos < tmpl.body.size()) {
        if (tmpl.body[pos] != '{') {
            rendered.text.push_back(tmpl.body[pos]);
            ++pos;
            continue;
        }
        bool substituted = false;
        for (const auto& name : kKnownPlaceholders) {
            const std::string token = "{" + name + "}";
            if (tmpl.body.compare(pos, token.size(), token) != 0) continue;
            const auto binding = bindings.find(name);
            if (binding == bindings.end()) {
                throw MissingBinding("no binding for {" + name + "} in template " +
                                     to_string(id));
            }
            rendered.text.append(binding->second);
            rendered.bindings[name] = binding->second;
            pos += token.size();
            substituted = true;
            break;
        }
        if (!substituted) {
            rendered.text.push_back(tmpl.body[pos]);
            ++pos;
        }
    }
    return rendered;
}

RenderedPrompt TemplateLibrary::render_analysis(const CodeTask& task,
                                                const Candidate& candidate,
                                                bool with_reference) const {
    Bindings bindings = base_bindings(task, candidate, with_reference);
    bindings.emplace("LANGUAGE", task.language);
    return render(with_reference ? TemplateId::analysis_with_ref : TemplateId::analysis,
                  bindings);
}

RenderedPrompt TemplateLibrary::render_summarization(const std::string& analysis_text) const {
    if (analysis_text.empty()) {
        throw MissingBinding("analysis text is empty; nothing to summarize");
    }
    return render(TemplateId::summarization, {{"ANALYSIS", analysis_text}});
}

RenderedPrompt TemplateLibrary::render_fault_localization(const CodeTask& task,
                                                          const Candidate& candidate,
                                                          bool with_reference) const {
    return render(with_reference ? TemplateId::fault_localization_with_ref
                                 : TemplateId::fault_localization,
                  base_bindings(task, candidate, with_reference));
}

RenderedPrompt TemplateLibrary::render_vanilla(const CodeTask& task,
                                               const Candidate& candidate, bool graded,
                                               bool with_reference) const {
    TemplateId id;
    if (graded) {
        id = with_reference ? TemplateId::vanilla_graded_with_ref
                            : TemplateId::vanilla_graded;
    } else {
        id = with_reference ? TemplateId::vanilla_binary_with_ref
                            : TemplateId::vanilla_binary;
    }
    return render(id, base_bindings(task, candidate, with_reference));
}

}  // namespace codejudge
