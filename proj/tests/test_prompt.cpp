#include <doctest.h>

#include <fstream>
#include <sstream>

#include "codejudge/prompt.hpp"

using namespace codejudge;

namespace {

TemplateLibrary library() {
    return TemplateLibrary::load_directory(CODEJUDGE_TEMPLATE_DIR);
}

// The fixed scenario frozen in the golden files.
CodeTask golden_task() {
    CodeTask task;
    task.task_id = "golden";
    task.language = "python";
    task.description =
        "Alphabetize letters in each word of a sentence, keeping the words and "
        "spaces in the same order.";
    task.reference_code =
        "def anti_shuffle(s):\n    return ' '.join([\n        "
        "''.join(sorted(list(i)))\n        for i in s.split(' ')\n    ])";
    task.candidates = {{"b",
                        "def anti_shuffle(s):\n    return ' '.join([\n        "
                        "sorted(list(i))\n        for i in s.split(' ')\n    ])",
                        BinaryLabel::incorrect}};
    return task;
}

const std::string kGoldenAnalysis =
    "The code snippet joins the sorted character lists without converting them "
    "back to strings, so it does not cover the required functionalities.";

std::string read_file(const std::string& path) {
    std::ifstream input(path, std::ios::binary);
    REQUIRE_MESSAGE(bool(input), "missing golden file: " << path);
    std::ostringstream buffer;
    buffer << input.rdbuf();
    return buffer.str();
}

std::string golden(const TemplateId id) {
    return read_file(std::string(CODEJUDGE_GOLDEN_DIR) + "/" + to_string(id) + ".golden.txt");
}

RenderedPrompt render_variant(const TemplateLibrary& lib, TemplateId id) {
    const auto task = golden_task();
    const auto& candidate = task.candidates.front();
    switch (id) {
        case TemplateId::analysis: return lib.render_analysis(task, candidate, false);
        case TemplateId::analysis_with_ref: return lib.render_analysis(task, candidate, true);
        case TemplateId::summarization: return lib.render_summarization(kGoldenAnalysis);
        case TemplateId::fault_localization:
            return lib.render_fault_localization(task, candidate, false);
        case TemplateId::fault_localization_with_ref:
            return lib.render_fault_localization(task, candidate, true);
        case TemplateId::vanilla_binary:
            return lib.render_vanilla(task, candidate, false, false);
        case TemplateId::vanilla_binary_with_ref:
            return lib.render_vanilla(task, candidate, false, true);
        case TemplateId::vanilla_graded:
            return lib.render_vanilla(task, candidate, true, false);
        case TemplateId::vanilla_graded_with_ref:
            return lib.render_vanilla(task, candidate, true, true);
    }
    return {};
}

bool contains(const std::string& text, const std::string& needle) {
    return text.find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("analysis prompt carries the three evaluation steps verbatim") {
    const auto lib = library();
    const auto prompt = render_variant(lib, TemplateId::analysis);
    CHECK(contains(prompt.text,
                   "Your task is to check if the code snippet covers the required "
                   "functionalities. Do not provide a corrected version."));
    CHECK(contains(prompt.text,
                   "1. Read the problem statement carefully and identify the required "
                   "functionalities of the implementation. You can refer to the example "
                   "to understand the problem better."));
    CHECK(contains(prompt.text,
                   "2. Read the code snippet and analyze its logic. Check if the code "
                   "snippet covers all the required functionalities of the problem."));
    CHECK(contains(prompt.text, "3. Finally, conclude your evaluation."));
    // {LANGUAGE} substituted.
    CHECK(contains(prompt.text, "addresses the problem in python."));
}

TEST_CASE("summarization prompt carries the exact output instruction") {
    const auto lib = library();
    const auto prompt = lib.render_summarization("The code is correct and covers all cases.");
    CHECK(contains(prompt.text,
                   "If the analysis believes that the code snippet is correct, output: "
                   "\"Yes\". Otherwise, output: \"No\"."));
    CHECK(contains(prompt.text, "Analysis Result:"));
}

TEST_CASE("fault-localization prompt embeds the 7-item taxonomy and both output shapes") {
    const auto lib = library();
    const auto prompt = render_variant(lib, TemplateId::fault_localization);
    CHECK(contains(prompt.text, "Taxonomy of Common Inconsistencies:"));
    CHECK(contains(prompt.text, "1. Missing dependency declarations: Negligible"));
    CHECK(contains(prompt.text, "2. No error messages for unexpected input cases: Negligible"));
    CHECK(contains(prompt.text, "3. Inefficiency, unnecessary statements: Negligible"));
    CHECK(contains(prompt.text, "4. Edge case not handled: Small"));
    CHECK(contains(prompt.text, "5. Logic error: Major"));
    CHECK(contains(prompt.text, "6. Function or variable not defined: Fatal"));
    CHECK(contains(prompt.text, "7. Code not completed: Fatal"));
    CHECK(contains(prompt.text,
                   R"([{"inconsistency": "None", "severity": "Negligible"}])"));
    CHECK(contains(prompt.text,
                   R"([{"inconsistency": "<inconsistency1>", "severity": "<severity1>"}, )"
                   R"({"inconsistency": "<inconsistency2>", "severity": "<severity2>"}, ...])"));
    CHECK(contains(prompt.text, "JSON output (a JSON list only):"));
}

TEST_CASE("vanilla prompts carry their anchor lines") {
    const auto lib = library();
    const auto binary = render_variant(lib, TemplateId::vanilla_binary);
    CHECK(contains(binary.text,
                   "Determine the correctness of the code snippet. Output Yes or No."));
    CHECK(contains(binary.text, "Answer(Yes or No only):"));

    const auto graded = render_variant(lib, TemplateId::vanilla_graded);
    CHECK(contains(graded.text, "0 means the code snippet is not helpful at all"));
    CHECK(contains(graded.text, "Helpfulness (0-4):"));
}

TEST_CASE("with-reference variants insert the reference block after the problem") {
    const auto lib = library();
    for (const auto id : {TemplateId::analysis_with_ref,
                          TemplateId::fault_localization_with_ref,
                          TemplateId::vanilla_binary_with_ref,
                          TemplateId::vanilla_graded_with_ref}) {
        const auto prompt = render_variant(lib, id);
        CAPTURE(to_string(id));
        const auto problem_pos = prompt.text.find("Alphabetize letters");
        const auto reference_pos = prompt.text.find("Reference Solution:");
        const auto code_pos = prompt.text.find("Code Snippet:");
        REQUIRE(problem_pos != std::string::npos);
        REQUIRE(reference_pos != std::string::npos);
        REQUIRE(code_pos != std::string::npos);
        CHECK(problem_pos < reference_pos);
        CHECK(reference_pos < code_pos);
    }
}

TEST_CASE("golden files: every variant matches byte for byte") {
    const auto lib = library();
    for (const auto id : all_template_ids()) {
        CAPTURE(to_string(id));
        CHECK(render_variant(lib, id).text == golden(id));
    }
}

TEST_CASE("rendering is deterministic") {
    const auto lib = library();
    for (const auto id : all_template_ids()) {
        CHECK(render_variant(lib, id).text == render_variant(lib, id).text);
    }
}

TEST_CASE("no placeholder survives rendering") {
    const auto lib = library();
    for (const auto id : all_template_ids()) {
        const auto prompt = render_variant(lib, id);
        for (const char* token : {"{LANGUAGE}", "{PROBLEM}", "{CODE}", "{REFERENCE}",
                                  "{ANALYSIS}"}) {
            CAPTURE(to_string(id));
            CHECK_FALSE(contains(prompt.text, token));
        }
    }
}

TEST_CASE("missing bindings are errors") {
    const auto lib = library();
    auto task = golden_task();
    const auto candidate = task.candidates.front();
    task.reference_code.reset();
    CHECK_THROWS_AS(lib.render_analysis(task, candidate, true), MissingBinding);
    CHECK_THROWS_AS(lib.render_fault_localization(task, candidate, true), MissingBinding);
    CHECK_THROWS_AS(lib.render_vanilla(task, candidate, true, true), MissingBinding);
    CHECK_THROWS_AS(lib.render_summarization(""), MissingBinding);
}

TEST_CASE("substitution is literal: braces and quotes pass through untouched") {
    const auto lib = library();
    const std::string tricky = R"(it prints {"a": [1, 2]} and "quotes" and {CODE})";
    const auto prompt = lib.render_summarization(tricky);
    // Inserted values are never rescanned for placeholders.
    CHECK(contains(prompt.text, tricky));
}

TEST_CASE("bindings used for rendering are recorded") {
    const auto lib = library();
    const auto prompt = render_variant(lib, TemplateId::analysis);
    CHECK(prompt.bindings.at("LANGUAGE") == "python");
    CHECK(prompt.bindings.count("PROBLEM") == 1);
    CHECK(prompt.bindings.count("CODE") == 1);
    CHECK(prompt.bindings.count("REFERENCE") == 0);
}

TEST_CASE("loading a directory with a defective template fails") {
    CHECK_THROWS_AS(TemplateLibrary::load_directory("/nonexistent-template-dir"),
                    TemplateError);
}
