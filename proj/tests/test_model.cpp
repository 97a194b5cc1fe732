#include <doctest.h>

#include "codejudge/model.hpp"

using namespace codejudge;

namespace {

CodeTask make_task() {
    CodeTask task;
    task.task_id = "t1";
    task.language = "python";
    task.description = "sort letters in each word";
    task.reference_code = "def solve(s): ...";
    task.candidates = {{"c1", "def solve(s): pass", BinaryLabel::incorrect}};
    return task;
}

}  // namespace

TEST_CASE("validate_task accepts a well-formed task with reference") {
    const auto outcome = validate_task(make_task(), {Method::analyze_summarize, true});
    CHECK(outcome.ok());
}

TEST_CASE("validate_task flags a missing reference when the mode needs one") {
    auto task = make_task();
    task.reference_code.reset();
    const auto outcome = validate_task(task, {Method::analyze_summarize, true});
    REQUIRE_FALSE(outcome.ok());
    CHECK(outcome.violations.front().field == "reference_code");

    // The same task is fine without the reference requirement.
    CHECK(validate_task(task, {Method::analyze_summarize, false}).ok());
}

TEST_CASE("validate_task flags duplicate candidate ids") {
    auto task = make_task();
    task.candidates.push_back({"c1", "other code", BinaryLabel::correct});
    const auto outcome = validate_task(task, {Method::analyze_summarize, false});
    REQUIRE_FALSE(outcome.ok());
    CHECK(outcome.violations.front().field == "candidate_id");
}

TEST_CASE("validate_task flags empty description and empty candidate list") {
    auto task = make_task();
    task.description.clear();
    task.candidates.clear();
    const auto outcome = validate_task(task, {Method::analyze_summarize, false});
    CHECK(outcome.violations.size() == 2);
}

TEST_CASE("empty candidate code is valid input, not a violation") {
    auto task = make_task();
    task.candidates[0].code.clear();
    CHECK(validate_task(task, {Method::analyze_summarize, false}).ok());
}

TEST_CASE("ground-truth label holds exactly one kind") {
    GroundTruthLabel binary = BinaryLabel::correct;
    GroundTruthLabel graded = GradedLabel{3.5};
    CHECK(is_binary(binary));
    CHECK_FALSE(is_binary(graded));
    CHECK(std::holds_alternative<BinaryLabel>(binary));
    CHECK_FALSE(std::holds_alternative<GradedLabel>(binary));
}

TEST_CASE("severity levels are totally ordered") {
    CHECK(SeverityLevel::negligible < SeverityLevel::small);
    CHECK(SeverityLevel::small < SeverityLevel::major);
    CHECK(SeverityLevel::major < SeverityLevel::fatal);
}

TEST_CASE("severity names round-trip and reject unknown strings") {
    for (const auto level : {SeverityLevel::negligible, SeverityLevel::small,
                             SeverityLevel::major, SeverityLevel::fatal}) {
        CHECK(severity_from_string(to_string(level)) == level);
    }
    CHECK(severity_from_string("MAJOR") == SeverityLevel::major);
    CHECK(severity_from_string("  fatal ") == SeverityLevel::fatal);
    CHECK_FALSE(severity_from_string("Catastrophic").has_value());
    CHECK_FALSE(severity_from_string("").has_value());
}

TEST_CASE("method names round-trip") {
    for (const auto method : {Method::analyze_summarize, Method::fault_localization,
                              Method::vanilla_binary, Method::vanilla_graded}) {
        CHECK(method_from_string(to_string(method)) == method);
    }
    CHECK_FALSE(method_from_string("pass-at-k").has_value());
}
