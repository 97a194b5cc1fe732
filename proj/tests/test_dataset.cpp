#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "codejudge/dataset.hpp"
#include "codejudge/report.hpp"

using namespace codejudge;

namespace {

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("codejudge_ds_" + name);
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

const char* kTaskLine1 =
    R"({"task_id":"t1","language":"python","description":"sort things",)"
    R"("reference_code":"def f(): pass","candidates":[{"candidate_id":"c1",)"
    R"("code":"def f(): return 1","label_binary":true}]})";
const char* kTaskLine2 =
    R"({"task_id":"t2","language":"cpp","description":"reverse a list",)"
    R"("candidates":[{"candidate_id":"c1","code":"","label_binary":false}]})";

}  // namespace

TEST_CASE("well-formed two-line file loads two tasks") {
    const auto path = temp_file("ok.jsonl");
    write_file(path, std::string(kTaskLine1) + "\n" + kTaskLine2 + "\n");
    const auto tasks = load_dataset(path);
    REQUIRE(tasks.size() == 2);
    CHECK(tasks[0].task_id == "t1");
    CHECK(tasks[0].reference_code.has_value());
    CHECK_FALSE(tasks[1].reference_code.has_value());
    CHECK(tasks[1].candidates[0].code.empty());  // empty completions are data
    std::filesystem::remove(path);
}

TEST_CASE("truncated JSON reports the line number") {
    const auto path = temp_file("truncated.jsonl");
    write_file(path, std::string(kTaskLine1) + "\n" + R"({"task_id": "t2", "lang)");
    try {
        load_dataset(path);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
    }
    std::filesystem::remove(path);
}

TEST_CASE("mixing binary and graded labels is rejected") {
    const auto path = temp_file("mixed.jsonl");
    write_file(path,
               std::string(kTaskLine1) + "\n" +
                   R"({"task_id":"t2","language":"python","description":"d",)" +
                   R"("candidates":[{"candidate_id":"c1","code":"x","label_graded":3}]})" +
                   "\n");
    CHECK_THROWS_AS(load_dataset(path), MixedLabelKinds);
    std::filesystem::remove(path);
}

TEST_CASE("duplicate task ids are rejected") {
    const auto path = temp_file("dup.jsonl");
    write_file(path, std::string(kTaskLine1) + "\n" + kTaskLine1 + "\n");
    CHECK_THROWS_AS(load_dataset(path), DuplicateTaskId);
    std::filesystem::remove(path);
}

TEST_CASE("structural problems carry the offending line") {
    SUBCASE("both label kinds on one candidate") {
        const auto path = temp_file("bothlabels.jsonl");
        write_file(path,
                   R"({"task_id":"t","language":"py","description":"d","candidates":)"
                   R"([{"candidate_id":"c","code":"x","label_binary":true,"label_graded":2}]})"
                   "\n");
        CHECK_THROWS_AS(load_dataset(path), ParseError);
        std::filesystem::remove(path);
    }
    SUBCASE("graded label out of range") {
        const auto path = temp_file("range.jsonl");
        write_file(path,
                   R"({"task_id":"t","language":"py","description":"d","candidates":)"
                   R"([{"candidate_id":"c","code":"x","label_graded":4.5}]})"
                   "\n");
        CHECK_THROWS_AS(load_dataset(path), ParseError);
        std::filesystem::remove(path);
    }
    SUBCASE("empty description") {
        const auto path = temp_file("nodesc.jsonl");
        write_file(path,
                   R"({"task_id":"t","language":"py","description":"","candidates":)"
                   R"([{"candidate_id":"c","code":"x","label_binary":true}]})"
                   "\n");
        CHECK_THROWS_AS(load_dataset(path), ParseError);
        std::filesystem::remove(path);
    }
    SUBCASE("duplicate candidate ids within a task") {
        const auto path = temp_file("dupcand.jsonl");
        write_file(path,
                   R"({"task_id":"t","language":"py","description":"d","candidates":)"
                   R"([{"candidate_id":"c","code":"x","label_binary":true},)"
                   R"({"candidate_id":"c","code":"y","label_binary":false}]})"
                   "\n");
        CHECK_THROWS_AS(load_dataset(path), ParseError);
        std::filesystem::remove(path);
    }
}

TEST_CASE("missing file is a DatasetError") {
    CHECK_THROWS_AS(load_dataset("/we/never/created/this.jsonl"), DatasetError);
}

TEST_CASE("blank lines are skipped") {
    const auto path = temp_file("blank.jsonl");
    write_file(path, std::string("\n") + kTaskLine1 + "\n   \n" + kTaskLine2 + "\n\n");
    CHECK(load_dataset(path).size() == 2);
    std::filesystem::remove(path);
}

TEST_CASE("property: save then load is the identity on random datasets") {
    std::mt19937 rng(321);
    std::uniform_int_distribution<int> task_count(1, 6);
    std::uniform_int_distribution<int> candidate_count(1, 4);
    std::uniform_int_distribution<int> coin(0, 1);
    std::uniform_real_distribution<double> grade(0.0, 4.0);
    std::uniform_int_distribution<int> text_len(0, 30);
    std::uniform_int_distribution<int> ch(32, 126);

    auto random_text = [&](bool allow_empty) {
        std::string text;
        const int n = text_len(rng) + (allow_empty ? 0 : 1);
        for (int i = 0; i < n; ++i) text.push_back(static_cast<char>(ch(rng)));
        return text;
    };

    const auto path = temp_file("roundtrip.jsonl");
    for (int trial = 0; trial < 25; ++trial) {
        const bool binary = coin(rng) == 1;
        std::vector<CodeTask> tasks;
        const int n_tasks = task_count(rng);
        for (int t = 0; t < n_tasks; ++t) {
            CodeTask task;
            task.task_id = "t" + std::to_string(t);
            task.language = random_text(false);
            task.description = random_text(false);
            if (coin(rng) == 1) task.reference_code = random_text(true);
            const int n_candidates = candidate_count(rng);
            for (int c = 0; c < n_candidates; ++c) {
                Candidate candidate;
                candidate.candidate_id = "c" + std::to_string(c);
                candidate.code = random_text(true);
                if (binary) {
                    candidate.label = coin(rng) == 1 ? BinaryLabel::correct
                                                     : BinaryLabel::incorrect;
                } else {
                    candidate.label = GradedLabel{grade(rng)};
                }
                task.candidates.push_back(std::move(candidate));
            }
            tasks.push_back(std::move(task));
        }
        save_dataset(tasks, path);
        REQUIRE(load_dataset(path) == tasks);
    }
    std::filesystem::remove(path);
}

TEST_CASE("report and transcript IO errors") {
    Report report;
    report.config = nlohmann::ordered_json::object();
    CHECK_THROWS_AS(write_report(report, "/nonexistent-dir/report.json"), IoError);
    CHECK_THROWS_AS(write_transcripts({}, "/nonexistent-dir/transcripts.jsonl"), IoError);
    CHECK_THROWS_AS(load_transcripts("/nonexistent-dir/transcripts.jsonl"), IoError);
}

TEST_CASE("transcript records survive a write/load round trip") {
    TranscriptRecord record;
    record.task_id = "t";
    record.candidate_id = "c";
    record.run_index = 2;
    record.method = Method::fault_localization;
    record.with_reference = true;
    record.label_graded = 3.5;
    record.analysis_texts = {"first analysis"};
    record.response_texts = {"bad json", R"([{"inconsistency":"x","severity":"Major"}])"};

    const auto path = temp_file("transcripts.jsonl");
    write_transcripts({record}, path);
    const auto loaded = load_transcripts(path);
    REQUIRE(loaded.size() == 1);
    CHECK(loaded[0].task_id == "t");
    CHECK(loaded[0].run_index == 2);
    CHECK(loaded[0].method == Method::fault_localization);
    CHECK(loaded[0].with_reference);
    CHECK(loaded[0].label_graded == 3.5);
    CHECK_FALSE(loaded[0].label_binary.has_value());
    CHECK(loaded[0].analysis_texts == record.analysis_texts);
    CHECK(loaded[0].response_texts == record.response_texts);
    std::filesystem::remove(path);
}
