#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <thread>

#include <nlohmann/json.hpp>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "codejudge/gateway.hpp"

using namespace codejudge;
using nlohmann::json;

namespace {

ModelConfig test_config() {
    ModelConfig config;
    config.api_key_env = "";  // most tests run without auth
    config.max_retries = 3;
    config.retry_backoff = std::chrono::milliseconds(1);
    config.request_timeout = std::chrono::milliseconds(5000);
    return config;
}

CompletionRequest request_for(const std::string& text, ModelConfig config = test_config(),
                              std::string tag = "tag") {
    RenderedPrompt prompt;
    prompt.template_id = TemplateId::analysis;
    prompt.text = text;
    return {std::move(prompt), std::move(config), std::move(tag)};
}

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("codejudge_gw_" + name);
}

}  // namespace

TEST_CASE("model config validation") {
    CHECK_NOTHROW(validate_model_config(test_config()));
    auto bad = test_config();
    bad.temperature = -0.1;
    CHECK_THROWS_AS(validate_model_config(bad), ConfigError);
    bad = test_config();
    bad.top_p = 0.0;
    CHECK_THROWS_AS(validate_model_config(bad), ConfigError);
    bad = test_config();
    bad.top_p = 1.5;
    CHECK_THROWS_AS(validate_model_config(bad), ConfigError);
    bad = test_config();
    bad.max_output_tokens = 0;
    CHECK_THROWS_AS(validate_model_config(bad), ConfigError);
}

TEST_CASE("fingerprints are stable and distinct") {
    CHECK(fingerprint_hex("p") == fingerprint_hex("p"));
    CHECK(fingerprint_hex("p") != fingerprint_hex("q"));
    CHECK(fingerprint_hex("p").size() == 16);
    // FNV-1a of the empty string, a fixed reference point.
    CHECK(fingerprint("") == 0xcbf29ce484222325ull);
}

TEST_CASE("mock: scripted passthrough") {
    auto mock = std::make_shared<MockTransport>();
    mock->script("p", "Yes");
    Gateway gateway(mock);
    const auto result = gateway.complete(request_for("p"));
    CHECK(result.text == "Yes");
    CHECK(result.backend == BackendKind::mock);
    CHECK(result.attempt_count == 1);
}

TEST_CASE("mock: single replies repeat, sequences run in order then run dry") {
    auto mock = std::make_shared<MockTransport>();
    mock->script("single", "same");
    mock->script_sequence("seq", {MockAction::reply("Yes"), MockAction::reply("No")});
    Gateway gateway(mock);

    CHECK(gateway.complete(request_for("single")).text == "same");
    CHECK(gateway.complete(request_for("single")).text == "same");

    CHECK(gateway.complete(request_for("seq")).text == "Yes");
    CHECK(gateway.complete(request_for("seq")).text == "No");
    CHECK_THROWS_AS(gateway.complete(request_for("seq")), UnscriptedPrompt);
}

TEST_CASE("mock: unscripted prompts raise") {
    Gateway gateway(std::make_shared<MockTransport>());
    CHECK_THROWS_AS(gateway.complete(request_for("unknown")), UnscriptedPrompt);
}

TEST_CASE("retries: 429 twice then success means three attempts") {
    auto mock = std::make_shared<MockTransport>();
    mock->script_sequence("p", {MockAction::fail_status(429), MockAction::fail_status(429),
                                MockAction::reply("Yes")});
    Gateway gateway(mock);
    const auto result = gateway.complete(request_for("p"));
    CHECK(result.text == "Yes");
    CHECK(result.attempt_count == 3);
}

TEST_CASE("retries: 401 is not retried") {
    auto mock = std::make_shared<MockTransport>();
    mock->script_sequence("p", {MockAction::fail_status(401), MockAction::reply("Yes")});
    Gateway gateway(mock);
    try {
        gateway.complete(request_for("p"));
        FAIL("expected AuthError");
    } catch (const AuthError& e) {
        CHECK(e.attempt_count() == 1);
    }
    CHECK(mock->total_calls() == 1);
}

TEST_CASE("retries: transient failures exhaust into BackendExhausted") {
    auto mock = std::make_shared<MockTransport>();
    mock->script_fingerprint(fingerprint_hex("p"), {MockAction::fail_status(503)},
                             /*repeat_single=*/true);
    Gateway gateway(mock);
    auto config = test_config();
    config.max_retries = 2;
    try {
        gateway.complete(request_for("p", config));
        FAIL("expected BackendExhausted");
    } catch (const BackendExhausted& e) {
        CHECK(e.attempt_count() == 3);  // <= max_retries + 1
    }
    CHECK(mock->total_calls() == 3);
}

TEST_CASE("property: 4xx other than 429 is never retried") {
    std::mt19937 rng(11);
    std::uniform_int_distribution<int> status_dist(400, 499);
    int checked = 0;
    while (checked < 60) {
        const int status = status_dist(rng);
        if (status == 429) continue;
        auto mock = std::make_shared<MockTransport>();
        mock->script_fingerprint(fingerprint_hex("p"), {MockAction::fail_status(status)},
                                 /*repeat_single=*/true);
        Gateway gateway(mock);
        CHECK_THROWS_AS(gateway.complete(request_for("p")), GatewayError);
        CHECK(mock->total_calls() == 1);
        ++checked;
    }
}

TEST_CASE("status classification") {
    CHECK(classify_status(429) == FailureClass::transient);
    CHECK(classify_status(500) == FailureClass::transient);
    CHECK(classify_status(503) == FailureClass::transient);
    CHECK(classify_status(401) == FailureClass::auth);
    CHECK(classify_status(403) == FailureClass::auth);
    CHECK(classify_status(400) == FailureClass::permanent);
    CHECK(classify_status(404) == FailureClass::permanent);
    CHECK(classify_status(0) == FailureClass::transient);  // connect/timeout
}

TEST_CASE("batch: input order, isolation and bounded concurrency") {
    auto mock = std::make_shared<MockTransport>();
    Gateway gateway(mock);

    SUBCASE("five requests over limit two keep input order") {
        std::vector<CompletionRequest> requests;
        for (int i = 0; i < 5; ++i) {
            const std::string text = "p" + std::to_string(i);
            mock->script(text, "r" + std::to_string(i));
            requests.push_back(request_for(text, test_config(), "t" + std::to_string(i)));
        }
        const auto items = gateway.complete_batch(requests, 2);
        REQUIRE(items.size() == 5);
        for (int i = 0; i < 5; ++i) {
            CHECK(items[static_cast<std::size_t>(i)].tag == "t" + std::to_string(i));
            REQUIRE(items[static_cast<std::size_t>(i)].ok());
            CHECK(items[static_cast<std::size_t>(i)].result->text ==
                  "r" + std::to_string(i));
        }
    }

    SUBCASE("a permanently failing item does not abort the batch") {
        mock->script("a", "ok-a");
        mock->script_fingerprint(fingerprint_hex("b"), {MockAction::fail_status(400)},
                                 /*repeat_single=*/true);
        mock->script("c", "ok-c");
        const auto items = gateway.complete_batch(
            {request_for("a"), request_for("b"), request_for("c")}, 2);
        REQUIRE(items.size() == 3);
        CHECK(items[0].ok());
        CHECK_FALSE(items[1].ok());
        CHECK(items[1].error.has_value());
        CHECK(items[2].ok());
    }

    SUBCASE("in-flight high-water respects the limit") {
        mock->set_call_latency(std::chrono::milliseconds(5));
        std::vector<CompletionRequest> requests;
        for (int i = 0; i < 64; ++i) {
            const std::string text = "hw" + std::to_string(i);
            mock->script(text, "x");
            requests.push_back(request_for(text));
        }
        gateway.complete_batch(requests, 4);
        CHECK(mock->high_water_in_flight() <= 4);
        CHECK(mock->high_water_in_flight() >= 2);  // overlap actually happened
    }

    SUBCASE("limit below one is rejected") {
        CHECK_THROWS_AS(gateway.complete_batch({}, 0), ConfigError);
    }
}

TEST_CASE("request body carries the prompt text byte for byte") {
    const std::string tricky = "line1\nline2 \"quoted\" {PROBLEM} \xF0\x9F\x98\x80 tab\t";
    auto request = request_for(tricky);
    request.config.model_name = "some-model";
    const std::string body = build_chat_request_body(request);
    const json parsed = json::parse(body);
    CHECK(parsed["model"] == "some-model");
    REQUIRE(parsed["messages"].size() == 1);
    CHECK(parsed["messages"][0]["role"] == "user");
    CHECK(parsed["messages"][0]["content"].get<std::string>() == tricky);
    CHECK(parsed["temperature"].get<double>() == request.config.temperature);
    CHECK(parsed["top_p"].get<double>() == request.config.top_p);
    CHECK(parsed["max_tokens"].get<int>() == request.config.max_output_tokens);
}

TEST_CASE("assistant message extraction") {
    CHECK(extract_assistant_message(
              R"({"choices":[{"message":{"role":"assistant","content":"hi"}}]})") == "hi");
    CHECK_FALSE(extract_assistant_message(R"({"choices":[]})").has_value());
    CHECK_FALSE(extract_assistant_message(R"({"error":"nope"})").has_value());
    CHECK_FALSE(extract_assistant_message("not json").has_value());
    CHECK_FALSE(extract_assistant_message(
                    R"({"choices":[{"message":{"content":42}}]})").has_value());
}

TEST_CASE("mock script files load replies, sequences and failures") {
    const auto path = temp_file("script.json");
    {
        std::ofstream out(path);
        json script;
        script["responses"] = json::array();
        script["responses"].push_back(
            {{"fingerprint", fingerprint_hex("a")}, {"reply", "Yes"}});
        script["responses"].push_back(
            {{"fingerprint", fingerprint_hex("b")},
             {"sequence", json::array({"first", json{{"status", 429}}, "second"})}});
        out << script.dump();
    }
    auto mock = MockTransport::from_script_file(path);
    Gateway gateway(mock);
    CHECK(gateway.complete(request_for("a")).text == "Yes");
    CHECK(gateway.complete(request_for("b")).text == "first");
    // The scripted 429 burns one retry, then "second" comes through.
    const auto second = gateway.complete(request_for("b"));
    CHECK(second.text == "second");
    CHECK(second.attempt_count == 2);
    std::filesystem::remove(path);
}

TEST_CASE("mock script file rejects malformed content") {
    const auto path = temp_file("bad_script.json");
    {
        std::ofstream out(path);
        out << "{\"responses\": [{\"reply\": \"no fingerprint\"}]}";
    }
    CHECK_THROWS_AS(MockTransport::from_script_file(path), ConfigError);
    std::filesystem::remove(path);
}

// ---------------------------------------------------------------------------
// Wire-format tests against an in-process OpenAI-compatible server.

namespace {

struct LocalServer {
    httplib::Server server;
    int port = 0;
    std::thread thread;
    std::atomic<int> hits{0};

    explicit LocalServer(const std::function<void(const httplib::Request&,
                                                  httplib::Response&, int)>& handler) {
        server.Post("/v1/chat/completions",
                    [this, handler](const httplib::Request& request,
                                    httplib::Response& response) {
                        handler(request, response, hits.fetch_add(1));
                    });
        port = server.bind_to_any_port("127.0.0.1");
        REQUIRE(port > 0);
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }

    ~LocalServer() {
        server.stop();
        thread.join();
    }

    std::string endpoint() const {
        return "http://127.0.0.1:" + std::to_string(port) + "/v1";
    }
};

void reply_with(httplib::Response& response, const std::string& content) {
    json body;
    body["choices"] = json::array(
        {{{"message", {{"role", "assistant"}, {"content", content}}}}});
    response.set_content(body.dump(), "application/json");
}

}  // namespace

TEST_CASE("http: happy path echoes the prompt through the wire format") {
    std::string seen_auth;
    std::string seen_content;
    LocalServer server([&](const httplib::Request& request, httplib::Response& response,
                           int) {
        seen_auth = request.get_header_value("Authorization");
        const json body = json::parse(request.body);
        seen_content = body["messages"][0]["content"].get<std::string>();
        reply_with(response, "echo: " + seen_content);
    });

    setenv("CODEJUDGE_TEST_KEY", "sekrit", 1);
    auto config = test_config();
    config.endpoint_url = server.endpoint();
    config.api_key_env = "CODEJUDGE_TEST_KEY";

    Gateway gateway(std::make_shared<HttpTransport>());
    const std::string prompt = "judge this\ncode {x: [1]} please";
    const auto result = gateway.complete(request_for(prompt, config));
    CHECK(result.text == "echo: " + prompt);
    CHECK(result.backend == BackendKind::http);
    CHECK(seen_auth == "Bearer sekrit");
    CHECK(seen_content == prompt);
}

TEST_CASE("http: 429 then 200 retries transparently") {
    LocalServer server([&](const httplib::Request&, httplib::Response& response,
                           int hit) {
        if (hit == 0) {
            response.status = 429;
            response.set_content("slow down", "text/plain");
        } else {
            reply_with(response, "ok");
        }
    });
    auto config = test_config();
    config.endpoint_url = server.endpoint();
    Gateway gateway(std::make_shared<HttpTransport>());
    const auto result = gateway.complete(request_for("p", config));
    CHECK(result.text == "ok");
    CHECK(result.attempt_count == 2);
}

TEST_CASE("http: 401 raises AuthError without retrying") {
    LocalServer server([&](const httplib::Request&, httplib::Response& response, int) {
        response.status = 401;
        response.set_content("{\"error\": \"bad key\"}", "application/json");
    });
    auto config = test_config();
    config.endpoint_url = server.endpoint();
    Gateway gateway(std::make_shared<HttpTransport>());
    CHECK_THROWS_AS(gateway.complete(request_for("p", config)), AuthError);
    CHECK(server.hits.load() == 1);
}

TEST_CASE("http: payload without assistant message is MalformedResponse") {
    LocalServer server([&](const httplib::Request&, httplib::Response& response, int) {
        response.set_content("{\"choices\": []}", "application/json");
    });
    auto config = test_config();
    config.endpoint_url = server.endpoint();
    Gateway gateway(std::make_shared<HttpTransport>());
    CHECK_THROWS_AS(gateway.complete(request_for("p", config)), MalformedResponse);
}

TEST_CASE("http: missing API key env var is an auth failure before any request") {
    LocalServer server([&](const httplib::Request&, httplib::Response& response, int) {
        reply_with(response, "should never be reached");
    });
    auto config = test_config();
    config.endpoint_url = server.endpoint();
    config.api_key_env = "CODEJUDGE_DEFINITELY_UNSET_KEY";
    unsetenv("CODEJUDGE_DEFINITELY_UNSET_KEY");
    Gateway gateway(std::make_shared<HttpTransport>());
    CHECK_THROWS_AS(gateway.complete(request_for("p", config)), AuthError);
    CHECK(server.hits.load() == 0);
}

TEST_CASE("http: invalid endpoint URL is rejected, unroutable endpoint exhausts") {
    auto config = test_config();
    config.endpoint_url = "not a url";
    Gateway gateway(std::make_shared<HttpTransport>());
    CHECK_THROWS_AS(gateway.complete(request_for("p", config)), RequestRejected);

    config.endpoint_url = "http://127.0.0.1:1/v1";  // nothing listens here
    config.max_retries = 1;
    config.request_timeout = std::chrono::milliseconds(250);
    CHECK_THROWS_AS(gateway.complete(request_for("p", config)), BackendExhausted);
}
