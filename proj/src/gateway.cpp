#include "codejudge/gateway.hpp"

#include <cstdlib>
#include <fstream>
#include <thread>

#include <nlohmann/json.hpp>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

namespace codejudge {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

struct SplitUrl {
    std::string base;         // scheme://host[:port]
    std::string path_prefix;  // possibly empty, no trailing slash
};

std::optional<SplitUrl> split_endpoint_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) return std::nullopt;
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
        return SplitUrl{url, ""};
    }
    SplitUrl split{url.substr(0, path_start), url.substr(path_start)};
    while (!split.path_prefix.empty() && split.path_prefix.back() == '/') {
        split.path_prefix.pop_back();
    }
    return split;
}

std::optional<std::pair<std::string, int>> proxy_from_env(bool https) {
    const char* names[] = {https ? "https_proxy" : "http_proxy",
                           https ? "HTTPS_PROXY" : "HTTP_PROXY"};
    for (const char* name : names) {
        const char* value = std::getenv(name);
        if (value == nullptr || *value == '\0') continue;
        std::string proxy(value);
        const auto scheme_end = proxy.find("://");
        if (scheme_end != std::string::npos) proxy = proxy.substr(scheme_end + 3);
        const auto colon = proxy.rfind(':');
        if (colon == std::string::npos) continue;
        const std::string host = proxy.substr(0, colon);
        const int port = std::atoi(proxy.c_str() + colon + 1);
        if (!host.empty() && port > 0) return std::make_pair(host, port);
    }
    return std::nullopt;
}

[[noreturn]] void throw_for(const TransportFailure& failure, int attempts) {
    const std::string detail = failure.detail.empty()
                                   ? "backend failure (status " +
                                         std::to_string(failure.http_status) + ")"
                                   : failure.detail;
    switch (failure.cls) {
        case FailureClass::auth: throw AuthError(detail, attempts);
        case FailureClass::malformed: throw MalformedResponse(detail, attempts);
        case FailureClass::unscripted: throw UnscriptedPrompt(detail, attempts);
        case FailureClass::permanent: throw RequestRejected(detail, attempts);
        case FailureClass::transient:
            throw BackendExhausted(detail + " (after " + std::to_string(attempts) +
                                       " attempts)",
                                   attempts);
    }
    throw GatewayError(detail, attempts);
}

}  // namespace

void validate_model_config(const ModelConfig& config) {
    if (config.temperature < 0.0) {
        throw ConfigError("temperature must be >= 0");
    }
    if (config.top_p <= 0.0 || config.top_p > 1.0) {
        throw ConfigError("top_p must lie in (0, 1]");
    }
    if (config.max_output_tokens <= 0) {
        throw ConfigError("max_output_tokens must be positive");
    }
    if (config.max_retries < 0) {
        throw ConfigError("max_retries must be >= 0");
    }
}

std::string to_string(BackendKind kind) {
    return kind == BackendKind::http ? "http" : "mock";
}

FailureClass classify_status(int http_status) {
    if (http_status == 401 || http_status == 403) return FailureClass::auth;
    if (http_status == 429) return FailureClass::transient;
    if (http_status >= 500 && http_status <= 599) return FailureClass::transient;
    if (http_status >= 400 && http_status <= 499) return FailureClass::permanent;
    return FailureClass::transient;  // 0: timeout / connection failure
}

std::string build_chat_request_body(const CompletionRequest& request) {
    ordered_json body;
    body["model"] = request.config.model_name;
    body["messages"] = ordered_json::array(
        {{{"role", "user"}, {"content", request.prompt.text}}});
    body["temperature"] = request.config.temperature;
    body["top_p"] = request.config.top_p;
    body["max_tokens"] = request.config.max_output_tokens;
    return body.dump();
}

std::optional<std::string> extract_assistant_message(const std::string& response_body) {
    const json parsed = json::parse(response_body, nullptr, /*allow_exceptions=*/false);
    if (parsed.is_discarded()) return std::nullopt;
    const auto choices = parsed.find("choices");
    if (choices == parsed.end() || !choices->is_array() || choices->empty()) {
        return std::nullopt;
    }
    const auto& first = (*choices)[0];
    if (!first.is_object() || !first.contains("message")) return std::nullopt;
    const auto& message = first["message"];
    if (!message.is_object() || !message.contains("content") ||
        !message["content"].is_string()) {
        return std::nullopt;
    }
    return message["content"].get<std::string>();
}

TransportOutcome HttpTransport::attempt(const CompletionRequest& request) {
    const auto split = split_endpoint_url(request.config.endpoint_url);
    if (!split.has_value()) {
        return {std::nullopt,
                TransportFailure{FailureClass::permanent, 0,
                                 "invalid endpoint URL: " + request.config.endpoint_url}};
    }

    httplib::Client client(split->base);
    const auto timeout = request.config.request_timeout;
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);

    const bool https = split->base.rfind("https", 0) == 0;
    if (const auto proxy = proxy_from_env(https)) {
        client.set_proxy(proxy->first, proxy->second);
    }

    httplib::Headers headers = {{"Content-Type", "application/json"}};
    if (!request.config.api_key_env.empty()) {
        const char* key = std::getenv(request.config.api_key_env.c_str());
        if (key == nullptr || *key == '\0') {
            return {std::nullopt,
                    TransportFailure{FailureClass::auth, 0,
                                     "environment variable " + request.config.api_key_env +
                                         " is not set"}};
        }
        headers.emplace("Authorization", std::string("Bearer ") + key);
    }

    const auto result = client.Post(split->path_prefix + "/chat/completions", headers,
                                    build_chat_request_body(request), "application/json");
    if (!result) {
        return {std::nullopt,
                TransportFailure{FailureClass::transient, 0,
                                 "connection failure: " + httplib::to_string(result.error())}};
    }
    if (result->status != 200) {
        return {std::nullopt,
                TransportFailure{classify_status(result->status), result->status,
                                 "HTTP " + std::to_string(result->status) + ": " +
                                     result->body.substr(0, 200)}};
    }
    auto text = extract_assistant_message(result->body);
    if (!text.has_value()) {
        return {std::nullopt,
                TransportFailure{FailureClass::malformed, 200,
                                 "response payload lacks an assistant message"}};
    }
    return {std::move(text), std::nullopt};
}

std::uint64_t fingerprint(std::string_view text) {
    // FNV-1a, 64-bit: stable across runs and platforms, unlike std::hash.
    std::uint64_t hash = 0xcbf29ce484222325ull;
    for (const char c : text) {
        hash ^= static_cast<unsigned char>(c);
        hash *= 0x100000001b3ull;
    }
    return hash;
}

std::string fingerprint_hex(std::string_view text) {
    static const char digits[] = "0123456789abcdef";
    std::uint64_t value = fingerprint(text);
    std::string hex(16, '0');
    for (int i = 15; i >= 0; --i) {
        hex[static_cast<std::size_t>(i)] = digits[value & 0xf];
        value >>= 4;
    }
    return hex;
}

void MockTransport::script(std::string_view prompt_text, std::string reply) {
    script_fingerprint(fingerprint_hex(prompt_text),
                       {MockAction::reply(std::move(reply))}, /*repeat_single=*/true);
}

void MockTransport::script_sequence(std::string_view prompt_text,
                                    std::vector<MockAction> actions) {
    script_fingerprint(fingerprint_hex(prompt_text), std::move(actions),
                       /*repeat_single=*/false);
}

void MockTransport::script_fingerprint(const std::string& fingerprint_hex,
                                       std::vector<MockAction> actions,
                                       bool repeat_single) {
    std::lock_guard lock(mutex_);
    scripts_[fingerprint_hex] = Script{std::move(actions), repeat_single, 0};
}

TransportOutcome MockTransport::attempt(const CompletionRequest& request) {
    total_calls_.fetch_add(1);
    const int current = in_flight_.fetch_add(1) + 1;
    int expected = high_water_.load();
    while (current > expected &&
           !high_water_.compare_exchange_weak(expected, current)) {
    }

    if (call_latency_.count() > 0) {
        std::this_thread::sleep_for(call_latency_);
    }

    TransportOutcome outcome;
    {
        std::lock_guard lock(mutex_);
        const auto it = scripts_.find(fingerprint_hex(request.prompt.text));
        if (it == scripts_.end()) {
            outcome.failure = TransportFailure{
                FailureClass::unscripted, 0,
                "no script for prompt fingerprint " + fingerprint_hex(request.prompt.text)};
        } else {
            Script& script = it->second;
            if (script.next >= script.actions.size()) {
                if (script.repeat_single && !script.actions.empty()) {
                    script.next = script.actions.size() - 1;
                } else {
                    outcome.failure = TransportFailure{
                        FailureClass::unscripted, 0,
                        "scripted sequence exhausted for fingerprint " +
                            fingerprint_hex(request.prompt.text)};
                }
            }
            if (!outcome.failure.has_value()) {
                const MockAction& action = script.actions[script.next++];
                if (const auto* reply = std::get_if<std::string>(&action.payload)) {
                    outcome.text = *reply;
                } else {
                    const int status = std::get<int>(action.payload);
                    outcome.failure = TransportFailure{
                        classify_status(status), status,
                        "scripted failure with HTTP status " + std::to_string(status)};
                }
            }
        }
    }

    in_flight_.fetch_sub(1);
    return outcome;
}

std::shared_ptr<MockTransport> MockTransport::from_script_file(
    const std::filesystem::path& path) {
    std::ifstream input(path);
    if (!input) {
        throw ConfigError("cannot open mock script file: " + path.string());
    }
    json script_file;
    try {
        input >> script_file;
    } catch (const json::exception& e) {
        throw ConfigError("mock script file is not valid JSON: " + std::string(e.what()));
    }

    auto parse_action = [](const json& item) -> MockAction {
        if (item.is_string()) return MockAction::reply(item.get<std::string>());
        if (item.is_object() && item.contains("reply") && item["reply"].is_string()) {
            return MockAction::reply(item["reply"].get<std::string>());
        }
        if (item.is_object() && item.contains("status") &&
            item["status"].is_number_integer()) {
            return MockAction::fail_status(item["status"].get<int>());
        }
        throw ConfigError("mock script action must be a string, {\"reply\": ...} or "
                          "{\"status\": ...}");
    };

    auto mock = std::make_shared<MockTransport>();
    if (script_file.contains("call_latency_ms")) {
        mock->set_call_latency(
            std::chrono::milliseconds(script_file["call_latency_ms"].get<int>()));
    }
    if (!script_file.contains("responses") || !script_file["responses"].is_array()) {
        throw ConfigError("mock script file needs a \"responses\" array");
    }
    for (const auto& entry : script_file["responses"]) {
        if (!entry.is_object() || !entry.contains("fingerprint")) {
            throw ConfigError("each mock script entry needs a \"fingerprint\"");
        }
        const auto fp = entry["fingerprint"].get<std::string>();
        if (entry.contains("sequence")) {
            std::vector<MockAction> actions;
            for (const auto& item : entry["sequence"]) actions.push_back(parse_action(item));
            mock->script_fingerprint(fp, std::move(actions), /*repeat_single=*/false);
        } else {
            mock->script_fingerprint(fp, {parse_action(entry)}, /*repeat_single=*/true);
        }
    }
    return mock;
}

CompletionResult Gateway::complete(const CompletionRequest& request) {
    validate_model_config(request.config);

    const auto start = std::chrono::steady_clock::now();
    auto backoff = request.config.retry_backoff;
    int attempts = 0;
    while (true) {
        ++attempts;
        TransportOutcome outcome = transport_->attempt(request);
        if (outcome.text.has_value()) {
            const auto elapsed = std::chrono::duration_cast<std::chrono::microseconds>(
                std::chrono::steady_clock::now() - start);
            return CompletionResult{std::move(*outcome.text), elapsed, attempts,
                                    transport_->kind()};
        }
        const TransportFailure& failure = *outcome.failure;
        if (failure.cls == FailureClass::transient && attempts <= request.config.max_retries) {
            if (backoff.count() > 0) {
                std::this_thread::sleep_for(backoff);
                backoff *= 2;
            }
            continue;
        }
        throw_for(failure, attempts);
    }
}

std::vector<BatchItem> Gateway::complete_batch(
    const std::vector<CompletionRequest>& requests, int concurrency_limit) {
    if (concurrency_limit < 1) {
        throw ConfigError("concurrency_limit must be >= 1");
    }

    std::vector<BatchItem> items(requests.size());
    bounded_parallel_for(requests.size(), concurrency_limit, [&](std::size_t i) {
        items[i].tag = requests[i].tag;
        try {
            items[i].result = complete(requests[i]);
        } catch (const std::exception& e) {
            items[i].error = e.what();
        }
    });
    return items;
}

void bounded_parallel_for(std::size_t count, int concurrency_limit,
                          const std::function<void(std::size_t)>& fn) {
    if (count == 0) return;
    const std::size_t workers =
        std::min(static_cast<std::size_t>(std::max(concurrency_limit, 1)), count);
    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            while (true) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                fn(i);
            }
        });
    }
    for (auto& worker : pool) worker.join();
}

}  // namespace codejudge
