// Uniform access to chat-completion backends: an HTTP client for
// OpenAI-compatible endpoints and a deterministic scripted mock for tests,
// behind one retry policy and a bounded-concurrency batch primitive.

#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "codejudge/prompt.hpp"

namespace codejudge {

struct ModelConfig {
    std::string model_name = "gpt-3.5-turbo";
    std::string endpoint_url;                 // base URL, e.g. https://api.openai.com/v1
    std::string api_key_env = "OPENAI_API_KEY";  // name of the env var holding the key
    double temperature = 0.4;
    double top_p = 0.9;
    int max_output_tokens = 1024;
    std::chrono::milliseconds request_timeout{60000};
    int max_retries = 3;
    std::chrono::milliseconds retry_backoff{500};  // doubled after each transient failure
};

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// temperature >= 0, top_p in (0,1], positive token budget and retry bounds.
void validate_model_config(const ModelConfig& config);

struct CompletionRequest {
    RenderedPrompt prompt;
    ModelConfig config;
    std::string tag;  // opaque correlation id (task/candidate/run)
};

enum class BackendKind { http, mock };

std::string to_string(BackendKind kind);

struct CompletionResult {
    std::string text;  // raw assistant message, untrimmed
    std::chrono::microseconds latency{0};
    int attempt_count = 1;
    BackendKind backend = BackendKind::mock;
};

class GatewayError : public std::runtime_error {
public:
    GatewayError(const std::string& message, int attempt_count)
        : std::runtime_error(message), attempt_count_(attempt_count) {}

    int attempt_count() const { return attempt_count_; }

private:
    int attempt_count_;
};

// Transient failures persisted through all retries.
class BackendExhausted : public GatewayError {
public:
    using GatewayError::GatewayError;
};

// 401/403; never retried.
class AuthError : public GatewayError {
public:
    using GatewayError::GatewayError;
};

// Wire payload lacked an assistant message.
class MalformedResponse : public GatewayError {
public:
    using GatewayError::GatewayError;
};

// Non-retriable request rejection (4xx other than 401/403/429).
class RequestRejected : public GatewayError {
public:
    using GatewayError::GatewayError;
};

// Mock received a prompt it has no script for (or a scripted sequence ran dry).
class UnscriptedPrompt : public GatewayError {
public:
    using GatewayError::GatewayError;
};

// ---------------------------------------------------------------------------
// Transport layer: a single attempt against a backend, no retry logic.

enum class FailureClass { transient, auth, permanent, malformed, unscripted };

// timeouts/connect failures and 429/5xx are transient; 401/403 auth;
// remaining 4xx permanent.
FailureClass classify_status(int http_status);

struct TransportFailure {
    FailureClass cls = FailureClass::transient;
    int http_status = 0;  // 0 for non-HTTP failures
    std::string detail;
};

struct TransportOutcome {
    std::optional<std::string> text;
    std::optional<TransportFailure> failure;
};

class Transport {
public:
    virtual ~Transport() = default;
    virtual TransportOutcome attempt(const CompletionRequest& request) = 0;
    virtual BackendKind kind() const = 0;
};

// ---------------------------------------------------------------------------
// HTTP transport (OpenAI-compatible chat completions).

// JSON body for POST <endpoint>/chat/completions: model, a single user
// message carrying the prompt text byte-for-byte, temperature, top_p,
// max_tokens.
std::string build_chat_request_body(const CompletionRequest& request);

// choices[0].message.content, or nullopt when the payload has no assistant
// message.
std::optional<std::string> extract_assistant_message(const std::string& response_body);

class HttpTransport : public Transport {
public:
    TransportOutcome attempt(const CompletionRequest& request) override;
    BackendKind kind() const override { return BackendKind::http; }
};

// ---------------------------------------------------------------------------
// Scripted mock transport.

// Stable 64-bit FNV-1a over the prompt text; the mock's lookup key.
std::uint64_t fingerprint(std::string_view text);
std::string fingerprint_hex(std::string_view text);

struct MockAction {
    std::variant<std::string, int> payload;  // reply text or HTTP status to fail with

    static MockAction reply(std::string text) { return {std::move(text)}; }
    static MockAction fail_status(int http_status) { return {http_status}; }
};

// Answers by exact fingerprint match on the prompt text. A single reply
// repeats on every call; a sequence yields successive items and raises
// UnscriptedPrompt once exhausted. Sequence state is synchronized; the
// instrumentation counters make concurrency observable in tests.
class MockTransport : public Transport {
public:
    void script(std::string_view prompt_text, std::string reply);
    void script_sequence(std::string_view prompt_text, std::vector<MockAction> actions);
    void script_fingerprint(const std::string& fingerprint_hex,
                            std::vector<MockAction> actions, bool repeat_single);

    // Simulated per-call work, so in-flight overlap is observable.
    void set_call_latency(std::chrono::milliseconds latency) { call_latency_ = latency; }

    TransportOutcome attempt(const CompletionRequest& request) override;
    BackendKind kind() const override { return BackendKind::mock; }

    int total_calls() const { return total_calls_.load(); }
    int high_water_in_flight() const { return high_water_.load(); }

    // Script file: {"responses": [{"fingerprint": "...", "reply": "..."} |
    // {"fingerprint": "...", "sequence": ["...", {"status": 429}, ...]}],
    // "call_latency_ms": 0}
    static std::shared_ptr<MockTransport> from_script_file(const std::filesystem::path& path);

private:
    struct Script {
        std::vector<MockAction> actions;
        bool repeat_single = false;  // single replies repeat; sequences run dry
        std::size_t next = 0;
    };

    std::mutex mutex_;
    std::map<std::string, Script> scripts_;
    std::chrono::milliseconds call_latency_{0};
    std::atomic<int> total_calls_{0};
    std::atomic<int> in_flight_{0};
    std::atomic<int> high_water_{0};
};

// ---------------------------------------------------------------------------
// Gateway: retry policy over a transport, plus ordered batching.

struct BatchItem {
    std::string tag;
    std::optional<CompletionResult> result;
    std::optional<std::string> error;  // message when the item failed

    bool ok() const { return result.has_value(); }
};

class Gateway {
public:
    explicit Gateway(std::shared_ptr<Transport> transport)
        : transport_(std::move(transport)) {}

    // First successful completion; transient failures retried with
    // exponential backoff up to config.max_retries. Throws the typed
    // GatewayError subclasses above.
    CompletionResult complete(const CompletionRequest& request);

    // Results in input order; at most concurrency_limit requests in flight;
    // one item's failure never aborts the batch.
    std::vector<BatchItem> complete_batch(const std::vector<CompletionRequest>& requests,
                                          int concurrency_limit);

    Transport& transport() { return *transport_; }

private:
    std::shared_ptr<Transport> transport_;
};

// Runs fn(0..count-1) on at most concurrency_limit worker threads. fn must
// capture its own failures; indices partition the output, so writers never
// alias.
void bounded_parallel_for(std::size_t count, int concurrency_limit,
                          const std::function<void(std::size_t)>& fn);

}  // namespace codejudge
