#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "debatebench/util.hpp"

namespace debatebench {

/// A model endpoint: the model name sent on the wire plus the key of the
/// configured backend that serves it.
struct ModelId {
    std::string name;
    std::string backend_alias;

    bool operator==(const ModelId&) const = default;

    /// Parses "name@alias". A bare name uses itself as the alias.
    static ModelId parse(const std::string& text);
};

struct CompletionRequest {
    ModelId model;
    std::string system_prompt;
    std::string user_prompt;
    std::optional<double> temperature;  // backend default when unset
    std::optional<int> max_tokens;

    void validate() const;
    /// Stable content fingerprint used by scripted backends and call logs.
    std::string fingerprint() const;
};

struct CompletionResult {
    std::string text;
    int attempts = 1;
    std::int64_t latency_ms = 0;
};

struct RetryPolicy {
    int max_attempts = 3;
    std::chrono::milliseconds base_backoff{250};
    double backoff_multiplier = 2.0;
    std::vector<int> retryable_statuses{408, 429, 500, 502, 503, 504};

    bool status_retryable(int status) const;
};

/// One completion attempt against a concrete endpoint. Implementations
/// throw the typed gateway errors; the Gateway applies the retry policy.
class Backend {
public:
    virtual ~Backend() = default;
    virtual CompletionResult attempt(const CompletionRequest& request) = 0;
};

struct BackendConfig {
    std::string type;  // "openai" | "scripted"
    // openai
    std::string base_url;
    std::string key_env_var;
    std::chrono::milliseconds request_timeout{120000};
    // scripted
    bool synthetic = false;
    std::uint64_t seed = 0;
    std::filesystem::path script_file;
    std::filesystem::path call_log;
    // common
    int concurrency_cap = 4;
    double temperature = 0.0;
    int max_tokens = 1024;
    RetryPolicy retry;
};

struct ClockSpec {
    enum class Mode { System, Fixed };
    Mode mode = Mode::System;
    std::chrono::system_clock::time_point at{};

    std::unique_ptr<Clock> make() const;
};

struct GatewayConfig {
    std::map<std::string, BackendConfig> backends;
    ClockSpec clock;
    std::string digest;  // over the source document

    static GatewayConfig from_json(const nlohmann::json& doc);
    static GatewayConfig from_file(const std::filesystem::path& file);
};

/// Deterministic test backend: canned responses by request fingerprint,
/// with an optional synthetic fallback that derives a response from the
/// request content alone (so replays are byte-identical).
class ScriptedBackend final : public Backend {
public:
    explicit ScriptedBackend(const BackendConfig& config);

    /// Registers canned responses. Throws DuplicateFingerprint.
    void register_script(const std::map<std::string, std::string>& script);
    void register_response(const std::string& fingerprint, const std::string& response);

    CompletionResult attempt(const CompletionRequest& request) override;

    std::uint64_t calls() const { return calls_.load(); }

private:
    std::string synthesize(const CompletionRequest& request) const;
    void log_call(const std::string& fingerprint) const;

    std::unordered_map<std::string, std::string> script_;
    bool synthetic_ = false;
    std::uint64_t seed_ = 0;
    std::filesystem::path call_log_;
    mutable std::atomic<std::uint64_t> calls_{0};
    mutable std::mutex mu_;
};

/// OpenAI-compatible chat-completions client. The API key is read from
/// the configured environment variable at request time and never stored.
class HttpBackend final : public Backend {
public:
    explicit HttpBackend(const BackendConfig& config);
    CompletionResult attempt(const CompletionRequest& request) override;

private:
    std::string origin_;       // scheme://host[:port]
    std::string path_prefix_;  // e.g. "/v1"
    std::string key_env_var_;
    std::chrono::milliseconds timeout_;
};

/// Uniform completion front end over the configured backends. Shareable
/// across threads; enforces per-endpoint in-flight caps and retries.
class Gateway {
public:
    explicit Gateway(GatewayConfig config);

    /// Issues a completion with retries per the backend's policy.
    /// Terminal errors: TimeoutError, RateLimitedError, EndpointError,
    /// EmptyCompletion, ScriptMiss.
    CompletionResult complete(const CompletionRequest& request);

    bool has_backend(const std::string& alias) const;
    const BackendConfig& backend_config(const std::string& alias) const;
    const GatewayConfig& config() const { return config_; }

    /// Handle to a scripted backend (ConfigError if the alias is not
    /// scripted). Used to register scripts and read call counters.
    ScriptedBackend& scripted(const std::string& alias);

    /// Installs a test backend under an alias (default config).
    void install_backend(const std::string& alias, std::unique_ptr<Backend> backend);

    /// Sleep hook for retry backoff; tests may replace it.
    std::function<void(std::chrono::milliseconds)> sleep_fn;

private:
    class Semaphore {
    public:
        explicit Semaphore(int slots) : slots_(slots) {}
        void acquire();
        void release();

    private:
        std::mutex mu_;
        std::condition_variable cv_;
        int slots_;
    };

    struct Endpoint {
        BackendConfig config;
        std::unique_ptr<Backend> backend;
        std::unique_ptr<Semaphore> semaphore;
    };

    Endpoint& endpoint(const std::string& alias);

    GatewayConfig config_;
    std::map<std::string, Endpoint> endpoints_;
};

}  // namespace debatebench
