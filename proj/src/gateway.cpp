#include "debatebench/gateway.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include <fcntl.h>
#include <unistd.h>

#include <nlohmann/json.hpp>

#include "debatebench/errors.hpp"

#include <httplib.h>

namespace debatebench {

using nlohmann::json;

ModelId ModelId::parse(const std::string& text) {
    size_t at = text.rfind('@');
    if (at == std::string::npos) return ModelId{text, text};
    ModelId id{text.substr(0, at), text.substr(at + 1)};
    if (id.name.empty() || id.backend_alias.empty()) {
        throw ConfigError("invalid model spec: " + text);
    }
    return id;
}

void CompletionRequest::validate() const {
    if (model.name.empty()) throw ConfigError("completion request lacks a model name");
    if (system_prompt.empty() || user_prompt.empty()) {
        throw ConfigError("completion request prompts must be non-empty");
    }
    if (temperature && *temperature < 0) throw ConfigError("temperature must be >= 0");
    if (max_tokens && *max_tokens <= 0) throw ConfigError("max_tokens must be positive");
}

std::string CompletionRequest::fingerprint() const {
    return model.name + ":" + fnv1a64_hex(system_prompt) + ":" + fnv1a64_hex(user_prompt);
}

bool RetryPolicy::status_retryable(int status) const {
    return std::find(retryable_statuses.begin(), retryable_statuses.end(), status) !=
           retryable_statuses.end();
}

std::unique_ptr<Clock> ClockSpec::make() const {
    if (mode == Mode::Fixed) return std::make_unique<FixedClock>(at);
    return std::make_unique<SystemClock>();
}

// ---- configuration ----------------------------------------------------------

namespace {

RetryPolicy retry_from_json(const json& doc) {
    RetryPolicy p;
    if (doc.contains("max_attempts")) p.max_attempts = doc.at("max_attempts").get<int>();
    if (p.max_attempts < 1) throw ConfigError("retry.max_attempts must be >= 1");
    if (doc.contains("base_backoff_ms")) {
        p.base_backoff = std::chrono::milliseconds(doc.at("base_backoff_ms").get<int>());
    }
    if (doc.contains("backoff_multiplier")) {
        p.backoff_multiplier = doc.at("backoff_multiplier").get<double>();
        if (p.backoff_multiplier <= 1.0) {
            throw ConfigError("retry.backoff_multiplier must be > 1");
        }
    }
    if (doc.contains("retryable_statuses")) {
        p.retryable_statuses = doc.at("retryable_statuses").get<std::vector<int>>();
    }
    return p;
}

BackendConfig backend_from_json(const std::string& alias, const json& doc) {
    BackendConfig c;
    c.type = doc.value("type", "openai");
    if (c.type != "openai" && c.type != "scripted") {
        throw ConfigError("backend " + alias + ": unknown type \"" + c.type + "\"");
    }
    if (c.type == "openai") {
        if (!doc.contains("base_url")) {
            throw ConfigError("backend " + alias + ": base_url is required");
        }
        c.base_url = doc.at("base_url").get<std::string>();
        c.key_env_var = doc.value("key_env_var", "");
        if (doc.contains("request_timeout_ms")) {
            c.request_timeout =
                std::chrono::milliseconds(doc.at("request_timeout_ms").get<int>());
        }
    } else {
        c.synthetic = doc.value("mode", "synthetic") == "synthetic";
        c.seed = doc.value("seed", std::uint64_t{0});
        if (doc.contains("script_file")) {
            c.script_file = doc.at("script_file").get<std::string>();
        }
        if (doc.contains("call_log")) c.call_log = doc.at("call_log").get<std::string>();
    }
    c.concurrency_cap = doc.value("concurrency_cap", 4);
    if (c.concurrency_cap < 1) {
        throw ConfigError("backend " + alias + ": concurrency_cap must be >= 1");
    }
    c.temperature = doc.value("temperature", 0.0);
    c.max_tokens = doc.value("max_tokens", 1024);
    if (doc.contains("retry")) c.retry = retry_from_json(doc.at("retry"));
    return c;
}

}  // namespace

GatewayConfig GatewayConfig::from_json(const json& doc) {
    GatewayConfig config;
    if (!doc.contains("backends") || !doc.at("backends").is_object() ||
        doc.at("backends").empty()) {
        throw ConfigError("gateway config requires a non-empty \"backends\" object");
    }
    for (const auto& [alias, spec] : doc.at("backends").items()) {
        config.backends.emplace(alias, backend_from_json(alias, spec));
    }
    if (doc.contains("clock")) {
        const json& clock = doc.at("clock");
        std::string mode = clock.value("mode", "system");
        if (mode == "fixed") {
            config.clock.mode = ClockSpec::Mode::Fixed;
            config.clock.at = parse_iso8601_utc(clock.value("at", "1970-01-01T00:00:00Z"));
        } else if (mode != "system") {
            throw ConfigError("clock.mode must be \"system\" or \"fixed\"");
        }
    }
    config.digest = fnv1a64_hex(doc.dump());
    return config;
}

GatewayConfig GatewayConfig::from_file(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot open gateway config: " + file.string());
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ConfigError("gateway config is not valid JSON: " + std::string(e.what()));
    }
    return from_json(doc);
}

// ---- scripted backend --------------------------------------------------------

ScriptedBackend::ScriptedBackend(const BackendConfig& config)
    : synthetic_(config.synthetic), seed_(config.seed), call_log_(config.call_log) {
    if (!config.script_file.empty()) {
        std::ifstream in(config.script_file);
        if (!in) {
            throw ConfigError("cannot open script file: " + config.script_file.string());
        }
        json doc;
        in >> doc;
        std::map<std::string, std::string> script;
        for (const auto& [fp, response] : doc.items()) {
            script.emplace(fp, response.get<std::string>());
        }
        register_script(script);
    }
}

void ScriptedBackend::register_script(const std::map<std::string, std::string>& script) {
    for (const auto& [fp, response] : script) register_response(fp, response);
}

void ScriptedBackend::register_response(const std::string& fingerprint,
                                        const std::string& response) {
    std::lock_guard<std::mutex> lock(mu_);
    if (!script_.emplace(fingerprint, response).second) {
        throw DuplicateFingerprint("fingerprint already scripted: " + fingerprint);
    }
}

std::string ScriptedBackend::synthesize(const CompletionRequest& request) const {
    std::uint64_t h = fnv1a64(request.model.name + "\x1f" + request.system_prompt +
                              "\x1f" + request.user_prompt) ^
                      seed_;
    // Judge requests are recognized by the judge system prompt; everything
    // else gets a deterministic argument line.
    if (request.system_prompt.find("You are a judge for this debate.") !=
        std::string::npos) {
        auto score_str = [](int tenths) {
            std::string s = std::to_string(tenths / 10);
            if (tenths % 10 != 0) s += "." + std::to_string(tenths % 10);
            return s;
        };
        int s1 = 10 + 5 * static_cast<int>(h % 19);
        int s2 = 10 + 5 * static_cast<int>((h >> 16) % 19);
        int winner = 1 + static_cast<int>((h >> 32) & 1);
        return "side1: [[" + score_str(s1) + "]], side2: [[" + score_str(s2) +
               "]], winner: [[" + std::to_string(winner) + "]]";
    }
    return "Position statement " + fnv1a64_hex(std::to_string(h)) + " from " +
           request.model.name + ".";
}

void ScriptedBackend::log_call(const std::string& fingerprint) const {
    if (call_log_.empty()) return;
    std::string line = fingerprint + "\n";
    int fd = ::open(call_log_.c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644);
    if (fd < 0) return;
    [[maybe_unused]] ssize_t n = ::write(fd, line.data(), line.size());
    ::close(fd);
}

CompletionResult ScriptedBackend::attempt(const CompletionRequest& request) {
    std::string fp = request.fingerprint();
    calls_.fetch_add(1);
    log_call(fp);
    {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = script_.find(fp);
        if (it != script_.end()) return CompletionResult{it->second, 1, 0};
    }
    if (synthetic_) return CompletionResult{synthesize(request), 1, 0};
    throw ScriptMiss("no scripted response for fingerprint " + fp);
}

// ---- HTTP backend -------------------------------------------------------------

HttpBackend::HttpBackend(const BackendConfig& config)
    : key_env_var_(config.key_env_var), timeout_(config.request_timeout) {
    const std::string& url = config.base_url;
    size_t scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw ConfigError("base_url must include a scheme: " + url);
    }
    size_t path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
        origin_ = url;
    } else {
        origin_ = url.substr(0, path_start);
        path_prefix_ = url.substr(path_start);
        while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
    }
#ifndef DEBATEBENCH_TLS
    if (origin_.rfind("https://", 0) == 0) {
        throw ConfigError("built without TLS support; https base_url unavailable");
    }
#endif
}

CompletionResult HttpBackend::attempt(const CompletionRequest& request) {
    json body = {
        {"model", request.model.name},
        {"messages",
         json::array({json{{"role", "system"}, {"content", request.system_prompt}},
                      json{{"role", "user"}, {"content", request.user_prompt}}})},
    };
    if (request.temperature) body["temperature"] = *request.temperature;
    if (request.max_tokens) body["max_tokens"] = *request.max_tokens;

    httplib::Headers headers;
    if (!key_env_var_.empty()) {
        const char* key = std::getenv(key_env_var_.c_str());
        if (key == nullptr || *key == '\0') {
            throw ConfigError("environment variable " + key_env_var_ + " is not set");
        }
        headers.emplace("Authorization", std::string("Bearer ") + key);
    }

    httplib::Client client(origin_);
    auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout_);
    auto rem_us = std::chrono::duration_cast<std::chrono::microseconds>(timeout_ - secs);
    client.set_connection_timeout(secs.count(), rem_us.count());
    client.set_read_timeout(secs.count(), rem_us.count());
    client.set_write_timeout(secs.count(), rem_us.count());

    auto started = std::chrono::steady_clock::now();
    httplib::Result res = client.Post(path_prefix_ + "/chat/completions", headers,
                                      body.dump(), "application/json");
    auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::steady_clock::now() - started)
                       .count();

    if (!res) {
        httplib::Error err = res.error();
        if (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read ||
            err == httplib::Error::Write) {
            throw TimeoutError("request timed out: " + httplib::to_string(err));
        }
        throw EndpointError(0, "transport failure: " + httplib::to_string(err));
    }
    if (res->status == 429) {
        throw RateLimitedError("rate limited (HTTP 429)");
    }
    if (res->status < 200 || res->status >= 300) {
        throw EndpointError(res->status,
                            "HTTP " + std::to_string(res->status) + ": " + res->body);
    }

    std::string text;
    try {
        json doc = json::parse(res->body);
        text = doc.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
        throw EndpointError(res->status,
                            "malformed completion payload: " + std::string(e.what()));
    }
    if (trim(text).empty()) throw EmptyCompletion("model returned a blank completion");
    return CompletionResult{text, 1, elapsed};
}

// ---- gateway -----------------------------------------------------------------

void Gateway::Semaphore::acquire() {
    std::unique_lock<std::mutex> lock(mu_);
    cv_.wait(lock, [this] { return slots_ > 0; });
    --slots_;
}

void Gateway::Semaphore::release() {
    {
        std::lock_guard<std::mutex> lock(mu_);
        ++slots_;
    }
    cv_.notify_one();
}

Gateway::Gateway(GatewayConfig config) : config_(std::move(config)) {
    sleep_fn = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
    for (const auto& [alias, bc] : config_.backends) {
        Endpoint ep;
        ep.config = bc;
        if (bc.type == "scripted") {
            ep.backend = std::make_unique<ScriptedBackend>(bc);
        } else {
            ep.backend = std::make_unique<HttpBackend>(bc);
        }
        ep.semaphore = std::make_unique<Semaphore>(bc.concurrency_cap);
        endpoints_.emplace(alias, std::move(ep));
    }
}

bool Gateway::has_backend(const std::string& alias) const {
    return endpoints_.count(alias) > 0;
}

const BackendConfig& Gateway::backend_config(const std::string& alias) const {
    auto it = endpoints_.find(alias);
    if (it == endpoints_.end()) throw ConfigError("unknown backend alias: " + alias);
    return it->second.config;
}

Gateway::Endpoint& Gateway::endpoint(const std::string& alias) {
    auto it = endpoints_.find(alias);
    if (it == endpoints_.end()) throw ConfigError("unknown backend alias: " + alias);
    return it->second;
}

ScriptedBackend& Gateway::scripted(const std::string& alias) {
    auto* backend = dynamic_cast<ScriptedBackend*>(endpoint(alias).backend.get());
    if (backend == nullptr) throw ConfigError("backend is not scripted: " + alias);
    return *backend;
}

void Gateway::install_backend(const std::string& alias, std::unique_ptr<Backend> backend) {
    auto it = endpoints_.find(alias);
    if (it != endpoints_.end()) {
        // keep the endpoint's config and semaphore
        it->second.backend = std::move(backend);
        return;
    }
    Endpoint ep;
    ep.backend = std::move(backend);
    ep.semaphore = std::make_unique<Semaphore>(ep.config.concurrency_cap);
    endpoints_[alias] = std::move(ep);
}

CompletionResult Gateway::complete(const CompletionRequest& request) {
    CompletionRequest req = request;
    Endpoint& ep = endpoint(req.model.backend_alias);
    if (!req.temperature) req.temperature = ep.config.temperature;
    if (!req.max_tokens) req.max_tokens = ep.config.max_tokens;
    req.validate();

    const RetryPolicy& policy = ep.config.retry;
    ep.semaphore->acquire();
    struct Release {
        Semaphore* s;
        ~Release() { s->release(); }
    } release{ep.semaphore.get()};

    double backoff = static_cast<double>(policy.base_backoff.count());
    for (int attempt = 1;; ++attempt) {
        bool retryable = false;
        try {
            CompletionResult result = ep.backend->attempt(req);
            result.attempts = attempt;
            return result;
        } catch (const TimeoutError&) {
            retryable = true;
            if (attempt >= policy.max_attempts) throw;
        } catch (const RateLimitedError&) {
            retryable = true;
            if (attempt >= policy.max_attempts) throw;
        } catch (const EmptyCompletion&) {
            retryable = true;
            if (attempt >= policy.max_attempts) throw;
        } catch (const EndpointError& e) {
            retryable = e.status() != 0 && policy.status_retryable(e.status());
            if (!retryable || attempt >= policy.max_attempts) throw;
        }
        if (retryable) {
            sleep_fn(std::chrono::milliseconds(static_cast<std::int64_t>(backoff)));
            backoff *= policy.backoff_multiplier;
        }
    }
}

}  // namespace debatebench
