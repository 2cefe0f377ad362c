#include "core/digest.hpp"
#include "core/errors.hpp"
#include "core/gateway.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <chrono>
#include <condition_variable>
#include <random>
#include <thread>

namespace finvision::llm {
namespace {

struct ParsedUrl {
    std::string origin;       // scheme://host[:port], what httplib::Client wants
    std::string path_prefix;  // e.g. "/v1"
};

ParsedUrl parse_base_url(const std::string& base_url) {
    auto scheme_end = base_url.find("://");
    if (scheme_end == std::string::npos) {
        throw Error::config("base_url must include a scheme: " + base_url);
    }
    auto path_start = base_url.find('/', scheme_end + 3);
    ParsedUrl out;
    if (path_start == std::string::npos) {
        out.origin = base_url;
    } else {
        out.origin = base_url.substr(0, path_start);
        out.path_prefix = base_url.substr(path_start);
        while (!out.path_prefix.empty() && out.path_prefix.back() == '/') {
            out.path_prefix.pop_back();
        }
    }
    return out;
}

std::string excerpt(const std::string& body) {
    constexpr std::size_t kMax = 200;
    if (body.size() <= kMax) return body;
    return body.substr(0, kMax) + "...";
}

// Counting semaphore bounding in-flight requests.
class Gate {
public:
    explicit Gate(int limit) : available_(limit < 1 ? 1 : limit) {}

    void acquire() {
        std::unique_lock lock(mutex_);
        cv_.wait(lock, [&] { return available_ > 0; });
        --available_;
    }
    void release() {
        {
            std::lock_guard lock(mutex_);
            ++available_;
        }
        cv_.notify_one();
    }

private:
    std::mutex mutex_;
    std::condition_variable cv_;
    int available_;
};

struct GateGuard {
    Gate& gate;
    explicit GateGuard(Gate& g) : gate(g) { gate.acquire(); }
    ~GateGuard() { gate.release(); }
};

} // namespace

struct HttpBackend::Impl {
    HttpOptions options;
    ParsedUrl url;
    Gate gate;
    std::mt19937 jitter_rng{std::random_device{}()};
    std::mutex rng_mutex;

    explicit Impl(HttpOptions o) : options(std::move(o)), url(parse_base_url(options.base_url)),
                                   gate(options.max_concurrent) {}

    int backoff_ms(int attempt) {
        double base = options.retry_base_ms * static_cast<double>(1 << attempt);
        std::lock_guard lock(rng_mutex);
        std::uniform_real_distribution<double> jitter(0.8, 1.2);
        return static_cast<int>(base * jitter(jitter_rng));
    }
};

HttpBackend::HttpBackend(HttpOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {
    if (impl_->options.base_url.empty()) {
        throw Error::config("http backend needs a base_url");
    }
}

HttpBackend::~HttpBackend() = default;

std::string HttpBackend::request_body_json(const ChatRequest& request) {
    nlohmann::ordered_json body;
    body["model"] = request.model;
    body["temperature"] = request.temperature;
    auto messages = nlohmann::ordered_json::array();
    for (const auto& message : request.messages) {
        nlohmann::ordered_json m;
        m["role"] = message_role_name(message.role);
        auto content = nlohmann::ordered_json::array();
        for (const auto& part : message.parts) {
            if (part.kind == Part::Kind::text) {
                content.push_back({{"type", "text"}, {"text", part.text}});
            } else {
                std::string uri = "data:" + part.media_type + ";base64," +
                                  base64_encode(std::span<const std::uint8_t>(part.bytes));
                content.push_back(
                    {{"type", "image_url"}, {"image_url", {{"url", std::move(uri)}}}});
            }
        }
        m["content"] = std::move(content);
        messages.push_back(std::move(m));
    }
    body["messages"] = std::move(messages);
    return body.dump();
}

ChatResponse HttpBackend::complete(const ChatRequest& request) {
    request.validate();
    const std::string body = request_body_json(request);
    const std::string path = impl_->url.path_prefix + "/chat/completions";

    httplib::Headers headers;
    if (!impl_->options.api_key.empty()) {
        headers.emplace("Authorization", "Bearer " + impl_->options.api_key);
    }

    std::string last_failure;
    const int attempts = impl_->options.max_retries + 1;
    for (int attempt = 0; attempt < attempts; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(std::chrono::milliseconds(impl_->backoff_ms(attempt - 1)));
        }

        httplib::Result result;
        {
            GateGuard guard(impl_->gate);
            httplib::Client client(impl_->url.origin);
            client.set_connection_timeout(impl_->options.timeout_seconds, 0);
            client.set_read_timeout(impl_->options.timeout_seconds, 0);
            client.set_write_timeout(impl_->options.timeout_seconds, 0);
            result = client.Post(path, headers, body, "application/json");
        }

        if (!result) {
            last_failure = "transport error: " + httplib::to_string(result.error());
            continue;
        }
        if (result->status == 429 || result->status >= 500) {
            last_failure = "HTTP " + std::to_string(result->status) + ": " + excerpt(result->body);
            continue;
        }
        if (result->status != 200) {
            throw Error::gateway("HTTP " + std::to_string(result->status) + " from " + path +
                                 ": " + excerpt(result->body));
        }

        nlohmann::json obj = nlohmann::json::parse(result->body, nullptr, false);
        if (obj.is_discarded() || !obj.contains("choices") || !obj["choices"].is_array() ||
            obj["choices"].empty()) {
            throw Error::gateway("malformed chat-completions response: " + excerpt(result->body));
        }
        const auto& message = obj["choices"][0]["message"];
        ChatResponse response;
        if (message.contains("content") && message["content"].is_string()) {
            response.text = message["content"].get<std::string>();
        } else if (message.contains("content") && message["content"].is_array()) {
            for (const auto& piece : message["content"]) {
                if (piece.is_object() && piece.value("type", "") == "text") {
                    response.text += piece.value("text", "");
                }
            }
        } else {
            throw Error::gateway("chat-completions response lacks message content");
        }
        if (obj.contains("usage") && obj["usage"].is_object()) {
            response.prompt_tokens = obj["usage"].value("prompt_tokens", std::int64_t{0});
            response.completion_tokens = obj["usage"].value("completion_tokens", std::int64_t{0});
        }
        response.backend_id = id();
        return response;
    }
    throw Error::gateway("chat completion failed after " + std::to_string(attempts) +
                         " attempts; last error: " + last_failure);
}

} // namespace finvision::llm
