#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace finvision::llm {

enum class MessageRole { system, user, assistant };

const char* message_role_name(MessageRole role);

struct Part {
    enum class Kind { text, image };
    Kind kind = Kind::text;
    std::string text;                  // text parts
    std::string media_type;           // image parts, e.g. "image/png"
    std::vector<std::uint8_t> bytes;  // image parts

    static Part from_text(std::string t);
    static Part from_png(std::vector<std::uint8_t> png_bytes);
};

struct Message {
    MessageRole role = MessageRole::user;
    std::vector<Part> parts;
};

struct ChatRequest {
    std::string model;
    double temperature = 0.3;
    std::vector<Message> messages;

    // at least one message, first role system or user, parts non-empty,
    // image parts carry a valid PNG signature
    void validate() const;
    std::string joined_text() const;  // all text parts, for script matching
};

struct ChatResponse {
    std::string text;
    std::int64_t prompt_tokens = 0;      // 0 when the backend omits usage
    std::int64_t completion_tokens = 0;
    std::string backend_id;
};

// Stable 256-bit digest over a canonical serialization of the request: model,
// temperature, roles, text parts verbatim, image parts by content digest.
std::string cache_key(const ChatRequest& request);

class ChatBackend {
public:
    virtual ~ChatBackend() = default;
    virtual ChatResponse complete(const ChatRequest& request) = 0;
    virtual std::string id() const = 0;
    // True when concurrent in-flight calls keep results reproducible.
    virtual bool supports_concurrency() const { return false; }
};

// Deterministic stand-in for tests and reproducible backtests: replays
// predefined responses in file order.
class ScriptedBackend : public ChatBackend {
public:
    struct Entry {
        std::optional<std::string> match;  // required substring of the prompt text
        std::string response;
    };

    explicit ScriptedBackend(std::vector<Entry> entries);
    // JSON-lines, one {"match": ..., "response": ...} per line; match optional.
    static std::shared_ptr<ScriptedBackend> from_file(const std::filesystem::path& path);

    ChatResponse complete(const ChatRequest& request) override;
    std::string id() const override { return "scripted"; }

    std::size_t consumed() const;
    std::size_t remaining() const;
    // Skips entries already consumed before a checkpointed resume.
    void fast_forward(std::size_t consumed_count);

private:
    mutable std::mutex mutex_;
    std::vector<Entry> entries_;
    std::size_t next_ = 0;
};

// Content-addressed disk cache wrapping another backend: one file per entry,
// written atomically (temp + rename). A corrupt entry reads as a miss.
class CachingBackend : public ChatBackend {
public:
    CachingBackend(std::filesystem::path dir, std::shared_ptr<ChatBackend> inner);

    ChatResponse complete(const ChatRequest& request) override;
    std::string id() const override { return "cache(" + inner_->id() + ")"; }
    bool supports_concurrency() const override { return inner_->supports_concurrency(); }
    const std::shared_ptr<ChatBackend>& inner() const { return inner_; }

private:
    std::filesystem::path dir_;
    std::shared_ptr<ChatBackend> inner_;
};

struct CacheStats {
    std::uint64_t entries = 0;
    std::uint64_t bytes = 0;
};

CacheStats cache_stats(const std::filesystem::path& dir);
void cache_clear(const std::filesystem::path& dir);

struct HttpOptions {
    std::string base_url;     // e.g. "https://api.openai.com/v1"
    std::string api_key;      // sent as a bearer token when non-empty
    int timeout_seconds = 120;
    int max_retries = 3;      // extra attempts on transport errors, 429 and 5xx
    int retry_base_ms = 1000; // doubled per retry, +/-20% jitter
    int max_concurrent = 4;   // in-flight request bound
};

// OpenAI-compatible chat-completions client. POSTs {base_url}/chat/completions
// and surfaces choices[0].message.content.
class HttpBackend : public ChatBackend {
public:
    explicit HttpBackend(HttpOptions options);
    ~HttpBackend() override;

    ChatResponse complete(const ChatRequest& request) override;
    std::string id() const override { return "http"; }
    bool supports_concurrency() const override { return true; }

    // Request body as sent on the wire, exposed for conformance tests.
    static std::string request_body_json(const ChatRequest& request);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace finvision::llm
