#include "core/gateway.hpp"

#include "core/digest.hpp"
#include "core/errors.hpp"

#include <nlohmann/json.hpp>

#include <fstream>

namespace finvision::llm {

namespace {
constexpr std::uint8_t kPngSignature[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
}

const char* message_role_name(MessageRole role) {
    switch (role) {
        case MessageRole::system: return "system";
        case MessageRole::user: return "user";
        case MessageRole::assistant: return "assistant";
    }
    return "user";
}

Part Part::from_text(std::string t) {
    Part p;
    p.kind = Kind::text;
    p.text = std::move(t);
    return p;
}

Part Part::from_png(std::vector<std::uint8_t> png_bytes) {
    Part p;
    p.kind = Kind::image;
    p.media_type = "image/png";
    p.bytes = std::move(png_bytes);
    return p;
}

void ChatRequest::validate() const {
    if (model.empty()) throw Error::invalid("chat request needs a model identifier");
    if (temperature < 0) throw Error::invalid("temperature must be >= 0");
    if (messages.empty()) throw Error::invalid("chat request needs at least one message");
    if (messages.front().role == MessageRole::assistant) {
        throw Error::invalid("first message role must be system or user");
    }
    for (const auto& message : messages) {
        if (message.parts.empty()) throw Error::invalid("message has no parts");
        for (const auto& part : message.parts) {
            if (part.kind == Part::Kind::image) {
                if (part.bytes.size() < 8 ||
                    !std::equal(std::begin(kPngSignature), std::end(kPngSignature),
                                part.bytes.begin())) {
                    throw Error::invalid("image part does not carry valid PNG bytes");
                }
            }
        }
    }
}

std::string ChatRequest::joined_text() const {
    std::string out;
    for (const auto& message : messages) {
        for (const auto& part : message.parts) {
            if (part.kind == Part::Kind::text) {
                if (!out.empty()) out.push_back('\n');
                out += part.text;
            }
        }
    }
    return out;
}

std::string cache_key(const ChatRequest& request) {
    nlohmann::ordered_json canon;
    canon["model"] = request.model;
    canon["temperature"] = request.temperature;
    auto messages = nlohmann::ordered_json::array();
    for (const auto& message : request.messages) {
        nlohmann::ordered_json m;
        m["role"] = message_role_name(message.role);
        auto parts = nlohmann::ordered_json::array();
        for (const auto& part : message.parts) {
            nlohmann::ordered_json p;
            if (part.kind == Part::Kind::text) {
                p["text"] = part.text;
            } else {
                p["media_type"] = part.media_type;
                p["image_sha256"] = sha256_hex(std::span<const std::uint8_t>(part.bytes));
            }
            parts.push_back(std::move(p));
        }
        m["parts"] = std::move(parts);
        messages.push_back(std::move(m));
    }
    canon["messages"] = std::move(messages);
    return sha256_hex(canon.dump());
}

// --- scripted ----------------------------------------------------------------

ScriptedBackend::ScriptedBackend(std::vector<Entry> entries) : entries_(std::move(entries)) {}

std::shared_ptr<ScriptedBackend> ScriptedBackend::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error::config("cannot open script file: " + path.string());
    std::vector<Entry> entries;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json obj = nlohmann::json::parse(line, nullptr, false);
        if (obj.is_discarded() || !obj.is_object() || !obj.contains("response") ||
            !obj["response"].is_string()) {
            throw Error::config("script line " + std::to_string(line_no) +
                                ": expected {\"match\"?, \"response\"}");
        }
        Entry e;
        e.response = obj["response"].get<std::string>();
        if (obj.contains("match") && obj["match"].is_string()) {
            e.match = obj["match"].get<std::string>();
        }
        entries.push_back(std::move(e));
    }
    return std::make_shared<ScriptedBackend>(std::move(entries));
}

ChatResponse ScriptedBackend::complete(const ChatRequest& request) {
    request.validate();
    std::lock_guard lock(mutex_);
    if (next_ >= entries_.size()) {
        throw Error::gateway("scripted backend exhausted at step " + std::to_string(next_ + 1) +
                             " (script has " + std::to_string(entries_.size()) + " entries)");
    }
    const Entry& entry = entries_[next_];
    if (entry.match && request.joined_text().find(*entry.match) == std::string::npos) {
        throw Error::gateway("script entry " + std::to_string(next_ + 1) + " expects prompt containing '" +
                             *entry.match + "'");
    }
    ++next_;
    ChatResponse response;
    response.text = entry.response;
    response.backend_id = id();
    return response;
}

std::size_t ScriptedBackend::consumed() const {
    std::lock_guard lock(mutex_);
    return next_;
}

std::size_t ScriptedBackend::remaining() const {
    std::lock_guard lock(mutex_);
    return entries_.size() - next_;
}

void ScriptedBackend::fast_forward(std::size_t consumed_count) {
    std::lock_guard lock(mutex_);
    if (consumed_count > entries_.size()) {
        throw Error::gateway("cannot fast-forward script past its end");
    }
    next_ = consumed_count;
}

// --- cache -------------------------------------------------------------------

CachingBackend::CachingBackend(std::filesystem::path dir, std::shared_ptr<ChatBackend> inner)
    : dir_(std::move(dir)), inner_(std::move(inner)) {
    std::filesystem::create_directories(dir_);
}

ChatResponse CachingBackend::complete(const ChatRequest& request) {
    request.validate();
    const std::string key = cache_key(request);
    const auto path = dir_ / (key + ".json");

    {
        std::ifstream in(path);
        if (in) {
            nlohmann::json obj = nlohmann::json::parse(in, nullptr, false);
            if (!obj.is_discarded() && obj.is_object() && obj.contains("response") &&
                obj["response"].is_object() && obj["response"].contains("text")) {
                const auto& r = obj["response"];
                ChatResponse response;
                response.text = r["text"].get<std::string>();
                response.prompt_tokens = r.value("prompt_tokens", std::int64_t{0});
                response.completion_tokens = r.value("completion_tokens", std::int64_t{0});
                response.backend_id = r.value("backend_id", std::string{"unknown"});
                return response;
            }
            // unreadable entry: fall through and refresh it
        }
    }

    ChatResponse response = inner_->complete(request);

    nlohmann::ordered_json obj;
    obj["schema_version"] = 1;
    obj["key"] = key;
    obj["response"] = {{"text", response.text},
                       {"prompt_tokens", response.prompt_tokens},
                       {"completion_tokens", response.completion_tokens},
                       {"backend_id", response.backend_id}};

    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        out << obj.dump(2) << '\n';
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);  // atomic publish; loser of a race is fine
    if (ec) std::filesystem::remove(tmp, ec);
    return response;
}

CacheStats cache_stats(const std::filesystem::path& dir) {
    CacheStats stats;
    if (!std::filesystem::exists(dir)) return stats;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") {
            ++stats.entries;
            stats.bytes += entry.file_size();
        }
    }
    return stats;
}

void cache_clear(const std::filesystem::path& dir) {
    if (!std::filesystem::exists(dir)) return;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") {
            std::filesystem::remove(entry.path());
        }
    }
}

} // namespace finvision::llm
