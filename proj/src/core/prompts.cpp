#include "core/prompts.hpp"

#include "core/errors.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace finvision::agents {

namespace embedded {
// Defined in the generated prompt_resources.cpp.
extern const char* const kSummarizer;
extern const char* const kTechnicalAnalyst;
extern const char* const kReflectionShort;
extern const char* const kReflectionMedium;
extern const char* const kReflectionVisual;
extern const char* const kDecision;
} // namespace embedded

const char* role_name(AgentRole role) {
    switch (role) {
        case AgentRole::summarizer: return "summarizer";
        case AgentRole::technical_analyst: return "technical_analyst";
        case AgentRole::reflection_short: return "reflection_short";
        case AgentRole::reflection_medium: return "reflection_medium";
        case AgentRole::reflection_visual: return "reflection_visual";
        case AgentRole::decision: return "decision";
    }
    return "unknown";
}

AgentRole role_from_name(std::string_view name) {
    for (AgentRole role : kAllRoles) {
        if (name == role_name(role)) return role;
    }
    throw Error::config("unknown agent role '" + std::string(name) + "'");
}

bool role_uses_vision(AgentRole role) {
    return role == AgentRole::technical_analyst || role == AgentRole::reflection_visual;
}

namespace {

// A ":.Nf" suffix at the end of a placeholder token selects fixed-point
// formatting; everything before it is the placeholder name.
bool split_format(std::string_view token, std::string_view& name, int& decimals) {
    auto colon = token.rfind(':');
    if (colon == std::string_view::npos) return false;
    std::string_view fmt = token.substr(colon + 1);
    if (fmt.size() < 3 || fmt.front() != '.' || fmt.back() != 'f') return false;
    int n = 0;
    auto digits = fmt.substr(1, fmt.size() - 2);
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), n);
    if (ec != std::errc{} || ptr != digits.data() + digits.size()) return false;
    name = token.substr(0, colon);
    decimals = n;
    return true;
}

std::string format_value(const PromptValue& value, std::string_view name, int decimals) {
    if (decimals >= 0) {
        double v = 0;
        if (std::holds_alternative<double>(value)) {
            v = std::get<double>(value);
        } else if (std::holds_alternative<std::int64_t>(value)) {
            v = static_cast<double>(std::get<std::int64_t>(value));
        } else {
            throw Error::invalid("placeholder '" + std::string(name) +
                                 "' has a numeric format but a text value");
        }
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
        return buf;
    }
    if (std::holds_alternative<std::string>(value)) return std::get<std::string>(value);
    if (std::holds_alternative<std::int64_t>(value)) {
        return std::to_string(std::get<std::int64_t>(value));
    }
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), std::get<double>(value));
    return std::string(buf, ptr);
}

} // namespace

std::string render_template(std::string_view tpl, const PromptContext& context) {
    std::string out;
    out.reserve(tpl.size() + 256);
    std::size_t pos = 0;
    while (pos < tpl.size()) {
        auto open = tpl.find('{', pos);
        if (open == std::string_view::npos) {
            out.append(tpl.substr(pos));
            break;
        }
        auto close = tpl.find('}', open + 1);
        if (close == std::string_view::npos) {
            throw Error::invalid("unterminated placeholder in prompt template");
        }
        out.append(tpl.substr(pos, open - pos));

        std::string_view token = tpl.substr(open + 1, close - open - 1);
        std::string_view name = token;
        int decimals = -1;
        split_format(token, name, decimals);

        auto it = context.find(name);
        if (it == context.end()) {
            throw Error::invalid("missing placeholder: " + std::string(name));
        }
        out.append(format_value(it->second, name, decimals));
        pos = close + 1;
    }
    return out;
}

namespace {

std::string strip_trailing_newlines(std::string s) {
    while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
    return s;
}

} // namespace

PromptLibrary PromptLibrary::embedded() {
    PromptLibrary lib;
    const char* const texts[] = {embedded::kSummarizer,      embedded::kTechnicalAnalyst,
                                 embedded::kReflectionShort, embedded::kReflectionMedium,
                                 embedded::kReflectionVisual, embedded::kDecision};
    for (std::size_t i = 0; i < kAllRoles.size(); ++i) {
        lib.templates_[i] = strip_trailing_newlines(texts[i]);
    }
    return lib;
}

PromptLibrary PromptLibrary::from_directory(const std::filesystem::path& dir) {
    PromptLibrary lib;
    for (std::size_t i = 0; i < kAllRoles.size(); ++i) {
        auto path = dir / (std::string(role_name(kAllRoles[i])) + ".txt");
        std::ifstream in(path);
        if (!in) throw Error::config("prompt template not found: " + path.string());
        std::ostringstream buf;
        buf << in.rdbuf();
        lib.templates_[i] = strip_trailing_newlines(buf.str());
    }
    return lib;
}

const std::string& PromptLibrary::text(AgentRole role) const {
    return templates_[static_cast<std::size_t>(role)];
}

std::string PromptLibrary::render(AgentRole role, const PromptContext& context) const {
    return render_template(text(role), context);
}

} // namespace finvision::agents
