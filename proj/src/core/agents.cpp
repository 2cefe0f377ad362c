#include "core/agents.hpp"

#include "core/errors.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

namespace finvision::agents {

const char* action_name(Action a) {
    switch (a) {
        case Action::buy: return "BUY";
        case Action::sell: return "SELL";
        case Action::hold: return "HOLD";
    }
    return "HOLD";
}

namespace {

std::string lower_no_markup(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        if (c == '*' || c == '_' || c == '#' || c == '`') continue;
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    return out;
}

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

// Offset just past "<label>:" in `text` (case-insensitive, markdown markup
// ignored), or npos. The returned offset indexes the original text.
std::size_t find_label_end(std::string_view text, std::string_view label) {
    const std::size_t n = text.size();
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t ti = i, li = 0;
        while (ti < n && li < label.size()) {
            char c = text[ti];
            if (c == '*' || c == '_' || c == '#' || c == '`') {
                ++ti;
                continue;
            }
            if (std::tolower(static_cast<unsigned char>(c)) != label[li]) break;
            ++ti;
            ++li;
        }
        if (li != label.size()) continue;
        // allow markup/space before the colon
        while (ti < n && (text[ti] == '*' || text[ti] == '_' || text[ti] == '`' ||
                          text[ti] == ' ' || text[ti] == '\t')) {
            ++ti;
        }
        if (ti < n && text[ti] == ':') return ti + 1;
    }
    return std::string_view::npos;
}

std::optional<Action> first_action_token(std::string_view s) {
    std::string norm = lower_no_markup(s);
    std::size_t i = 0;
    while (i < norm.size()) {
        while (i < norm.size() && !std::isalpha(static_cast<unsigned char>(norm[i]))) ++i;
        std::size_t start = i;
        while (i < norm.size() && std::isalpha(static_cast<unsigned char>(norm[i]))) ++i;
        std::string_view word(norm.data() + start, i - start);
        if (word == "buy") return Action::buy;
        if (word == "sell") return Action::sell;
        if (word == "hold") return Action::hold;
    }
    return std::nullopt;
}

std::optional<int> first_integer(std::string_view s) {
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) continue;
        std::size_t start = i;
        bool negative = start > 0 && s[start - 1] == '-';
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
        int value = 0;
        std::from_chars(s.data() + start, s.data() + i, value);
        return negative ? -value : value;
    }
    return std::nullopt;
}

} // namespace

DecisionParse parse_decision(std::string_view text) {
    DecisionParse out;

    // Action: first line carrying a Recommendation: label.
    std::optional<Action> action;
    std::size_t after_recommendation = 0;
    {
        std::size_t line_start = 0;
        while (line_start <= text.size()) {
            std::size_t line_end = text.find('\n', line_start);
            if (line_end == std::string_view::npos) line_end = text.size();
            std::string_view line = text.substr(line_start, line_end - line_start);
            std::size_t label_end = find_label_end(line, "recommendation");
            if (label_end != std::string_view::npos) {
                action = first_action_token(line.substr(label_end));
                if (!action) {
                    // tolerate the action on the following non-empty line
                    std::size_t next = line_end + 1;
                    while (next < text.size()) {
                        std::size_t next_end = text.find('\n', next);
                        if (next_end == std::string_view::npos) next_end = text.size();
                        std::string_view next_line = text.substr(next, next_end - next);
                        if (!trim(next_line).empty()) {
                            action = first_action_token(next_line);
                            break;
                        }
                        next = next_end + 1;
                    }
                }
                after_recommendation = line_end;
                break;
            }
            if (line_end == text.size()) break;
            line_start = line_end + 1;
        }
    }

    if (!action) {
        out.decision.action = Action::hold;
        out.decision.position_size = 0;
        std::string body = trim(text);
        out.decision.explanation = body.empty() ? "(unparsable model output)" : body;
        out.events.push_back("no_recommendation");
        return out;
    }
    out.decision.action = *action;

    // Size: first integer after the Position Size: label.
    std::optional<int> size;
    std::size_t after_size = after_recommendation;
    {
        std::size_t label_end = find_label_end(text, "position size");
        if (label_end != std::string_view::npos) {
            std::string_view rest = text.substr(label_end);
            std::size_t line_end = rest.find('\n');
            size = first_integer(rest.substr(0, line_end));
            after_size = label_end + (line_end == std::string_view::npos ? rest.size() : line_end);
        }
    }

    // Explanation: everything after the Explanation: label, else the text that
    // follows the parsed fields.
    {
        std::size_t label_end = find_label_end(text, "explanation");
        std::string body;
        if (label_end != std::string_view::npos) {
            body = trim(text.substr(label_end));
        } else {
            body = trim(text.substr(std::min(after_size, text.size())));
        }
        if (body.empty()) body = trim(text);
        if (body.empty()) body = "(no explanation provided)";
        out.decision.explanation = std::move(body);
    }

    if (out.decision.action == Action::hold) {
        if (size && *size != 0) {
            out.events.push_back("hold_nonzero_size");
        }
        out.decision.position_size = 0;
    } else {
        int s = size.value_or(0);
        if (s < 1 || s > 10) {
            out.events.push_back("size_out_of_range");
            s = std::clamp(s, 1, 10);
        }
        out.decision.position_size = s;
    }
    return out;
}

std::string format_decision(const TradingDecision& decision) {
    std::string out = "Recommendation: ";
    out += action_name(decision.action);
    out += "\nPosition Size: " + std::to_string(decision.position_size);
    out += "\nExplanation: " + decision.explanation;
    return out;
}

RoleSettingsMap default_role_settings() {
    RoleSettingsMap settings;
    for (AgentRole role : kAllRoles) settings[role] = RoleSettings{};
    settings[AgentRole::decision] = RoleSettings{"o1-mini", 1.0};
    return settings;
}

AgentInvoker::AgentInvoker(PromptLibrary prompts, std::shared_ptr<llm::ChatBackend> backend,
                           RoleSettingsMap settings)
    : prompts_(std::move(prompts)), backend_(std::move(backend)), settings_(std::move(settings)) {
    if (!backend_) throw Error::config("agent invoker needs a backend");
    for (AgentRole role : kAllRoles) {
        if (!settings_.count(role)) {
            throw Error::config(std::string("missing role settings for ") + role_name(role));
        }
    }
}

AgentReply AgentInvoker::invoke(AgentRole role, const PromptContext& context,
                                std::span<const std::vector<std::uint8_t>> images) const {
    if (!role_uses_vision(role) && !images.empty()) {
        throw Error::invalid(std::string(role_name(role)) + " is a text-only role but got " +
                             std::to_string(images.size()) + " attachment(s)");
    }
    if (role_uses_vision(role) && images.empty()) {
        throw Error::invalid(std::string(role_name(role)) + " needs a chart attachment");
    }

    const RoleSettings& settings = settings_.at(role);
    llm::ChatRequest request;
    request.model = settings.model;
    request.temperature = settings.temperature;

    llm::Message message;
    message.role = llm::MessageRole::user;
    message.parts.push_back(llm::Part::from_text(prompts_.render(role, context)));
    for (const auto& image : images) {
        message.parts.push_back(llm::Part::from_png(image));
    }
    request.messages.push_back(std::move(message));
    request.validate();

    AgentReply reply;
    reply.request_digest = llm::cache_key(request);
    reply.text = backend_->complete(request).text;
    return reply;
}

} // namespace finvision::agents
